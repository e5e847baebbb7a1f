"""Exception hierarchy shared by all parplan modules."""


class ParplanError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(ParplanError):
    """Model-level inconsistency: unknown ids, bad domains, non-total states."""


class UsageError(ParplanError):
    """API misuse (out-of-order steps, callbacks adding clauses, bad ranges)."""


class InputError(ParplanError):
    """Malformed or inconsistent input file."""

    def __init__(self, message, line=None, col=None, source=None):
        self.line = line
        self.col = col
        self.source = source
        super().__init__(message)

    def location(self):
        src = self.source or "<input>"
        if self.line is None:
            return src
        return f"{src}:{self.line}:{self.col or 0}"

    def __str__(self):
        msg = self.args[0] if self.args else ""
        if self.line is None:
            return msg
        return f"{self.line}:{self.col or 0}: {msg}"


class PddlSyntaxError(InputError):
    pass


class SasFormatError(InputError):
    pass


class FactFormatError(InputError):
    pass


class ResidualConstruct(InputError):
    """A construct survived normalization that the lowering cannot express."""

    def __init__(self, construct, message=None, line=None, col=None):
        self.construct = construct
        super().__init__(message or f"unsupported construct after normalization: {construct}", line, col)


class AxiomsUnsupported(InputError):
    pass


class ConditionalEffectUnsupported(InputError):
    pass


class GroundingTooLarge(ParplanError):
    def __init__(self, message, counts=None):
        self.counts = dict(counts or {})
        super().__init__(message)


class HorizonCapReached(ParplanError):
    pass
