import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parplan.engine import Engine, Status, amo_clauses, luby
from parplan.errors import UsageError

from helpers import all_assignments, has_cycle, models_mask, random_cnf


def _engine(n, clauses, edges=()):
    e = Engine()
    e.new_vars(n)
    for c in clauses:
        e.add_clause(c)
    for l, u, v in edges:
        e.add_edge(l, u, v)
    return e


def _check_model(out, clauses, edges=()):
    m = out.model
    for c in clauses:
        assert any(m[abs(l)] == (l > 0) for l in c)
    active = [(u, v) for l, u, v in edges if m[abs(l)] == (l > 0)]
    assert not has_cycle(active)


def test_luby():
    assert [luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_trivial_cases():
    e = Engine()
    a, b = e.new_vars(2)
    e.add_clause([a, b])
    e.add_clause([-a])
    out = e.solve()
    assert out.sat and out.value(b) and not out.value(a)
    assert e.fixed_value(b) is True
    e.add_clause([-b])
    assert e.solve().status is Status.UNSAT
    assert not e.ok


def test_empty_clause_makes_store_unsat():
    e = Engine()
    e.new_var()
    e.add_clause([])
    assert e.solve().status is Status.UNSAT


def test_two_cycle_is_unsat():
    e = Engine()
    x, y = e.new_vars(2)
    e.add_edge(x, "u", "v")
    e.add_edge(y, "v", "u")
    e.add_clause([x])
    e.add_clause([y])
    assert e.solve().status is Status.UNSAT


def test_cycle_forces_an_edge_off():
    e = Engine()
    x, y, z = e.new_vars(3)
    e.add_edge(x, 1, 2)
    e.add_edge(y, 2, 3)
    e.add_edge(z, 3, 1)
    e.add_clause([x])
    e.add_clause([y])
    out = e.solve()
    assert out.sat and not out.value(z)


def _php(e, holes):
    pigeons = holes + 1
    p = [[e.new_var() for _ in range(holes)] for _ in range(pigeons)]
    for row in p:
        e.add_clause(row)
    for h in range(holes):
        e.add_amo([row[h] for row in p])
    return p


def test_pigeonhole_unsat_and_budget():
    e = Engine()
    _php(e, 5)
    out = e.solve(budget=3)
    assert out.status is Status.BUDGET_EXHAUSTED and out.stats.conflicts == 3
    out = e.solve()
    assert out.status is Status.UNSAT


def test_assumptions_are_temporary():
    e = Engine()
    a, b, c = e.new_vars(3)
    e.add_clause([-a, b])
    e.add_clause([-b, c])
    assert e.solve([a, -c]).status is Status.UNSAT
    assert e.ok
    out = e.solve([a])
    assert out.sat and out.value(c)
    assert e.solve([-a, -b]).sat


def test_incremental_clauses_between_calls():
    e = Engine()
    xs = e.new_vars(4)
    e.add_clause(xs)
    seen = set()
    while True:
        out = e.solve()
        if not out.sat:
            break
        m = tuple(out.value(x) for x in xs)
        assert m not in seen
        seen.add(m)
        e.add_clause([-x if out.value(x) else x for x in xs])
    assert len(seen) == 15


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_cnf_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 13))
    clauses = random_cnf(rng, n, int(rng.integers(1, 5 * n + 2)))
    n_assume = int(rng.integers(0, 3))
    assume = [int(v) * (1 if rng.random() < 0.5 else -1)
              for v in rng.choice(np.arange(1, n + 1), size=min(n_assume, n), replace=False)]
    e = _engine(n, clauses)
    out = e.solve(assume)
    expect = models_mask(n, clauses + [[l] for l in assume]).any()
    assert out.sat == expect
    if out.sat:
        _check_model(out, clauses + [[l] for l in assume])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_acyclicity_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 11))
    nodes = int(rng.integers(2, 7))
    edges = []
    for _ in range(int(rng.integers(1, 2 * nodes + 1))):
        u, v = (int(x) for x in rng.choice(nodes, size=2, replace=False))
        lit = int(rng.integers(1, n + 1)) * (1 if rng.random() < 0.8 else -1)
        edges.append((lit, u, v))
    clauses = random_cnf(rng, n, int(rng.integers(0, 2 * n)), kmax=2)
    e = _engine(n, clauses, edges)
    out = e.solve()
    assert out.sat == models_mask(n, clauses, edges).any()
    if out.sat:
        _check_model(out, clauses, edges)


def test_twenty_variables_against_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(3):
        clauses = random_cnf(rng, 20, 88, kmax=3)
        out = _engine(20, clauses).solve()
        assert out.sat == models_mask(20, clauses).any()


@pytest.mark.parametrize("n", [2, 5, 8, 9, 14])
def test_amo_encodings(n):
    counter = [n]

    def new():
        counter[0] += 1
        return counter[0]

    lits = list(range(1, n + 1))
    e = _engine(0, [])
    e.new_vars(n)
    for c in amo_clauses(lits, lambda: e.new_var()):
        e.add_clause(c)
    rng = np.random.default_rng(n)
    for _ in range(40):
        k = int(rng.integers(0, 4))
        on = set(int(x) for x in rng.choice(lits, size=min(k, n), replace=False))
        out = e.solve([l if l in on else -l for l in lits])
        assert out.sat == (len(on) <= 1)
    if n <= 9:
        cls = amo_clauses(lits, new)
        ok = models_mask(counter[0], cls)
        ones = all_assignments(counter[0])[:, 1:n + 1].sum(axis=1)
        for k in range(n + 1):
            assert ok[ones == k].any() == (k <= 1)


def test_guarded_amo():
    counter = [11]

    def new():
        counter[0] += 1
        return counter[0]

    cls = amo_clauses(list(range(1, 11)), new, guard=11)
    e = _engine(counter[0], cls + [[1], [2]])
    out = e.solve()
    assert out.sat and not out.value(11)
    assert e.solve([11]).status is Status.UNSAT


def test_hints_steer_decisions():
    e = Engine()
    xs = e.new_vars(5)
    e.add_clause(xs)
    e.set_hint(xs[3], 100, True)
    out = e.solve()
    assert out.value(xs[3])
    e.set_hint(xs[3], 100, False)
    e.set_hint(xs[1], 50, True)
    out = e.solve()
    assert not out.value(xs[3]) and out.value(xs[1])
    assert e.hint(xs[1]) == (50, True)
    e.clear_hint(xs[1])
    assert e.hint(xs[1]) == (0, None)


def test_callbacks_see_assignments_and_hints_are_undone():
    e = Engine()
    a, b, c = e.new_vars(3)
    e.add_clause([a, b, c])
    e.add_clause([-a, b])
    seen = []

    def cb(var, val):
        seen.append((var, val))
        e.set_hint(c, 7, True)

    e.on_assign([a], cb)
    e.set_hint(a, 10, True)
    out = e.solve()
    assert out.sat and (a, True) in seen
    # hints set during search are rolled back when the search backtracks to the top
    assert e.hint(c) == (0, None)


def test_usage_errors():
    e = Engine()
    a = e.new_var()

    def cb(var, val):
        e.add_clause([a])

    e.on_assign([a], cb)
    e.set_hint(a, 1, True)
    with pytest.raises(UsageError):
        e.solve()
    with pytest.raises(UsageError):
        e.add_clause([5])
    with pytest.raises(UsageError):
        e.set_hint(9, 1)


def test_dimacs_dump():
    e = Engine()
    a, b = e.new_vars(2)
    e.add_clause([a, -b])
    e.add_edge(a, 0, 1)
    text = e.to_dimacs()
    assert text.splitlines()[0] == "p cnf 2 1"
    assert "c edge 1 0 1" in text and "1 -2 0" in text


def test_learnt_log():
    e = Engine()
    _php(e, 4)
    e.learnt_log = []
    e.solve()
    assert e.learnt_log and all(isinstance(c, list) for c in e.learnt_log)


SCRIPT = """
from parplan.engine import Engine
e = Engine()
p = [[e.new_var() for _ in range(5)] for _ in range(6)]
for row in p:
    e.add_clause(row)
for h in range(5):
    e.add_amo([row[h] for row in p])
o = e.solve()
print(o.status.value, o.stats.conflicts, o.stats.decisions)
"""


def test_fallback_matches_jit():
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, PARPLAN_NO_JIT=flag)
        r = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True, env=env, check=True)
        outs.append(r.stdout.strip())
    assert outs[0] == outs[1]
    assert outs[0].startswith("UNSAT")
