"""Shared test fixtures: data files, random tasks and brute-force oracles.

The oracles here deliberately avoid the package's own successor and
checker code so that agreement means something.
"""

import itertools
from pathlib import Path

import numpy as np

from parplan.facts import read_facts
from parplan.model import Action, Fluent, PartialState, PlanningTask

DATA = Path(__file__).parent / "data"


def data(name):
    return (DATA / name).read_text()


def t1():
    return read_facts(data("t1.lp"))


def t2():
    return read_facts(data("t2.lp"))


# -- random tasks ---------------------------------------------------------------


def random_partial(rng, n_fluents, doms, k, bias=None, p_bias=0.0):
    xs = rng.choice(n_fluents, size=min(k, n_fluents), replace=False)
    out = {}
    for x in sorted(int(x) for x in xs):
        if bias is not None and rng.random() < p_bias:
            out[x] = bias[x]
        else:
            out[x] = int(rng.integers(doms[x]))
    return out


def random_task(rng, max_fluents=3, max_dom=3, max_actions=3, confluent_writes=False):
    n = int(rng.integers(1, max_fluents + 1))
    doms = [int(rng.integers(2, max_dom + 1)) for _ in range(n)]
    init = tuple(int(rng.integers(d)) for d in doms)
    write = [int(rng.integers(d)) for d in doms]
    acts = []
    for i in range(int(rng.integers(1, max_actions + 1))):
        pre = random_partial(rng, n, doms, int(rng.integers(0, n + 1)))
        post = random_partial(rng, n, doms, int(rng.integers(1, n + 1)))
        if confluent_writes:
            post = {x: write[x] for x in post}
        acts.append(Action(f"a{i + 1}", PartialState(pre), PartialState(post)))
    goal = random_partial(rng, n, doms, int(rng.integers(1, n + 1)))
    fluents = tuple(Fluent(f"x{i + 1}", tuple(str(v) for v in range(d))) for i, d in enumerate(doms))
    return PlanningTask(fluents, init, PartialState(goal), tuple(acts))


def random_confluent_sample(rng, max_actions=6, max_fluents=6, max_dom=3):
    """A task whose whole action set is confluent, plus a state to check in."""
    n = int(rng.integers(1, max_fluents + 1))
    doms = [int(rng.integers(2, max_dom + 1)) for _ in range(n)]
    s = tuple(int(rng.integers(d)) for d in doms)
    write = [int(rng.integers(d)) for d in doms]
    acts = []
    for i in range(int(rng.integers(1, max_actions + 1))):
        pre = random_partial(rng, n, doms, int(rng.integers(0, min(n, 3) + 1)))
        # bias preconditions toward s or toward the written values, so that
        # every verdict shows up often enough
        pre = {x: (s[x] if rng.random() < 0.5 else (write[x] if rng.random() < 0.6 else v))
               for x, v in pre.items()}
        post = {x: write[x] for x in random_partial(rng, n, doms, int(rng.integers(1, min(n, 3) + 1)))}
        acts.append(Action(f"a{i + 1}", PartialState(pre), PartialState(post)))
    fluents = tuple(Fluent(f"x{i + 1}", tuple(str(v) for v in range(d))) for i, d in enumerate(doms))
    task = PlanningTask(fluents, s, PartialState({}), tuple(acts))
    return task, s, list(range(len(acts)))


# -- serializability oracle -------------------------------------------------------


def _step(task, s, a):
    act = task.actions[a]
    for x, v in act.pre.items():
        if s[x] != v:
            return None
    s = list(s)
    for x, v in act.post.items():
        s[x] = v
    return tuple(s)


def _orders(task, s, acts):
    """(some order runs through, every order runs through), found by walking
    the tree of order prefixes; a prefix that gets stuck stands for all
    orders that extend it."""
    found_any = False
    found_dead = False

    def rec(s, rest):
        nonlocal found_any, found_dead
        if found_any and found_dead:
            return
        if not rest:
            found_any = True
            return
        for a in rest:
            t = _step(task, s, a)
            if t is None:
                found_dead = True
            else:
                rec(t, [b for b in rest if b != a])

    rec(s, list(acts))
    return found_any, not found_dead


def perm_oracle(task, s, acts, semantics):
    acts = list(acts)
    written = {}
    for a in acts:
        for x, v in task.actions[a].post.items():
            if written.setdefault(x, v) != v:
                return False
    some, every = _orders(task, s, acts)
    if semantics == "relaxed":
        return some
    pre_ok = all(s[x] == v for a in acts for x, v in task.actions[a].pre.items())
    if semantics == "forall":
        return pre_ok and every
    return pre_ok and some


def step_ok(task, s, acts, semantics):
    if semantics == "sequential":
        return len(acts) <= 1 and perm_oracle(task, s, acts, "exists")
    return perm_oracle(task, s, acts, semantics)


def parallel(task, s, acts):
    s = list(s)
    for a in acts:
        for x, v in task.actions[a].post.items():
            s[x] = v
    return tuple(s)


def valid_plans(task, h, semantics, limit=None):
    """All plans of exactly h steps valid under semantics (by the oracle)."""
    n = task.n_actions
    subsets = [c for k in range(n + 1) for c in itertools.combinations(range(n), k)]
    if semantics == "sequential":
        subsets = [c for c in subsets if len(c) <= 1]
    out = []

    def rec(s, t, acc):
        if limit is not None and len(out) >= limit:
            return
        if t == h:
            if all(s[x] == v for x, v in task.goal.items()):
                out.append(tuple(acc))
            return
        for c in subsets:
            if step_ok(task, s, c, semantics):
                rec(parallel(task, s, c), t + 1, acc + [c])

    rec(task.init, 0, [])
    return out


# -- propositional oracle -----------------------------------------------------------


def all_assignments(n):
    """2^n x (n+1) boolean matrix; column 0 unused so column v is variable v."""
    idx = np.arange(2 ** n, dtype=np.int64)[:, None]
    bits = ((idx >> np.arange(n)) & 1).astype(bool)
    return np.concatenate([np.zeros((2 ** n, 1), dtype=bool), bits], axis=1)


def models_mask(n, clauses, edges=()):
    """Which of the 2^n assignments satisfy the clauses and keep the active
    edges acyclic."""
    A = all_assignments(n)
    ok = np.ones(len(A), dtype=bool)
    for cl in clauses:
        sat = np.zeros(len(A), dtype=bool)
        for l in cl:
            sat |= A[:, abs(l)] if l > 0 else ~A[:, abs(l)]
        ok &= sat
    if edges:
        for i in np.nonzero(ok)[0]:
            active = [(u, v) for l, u, v in edges if (A[i, abs(l)] if l > 0 else not A[i, abs(l)])]
            if has_cycle(active):
                ok[i] = False
    return ok


def has_cycle(edge_list):
    adj = {}
    for u, v in edge_list:
        adj.setdefault(u, []).append(v)
    color = {}

    def dfs(u):
        color[u] = 1
        for w in adj.get(u, ()):
            c = color.get(w, 0)
            if c == 1 or (c == 0 and dfs(w)):
                return True
        color[u] = 2
        return False

    return any(color.get(u, 0) == 0 and dfs(u) for u in list(adj))


def random_cnf(rng, n, m, kmax=3):
    out = []
    for _ in range(m):
        k = int(rng.integers(1, kmax + 1))
        vs = rng.choice(np.arange(1, n + 1), size=min(k, n), replace=False)
        out.append([int(v) if rng.random() < 0.5 else -int(v) for v in vs])
    return out


# -- scheduler cost profile -------------------------------------------------------

# UNSAT costs at horizons 0..4 are given; the SAT costs at 5..8 are a
# reconstruction chosen so that S, A(5) and B(0.8) reach 46, 40 and 38
# units.  Horizon 8 costs 6 * 0.8**5 units: the fifth frontier target of B
# once h_min=3 has received 6 units.
PROFILE_UNSAT = {0: 2, 1: 2, 2: 4, 3: 9, 4: 16}
PROFILE_SAT = {5: 13, 6: 8, 7: 4, 8: 6 * 0.8 ** 5}
PROFILE_OTHER = 100


def profile_cost(resolution=1000):
    """cost(h) -> (verdict, cost in slices) with `resolution` slices per unit."""
    import math

    def cost(h):
        if h in PROFILE_UNSAT:
            return "unsat", PROFILE_UNSAT[h] * resolution
        c = PROFILE_SAT.get(h, PROFILE_OTHER)
        return "sat", math.ceil(c * resolution - 1e-9)

    return cost
