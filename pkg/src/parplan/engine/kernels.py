"""Hot loops of the CDCL engine: BCP, conflict analysis, backtracking, heap.

Literals are encoded as 2*var + sign (sign 1 = negated), variables are
0-based.  Every clause of size >= 2 owns two watch nodes, 2*c and 2*c+1,
watching the literals in positions 0 and 1 of the clause.  Watch lists are
singly linked through w_head[lit] / w_next[node], so no per-literal Python
lists are needed and everything stays in flat arrays.

Scalar solver state lives in the int64 array `meta` (indices below) so the
kernels can update it in place.
"""

import numpy as np

from .._jit import jit

M_TRAIL = 0
M_QHEAD = 1
M_LEVELS = 2
M_NCLAUSES = 3
M_NLITS = 4
M_PROPS = 5
M_HEAP = 6
M_STAMP = 7
META_SIZE = 8


@jit
def lit_value(assigns, lit):
    a = assigns[lit >> 1]
    if a < 0:
        return -1
    return a ^ (lit & 1)


@jit
def enqueue(meta, assigns, level, reason, trail, lit, r):
    v = lit >> 1
    assigns[v] = (lit & 1) ^ 1
    level[v] = meta[M_LEVELS]
    reason[v] = r
    trail[meta[M_TRAIL]] = lit
    meta[M_TRAIL] += 1


@jit
def attach_clause(meta, lits, n, learnt, lbd, cl_lits, cl_start, cl_size, cl_deleted,
                  cl_learnt, cl_lbd, w_head, w_next):
    """Store lits[:n] as a new clause and watch its first two literals."""
    c = meta[M_NCLAUSES]
    st = meta[M_NLITS]
    for j in range(n):
        cl_lits[st + j] = lits[j]
    cl_start[c] = st
    cl_size[c] = n
    cl_deleted[c] = 0
    cl_learnt[c] = learnt
    cl_lbd[c] = lbd
    for k in range(2):
        node = 2 * c + k
        l = lits[k]
        w_next[node] = w_head[l]
        w_head[l] = node
    meta[M_NCLAUSES] = c + 1
    meta[M_NLITS] = st + n
    return c


@jit
def propagate(meta, assigns, level, reason, trail, cl_lits, cl_start, cl_size, cl_deleted,
              w_head, w_next):
    """Unit propagation to fixpoint.  Returns a conflicting clause index or -1."""
    while meta[M_QHEAD] < meta[M_TRAIL]:
        p = trail[meta[M_QHEAD]]
        meta[M_QHEAD] += 1
        meta[M_PROPS] += 1
        false_lit = p ^ 1
        prev = -1
        node = w_head[false_lit]
        while node != -1:
            nxt = w_next[node]
            c = node >> 1
            if cl_deleted[c] != 0:
                if prev == -1:
                    w_head[false_lit] = nxt
                else:
                    w_next[prev] = nxt
                node = nxt
                continue
            k = node & 1
            st = cl_start[c]
            other = cl_lits[st + 1 - k]
            ov = lit_value(assigns, other)
            if ov == 1:
                prev = node
                node = nxt
                continue
            sz = cl_size[c]
            moved = False
            for j in range(2, sz):
                l = cl_lits[st + j]
                if lit_value(assigns, l) != 0:
                    cl_lits[st + j] = false_lit
                    cl_lits[st + k] = l
                    if prev == -1:
                        w_head[false_lit] = nxt
                    else:
                        w_next[prev] = nxt
                    w_next[node] = w_head[l]
                    w_head[l] = node
                    moved = True
                    break
            if moved:
                node = nxt
                continue
            if ov == 0:
                meta[M_QHEAD] = meta[M_TRAIL]
                return c
            enqueue(meta, assigns, level, reason, trail, other, c)
            prev = node
            node = nxt
    return -1


# -- variable order heap ---------------------------------------------------------


@jit
def _better(a, b, hint_level, activity):
    ha = hint_level[a]
    hb = hint_level[b]
    if ha != hb:
        return ha > hb
    aa = activity[a]
    ab = activity[b]
    if aa != ab:
        return aa > ab
    return a < b


@jit
def heap_up(heap, heap_pos, i, hint_level, activity):
    v = heap[i]
    while i > 0:
        p = (i - 1) >> 1
        u = heap[p]
        if _better(v, u, hint_level, activity):
            heap[i] = u
            heap_pos[u] = i
            i = p
        else:
            break
    heap[i] = v
    heap_pos[v] = i


@jit
def heap_down(heap, heap_pos, n, i, hint_level, activity):
    v = heap[i]
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and _better(heap[c + 1], heap[c], hint_level, activity):
            c += 1
        if _better(heap[c], v, hint_level, activity):
            heap[i] = heap[c]
            heap_pos[heap[i]] = i
            i = c
        else:
            break
    heap[i] = v
    heap_pos[v] = i


@jit
def heap_insert(meta, heap, heap_pos, v, hint_level, activity):
    if heap_pos[v] >= 0:
        return
    n = meta[M_HEAP]
    heap[n] = v
    heap_pos[v] = n
    meta[M_HEAP] = n + 1
    heap_up(heap, heap_pos, n, hint_level, activity)


@jit
def heap_update(meta, heap, heap_pos, v, hint_level, activity):
    i = heap_pos[v]
    if i < 0:
        return
    heap_up(heap, heap_pos, i, hint_level, activity)
    heap_down(heap, heap_pos, meta[M_HEAP], heap_pos[v], hint_level, activity)


@jit
def heap_pop(meta, heap, heap_pos, hint_level, activity):
    v = heap[0]
    n = meta[M_HEAP] - 1
    meta[M_HEAP] = n
    heap_pos[v] = -1
    if n > 0:
        last = heap[n]
        heap[0] = last
        heap_pos[last] = 0
        heap_down(heap, heap_pos, n, 0, hint_level, activity)
    return v


@jit
def pick_branch(meta, assigns, heap, heap_pos, hint_level, activity):
    while meta[M_HEAP] > 0:
        v = heap_pop(meta, heap, heap_pos, hint_level, activity)
        if assigns[v] < 0:
            return v
    return -1


@jit
def cancel_until(meta, lvl, assigns, reason, trail, trail_lim, saved_phase, heap, heap_pos,
                 hint_level, activity):
    if meta[M_LEVELS] <= lvl:
        return
    stop = trail_lim[lvl]
    for c in range(meta[M_TRAIL] - 1, stop - 1, -1):
        v = trail[c] >> 1
        saved_phase[v] = assigns[v]
        assigns[v] = -1
        reason[v] = -1
        heap_insert(meta, heap, heap_pos, v, hint_level, activity)
    meta[M_TRAIL] = stop
    meta[M_QHEAD] = stop
    meta[M_LEVELS] = lvl


@jit
def _bump(v, activity, var_inc, meta, heap, heap_pos, hint_level):
    activity[v] += var_inc[0]
    if activity[v] > 1e100:
        for i in range(activity.shape[0]):
            activity[i] *= 1e-100
        var_inc[0] *= 1e-100
    heap_update(meta, heap, heap_pos, v, hint_level, activity)


@jit
def analyze(meta, confl, assigns, level, reason, trail, cl_lits, cl_start, cl_size, seen,
            activity, var_inc, heap, heap_pos, hint_level, out, lvl_stamp):
    """First-UIP learning.  Writes the learnt clause to out; returns (size, backjump level, lbd).

    out[0] is the asserting literal and out[1] (if any) has the highest level
    among the rest, ready to be watched.
    """
    cur = meta[M_LEVELS]
    n_out = 1
    path = 0
    p = -1
    idx = meta[M_TRAIL] - 1
    first = True
    st = 0
    nl = confl.shape[0]
    while True:
        for j in range(nl):
            q = confl[j] if first else cl_lits[st + j]
            if q == p:
                continue
            v = q >> 1
            if seen[v] == 0 and level[v] > 0:
                seen[v] = 1
                _bump(v, activity, var_inc, meta, heap, heap_pos, hint_level)
                if level[v] >= cur:
                    path += 1
                else:
                    out[n_out] = q
                    n_out += 1
        first = False
        while seen[trail[idx] >> 1] == 0:
            idx -= 1
        p = trail[idx]
        idx -= 1
        seen[p >> 1] = 0
        path -= 1
        if path <= 0:
            break
        r = reason[p >> 1]
        st = cl_start[r]
        nl = cl_size[r]
    out[0] = p ^ 1

    # drop literals implied by the others (local minimisation)
    keep = np.ones(n_out, dtype=np.bool_)
    for i in range(1, n_out):
        q = out[i]
        r = reason[q >> 1]
        if r >= 0:
            redundant = True
            st = cl_start[r]
            for k in range(cl_size[r]):
                u = cl_lits[st + k] >> 1
                if u != (q >> 1) and seen[u] == 0 and level[u] > 0:
                    redundant = False
                    break
            keep[i] = not redundant
    for i in range(1, n_out):
        seen[out[i] >> 1] = 0
    j = 1
    for i in range(1, n_out):
        if keep[i]:
            out[j] = out[i]
            j += 1
    n_out = j
    bt = 0
    if n_out > 1:
        best = 1
        for i in range(2, n_out):
            if level[out[i] >> 1] > level[out[best] >> 1]:
                best = i
        tmp = out[1]
        out[1] = out[best]
        out[best] = tmp
        bt = level[out[1] >> 1]
    meta[M_STAMP] += 1
    stamp = meta[M_STAMP]
    lbd = 0
    for i in range(n_out):
        lv = level[out[i] >> 1]
        if lvl_stamp[lv] != stamp:
            lvl_stamp[lv] = stamp
            lbd += 1
    return n_out, bt, lbd
