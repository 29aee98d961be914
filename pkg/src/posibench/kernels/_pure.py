"""Pure-Python kernels: the reference semantics for the compiled core.

Each function here must stay in exact lockstep with its twin in
``_core.pyx`` — same draw sequence, same floating-point expression shapes,
same tie-breaking — because instance files and sample sets are promised to
be byte-identical regardless of backend.  Keep the two files in sync when
touching either.
"""

from __future__ import annotations

import heapq
from math import exp
from time import perf_counter

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV53 = 1.0 / 9007199254740992.0


def _mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


# ---------------------------------------------------------------------------
# Kernighan-Lin swap pass


def _pop_valid(heap, gain, locked):
    while True:
        neg_d, v = heapq.heappop(heap)
        if not locked[v] and gain[v] == -neg_d:
            return v


def kl_pass(nbr_ptr, nbr_idx, side):
    """One tentative swap pass; mutates ``side`` through every swap.

    Returns (moves_a, moves_b, gains): per step, the node moved off side 0,
    the node moved off side 1, and the exact cut improvement of the pair.
    The caller keeps the best prefix and rolls the rest back.
    """
    ptr = nbr_ptr.tolist()
    idx = nbr_idx.tolist()
    k = len(side)
    gain = [0] * k
    for v in range(k):
        s = side[v]
        d = 0
        for t in range(ptr[v], ptr[v + 1]):
            d += 1 if side[idx[t]] != s else -1
        gain[v] = d

    heaps = ([], [])
    for v in range(k):
        heaps[side[v]].append((-gain[v], v))
    heapq.heapify(heaps[0])
    heapq.heapify(heaps[1])

    locked = [False] * k
    size0 = k - int(np.sum(side))
    steps = min(size0, k - size0)
    moves_a = np.zeros(steps, dtype=np.int32)
    moves_b = np.zeros(steps, dtype=np.int32)
    gains = np.zeros(steps, dtype=np.int64)

    for step in range(steps):
        for source, dest in ((0, 1), (1, 0)):
            v = _pop_valid(heaps[source], gain, locked)
            locked[v] = True
            gains[step] += gain[v]
            for t in range(ptr[v], ptr[v + 1]):
                u = idx[t]
                if locked[u]:
                    continue
                if side[u] == source:
                    gain[u] += 2
                else:
                    gain[u] -= 2
                heapq.heappush(heaps[side[u]], (-gain[u], u))
            side[v] = dest
            if source == 0:
                moves_a[step] = v
            else:
                moves_b[step] = v
    return moves_a, moves_b, gains


# ---------------------------------------------------------------------------
# Simulated annealing sweeps


def sa_sample(lin, nbr_ptr, nbr_idx, nbr_coef, offset, betas_milli, seeds):
    """Metropolis sweeps in ascending variable order, one read per seed.

    ``betas_milli`` is the per-sweep schedule pre-multiplied by 0.001 so the
    acceptance test is exp(-beta_milli * delta_milli).  Randomness: one u64
    per variable for the initial state, then one u64 per uphill proposal.
    """
    n = len(lin)
    lin_l = lin.tolist()
    ptr = nbr_ptr.tolist()
    idx = nbr_idx.tolist()
    coef = nbr_coef.tolist()
    betas = betas_milli.tolist()
    num_reads = len(seeds)
    states = np.zeros((num_reads, n), dtype=np.uint8)
    energies = np.zeros(num_reads, dtype=np.int64)

    for r in range(num_reads):
        state = int(seeds[r]) & _MASK64
        x = [0] * n
        for v in range(n):
            state = (state + _GAMMA) & _MASK64
            x[v] = _mix64(state) >> 63
        e = int(offset)
        for v in range(n):
            if x[v]:
                e += lin_l[v]
                for t in range(ptr[v], ptr[v + 1]):
                    w = idx[t]
                    if w > v and x[w]:
                        e += coef[t]
        for bm in betas:
            for v in range(n):
                field = lin_l[v]
                for t in range(ptr[v], ptr[v + 1]):
                    if x[idx[t]]:
                        field += coef[t]
                delta = -field if x[v] else field
                if delta <= 0:
                    x[v] ^= 1
                    e += delta
                else:
                    state = (state + _GAMMA) & _MASK64
                    u = (_mix64(state) >> 11) * _INV53
                    if u < exp(-bm * delta):
                        x[v] ^= 1
                        e += delta
        states[r] = x
        energies[r] = e
    return states, energies


# ---------------------------------------------------------------------------
# Exhaustive scan in Gray-code order


def _gray_walk(lin_l, ptr, idx, coef, offset, n, on_state):
    x = [0] * n
    e = offset
    mask = 0
    on_state(mask, e)
    for t in range(1, 1 << n):
        v = (t & -t).bit_length() - 1
        field = lin_l[v]
        for s in range(ptr[v], ptr[v + 1]):
            if x[idx[s]]:
                field += coef[s]
        if x[v]:
            e -= field
            x[v] = 0
        else:
            e += field
            x[v] = 1
        mask ^= 1 << v
        on_state(mask, e)


def gray_scan(lin, nbr_ptr, nbr_idx, nbr_coef, offset, collect_all):
    """Scan all 2^n assignments with O(degree) per step.

    Returns (best_energy, count, witness_mask, masks) where the witness is
    the first minimizer in scan order and ``masks`` lists every minimizer
    (or None when not collecting).  Bit i of a mask is variable i.
    """
    n = len(lin)
    lin_l = lin.tolist()
    ptr = nbr_ptr.tolist()
    idx = nbr_idx.tolist()
    coef = nbr_coef.tolist()
    offset = int(offset)

    best = [0, 0, 0]  # energy, count, witness

    def track(mask, e):
        if mask == 0 and best[1] == 0:
            best[:] = [e, 1, 0]
        elif e < best[0]:
            best[:] = [e, 1, mask]
        elif e == best[0]:
            best[1] += 1

    best[1] = 0
    _gray_walk(lin_l, ptr, idx, coef, offset, n, track)
    best_e, count, witness = best

    masks = None
    if collect_all:
        masks = np.zeros(count, dtype=np.uint64)
        fill = [0]

        def collect(mask, e):
            if e == best_e:
                masks[fill[0]] = mask
                fill[0] += 1

        _gray_walk(lin_l, ptr, idx, coef, offset, n, collect)
    return best_e, count, witness, masks


# ---------------------------------------------------------------------------
# Depth-first branch and bound


def bnb_search(lin, nbr_ptr, nbr_idx, nbr_coef, offset, order, best_x, best_energy, time_limit):
    """DFS over the fixed variable order, value 1 tried before 0.

    The bound at a partial assignment is the energy of the fixed terms plus,
    for every term with a free endpoint, the smallest contribution it can
    still make (min of 0 and its attainable value).  Returns
    (best_energy, best_x, proved, nodes); ``proved`` drops to False when the
    deadline interrupts the search.
    """
    n = len(lin)
    lin_l = lin.tolist()
    ptr = nbr_ptr.tolist()
    idx = nbr_idx.tolist()
    coef = nbr_coef.tolist()
    order_l = order.tolist()

    pos = [0] * n
    for d, v in enumerate(order_l):
        pos[v] = d
    xv = [0] * n
    fixedfield = [0] * n
    pendfix = [0] * n

    pending = sum(c for c in lin_l if c < 0)
    for v in range(n):
        for t in range(ptr[v], ptr[v + 1]):
            if idx[t] > v and coef[t] < 0:
                pending += coef[t]
    fixed_e = int(offset)

    best_e = int(best_energy)
    best = list(best_x)
    nodes = 0
    proved = True
    deadline = perf_counter() + time_limit

    def unfix(d):
        nonlocal pending, fixed_e
        v = order_l[d]
        b = xv[v]
        for t in range(ptr[v], ptr[v + 1]):
            w = idx[t]
            if pos[w] > d:
                c = coef[t]
                if b:
                    fixedfield[w] -= c
                    if c < 0:
                        pendfix[w] -= c
                elif c < 0:
                    pending += c
        pending += pendfix[v]
        if lin_l[v] < 0:
            pending += lin_l[v]
        fixed_e -= b * (lin_l[v] + fixedfield[v])

    phase = [0] * (n + 1)
    d = 0
    while d >= 0:
        if d == n:
            if fixed_e < best_e:
                best_e = fixed_e
                best = xv.copy()
            d -= 1
            unfix(d)
            phase[d] += 1
            continue
        if phase[d] == 2:
            d -= 1
            if d < 0:
                break
            unfix(d)
            phase[d] += 1
            continue
        b = 1 if phase[d] == 0 else 0
        v = order_l[d]
        nodes += 1
        if nodes % 4096 == 0 and perf_counter() > deadline:
            proved = False
            break
        # fix v := b
        fixed_e += b * (lin_l[v] + fixedfield[v])
        if lin_l[v] < 0:
            pending -= lin_l[v]
        pending -= pendfix[v]
        for t in range(ptr[v], ptr[v + 1]):
            w = idx[t]
            if pos[w] > d:
                c = coef[t]
                if b:
                    fixedfield[w] += c
                    if c < 0:
                        pendfix[w] += c
                elif c < 0:
                    pending -= c
        xv[v] = b
        if fixed_e + pending >= best_e:
            unfix(d)
            phase[d] += 1
            continue
        d += 1
        phase[d] = 0

    return best_e, np.array(best, dtype=np.uint8), proved, nodes
