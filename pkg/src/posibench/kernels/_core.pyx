# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: bit-identical twins of ``_pure`` for the hot loops.

Any semantic change here must land in ``_pure.py`` too — instance files and
sample sets are promised to be identical across backends.
"""

from time import perf_counter

import numpy as np

from libc.math cimport exp

cdef unsigned long long GAMMA = <unsigned long long>0x9E3779B97F4A7C15
cdef double INV53 = 1.0 / 9007199254740992.0
cdef long long TWO32 = <long long>4294967296


cdef inline unsigned long long mix64(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * <unsigned long long>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <unsigned long long>0x94D049BB133111EB
    return z ^ (z >> 31)


# ---------------------------------------------------------------------------
# Kernighan-Lin swap pass

cdef inline void heap_push(long long[:] heap, Py_ssize_t* size, long long key) noexcept nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    cdef long long tmp
    heap[i] = key
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] <= heap[i]:
            break
        tmp = heap[parent]
        heap[parent] = heap[i]
        heap[i] = tmp
        i = parent


cdef inline long long heap_pop(long long[:] heap, Py_ssize_t* size) noexcept nogil:
    cdef long long top = heap[0]
    cdef Py_ssize_t i = 0, child
    cdef long long tmp
    size[0] -= 1
    heap[0] = heap[size[0]]
    while True:
        child = 2 * i + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and heap[child + 1] < heap[child]:
            child += 1
        if heap[i] <= heap[child]:
            break
        tmp = heap[i]
        heap[i] = heap[child]
        heap[child] = tmp
        i = child
    return top


def kl_pass(nbr_ptr_arr, nbr_idx_arr, side_arr):
    """One tentative swap pass; mutates ``side`` through every swap.

    Heap keys encode (-gain, node) as gain-major int64, so pops order
    exactly like the fallback's (-gain, node) tuples.
    """
    cdef const long long[:] ptr = nbr_ptr_arr
    cdef const int[:] idx = nbr_idx_arr
    cdef unsigned char[:] side = side_arr
    cdef Py_ssize_t k = side.shape[0]

    gain_arr = np.zeros(k, dtype=np.int64)
    cdef long long[:] gain = gain_arr
    locked_arr = np.zeros(k, dtype=np.uint8)
    cdef unsigned char[:] locked = locked_arr

    cdef Py_ssize_t v, t, u
    cdef long long d
    cdef Py_ssize_t size0 = 0
    for v in range(k):
        d = 0
        for t in range(ptr[v], ptr[v + 1]):
            if side[idx[t]] != side[v]:
                d += 1
            else:
                d -= 1
        gain[v] = d
        if side[v] == 0:
            size0 += 1

    cdef Py_ssize_t cap = k + 2 * idx.shape[0] + 4
    heap0_arr = np.zeros(cap, dtype=np.int64)
    heap1_arr = np.zeros(cap, dtype=np.int64)
    cdef long long[:] heap0 = heap0_arr
    cdef long long[:] heap1 = heap1_arr
    cdef Py_ssize_t n0 = 0, n1 = 0

    for v in range(k):
        if side[v] == 0:
            heap_push(heap0, &n0, -gain[v] * TWO32 + v)
        else:
            heap_push(heap1, &n1, -gain[v] * TWO32 + v)

    cdef Py_ssize_t steps = min(size0, k - size0)
    moves_a_arr = np.zeros(steps, dtype=np.int32)
    moves_b_arr = np.zeros(steps, dtype=np.int32)
    gains_arr = np.zeros(steps, dtype=np.int64)
    cdef int[:] moves_a = moves_a_arr
    cdef int[:] moves_b = moves_b_arr
    cdef long long[:] gains = gains_arr

    cdef Py_ssize_t step, source
    cdef long long key
    for step in range(steps):
        for source in range(2):
            while True:
                if source == 0:
                    key = heap_pop(heap0, &n0)
                else:
                    key = heap_pop(heap1, &n1)
                v = <Py_ssize_t>(key & <long long>0xFFFFFFFF)
                if not locked[v] and key == -gain[v] * TWO32 + v:
                    break
            locked[v] = 1
            gains[step] += gain[v]
            for t in range(ptr[v], ptr[v + 1]):
                u = idx[t]
                if locked[u]:
                    continue
                if side[u] == source:
                    gain[u] += 2
                else:
                    gain[u] -= 2
                if side[u] == 0:
                    heap_push(heap0, &n0, -gain[u] * TWO32 + u)
                else:
                    heap_push(heap1, &n1, -gain[u] * TWO32 + u)
            side[v] = 1 - source
            if source == 0:
                moves_a[step] = <int>v
            else:
                moves_b[step] = <int>v
    return moves_a_arr, moves_b_arr, gains_arr


# ---------------------------------------------------------------------------
# Simulated annealing sweeps

def sa_sample(lin_arr, nbr_ptr_arr, nbr_idx_arr, nbr_coef_arr, long long offset,
              betas_milli_arr, seeds_arr):
    """Metropolis sweeps in ascending variable order, one read per seed."""
    cdef const long long[:] lin = lin_arr
    cdef const long long[:] ptr = nbr_ptr_arr
    cdef const int[:] idx = nbr_idx_arr
    cdef const long long[:] coef = nbr_coef_arr
    cdef const double[:] betas = betas_milli_arr
    cdef const unsigned long long[:] seeds = seeds_arr

    cdef Py_ssize_t n = lin.shape[0]
    cdef Py_ssize_t num_reads = seeds.shape[0]
    cdef Py_ssize_t num_sweeps = betas.shape[0]

    states_arr = np.zeros((num_reads, n), dtype=np.uint8)
    energies_arr = np.zeros(num_reads, dtype=np.int64)
    cdef unsigned char[:, :] xs = states_arr
    cdef long long[:] es = energies_arr

    cdef unsigned long long state
    cdef long long e, field, delta
    cdef double u, bm
    cdef Py_ssize_t r, v, t, k

    with nogil:
        for r in range(num_reads):
            state = seeds[r]
            for v in range(n):
                state += GAMMA
                xs[r, v] = <unsigned char>(mix64(state) >> 63)
            e = offset
            for v in range(n):
                if xs[r, v]:
                    e += lin[v]
                    for t in range(ptr[v], ptr[v + 1]):
                        if idx[t] > v and xs[r, idx[t]]:
                            e += coef[t]
            for k in range(num_sweeps):
                bm = betas[k]
                for v in range(n):
                    field = lin[v]
                    for t in range(ptr[v], ptr[v + 1]):
                        if xs[r, idx[t]]:
                            field += coef[t]
                    delta = -field if xs[r, v] else field
                    if delta <= 0:
                        xs[r, v] ^= 1
                        e += delta
                    else:
                        state += GAMMA
                        u = <double>(mix64(state) >> 11) * INV53
                        if u < exp(-bm * <double>delta):
                            xs[r, v] ^= 1
                            e += delta
            es[r] = e
    return states_arr, energies_arr


# ---------------------------------------------------------------------------
# Exhaustive scan in Gray-code order

cdef inline Py_ssize_t lowest_bit(unsigned long long t) noexcept nogil:
    cdef Py_ssize_t v = 0
    t &= (~t) + 1
    while t > 1:
        t >>= 1
        v += 1
    return v


def gray_scan(lin_arr, nbr_ptr_arr, nbr_idx_arr, nbr_coef_arr, long long offset,
              bint collect_all):
    """Scan all 2^n assignments with O(degree) per step."""
    cdef const long long[:] lin = lin_arr
    cdef const long long[:] ptr = nbr_ptr_arr
    cdef const int[:] idx = nbr_idx_arr
    cdef const long long[:] coef = nbr_coef_arr
    cdef Py_ssize_t n = lin.shape[0]

    x_arr = np.zeros(n if n else 1, dtype=np.uint8)
    cdef unsigned char[:] x = x_arr

    cdef unsigned long long total = (<unsigned long long>1) << n
    cdef unsigned long long t, mask, witness
    cdef long long e, best, field, delta, count
    cdef Py_ssize_t v, s

    best = offset
    count = 1
    witness = 0
    mask = 0
    e = offset
    with nogil:
        for t in range(1, total):
            v = lowest_bit(t)
            field = lin[v]
            for s in range(ptr[v], ptr[v + 1]):
                if x[idx[s]]:
                    field += coef[s]
            if x[v]:
                e -= field
                x[v] = 0
            else:
                e += field
                x[v] = 1
            mask ^= (<unsigned long long>1) << v
            if e < best:
                best = e
                count = 1
                witness = mask
            elif e == best:
                count += 1

    if not collect_all:
        return int(best), int(count), int(witness), None

    masks_arr = np.zeros(count, dtype=np.uint64)
    cdef unsigned long long[:] masks = masks_arr
    cdef Py_ssize_t fill = 0
    for v in range(n):
        x[v] = 0
    e = offset
    mask = 0
    with nogil:
        if e == best:
            masks[fill] = mask
            fill += 1
        for t in range(1, total):
            v = lowest_bit(t)
            field = lin[v]
            for s in range(ptr[v], ptr[v + 1]):
                if x[idx[s]]:
                    field += coef[s]
            if x[v]:
                e -= field
                x[v] = 0
            else:
                e += field
                x[v] = 1
            mask ^= (<unsigned long long>1) << v
            if e == best:
                masks[fill] = mask
                fill += 1
    return int(best), int(count), int(witness), masks_arr


# ---------------------------------------------------------------------------
# Depth-first branch and bound

def bnb_search(lin_arr, nbr_ptr_arr, nbr_idx_arr, nbr_coef_arr, long long offset,
               order_arr, best_x_arr, long long best_energy, double time_limit):
    """DFS over the fixed variable order, value 1 tried before 0."""
    cdef const long long[:] lin = lin_arr
    cdef const long long[:] ptr = nbr_ptr_arr
    cdef const int[:] idx = nbr_idx_arr
    cdef const long long[:] coef = nbr_coef_arr
    cdef const int[:] order = order_arr
    cdef Py_ssize_t n = lin.shape[0]

    pos_arr = np.zeros(n, dtype=np.int64)
    xv_arr = np.zeros(n, dtype=np.uint8)
    ff_arr = np.zeros(n, dtype=np.int64)
    pf_arr = np.zeros(n, dtype=np.int64)
    phase_arr = np.zeros(n + 1, dtype=np.int8)
    best_arr = np.array(best_x_arr, dtype=np.uint8, copy=True)
    cdef long long[:] pos = pos_arr
    cdef unsigned char[:] xv = xv_arr
    cdef long long[:] fixedfield = ff_arr
    cdef long long[:] pendfix = pf_arr
    cdef signed char[:] phase = phase_arr
    cdef unsigned char[:] best = best_arr

    cdef Py_ssize_t d, v, t, w, i
    cdef long long c, pending = 0, fixed_e = offset
    cdef long long best_e = best_energy
    cdef long long nodes = 0
    cdef bint proved = True
    cdef unsigned char b
    cdef double deadline = perf_counter() + time_limit

    for d in range(n):
        pos[order[d]] = d
    for v in range(n):
        if lin[v] < 0:
            pending += lin[v]
        for t in range(ptr[v], ptr[v + 1]):
            if idx[t] > v and coef[t] < 0:
                pending += coef[t]

    d = 0
    while d >= 0:
        if d == n:
            if fixed_e < best_e:
                best_e = fixed_e
                for i in range(n):
                    best[i] = xv[i]
            d -= 1
            # unfix depth d
            v = order[d]
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
            if lin[v] < 0:
                pending += lin[v]
            fixed_e -= b * (lin[v] + fixedfield[v])
            phase[d] += 1
            continue
        if phase[d] == 2:
            d -= 1
            if d < 0:
                break
            v = order[d]
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
            if lin[v] < 0:
                pending += lin[v]
            fixed_e -= b * (lin[v] + fixedfield[v])
            phase[d] += 1
            continue
        b = 1 if phase[d] == 0 else 0
        v = order[d]
        nodes += 1
        if nodes % 4096 == 0 and perf_counter() > deadline:
            proved = False
            break
        fixed_e += b * (lin[v] + fixedfield[v])
        if lin[v] < 0:
            pending -= lin[v]
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
            # undo the fix and advance to the next branch value
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
            if lin[v] < 0:
                pending += lin[v]
            fixed_e -= b * (lin[v] + fixedfield[v])
            phase[d] += 1
            continue
        d += 1
        phase[d] = 0

    return int(best_e), best_arr, bool(proved), int(nodes)
