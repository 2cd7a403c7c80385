# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops; see ``_fallback`` for the contract."""
import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport expm1, log1p, INFINITY
from libc.stdint cimport int32_t, int64_t
from libc.string cimport memset
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (binomial_t, random_binomial, random_interval,
                                           random_standard_uniform)

ctypedef fused index_t:
    int32_t
    int64_t


cdef bitgen_t* _bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("generator does not expose a BitGenerator capsule")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef int _group_pick(bitgen_t* bg, binomial_t* bt, const int64_t[::1] counts,
                     const double[::1] weights, bint weighted, double p, double q_single,
                     int64_t[::1] h, Py_ssize_t* piece) noexcept nogil:
    """Draw one Bernoulli(p) set restricted to a piece group; 1 if it is nonempty."""
    cdef Py_ssize_t G = counts.shape[0], j
    cdef double tot = 0.0, u, acc
    if G == 0:
        return 0
    if G == 1:
        piece[0] = 0
        return random_standard_uniform(bg) < q_single
    for j in range(G):
        h[j] = random_binomial(bg, p, counts[j], bt)
        tot += h[j] * weights[j] if weighted else h[j]
    if tot <= 0:
        return 0
    u = random_standard_uniform(bg) * tot
    acc = 0.0
    for j in range(G):
        acc += h[j] * weights[j] if weighted else h[j]
        if u < acc:
            piece[0] = j
            return 1
    piece[0] = G - 1
    return 1


def probe_rounds(object rng, const int64_t[::1] pos_starts, const int64_t[::1] pos_counts,
                 const double[::1] pos_masses, const int64_t[::1] zero_starts,
                 const int64_t[::1] zero_counts, const index_t[::1] forward, bint identity,
                 double p, int64_t r, double r_mass, int64_t rounds, int64_t m_cmp, double K):
    cdef bitgen_t* bg = _bitgen(rng)
    cdef binomial_t bt
    memset(&bt, 0, sizeof(bt))
    cdef Py_ssize_t npos = pos_counts.shape[0], nzero = zero_counts.shape[0]
    cdef int64_t[::1] h_pos = np.zeros(max(npos, 1), dtype=np.int64)
    cdef int64_t[::1] h_zero = np.zeros(max(nzero, 1), dtype=np.int64)
    cdef double[::1] no_weights = np.zeros(1)
    cdef double lq = log1p(-p) if p < 1 else -INFINITY
    cdef double q_pos = -expm1(pos_counts[0] * lq) if npos == 1 else 0.0
    cdef double q_zero = -expm1(zero_counts[0] * lq) if nzero == 1 else 0.0
    cdef int64_t misses = 0, hits = 0, highs = 0, colls = 0, queries = 0
    cdef int64_t t, x_pre, x, c, rest, d
    cdef Py_ssize_t piece = 0
    cdef double x_mass, tot, p_y, q
    cdef bint flip
    lock = rng.bit_generator.lock
    with lock, nogil:
        for t in range(rounds):
            while True:
                queries += 1
                if _group_pick(bg, &bt, pos_counts, pos_masses, True, p, q_pos, h_pos, &piece):
                    x_pre = pos_starts[piece] + <int64_t> random_interval(bg, pos_counts[piece] - 1)
                    x_mass = pos_masses[piece]
                    break
                if _group_pick(bg, &bt, zero_counts, no_weights, False, p, q_zero, h_zero, &piece):
                    x_pre = zero_starts[piece] + <int64_t> random_interval(bg, zero_counts[piece] - 1)
                    x_mass = 0.0
                    break
            x = x_pre + 1 if identity else <int64_t> forward[x_pre] + 1
            if x == r:
                colls += 1
                misses += 1
                continue
            tot = x_mass + r_mass
            p_y = 0.5 if tot == 0 else r_mass / tot
            flip = p_y > 0.5 or (p_y == 0.5 and x < r)
            q = 1.0 - p_y if flip else p_y
            d = random_binomial(bg, q, m_cmp, &bt)
            c = m_cmp - d if flip else d
            queries += m_cmp
            rest = m_cmp - c
            if c > 2 * K * rest:
                highs += 1
                hits += 1
            elif 2 * K * c < rest:
                hits += 1
            else:
                misses += 1
    return int(misses), int(hits), int(highs), int(colls), int(queries)


def sc_grid_count(points, double c, double L, int64_t G, bint left, bint right):
    cdef const double[::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t q = pts.shape[0], il = 0, ir = 0, j
    cdef int64_t g, count = 0
    cdef double x
    cdef bint bad
    if q == 0:
        return 0
    with nogil:
        for g in range(G):
            x = g * L / G
            while il < q and pts[il] <= x:
                il += 1
            while ir < q and pts[ir] < x:
                ir += 1
            bad = False
            if left:
                for j in range(1, il + 1):
                    if x - pts[il - j] < c * j:
                        bad = True
                        break
            if right and not bad:
                for j in range(1, q - ir + 1):
                    if pts[ir + j - 1] - x < c * j:
                        bad = True
                        break
            if bad:
                count += 1
    return int(count)
