# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled diff kernels; semantics mirror _match_py exactly.

Fixed-width unsigned arithmetic replaces the pure version's explicit 64-bit
mask; everything else is the same loop structure over the same preorder
arrays.
"""

from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325u
cdef uint64_t FNV_PRIME = 0x100000001B3u


cdef inline uint64_t mix_int(uint64_t h, uint64_t value) noexcept nogil:
    cdef int k
    for k in range(8):
        h = (h ^ (value & 0xFFu)) * FNV_PRIME
        value >>= 8
    return h


def subtree_hashes(list codes, list parents, list leaf_data):
    """Structural hash per node over preorder arrays (parents[i] < i)."""
    cdef Py_ssize_t n = len(codes)
    cdef Py_ssize_t i, m, k, p
    cdef uint64_t h
    cdef const unsigned char* raw
    cdef bytes data
    cdef object entry
    cdef uint64_t* hashes = <uint64_t*> malloc(n * sizeof(uint64_t))
    if hashes == NULL and n > 0:
        raise MemoryError()
    try:
        for i in range(n):
            h = mix_int(FNV_OFFSET, <uint64_t> <int64_t> codes[i])
            entry = leaf_data[i]
            if entry is not None:
                data = <bytes> entry
                raw = data
                m = len(data)
                for k in range(m):
                    h = (h ^ raw[k]) * FNV_PRIME
                h = mix_int(h, <uint64_t> m)
            hashes[i] = h
        for i in range(n - 1, 0, -1):
            p = <Py_ssize_t> parents[i]
            hashes[p] = (hashes[p] ^ hashes[i]) * FNV_PRIME
        return [hashes[i] for i in range(n)]
    finally:
        free(hashes)


def assign_nearest(list old_pos, list new_pos):
    """Pair each new position with the nearest free old position.

    Ties go to the leftmost old candidate; new entries are processed left to
    right. Returns (old_index, new_index) pairs into the input lists.
    """
    cdef Py_ssize_t n = len(old_pos)
    cdef Py_ssize_t total = len(new_pos)
    cdef list pairs = []
    if n == 0:
        return pairs
    cdef int64_t* old = <int64_t*> malloc(n * sizeof(int64_t))
    cdef char* used = <char*> malloc(n * sizeof(char))
    cdef Py_ssize_t* right = <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* left = <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))
    if old == NULL or used == NULL or right == NULL or left == NULL:
        free(old); free(used); free(right); free(left)
        raise MemoryError()
    cdef Py_ssize_t i, j, lo, hi, mid, anchor, r, l, pick, taken, walk, nxt
    cdef int64_t pos
    try:
        for i in range(n):
            old[i] = <int64_t> old_pos[i]
            used[i] = 0
            right[i] = i + 1
            left[i] = i - 1
        taken = 0
        for j in range(total):
            if taken == n:
                break
            pos = <int64_t> new_pos[j]
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if old[mid] < pos:
                    lo = mid + 1
                else:
                    hi = mid
            anchor = lo

            # next free at or after anchor, with path compression
            r = anchor
            while r < n and used[r]:
                r = right[r]
            walk = anchor
            while walk < n and used[walk]:
                nxt = right[walk]
                right[walk] = r
                walk = nxt

            # previous free at or before anchor - 1
            l = anchor - 1
            while l >= 0 and used[l]:
                l = left[l]
            walk = anchor - 1
            while walk >= 0 and used[walk]:
                nxt = left[walk]
                left[walk] = l
                walk = nxt

            if l >= 0 and (r >= n or pos - old[l] <= old[r] - pos):
                pick = l
            else:
                pick = r
            used[pick] = 1
            taken += 1
            pairs.append((pick, j))
        return pairs
    finally:
        free(old); free(used); free(right); free(left)
