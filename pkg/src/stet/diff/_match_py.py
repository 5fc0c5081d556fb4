"""Pure-Python diff kernels; semantics mirrored exactly by _match_cy.pyx.

Both kernels are deliberately free of tree objects: callers flatten a tree
into preorder arrays, so the compiled twin can run the same loops over raw
ints and bytes.
"""

from __future__ import annotations

import bisect

_MASK = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix_int(h: int, value: int) -> int:
    for _ in range(8):
        h = ((h ^ (value & 0xFF)) * _FNV_PRIME) & _MASK
        value >>= 8
    return h


def subtree_hashes(codes: list[int], parents: list[int], leaf_data: list[bytes | None]) -> list[int]:
    """Structural hash per node over preorder arrays (parents[i] < i).

    A node's hash covers its kind code, its leaf bytes, and its children's
    hashes; equal hashes are verified by the caller before pairing.
    """
    n = len(codes)
    hashes = [0] * n
    for i in range(n):
        h = _mix_int(_FNV_OFFSET, codes[i])
        data = leaf_data[i]
        if data is not None:
            for b in data:
                h = ((h ^ b) * _FNV_PRIME) & _MASK
            h = _mix_int(h, len(data))
        hashes[i] = h
    for i in range(n - 1, 0, -1):
        p = parents[i]
        hashes[p] = ((hashes[p] ^ hashes[i]) * _FNV_PRIME) & _MASK
    return hashes


def assign_nearest(old_pos: list[int], new_pos: list[int]) -> list[tuple[int, int]]:
    """Pair each new position with the nearest free old position.

    Positions are preorder indices, both lists strictly ascending. New
    entries are processed left to right; distance ties go to the leftmost
    old candidate. Returns (old_index, new_index) pairs into the input lists.
    """
    n = len(old_pos)
    pairs: list[tuple[int, int]] = []
    if n == 0:
        return pairs
    used = [False] * n
    right = list(range(1, n + 1))  # path-compressed "next free at or after"
    left = list(range(-1, n))
    taken = 0

    def find_right(i: int) -> int:
        path = []
        while i < n and used[i]:
            path.append(i)
            i = right[i]
        for p in path:
            right[p] = i
        return i

    def find_left(i: int) -> int:
        path = []
        while i >= 0 and used[i]:
            path.append(i)
            i = left[i]
        for p in path:
            left[p] = i
        return i

    for j, pos in enumerate(new_pos):
        if taken == n:
            break
        anchor = bisect.bisect_left(old_pos, pos)
        r = find_right(anchor)
        l = find_left(anchor - 1)
        if l >= 0 and (r >= n or pos - old_pos[l] <= old_pos[r] - pos):
            pick = l
        else:
            pick = r
        used[pick] = True
        taken += 1
        pairs.append((pick, j))
    return pairs
