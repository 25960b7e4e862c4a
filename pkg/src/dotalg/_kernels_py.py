"""Pure-Python versions of the compiled kernels, with identical signatures.

Tropical inputs encode infinity as -1; Boolean inputs are 0/1.
"""

from __future__ import annotations


def matmul_mod(a, b, n, k, m, p):
    out = [0] * (n * m)
    for i in range(n):
        acc = [0] * m
        for t in range(k):
            x = a[i * k + t]
            if x:
                row = t * m
                for j in range(m):
                    acc[j] += x * b[row + j]
        out[i * m : (i + 1) * m] = [v % p for v in acc]
    return out


def kron_mod(a, b, ar, ac, br, bc, p):
    cols = ac * bc
    out = [0] * (ar * br * cols)
    for i in range(ar):
        for j in range(ac):
            x = a[i * ac + j]
            if x:
                for r in range(br):
                    base = (i * br + r) * cols + j * bc
                    brow = r * bc
                    for c in range(bc):
                        out[base + c] = x * b[brow + c] % p
    return out


def matmul_bool(a, b, n, k, m):
    out = [0] * (n * m)
    for i in range(n):
        for t in range(k):
            if a[i * k + t]:
                row = t * m
                base = i * m
                for j in range(m):
                    if b[row + j]:
                        out[base + j] = 1
    return out


def kron_bool(a, b, ar, ac, br, bc):
    cols = ac * bc
    out = [0] * (ar * br * cols)
    for i in range(ar):
        for j in range(ac):
            if a[i * ac + j]:
                for r in range(br):
                    base = (i * br + r) * cols + j * bc
                    brow = r * bc
                    for c in range(bc):
                        if b[brow + c]:
                            out[base + c] = 1
    return out


def matmul_trop(a, b, n, k, m):
    out = [-1] * (n * m)
    for i in range(n):
        base = i * m
        for t in range(k):
            x = a[i * k + t]
            if x < 0:
                continue
            row = t * m
            for j in range(m):
                y = b[row + j]
                if y >= 0:
                    s = x + y
                    cur = out[base + j]
                    if cur < 0 or s < cur:
                        out[base + j] = s
    return out


def kron_trop(a, b, ar, ac, br, bc):
    cols = ac * bc
    out = [-1] * (ar * br * cols)
    for i in range(ar):
        for j in range(ac):
            x = a[i * ac + j]
            if x >= 0:
                for r in range(br):
                    base = (i * br + r) * cols + j * bc
                    brow = r * bc
                    for c in range(bc):
                        y = b[brow + c]
                        if y >= 0:
                            out[base + c] = x + y
    return out


def _outside_neighbours(adj, s, v):
    """Vertices outside ``s + v`` reachable from ``v`` through ``s``."""
    inside = s | (1 << v)
    seen = 1 << v
    frontier = seen
    boundary = 0
    while frontier:
        nb = 0
        f = frontier
        while f:
            low = f & -f
            nb |= adj[low.bit_length() - 1]
            f ^= low
        boundary |= nb & ~inside
        frontier = nb & s & ~seen
        seen |= frontier
    return boundary


def treewidth_dp(n, adj):
    """Exact treewidth by dynamic programming over vertex subsets.

    ``adj[v]`` is the neighbour bitmask of ``v``.  Returns the width and an
    optimal elimination order.
    """
    full = (1 << n) - 1
    tw = [0] * (1 << n)
    choice = [0] * (1 << n)
    tw[0] = -1
    for s in range(1, full + 1):
        best = n + 1
        rest = s
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            prev = s ^ low
            val = tw[prev]
            if val >= best:
                continue
            q = bin(_outside_neighbours(adj, prev, v)).count("1")
            if q > val:
                val = q
            if val < best:
                best = val
                choice[s] = v
        tw[s] = best
    order = []
    s = full
    while s:
        v = choice[s]
        order.append(v)
        s ^= 1 << v
    order.reverse()
    return max(tw[full], 0) if n else -1, order
