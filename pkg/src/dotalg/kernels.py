"""Selects the compiled kernels when available, else the pure-Python ones.

Set ``DOTALG_PURE_PYTHON=1`` to force the fallback.  :func:`use` switches at
run time, which the benchmarks and the kernel tests rely on.
"""

from __future__ import annotations

import math
import os

from . import _kernels_py

try:
    if os.environ.get("DOTALG_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

impl = _compiled or _kernels_py
BACKEND = "compiled" if _compiled else "python"
_TROP_LIMIT = 1 << 60


def available() -> list[str]:
    return ["compiled", "python"] if _compiled else ["python"]


def use(name: str) -> None:
    global impl, BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        impl = _compiled
    elif name == "python":
        impl = _kernels_py
    else:
        raise ValueError(name)
    BACKEND = name


def _trop_encode(data):
    out = []
    for x in data:
        if x == math.inf:
            out.append(-1)
        elif isinstance(x, int) and 0 <= x < _TROP_LIMIT:
            out.append(x)
        else:
            return None
    return out


def _trop_decode(data):
    return [math.inf if x < 0 else x for x in data]


def matmul_for(sr):
    """A fast ``(a, b, n, k, m) -> entries`` for ``sr``, or None."""
    kind = sr.kernel
    if kind == "mod":
        p = sr.modulus
        return lambda a, b, n, k, m: impl.matmul_mod(a, b, n, k, m, p)
    if kind == "bool":
        return lambda a, b, n, k, m: [x == 1 for x in impl.matmul_bool(a, b, n, k, m)]
    if kind == "tropical":
        return _trop_matmul
    return None


def kron_for(sr):
    kind = sr.kernel
    if kind == "mod":
        p = sr.modulus
        return lambda a, b, ar, ac, br, bc: impl.kron_mod(a, b, ar, ac, br, bc, p)
    if kind == "bool":
        return lambda a, b, ar, ac, br, bc: [x == 1 for x in impl.kron_bool(a, b, ar, ac, br, bc)]
    if kind == "tropical":
        return _trop_kron
    return None


def _trop_matmul(a, b, n, k, m):
    ea, eb = _trop_encode(a), _trop_encode(b)
    if ea is None or eb is None:
        return _generic_trop_matmul(a, b, n, k, m)
    return _trop_decode(impl.matmul_trop(ea, eb, n, k, m))


def _trop_kron(a, b, ar, ac, br, bc):
    ea, eb = _trop_encode(a), _trop_encode(b)
    if ea is None or eb is None:
        return _generic_trop_kron(a, b, ar, ac, br, bc)
    return _trop_decode(impl.kron_trop(ea, eb, ar, ac, br, bc))


def _generic_trop_matmul(a, b, n, k, m):
    return [
        min((a[i * k + t] + b[t * m + j] for t in range(k)), default=math.inf)
        for i in range(n)
        for j in range(m)
    ]


def _generic_trop_kron(a, b, ar, ac, br, bc):
    cols = ac * bc
    out = [math.inf] * (ar * br * cols)
    for i in range(ar):
        for j in range(ac):
            for r in range(br):
                for c in range(bc):
                    out[(i * br + r) * cols + j * bc + c] = a[i * ac + j] + b[r * bc + c]
    return out


def treewidth_dp(n: int, adj: list[int]):
    return impl.treewidth_dp(n, adj)
