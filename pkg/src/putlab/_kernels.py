"""Hot loops: exhaustive mechanism enumeration and batched leakage/utility.

Two interchangeable backends. The numba backend compiles the enumeration
loop with ``@njit`` and only understands the builtin metrics (selected by an
integer code). The numpy backend evaluates chunks of mechanisms at once and
accepts any batch metric callable. Set ``PUTLAB_DISABLE_NUMBA=1`` to force
the numpy backend everywhere.

Metric codes: 0 = probability of correct guessing, 1 = total variation,
2 = chi-square, 3 = Hellinger of order ``param``; -1 = numpy only.
"""

from __future__ import annotations

import os
from itertools import combinations

import numpy as np

PC, TV, CHI2, HELLINGER, CUSTOM = 0, 1, 2, 3, -1

_disabled = os.environ.get("PUTLAB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _disabled:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def simplex_lattice(k: int, d: int) -> np.ndarray:
    """All probability vectors of length ``k`` with entries in {0, 1/d, ..., 1}.

    Rows come in lexicographically descending order of their count vectors,
    so the first row is the vertex ``e_0``.
    """
    rows = []
    for bars in combinations(range(d + k - 1), k - 1):
        counts = np.diff((-1,) + bars + (d + k - 1,)) - 1
        rows.append(counts)
    out = np.array(rows, dtype=np.float64)[::-1] / d
    return np.ascontiguousarray(out)


# -- scalar metric evaluation (shared by both backends) ---------------------


@njit(cache=True)
def _fval(code, param, t):
    if code == TV:
        return abs(t - 1.0)
    if code == CHI2:
        return t * t - 1.0
    return (t ** param - 1.0) / (param - 1.0)


@njit(cache=True)
def measure(joint, code, param):
    """Leakage/utility functional of a 2-d joint ``(U, V)``."""
    nu, nv = joint.shape
    if code == PC:
        total = 0.0
        for v in range(nv):
            best = joint[0, v]
            for u in range(1, nu):
                if joint[u, v] > best:
                    best = joint[u, v]
            total += best
        return total
    mu = np.zeros(nu)
    mv = np.zeros(nv)
    for u in range(nu):
        for v in range(nv):
            mu[u] += joint[u, v]
            mv[v] += joint[u, v]
    total = 0.0
    for u in range(nu):
        for v in range(nv):
            prod = mu[u] * mv[v]
            if prod > 0.0:
                total += prod * _fval(code, param, joint[u, v] / prod)
    return total


@njit(cache=True)
def _grid_search_jit(contrib_s, contrib_x, leak_code, leak_param, util_code, util_param, eps, tol):
    nx, nr, ns, ny = contrib_s.shape
    total = 1
    for _ in range(nx):
        total *= nr
    idx = np.zeros(nx, dtype=np.int64)
    js = np.empty((ns, ny))
    jx = np.empty((nx, ny))
    best_flat = -1
    best_util = -np.inf
    best_leak = np.inf
    min_flat = 0
    min_leak = np.inf
    for flat in range(total):
        js[:, :] = 0.0
        for x in range(nx):
            js += contrib_s[x, idx[x]]
        leak = measure(js, leak_code, leak_param)
        if leak < min_leak:
            min_leak = leak
            min_flat = flat
        if leak <= eps + tol:
            for x in range(nx):
                jx[x, :] = contrib_x[x, idx[x]]
            util = measure(jx, util_code, util_param)
            if util > best_util:
                best_util = util
                best_leak = leak
                best_flat = flat
        # odometer increment, last row fastest
        pos = nx - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < nr:
                break
            idx[pos] = 0
            pos -= 1
    return best_flat, best_util, best_leak, min_flat, min_leak


def _contributions(p_sx: np.ndarray, lattice: np.ndarray):
    # contrib_s[x, k] = P(., x) outer row_k ; contrib_x[x, k] = P_X(x) * row_k
    px = p_sx.sum(axis=0)
    contrib_s = np.ascontiguousarray(p_sx.T[:, None, :, None] * lattice[None, :, None, :])
    contrib_x = np.ascontiguousarray(px[:, None, None] * lattice[None, :, :])
    return contrib_s, contrib_x


def decode(flat: int, nx: int, nr: int) -> np.ndarray:
    idx = np.zeros(nx, dtype=np.int64)
    for pos in range(nx - 1, -1, -1):
        idx[pos] = flat % nr
        flat //= nr
    return idx


def grid_search_numba(p_sx, lattice, leak_code, leak_param, util_code, util_param, eps, tol):
    if not HAVE_NUMBA:
        raise RuntimeError("numba backend is not available")
    if CUSTOM in (leak_code, util_code):
        raise ValueError("numba backend supports builtin metrics only")
    cs, cx = _contributions(np.asarray(p_sx, dtype=np.float64), lattice)
    return _grid_search_jit(cs, cx, int(leak_code), float(leak_param), int(util_code),
                            float(util_param), float(eps), float(tol))


def batch_measure(joints: np.ndarray, code: int, param: float = 0.0, f=None) -> np.ndarray:
    """Vectorised ``measure`` over a stack of joints ``(B, U, V)``.

    ``f`` is a vectorised generator used when ``code`` is CUSTOM.
    """
    if code == PC:
        return joints.max(axis=1).sum(axis=1)
    mu = joints.sum(axis=2, keepdims=True)
    mv = joints.sum(axis=1, keepdims=True)
    prod = mu * mv
    pos = prod > 0.0
    ratio = np.divide(joints, prod, out=np.ones_like(joints), where=pos)
    if code == TV:
        vals = np.abs(ratio - 1.0)
    elif code == CHI2:
        vals = ratio * ratio - 1.0
    elif code == HELLINGER:
        vals = (ratio ** param - 1.0) / (param - 1.0)
    else:
        vals = np.asarray(f(ratio), dtype=np.float64)
    terms = np.where(pos, prod * vals, 0.0)
    return terms.sum(axis=(1, 2))


def grid_search_numpy(p_sx, lattice, leak, util, eps, tol, chunk: int = 16384):
    """Chunked numpy enumeration.

    ``leak`` and ``util`` are batch callables ``(B, U, V) -> (B,)``.
    Returns the same tuple as the numba backend.
    """
    p_sx = np.asarray(p_sx, dtype=np.float64)
    cs, cx = _contributions(p_sx, lattice)
    nx, nr = cs.shape[:2]
    total = nr ** nx
    radix = nr ** np.arange(nx - 1, -1, -1, dtype=np.int64)
    best = (-1, -np.inf, np.inf)
    min_flat, min_leak = 0, np.inf
    xs = np.arange(nx)
    for start in range(0, total, chunk):
        flats = np.arange(start, min(start + chunk, total), dtype=np.int64)
        idx = (flats[:, None] // radix[None, :]) % nr
        js = cs[xs[None, :], idx].sum(axis=1)
        leaks = leak(js)
        j = int(np.argmin(leaks))
        if leaks[j] < min_leak:
            min_leak, min_flat = float(leaks[j]), int(flats[j])
        feas = np.flatnonzero(leaks <= eps + tol)
        if feas.size == 0:
            continue
        jx = cx[xs[None, :], idx[feas]]
        utils = util(jx)
        k = int(np.argmax(utils))
        if utils[k] > best[1]:
            best = (int(flats[feas[k]]), float(utils[k]), float(leaks[feas[k]]))
    return best[0], best[1], best[2], min_flat, min_leak
