"""Compare the compiled and the pure-numpy exhaustive grid search.

    python benchmarks/bench_grid.py [--repeats 3] [--seed 0]

Both backends enumerate the same lattice and must return optimal utilities
(to 1e-12; relabelled outputs give exact ties, so the argmax itself may differ
by rounding). The script checks that before printing timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from putlab import _kernels as K
from putlab.measures import parse_metric

CASES = [
    # (|S|, |X|, d, leakage metric, utility metric)
    (2, 2, 10, "pc", "pc"),
    (2, 2, 20, "tv", "chi2"),
    (3, 3, 4, "pc", "pc"),
    (3, 3, 6, "tv", "tv"),
    (3, 3, 6, "hellinger:1.5", "chi2"),
]


def _time(fn, repeats: int) -> tuple[float, tuple]:
    best, out = float("inf"), None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is unavailable or disabled; nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"{'case':<34}{'mechanisms':>12}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for ns, nx, d, lname, uname in CASES:
        p = rng.dirichlet(np.ones(ns * nx)).reshape(ns, nx)
        leak, util = parse_metric(lname), parse_metric(uname)
        eps = 0.5 * (leak.evaluate(p) + (p.sum(axis=1).max() if lname == "pc" else 0.0))
        lattice = K.simplex_lattice(nx + 1, d)
        lc, lp = leak.kernel
        uc, up = util.kernel
        # warm the JIT cache outside the timed region
        K.grid_search_numba(p, lattice, lc, lp, uc, up, eps, 1e-9)
        t_jit, r_jit = _time(lambda: K.grid_search_numba(p, lattice, lc, lp, uc, up, eps, 1e-9), args.repeats)
        t_np, r_np = _time(lambda: K.grid_search_numpy(p, lattice, leak.batch, util.batch, eps, 1e-9), args.repeats)
        if abs(r_jit[1] - r_np[1]) > 1e-12:
            raise SystemExit(f"backends disagree on {lname}/{uname}: {r_jit[:2]} vs {r_np[:2]}")
        label = f"{ns}x{nx} d={d} {lname}/{uname}"
        print(f"{label:<34}{len(lattice) ** nx:>12}{t_np:>10.3f}{t_jit:>10.3f}{t_np / t_jit:>8.1f}x")


if __name__ == "__main__":
    main()
