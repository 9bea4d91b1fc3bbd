"""Privacy-utility function, robust mechanisms and utility degradation.

Mechanisms are searched over ``|X| x (|X|+1)`` row-stochastic matrices. The
grid solver enumerates every mechanism whose rows lie on the simplex lattice
with denominator ``d`` and is the ground-truth oracle for small alphabets;
the local solver is a seeded random-restart hill climber for larger ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from . import _kernels as K
from .bounds import HolderSpec
from .measures import MetricSpec, leakage, utility
from .prob import Alphabet, BallSpec, JointPmf, Mechanism, sample_ball

MAX_GRID_X = 3


@dataclass(frozen=True)
class SolveConfig:
    grid_resolution: int | None = None
    restarts: int = 8
    local_steps: int = 400
    tolerance: float = 1e-9
    seed: int = 0
    ball_samples: int = 256

    def resolution(self, x_size: int) -> int:
        if self.grid_resolution is not None:
            if self.grid_resolution < 2:
                raise ValueError("grid_resolution must be >= 2")
            return self.grid_resolution
        return 6 if x_size >= 3 else 10

    def slack(self, x_size: int) -> float:
        """Agreement margin between grid and exact optima."""
        return 2.0 / self.resolution(x_size)


@dataclass(frozen=True)
class PutSolution:
    mechanism: Mechanism
    eps: float
    utility_value: float
    leakage_value: float
    method: str
    feasible: bool = True
    certificate: str | None = None


@dataclass(frozen=True)
class RobustSolution:
    mechanism: Mechanism
    eps: float
    r: float
    shrunk_eps: float
    center_utility: float
    certified_worst_utility: float
    sampled_worst_utility: float
    sampled_max_leakage: float
    holder: HolderSpec
    put: PutSolution


def _outputs(n: int) -> Alphabet:
    return Alphabet.range(n, "y")


def _use_numba(spec_l: MetricSpec, spec_u: MetricSpec) -> bool:
    return K.HAVE_NUMBA and K.CUSTOM not in (spec_l.kernel[0], spec_u.kernel[0])


def solve_put_grid(p: JointPmf, spec_l: MetricSpec, spec_u: MetricSpec, eps: float,
                   cfg: SolveConfig = SolveConfig(), n_outputs: int | None = None) -> PutSolution:
    """Exhaustive lattice search for the best mechanism with leakage <= eps.

    Ties go to the lexicographically first mechanism in enumeration order.
    When no lattice mechanism is feasible the least-leaking one is returned
    with ``feasible=False``.
    """
    nx = len(p.cols)
    if nx > MAX_GRID_X:
        raise ValueError(
            f"|X|={nx} is too large for exhaustive enumeration (max {MAX_GRID_X}); use solve_put_local"
        )
    ny = nx + 1 if n_outputs is None else n_outputs
    d = cfg.resolution(nx)
    lattice = K.simplex_lattice(ny, d)
    if _use_numba(spec_l, spec_u):
        lc, lp = spec_l.kernel
        uc, up = spec_u.kernel
        best, _, _, min_flat, _ = K.grid_search_numba(p.p, lattice, lc, lp, uc, up, eps, cfg.tolerance)
    else:
        best, _, _, min_flat, _ = K.grid_search_numpy(p.p, lattice, spec_l.batch, spec_u.batch,
                                                      eps, cfg.tolerance)
    feasible = best >= 0
    flat = best if feasible else min_flat
    rows = lattice[K.decode(flat, nx, len(lattice))]
    mech = Mechanism(p.cols, _outputs(ny), rows)
    return PutSolution(
        mechanism=mech,
        eps=float(eps),
        utility_value=utility(spec_u, p, mech),
        leakage_value=leakage(spec_l, p, mech),
        method="grid",
        feasible=bool(feasible),
        certificate=f"exhaustive lattice d={d}, |Y|={ny}, {len(lattice) ** nx} mechanisms",
    )


class _Objective:
    def __init__(self, p: JointPmf, spec_l: MetricSpec, spec_u: MetricSpec):
        self.p = p.p
        self.px = p.col_marginal()
        self.spec_l, self.spec_u = spec_l, spec_u

    def leak(self, f: np.ndarray) -> float:
        return self.spec_l.evaluate(self.p @ f)

    def util(self, f: np.ndarray) -> float:
        return self.spec_u.evaluate(self.px[:, None] * f)


def _boundary_mix(obj: _Objective, base: np.ndarray, target: np.ndarray, limit: float) -> np.ndarray:
    """Furthest point of the segment base -> target with leakage <= limit.

    Leakage is convex in the mechanism, so feasibility along the segment is an
    interval starting at ``base``.
    """
    if obj.leak(target) <= limit:
        return target
    lo, hi = 0.0, 1.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if obj.leak((1 - mid) * base + mid * target) <= limit:
            lo = mid
        else:
            hi = mid
    return (1 - lo) * base + lo * target


def _starts(nx: int, ny: int, rng: np.random.Generator, extra: int) -> list[np.ndarray]:
    eye = np.zeros((nx, ny))
    eye[np.arange(nx), np.arange(nx)] = 1.0
    starts = [eye]
    maps = list(product(range(ny), repeat=nx)) if ny ** nx <= 256 else [
        tuple(rng.integers(ny, size=nx)) for _ in range(256)
    ]
    for m in maps:
        f = np.zeros((nx, ny))
        f[np.arange(nx), m] = 1.0
        starts.append(f)
    for _ in range(extra):
        starts.append(rng.dirichlet(np.full(ny, 0.5), size=nx))
    return starts


def solve_put_local(p: JointPmf, spec_l: MetricSpec, spec_u: MetricSpec, eps: float,
                    cfg: SolveConfig = SolveConfig(), n_outputs: int | None = None) -> PutSolution:
    """Random-restart hill climbing over mechanism rows.

    Candidate starts (identity, deterministic maps, random rows) are pulled
    towards the constant mechanism until feasible; the best ``restarts`` of
    them are refined by moving mass between two outputs of one row. A move
    that breaks the leakage budget is shortened to the feasibility boundary.
    """
    nx = len(p.cols)
    ny = nx + 1 if n_outputs is None else n_outputs
    obj = _Objective(p, spec_l, spec_u)
    rng = np.random.default_rng(cfg.seed)
    limit = eps + cfg.tolerance
    const = np.zeros((nx, ny))
    const[:, 0] = 1.0
    if obj.leak(const) > limit:
        mech = Mechanism(p.cols, _outputs(ny), const)
        return PutSolution(mech, float(eps), obj.util(const), obj.leak(const), "local", False,
                           "eps is below the minimum achievable leakage")

    cands = [_boundary_mix(obj, const, s, limit) for s in _starts(nx, ny, rng, 4 * cfg.restarts)]
    scored = sorted(((obj.util(f), i) for i, f in enumerate(cands)), key=lambda t: (-t[0], t[1]))
    best_f, best_u = const, obj.util(const)
    for u0, i in scored[: cfg.restarts]:
        f, u = _climb(obj, cands[i].copy(), u0, limit, cfg.local_steps, rng)
        if u > best_u:
            best_f, best_u = f, u
    best_f = best_f / best_f.sum(axis=1, keepdims=True)
    mech = Mechanism(p.cols, _outputs(ny), best_f)
    return PutSolution(
        mechanism=mech,
        eps=float(eps),
        utility_value=utility(spec_u, p, mech),
        leakage_value=leakage(spec_l, p, mech),
        method="local",
        feasible=True,
        certificate=f"hill climbing, {cfg.restarts} restarts x {cfg.local_steps} steps, seed {cfg.seed}",
    )


def _climb(obj: _Objective, f: np.ndarray, u: float, limit: float, steps: int,
           rng: np.random.Generator) -> tuple[np.ndarray, float]:
    nx, ny = f.shape
    step = 0.5
    misses = 0
    patience = 2 * nx * ny
    for _ in range(steps):
        x = rng.integers(nx)
        src_choices = np.flatnonzero(f[x] > 0.0)
        src = src_choices[rng.integers(src_choices.size)]
        dst = rng.integers(ny - 1)
        dst += dst >= src
        amount = min(step, f[x, src])
        move = np.zeros_like(f)
        move[x, src] -= amount
        move[x, dst] += amount
        cand = f + move
        if obj.leak(cand) > limit:
            cand = _boundary_mix(obj, f, cand, limit)
        cu = obj.util(cand)
        if cu > u + 1e-15:
            f, u = np.clip(cand, 0.0, None), cu
            misses = 0
        else:
            misses += 1
            if misses >= patience:
                step *= 0.5
                misses = 0
                if step < 1e-6:
                    break
    return f, u


def solve_put(p: JointPmf, spec_l: MetricSpec, spec_u: MetricSpec, eps: float,
              cfg: SolveConfig = SolveConfig()) -> PutSolution:
    """Grid search when the alphabet allows it, local search otherwise."""
    if len(p.cols) <= MAX_GRID_X:
        return solve_put_grid(p, spec_l, spec_u, eps, cfg)
    return solve_put_local(p, spec_l, spec_u, eps, cfg)


def min_leakage(p: JointPmf, spec_l: MetricSpec) -> float:
    """Smallest achievable leakage, attained by a constant mechanism.

    By data processing no mechanism leaks less than one whose output is
    independent of X.
    """
    return leakage(spec_l, p, Mechanism.constant(p.cols))


def _batch_joints(ball_members: list[JointPmf], f: np.ndarray, keep: str) -> np.ndarray:
    qs = np.stack([q.p for q in ball_members])
    if keep == "S":
        return qs @ f
    return qs.sum(axis=1)[:, :, None] * f[None, :, :]


def _worst_case(ball: BallSpec, mech: Mechanism, spec_u: MetricSpec, samples: int, seed: int,
                refine_steps: int = 300) -> tuple[float, np.ndarray]:
    members = sample_ball(ball.center, ball.r, ball.family, samples, seed)
    utils = spec_u.batch(_batch_joints(members, mech.rows, "X"))
    i = int(np.argmin(utils))
    q, u = members[i].p.copy(), float(utils[i])
    if ball.r == 0.0:
        return u, q
    rng = np.random.default_rng([seed, 1])
    f = mech.rows
    step = ball.r / 2
    misses = 0
    for _ in range(refine_steps):
        cand = ball.family.perturb(q, step, rng)
        if ball.contains(cand):
            cu = spec_u.evaluate(cand.sum(axis=0)[:, None] * f)
            if cu < u - 1e-15:
                q, u = cand, cu
                misses = 0
                continue
        misses += 1
        if misses >= 12:
            step *= 0.5
            misses = 0
    return u, q


def worst_case_utility(ball: BallSpec, mech: Mechanism, spec_u: MetricSpec, samples: int,
                       seed: int) -> float:
    """Smallest utility found over the ball (an upper bound on the infimum)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return _worst_case(ball, mech, spec_u, samples, seed)[0]


def max_leakage_over(members: list[JointPmf], mech: Mechanism, spec_l: MetricSpec) -> float:
    return float(spec_l.batch(_batch_joints(members, mech.rows, "S")).max())


def max_admissible_radius(center: JointPmf, spec_l: MetricSpec, eps: float, holder: HolderSpec) -> float:
    slack = eps - min_leakage(center, spec_l)
    if slack < 0:
        return -math.inf
    if holder.c_l == 0:
        return holder.r0
    return min(holder.r0, (slack / holder.c_l) ** (1.0 / holder.alpha))


def solve_robust(ball: BallSpec, spec_l: MetricSpec, spec_u: MetricSpec, eps: float,
                 holder: HolderSpec, cfg: SolveConfig = SolveConfig()) -> RobustSolution:
    """Mechanism that keeps leakage <= eps for every member of the ball.

    Solves the nominal problem at the shrunk budget ``eps - c_l r^alpha``;
    the Holder bound then carries feasibility to the whole ball and the
    worst-case utility is at least ``U(center) - c_u r^alpha``.
    """
    center, r = ball.center, ball.r
    r_max = max_admissible_radius(center, spec_l, eps, holder)
    if r > r_max * (1 + 1e-12) + 1e-15:
        raise ValueError(
            f"radius {r} is not admissible for eps={eps}: maximal admissible radius is {max(r_max, 0.0)!r}"
        )
    ra = r ** holder.alpha
    shrunk = eps - holder.c_l * ra
    # tight inner tolerance so that ball-wide leakage stays within eps + 1e-9
    inner = replace(cfg, tolerance=min(cfg.tolerance, 1e-12))
    put = solve_put(center, spec_l, spec_u, shrunk, inner)
    mech = put.mechanism
    cu = utility(spec_u, center, mech)
    members = sample_ball(center, r, ball.family, cfg.ball_samples, cfg.seed)
    return RobustSolution(
        mechanism=mech,
        eps=float(eps),
        r=float(r),
        shrunk_eps=float(shrunk),
        center_utility=cu,
        certified_worst_utility=cu - holder.c_u * ra,
        sampled_worst_utility=worst_case_utility(ball, mech, spec_u, cfg.ball_samples, cfg.seed),
        sampled_max_leakage=max_leakage_over(members, mech, spec_l),
        holder=holder,
        put=put,
    )


def degradation(p_true: JointPmf, robust: RobustSolution, spec_l: MetricSpec, spec_u: MetricSpec,
                eps: float, cfg: SolveConfig = SolveConfig()) -> float:
    """H(P; eps) minus the true utility of the robust mechanism, unclamped.

    May dip below zero by at most the grid slack.
    """
    h = solve_put_grid(p_true, spec_l, spec_u, eps, cfg).utility_value
    return h - utility(spec_u, p_true, robust.mechanism)


@dataclass(frozen=True)
class CurvePoint:
    eps: float
    utility: float
    leakage: float
    method: str
    feasible: bool
    monotone_violation: bool = False


def put_curve(p: JointPmf, spec_l: MetricSpec, spec_u: MetricSpec, eps_grid, cfg: SolveConfig = SolveConfig(),
              method: str = "auto") -> list[CurvePoint]:
    eps_grid = [float(e) for e in eps_grid]
    if any(b < a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps grid must be sorted ascending")
    solve = {"auto": solve_put, "grid": solve_put_grid, "local": solve_put_local}[method]
    slack = cfg.slack(len(p.cols))
    out: list[CurvePoint] = []
    running = -math.inf
    for e in eps_grid:
        sol = solve(p, spec_l, spec_u, e, cfg)
        bad = sol.feasible and sol.utility_value < running - slack
        if sol.feasible:
            running = max(running, sol.utility_value)
        out.append(CurvePoint(e, sol.utility_value, sol.leakage_value, sol.method, sol.feasible, bad))
    return out
