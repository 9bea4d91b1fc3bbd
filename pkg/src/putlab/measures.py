"""f-divergences, f-informations and probability of correct guessing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as K
from .prob import JointPmf, Mechanism, _as_array, push_through

GRID_POINTS = 10_000


@dataclass(frozen=True)
class FGenerator:
    """Convex ``f`` with ``f(1) = 0`` together with its constants on ``[0, 1/u]``.

    ``sup_norm(u)`` is the supremum of ``|f|`` on ``[0, 1/u]`` and
    ``lipschitz(u)`` the Lipschitz constant there. Builtins supply both in
    closed form (``certified``). For a user generator they are estimated on
    a dense grid, which can only under-estimate, so ``certified`` is False.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    f_at_zero: float
    slope_at_infinity: float = math.inf
    sup_norm_fn: Callable[[float], float] | None = field(default=None, repr=False)
    lipschitz_fn: Callable[[float], float] | None = field(default=None, repr=False)
    kernel_code: int = K.CUSTOM
    kernel_param: float = 0.0

    @property
    def certified(self) -> bool:
        return self.sup_norm_fn is not None and self.lipschitz_fn is not None

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=np.float64))

    def sup_norm(self, u: float) -> float:
        if u <= 0:
            raise ValueError("u must be positive")
        if self.sup_norm_fn is not None:
            return float(self.sup_norm_fn(u))
        return grid_constants(self, u)[0]

    def lipschitz(self, u: float) -> float:
        if u <= 0:
            raise ValueError("u must be positive")
        if self.lipschitz_fn is not None:
            return float(self.lipschitz_fn(u))
        return grid_constants(self, u)[1]


def grid_constants(f: FGenerator, u: float, points: int = GRID_POINTS) -> tuple[float, float]:
    """Dense-grid estimates of (sup |f|, Lipschitz constant) on [0, 1/u]."""
    x = np.linspace(0.0, 1.0 / u, points)
    y = f(x)
    return float(np.abs(y).max()), float(np.abs(np.diff(y) / np.diff(x)).max())


def total_variation() -> FGenerator:
    return FGenerator(
        name="tv",
        func=lambda x: np.abs(x - 1.0),
        f_at_zero=1.0,
        slope_at_infinity=1.0,
        sup_norm_fn=lambda u: max(1.0, 1.0 / u - 1.0),
        lipschitz_fn=lambda u: 1.0,
        kernel_code=K.TV,
    )


def chi_square() -> FGenerator:
    return FGenerator(
        name="chi2",
        func=lambda x: x * x - 1.0,
        f_at_zero=-1.0,
        sup_norm_fn=lambda u: max(1.0, 1.0 / (u * u) - 1.0),
        lipschitz_fn=lambda u: 2.0 / u,
        kernel_code=K.CHI2,
    )


def hellinger(alpha: float) -> FGenerator:
    """Hellinger divergence of order alpha > 1, f(x) = (x^alpha - 1)/(alpha - 1)."""
    alpha = float(alpha)
    if not alpha > 1.0:
        raise ValueError(f"Hellinger order must exceed 1, got {alpha}")
    a1 = alpha - 1.0
    return FGenerator(
        name=f"hellinger:{alpha:g}",
        func=lambda x: (x ** alpha - 1.0) / a1,
        f_at_zero=-1.0 / a1,
        # f increases from -1/a1 at 0, so |f| peaks at an endpoint
        sup_norm_fn=lambda u: max(1.0 / a1, (u ** -alpha - 1.0) / a1),
        lipschitz_fn=lambda u: alpha * u ** (1.0 - alpha) / a1,
        kernel_code=K.HELLINGER,
        kernel_param=alpha,
    )


def builtin_generators() -> list[FGenerator]:
    return [total_variation(), chi_square(), hellinger(1.5), hellinger(3.0)]


GENERATOR_NAMES = ("tv", "chi2", "hellinger:<alpha>")


def get_generator(name: str) -> FGenerator:
    if name == "tv":
        return total_variation()
    if name == "chi2":
        return chi_square()
    if name.startswith("hellinger:"):
        try:
            alpha = float(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad Hellinger order in {name!r}") from None
        return hellinger(alpha)
    raise ValueError(f"unknown generator {name!r}; valid: {', '.join(GENERATOR_NAMES)}")


@dataclass(frozen=True)
class MetricSpec:
    """Which functional measures leakage or utility.

    ``generator`` set means f-information; ``None`` means probability of
    correct guessing.
    """

    generator: FGenerator | None = None

    @classmethod
    def finfo(cls, f: FGenerator) -> "MetricSpec":
        return cls(f)

    @classmethod
    def pc(cls) -> "MetricSpec":
        return cls(None)

    @property
    def kind(self) -> str:
        return "pc" if self.generator is None else "finfo"

    @property
    def name(self) -> str:
        return "pc" if self.generator is None else self.generator.name

    @property
    def kernel(self) -> tuple[int, float]:
        if self.generator is None:
            return K.PC, 0.0
        return self.generator.kernel_code, self.generator.kernel_param

    def evaluate(self, joint) -> float:
        a = _as_array(joint)
        code, param = self.kernel
        if K.HAVE_NUMBA and code != K.CUSTOM:
            return float(K.measure(np.ascontiguousarray(a, dtype=np.float64), code, param))
        if self.generator is None:
            return pc_given(a)
        return f_information(self.generator, a)

    def batch(self, joints: np.ndarray) -> np.ndarray:
        code, param = self.kernel
        return K.batch_measure(joints, code, param, self.generator)


def parse_metric(name: str) -> MetricSpec:
    if name == "pc":
        return MetricSpec.pc()
    try:
        return MetricSpec.finfo(get_generator(name))
    except ValueError:
        raise ValueError(
            f"unknown metric {name!r}; valid: pc, {', '.join(GENERATOR_NAMES)}"
        ) from None


# -- functionals ---------------------------------------------------------------


def f_divergence(f: FGenerator, p, q) -> float:
    """sum_x q(x) f(p(x)/q(x)), with 0 f(0/0) = 0.

    Cells with q = 0 < p contribute p * f'(inf); that is finite only for
    generators of bounded slope (TV), otherwise the divergence is rejected.
    """
    a, b = _as_array(p), _as_array(q)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    pos = b > 0.0
    ratio = np.divide(a, b, out=np.ones_like(a), where=pos)
    total = float(np.where(pos, b * f(ratio), 0.0).sum())
    orphan = a[~pos].sum()
    if orphan > 0.0:
        if not math.isfinite(f.slope_at_infinity):
            raise ValueError(f"{f.name} divergence is infinite: p is not absolutely continuous wrt q")
        total += float(orphan) * f.slope_at_infinity
    return total


def f_information(f: FGenerator, p_uv) -> float:
    """D_f(P_UV || P_U P_V)."""
    a = _as_array(p_uv)
    prod = np.outer(a.sum(axis=1), a.sum(axis=0))
    return f_divergence(f, a, prod)


def pc(marginal) -> float:
    return float(np.max(marginal))


def pc_given(p_uv) -> float:
    """Probability of guessing U from V: sum over columns of the column max."""
    return float(_as_array(p_uv).max(axis=0).sum())


def leakage(spec: MetricSpec, q_sx: JointPmf, mech: Mechanism) -> float:
    return spec.evaluate(push_through(q_sx, mech, "S"))


def utility(spec: MetricSpec, q_sx: JointPmf, mech: Mechanism) -> float:
    return spec.evaluate(push_through(q_sx, mech, "X"))


def density_ratios(p_uv) -> np.ndarray:
    """P_UV(u,v) / (P_U(u) P_V(v)) on cells with positive product, else 0."""
    a = _as_array(p_uv)
    prod = np.outer(a.sum(axis=1), a.sum(axis=0))
    return np.divide(a, prod, out=np.zeros_like(a), where=prod > 0.0)


def density_ratio_bound(p_sx: JointPmf) -> float:
    """Cap on every density ratio of an S -> X -> Y chain: 1 / min_x P_X(x)."""
    m = p_sx.col_marginal().min()
    return math.inf if m <= 0.0 else 1.0 / float(m)
