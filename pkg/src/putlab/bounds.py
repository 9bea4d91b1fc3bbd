"""Certified gaps between privacy/utility guarantees under distribution shift.

Constants follow the usual conventions: ``K(u)`` is the sup norm of the
generator on ``[0, 1/u]`` and ``L(u)`` its Lipschitz constant there.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .measures import FGenerator
from .prob import devroye_radius


@dataclass(frozen=True)
class Lemma1Constants:
    generator: str
    delta: float
    m_s: float
    m_x: float
    a_f: float
    b_f_delta: float
    c_f_ms: float
    c_f_mx: float
    certified: bool = True


@dataclass(frozen=True)
class HolderSpec:
    """Moduli of continuity of leakage and utility in the distribution.

    ``|L(P, F) - L(Q, F)| <= c_l ||P - Q||^alpha`` for ``||P - Q|| <= r0``,
    and the same with ``c_u`` for utility.
    """

    r0: float
    alpha: float
    c_l: float
    c_u: float
    certified: bool = True

    def __post_init__(self):
        if not self.r0 > 0 or not 0 < self.alpha <= 1:
            raise ValueError("need r0 > 0 and alpha in (0, 1]")
        if not (math.isfinite(self.c_l) and math.isfinite(self.c_u)) or min(self.c_l, self.c_u) < 0:
            raise ValueError("Holder constants must be finite and nonnegative")


@dataclass
class BoundReport:
    kind: str
    inputs: dict
    bound_values: dict
    probability: float | None = None
    certified: bool = True
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        for k, v in self.bound_values.items():
            if v < 0:
                raise ValueError(f"negative bound {k}={v}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _check_mass(name: str, v: float):
    if not 0.0 < v <= 1.0:
        raise ValueError(f"{name} must lie in (0, 1], got {v}")


def lemma1_constants(f: FGenerator, delta: float, m_s: float, m_x: float) -> Lemma1Constants:
    for name, v in (("delta", delta), ("m_s", m_s), ("m_x", m_x)):
        _check_mass(name, v)
    k_mx, l_mx = f.sup_norm(m_x), f.lipschitz(m_x)
    k_d, l_d = f.sup_norm(delta), f.lipschitz(delta)
    return Lemma1Constants(
        generator=f.name,
        delta=delta,
        m_s=m_s,
        m_x=m_x,
        a_f=4.0 * k_mx,
        b_f_delta=k_mx + 2.0 * k_d + (2.0 / delta + 1.0) * l_d,
        c_f_ms=2.0 * k_mx + (2.0 / m_s + 1.0) * l_mx,
        c_f_mx=2.0 * k_mx + (2.0 / m_x + 1.0) * l_mx,
        certified=f.certified,
    )


def lemma1_bounds(consts: Lemma1Constants, s_size: int, x_size: int, l1: float) -> tuple[float, float]:
    """Bounds on the leakage gap and the utility gap for a fixed mechanism.

    ``l1`` is the distance between the two input joints; pass the true
    distance to validate, or a concentration radius to certify.
    """
    if not 0.0 <= l1 <= 2.0 + 1e-12:
        raise ValueError(f"l1 distance must lie in [0, 2], got {l1}")
    return _lemma1_eval(consts, s_size, x_size, l1)


def _lemma1_eval(consts: Lemma1Constants, s_size: int, x_size: int, l1: float) -> tuple[float, float]:
    # a concentration radius may exceed 2; the bound is then merely vacuous
    c = consts
    if c.m_s < c.delta:
        d_l = c.a_f * s_size * c.delta + c.b_f_delta * l1
    else:
        d_l = c.c_f_ms * l1
    if c.m_x < c.delta:
        d_u = c.a_f * x_size * c.delta + c.b_f_delta * l1
    else:
        d_u = c.c_f_mx * l1
    return d_l, d_u


def theorem1_bound(f: FGenerator, lam: float, s_size: int, x_size: int, n: int,
                   m_s: float, m_x: float, delta: float | None = None) -> BoundReport:
    """High-probability gaps between empirical and true f-informations.

    With probability ``1 - beta`` over ``n`` i.i.d. samples the leakage gap is
    at most ``C(m_s) * radius`` and the utility gap ``C(m_x) * radius``.
    """
    if m_x > m_s:
        raise ValueError(f"requires m_x <= m_s (got m_x={m_x}, m_s={m_s})")
    delta = m_x if delta is None else delta
    dev = devroye_radius(lam, s_size, x_size, n)
    consts = lemma1_constants(f, delta, m_s, m_x)
    leak, util = _lemma1_eval(consts, s_size, x_size, dev.radius)
    notes = [] if consts.certified else ["generator constants are grid estimates (non-certified)"]
    return BoundReport(
        kind="theorem1",
        inputs={
            "generator": f.name, "lambda": lam, "s_size": s_size, "x_size": x_size,
            "n": n, "m_s": m_s, "m_x": m_x, "delta": delta,
        },
        bound_values={
            "leakage_gap": leak,
            "utility_gap": util,
            "radius": dev.radius,
            "c_f_ms": consts.c_f_ms,
            "c_f_mx": consts.c_f_mx,
        },
        probability=1.0 - dev.beta,
        certified=consts.certified,
        notes=notes,
    )


def pc_holder_constants() -> HolderSpec:
    """Correct-guessing leakage and utility are 1-Lipschitz in l1 everywhere."""
    return HolderSpec(r0=math.inf, alpha=1.0, c_l=1.0, c_u=1.0)


def finfo_holder_constants(f: FGenerator, gamma: float) -> HolderSpec:
    """Lipschitz moduli of f-information over joints with marginals >= gamma."""
    _check_mass("gamma", gamma)
    c = 2.0 * f.sup_norm(gamma) + (2.0 / gamma + 1.0) * f.lipschitz(gamma)
    return HolderSpec(r0=math.inf, alpha=1.0, c_l=c, c_u=c, certified=f.certified)


def theorem2_bound(h_plus: float, h_minus: float, spec: HolderSpec, r: float) -> float:
    """Utility lost by a uniformly private mechanism, measured on the truth.

    ``h_plus`` and ``h_minus`` are the privacy-utility function of the
    estimate at ``eps + c_l r^alpha`` and ``eps - c_l r^alpha``.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    if h_plus < h_minus - 1e-12:
        raise ValueError(
            f"h_plus={h_plus} < h_minus={h_minus}: the privacy-utility function must be nondecreasing"
        )
    return max(h_plus - h_minus, 0.0) + 2.0 * spec.c_u * r ** spec.alpha


def _check_pq(p: float, q: float):
    if not (0.5 <= p <= 1.0 and 0.0 <= q <= 0.5 and p + q <= 1.0):
        raise ValueError(f"(p, q)=({p}, {q}) outside p in [1/2,1], q in [0,1/2], p+q <= 1")
    if not p > q:
        raise ValueError("p must exceed q")


def example2_put(p: float, q: float, eps: float) -> float:
    """Closed-form correct-guessing privacy-utility function of ``p#q``.

    Valid for eps in [p, 1 - q]; affine there with slope (p+q-2pq)/(p-q).
    """
    _check_pq(p, q)
    if not p - 1e-12 <= eps <= 1.0 - q + 1e-12:
        raise ValueError(f"eps={eps} outside [{p}, {1 - q}]")
    a = p + q - 2.0 * p * q
    return 1.0 - (1.0 - q) / (p - q) * a + eps * a / (p - q)


def example2_delta_bound(p_hat: float, q_hat: float, r: float) -> float:
    _check_pq(p_hat, q_hat)
    if r < 0:
        raise ValueError("r must be nonnegative")
    return 2.0 * p_hat * (1.0 - q_hat) / (p_hat - q_hat) * r
