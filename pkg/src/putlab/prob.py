"""Finite alphabets, joint pmfs, mechanisms and l1 geometry.

Everything here is a pure function of its inputs. Arrays held by the value
types are copied on construction and marked read-only.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

PROB_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbol labels."""

    labels: tuple[str, ...]

    def __init__(self, labels: Iterable):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(labels)) != len(labels):
            raise ValueError(f"alphabet labels are not unique: {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def range(cls, size: int, prefix: str = "") -> "Alphabet":
        return cls(f"{prefix}{i}" for i in range(size))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return str(label) in self.labels

    def index(self, label) -> int:
        return self.labels.index(str(label))


def _check_simplex(p: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{what} has non-finite entries")
    if p.min(initial=0.0) < -PROB_TOL:
        raise ValueError(f"{what} has a negative entry {p.min():.3g}")
    p = np.where(p < 0.0, 0.0, p)
    total = p.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"{what} sums to {total!r}, not 1")
    return p


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint distribution over ``rows x cols`` (typically S x X).

    Entries must be nonnegative and sum to one within ``PROB_TOL``. Values
    within tolerance are stored as given so JSON round-trips stay exact;
    tiny negative noise is clipped to zero.
    """

    rows: Alphabet
    cols: Alphabet
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 2 or p.shape != (len(self.rows), len(self.cols)):
            raise ValueError(
                f"pmf shape {p.shape} does not match alphabets "
                f"{len(self.rows)}x{len(self.cols)}"
            )
        object.__setattr__(self, "p", _frozen(_check_simplex(p, "joint pmf")))

    @classmethod
    def from_array(cls, p, row_labels=None, col_labels=None) -> "JointPmf":
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError("joint pmf must be a 2-d array")
        rows = Alphabet(row_labels) if row_labels is not None else Alphabet.range(p.shape[0], "s")
        cols = Alphabet(col_labels) if col_labels is not None else Alphabet.range(p.shape[1], "x")
        return cls(rows, cols, p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    def row_marginal(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def col_marginal(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointPmf):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.p, other.p)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.p.tobytes()))


@dataclass(frozen=True, eq=False)
class Mechanism:
    """Row-stochastic matrix ``F[x, y] = P(Y=y | X=x)``."""

    inputs: Alphabet
    outputs: Alphabet
    rows: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.rows, dtype=np.float64)
        if f.shape != (len(self.inputs), len(self.outputs)):
            raise ValueError(
                f"mechanism shape {f.shape} does not match alphabets "
                f"{len(self.inputs)}x{len(self.outputs)}"
            )
        if not np.all(np.isfinite(f)) or f.min() < -PROB_TOL:
            raise ValueError("mechanism entries must be finite and nonnegative")
        f = np.where(f < 0.0, 0.0, f)
        sums = f.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > PROB_TOL)
        if bad.size:
            raise ValueError(
                f"mechanism row {self.inputs.labels[bad[0]]!r} sums to {sums[bad[0]]!r}"
            )
        object.__setattr__(self, "rows", _frozen(f))

    @classmethod
    def from_array(cls, rows, input_labels=None, output_labels=None) -> "Mechanism":
        rows = np.asarray(rows, dtype=np.float64)
        inputs = Alphabet(input_labels) if input_labels is not None else Alphabet.range(rows.shape[0], "x")
        outputs = Alphabet(output_labels) if output_labels is not None else Alphabet.range(rows.shape[1], "y")
        return cls(inputs, outputs, rows)

    @classmethod
    def identity(cls, inputs: Alphabet, n_outputs: int | None = None) -> "Mechanism":
        """Full disclosure; by default padded with one unused output symbol."""
        k = len(inputs)
        n_outputs = k + 1 if n_outputs is None else n_outputs
        if n_outputs < k:
            raise ValueError("identity mechanism needs at least |X| outputs")
        f = np.zeros((k, n_outputs))
        f[np.arange(k), np.arange(k)] = 1.0
        return cls(inputs, Alphabet.range(n_outputs, "y"), f)

    @classmethod
    def constant(cls, inputs: Alphabet, n_outputs: int | None = None, output: int = 0) -> "Mechanism":
        """Every input is mapped to the same output symbol."""
        n_outputs = len(inputs) + 1 if n_outputs is None else n_outputs
        f = np.zeros((len(inputs), n_outputs))
        f[:, output] = 1.0
        return cls(inputs, Alphabet.range(n_outputs, "y"), f)

    @classmethod
    def random(cls, inputs: Alphabet, n_outputs: int, rng: np.random.Generator) -> "Mechanism":
        f = rng.dirichlet(np.ones(n_outputs), size=len(inputs))
        return cls(inputs, Alphabet.range(n_outputs, "y"), f)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mechanism):
            return NotImplemented
        return (
            self.inputs == other.inputs
            and self.outputs == other.outputs
            and np.array_equal(self.rows, other.rows)
        )

    def __hash__(self):
        return hash((self.inputs, self.outputs, self.rows.tobytes()))


@dataclass(frozen=True)
class SampleSet:
    pairs: tuple[tuple[str, str], ...]

    def __init__(self, pairs: Iterable[Sequence]):
        pairs = tuple((str(s), str(x)) for s, x in pairs)
        if not pairs:
            raise ValueError("sample set is empty")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class DevroyeReport:
    lam: float
    big_m: int
    n: int
    radius: float
    beta: float

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "big_m": self.big_m,
            "n": self.n,
            "radius": self.radius,
            "beta": self.beta,
            "confidence": 1.0 - self.beta,
        }


@dataclass(frozen=True)
class MergeMap:
    """Rare-symbol merger: kept symbols map to themselves, the rest to ``sink``."""

    gamma: float
    inputs: Alphabet
    kept: tuple[str, ...]
    sink: str

    @property
    def outputs(self) -> Alphabet:
        return Alphabet(self.kept + (self.sink,))

    @property
    def dropped(self) -> tuple[str, ...]:
        return tuple(x for x in self.inputs if x not in self.kept)

    def index_map(self) -> np.ndarray:
        """``out[i]`` is the merged column index receiving input column ``i``."""
        sink = len(self.kept)
        pos = {x: j for j, x in enumerate(self.kept)}
        return np.array([pos.get(x, sink) for x in self.inputs], dtype=np.intp)

    def matrix(self) -> np.ndarray:
        """Deterministic channel from inputs to merged outputs."""
        idx = self.index_map()
        m = np.zeros((len(self.inputs), len(self.kept) + 1))
        m[np.arange(len(idx)), idx] = 1.0
        return m


# -- operations ---------------------------------------------------------------


def empirical_from_samples(samples: SampleSet, s_alpha: Alphabet, x_alpha: Alphabet) -> JointPmf:
    """Plain empirical frequencies ``count(s, x) / n``."""
    counts = np.zeros((len(s_alpha), len(x_alpha)))
    for (s, x), c in Counter(samples.pairs).items():
        if s not in s_alpha or x not in x_alpha:
            raise ValueError(f"sample pair ({s!r}, {x!r}) is outside the declared alphabets")
        counts[s_alpha.index(s), x_alpha.index(x)] = c
    return JointPmf(s_alpha, x_alpha, counts / samples.n)


def _as_array(p) -> np.ndarray:
    return p.p if isinstance(p, JointPmf) else np.asarray(p, dtype=np.float64)


def l1_distance(p, q) -> float:
    """Entrywise l1 distance; lies in [0, 2] for pmfs."""
    if isinstance(p, JointPmf) and isinstance(q, JointPmf):
        if p.rows != q.rows or p.cols != q.cols:
            raise ValueError("l1_distance needs pmfs over the same alphabets")
    a, b = _as_array(p), _as_array(q)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


def devroye_radius(lam: float, s_size: int, x_size: int, n: int) -> DevroyeReport:
    """l1 radius containing the empirical pmf with probability >= 1 - beta.

    radius = lam * sqrt(20 M / n), beta = 3 exp(-4 lam^2 M / 5), M = |S||X|.
    Only valid for lam >= 1.
    """
    if not lam >= 1.0:
        raise ValueError(f"lambda must be >= 1, got {lam}")
    if n < 1:
        raise ValueError("n must be >= 1")
    big_m = int(s_size) * int(x_size)
    radius = lam * math.sqrt(20.0 * big_m / n)
    beta = 3.0 * math.exp(-4.0 * lam * lam * big_m / 5.0)
    return DevroyeReport(float(lam), big_m, int(n), radius, beta)


def marginal(p: JointPmf, axis: str) -> np.ndarray:
    if axis in ("row", "s", "S"):
        return p.row_marginal()
    if axis in ("col", "x", "X"):
        return p.col_marginal()
    raise ValueError(f"unknown axis {axis!r}")


def push_through(p_sx: JointPmf, mech: Mechanism, keep: str) -> JointPmf:
    """Joint of (S, Y) or (X, Y) for the chain S -> X -> Y."""
    if mech.inputs != p_sx.cols:
        raise ValueError("mechanism input alphabet differs from the pmf's X alphabet")
    if keep in ("S", "s"):
        out = p_sx.p @ mech.rows
        return JointPmf(p_sx.rows, mech.outputs, out)
    if keep in ("X", "x"):
        out = p_sx.col_marginal()[:, None] * mech.rows
        return JointPmf(p_sx.cols, mech.outputs, out)
    raise ValueError(f"keep must be 'S' or 'X', got {keep!r}")


def _fresh_sink(labels: Sequence[str]) -> str:
    sink = "x0"
    while sink in labels:
        sink += "_"
    return sink


def merge_rare_symbols(p_hat: JointPmf, gamma: float) -> tuple[JointPmf, MergeMap]:
    """Collapse X symbols with empirical mass below ``gamma`` into a sink.

    Symbols with mass exactly ``gamma`` are kept. The sink is always the last
    output symbol, present even when it receives nothing.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    px = p_hat.col_marginal()
    kept = tuple(x for x, m in zip(p_hat.cols, px) if m >= gamma)
    mm = MergeMap(float(gamma), p_hat.cols, kept, _fresh_sink(p_hat.cols.labels))
    return apply_merge(p_hat, mm), mm


def apply_merge(p: JointPmf, mm: MergeMap) -> JointPmf:
    if p.cols != mm.inputs:
        raise ValueError("pmf X alphabet differs from the merge map's input alphabet")
    return JointPmf(p.rows, mm.outputs, p.p @ mm.matrix())


def pq_joint(p: float, q: float) -> np.ndarray:
    """Binary secret with P(S=1)=p seen through a BSC with crossover q."""
    return np.array(
        [[(1 - p) * (1 - q), (1 - p) * q],
         [p * q, p * (1 - q)]]
    )


# -- ambiguity families and balls ----------------------------------------------


class FullSimplex:
    """Every distribution over the product alphabet."""

    name = "full"

    def contains(self, q: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(q.min() >= -tol and abs(q.sum() - 1.0) <= tol)

    def _segment_limit(self, center: np.ndarray, direction: np.ndarray) -> float:
        return 1.0

    def sample(self, center: np.ndarray, r: float, rng: np.random.Generator) -> np.ndarray:
        target = rng.dirichlet(np.full(center.size, _dirichlet_alpha(rng))).reshape(center.shape)
        v = target - center
        t = min(self._segment_limit(center, v), 1.0)
        norm = np.abs(v).sum()
        if norm == 0.0:
            return center.copy()
        rho = rng.uniform(0.0, r)
        t = min(t, rho / norm)
        return np.clip(center + t * v, 0.0, None)

    def perturb(self, q: np.ndarray, step: float, rng: np.random.Generator) -> np.ndarray:
        flat = q.ravel()
        src = rng.choice(np.flatnonzero(flat > 0.0))
        dst = rng.integers(flat.size - 1)
        dst += dst >= src
        t = min(step, flat[src])
        out = flat.copy()
        out[src] -= t
        out[dst] += t
        return np.clip(out, 0.0, None).reshape(q.shape)


def _dirichlet_alpha(rng: np.random.Generator) -> float:
    # mix flat and sparse directions so that faces of the simplex get visited
    return 1.0 if rng.random() < 0.5 else 0.2


class MarginalLowerBound(FullSimplex):
    """Distributions whose row and column marginals are all >= gamma."""

    def __init__(self, gamma: float):
        if not gamma > 0.0:
            raise ValueError("gamma must be positive")
        self.gamma = float(gamma)
        self.name = f"gamma:{self.gamma!r}"

    def contains(self, q: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(
            super().contains(q, tol)
            and q.sum(axis=1).min() >= self.gamma - tol
            and q.sum(axis=0).min() >= self.gamma - tol
        )

    def _segment_limit(self, center: np.ndarray, direction: np.ndarray) -> float:
        # largest t keeping center + t*direction inside the marginal constraints
        t = 1.0
        for axis in (0, 1):
            m0 = center.sum(axis=axis) - self.gamma
            dm = direction.sum(axis=axis)
            neg = dm < 0.0
            if neg.any():
                t = min(t, float(np.min(np.maximum(m0[neg], 0.0) / -dm[neg])))
        return max(t, 0.0)

    def perturb(self, q, step, rng):
        out = super().perturb(q, step, rng)
        return out if self.contains(out) else q


class BinaryPQ:
    """Parametric family ``p#q`` with p in [1/2, 1], q in [0, 1/2], p + q <= 1."""

    name = "pq"

    @staticmethod
    def params(q: np.ndarray) -> tuple[float, float]:
        p = float(q[1].sum())
        if p > 0.0:
            qq = float(q[1, 0] / p)
        else:
            qq = float(q[0, 1] / (1.0 - p))
        return p, qq

    @staticmethod
    def in_domain(p: float, q: float, tol: float = 1e-12) -> bool:
        return 0.5 - tol <= p <= 1.0 + tol and -tol <= q <= 0.5 + tol and p + q <= 1.0 + tol

    def contains(self, q: np.ndarray, tol: float = 1e-12) -> bool:
        if q.shape != (2, 2):
            return False
        p, qq = self.params(q)
        return self.in_domain(p, qq, tol) and np.abs(pq_joint(p, qq) - q).max() <= tol

    def _clip(self, p: float, q: float) -> tuple[float, float]:
        p = min(max(p, 0.5), 1.0)
        q = min(max(q, 0.0), 0.5, 1.0 - p)
        return p, q

    def sample(self, center: np.ndarray, r: float, rng: np.random.Generator) -> np.ndarray:
        p0, q0 = self.params(center)
        rho = rng.uniform(0.0, r)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        dp, dq = math.cos(angle), math.sin(angle)
        # grow the step until the l1 distance reaches rho or the domain ends
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            p, q = self._clip(p0 + mid * dp, q0 + mid * dq)
            if np.abs(pq_joint(p, q) - center).sum() <= rho:
                lo = mid
            else:
                hi = mid
        p, q = self._clip(p0 + lo * dp, q0 + lo * dq)
        return pq_joint(p, q)

    def perturb(self, q: np.ndarray, step: float, rng: np.random.Generator) -> np.ndarray:
        p0, q0 = self.params(q)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        p, qq = self._clip(p0 + step * math.cos(angle), q0 + step * math.sin(angle))
        return pq_joint(p, qq)


def parse_family(spec: str):
    """``full``, ``gamma:<g>`` or ``pq``."""
    if spec == "full":
        return FullSimplex()
    if spec == "pq":
        return BinaryPQ()
    if spec.startswith("gamma:"):
        return MarginalLowerBound(float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown family {spec!r}; expected full, gamma:<g> or pq")


@dataclass(frozen=True)
class BallSpec:
    """l1 ball of radius ``r`` around ``center``, intersected with ``family``."""

    center: JointPmf
    r: float
    family: object = FullSimplex()

    def __post_init__(self):
        if self.r < 0.0:
            raise ValueError("ball radius must be nonnegative")
        if not self.family.contains(self.center.p):
            raise ValueError(f"ball center is not in the {self.family.name} family")

    def contains(self, q, tol: float = 1e-12) -> bool:
        a = _as_array(q)
        return bool(
            np.abs(a - self.center.p).sum() <= self.r + tol and self.family.contains(a, tol)
        )


def sample_ball(center: JointPmf, r: float, family, count: int, seed: int) -> list[JointPmf]:
    """Random members of the ball, the center first.

    Each draw heads from the center towards a random Dirichlet point (or a
    random parameter direction for ``p#q``) and stops at an l1 distance drawn
    uniformly from [0, r], or earlier where the family constraint binds.
    """
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    if count < 1:
        raise ValueError("count must be >= 1")
    if not family.contains(center.p):
        raise ValueError(f"center is not in the {family.name} family; the ball is empty")
    rng = np.random.default_rng(seed)
    out = [center]
    c = center.p
    for _ in range(count - 1):
        if r == 0.0:
            out.append(center)
            continue
        q = family.sample(c, r, rng)
        q = _l1_clip(c, q, r)
        out.append(JointPmf(center.rows, center.cols, q))
    return out


def _l1_clip(center: np.ndarray, q: np.ndarray, r: float) -> np.ndarray:
    d = np.abs(q - center).sum()
    if d <= r:
        return q
    return center + (q - center) * (r / d) * (1.0 - 1e-15)
