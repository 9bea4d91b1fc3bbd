"""Randomised validation experiments behind the CLI.

All randomness derives from one integer seed. Trial ``i`` draws from
``SeedSequence(seed, spawn_key=(1, i))``, so any trial can be replayed alone
and results do not depend on execution order.
"""

from __future__ import annotations

import math

import numpy as np

from .bounds import _lemma1_eval, lemma1_bounds, lemma1_constants, theorem1_bound
from .measures import FGenerator, builtin_generators, f_information
from .prob import (
    Alphabet,
    JointPmf,
    Mechanism,
    _fresh_sink,
    apply_merge,
    devroye_radius,
    merge_rare_symbols,
    push_through,
)

BOUND_SLACK = 1e-9


def derived_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def random_joint(rng: np.random.Generator, ns: int, nx: int, alpha: float = 1.0) -> JointPmf:
    p = rng.dirichlet(np.full(ns * nx, alpha)).reshape(ns, nx)
    return JointPmf.from_array(p)


def sink_mechanism(p_true: JointPmf, mech: Mechanism | None, rng: np.random.Generator) -> Mechanism:
    """Fixed channel from X plus a sink symbol, as used after merging.

    A mechanism given over X alone gets the average of its rows as the sink
    row. ``None`` draws a random mechanism with |X|+1 outputs.
    """
    labels = p_true.cols.labels
    sink = _fresh_sink(labels)
    full = Alphabet(labels + (sink,))
    if mech is None:
        return Mechanism.random(full, len(labels) + 1, rng)
    if mech.inputs == full:
        return mech
    if mech.inputs == p_true.cols:
        rows = np.vstack([mech.rows, mech.rows.mean(axis=0)])
        return Mechanism(full, mech.outputs, rows)
    raise ValueError("mechanism input alphabet must be X or X plus the sink symbol")


def _restrict(mech: Mechanism, labels) -> Mechanism:
    idx = [mech.inputs.index(x) for x in labels]
    return Mechanism(Alphabet(labels), mech.outputs, mech.rows[idx])


def theorem1_trial(p_true: JointPmf, mech: Mechanism, f: FGenerator, lam: float, n: int,
                   gamma: float, rng: np.random.Generator) -> dict:
    """One draw of the empirical pmf and the realised gaps against the bounds."""
    ns, nx = p_true.shape
    counts = rng.multinomial(n, p_true.p.ravel()).reshape(ns, nx)
    p_hat = JointPmf(p_true.rows, p_true.cols, counts / n)
    dev = devroye_radius(lam, ns, nx, n)
    l1 = float(np.abs(p_hat.p - p_true.p).sum())

    hat0, mm = merge_rare_symbols(p_hat, gamma)
    true0 = apply_merge(p_true, mm)
    f0 = _restrict(mech, mm.outputs.labels)
    # composite X -> X0 -> Y0 channel applied to the unmerged truth
    composite = Mechanism(p_true.cols, f0.outputs, mm.matrix() @ f0.rows)

    leak_hat = f_information(f, push_through(hat0, f0, "S"))
    leak_true = f_information(f, push_through(true0, f0, "S"))
    util_hat = f_information(f, push_through(hat0, f0, "X"))
    util_true = f_information(f, push_through(p_true, composite, "X"))

    m_s = float(min(p_true.row_marginal().min(), p_hat.row_marginal().min()))
    mx_true, mx_hat = true0.col_marginal(), hat0.col_marginal()
    if not mm.dropped:
        mx_true, mx_hat = mx_true[:-1], mx_hat[:-1]
    m_x = float(min(mx_true.min(), mx_hat.min()))

    if m_s <= 0.0 or m_x <= 0.0:
        branch, leak_bound, util_bound = "inapplicable", math.inf, math.inf
    elif m_x <= m_s:
        rep = theorem1_bound(f, lam, ns, nx, n, m_s, m_x)
        branch = "theorem1"
        leak_bound, util_bound = rep.bound_values["leakage_gap"], rep.bound_values["utility_gap"]
    else:
        # any delta <= min(m_s, m_x) selects the delta-free branch of both bounds
        consts = lemma1_constants(f, min(m_s, m_x), m_s, m_x)
        branch = "lemma1"
        leak_bound, util_bound = _lemma1_eval(consts, ns, nx, dev.radius)

    leak_gap, util_gap = abs(leak_hat - leak_true), abs(util_hat - util_true)
    return {
        "l1": l1,
        "radius": dev.radius,
        "devroye_violated": l1 > dev.radius,
        "leak_gap": leak_gap,
        "util_gap": util_gap,
        "leak_bound": leak_bound,
        "util_bound": util_bound,
        "leak_violated": leak_gap > leak_bound + BOUND_SLACK,
        "util_violated": util_gap > util_bound + BOUND_SLACK,
        "m_s": m_s,
        "m_x": m_x,
        "branch": branch,
    }


def montecarlo_theorem1(p_true: JointPmf, f: FGenerator, lam: float, n: int, gamma: float,
                        trials: int, seed: int, mech: Mechanism | None = None) -> tuple[list[dict], dict]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mech = sink_mechanism(p_true, mech, derived_rng(seed, 0))
    records = []
    for i in range(trials):
        rec = {"trial": i}
        rec.update(theorem1_trial(p_true, mech, f, lam, n, gamma, derived_rng(seed, 1, i)))
        records.append(rec)

    dev = devroye_radius(lam, *p_true.shape, n)
    dev_viol = sum(r["devroye_violated"] for r in records)
    ok = [r for r in records if not r["devroye_violated"]]
    leak_viol = sum(r["leak_violated"] for r in ok)
    util_viol = sum(r["util_violated"] for r in ok)
    allowed = dev.beta + 3.0 * math.sqrt(dev.beta * (1.0 - dev.beta) / trials)
    freq = dev_viol / trials
    finite = [r for r in ok if r["branch"] != "inapplicable"]
    summary = {
        "generator": f.name,
        "lambda": lam,
        "n": n,
        "gamma": gamma,
        "trials": trials,
        "seed": seed,
        "radius": dev.radius,
        "beta": dev.beta,
        "devroye_violations": dev_viol,
        "devroye_frequency": freq,
        "devroye_allowed_frequency": allowed,
        "leak_bound_violations": leak_viol,
        "util_bound_violations": util_viol,
        "inapplicable_trials": sum(r["branch"] == "inapplicable" for r in records),
        "max_leak_gap_over_bound": max((r["leak_gap"] / r["leak_bound"] for r in finite if r["leak_bound"] > 0), default=0.0),
        "max_util_gap_over_bound": max((r["util_gap"] / r["util_bound"] for r in finite if r["util_bound"] > 0), default=0.0),
        "mechanism": mech.rows.tolist(),
    }
    summary["passed"] = bool(freq <= allowed and leak_viol == 0 and util_viol == 0)
    return records, summary


def lemma2_gap(p: JointPmf, p_hat: JointPmf, gamma: float, f0_rows: np.ndarray, f: FGenerator) -> float:
    """|I_f(X; Y0) - I_f(X0; Y0)| for X0 the merge of X chosen on ``p_hat``."""
    _, mm = merge_rare_symbols(p_hat, gamma)
    f0 = f0_rows[: len(mm.outputs)]
    px = p.col_marginal()
    p_x_y0 = px[:, None] * (mm.matrix() @ f0)
    p_x0_y0 = (px @ mm.matrix())[:, None] * f0
    # an empty sink row adds nothing but would reorder the floating-point sum
    p_x0_y0 = p_x0_y0[p_x0_y0.sum(axis=1) > 0.0]
    return abs(f_information(f, p_x_y0) - f_information(f, p_x0_y0))


def validate_lemma2(trials: int, seed: int, gammas=(0.0, 0.1, 0.3), generators=None,
                    max_s: int = 4, max_x: int = 4, max_y: int = 5) -> dict:
    """Merging rare symbols leaves the utility f-information unchanged."""
    generators = builtin_generators() if generators is None else generators
    worst = 0.0
    per_gen = {g.name: 0.0 for g in generators}
    for i in range(trials):
        rng = derived_rng(seed, 1, i)
        ns, nx = int(rng.integers(1, max_s + 1)), int(rng.integers(2, max_x + 1))
        ny = int(rng.integers(2, max_y + 1))
        p = random_joint(rng, ns, nx)
        # a small sample leaves rare and unseen symbols for the merge to act on
        m = int(rng.integers(3, 30))
        counts = rng.multinomial(m, p.p.ravel()).reshape(ns, nx)
        p_hat = JointPmf(p.rows, p.cols, counts / m)
        gamma = gammas[i % len(gammas)]
        f0 = rng.dirichlet(np.ones(ny), size=nx + 1)
        for g in generators:
            gap = lemma2_gap(p, p_hat, gamma, f0, g)
            per_gen[g.name] = max(per_gen[g.name], gap)
            worst = max(worst, gap)
    return {
        "trials": trials,
        "seed": seed,
        "gammas": list(gammas),
        "generators": [g.name for g in generators],
        "max_gap": worst,
        "max_gap_by_generator": per_gen,
        "tolerance": 1e-10,
        "passed": worst <= 1e-10,
    }


def lemma1_trial(rng: np.random.Generator, f: FGenerator, delta_scale: float, max_s: int = 3,
                 max_x: int = 3, max_y: int = 4) -> dict:
    """Two joints through one shared mechanism; realised gaps against ``lemma1_bounds``."""
    ns, nx = int(rng.integers(2, max_s + 1)), int(rng.integers(2, max_x + 1))
    ny = int(rng.integers(2, max_y + 1))
    p1 = random_joint(rng, ns, nx)
    if rng.random() < 0.5:
        p2 = random_joint(rng, ns, nx)
    else:
        w = rng.uniform(0.0, 0.3)
        p2 = JointPmf(p1.rows, p1.cols, (1 - w) * p1.p + w * random_joint(rng, ns, nx).p)
    mech = Mechanism.random(p1.cols, ny, rng)
    m_s = float(min(p1.row_marginal().min(), p2.row_marginal().min()))
    m_x = float(min(p1.col_marginal().min(), p2.col_marginal().min()))
    delta = min(delta_scale * m_x, 1.0)
    l1 = float(np.abs(p1.p - p2.p).sum())
    consts = lemma1_constants(f, delta, m_s, m_x)
    b_l, b_u = lemma1_bounds(consts, ns, nx, l1)
    d_l = abs(f_information(f, push_through(p1, mech, "S")) - f_information(f, push_through(p2, mech, "S")))
    d_u = abs(f_information(f, push_through(p1, mech, "X")) - f_information(f, push_through(p2, mech, "X")))
    return {
        "delta_l": d_l, "delta_u": d_u, "bound_l": b_l, "bound_u": b_u,
        "branch_l": "small" if m_s < delta else "large",
        "branch_u": "small" if m_x < delta else "large",
    }
