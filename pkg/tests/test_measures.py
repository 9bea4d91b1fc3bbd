import math

import numpy as np
import pytest

from putlab import JointPmf, Mechanism, MetricSpec, parse_metric
from putlab.measures import (
    FGenerator,
    builtin_generators,
    chi_square,
    density_ratio_bound,
    density_ratios,
    f_divergence,
    f_information,
    get_generator,
    grid_constants,
    hellinger,
    leakage,
    pc,
    pc_given,
    total_variation,
    utility,
)

from conftest import dirichlet_joint, loop_finfo

CORR = [[0.5, 0.0], [0.0, 0.5]]


@pytest.mark.parametrize("f", builtin_generators(), ids=lambda g: g.name)
def test_generators_vanish_at_one(f):
    assert float(f(1.0)) == 0.0
    assert float(f(0.0)) == pytest.approx(f.f_at_zero)


def test_divergence_of_equal_pmfs_is_zero():
    for f in builtin_generators():
        assert f_divergence(f, [0.2, 0.8], [0.2, 0.8]) == 0.0


def test_tv_divergence_equals_l1(rng):
    for _ in range(50):
        p, q = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        assert f_divergence(total_variation(), p, q) == pytest.approx(np.abs(p - q).sum(), abs=1e-12)


def test_chi2_hand_value():
    assert f_divergence(chi_square(), [1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)


def test_divergence_without_absolute_continuity():
    assert f_divergence(total_variation(), [0.5, 0.5], [1.0, 0.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="infinite"):
        f_divergence(chi_square(), [0.5, 0.5], [1.0, 0.0])


@pytest.mark.parametrize("f", builtin_generators(), ids=lambda g: g.name)
def test_finfo_of_product_is_zero(f, rng):
    pu, pv = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(4))
    assert abs(f_information(f, np.outer(pu, pv))) < 1e-12


def test_finfo_correlated_hand_values():
    assert f_information(total_variation(), CORR) == pytest.approx(1.0)
    assert f_information(chi_square(), CORR) == pytest.approx(1.0)


@pytest.mark.parametrize("f", builtin_generators(), ids=lambda g: g.name)
def test_finfo_matches_loop_oracle(f, rng):
    for _ in range(20):
        p = dirichlet_joint(rng, 3, 4, alpha=0.5).p
        assert f_information(f, p) == pytest.approx(loop_finfo(f, p), abs=1e-12)


def test_pc_examples():
    assert pc([0.25] * 4) == 0.25
    assert pc([0, 1, 0]) == 1.0
    assert pc([0.6, 0.2, 0.2]) == 0.6


def test_pc_given_examples():
    assert pc_given(np.outer([0.7, 0.3], [0.4, 0.6])) == pytest.approx(0.7)
    assert pc_given(CORR) == 1.0
    assert pc_given([[0.4, 0.1], [0.2, 0.3]]) == pytest.approx(0.7)


def test_leakage_and_utility_examples(rng):
    p = dirichlet_joint(rng, 2, 3)
    const = Mechanism.constant(p.cols)
    tv, pcm = MetricSpec.finfo(total_variation()), MetricSpec.pc()
    assert leakage(tv, p, const) == 0.0
    assert leakage(pcm, p, const) == pytest.approx(p.row_marginal().max())
    assert utility(tv, p, const) == 0.0
    assert utility(pcm, p, const) == pytest.approx(p.col_marginal().max())
    assert utility(pcm, p, Mechanism.identity(p.cols)) == pytest.approx(1.0)

    q = JointPmf.from_array(CORR)
    f = Mechanism.from_array([[1, 0, 0], [0, 1, 0]], input_labels=q.cols.labels)
    assert leakage(pcm, q, f) == 1.0


def test_identity_leakage_equals_utility_when_s_is_x(rng):
    px = rng.dirichlet(np.ones(3))
    p = JointPmf.from_array(np.diag(px))
    ident = Mechanism.identity(p.cols)
    for spec in (MetricSpec.pc(), MetricSpec.finfo(chi_square())):
        assert leakage(spec, p, ident) == pytest.approx(utility(spec, p, ident), abs=1e-12)


def test_builtin_constant_examples():
    tv, chi2 = total_variation(), chi_square()
    assert (tv.sup_norm(0.25), tv.lipschitz(0.25)) == (3.0, 1.0)
    assert (chi2.sup_norm(0.25), chi2.lipschitz(0.25)) == (15.0, 8.0)


@pytest.mark.parametrize("f", builtin_generators(), ids=lambda g: g.name)
@pytest.mark.parametrize("u", [0.5, 0.25, 0.1])
def test_analytic_constants_dominate_grid(f, u):
    k, lip = grid_constants(f, u)
    assert k <= f.sup_norm(u) + 1e-9
    assert lip <= f.lipschitz(u) + 1e-9
    # the analytic values are tight, not merely upper bounds
    assert k == pytest.approx(f.sup_norm(u), rel=1e-6)
    assert lip == pytest.approx(f.lipschitz(u), rel=1e-3)


def test_custom_generator_falls_back_to_grid():
    g = FGenerator("sq-root", lambda x: (np.sqrt(x) - 1.0) ** 2, f_at_zero=1.0)
    assert not g.certified
    assert g.sup_norm(0.25) == pytest.approx(1.0)
    spec = MetricSpec.finfo(g)
    assert spec.evaluate(CORR) == pytest.approx(loop_finfo(g, CORR))


def test_hellinger_requires_order_above_one():
    with pytest.raises(ValueError):
        hellinger(1.0)
    assert hellinger(2.0).f_at_zero == -1.0


def test_metric_names():
    assert parse_metric("pc").kind == "pc"
    assert parse_metric("hellinger:1.5").name == "hellinger:1.5"
    with pytest.raises(ValueError, match="valid: pc, tv, chi2"):
        parse_metric("kl")
    with pytest.raises(ValueError, match="valid"):
        get_generator("renyi")


def test_density_ratio_bound(rng):
    p = dirichlet_joint(rng, 3, 3)
    sx = density_ratios(p)
    assert sx.max() <= density_ratio_bound(p) + 1e-10
    assert math.isinf(density_ratio_bound(JointPmf.from_array([[1.0, 0.0]])))
