import math

import numpy as np
import pytest

from putlab import (
    Alphabet,
    BallSpec,
    BinaryPQ,
    FullSimplex,
    JointPmf,
    MarginalLowerBound,
    Mechanism,
    SampleSet,
    devroye_radius,
    empirical_from_samples,
    l1_distance,
    merge_rare_symbols,
    pq_joint,
    sample_ball,
)
from putlab.prob import apply_merge, marginal, parse_family, push_through

from conftest import dirichlet_joint

AB, X01 = Alphabet(["a", "b"]), Alphabet(["0", "1"])


def test_empirical_hand_count():
    s = SampleSet([("a", "0"), ("a", "0"), ("b", "1"), ("a", "1")])
    p = empirical_from_samples(s, AB, X01)
    np.testing.assert_array_equal(p.p, [[0.5, 0.25], [0.0, 0.25]])


def test_empirical_point_mass_and_uniform():
    p = empirical_from_samples(SampleSet([("b", "0")] * 7), AB, X01)
    np.testing.assert_array_equal(p.p, [[0, 0], [1, 0]])
    grid = SampleSet([("a", "0"), ("a", "1"), ("b", "0"), ("b", "1")])
    np.testing.assert_array_equal(empirical_from_samples(grid, AB, X01).p, np.full((2, 2), 0.25))


def test_empirical_rejects_unknown_symbol():
    with pytest.raises(ValueError, match="outside"):
        empirical_from_samples(SampleSet([("c", "0")]), AB, X01)


@pytest.mark.parametrize("bad", [[[0.5, 0.6], [0, 0]], [[1.2, -0.2], [0, 0]], [[np.nan, 1], [0, 0]]])
def test_joint_rejects_off_simplex(bad):
    with pytest.raises(ValueError):
        JointPmf.from_array(bad)


def test_joint_accepts_tolerance_and_clips_negative_noise():
    p = JointPmf.from_array([[0.5, 0.5 + 5e-13], [-1e-13, 0.0]])
    assert p.p.min() == 0.0
    assert not p.p.flags.writeable


def test_alphabet_rejects_duplicates():
    with pytest.raises(ValueError):
        Alphabet(["a", "a"])


def test_l1_examples():
    p = JointPmf.from_array([[0.5, 0.5]])
    assert l1_distance(p, p) == 0.0
    assert l1_distance(p, JointPmf.from_array([[1.0, 0.0]])) == 1.0
    assert l1_distance(JointPmf.from_array([[1.0, 0.0]]), JointPmf.from_array([[0.0, 1.0]])) == 2.0


@pytest.mark.parametrize("lam,n,radius", [(1.0, 80, 1.0), (2.0, 320, 1.0)])
def test_devroye_radius(lam, n, radius):
    rep = devroye_radius(lam, 2, 2, n)
    assert rep.radius == pytest.approx(radius, abs=1e-12)
    assert rep.beta == pytest.approx(3 * math.exp(-4 * lam**2 * 4 / 5), rel=1e-12)


def test_devroye_beta_value():
    assert devroye_radius(1.0, 2, 2, 80).beta == pytest.approx(0.12225, abs=5e-5)


def test_devroye_rejects_small_lambda():
    with pytest.raises(ValueError, match="lambda"):
        devroye_radius(0.9, 2, 2, 10)


def test_marginals():
    p = JointPmf.from_array([[0.5, 0.25], [0.0, 0.25]])
    np.testing.assert_allclose(marginal(p, "row"), [0.75, 0.25])
    np.testing.assert_allclose(marginal(JointPmf.from_array(np.full((2, 2), 0.25)), "col"), [0.5, 0.5])
    np.testing.assert_array_equal(marginal(JointPmf.from_array([[0, 0], [0, 1.0]]), "row"), [0, 1])


def test_push_identity_keeps_x_marginal_on_diagonal(rng):
    p = dirichlet_joint(rng, 3, 3)
    out = push_through(p, Mechanism.identity(p.cols), "X").p
    np.testing.assert_allclose(np.diag(out[:, :3]), p.col_marginal())
    assert out[:, 3].sum() == 0.0


def test_push_constant_reveals_nothing(rng):
    p = dirichlet_joint(rng, 2, 3)
    out = push_through(p, Mechanism.constant(p.cols, output=1), "S").p
    np.testing.assert_allclose(out[:, 1], p.row_marginal())
    assert np.delete(out, 1, axis=1).sum() == 0.0


def test_push_hand_product():
    p = JointPmf.from_array([[0.5, 0], [0, 0.5]])
    f = Mechanism(p.cols, Alphabet.range(3, "y"), [[0.5, 0.5, 0], [0, 0.5, 0.5]])
    np.testing.assert_allclose(push_through(p, f, "X").p, [[0.25, 0.25, 0], [0, 0.25, 0.25]])


def test_push_rejects_alphabet_mismatch():
    p = JointPmf.from_array([[0.5, 0.5]])
    with pytest.raises(ValueError):
        push_through(p, Mechanism.identity(Alphabet(["u", "v"])), "S")


def test_merge_gamma_zero_keeps_everything(rng):
    p = dirichlet_joint(rng, 2, 3)
    merged, mm = merge_rare_symbols(p, 0.0)
    assert mm.kept == p.cols.labels and mm.dropped == ()
    assert merged.cols.labels[-1] == mm.sink
    assert merged.p[:, -1].sum() == 0.0


def test_merge_gamma_one_collapses(rng):
    p = dirichlet_joint(rng, 2, 3)
    merged, mm = merge_rare_symbols(p, 1.0)
    assert merged.cols.labels == (mm.sink,)
    np.testing.assert_allclose(merged.p[:, 0], p.row_marginal())


def test_merge_threshold():
    p = JointPmf.from_array([[0.6, 0.3, 0.1]], col_labels=["x1", "x2", "x3"])
    merged, mm = merge_rare_symbols(p, 0.2)
    assert mm.kept == ("x1", "x2")
    assert merged.p[0, -1] == pytest.approx(0.1)


def test_merge_keeps_ties_and_avoids_label_clash():
    p = JointPmf.from_array([[0.25, 0.75]], col_labels=["x0", "b"])
    merged, mm = merge_rare_symbols(p, 0.25)
    assert mm.kept == ("x0", "b") and mm.sink == "x0_"


def test_apply_merge_regroups_columns():
    p = JointPmf.from_array([[0.3, 0.2], [0.1, 0.4]])
    p_hat = JointPmf.from_array([[0.5, 0.0], [0.45, 0.05]])
    _, mm = merge_rare_symbols(p_hat, 0.1)
    out = apply_merge(p, mm)
    np.testing.assert_array_equal(out.p, [[0.3, 0.2], [0.1, 0.4]])
    assert out.cols.labels == ("x0", "x0_")
    everything = apply_merge(p, merge_rare_symbols(p_hat, 1.0)[1])
    np.testing.assert_allclose(everything.p, [[0.5], [0.5]])


def test_sample_ball_zero_radius(rng):
    c = dirichlet_joint(rng, 2, 2)
    out = sample_ball(c, 0.0, FullSimplex(), 5, seed=1)
    assert len(out) == 5 and all(q == c for q in out)


@pytest.mark.parametrize("family", [FullSimplex(), MarginalLowerBound(0.05)])
def test_sample_ball_within_radius(rng, family):
    c = dirichlet_joint(rng, 3, 3, alpha=5.0)
    for q in sample_ball(c, 0.2, family, 300, seed=3):
        assert l1_distance(c, q) <= 0.2 + 1e-12
        assert family.contains(q.p)


def test_sample_ball_pq_family():
    c = JointPmf.from_array(pq_joint(0.7, 0.1))
    fam = BinaryPQ()
    for q in sample_ball(c, 0.1, fam, 200, seed=9):
        p_, q_ = fam.params(q.p)
        np.testing.assert_allclose(q.p, pq_joint(p_, q_), atol=1e-12)
        assert fam.in_domain(p_, q_)
        assert l1_distance(c, q) <= 0.1 + 1e-12


def test_sample_ball_is_seeded(rng):
    c = dirichlet_joint(rng, 2, 3)
    a = sample_ball(c, 0.3, FullSimplex(), 20, seed=4)
    b = sample_ball(c, 0.3, FullSimplex(), 20, seed=4)
    assert a == b


def test_ball_rejects_center_outside_family():
    with pytest.raises(ValueError):
        BallSpec(JointPmf.from_array([[0.5, 0.5], [0, 0]]), 0.1, MarginalLowerBound(0.1))


def test_parse_family():
    assert isinstance(parse_family("pq"), BinaryPQ)
    assert parse_family("gamma:0.1").gamma == 0.1
    with pytest.raises(ValueError):
        parse_family("ring")
