import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from putlab import JointPmf, example2_put, l1_distance, merge_rare_symbols, theorem1_bound
from putlab.measures import builtin_generators, f_information, pc, pc_given
from putlab.prob import apply_merge, push_through

from conftest import joints, mechanisms_for

GENS = builtin_generators()
settings.register_profile("putlab", max_examples=60, deadline=None)
settings.load_profile("putlab")


@st.composite
def same_shape_pair(draw):
    a = draw(joints())
    w = draw(arrays(np.float64, a.shape, elements=st.floats(0.0, 1.0))) + 1e-9
    return a, JointPmf(a.rows, a.cols, w / w.sum())


@given(same_shape_pair(), st.data())
def test_l1_is_a_metric(pair, data):
    p, q = pair
    w = data.draw(arrays(np.float64, p.shape, elements=st.floats(0.0, 1.0))) + 1e-9
    r = JointPmf(p.rows, p.cols, w / w.sum())
    assert abs(l1_distance(p, q) - l1_distance(q, p)) <= 1e-12
    assert l1_distance(p, r) <= l1_distance(p, q) + l1_distance(q, r) + 1e-12
    assert l1_distance(p, p) == 0.0
    assert 0.0 <= l1_distance(p, q) <= 2.0 + 1e-12


@given(same_shape_pair(), st.floats(0.0, 1.0))
def test_merge_contracts_l1(pair, gamma):
    p, q = pair
    _, mm = merge_rare_symbols(p, gamma)
    assert l1_distance(apply_merge(p, mm), apply_merge(q, mm)) <= l1_distance(p, q) + 1e-12


@given(same_shape_pair(), st.data(), st.sampled_from("SX"))
def test_channels_contract_l1(pair, data, keep):
    p, q = pair
    mech = data.draw(mechanisms_for(p.shape[1]))
    mech = type(mech)(p.cols, mech.outputs, mech.rows)
    assert l1_distance(push_through(p, mech, keep).p, push_through(q, mech, keep).p) <= l1_distance(p, q) + 1e-12


@given(joints(), st.floats(0.0, 1.0))
def test_merge_commutes_with_marginals(p, gamma):
    merged, mm = merge_rare_symbols(p, gamma)
    np.testing.assert_allclose(merged.col_marginal(), p.col_marginal() @ mm.matrix(), atol=1e-15)
    np.testing.assert_allclose(merged.row_marginal(), p.row_marginal(), atol=1e-15)


@given(joints(), st.sampled_from(GENS))
def test_finfo_nonnegative_and_zero_on_products(p, f):
    assert f_information(f, p) >= -1e-12
    prod = np.outer(p.row_marginal(), p.col_marginal())
    assert abs(f_information(f, prod)) <= 1e-10


@given(joints(min_x=1), st.data(), st.sampled_from(GENS))
def test_data_processing(p, data, f):
    mech = data.draw(mechanisms_for(p.shape[1]))
    mech = type(mech)(p.cols, mech.outputs, mech.rows)
    assert f_information(f, push_through(p, mech, "S")) <= f_information(f, p) + 1e-10


@given(joints())
def test_pc_sandwich(p):
    # pc_given(P_UV) guesses the row variable U from V
    assert pc(p.row_marginal()) - 1e-12 <= pc_given(p) <= 1.0 + 1e-12
    assert pc(p.col_marginal()) - 1e-12 <= pc_given(p.p.T) <= 1.0 + 1e-12


@given(arrays(np.float64, 6, elements=st.floats(0, 1e3)), arrays(np.float64, 6, elements=st.floats(0, 1e3)))
def test_max_difference_inequality(a, b):
    assert abs(a.max() - b.max()) <= np.abs(a - b).max() + 1e-12


@given(st.floats(0.5, 0.95), st.floats(0.0, 0.45), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_example2_nondecreasing_affine(p, q, t1, t2):
    if p + q > 1 or p - q < 0.05:
        return
    lo, hi = p, 1 - q
    e1, e2 = sorted((lo + t1 * (hi - lo), lo + t2 * (hi - lo)))
    h1, h2 = example2_put(p, q, e1), example2_put(p, q, e2)
    slope = (p + q - 2 * p * q) / (p - q)
    assert h2 >= h1 - 1e-12
    assert abs((h2 - h1) - slope * (e2 - e1)) <= 1e-9


@given(st.sampled_from(GENS), st.integers(1, 10_000), st.integers(1, 10_000),
       st.floats(0.05, 0.5), st.floats(0.05, 1.0))
def test_theorem1_nonincreasing(f, n1, n2, m_x, extra):
    m_s = min(1.0, m_x + extra * (1 - m_x))
    lo, hi = sorted((n1, n2))
    a = theorem1_bound(f, 1.0, 2, 3, lo, m_s, m_x).bound_values
    b = theorem1_bound(f, 1.0, 2, 3, hi, m_s, m_x).bound_values
    assert b["leakage_gap"] <= a["leakage_gap"] + 1e-12
    c = theorem1_bound(f, 1.0, 2, 3, lo, m_s, m_x / 2).bound_values
    assert a["utility_gap"] <= c["utility_gap"] + 1e-12
