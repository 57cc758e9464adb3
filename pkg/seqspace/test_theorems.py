"""Tests for characterization predicates, witnesses and classifiers"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from seqspace.acceptance import flat_then_linear, shifted_square
from seqspace.duality import canonical_functional, is_norming_pair
from seqspace.errors import ParamOutOfRange, PreconditionViolation
from seqspace.phi import power, square_patch
from seqspace.sampling import random_orlicz_function
from seqspace.search import SearchBudget
from seqspace.spaces import LorentzSpec, NormFlavor, OrliczSpec
from seqspace.theorems import (
    BlockSpec,
    DisjointCondition,
    DisjointSpanSpec,
    HyperplaneStatus,
    PhiClassKind,
    SubspaceStatus,
    WitnessParams,
    WitnessVariant,
    basis_vectors_in_kernel,
    build_averaging_projection,
    classify_orlicz_phi,
    derivative_additivity_defect,
    disjoint_span_conditions,
    fit_geometric_scale,
    has_property_P,
    has_property_Q,
    lorentz_hyperplane_verdict,
    orlicz_subspace_verdict,
    p_convexity_sample_check,
    refute_lorentz_hyperplane,
    sampled_property_P,
    sampled_property_Q,
    witness_functional,
    witness_params,
    witness_x,
    within_basis_vector_bound,
)

PROPERTY_CASES = {
    # name: (space, has (P), has (Q))
    "lorentz_p2": (LorentzSpec(w=[1.0, 0.5, 0.25], p=2.0), True, True),
    "l1": (LorentzSpec(w=[1.0, 1.0, 1.0], p=1.0), True, False),
    "max_norm": (LorentzSpec(w=[1.0, 0.0, 0.0], p=1.0), False, True),
    "orlicz_t2": (OrliczSpec(phi=power(2.0), dim=3), True, True),
    "orlicz_t": (OrliczSpec(phi=power(1.0), dim=3), True, False),
    "orlicz_flat": (OrliczSpec(phi=flat_then_linear(), dim=3), False, True),
    "patch_luxemburg": (OrliczSpec(phi=square_patch(0.6), dim=3), True, True),
    # linear growth past the patch: the Amemiya multiplier at e_1 is never attained
    "patch_amemiya": (OrliczSpec(phi=square_patch(0.6), flavor=NormFlavor.ORLICZ, dim=3), True, False),
    "t2_amemiya": (OrliczSpec(phi=power(2.0), flavor=NormFlavor.ORLICZ, dim=3), True, True),
}

VERDICT_CASES = {
    # name: (w, p, f, status, reason)
    "l2": ([1.0, 1.0, 1.0], 2.0, [1.0, 1.0, 1.0], HyperplaneStatus.POSSIBLY_ONE, None),
    "p_not_2": ([1.0, 0.8, 0.6], 3.0, [1.0, 1.0, 1.0], HyperplaneStatus.IMPOSSIBLE, "THM31_P_NOT_2"),
    "weight_not_1": ([1.0, 0.8, 0.6], 2.0, [1.0, 1.0, 1.0], HyperplaneStatus.IMPOSSIBLE, "THM31_WEIGHT_NOT_1"),
    "not_l2": ([1.0, 1.0, 1.0, 0.5], 2.0, [1.0, 1.0, 1.0, 0.0], HyperplaneStatus.IMPOSSIBLE, "COR32_NOT_L2"),
    "unequal_moduli": ([1.0, 0.8], 2.0, [1.0, 2.0], HyperplaneStatus.IMPOSSIBLE, "COR34_UNEQUAL_MODULI"),
    "equal_moduli": ([1.0, 0.8], 2.0, [1.0, -1.0], HyperplaneStatus.POSSIBLY_ONE, None),
}

PHI_CLASS_CASES = {
    "t3": (power(3.0), "SimilarTo(3,1)"),
    "t": (power(1.0), "SimilarTo(1,1)"),
    "square_patch": (square_patch(0.6), "SimilarTo(2,1)"),
    "shifted_square": (shifted_square(), "EquivalentTo(1)"),
    "flat_then_linear": (flat_then_linear(), "NotEquivalentToAnyPower"),
}

SUBSPACE_CASES = {
    # name: (phi, fs, status, reason, gamma)
    "pair": (shifted_square(), [[1.0, -1.0, 0.0, 0.0]], SubspaceStatus.COMPATIBLE, None, 1.0),
    "scaled_pair": (shifted_square(), [[1.0, 2.0, 0.0, 0.0]], SubspaceStatus.COMPATIBLE, None, 2.0),
    "wide_support": (shifted_square(), [[1.0, 1.0, 1.0, 0.0]], SubspaceStatus.INCOMPATIBLE, "THM41_SUPPORT_GT_2", None),
    "bad_scale": (shifted_square(), [[1.0, 2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 3.0, 0.0]], SubspaceStatus.INCOMPATIBLE, "THM41_SCALE_VIOLATION", None),
    "similar_t3": (power(3.0), [[1.0, 5.0, 0.0, 0.0]], SubspaceStatus.COMPATIBLE, None, None),
    "similar_t2": (square_patch(0.6), [[1.0, -1.0, 0.0, 0.0]], SubspaceStatus.NOT_APPLICABLE, "PHI_SIMILAR_T2", None),
    "not_positive": (flat_then_linear(), [[1.0, -1.0, 0.0, 0.0]], SubspaceStatus.NOT_APPLICABLE, "PHI_NOT_POSITIVE", None),
}

W3 = LorentzSpec(w=[1.0, 0.8, 0.6], p=2.0)


@pytest.mark.parametrize("name", sorted(PROPERTY_CASES))
def test_properties_agree_with_sampling(name):
    space, p_expected, q_expected = PROPERTY_CASES[name]
    assert has_property_P(space) is p_expected
    assert has_property_Q(space) is q_expected
    assert sampled_property_P(space) is p_expected
    assert sampled_property_Q(space) is q_expected


def test_witness_params_and_a1_witness():
    params = witness_params([3.0, 2.0, 1.0], 1.0 / 3.0, 0.1)
    assert params.eta == pytest.approx(2.0 / 3.0)
    assert params.delta_a == pytest.approx(0.5)
    assert params.eps1 == pytest.approx(0.5)
    x = witness_x([3.0, 2.0, 1.0], params, WitnessVariant.A1)
    np.testing.assert_allclose(x, [1.0, -0.6, -2.1])
    g = witness_functional(W3, [3.0, 2.0, 1.0], params)
    np.testing.assert_allclose(g, [0.8, -0.36, -2.1])
    np.testing.assert_allclose(g, canonical_functional(W3, x))
    assert is_norming_pair(W3, x, g)


def test_witness_outside_its_range():
    params = witness_params([3.0, 2.0, 1.0], 0.9, 0.1)
    with pytest.raises(ParamOutOfRange):
        witness_x([3.0, 2.0, 1.0], params, WitnessVariant.A1)
    with pytest.raises(ValidationError):
        WitnessParams(a=1.5, eps=0.0, eta=0.5, delta_a=0.1, eps1=0.1, eps_a=0.0)


@pytest.mark.parametrize("f", [[1.0, 1.0, 0.0], [1.0, 2.0, 3.0], [1.0, 0.0, 1.0]])
def test_witness_needs_sorted_support(f):
    with pytest.raises(PreconditionViolation):
        witness_params(f, 0.5, 0.0)


@pytest.mark.parametrize("name", sorted(VERDICT_CASES))
def test_lorentz_hyperplane_verdict(name):
    w, p, f, status, reason = VERDICT_CASES[name]
    verdict = lorentz_hyperplane_verdict(LorentzSpec(w=w, p=p), f)
    assert verdict.status is status
    assert verdict.reason == reason
    assert verdict.support == sum(1 for v in f if v)


def test_hyperplane_verdict_preconditions():
    with pytest.raises(PreconditionViolation):
        lorentz_hyperplane_verdict(LorentzSpec(w=[1.0, 0.5], p=1.0), [1.0, 1.0])
    with pytest.raises(PreconditionViolation):
        lorentz_hyperplane_verdict(LorentzSpec(w=[1.0, 0.0], p=2.0), [1.0, 1.0])
    with pytest.raises(PreconditionViolation):
        lorentz_hyperplane_verdict(W3, [0.0, 0.0, 0.0])


def test_refuter_finds_verified_witness():
    witness = refute_lorentz_hyperplane(W3, [1.0, 1.0, 1.0], [0.0, 1.0, 0.0], SearchBudget(8, 40))
    assert witness is not None
    assert witness.variant == "A3"
    assert witness.value < -1e-8
    assert witness.verified
    assert W3.norm(witness.x) == pytest.approx(1.0)


def test_refuter_on_possible_norm_one():
    l2 = LorentzSpec(w=[1.0, 1.0, 1.0], p=2.0)
    assert refute_lorentz_hyperplane(l2, [1.0, 1.0, 1.0], [1.0, 0.0, 0.0]) is None
    with pytest.raises(PreconditionViolation):
        refute_lorentz_hyperplane(W3, [1.0, 1.0, 1.0], [1.0, 1.0, 0.0])


@pytest.mark.parametrize("name", sorted(PHI_CLASS_CASES))
def test_classify_orlicz_phi(name):
    phi, label = PHI_CLASS_CASES[name]
    assert classify_orlicz_phi(phi).label() == label


def test_equivalent_class_kind():
    assert classify_orlicz_phi(shifted_square()).kind is PhiClassKind.EQUIVALENT


@pytest.mark.parametrize("name", sorted(SUBSPACE_CASES))
def test_orlicz_subspace_verdict(name):
    phi, fs, status, reason, gamma = SUBSPACE_CASES[name]
    verdict = orlicz_subspace_verdict(OrliczSpec(phi=phi, dim=len(fs[0])), fs)
    assert verdict.status is status
    assert verdict.reason == reason
    if gamma is None:
        assert verdict.gamma is None
    else:
        assert verdict.gamma == pytest.approx(gamma)


INVARIANCE_CASES = [
    (shifted_square(), [[1.0, -1.0, 0.0, 0.0, 0.0]]),
    (shifted_square(), [[1.0, 2.0, 0.0, 0.0, 0.0]]),
    (shifted_square(), [[1.0, 1.0, 1.0, 0.0, 0.0]]),
    (shifted_square(), [[1.0, 2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 3.0, 0.0]]),
    (shifted_square(), [[1.0, 4.0, 0.0, 0.0, 0.0], [0.0, 0.0, 2.0, 1.0, 0.0]]),
    (power(3.0), [[1.0, 5.0, 0.0, 0.0, 0.0]]),
]


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(range(len(INVARIANCE_CASES))),
    st.permutations(range(5)),
    st.lists(st.sampled_from([1.0, -1.0]), min_size=5, max_size=5),
    st.sampled_from([1.0, -1.0]),
)
def test_subspace_verdict_ignores_permutations_and_signs(index, order, signs, row_sign):
    phi, fs = INVARIANCE_CASES[index]
    space = OrliczSpec(phi=phi, dim=5)
    base = orlicz_subspace_verdict(space, fs)
    moved = row_sign * (np.asarray(fs) * np.asarray(signs))[:, list(order)]
    verdict = orlicz_subspace_verdict(space, moved)
    assert verdict.status is base.status
    assert verdict.reason == base.reason
    if base.gamma is None:
        assert verdict.gamma is None
    else:
        assert verdict.gamma == pytest.approx(base.gamma)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_positive_phi_is_comparable_to_a_power(seed):
    phi = random_orlicz_function(np.random.default_rng(seed))
    assert phi.is_positive()
    assert classify_orlicz_phi(phi).kind is not PhiClassKind.NOT_EQUIVALENT


def test_non_positive_phi_is_reported_before_any_modulus_check():
    space = OrliczSpec(phi=flat_then_linear(), dim=4)
    for fs in ([[1.0, 3.0, 0.0, 0.0]], [[1.0, 1.0, 1.0, 0.0]]):
        verdict = orlicz_subspace_verdict(space, fs)
        assert verdict.reason == "PHI_NOT_POSITIVE"
        assert verdict.phi_class == "NotEquivalentToAnyPower"


def test_subspace_verdict_without_basis_vector():
    verdict = orlicz_subspace_verdict(OrliczSpec(phi=shifted_square(), dim=3), [[1.0, -1.0, 1.0]])
    assert verdict.status is SubspaceStatus.NOT_APPLICABLE
    assert verdict.reason == "NO_BASIS_VECTOR"
    forced = orlicz_subspace_verdict(OrliczSpec(phi=shifted_square(), dim=3), [[1.0, -1.0, 1.0]], contains_basis_vector=True)
    assert forced.reason == "THM41_SUPPORT_GT_2"


def test_subspace_verdict_needs_room():
    with pytest.raises(PreconditionViolation):
        orlicz_subspace_verdict(OrliczSpec(phi=shifted_square(), dim=2), [[1.0, -1.0]])


def test_fit_geometric_scale():
    assert fit_geometric_scale([1.0, 2.0, 4.0]) == pytest.approx(2.0)
    assert fit_geometric_scale([4.0, 8.0]) == pytest.approx(2.0)
    assert fit_geometric_scale([0.5, 1.0]) == pytest.approx(2.0)
    assert fit_geometric_scale([1.0]) == 1.0
    assert fit_geometric_scale([2.0, 3.0]) is None


def test_basis_vector_bounds():
    assert basis_vectors_in_kernel([[1.0, 0.0, 1.0, 0.0]]) == [1, 3]
    assert within_basis_vector_bound([[1.0, 0.0, 1.0, 0.0]])
    assert not within_basis_vector_bound([[1.0, 1.0, 1.0, 0.0]])


def test_derivative_additivity_defect():
    assert derivative_additivity_defect(power(2.0), 1.0) == pytest.approx(0.0, abs=1e-12)
    assert derivative_additivity_defect(power(3.0), 1.0) > 1.0


def test_averaging_projection():
    l2 = LorentzSpec(w=[1.0, 1.0], p=2.0)
    pair = build_averaging_projection(l2, BlockSpec(blocks=[[0, 1]]))
    np.testing.assert_allclose(np.eye(2) - pair.complement(), [[0.5, 0.5], [0.5, 0.5]], atol=1e-12)
    single = build_averaging_projection(l2, BlockSpec(blocks=[[0]]))
    np.testing.assert_allclose(np.eye(2) - single.complement(), [[1.0, 0.0], [0.0, 0.0]], atol=1e-12)
    signed = build_averaging_projection(l2, BlockSpec(blocks=[[0, 1]], signs=[[1, -1]]))
    np.testing.assert_allclose(np.eye(2) - signed.complement(), [[0.5, -0.5], [-0.5, 0.5]], atol=1e-12)
    assert signed.biorthogonality_defect() < 1e-12


def test_block_spec_validation():
    with pytest.raises(ValidationError):
        BlockSpec(blocks=[[0, 1], [1, 2]])
    with pytest.raises(ValidationError):
        BlockSpec(blocks=[[0, 1]], signs=[[1]])
    with pytest.raises(ValidationError):
        BlockSpec(blocks=[[0, 1]], signs=[[1, 2]])
    with pytest.raises(PreconditionViolation):
        BlockSpec(blocks=[[0, 3]]).vectors(3)
    with pytest.raises(PreconditionViolation):
        build_averaging_projection(LorentzSpec(w=[1.0, 1.0], p=2.0), BlockSpec(blocks=[[0], [1]]))


def test_disjoint_span_conditions():
    flat_head = LorentzSpec(w=[1.0, 1.0, 1.0, 0.5], p=2.0)
    decreasing = LorentzSpec(w=[1.0, 0.8, 0.6, 0.4], p=2.0)
    spec = DisjointSpanSpec(xs=[[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])
    assert spec.sigma == 3
    assert disjoint_span_conditions(flat_head, spec) is DisjointCondition.COND_A
    equal_moduli = DisjointSpanSpec(xs=[[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 2.0, 0.0]])
    assert disjoint_span_conditions(decreasing, equal_moduli) is DisjointCondition.COND_B
    mixed = DisjointSpanSpec(xs=[[1.0, 2.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])
    assert disjoint_span_conditions(decreasing, mixed) is DisjointCondition.NEITHER
    with pytest.raises(ValidationError):
        DisjointSpanSpec(xs=[[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])


@pytest.mark.parametrize("p,holds", [(3.0, False), (2.0, True), (1.5, True)])
def test_l2_p_convexity(p, holds):
    check = p_convexity_sample_check(LorentzSpec(w=[1.0, 1.0, 1.0], p=2.0), p, trials=200)
    assert check.holds is holds
    if not holds:
        assert check.lhs > check.rhs
        assert check.violation is not None
