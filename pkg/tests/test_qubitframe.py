import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from probframe.errors import GuardExceeded, InconsistentProbabilities, NegativityError, QubitIndexError, ShapeError
from probframe.frame import forward_map, rank_of_projector_span
from probframe.matcore import validate_density
from probframe.oracle import random_density
from probframe.qubitframe import (
    PAULI,
    PauliParameterTensor,
    ProbabilityTensor,
    is_product,
    marginals,
    marginals_from_probabilities,
    p_from_tilde,
    pauli_string,
    product_tensor,
    reduced_tensor,
    rho_from_tilde,
    six_state_index,
    six_state_kets,
    six_state_set,
    six_state_slot,
    tilde_from_p,
    tilde_from_rho,
)

BELL_NONZERO = {(0, 0): 1.0, (1, 1): 1.0, (2, 2): -1.0, (3, 3): 1.0}


def single(*values):
    return PauliParameterTensor(m=1, values=values)


def test_pauli_string_examples():
    np.testing.assert_array_equal(pauli_string((0,)), np.eye(2))
    np.testing.assert_array_equal(pauli_string((3, 3)), np.diag([1, -1, -1, 1]))


@pytest.mark.parametrize("m", [1, 2])
def test_pauli_strings_are_tr_orthogonal(m):
    strings = list(itertools.product(range(4), repeat=m))
    for a in strings:
        for b in strings:
            value = np.trace(pauli_string(a) @ pauli_string(b))
            assert abs(value - (2**m if a == b else 0)) < 1e-12


def test_pauli_string_needs_an_index():
    with pytest.raises(ShapeError):
        pauli_string(())


def test_six_state_index_layout():
    assert [six_state_slot(f) for f in range(6)] == [(1, 0), (1, 1), (2, 0), (2, 1), (3, 0), (3, 1)]
    assert six_state_index(3, 1) == 5


def test_six_state_kets_are_eigenvectors():
    for flat, ket in enumerate(six_state_kets()):
        mu, theta = six_state_slot(flat)
        assert np.linalg.norm(PAULI[mu] @ ket - (-1) ** theta * ket) < 1e-12


def test_six_state_sets():
    assert len(six_state_set(2)) == 36
    three = six_state_set(3)
    assert len(three) == 216
    assert rank_of_projector_span(three) == 64


def test_tilde_from_rho_examples(bell_rho):
    np.testing.assert_allclose(tilde_from_rho(np.diag([1.0, 0.0])).values, [1, 0, 0, 1])
    mixed = tilde_from_rho(np.eye(4) / 4)
    np.testing.assert_allclose(mixed.values, np.eye(16)[0], atol=1e-15)
    bell = tilde_from_rho(bell_rho).as_tensor()
    expected = np.zeros((4, 4))
    for index, value in BELL_NONZERO.items():
        expected[index] = value
    np.testing.assert_allclose(bell, expected, atol=1e-12)


def test_tilde_from_rho_rejects_non_power_of_two():
    with pytest.raises(ShapeError):
        tilde_from_rho(np.eye(3) / 3)


def test_rho_from_tilde_examples():
    np.testing.assert_allclose(rho_from_tilde(single(1, 0, 0, 0)), np.eye(2) / 2)
    np.testing.assert_allclose(rho_from_tilde(single(1, 0, 0, 1)), np.diag([1, 0]))


def test_rho_from_tilde_does_not_enforce_positivity():
    rho = rho_from_tilde(single(1, 0, 0, 2))
    assert np.trace(rho) == pytest.approx(1.0)
    with pytest.raises(NegativityError):
        validate_density(rho)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_rho_tilde_round_trips(m, rng):
    for _ in range(10):
        rho = np.asarray(random_density(2**m, rng))
        t = tilde_from_rho(rho)
        np.testing.assert_allclose(rho_from_tilde(t), rho, atol=1e-12)
        np.testing.assert_allclose(tilde_from_rho(rho_from_tilde(t)).values, t.values, atol=1e-12)


def test_tensor_rejects_wrong_leading_entry():
    with pytest.raises(ShapeError):
        PauliParameterTensor(m=1, values=[0.5, 0, 0, 0])
    with pytest.raises(ShapeError):
        PauliParameterTensor(m=2, values=[1, 0, 0, 0])


def test_p_from_tilde_single_qubit():
    p = p_from_tilde(single(1, 0, 0, 1))
    np.testing.assert_allclose(p.values, [0.5, 0.5, 0.5, 0.5, 1.0, 0.0])


def test_p_from_tilde_bell(bell_rho):
    p = p_from_tilde(tilde_from_rho(bell_rho)).as_tensor()
    np.testing.assert_allclose(p[4:6, 4:6], [[0.5, 0.0], [0.0, 0.5]], atol=1e-12)


def test_p_from_tilde_factorizes_for_products():
    a, b = single(1, 0, 0, 1), single(1, 1, 0, 0)
    joint = p_from_tilde(product_tensor([a, b])).values
    np.testing.assert_allclose(joint, np.outer(p_from_tilde(a).values, p_from_tilde(b).values).ravel(), atol=1e-15)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_p_from_tilde_matches_forward_map(m, rng):
    pset = six_state_set(m)
    for _ in range(10):
        rho = np.asarray(random_density(2**m, rng))
        np.testing.assert_allclose(p_from_tilde(tilde_from_rho(rho)).values, forward_map(pset, rho), atol=1e-10)


def test_p_from_tilde_guards_dense_size():
    with pytest.raises(GuardExceeded):
        p_from_tilde(PauliParameterTensor(m=7, values=np.eye(4**7)[0]))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 3))
def test_tilde_from_p_round_trip_both_policies(seed, m):
    rng = np.random.default_rng(seed)
    t = tilde_from_rho(random_density(2**m, rng))
    p = p_from_tilde(t)
    np.testing.assert_allclose(p.group_sums(), 1.0, atol=1e-9)
    canonical = tilde_from_p(p, "canonical_z")
    average = tilde_from_p(p, "average")
    np.testing.assert_allclose(canonical.values, t.values, atol=1e-10)
    np.testing.assert_allclose(average.values, canonical.values, atol=1e-10)


def test_tilde_from_p_bell_zz(bell_rho):
    p = p_from_tilde(tilde_from_rho(bell_rho))
    t = tilde_from_p(p)
    zz = p.as_tensor()[4:6, 4:6]
    assert t[3, 3] == pytest.approx(zz[0, 0] - zz[0, 1] - zz[1, 0] + zz[1, 1])
    assert t[3, 3] == pytest.approx(1.0)
    assert t[0, 0] == 1.0


def test_tilde_from_p_reports_worst_group():
    values = np.full(36, 0.25)
    values[2 * 6 + 2] += 0.1
    with pytest.raises(InconsistentProbabilities) as info:
        tilde_from_p(ProbabilityTensor(m=2, values=values))
    assert info.value.axes == (2, 2)
    assert info.value.total == pytest.approx(1.1)


def test_tilde_from_p_unknown_policy():
    p = p_from_tilde(single(1, 0, 0, 0))
    with pytest.raises(ValueError):
        tilde_from_p(p, "median")


def test_marginals_bell(bell_rho):
    table = marginals(tilde_from_rho(bell_rho))
    np.testing.assert_allclose(table.probabilities, 0.5, atol=1e-12)
    np.testing.assert_allclose(table.parameters[:, 0], 1.0)


def test_marginals_product_of_eigenstates():
    table = marginals(product_tensor([single(1, 0, 0, 1), single(1, 1, 0, 0)]))
    assert table.probabilities[0, 2, 0] == pytest.approx(1.0)
    assert table.probabilities[1, 0, 0] == pytest.approx(1.0)
    np.testing.assert_allclose(table.probabilities.sum(axis=2), 1.0)


def test_marginals_agree_with_every_partner_axis(rng):
    t = tilde_from_rho(random_density(4, rng))
    table = marginals(t)
    p = p_from_tilde(t).as_tensor()
    for mu in range(3):
        for theta in range(2):
            for partner in range(3):
                row = p[2 * mu + theta, 2 * partner] + p[2 * mu + theta, 2 * partner + 1]
                assert row == pytest.approx(table.probabilities[0, mu, theta], abs=1e-10)


@pytest.mark.parametrize("policy", ["canonical_z", "average"])
def test_marginals_from_probabilities(policy, rng):
    t = tilde_from_rho(random_density(8, rng))
    table = marginals(t)
    p = p_from_tilde(t)
    for k in range(3):
        np.testing.assert_allclose(marginals_from_probabilities(p, k, policy), table.probabilities[k], atol=1e-10)


def test_reduced_tensor(bell_rho, rng):
    np.testing.assert_allclose(reduced_tensor(tilde_from_rho(bell_rho), [0]).values, [1, 0, 0, 0], atol=1e-12)
    a = tilde_from_rho(random_density(2, rng))
    b = tilde_from_rho(random_density(2, rng))
    joint = product_tensor([a, b])
    np.testing.assert_allclose(reduced_tensor(joint, [1]).values, b.values, atol=1e-12)
    np.testing.assert_allclose(reduced_tensor(joint, [1, 0]).values, product_tensor([b, a]).values, atol=1e-12)
    with pytest.raises(QubitIndexError):
        reduced_tensor(joint, [0, 0])


def test_product_tensor_examples():
    mixed = product_tensor([single(1, 0, 0, 0)] * 3)
    np.testing.assert_array_equal(mixed.values, np.eye(64)[0])
    zero = product_tensor([single(1, 0, 0, 1)] * 2)
    assert zero[3, 3] == zero[3, 0] == zero[0, 3] == 1.0


def test_product_tensor_matches_tensor_product(rng):
    for _ in range(50):
        r1 = np.asarray(random_density(2, rng))
        r2 = np.asarray(random_density(2, rng))
        joint = tilde_from_rho(np.kron(r1, r2))
        parts = product_tensor([tilde_from_rho(r1), tilde_from_rho(r2)])
        assert np.max(np.abs(joint.values - parts.values)) < 1e-12


def test_is_product_recovers_factors(rng):
    parts = [tilde_from_rho(random_density(2, rng)) for _ in range(3)]
    t = product_tensor(parts)
    for cut in (1, 2):
        result = is_product(t, cut, tol=1e-10)
        assert result.product
        left, right = result.factors
        assert left.m == cut and right.m == 3 - cut
        np.testing.assert_allclose(product_tensor_of(left, right), t.values, atol=1e-10)


def product_tensor_of(left, right):
    return np.multiply.outer(left.values, right.values).ravel()


def test_is_product_rejects_bell(bell_rho):
    result = is_product(tilde_from_rho(bell_rho), 1)
    assert not result.product
    assert result.factors is None
    assert result.second_singular_value == pytest.approx(1.0)


def test_is_product_tolerance_on_nearly_product(bell_rho):
    product_rho = np.kron(np.diag([1.0, 0.0]), np.full((2, 2), 0.5))
    t = tilde_from_rho(0.99 * product_rho + 0.01 * bell_rho)
    assert not is_product(t, 1, tol=1e-6).product
    assert is_product(t, 1, tol=0.1).product


def test_is_product_cut_range(bell_rho):
    with pytest.raises(QubitIndexError):
        is_product(tilde_from_rho(bell_rho), 2)
