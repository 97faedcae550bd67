import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import R2, schmidt_pair
from oracles import binary_entropy_mp, entanglement_by_eigh, entropy_by_eigh, partial_trace_loop
from superent import ensembles
from superent.entanglement import (
    BoundReport,
    NotBiorthogonal,
    NotOrthogonal,
    binary_entropy,
    check_biorthogonal_equality,
    check_general_bound,
    check_mixing_inequalities,
    check_orthogonal_bound,
    classify,
    entanglement,
    fourier_branches,
    gain,
    is_biorthogonal,
    is_orthogonal,
    multi_term_bound,
    ratio,
    schmidt_rank,
    schmidt_spectrum,
    upsilon,
    von_neumann_entropy,
)
from superent.families import family_high_fidelity, family_nonorthogonal, family_orthogonal_d, family_qubit_ratio
from superent.states import (
    DensityMatrix,
    NearZeroNorm,
    StateError,
    StateVector,
    Superposition,
    basis_state,
    make_rng,
    mix,
    normalize,
    random_state,
    reduced_density,
    superpose,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# ---------------------------------------------------------------- Schmidt data


def test_schmidt_spectrum_bell(bell):
    np.testing.assert_allclose(schmidt_spectrum(bell).coeffs, [R2, R2], atol=1e-15)


def test_schmidt_spectrum_product(ket00):
    np.testing.assert_allclose(schmidt_spectrum(ket00).coeffs, [1, 0], atol=1e-15)


def test_schmidt_spectrum_matches_reduction_eigenvalues():
    psi = random_state(4, 3, 21)
    w = schmidt_spectrum(psi).weights
    eig = np.sort(np.linalg.eigvalsh(partial_trace_loop(psi.amps, 4, 3, "B")))[::-1]
    np.testing.assert_allclose(w, eig, atol=1e-10)
    assert len(w) == 3
    assert np.all(np.diff(schmidt_spectrum(psi).coeffs) <= 0)


def test_schmidt_rank(ket00, bell):
    assert schmidt_rank(ket00) == 1
    assert schmidt_rank(bell) == 2
    # sqrt(1-eps)|00> plus d correlated terms: d + 1 nonzero coefficients
    assert schmidt_rank(family_high_fidelity(0.1, 5).superposition.psi) == 6


# ---------------------------------------------------------------- entropies


def test_von_neumann_entropy_basic():
    assert von_neumann_entropy(DensityMatrix(2, np.diag([0.5, 0.5]))) == pytest.approx(1.0, abs=1e-15)
    assert von_neumann_entropy(DensityMatrix(3, np.diag([1.0, 0, 0]))) == 0.0


def test_von_neumann_entropy_high_fidelity_spectrum():
    eps, d = 0.2, 4
    rho = DensityMatrix(d + 1, np.diag([1 - eps] + [eps / d] * d))
    assert von_neumann_entropy(rho) == pytest.approx(1.1219280948873623479, abs=1e-14)


def test_von_neumann_entropy_errors():
    with pytest.raises(StateError):
        von_neumann_entropy(DensityMatrix(2, np.diag([0.6, 0.6])))
    with pytest.raises(StateError):
        von_neumann_entropy(DensityMatrix(2, np.diag([1.1, -0.1])))


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_von_neumann_entropy_unitary_invariance(seed):
    rng = make_rng(seed)
    rho = ensembles.random_density_matrix(4, rng)
    u = ensembles.random_unitary(4, rng)
    rot = u @ rho.entries @ u.conj().T
    rot = DensityMatrix(4, 0.5 * (rot + rot.conj().T))
    assert von_neumann_entropy(rot) == pytest.approx(von_neumann_entropy(rho), abs=1e-9)


def test_entanglement_golden(bell, phi_plus, phi_minus):
    assert entanglement(bell) == pytest.approx(1.0, abs=1e-12)
    g, _ = superpose(Superposition(R2, R2, phi_plus, phi_minus))
    assert entanglement(normalize(g)) == pytest.approx(0.0, abs=1e-12)


def test_entanglement_orthogonal_family_term():
    s = family_orthogonal_d(17).superposition
    assert entanglement(s.phi) == pytest.approx(3.0, abs=1e-12)


@given(seeds, st.integers(1, 5), st.integers(1, 6))
@settings(max_examples=80, deadline=None)
def test_entanglement_range_and_party_symmetry(seed, da, db):
    psi = random_state(da, db, seed)
    e = entanglement(psi)
    assert 0.0 <= e <= math.log2(min(da, db)) + 1e-12
    assert e == pytest.approx(entanglement_by_eigh(psi.amps, da, db, "A"), abs=1e-9)
    assert e == pytest.approx(entanglement_by_eigh(psi.amps, da, db, "B"), abs=1e-9)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_entanglement_local_unitary_invariance(seed):
    rng = make_rng(seed)
    psi = random_state(3, 4, rng)
    u, v = ensembles.random_unitary(3, rng), ensembles.random_unitary(4, rng)
    rotated = StateVector(3, 4, np.kron(u, v) @ psi.amps)
    assert entanglement(rotated) == pytest.approx(entanglement(psi), abs=1e-9)


def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    assert binary_entropy(0.25) == pytest.approx(0.81127812445913286391, abs=1e-15)
    for x in (0.01, 0.3, 0.77):
        assert binary_entropy(x) == pytest.approx(binary_entropy_mp(x), abs=1e-14)
        assert binary_entropy(x) == pytest.approx(binary_entropy(1 - x), abs=1e-15)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


# ---------------------------------------------------------------- upsilon, gain, ratio


def test_upsilon_product_pair(ket00, ket11):
    assert upsilon(ket00, ket11, R2) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        upsilon(ket00, ket11, 1.5)


def test_upsilon_equals_superposition_entanglement_for_biorthogonal():
    phi, psi = schmidt_pair([0.6, 0.8], [R2, R2])
    s = Superposition(0.3, math.sqrt(0.91), phi, psi)
    assert upsilon(phi, psi, 0.3) == pytest.approx(entanglement(normalize(superpose(s)[0])), abs=1e-12)


def test_upsilon_orthogonal_family():
    s = family_orthogonal_d(17).superposition
    # E(phi') = E(psi') = 3 at d = 17 and h2(1/2) = 1
    assert upsilon(s.phi, s.psi, s.alpha) == pytest.approx(4.0, abs=1e-12)


def test_gain_examples(ket00, ket11):
    assert gain(Superposition(R2, R2, ket00, ket11)) == pytest.approx(1.0, abs=1e-12)
    assert gain(Superposition(1, 0, ket00, ket11)) == 0.0
    assert gain(family_orthogonal_d(18).superposition) == pytest.approx(1.0437314206251697041, abs=1e-12)


def test_gain_raises_on_cancellation(bell):
    with pytest.raises(NearZeroNorm):
        gain(Superposition(R2, -R2, bell, bell))


def test_ratio_examples(ket00, ket11):
    phi, psi = schmidt_pair([0.6, 0.8], [1.0])
    assert ratio(Superposition(0.6, 0.8, phi, psi)) == pytest.approx(1.0, abs=1e-12)
    # upsilon = 0: alpha = 1 with a product phi
    assert ratio(Superposition(1, 0, ket00, ket11)) is None


def test_ratio_qubit_family_approaches_two():
    values = [ratio(family_qubit_ratio(0.5, y).superposition) for y in (1e-2, 1e-3, 1e-4)]
    assert values[0] < values[1] < values[2] < 2.0


def test_ratio_nonorthogonal_family_approaches_log_d():
    r = ratio(family_nonorthogonal(1e-6, 8).superposition)
    assert r == pytest.approx(3.0, rel=1e-3)


# ---------------------------------------------------------------- predicates


def test_is_orthogonal():
    phi, psi = schmidt_pair([R2, R2], [1.0])
    assert is_orthogonal(phi, psi)
    s = family_orthogonal_d(9).superposition
    assert is_orthogonal(s.phi, s.psi)
    s = family_nonorthogonal(0.5, 4).superposition
    assert not is_orthogonal(s.phi, s.psi)
    with pytest.raises(StateError):
        is_orthogonal(phi, random_state(2, 2, 0))


def test_is_biorthogonal(phi_plus, phi_minus, ket00, ket11):
    phi, psi = schmidt_pair([R2, R2], [1.0])
    assert is_biorthogonal(phi, psi)
    assert not is_biorthogonal(phi_plus, phi_minus)
    assert is_orthogonal(phi_plus, phi_minus)
    assert is_biorthogonal(ket00, ket11)


def test_classify(phi_plus, phi_minus, ket00, ket11):
    assert classify(ket00, ket11) == "biorthogonal"
    assert classify(phi_plus, phi_minus) == "orthogonal"
    assert classify(phi_plus, ket00) == "general"


# ---------------------------------------------------------------- bound checks


def test_biorthogonal_equality_example():
    phi, psi = schmidt_pair([R2, R2], [1.0])
    r = check_biorthogonal_equality(Superposition(0.6, 0.8, phi, psi))
    assert r.satisfied
    assert r.e_superposition == pytest.approx(1.3026831892554922451, abs=1e-10)
    assert r.upsilon == pytest.approx(1.3026831892554922451, abs=1e-10)
    assert r.details["equality_gap"] <= 1e-10


def test_biorthogonal_equality_alpha_one():
    phi, psi = schmidt_pair([0.6, 0.8], [1.0])
    r = check_biorthogonal_equality(Superposition(1, 0, phi, psi))
    assert r.h2_alpha == 0.0
    assert r.e_superposition == pytest.approx(r.e_phi, abs=1e-12)


def test_biorthogonal_equality_rejects(phi_plus, phi_minus):
    with pytest.raises(NotBiorthogonal):
        check_biorthogonal_equality(Superposition(R2, R2, phi_plus, phi_minus))


@pytest.mark.parametrize("seed", range(25))
def test_biorthogonal_equality_random(seed):
    r = check_biorthogonal_equality(ensembles.random_biorthogonal_pair(6, 3, seed))
    assert r.satisfied and r.details["gain_bound_satisfied"]
    assert r.ratio == pytest.approx(1.0, abs=1e-8)


def test_mixing_orthogonal_support_is_tight():
    rho, sigma = ensembles.orthogonal_support_pair(4, 3)
    r = check_mixing_inequalities([0.3, 0.7], [rho, sigma])
    assert r.satisfied
    assert r.details["upper_gap"] == pytest.approx(0.0, abs=1e-9)


def test_mixing_equal_states_lower_tight():
    rho = ensembles.random_density_matrix(4, 1)
    r = check_mixing_inequalities([0.4, 0.6], [rho, rho])
    assert r.satisfied
    assert r.details["lower_gap"] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(25))
def test_mixing_random(seed):
    rng = make_rng(seed)
    rhos = [ensembles.random_density_matrix(4, rng, rank=int(rng.integers(1, 5))) for _ in range(2)]
    w = rng.uniform()
    assert check_mixing_inequalities([w, 1 - w], rhos).satisfied


def test_orthogonal_bound_family():
    r = check_orthogonal_bound(family_orthogonal_d(17).superposition)
    assert r.e_superposition == pytest.approx(4.0, abs=1e-12)
    assert r.bound_rhs == pytest.approx(8.0, abs=1e-12)
    assert r.satisfied and r.details["two_branch_satisfied"]


def test_orthogonal_bound_alpha_one():
    phi, psi = ensembles.random_orthonormal_states(2, 3, 3, 4)
    r = check_orthogonal_bound(Superposition(1, 0, phi, psi))
    assert r.satisfied
    assert r.bound_rhs == pytest.approx(2 * entanglement(phi), abs=1e-12)


def test_orthogonal_bound_rejects():
    s = family_nonorthogonal(0.5, 3).superposition
    with pytest.raises(NotOrthogonal):
        check_orthogonal_bound(s)


@given(seeds, st.integers(0, 15))
@settings(max_examples=30, deadline=None)
def test_two_branch_bound_over_phase_grid(seed, k):
    s = ensembles.random_orthogonal_pair(3, 3, seed)
    theta = 2 * math.pi * k / 16
    rotated = Superposition(s.alpha, s.beta * complex(math.cos(theta), math.sin(theta)), s.phi, s.psi)
    r = check_orthogonal_bound(rotated)
    assert r.details["two_branch_satisfied"] and r.satisfied


def test_general_bound_reduces_on_orthogonal_pairs():
    s = ensembles.random_orthogonal_pair(3, 3, 8)
    g = check_general_bound(s)
    o = check_orthogonal_bound(s)
    assert g.norm_sum == pytest.approx(1.0, abs=1e-12)
    assert g.norm_diff == pytest.approx(1.0, abs=1e-12)
    assert g.satisfied == o.satisfied
    assert g.details["product_lhs"] == pytest.approx(o.e_superposition, abs=1e-12)


def test_general_bound_nonorthogonal_family():
    r = check_general_bound(family_nonorthogonal(1e-4, 8).superposition)
    assert r.satisfied
    assert r.ratio == pytest.approx(3.0, rel=1e-3)
    assert r.ratio <= r.details["ratio_rhs"]
    # the same inequality weighted by ||alpha phi - beta psi||^2 fails here
    assert not r.details["minus_form_satisfied"]


def test_general_bound_vanishing_superposition(bell):
    r = check_general_bound(Superposition(R2, -R2, bell, bell))
    assert r.satisfied and r.details["near_zero_norm"]
    assert r.ratio is None and r.e_superposition is None


@pytest.mark.parametrize("seed", range(25))
def test_general_bound_random(seed):
    assert check_general_bound(ensembles.random_pair(4, 4, seed)).satisfied


def test_report_internal_consistency():
    s = ensembles.random_pair(3, 3, 2)
    r = check_general_bound(s)
    a2 = abs(s.alpha) ** 2
    assert r.upsilon == pytest.approx(a2 * r.e_phi + (1 - a2) * r.e_psi + r.h2_alpha, abs=1e-10)
    assert r.gain == pytest.approx(r.e_superposition - (a2 * r.e_phi + (1 - a2) * r.e_psi), abs=1e-10)


def test_report_json_round_trip():
    r = check_orthogonal_bound(ensembles.random_orthogonal_pair(3, 3, 2))
    back = BoundReport.from_dict(json.loads(json.dumps(r.to_dict())))
    assert back == r


# ---------------------------------------------------------------- k terms


def test_multi_term_two_terms_matches_orthogonal_check():
    s = ensembles.random_orthogonal_pair(3, 3, 12)
    m = multi_term_bound([s.alpha, s.beta], [s.phi, s.psi])
    o = check_orthogonal_bound(s)
    assert m.satisfied == o.satisfied
    assert m.e_superposition == pytest.approx(o.e_superposition, abs=1e-12)
    assert m.bound_rhs == pytest.approx(o.bound_rhs, abs=1e-12)
    assert m.details["branch_entropies"][1] == pytest.approx(o.details["e_difference"], abs=1e-12)


def test_multi_term_biorthogonal_equality():
    blocks = [[R2, R2], [0.6, 0.8], [1.0]]
    d = 5
    states, lo = [], 0
    for blk in blocks:
        m = np.zeros((d, d))
        for j, x in enumerate(blk):
            m[lo + j, lo + j] = x
        lo += len(blk)
        states.append(StateVector(d, d, m.ravel()))
    c = np.array([0.5, 0.5j, R2])
    r = multi_term_bound(c, states)
    w = np.abs(c) ** 2
    e = [entanglement_by_eigh(s.amps, d, d) for s in states]
    expected = float(np.dot(w, e) - np.sum(w * np.log2(w)))
    assert r.e_superposition == pytest.approx(expected, abs=1e-9)
    assert r.satisfied


def test_multi_term_fourier_average_matches_mixture():
    rng = make_rng(77)
    states = ensembles.random_orthonormal_states(4, 3, 3, rng)
    c = ensembles.random_coefficients(4, rng)
    branches = fourier_branches(c, states)
    avg = sum(partial_trace_loop(b.amps, 3, 3, "B") for b in branches) / 4
    rho = mix(np.abs(c) ** 2, [reduced_density(s, "B") for s in states])
    np.testing.assert_allclose(avg, rho.entries, atol=1e-10)
    assert multi_term_bound(c, states).details["fourier_deviation"] <= 1e-10


def test_multi_term_rejects_overlapping_states():
    phi = random_state(2, 2, 0)
    with pytest.raises(NotOrthogonal):
        multi_term_bound([R2, R2], [phi, phi])
    with pytest.raises(StateError):
        multi_term_bound([0.5, 0.5], ensembles.random_orthonormal_states(2, 2, 2, 0))


def test_bell_basis_entropies_by_oracle():
    # two routes to the same reduction for a basis state and a Bell state
    for psi in (basis_state(2, 2, 1, 0), StateVector(2, 2, [R2, 0, 0, R2])):
        assert entanglement(psi) == pytest.approx(entropy_by_eigh(partial_trace_loop(psi.amps, 2, 2, "A")), abs=1e-12)
