import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tomoewv import (
    PovmGroup,
    ProbabilityOperator,
    Scheme,
    ftt_scheme,
    pauli_six_scheme,
    sic_povm_qubit,
    two_waveplate_operator,
    waveplate_unitary,
)
from tomoewv.errors import DegenerateSchemeError, InvalidOperatorError
from tomoewv.povm import (
    FTT_OFFSET,
    bloch_vector,
    polarization_projector,
    random_projector_scheme,
    rotate_scheme,
    tetrahedron_vectors,
    two_waveplate_scheme,
    waveplate_stack_operator,
)

H = polarization_projector("H")


def rodrigues(axis, angle, r):
    """Rotate ``r`` about unit ``axis`` by ``angle`` (right-handed)."""
    axis = np.asarray(axis, dtype=float)
    r = np.asarray(r, dtype=float)
    return (
        r * np.cos(angle)
        + np.cross(axis, r) * np.sin(angle)
        + axis * np.dot(axis, r) * (1 - np.cos(angle))
    )


def all_groups(scheme):
    return list(scheme.groups)


def test_pauli_six_structure():
    s = pauli_six_scheme(7.0)
    assert s.n_operators == 6 and s.total_counts == 21.0
    labels = ["H", "V", "D", "A", "R", "L"]
    for op, lab in zip(s.operators, labels):
        np.testing.assert_allclose(op.matrix, 7.0 * polarization_projector(lab), atol=1e-14)
        assert op.alpha == pytest.approx(7.0)


def test_sic_overlaps():
    ncal = 3.0
    ops = sic_povm_qubit(ncal).operator_matrices()
    gram = np.einsum("iab,jba->ij", ops, ops).real
    expected = np.full((4, 4), ncal**2 / 12)
    np.fill_diagonal(expected, ncal**2 / 4)
    np.testing.assert_allclose(gram, expected, rtol=1e-13)
    np.testing.assert_allclose(np.einsum("iaa->i", ops).real, ncal / 2, rtol=1e-14)


def test_tetrahedron_orientation():
    t = tetrahedron_vectors()
    np.testing.assert_allclose(t[0], [0, 0, 1])
    assert t[1][0] > 0 and abs(t[1][1]) < 1e-15
    np.testing.assert_allclose(t.sum(axis=0), 0, atol=1e-15)
    dots = t @ t.T
    np.testing.assert_allclose(dots[~np.eye(4, dtype=bool)], -1 / 3, atol=1e-15)


@pytest.mark.parametrize("scheme_fn", [pauli_six_scheme, sic_povm_qubit])
@pytest.mark.parametrize("ncal", [0, -1.0])
def test_nonpositive_ncal_rejected(scheme_fn, ncal):
    with pytest.raises(InvalidOperatorError):
        scheme_fn(ncal)


def test_waveplate_unitary_examples():
    np.testing.assert_allclose(waveplate_unitary(0.0, 0.9), np.eye(2), atol=1e-15)
    u = waveplate_unitary(np.pi, 0.0)
    np.testing.assert_allclose(u, -1j * np.diag([1, -1]), atol=1e-15)
    np.testing.assert_allclose(u @ H @ u.conj().T, H, atol=1e-15)


def test_waveplate_bloch_direction():
    beta, phi = np.pi / 2, np.pi / 6
    u = waveplate_unitary(beta, phi)
    # U |H><H| U^dag rotates +z by +beta about (sin phi, 0, cos phi)
    expected = rodrigues([np.sin(phi), 0, np.cos(phi)], beta, [0, 0, 1])
    np.testing.assert_allclose(expected, [np.sqrt(3) / 4, -0.5, 0.75], atol=1e-15)
    np.testing.assert_allclose(bloch_vector(u @ H @ u.conj().T), expected, atol=1e-12)
    # the measurement operator uses U^dag |H><H| U, i.e. the inverse rotation
    np.testing.assert_allclose(
        bloch_vector(u.conj().T @ H @ u), rodrigues([np.sin(phi), 0, np.cos(phi)], -beta, [0, 0, 1]),
        atol=1e-12,
    )


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 2 * np.pi), st.floats(0.0, 2 * np.pi))
def test_waveplate_unitarity_and_figure_eight(beta, phi):
    u = waveplate_unitary(beta, phi)
    assert np.abs(u @ u.conj().T - np.eye(2)).max() < 1e-12
    s, c = np.sin(phi), np.cos(phi)
    e = u.conj().T @ H @ u
    figure_eight = [s * c * (1 - np.cos(beta)), s * np.sin(beta), np.cos(beta) + c * c * (1 - np.cos(beta))]
    np.testing.assert_allclose(bloch_vector(e), figure_eight, atol=1e-12)


def test_ftt_structure():
    s = ftt_scheme(1.1, 6, 5.0)
    assert len(s.groups) == 6 and s.n_operators == 12 and s.total_counts == 30.0
    np.testing.assert_allclose(s.alphas, 5.0)


def test_ftt_angle_set_matches_pi_over_six_grid():
    from tomoewv.povm import ftt_angles

    got = np.sort(np.mod(ftt_angles(6), 2 * np.pi))
    want = np.sort(np.mod(np.pi / 6 + np.arange(6) * np.pi / 3, 2 * np.pi))
    np.testing.assert_allclose(got, want, atol=1e-14)
    assert FTT_OFFSET == pytest.approx(7 * np.pi / 6)


@pytest.mark.parametrize("beta", [0.0, np.pi, 2 * np.pi, -np.pi])
def test_ftt_degenerate_retardance(beta):
    with pytest.raises(DegenerateSchemeError):
        ftt_scheme(beta, 6, 1.0)


def test_ftt_needs_three_settings():
    with pytest.raises(DegenerateSchemeError):
        ftt_scheme(1.0, 2, 1.0)


def test_two_waveplate_fixed_orientation_is_identity():
    for beta in (0.3, 1.2, 2.9):
        op = two_waveplate_operator(beta, 0.0, 0.0, "H", 4.0)
        np.testing.assert_allclose(op.matrix, 4.0 * H, atol=1e-14)
        assert op.alpha == 4.0


def test_two_waveplate_reference_setting_is_valid_pvm():
    beta, p = 3 * np.pi / 8, 7 * np.pi / 10
    eh = two_waveplate_operator(beta, p, p, "H", 2.0)
    ev = two_waveplate_operator(beta, p, p, "V", 2.0)
    np.testing.assert_allclose(eh.matrix + ev.matrix, 2.0 * np.eye(2), atol=1e-14)
    # rank-1 scaled projector: E^2 = ncal E
    np.testing.assert_allclose(eh.matrix @ eh.matrix, 2.0 * eh.matrix, atol=1e-13)
    # two successive inverse rotations of +z
    r = rodrigues([np.sin(p), 0, np.cos(p)], -beta, [0, 0, 1])
    r = rodrigues([np.sin(p), 0, np.cos(p)], -beta, r)
    np.testing.assert_allclose(bloch_vector(eh.matrix), r, atol=1e-12)


def test_half_and_quarter_wave_plates_reach_d_and_r():
    from scipy.optimize import minimize

    def best_overlap(target):
        f = lambda x: 1 - np.trace(
            waveplate_stack_operator([(np.pi, x[0]), (np.pi / 2, x[1])], "H", 1.0).matrix @ target
        ).real
        runs = [minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15})
                for x0 in np.random.default_rng(1).uniform(0, 2 * np.pi, (20, 2))]
        return min(r.fun for r in runs)

    assert best_overlap(polarization_projector("D")) < 1e-9
    assert best_overlap(polarization_projector("R")) < 1e-9


def test_every_generated_group_is_complete_and_psd(rng):
    schemes = [pauli_six_scheme(3.0), sic_povm_qubit(3.0), ftt_scheme(0.4, 7, 3.0),
               two_waveplate_scheme(1.0, [(0, 0), (0.3, 1.2), (2.0, 0.1)], 3.0),
               random_projector_scheme(3, 4, 3.0, seed=3)]
    for s in schemes:
        for g in s.groups:
            total = sum(op.matrix for op in g.operators)
            assert np.abs(total - g.total_counts * np.eye(s.dimension)).max() < 1e-10
            for op in g.operators:
                assert np.linalg.eigvalsh(op.matrix).min() >= -1e-10


def test_operator_validation():
    with pytest.raises(InvalidOperatorError):
        ProbabilityOperator(np.diag([1.0, -0.5]), 0.5)
    with pytest.raises(InvalidOperatorError):
        ProbabilityOperator(np.eye(2), 3.0)
    with pytest.raises(InvalidOperatorError):
        PovmGroup((ProbabilityOperator.from_matrix(H),), 1.0)


def test_rotate_scheme_preserves_overlaps(rng):
    from scipy.stats import unitary_group

    s = sic_povm_qubit(1.0)
    w = unitary_group.rvs(2, random_state=rng)
    r = rotate_scheme(s, w)
    a, b = s.operator_matrices(), r.operator_matrices()
    np.testing.assert_allclose(
        np.einsum("iab,jba->ij", a, a), np.einsum("iab,jba->ij", b, b), atol=1e-14
    )


def test_json_round_trip():
    s = ftt_scheme(0.7 * np.pi, 6, 2.5)
    doc = json.loads(s.to_json())
    assert doc["dimension"] == 2 and len(doc["groups"]) == 6
    assert set(doc["groups"][0]["operators"][0]) == {"re", "im", "alpha"}
    back = Scheme.from_json(s.to_json())
    np.testing.assert_array_equal(back.operator_matrices(), s.operator_matrices())
    assert back.total_counts == s.total_counts


def test_json_rejects_malformed_documents():
    with pytest.raises(InvalidOperatorError):
        Scheme.from_dict({"dimension": 2})
    bad = pauli_six_scheme(1.0).to_dict()
    bad["groups"][0]["operators"][0]["re"] = [[1, 0], [0, 1]]
    with pytest.raises(InvalidOperatorError):
        Scheme.from_dict(bad)
