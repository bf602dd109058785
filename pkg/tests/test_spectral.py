import numpy as np
import pytest

from hdx.complex import build_from_top_faces, generate_complete_complex, generate_random_complex
from hdx.errors import (
    DegenerateStateSpaceError,
    LevelOutOfRangeError,
    NotReversibleError,
    PreconditionUnmetError,
)
from hdx.spectral import (
    cospectral_residual,
    measure_spectral_profile,
    poincare_check,
    second_eigenvalue,
    spectrum,
    symmetrization_residual,
    trickling_down_check,
    trickling_down_identities,
    trickling_down_propagate,
)
from hdx.walks import WalkOperator, down_up, local_walk


def walk(M, pi):
    M = np.asarray(M, float)
    faces = [(i,) for i in range(len(M))]
    return WalkOperator(1, 1, M, faces, faces, np.asarray(pi, float))


@pytest.mark.parametrize("m", [2, 3, 4, 7, 10])
def test_complete_graph_walk(m):
    K = (np.ones((m, m)) - np.eye(m)) / (m - 1)
    P = walk(K, np.full(m, 1 / m))
    assert second_eigenvalue(P) == pytest.approx(-1 / (m - 1), abs=1e-12)
    # closed-form spectrum: 1 once, -1/(m-1) with multiplicity m-1
    np.testing.assert_allclose(spectrum(P), [1.0] + [-1 / (m - 1)] * (m - 1), atol=1e-12)


def test_identity_and_rank_one():
    pi = np.array([0.2, 0.3, 0.5])
    assert second_eigenvalue(walk(np.eye(3), pi)) == pytest.approx(1.0)
    assert second_eigenvalue(walk(np.tile(pi, (3, 1)), pi)) == pytest.approx(0.0, abs=1e-14)


def test_rejects_bad_input():
    with pytest.raises(NotReversibleError):
        # a directed 3-cycle is stochastic with uniform stationary law but not reversible
        second_eigenvalue(walk(np.roll(np.eye(3), 1, axis=1), [1 / 3] * 3))
    with pytest.raises(DegenerateStateSpaceError):
        second_eigenvalue(walk([[1.0]], [1.0]))


def test_jacobi_and_lapack_agree(random_d3):
    for cx in random_d3:
        for k in range(1, 4):
            P = down_up(cx, k)
            np.testing.assert_allclose(spectrum(P), spectrum(P, "numpy"), atol=1e-12)
            assert symmetrization_residual(P) <= 1e-10


def test_profile_of_complete_complex(complete64):
    prof = measure_spectral_profile(complete64)
    np.testing.assert_allclose(prof.values, [-1 / 5, -1 / 4, -1 / 3], atol=1e-12)
    assert prof.clamped() == [0.0, 0.0, 0.0]


def test_d2_profile_is_single_entry():
    cx = generate_complete_complex(4, 2)
    prof = measure_spectral_profile(cx)
    assert len(prof) == 1
    assert prof[0] == pytest.approx(second_eigenvalue(local_walk(cx, ())))


def test_single_edge_link_contributes_minus_one():
    cx = build_from_top_faces(3, [((0, 1, 2), 1.0), ((0, 1, 3), 1.0)])
    prof = measure_spectral_profile(cx)
    # the links of 2 and 3 are single edges, whose local walk is a swap
    per_vertex = dict(prof.per_face[1])
    assert per_vertex[(2,)] == pytest.approx(-1.0)
    assert per_vertex[(3,)] == pytest.approx(-1.0)
    assert prof.degenerate == []


def test_triangle_matroid_profile(triangle_matroid):
    assert measure_spectral_profile(triangle_matroid).values[0] == pytest.approx(-0.5)


def test_cospectral(random_d3):
    for cx in random_d3:
        for k in range(cx.d):
            assert cospectral_residual(cx, k) <= 1e-10


def test_poincare(random_d3):
    P = down_up(random_d3[0], 2)
    eig_err, worst = poincare_check(P, rng=1, n_functions=200)
    assert eig_err <= 1e-10
    assert worst >= -1e-10


def test_propagate_examples():
    np.testing.assert_allclose(trickling_down_propagate(1 / 3, 3), [0.5, 1 / 3])
    assert trickling_down_propagate(0.0, 5) == [0.0] * 4
    with pytest.raises(PreconditionUnmetError):
        trickling_down_propagate(0.6, 3)


def test_propagate_iterates_the_one_step_map():
    gamma, d = 0.1, 6
    a = trickling_down_propagate(gamma, d)
    for j in range(d - 2):
        assert a[j] == pytest.approx(a[j + 1] / (1 - a[j + 1]), rel=1e-14)


def test_trickling_check_on_complete_complex(complete64):
    res = trickling_down_check(complete64, 2)
    assert res.gamma_measured == pytest.approx(-1 / 3)
    assert res.gamma_used == 0.0
    assert res.passed
    # with the raw negative gamma the bound gamma/(1-gamma) = -1/4 is attained exactly
    assert all(r.raw_status == "pass" for r in res.rows)
    assert max(r.lambda2 for r in res.rows) == pytest.approx(-0.25, abs=1e-12)
    with pytest.raises(LevelOutOfRangeError):
        trickling_down_check(complete64, 3)


def test_trickling_check_on_random_complexes():
    checked = 0
    for seed in range(40):
        cx = generate_random_complex(7, 3, np.random.default_rng(seed), density=0.6)
        try:
            res = trickling_down_check(cx, 1)
        except PreconditionUnmetError:
            continue
        assert res.passed
        checked += 1
    assert checked >= 10


def test_proof_identities(complete64, random_d3):
    for cx in [complete64, *random_d3]:
        r = trickling_down_identities(cx, rng=0, n_functions=50)
        assert r.diag_decomposition <= 1e-12
        assert r.operator_decomposition <= 1e-12
        assert r.row_identity <= 1e-12
        assert r.dirichlet_decomposition <= 1e-10
    with pytest.raises(LevelOutOfRangeError):
        trickling_down_identities(generate_complete_complex(4, 2))
