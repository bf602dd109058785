import numpy as np
import pytest

from hdx.complex import build_from_top_faces, generate_complete_complex, link
from hdx.errors import DimensionError, InvalidParameterError, LevelOutOfRangeError
from hdx.walks import (
    check_variance_decomposition,
    detailed_balance_residual,
    dirichlet_form,
    down_step,
    down_up,
    local_walk,
    local_walk_from_weights,
    project_down,
    row_sum_residual,
    stationarity_residual,
    up_down,
    up_step,
    variance,
    variance_down_identity,
    variance_up_identity,
)


def brute_down_up(cx, k):
    """RW^down_k by enumerating 'drop x uniformly, then add y with weight w(R+y)'."""
    faces = cx.faces[k]
    M = np.zeros((len(faces), len(faces)))
    for a, S in enumerate(faces):
        for x in S:
            R = tuple(e for e in S if e != x)
            for b, T in enumerate(faces):
                if set(R) <= set(T):
                    M[a, b] += cx.weight(T) / cx.weight(R) / k
    return M


def test_up_step_entries(random_d3):
    cx = random_d3[0]
    P = up_step(cx, 1)
    for a, S in enumerate(P.source_faces):
        for b, T in enumerate(P.target_faces):
            expect = cx.weight(T) / cx.weight(S) if set(S) <= set(T) else 0.0
            assert P.matrix[a, b] == pytest.approx(expect, abs=1e-15)
    with pytest.raises(LevelOutOfRangeError):
        up_step(cx, cx.d)


def test_down_step_examples():
    cx = generate_complete_complex(3, 2)
    P = down_step(cx, 2)
    row = P.matrix[P.source_faces.index((0, 1))]
    np.testing.assert_allclose(row[[P.target_faces.index((0,)), P.target_faces.index((1,))]],
                               [0.5, 0.5])
    np.testing.assert_allclose(down_step(cx, 1).matrix, np.ones((3, 1)))
    with pytest.raises(LevelOutOfRangeError):
        down_step(cx, 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_down_up_matches_enumeration(random_d3, k):
    for cx in random_d3:
        np.testing.assert_allclose(down_up(cx, k).matrix, brute_down_up(cx, k), atol=1e-14)


def test_operators_are_stochastic_and_reversible(random_d3):
    for cx in random_d3:
        for k in range(1, cx.d + 1):
            for P in (down_up(cx, k), up_down(cx, k - 1)):
                assert row_sum_residual(P) <= 1e-12
                assert detailed_balance_residual(P) <= 1e-12
                assert stationarity_residual(P) <= 1e-12


def test_cached_operator_is_read_only(complete53):
    with pytest.raises(ValueError):
        down_up(complete53, 2).matrix[0, 0] = 0.0


def test_local_walk_on_complete_complex_is_uniform_over_neighbours(complete53):
    G = local_walk(complete53, ())
    np.testing.assert_allclose(G.matrix, (np.ones((5, 5)) - np.eye(5)) / 4, atol=1e-15)


def test_local_walk_single_edge_swaps():
    cx = build_from_top_faces(2, [((3, 7), 2.5)])
    np.testing.assert_allclose(local_walk(cx, ()).matrix, [[0, 1], [1, 0]])


def test_local_walk_agrees_with_weight_formula(random_d3):
    for cx in random_d3:
        for S in cx.faces[1]:
            G = local_walk(cx, S)
            np.testing.assert_allclose(G.matrix, local_walk_from_weights(link(cx, S).complex),
                                       atol=1e-13)


def test_local_walk_level_limit(complete53):
    with pytest.raises(LevelOutOfRangeError):
        local_walk(complete53, (0, 1))


def test_project_down_trivial_cases(complete53, rng):
    f = rng.standard_normal(len(complete53.faces[3]))
    np.testing.assert_array_equal(project_down(complete53, f, 3, 3), f)
    for i in range(4):
        np.testing.assert_allclose(project_down(complete53, np.full_like(f, 2.5), 3, i), 2.5)
    with pytest.raises(InvalidParameterError):
        project_down(complete53, f, 3, 4)
    with pytest.raises(DimensionError):
        project_down(complete53, f[:-1], 3, 2)


def test_projection_is_conditional_expectation(random_d3, rng):
    cx = random_d3[1]
    f = rng.standard_normal(len(cx.faces[3]))
    g = project_down(cx, f, 3, 1)
    for a, (v,) in enumerate(cx.faces[1]):
        num = sum(cx.weight(T) * f[b] for b, T in enumerate(cx.faces[3]) if v in T)
        den = sum(cx.weight(T) for T in cx.faces[3] if v in T)
        assert g[a] == pytest.approx(num / den, rel=1e-12)


def test_dirichlet_and_variance_basics(complete53):
    P = down_up(complete53, 2)
    c = np.full(P.size, 3.0)
    assert dirichlet_form(P, c, c) == pytest.approx(0.0, abs=1e-14)
    assert variance([0.5, 0.5], [0.0, 1.0]) == 0.25
    assert variance([0.2, 0.8], [4.0, 4.0]) == 0.0
    with pytest.raises(DimensionError):
        dirichlet_form(P, c[:-1], c)
    with pytest.raises(DimensionError):
        variance([0.5, 0.5], [1.0])


@pytest.mark.parametrize("k", [1, 2, 3])
def test_variance_identities(random_d3, rng, k):
    for cx in random_d3:
        for _ in range(20):
            lhs, rhs = variance_down_identity(cx, k, rng.standard_normal(len(cx.faces[k])))
            assert abs(lhs - rhs) <= 1e-10 * abs(lhs)
            if len(cx.faces[k - 1]) < 2:
                continue  # a single state: both sides vanish
            g = rng.standard_normal(len(cx.faces[k - 1]))
            lhs, rhs = variance_up_identity(cx, k, g)
            assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_variance_decomposition(complete53, random_d3, rng):
    c = np.ones(len(complete53.faces[3]))
    assert check_variance_decomposition(complete53, 3, c) == 0.0
    for cx in [complete53, *random_d3]:
        for k in (2, 3):
            f = rng.standard_normal(len(cx.faces[k]))
            assert check_variance_decomposition(cx, k, f) <= 1e-10
