import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdx.complex import (
    build_from_top_faces,
    complex_from_dict,
    generate_complete_complex,
    generate_graphic_matroid_bases,
    generate_random_complex,
    instance_to_dict,
    level_distribution,
    level_distribution_brute_force,
    link,
    link_consistency_residual,
    load_instance,
    mixture_identity_residual,
    save_instance,
    weight_recursion_residual,
)
from hdx.errors import (
    DisconnectedGraphError,
    DuplicateFaceError,
    EmptyComplexError,
    InstanceFormatError,
    InvalidParameterError,
    LevelOutOfRangeError,
    NotAFaceError,
    PurityError,
)


def test_two_points_weights():
    cx = build_from_top_faces(1, [((1,), 1.0), ((2,), 1.0)])
    assert cx.weight(()) == 2.0
    assert cx.weight((1,)) == 1.0 and cx.weight((2,)) == 1.0


def test_triangle_boundary_weights_follow_cover_sums():
    cx = build_from_top_faces(2, [(e, 1.0) for e in itertools.combinations((1, 2, 3), 2)])
    # each vertex lies in two edges; the empty face collects w(v) over three vertices
    assert cx.weight((1,)) == 2.0
    assert cx.weight(()) == 6.0


def test_mixed_cardinalities_rejected():
    with pytest.raises(PurityError):
        build_from_top_faces(2, [((1, 2), 1.0), ((1, 2, 3), 1.0)])


def test_duplicate_and_empty_rejected():
    with pytest.raises(DuplicateFaceError):
        build_from_top_faces(2, [((1, 2), 1.0), ((2, 1), 3.0)])
    with pytest.raises(EmptyComplexError):
        build_from_top_faces(2, [])


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_nonpositive_or_nonfinite_weights_rejected(bad):
    with pytest.raises(Exception):
        build_from_top_faces(1, [((0,), 1.0), ((1,), bad)])


def test_level_distribution_examples():
    cx = generate_complete_complex(3, 2)
    np.testing.assert_allclose(level_distribution(cx, 1), [1 / 3] * 3)
    np.testing.assert_allclose(level_distribution(cx, 0), [1.0])
    with pytest.raises(LevelOutOfRangeError):
        level_distribution(cx, 3)


def test_top_level_is_normalized_input():
    cx = build_from_top_faces(2, [((0, 1), 1.0), ((1, 2), 3.0)])
    np.testing.assert_allclose(cx.distribution(2), [0.25, 0.75])


def test_distribution_is_read_only(complete53):
    with pytest.raises(ValueError):
        complete53.distribution(2)[0] = 1.0


def test_link_examples():
    cx = generate_complete_complex(4, 3)
    assert link(cx, ()).complex.faces == cx.faces
    lk = link(cx, (1,)).complex
    assert lk.d == 2
    assert lk.faces[2] == [(0, 2), (0, 3), (2, 3)]
    np.testing.assert_allclose(lk.distribution(2), [1 / 3] * 3)
    top = link(cx, (0, 1, 2)).complex
    assert top.d == 0 and top.faces[0] == [()]
    with pytest.raises(NotAFaceError):
        link(cx, (0, 9))


def test_complete_complex_counts():
    assert len(generate_complete_complex(3, 2).faces[2]) == 3
    assert len(generate_complete_complex(6, 3).faces[3]) == 20
    with pytest.raises(InvalidParameterError):
        generate_complete_complex(2, 3)


def _kirchhoff_count(n_vertices, edges):
    """Number of spanning trees by the matrix-tree theorem."""
    L = np.zeros((n_vertices, n_vertices))
    for u, v in edges:
        L[u, u] += 1
        L[v, v] += 1
        L[u, v] -= 1
        L[v, u] -= 1
    return round(np.linalg.det(L[1:, 1:]))


@pytest.mark.parametrize("edges", [
    [(0, 1), (1, 2), (0, 2)],
    [(0, 1), (1, 2)],
    [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
    list(itertools.combinations(range(5), 2)),
])
def test_spanning_tree_count_matches_matrix_tree_theorem(edges):
    cx = generate_graphic_matroid_bases(edges)
    n = 1 + max(max(e) for e in edges)
    assert cx.d == n - 1
    assert len(cx.faces[cx.d]) == _kirchhoff_count(n, edges)


def test_disconnected_graph_rejected():
    with pytest.raises(DisconnectedGraphError):
        generate_graphic_matroid_bases([(0, 1), (2, 3)])


def test_marginals_match_brute_force(random_d3):
    for cx in random_d3:
        for k in range(cx.d + 1):
            np.testing.assert_allclose(level_distribution(cx, k),
                                       level_distribution_brute_force(cx, k), atol=1e-14)


def test_residual_checks_vanish(random_d3):
    for cx in random_d3:
        assert weight_recursion_residual(cx) <= 1e-12
        for k in range(cx.d + 1):
            for S in cx.faces[k][:5]:
                assert link_consistency_residual(cx, S) <= 1e-12
        for k in range(2, cx.d + 1):
            assert mixture_identity_residual(cx, k) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 7), d=st.integers(1, 3), seed=st.integers(0, 10_000))
def test_random_complexes_are_pure_and_consistent(n, d, seed):
    if d > n:
        return
    cx = generate_random_complex(n, d, np.random.default_rng(seed))
    assert all(len(f) == d for f in cx.faces[d])
    for k in range(d):
        # downward closure: every facet of a level-(k+1) face is present
        for face in cx.faces[k + 1]:
            for x in face:
                assert cx.has_face(tuple(y for y in face if y != x))
    assert weight_recursion_residual(cx) <= 1e-12
    assert abs(cx.distribution(k).sum() - 1.0) <= 1e-12


def test_json_round_trip(tmp_path, random_d3):
    cx = random_d3[0]
    path = tmp_path / "inst.json"
    save_instance(cx, path)
    back = load_instance(path)
    assert back.faces == cx.faces
    for k in range(cx.d + 1):
        np.testing.assert_array_equal(back.weights[k], cx.weights[k])
    assert instance_to_dict(back) == instance_to_dict(cx)


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"d": 2, "top_faces": [')
    with pytest.raises(InstanceFormatError, match=r"bad\.json:1:24"):
        load_instance(path)


def test_bad_weight_in_dict_names_the_entry():
    data = instance_to_dict(generate_complete_complex(3, 2))
    data["top_faces"][1]["weight"] = -2.0
    with pytest.raises(InstanceFormatError, match="1"):
        complex_from_dict(data)


def test_missing_key_in_dict():
    with pytest.raises(InstanceFormatError):
        complex_from_dict({"d": 2})
