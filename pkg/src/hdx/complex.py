"""Weighted pure simplicial complexes, their level distributions and links.

A complex is stored level by level.  ``faces[k]`` is the lexicographically
sorted list of size-``k`` faces (tuples of increasing ints) and
``weights[k]`` is the aligned array of recursive weights, so that

    w(S) = sum of w(T) over T covering S,   |S| < d,

with the top level holding the (unnormalised) input weights.  The level
distribution pi_k is ``weights[k] / weights[k].sum()``.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DisconnectedGraphError,
    DuplicateFaceError,
    EmptyComplexError,
    InstanceFormatError,
    InstanceTooLargeError,
    InvalidParameterError,
    LevelOutOfRangeError,
    NotAFaceError,
    PurityError,
)

Face = tuple[int, ...]

MAX_LEVEL_FACES = 100_000


def as_face(elements) -> Face:
    face = tuple(sorted(int(e) for e in elements))
    if len(set(face)) != len(face):
        raise InvalidParameterError(f"face {list(elements)} repeats an element")
    return face


@dataclass(frozen=True, eq=False)
class PureSimplicialComplex:
    ground_set_size: int
    d: int
    faces: tuple[list[Face], ...]
    weights: tuple[np.ndarray, ...]
    _index: tuple[dict[Face, int], ...] = field(repr=False)
    # memo for derived objects (operators, links); contents are never mutated
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dimension(self) -> int:
        return self.d

    def level_size(self, k: int) -> int:
        self._check_level(k)
        return len(self.faces[k])

    def face_counts(self) -> list[int]:
        return [len(level) for level in self.faces]

    def index_of(self, face) -> int:
        face = as_face(face)
        k = len(face)
        if k > self.d or face not in self._index[k]:
            raise NotAFaceError(f"{list(face)} is not a face of the complex")
        return self._index[k][face]

    def has_face(self, face) -> bool:
        face = as_face(face)
        return len(face) <= self.d and face in self._index[len(face)]

    def weight(self, face) -> float:
        face = as_face(face)
        return float(self.weights[len(face)][self.index_of(face)])

    def distribution(self, k: int) -> np.ndarray:
        """pi_k as an array aligned with ``faces[k]``."""
        self._check_level(k)
        key = ("pi", k)
        if key not in self._cache:
            pi = self.weights[k] / self.weights[k].sum()
            pi.flags.writeable = False
            self._cache[key] = pi
        return self._cache[key]

    def top_faces(self) -> list[tuple[Face, float]]:
        return list(zip(self.faces[self.d], self.weights[self.d].tolist()))

    def _check_level(self, k: int) -> None:
        if not 0 <= k <= self.d:
            raise LevelOutOfRangeError(f"level {k} outside 0..{self.d}")

    def __repr__(self) -> str:
        return (f"PureSimplicialComplex(n={self.ground_set_size}, d={self.d}, "
                f"faces={self.face_counts()})")


@dataclass(frozen=True)
class Link:
    base_face: Face
    complex: PureSimplicialComplex


def build_from_top_faces(d, top_faces, ground_set_size=None,
                         max_level_faces=MAX_LEVEL_FACES) -> PureSimplicialComplex:
    """Build a pure complex from its maximal faces and their positive weights.

    Lower levels are enumerated top-down: each level-(k+1) face passes its
    weight to each of its k+1 facets, so only faces of the support appear.
    """
    d = int(d)
    if d < 0:
        raise InvalidParameterError("dimension must be nonnegative")
    top_faces = list(top_faces)
    if not top_faces:
        raise EmptyComplexError("no top faces given")

    top: dict[Face, float] = {}
    for elements, weight in top_faces:
        face = as_face(elements)
        if len(face) != d:
            raise PurityError(f"face {list(face)} has cardinality {len(face)}, expected {d}")
        weight = float(weight)
        if not math.isfinite(weight) or weight <= 0:
            raise InvalidParameterError(f"face {list(face)} has invalid weight {weight}")
        if face in top:
            raise DuplicateFaceError(f"face {list(face)} given twice")
        if face and face[0] < 0:
            raise InvalidParameterError(f"face {list(face)} has a negative element")
        top[face] = weight

    max_elem = max((f[-1] for f in top if f), default=-1)
    if ground_set_size is None:
        ground_set_size = max_elem + 1
    elif max_elem >= ground_set_size:
        raise InvalidParameterError(
            f"element {max_elem} outside ground set of size {ground_set_size}")
    if len(top) > max_level_faces:
        raise InstanceTooLargeError(f"{len(top)} top faces exceed {max_level_faces}")

    levels: list[dict[Face, float]] = [dict() for _ in range(d + 1)]
    levels[d] = top
    for k in range(d - 1, -1, -1):
        acc: dict[Face, float] = defaultdict(float)
        for face, wt in levels[k + 1].items():
            for i in range(k + 1):
                acc[face[:i] + face[i + 1:]] += wt
        if len(acc) > max_level_faces:
            raise InstanceTooLargeError(f"level {k} has {len(acc)} faces > {max_level_faces}")
        levels[k] = acc

    faces = tuple(sorted(level) for level in levels)
    weights = tuple(np.array([levels[k][f] for f in faces[k]], dtype=float)
                    for k in range(d + 1))
    index = tuple({f: i for i, f in enumerate(fs)} for fs in faces)
    return PureSimplicialComplex(int(ground_set_size), d, faces, weights, index)


def level_distribution(cx: PureSimplicialComplex, k: int) -> np.ndarray:
    if not 0 <= k <= cx.d:
        raise LevelOutOfRangeError(f"level {k} outside 0..{cx.d}")
    return cx.distribution(k)


def level_distribution_brute_force(cx: PureSimplicialComplex, k: int) -> np.ndarray:
    """pi_k by summing pi_d over all top faces containing each level-k face."""
    if not 0 <= k <= cx.d:
        raise LevelOutOfRangeError(f"level {k} outside 0..{cx.d}")
    pi_d = cx.distribution(cx.d)
    out = np.zeros(len(cx.faces[k]))
    for j, face in enumerate(cx.faces[k]):
        fs = set(face)
        out[j] = sum(p for top, p in zip(cx.faces[cx.d], pi_d) if fs.issubset(top))
    return out / out.sum()


def link(cx: PureSimplicialComplex, S) -> Link:
    """The link of ``S``: faces T disjoint from S with S | T a face.

    Elements keep their original labels; weights satisfy w_S(T) = w(S | T).
    """
    S = as_face(S)
    if not cx.has_face(S):
        raise NotAFaceError(f"{list(S)} is not a face of the complex")
    key = ("link", S)
    if key in cx._cache:
        return cx._cache[key]
    base = set(S)
    tops = [(tuple(e for e in T if e not in base), w)
            for T, w in cx.top_faces() if base.issubset(T)]
    sub = build_from_top_faces(cx.d - len(S), tops, ground_set_size=cx.ground_set_size)
    cx._cache[key] = Link(S, sub)
    return cx._cache[key]


def generate_complete_complex(n: int, d: int) -> PureSimplicialComplex:
    if d < 1 or d > n:
        raise InvalidParameterError(f"need 1 <= d <= n, got n={n}, d={d}")
    return build_from_top_faces(d, ((c, 1.0) for c in itertools.combinations(range(n), d)),
                                ground_set_size=n)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def generate_graphic_matroid_bases(edge_list) -> PureSimplicialComplex:
    """Complex whose top faces are the spanning trees of a multigraph.

    Ground-set element ``i`` is the i-th edge of ``edge_list``.
    """
    edges = [tuple(e) for e in edge_list]
    vertices = sorted({v for e in edges for v in e})
    if len(vertices) < 2:
        raise InvalidParameterError("graph needs at least 2 vertices")
    uf = _UnionFind(vertices)
    for u, v in edges:
        uf.union(u, v)
    if len({uf.find(v) for v in vertices}) > 1:
        raise DisconnectedGraphError("graph is not connected")

    r = len(vertices) - 1
    trees = []
    for subset in itertools.combinations(range(len(edges)), r):
        uf = _UnionFind(vertices)
        if all(uf.union(*edges[i]) for i in subset):
            trees.append((subset, 1.0))
    return build_from_top_faces(r, trees, ground_set_size=len(edges))


def generate_random_complex(n: int, d: int, rng, density=0.5,
                            weight_range=(0.2, 5.0)) -> PureSimplicialComplex:
    """Random weighted complex: each d-subset of range(n) kept with prob ``density``."""
    if d < 1 or d > n:
        raise InvalidParameterError(f"need 1 <= d <= n, got n={n}, d={d}")
    rng = np.random.default_rng(rng)
    combos = list(itertools.combinations(range(n), d))
    keep = rng.random(len(combos)) < density
    if not keep.any():
        keep[rng.integers(len(combos))] = True
    lo, hi = weight_range
    weights = rng.uniform(lo, hi, size=len(combos))
    return build_from_top_faces(d, [(c, w) for c, w, k in zip(combos, weights, keep) if k],
                                ground_set_size=n)


# -- consistency checks ------------------------------------------------------

def weight_recursion_residual(cx: PureSimplicialComplex) -> float:
    """Largest relative error of w(S) = sum of covering weights, over all S."""
    worst = 0.0
    for k in range(cx.d):
        acc = np.zeros(len(cx.faces[k]))
        idx = cx._index[k]
        for T, w in zip(cx.faces[k + 1], cx.weights[k + 1]):
            for i in range(k + 1):
                acc[idx[T[:i] + T[i + 1:]]] += w
        worst = max(worst, float(np.max(np.abs(acc - cx.weights[k]) / cx.weights[k])))
    return worst


def link_consistency_residual(cx: PureSimplicialComplex, S) -> float:
    """Check pi_{S,k}(T) * pi_|S|(S) is proportional to pi_{|S|+k}(S | T) for each k.

    Returns the largest relative spread of the per-level ratio.
    """
    lk = link(cx, S)
    s = len(lk.base_face)
    pi_s = cx.distribution(s)[cx.index_of(lk.base_face)]
    worst = 0.0
    for k in range(lk.complex.d + 1):
        pi_link = lk.complex.distribution(k)
        pi_glob = cx.distribution(s + k)
        ratios = np.array([pi_link[j] * pi_s / pi_glob[cx.index_of(T + lk.base_face)]
                           for j, T in enumerate(lk.complex.faces[k])])
        worst = max(worst, float((ratios.max() - ratios.min()) / ratios.max()))
    return worst


def mixture_identity_residual(cx: PureSimplicialComplex, k: int) -> float:
    """max_I |pi_k(I) - sum_{S in I, |S|=k-2} pi_{k-2}(S) pi_{S,2}(I - S)| / pi_k(I)."""
    if not 2 <= k <= cx.d:
        raise LevelOutOfRangeError(f"mixture identity needs 2 <= k <= {cx.d}")
    pi_k = cx.distribution(k)
    pi_base = cx.distribution(k - 2)
    rhs = np.zeros_like(pi_k)
    for j, S in enumerate(cx.faces[k - 2]):
        lk = link(cx, S).complex
        pi_s2 = lk.distribution(2)
        for t, T in enumerate(lk.faces[2]):
            rhs[cx.index_of(S + T)] += pi_base[j] * pi_s2[t]
    return float(np.max(np.abs(pi_k - rhs) / pi_k))


# -- JSON instance format -----------------------------------------------------

def instance_to_dict(cx: PureSimplicialComplex) -> dict:
    return {
        "d": cx.d,
        "ground_set_size": cx.ground_set_size,
        "top_faces": [{"elements": list(f), "weight": w} for f, w in cx.top_faces()],
    }


def complex_from_dict(data, source="<dict>") -> PureSimplicialComplex:
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{source}: top-level value must be an object")
    for key in ("d", "ground_set_size", "top_faces"):
        if key not in data:
            raise InstanceFormatError(f"{source}: missing key {key!r}")
    d, n = data["d"], data["ground_set_size"]
    if not isinstance(d, int) or not isinstance(n, int) or isinstance(d, bool):
        raise InstanceFormatError(f"{source}: 'd' and 'ground_set_size' must be integers")
    tops = []
    for i, entry in enumerate(data["top_faces"]):
        try:
            elements = entry["elements"]
            weight = entry["weight"]
        except (KeyError, TypeError):
            raise InstanceFormatError(f"{source}: top_faces[{i}] needs 'elements' and 'weight'")
        if not isinstance(weight, (int, float)) or isinstance(weight, bool) \
                or not math.isfinite(weight) or weight <= 0:
            raise InstanceFormatError(f"{source}: top_faces[{i}] weight {weight!r} "
                                      "must be finite and positive")
        if any(not isinstance(e, int) or e < 0 or e >= n for e in elements):
            raise InstanceFormatError(f"{source}: top_faces[{i}] elements {elements} "
                                      f"must be integers in [0, {n})")
        tops.append((elements, weight))
    try:
        return build_from_top_faces(d, tops, ground_set_size=n)
    except (PurityError, DuplicateFaceError, EmptyComplexError) as exc:
        raise type(exc)(f"{source}: {exc}") from None


def load_instance(path) -> PureSimplicialComplex:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return complex_from_dict(data, source=str(path))


def save_instance(cx: PureSimplicialComplex, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(cx), indent=1))
