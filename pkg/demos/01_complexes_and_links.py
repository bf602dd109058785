"""
Weighted complexes, level distributions and links
=================================================

A pure complex is given by its top faces and their weights.  Every lower
face gets the total weight of the faces covering it, and each level carries
the distribution proportional to those weights.  This script builds a few
complexes and looks at what the library computes for them.
"""
import numpy as np

from hdx import (
    build_from_top_faces,
    generate_complete_complex,
    generate_graphic_matroid_bases,
    link,
)
from hdx.complex import level_distribution_brute_force

# %%
# A small hand-built complex
# --------------------------
# Two triangles sharing the edge {0, 1}, one of them three times heavier.
cx = build_from_top_faces(3, [((0, 1, 2), 1.0), ((0, 1, 3), 3.0)])
print(cx)
for k in range(cx.d + 1):
    print(f"level {k}:", {S: round(float(p), 4) for S, p in zip(cx.faces[k], cx.distribution(k))})

# The shared edge collects weight from both triangles.
print("w({0,1}) =", cx.weight((0, 1)))

# %%
# Marginals agree with summing over top faces directly
# ----------------------------------------------------
# pi_k(S) is the probability that a random top face, drawn by weight, contains S
# after forgetting a uniformly random set of d - k of its elements.
for k in range(cx.d + 1):
    gap = np.max(np.abs(cx.distribution(k) - level_distribution_brute_force(cx, k)))
    print(f"level {k}: brute-force gap {gap:.1e}")

# %%
# Links
# -----
# The link of a face keeps the original element labels.  Linking the complete
# complex on 4 elements at the vertex 1 gives the complete graph on {0, 2, 3}.
K = generate_complete_complex(4, 3)
lk = link(K, (1,))
print("link of {1}:", lk.complex.faces[2], lk.complex.distribution(2))

# %%
# Graphic matroids
# ----------------
# The bases of the graphic matroid of a graph are its spanning trees; the
# elements are edge indices.  The 4-cycle with one chord has 8 spanning trees.
edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]
M = generate_graphic_matroid_bases(edges)
print(f"{len(M.faces[M.d])} spanning trees, each with {M.d} edges")
for tree in M.faces[M.d][:3]:
    print("  ", [edges[i] for i in tree])
