"""
Local spectral profiles and trickling down
==========================================

Each face S of co-dimension at least 2 has a local walk G_S on the vertices
of its link.  The spectral profile records, level by level, the worst second
eigenvalue of these walks.  If every vertex link is a good expander, so is
the 1-skeleton of the whole complex: lambda_2(G_empty) <= gamma / (1 - gamma).
"""
import numpy as np

from hdx import (
    generate_complete_complex,
    generate_random_complex,
    local_walk,
    measure_spectral_profile,
    second_eigenvalue,
    trickling_down_check,
)
from hdx.errors import PreconditionUnmetError
from hdx.spectral import trickling_down_identities

# %%
# Complete complexes
# ------------------
# Every link is again complete, so the local walks are walks on complete
# graphs K_m, whose second eigenvalue is -1/(m-1).
prof = measure_spectral_profile(generate_complete_complex(6, 4))
print("complete n=6 d=4 profile:", np.round(prof.values, 6))

# %%
# Random weighted complexes
# -------------------------
for seed in range(8):
    cx = generate_random_complex(7, 3, np.random.default_rng(seed), density=0.6)
    try:
        res = trickling_down_check(cx, 1)
    except PreconditionUnmetError as exc:
        print(f"seed {seed}: skipped ({exc})")
        continue
    lam0 = second_eigenvalue(local_walk(cx, ()))
    gamma = res.gamma_measured
    print(f"seed {seed}: gamma = {gamma:+.4f}, lambda2(G_empty) = {lam0:+.4f}, "
          f"bound = {res.rows[0].bound:+.4f}")

# %%
# Identities behind the argument
# ------------------------------
# The top-level walk is an average of the vertex-link walks, and so is its
# Dirichlet form.  Their residuals should be at rounding level.
cx = generate_random_complex(7, 3, np.random.default_rng(1), density=0.6)
print(trickling_down_identities(cx, rng=0, n_functions=100).as_dict())
