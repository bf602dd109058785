"""
From a spectral profile to bounds on the down-up walk
=====================================================

Given a profile (a_0, ..., a_{d-2}) the recursion v_0 = s_0,
v_k = s_k - (s_k - 1) / v_{k-1} with s_k = 2 / (1 + a_k) yields
lambda_2(RW^down_k) <= 1 - 1/v_{k-2}.  The product bound
1 - (1/k) prod (1 - a_i) is never better on admissible profiles, and the two
agree exactly when the profile is produced by trickling down.
"""
import numpy as np

from hdx import compare_bounds, solve_profile
from hdx.contraction import sample_admissible_profile, trickling_profile

# %%
# A hand-picked profile
# ---------------------
a = [0.1, 0.2, 0.3]
for row in compare_bounds(a):
    print(f"k={row.k}: recursion {row.ours:.6f}   product {row.al:.6f}   gap {row.gap:.2e}")

# %%
# Trickled profiles make both bounds coincide
# -------------------------------------------
# With gamma = 1/d at the top the bound becomes 1 - 1/k^2.
d = 6
sol = solve_profile(trickling_profile(1 / d, d))
for k in range(2, d + 1):
    print(f"k={k}: {sol.our_bound(k):.12f}  vs  1 - 1/k^2 = {1 - 1 / k**2:.12f}")

# %%
# How much better is the recursion on random admissible profiles?
# ---------------------------------------------------------------
rng = np.random.default_rng(0)
gaps = [compare_bounds(sample_admissible_profile(rng, 8))[-1].gap for _ in range(2000)]
print(f"top-level gap over 2000 profiles: min {min(gaps):.2e}, median {np.median(gaps):.3f}, "
      f"max {max(gaps):.3f}")
