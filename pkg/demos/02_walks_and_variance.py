"""
Up, down and down-up walks
==========================

The down-up walk on level k drops a uniformly random element of the current
face and then adds a new element with probability proportional to the weight
of the resulting face.  Its Dirichlet form measures how much variance one
step of projection to level k - 1 destroys.
"""
import numpy as np

from hdx import down_step, down_up, generate_random_complex, up_step
from hdx.walks import (
    check_variance_decomposition,
    detailed_balance_residual,
    dirichlet_form,
    project_down,
    variance,
)

rng = np.random.default_rng(3)
cx = generate_random_complex(7, 3, rng, density=0.5)
print(cx)

# %%
# Composing half steps
# --------------------
# RW^down_2 is the product of the down step from level 2 and the up step from level 1.
k = 2
P = down_up(cx, k)
manual = down_step(cx, k).matrix @ up_step(cx, k - 1).matrix
print("composition gap:", np.max(np.abs(P.matrix - manual)))
print("rows sum to one:", np.allclose(P.matrix.sum(axis=1), 1.0))
print("reversible w.r.t. pi_2:", detailed_balance_residual(P) < 1e-12)

# %%
# The Dirichlet form equals the variance lost by projecting one level down
# ------------------------------------------------------------------------
f = rng.standard_normal(P.size)
lost = variance(cx.distribution(k), f) - variance(cx.distribution(k - 1),
                                                  project_down(cx, f, k, k - 1))
print(f"E(f, f) = {dirichlet_form(P, f, f):.12f}")
print(f"Var_2 f - Var_1 f^(1) = {lost:.12f}")

# %%
# Splitting variance over links
# -----------------------------
# Variance at level k is the average of variances inside the links of
# level-(k-2) faces plus the variance of the projection to level k - 2.
f3 = rng.standard_normal(len(cx.faces[3]))
print("decomposition residual:", check_variance_decomposition(cx, 3, f3))
