"""
Entropy contraction, estimated numerically
==========================================

The entropy analogue of the spectral story replaces variance with relative
entropy.  Local contraction factors are infima over positive functions, so
they are estimated by multi-start gradient descent on f = exp(g).  Every
estimate overshoots the true infimum or hits it; none is a certificate.
"""
import math

from hdx import generate_complete_complex, link
from hdx.entropy import (
    contraction_ratio,
    estimate_entropy_contraction,
    grid_ratio_oracle,
    verify_main_ent,
)
from hdx.walks import up_step

# %%
# A three-state link, where brute force is possible
# -------------------------------------------------
# The link of a vertex in the complete complex on 4 elements is a triangle.
# Its contraction factor is attained in the limit where f concentrates on one
# edge, which gives log 3 / log 1.5.
lk = link(generate_complete_complex(4, 3), (0,)).complex
est = estimate_entropy_contraction(lk, restarts=16)
oracle = grid_ratio_oracle(contraction_ratio(up_step(lk, 1).matrix, lk.distribution(2),
                                             lk.distribution(1)))
print(f"optimizer {est.value:.12f}, grid oracle {oracle:.12f}, "
      f"closed form {math.log(3) / math.log(1.5):.12f}")

# %%
# Local estimates against the global ratio
# ----------------------------------------
# Feed the worst local estimate per level into the same recursion used for
# variance and compare with a direct estimate of the global ratio.
cx = generate_complete_complex(5, 3)
for k in (2, 3):
    r = verify_main_ent(cx, k, restarts=16)
    print(f"k={k}: local factors {[round(s, 6) for s in r.local_factors]}, "
          f"v-hat {r.v_hat:.6f}, global {r.global_ratio:.6f}, margin {r.margin:+.1e}")
    print(f"      mLSI estimate {r.mlsi:.6f} >= {r.mlsi_bound:.6f}")
