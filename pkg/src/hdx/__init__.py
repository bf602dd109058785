"""Down-up walks on weighted simplicial complexes.

Spectral profiles, local-to-global contraction bounds for variance and
relative entropy, and numerical checks of the identities behind them.
"""
__version__ = "0.1.0"

from .complex import (
    Face,
    Link,
    PureSimplicialComplex,
    build_from_top_faces,
    generate_complete_complex,
    generate_graphic_matroid_bases,
    generate_random_complex,
    level_distribution,
    link,
    load_instance,
)
from .contraction import (
    al_bound,
    compare_bounds,
    factors_from_profile,
    is_admissible,
    our_bound,
    solve_profile,
    solve_recursion,
    trickling_profile_bound,
)
from .entropy import (
    estimate_entropy_contraction,
    estimate_global_ratio,
    estimate_mlsi,
    kl_divergence,
    relative_entropy,
    verify_main_ent,
)
from .spectral import (
    measure_spectral_profile,
    second_eigenvalue,
    trickling_down_check,
    trickling_down_propagate,
)
from .walks import (
    WalkOperator,
    dirichlet_form,
    down_step,
    down_up,
    local_walk,
    project_down,
    up_down,
    up_step,
    variance,
)
