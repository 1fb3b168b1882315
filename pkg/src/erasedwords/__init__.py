"""Simulation and exact computation for erased-word dynamics over finite
alphabets: subsequence kernels, sorted-draw laws, transport distances, and
innovation relabeling with deterministic reconstruction."""

from .innovations import (
    DualTrajectory,
    UniformFactorization,
    bayes_letter_map,
    block_sort_permutation,
    curve_anchor_data,
    relabel_rank,
    simulate_dual_trajectory,
    uniform_factorization,
    word_from_rank_tail,
    word_from_sorted_uniforms,
)
from .kernels import (
    WordDistribution,
    chapman_kolmogorov_deviation,
    count_embeddings,
    erase_chain,
    sample_subsequence,
    subsequence_density,
    subsequence_law,
)
from .measures import (
    DirectingMeasure,
    FiniteMeasure2D,
    empirical_word_law,
    marginal_word_law,
    position_sample,
    sample_word,
    sampled_marginal_measure,
    word_measure,
)
from .orders import (
    OrderQuadruple,
    insertion_ranks_from_permutations,
    permutations_from_insertion_ranks,
    prefix_permutations,
    rank_sequence,
    recover_position,
    remaining_slots,
    simulate_quadruple,
)
from .process import (
    Trajectory,
    density_trace,
    empirical_directing_measure,
    erased_letters,
    marginal_gap_diagnostics,
    simulate_trajectory,
)
from .transport import (
    collision_bound,
    dyadic_level,
    hausdorff_distance,
    measure_curve,
    shared_rank_discrepancy,
    total_variation,
    transport_upper_bound,
    wasserstein,
    word_curve,
)
from .words import (
    Alphabet,
    erase,
    induced_order_statistics,
    order_statistics,
    sorting_permutation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
