"""Graph matching for correlated random graphs via degree profiles, seeded
matching, and classical baselines."""

from .advanced import (DenseParams, SeedSelectionError, SparseParams,
                       binomial_upper_tail, build_degree_seed_set, match_dense,
                       match_sparse, similarity_grid, tau_threshold,
                       two_hop_neighborhood, two_hop_outdegree, w_similarity)
from .baselines import (DoublyStochastic, EigenConvergenceError, QpParams,
                        leading_eigenvector, match_degree_sort, match_qp,
                        match_spectral, project_doubly_stochastic,
                        solve_qp_relaxation)
from .bench import (ExperimentConfig, ResultRow, run_experiment,
                    subsample_graph)
from .dp import (ScoreMatrix, greedy_permutation, match_by_smallest_n,
                 match_degree_profile, score_grid)
from .graph import (EdgeListParseError, FailureReason, Graph, MatchResult,
                    Permutation, accuracy, apply_permutation, ingest_edge_list)
from .models import (CorrelatedErParams, SymMatrix, WignerParams,
                     sample_correlated_er, sample_correlated_er_conditional,
                     sample_correlated_wigner, substream, trial_seed)
from .profiles import (BinnedProfile, DegenerateStandardizationWarning,
                       EmpiricalDistribution, EmptyDistributionError,
                       ProfileConfig, centered_binned_profile, default_bin_count,
                       degree_profile, lp_cdf_distance, outdegree,
                       standardized_binomial_bin_masses, w1_distance,
                       w1_distance_grid, z_distance)
from .refine import greedy_match, iterative_cleanup, linear_assignment
from .seeded import (BipartiteGraph, SeedMap, count_common_neighbors_under,
                     estimate_edge_probability, hopcroft_karp, seeded_match)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
