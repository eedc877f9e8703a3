"""Dynamic random-graph models over snapshot sequences: generation and maximum-likelihood fitting."""

from .dyn_cl import ClParams, cl_transition_probs, fit_cl, generate_cl, loglike_cl, solve_beta_quadratic
from .dyn_dcsbm import (DcsbmParams, dcsbm_transition_probs, estimate_given_groups, expected_degrees,
                        fit_dcsbm, generate_dcsbm, loglike_dcsbm, profile_loglike)
from .dyn_er import ErParams, fit_er, generate_er, loglike_er
from .snapshots import (Partition, SnapshotSequence, grouped_transition_counts, move_delta,
                        node_appearance_sums, transition_counts)

__version__ = "0.1.0"
