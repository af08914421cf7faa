"""SDP relaxations for exact recovery of a hidden community.

Instance generation, closed-form thresholds, a purpose-built first-order
solver for the community / auxiliary / multi-community SDPs, dual
certificates and primal failure witnesses, a brute-force MLE oracle, and a
Monte Carlo sweep harness.
"""

from .certify import (
    DualCert,
    KktReport,
    NecReport,
    PerturbScalars,
    SuffReport,
    WitnessParams,
    build_dual_certificate,
    default_a_grid,
    nec_check,
    perturbation_solution,
    sbm_witness,
    suff_check,
    verify_kkt,
    vm_witness_bernoulli,
    vm_witness_gaussian,
)
from .info import (
    ConditionEntry,
    ThresholdReport,
    bern_I,
    evaluate_conditions,
    gamma_pair,
    kappa,
    kl_bern,
    solve_tau12,
    tau_star,
)
from .linalg import EigDecomp, lambda2_orth, psd_project, spectral_norm, sym_eig
from .model import (
    Instance,
    Kind,
    ModelSpec,
    Score,
    cluster_matrix,
    e_stat,
    e_vector,
    gen_instance,
    gen_sbm,
    indicator,
    mean_matrix,
    model_means,
    sbm_cluster_matrix,
    score_matrix,
)
from .oracle import MLE_BACKEND, MleResult, mle_exhaustive, swap_check, swap_deltas
from .sdp import (
    FeasReport,
    SdpSolution,
    SolverOptions,
    check_feasibility,
    recovered_exactly,
    round_solution,
    solve_community_sdp,
    solve_sbm_sdp,
    solve_vm,
)

__version__ = "0.1.0"
