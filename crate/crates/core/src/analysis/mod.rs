//! Concentration diagnostics: variance scans, expressivity, bound
//! evaluators and hypothesis tests on shot records.

mod bounds;
mod concentration;
mod expressivity;
mod hypothesis;
mod indistinguishability;
mod sampler;
mod stats;

pub use bounds::{
    beta_haar, beta_tilde_haar, bound_entanglement, bound_expressivity, bound_global, distinguish_success_bound,
    helstrom_bound, kta_bound, kta_constant, shots_budget, EntanglementBound, KtaConstant,
};
pub use concentration::{variance_scan, ConcentrationReport, NamedBound};
pub use expressivity::{expressivity_epsilon, expressivity_of_states, ExpressivityEstimate, EXPRESSIVITY_CAP};
pub use hypothesis::{
    binomial_indistinguishability_test, binomial_two_sided_p, optimal_decision_success, simulate_optimal_decision,
    DecisionSimulation,
};
pub use indistinguishability::{
    geometric_shot_grid, loschmidt_zero_ratio, off_diagonal_kernels, projected_term_success_ratio,
    shots_for_zero_ratio, success_ratio_scan, swap_success_ratio, uniform_angle_dataset, zero_ratio_scan, RatioPoint,
    RatioScan,
};
pub use sampler::DataSampler;
pub use stats::RunningStats;
