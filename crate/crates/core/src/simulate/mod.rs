//! Seeded Monte Carlo engine: conditioned Poisson sampling, guard-cell
//! thinning, one-UE-per-cell patterns, and estimators that cross-check the
//! analytic side.

mod engine;
mod estimate;
mod grid;
mod pattern;

pub use engine::{run_trials, EstimateWithError, MeanAccumulator, SimWindow, TrialPlan};
pub use estimate::{
    ap_radial_profile, estimate_cell_area, estimate_coverage, estimate_coverage_curve, estimate_guard_cases,
    estimate_nearest_distance, estimate_pca, estimate_radial_density, ue_radial_profile, GuardCaseEstimates,
    McProcess, MIN_COVERAGE_TRIALS, MIN_HISTOGRAM_TRIALS,
};
pub use pattern::{
    sample_conditioned_aps, sample_hppp, sample_vplp, thin_ues_by_guard, vplp_ues, GuardCell, PointPattern,
    ProcessTag,
};
