//! Maximization of the excess growth rate: the explicit two-point
//! maximizer, entropy-penalized and entropy-constrained variational
//! problems, and the expected excess growth rate over scenario sets.

mod deterministic;
mod duality;
mod expected;

pub use deterministic::{
    max_egr, penalized_joint, two_point_mass, two_point_value, variational_max, variational_objective, MaxEgrResult,
    SupportPair,
};
pub use duality::{
    constrained_joint, eta_bar, phi_eta, tilt_divergence, two_point_divergence, DualBranch, DualSolveResult,
};
pub use expected::{
    expected_egr, load_scenarios, maximize_expected_egr, quadratic_approx_objective, quadratic_approx_solution,
    relative_growth_bound_check, solve_expected_egr, supergradient, wealth_ratio_certificate, ExpectedEgrOptions,
    ExpectedEgrResult, ScenarioSet,
};
