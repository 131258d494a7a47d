//! Iteration telemetry shared by both solvers.

use serde::{Deserialize, Serialize};

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Residual and change tolerances met.
    Converged,
    /// Iteration budget exhausted before the tolerances were met.
    MaxIterations,
    /// Power minimization finished but the recomputed SINRs miss the
    /// thresholds by more than the allowed slack.
    InfeasibleSolution,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max_iterations",
            Status::InfeasibleSolution => "infeasible_solution",
        }
    }
}

/// One ADMM sweep. Values are in the solver's internal (normalized) units
/// except where noted; ratios and relative quantities are unit-free.
#[derive(Debug, Clone, Default, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Surrogate objective (sum-rate: R̃ in nats; power-min: ‖W‖²_F in watts).
    pub surrogate: f64,
    /// True objective at the current iterate (sum-rate: R(W, U); power-min: ‖W‖²_F).
    pub objective: f64,
    /// `‖(I − iZ₀B)U − (I + iZ₀B)H‖_F`
    pub residual: f64,
    /// `residual / ‖H‖_F`
    pub residual_rel: f64,
    /// Power-min only: `‖Y − U†GW‖_F / max(‖Y‖_F, 1)`.
    pub residual_y_rel: f64,
    /// Largest relative change over the primal blocks.
    pub max_change: f64,
    /// Relative change of the multiplier(s).
    pub multiplier_change: f64,
    /// Penalty in effect during the sweep.
    pub rho: f64,
    /// Seconds since the solve started.
    pub elapsed: f64,
    /// Norm telemetry: ‖W‖_F, ‖U‖_F, ‖λ‖_F (and ‖μ‖_F for power-min).
    pub norm_w: f64,
    pub norm_u: f64,
    pub norm_lambda: f64,
    pub norm_mu: f64,
    /// Power-min only: smallest singular value of G†U.
    pub min_singular_gu: f64,
    /// Diagnostics (only filled when enabled): worst block-wise violation of
    /// the ascent/descent property of the augmented Lagrangian, relative to
    /// `1 + |L|`. Non-positive means no violation.
    pub lagrangian_violation: f64,
    /// Diagnostics: relative error of the multiplier identity after the sweep.
    pub multiplier_identity: f64,
}
