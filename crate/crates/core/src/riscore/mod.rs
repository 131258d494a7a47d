//! Circuit-topology model of the surface: masks, the Cayley map, the
//! structured susceptance subproblem and link-quality evaluation.

pub mod architecture;
pub mod bsub;
pub mod cayley;
pub mod metrics;

pub use architecture::{index_sets, make_architecture, Architecture, ArchitectureMask, IndexSets, MaskKind};
pub use bsub::{solve_b_subproblem, solve_b_subproblem_with, stack_rows, BSolvePath, DesignMatrix};
pub use cayley::{b_to_theta, resolvent, spectral_norm, theta_to_b, Scattering, Susceptance};
pub use metrics::{cross_gains, sinr_and_rate, sinr_and_rate_theta, sinr_from_gains, LinkQuality};
