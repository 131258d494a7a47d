//! Architecture-independent optimization of beyond-diagonal reconfigurable
//! intelligent surfaces (BD-RIS) in multiuser MISO downlinks.
//!
//! The surface is parameterized by its susceptance matrix `B`, whose sparsity
//! pattern encodes the circuit topology ([`riscore::ArchitectureMask`]). Two
//! partially proximal ADMM solvers jointly design `B` and the BS beamformer:
//!
//! * [`sumrate::solve_sumrate`] maximizes the sum-rate under a power budget;
//! * [`powermin::solve_powermin`] minimizes transmit power under per-user
//!   SINR targets.
//!
//! [`channel`] generates seeded Rician scenarios. All numerics are generic
//! over [`Real`] (`f32` or `f64`); the `*64` aliases below fix `f64`.

pub mod channel;
pub mod error;
pub mod linalg;
pub mod powermin;
pub mod report;
pub mod riscore;
pub mod scalar;
pub mod scaling;
pub mod sumrate;

pub use error::{Error, Result};
pub use report::{IterationRecord, Status};
pub use scalar::{CMat, RMat, Real};

pub type Scenario64 = channel::Scenario<f64>;
pub type Susceptance64 = riscore::Susceptance<f64>;
pub type Scattering64 = riscore::Scattering<f64>;
pub type SumRateParams64 = sumrate::SumRateParams<f64>;
pub type SumRateState64 = sumrate::SumRateState<f64>;
pub type SumRateReport64 = sumrate::SumRateReport<f64>;
pub type PowerMinParams64 = powermin::PowerMinParams<f64>;
pub type PowerMinState64 = powermin::PowerMinState<f64>;
pub type PowerMinReport64 = powermin::PowerMinReport<f64>;
