//! Finite-support input distributions for Gaussian-noise channels.
//!
//! Solvers for the amplitude-constrained channel (exact capacity with a
//! certified upper bound) and the power-constrained channel at a fixed
//! input cardinality, plus the reference curves and sweep drivers built on
//! them. Every routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod ba;
pub mod baselines;
pub mod dab_ac;
pub mod dab_pc;
pub mod error;
pub mod numerics;
pub mod scalar;
pub mod search;
pub mod sweep;

pub use error::{Error, Result};
pub use numerics::{AwgnChannel, FinitePmf, QuadratureScheme};
pub use scalar::Real;

pub type Pmf = numerics::FinitePmf<f64>;
pub type Channel = numerics::AwgnChannel<f64>;
pub type Quadrature = numerics::QuadratureScheme<f64>;
pub type BaOutcome = ba::BaOutcome<f64>;
pub type BaOptions = ba::BaOptions<f64>;
pub type DabAcOptions = dab_ac::DabAcOptions<f64>;
pub type DabAcResult = dab_ac::DabAcResult<f64>;
pub type DabPcOptions = dab_pc::DabPcOptions<f64>;
pub type DabPcResult = dab_pc::DabPcResult<f64>;
pub type AcSweepRecord = sweep::AcSweepRecord<f64>;
pub type PcSweepRecord = sweep::PcSweepRecord<f64>;

pub type Pmf32 = numerics::FinitePmf<f32>;
pub type Channel32 = numerics::AwgnChannel<f32>;
