//! Kähler regularization of the 1D harmonic oscillator: the maps `U₁`, `U₂`,
//! the regularized BKS pairing with its double limit, and the resulting
//! Maslov-corrected semiclassical states.
//!
//! Everything is generic over the real scalar via [`Real`]; the `*64`
//! aliases below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bks;
pub mod energy;
pub mod error;
pub mod families;
pub mod fd;
pub mod grid;
pub mod phase;
pub mod quadrature;
pub mod richardson;
pub mod scalar;
pub mod semiclassical;
pub mod schrodinger;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use families::{FirstTypeFamily, LegendreData, SecondTypeFamily};
pub use grid::UniformGrid;
pub use phase::{ActionAngle, FdOrder, PhasePoint, QuantConfig, Trivialization};
pub use scalar::Real;

pub type QuantConfig64 = QuantConfig<f64>;
pub type PhasePoint64 = PhasePoint<f64>;
pub type ActionAngle64 = ActionAngle<f64>;
pub type UniformGrid64 = UniformGrid<f64>;
pub type SchrodingerState64 = schrodinger::SchrodingerState<f64>;
pub type PolarizedSectionSample64 = schrodinger::PolarizedSectionSample<f64>;
pub type PairingSchedule64 = bks::PairingSchedule<f64>;
pub type PairingResult64 = bks::PairingResult<f64>;
pub type SemiclassicalState64 = semiclassical::SemiclassicalState<f64>;
pub type BohrSommerfeldState64 = energy::BohrSommerfeldState<f64>;
