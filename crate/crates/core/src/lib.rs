//! Dyadic-parabolic wave packets, FIO-Hardy norms and half-wave propagators on
//! a periodic grid, with scaling experiments for local smoothing and decoupling.

pub mod directions;
pub mod error;
pub mod exponents;
pub mod experiments;
pub mod extremizers;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod packets;
pub mod partition;
pub mod phase;
pub mod propagator;
pub mod quad;
pub mod spectrum;
pub mod window;

pub use directions::DirectionSet;
pub use error::{Error, Result};
pub use exponents::{exponents, ExponentTriple, Rational};
pub use field::{Domain, Field, Symbol};
pub use grid::GridSpec;
pub use packets::{SphereRule, WavePacketSystem};
pub use partition::SectorPartition;
pub use spectrum::Spectrum;
pub use extremizers::{BumpProfile, Extremizer, ExtremizerKind};
pub use phase::PhaseSymbol;
pub use window::Window;
pub use experiments::{run_equivalence_suite, run_experiment, ExperimentConfig, ExperimentKind, ExperimentOutput, SuiteConfig, SuiteReport};
