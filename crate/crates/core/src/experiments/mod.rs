//! Scaling sweeps over the dyadic scale `k`, power-law fits and the
//! equivalence suite.

mod config;
mod fit;
mod records;
mod runs;
mod suite;

pub use config::{ExperimentConfig, ExperimentKind};
pub use fit::{fit_points, fit_power_law, FitResult};
pub use records::{code_version, verify_jsonl, ExperimentOutput, ScalingRecord, SlopeCheck};
pub use runs::{khintchine_ratio, run_experiment, LOWER_MARGIN, UPPER_MARGIN};
pub use suite::{run_equivalence_suite, Status, SuiteConfig, SuiteReport, SuiteTest};
