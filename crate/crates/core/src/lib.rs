//! Exact two-particle interferometry for bosons, fermions, and
//! distinguishable particles.
//!
//! One particle is emitted from each of two sources into a balanced
//! interferometer; coincidence counts at four detectors reveal exchange
//! effects even though the particles never shared a source. This crate
//! computes those statistics three independent ways:
//!
//! - [`fock`] and [`circuit`] evolve occupation-number states through beam
//!   splitters and phase shifters by creation-operator substitution, with
//!   bosonic, fermionic, or distinguishable statistics built into the
//!   operator algebra;
//! - [`labeled`] tracks the two particles in a first-quantized, source-labeled
//!   representation where exchange symmetry is imposed by explicit projection;
//! - [`oracle`] multiplies hardcoded single-particle path amplitudes into a
//!   2x2 permanent or determinant, sharing no code with the other two.
//!
//! [`experiment`] assembles the apparatus, classifies coincidences by
//! detection region, and compares against the closed-form interference laws.
//!
//! ```
//! use twinsim::experiment::{closed_form, run_experiment, ExperimentConfig};
//! use twinsim::fock::Statistics;
//!
//! let config = ExperimentConfig::new(std::f64::consts::FRAC_PI_2, Statistics::Fermion);
//! let table = run_experiment(&config).unwrap();
//! let (p_same, _) = closed_form(config.phase, config.statistics);
//! assert!((table.p_same_cond.unwrap() - p_same).abs() < 1e-12);
//! ```

pub mod circuit;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod labeled;
pub mod oracle;

pub use circuit::{BsConvention, Circuit, CircuitElement, ModeUnitary};
pub use error::{Error, Result};
pub use experiment::{
    closed_form, run_experiment, Apparatus, CoincidenceClass, CoincidenceTable, ExperimentConfig,
};
pub use fock::{Mode, ModeRegistry, OccupationState, StateVector, Statistics};
pub use labeled::{build_initial, split_regions, DetectorPair, ExchangeParity, LabeledState, Path};
pub use oracle::{outcome_probability, path_amplitude, OracleReport, SourceBeam};
