//! End-to-end two-source interferometer in the occupation-number
//! representation: circuit construction, coincidence classification, and
//! conditional statistics with closed-form comparison.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::circuit::{BsConvention, Circuit, CircuitElement};
use crate::error::{Error, Result};
use crate::fock::{
    Mode, ModeRegistry, OccupationState, StateVector, Statistics, DEFAULT_PRUNE_TOLERANCE,
};
use crate::labeled::{DetectorPair, Path};

/// OneEach weight below this leaves the conditional probabilities undefined.
pub const CONDITIONAL_FLOOR: f64 = 1e-12;

/// Where the two detected particles landed: both in region V, both in region
/// E, or one in each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoincidenceClass {
    BothV,
    BothE,
    OneEach,
}

impl CoincidenceClass {
    pub const ALL: [CoincidenceClass; 3] = [
        CoincidenceClass::BothV,
        CoincidenceClass::BothE,
        CoincidenceClass::OneEach,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoincidenceClass::BothV => "both-V",
            CoincidenceClass::BothE => "both-E",
            CoincidenceClass::OneEach => "one-each",
        }
    }
}

/// Coincidence statistics of one run: class weights, per-pattern Born
/// probabilities, and same-index vs cross-index totals conditioned on OneEach.
///
/// The conditionals are `None` when the OneEach weight falls below
/// [`CONDITIONAL_FLOOR`]; that cannot happen for the standard circuit but
/// keeps tables built from post-selected states honest.
#[derive(Clone, Debug)]
pub struct CoincidenceTable {
    pub both_v: f64,
    pub both_e: f64,
    pub one_each: f64,
    pub p_same_cond: Option<f64>,
    pub p_cross_cond: Option<f64>,
    /// Probability of each of the ten unordered detector patterns; every
    /// pattern is present, zeros included.
    pub per_pattern: BTreeMap<DetectorPair, f64>,
}

impl CoincidenceTable {
    pub fn class_weight(&self, class: CoincidenceClass) -> f64 {
        match class {
            CoincidenceClass::BothV => self.both_v,
            CoincidenceClass::BothE => self.both_e,
            CoincidenceClass::OneEach => self.one_each,
        }
    }
}

/// Raw per-pattern probabilities grouped by coincidence class.
#[derive(Clone, Debug)]
pub struct BunchingReport {
    pub by_class: BTreeMap<CoincidenceClass, BTreeMap<DetectorPair, f64>>,
}

impl BunchingReport {
    pub fn class_total(&self, class: CoincidenceClass) -> f64 {
        self.by_class
            .get(&class)
            .map(|patterns| patterns.values().sum())
            .unwrap_or(0.0)
    }

    pub fn pattern(&self, class: CoincidenceClass, pair: DetectorPair) -> f64 {
        self.by_class
            .get(&class)
            .and_then(|patterns| patterns.get(&pair))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Run parameters: relative source phase, particle statistics, beam-splitter
/// conventions, and the pruning threshold used between circuit elements.
#[derive(Clone, Copy, Debug)]
pub struct ExperimentConfig {
    pub phase: f64,
    pub statistics: Statistics,
    pub source_convention: BsConvention,
    pub detector_convention: BsConvention,
    pub prune_tolerance: f64,
}

impl ExperimentConfig {
    pub fn new(phase: f64, statistics: Statistics) -> Self {
        Self {
            phase,
            statistics,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.phase.is_finite() {
            return Err(Error::NonFinitePhase);
        }
        Ok(())
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            phase: 0.0,
            statistics: Statistics::Boson,
            source_convention: BsConvention::MinusFirst,
            detector_convention: BsConvention::PlusMinus,
            prune_tolerance: DEFAULT_PRUNE_TOLERANCE,
        }
    }
}

const MODE_LABELS: [&str; 12] = [
    "L", "R", "L0", "R0", "A", "A'", "B", "B'", "D1", "D2", "D1'", "D2'",
];

/// The assembled interferometer: registry, circuit, and detector bookkeeping.
///
/// Layout: each source feeds a beam splitter whose top output heads to region
/// V and bottom output to region E; a phase shifter sits on B'; the V paths
/// (A, B) meet at the detector splitter onto D1, D2 and the E paths (A', B')
/// onto D1', D2'.
#[derive(Clone, Debug)]
pub struct Apparatus {
    config: ExperimentConfig,
    registry: Arc<ModeRegistry>,
    circuit: Circuit,
}

impl Apparatus {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let registry = Arc::new(ModeRegistry::new(MODE_LABELS)?);
        let mode = |label: &str| registry.mode(label).expect("registered label");
        let mut circuit =
            Circuit::new(Arc::clone(&registry)).with_prune_tolerance(config.prune_tolerance);
        circuit.push(CircuitElement::BeamSplitter {
            in_top: mode("L"),
            in_bottom: mode("L0"),
            out_top: mode("A"),
            out_bottom: mode("A'"),
            convention: config.source_convention,
        })?;
        circuit.push(CircuitElement::BeamSplitter {
            in_top: mode("R"),
            in_bottom: mode("R0"),
            out_top: mode("B"),
            out_bottom: mode("B'"),
            convention: config.source_convention,
        })?;
        circuit.push(CircuitElement::PhaseShift {
            mode: mode("B'"),
            phase: config.phase,
        })?;
        circuit.push(CircuitElement::BeamSplitter {
            in_top: mode("A"),
            in_bottom: mode("B"),
            out_top: mode("D1"),
            out_bottom: mode("D2"),
            convention: config.detector_convention,
        })?;
        circuit.push(CircuitElement::BeamSplitter {
            in_top: mode("A'"),
            in_bottom: mode("B'"),
            out_top: mode("D1'"),
            out_bottom: mode("D2'"),
            convention: config.detector_convention,
        })?;
        Ok(Self {
            config,
            registry,
            circuit,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn mode(&self, label: &str) -> Mode {
        self.registry.mode(label).expect("registered label")
    }

    pub fn detector_mode(&self, path: Path) -> Mode {
        debug_assert!(path.is_detector());
        self.mode(path.label())
    }

    /// The detector path occupying a mode, if it is a detector mode.
    pub fn detector_path(&self, mode: Mode) -> Option<Path> {
        let label = self.registry.label(mode)?;
        Path::DETECTORS.iter().copied().find(|p| p.label() == label)
    }

    /// One particle on L, one on R, nothing anywhere else.
    pub fn initial_state(&self) -> StateVector {
        StateVector::vacuum(Arc::clone(&self.registry), self.config.statistics)
            .create(self.mode("L"))
            .expect("L is registered")
            .create(self.mode("R"))
            .expect("R is registered")
    }

    pub fn final_state(&self) -> Result<StateVector> {
        self.circuit.run(&self.initial_state())
    }

    /// Region class of a two-particle detector pattern.
    pub fn classify(&self, pattern: &OccupationState) -> Result<CoincidenceClass> {
        Ok(classify_pair(self.detector_pair(pattern)?))
    }

    /// The unordered detector pair a two-particle pattern represents.
    pub fn detector_pair(&self, pattern: &OccupationState) -> Result<DetectorPair> {
        let describe = || {
            let parts: Vec<String> = pattern
                .mode_counts()
                .iter()
                .map(|(&m, &n)| format!("{}:{n}", self.registry.label(m).unwrap_or("?")))
                .collect();
            parts.join(", ")
        };
        if pattern.total() != 2 {
            return Err(Error::InvalidPattern(describe()));
        }
        let mut hits = Vec::with_capacity(2);
        for (mode, count) in pattern.mode_counts() {
            let path = self
                .detector_path(mode)
                .ok_or_else(|| Error::InvalidPattern(describe()))?;
            for _ in 0..count {
                hits.push(path);
            }
        }
        DetectorPair::new(hits[0], hits[1])
    }

    /// Coincidence statistics of the evolved state.
    pub fn coincidence_table(&self) -> Result<CoincidenceTable> {
        self.table_from_state(&self.final_state()?)
    }

    /// Coincidence statistics of an arbitrary two-particle detector-stage
    /// state (normalized internally).
    pub fn table_from_state(&self, state: &StateVector) -> Result<CoincidenceTable> {
        let total = state.norm_sqr();
        if total == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut per_pattern: BTreeMap<DetectorPair, f64> =
            DetectorPair::all().into_iter().map(|p| (p, 0.0)).collect();
        let mut weights = BTreeMap::new();
        for (occ, amp) in state.terms() {
            let pair = self.detector_pair(occ)?;
            let prob = amp.norm_sqr() / total;
            *per_pattern.get_mut(&pair).expect("prefilled") += prob;
            *weights.entry(classify_pair(pair)).or_insert(0.0) += prob;
        }
        let one_each = weights
            .get(&CoincidenceClass::OneEach)
            .copied()
            .unwrap_or(0.0);
        let (p_same_cond, p_cross_cond) = if one_each < CONDITIONAL_FLOOR {
            (None, None)
        } else {
            let same: f64 = per_pattern
                .iter()
                .filter(|(p, _)| p.is_same_index())
                .map(|(_, &v)| v)
                .sum();
            let cross: f64 = per_pattern
                .iter()
                .filter(|(p, _)| p.is_cross_index())
                .map(|(_, &v)| v)
                .sum();
            (Some(same / one_each), Some(cross / one_each))
        };
        Ok(CoincidenceTable {
            both_v: weights
                .get(&CoincidenceClass::BothV)
                .copied()
                .unwrap_or(0.0),
            both_e: weights
                .get(&CoincidenceClass::BothE)
                .copied()
                .unwrap_or(0.0),
            one_each,
            p_same_cond,
            p_cross_cond,
            per_pattern,
        })
    }

    /// Per-class pattern breakdown of the evolved state.
    pub fn bunching_report(&self) -> Result<BunchingReport> {
        let table = self.coincidence_table()?;
        let mut by_class: BTreeMap<CoincidenceClass, BTreeMap<DetectorPair, f64>> =
            CoincidenceClass::ALL
                .into_iter()
                .map(|c| (c, BTreeMap::new()))
                .collect();
        for (&pair, &prob) in &table.per_pattern {
            by_class
                .get_mut(&classify_pair(pair))
                .expect("prefilled")
                .insert(pair, prob);
        }
        Ok(BunchingReport { by_class })
    }
}

/// Region class of an unordered detector pair.
pub fn classify_pair(pair: DetectorPair) -> CoincidenceClass {
    use crate::labeled::Region;
    match (pair.first().region(), pair.second().region()) {
        (Region::V, Region::V) => CoincidenceClass::BothV,
        (Region::E, Region::E) => CoincidenceClass::BothE,
        _ => CoincidenceClass::OneEach,
    }
}

/// Evolves one particle per source through the interferometer and tabulates
/// the coincidence statistics.
pub fn run_experiment(config: &ExperimentConfig) -> Result<CoincidenceTable> {
    Apparatus::new(*config)?.coincidence_table()
}

/// The analytic conditional law: probability of same-index vs cross-index
/// coincidences given one particle per region.
pub fn closed_form(phase: f64, statistics: Statistics) -> (f64, f64) {
    let c = phase.cos();
    match statistics {
        Statistics::Boson => (0.5 * (1.0 + c), 0.5 * (1.0 - c)),
        Statistics::Fermion => (0.5 * (1.0 - c), 0.5 * (1.0 + c)),
        Statistics::Distinguishable => (0.5, 0.5),
    }
}

/// Per-class pattern breakdown for a config.
pub fn bunching_report(config: &ExperimentConfig) -> Result<BunchingReport> {
    Apparatus::new(*config)?.bunching_report()
}
