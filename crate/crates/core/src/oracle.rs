//! Brute-force cross-check of the coincidence statistics.
//!
//! This module hardcodes the single-particle amplitude of every source-to-
//! detector path and combines pairs of them with the 2x2 permanent (bosons),
//! determinant (fermions), or squared-magnitude sum (distinguishable
//! particles). It deliberately shares no code with the occupation-number
//! evolution engine; agreement between the two is the correctness argument.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::experiment::CoincidenceTable;
use crate::fock::Statistics;
use crate::labeled::{DetectorPair, Path};

/// Which source a particle started from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceBeam {
    L,
    R,
}

/// Amplitude for one particle to travel from a source to a detector: the
/// product of its two beam-splitter coefficients and, on the B' leg, the
/// phase e^{i phi}.
///
/// Sign table (source splitters send the minus to the primed branch, detector
/// splitters put the minus on the second output's bottom input):
/// from L: +1/2 to D1 and D2, -1/2 to D1' and D2';
/// from R: +1/2 to D1, -1/2 to D2, -e^{i phi}/2 to D1', +e^{i phi}/2 to D2'.
pub fn path_amplitude(source: SourceBeam, detector: Path, phi: f64) -> Complex64 {
    assert!(detector.is_detector(), "path ends on a detector");
    let half = 0.5;
    let phase = Complex64::from_polar(1.0, phi);
    match (source, detector) {
        (SourceBeam::L, Path::D1) => Complex64::new(half, 0.0),
        (SourceBeam::L, Path::D2) => Complex64::new(half, 0.0),
        (SourceBeam::L, Path::D1Prime) => Complex64::new(-half, 0.0),
        (SourceBeam::L, Path::D2Prime) => Complex64::new(-half, 0.0),
        (SourceBeam::R, Path::D1) => Complex64::new(half, 0.0),
        (SourceBeam::R, Path::D2) => Complex64::new(-half, 0.0),
        (SourceBeam::R, Path::D1Prime) => -phase * half,
        (SourceBeam::R, Path::D2Prime) => phase * half,
        _ => unreachable!("detector checked above"),
    }
}

/// The 2x2 matrix M with M[d][s] = path amplitude from source s to detector d
/// for the two detectors of a pattern (rows repeat for a double hit).
#[derive(Clone, Copy, Debug)]
pub struct PathAmplitudeMatrix {
    m: [[Complex64; 2]; 2],
}

impl PathAmplitudeMatrix {
    pub fn for_pattern(pattern: DetectorPair, phi: f64) -> Self {
        let row = |d: Path| {
            [
                path_amplitude(SourceBeam::L, d, phi),
                path_amplitude(SourceBeam::R, d, phi),
            ]
        };
        Self {
            m: [row(pattern.first()), row(pattern.second())],
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn permanent(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] + self.m[0][1] * self.m[1][0]
    }

    pub fn determinant(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

/// Double hits are one physical pattern reached by both row orderings.
fn repetition(pattern: DetectorPair) -> f64 {
    if pattern.is_double() {
        2.0
    } else {
        1.0
    }
}

/// Probability of an unordered detector pattern, straight from the path
/// table.
pub fn outcome_probability(pattern: DetectorPair, phi: f64, statistics: Statistics) -> f64 {
    let m = PathAmplitudeMatrix::for_pattern(pattern, phi);
    match statistics {
        Statistics::Boson => m.permanent().norm_sqr() / repetition(pattern),
        Statistics::Fermion => m.determinant().norm_sqr(),
        Statistics::Distinguishable => {
            let direct = (m.entry(0, 0) * m.entry(1, 1)).norm_sqr();
            let swapped = (m.entry(0, 1) * m.entry(1, 0)).norm_sqr();
            (direct + swapped) / repetition(pattern)
        }
    }
}

/// Oracle probabilities for all ten patterns.
pub fn distribution(phi: f64, statistics: Statistics) -> BTreeMap<DetectorPair, f64> {
    DetectorPair::all()
        .into_iter()
        .map(|p| (p, outcome_probability(p, phi, statistics)))
        .collect()
}

/// Same-index vs cross-index totals conditioned on one hit per region.
pub fn conditional_totals(phi: f64, statistics: Statistics) -> (f64, f64) {
    let dist = distribution(phi, statistics);
    let one_each: f64 = dist
        .iter()
        .filter(|(p, _)| p.is_one_each())
        .map(|(_, &v)| v)
        .sum();
    let same: f64 = dist
        .iter()
        .filter(|(p, _)| p.is_same_index())
        .map(|(_, &v)| v)
        .sum();
    let cross: f64 = dist
        .iter()
        .filter(|(p, _)| p.is_cross_index())
        .map(|(_, &v)| v)
        .sum();
    (same / one_each, cross / one_each)
}

/// Per-pattern comparison of a coincidence table against the oracle.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub tolerance: f64,
    pub deviations: BTreeMap<DetectorPair, f64>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Checks every pattern probability in `table` against the oracle value.
pub fn verify(
    table: &CoincidenceTable,
    phi: f64,
    statistics: Statistics,
    tolerance: f64,
) -> OracleReport {
    let mut deviations = BTreeMap::new();
    let mut max_deviation = 0.0f64;
    for pattern in DetectorPair::all() {
        let expected = outcome_probability(pattern, phi, statistics);
        let actual = table.per_pattern.get(&pattern).copied().unwrap_or(0.0);
        let deviation = (expected - actual).abs();
        max_deviation = max_deviation.max(deviation);
        deviations.insert(pattern, deviation);
    }
    OracleReport {
        tolerance,
        deviations,
        max_deviation,
        passed: max_deviation < tolerance,
    }
}
