//! First-quantized two-particle representation with source labels.
//!
//! A [`LabeledState`] stores amplitudes over ordered path pairs: the first
//! slot is always the particle from source L, the second the particle from
//! source R. Exchange symmetry is not automatic here; it is imposed by the
//! explicit [`LabeledState::project`] operation, which is what makes this
//! representation useful as a cross-check against the occupation-number
//! engine, where symmetry is built in.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-particle path labels of the two-source interferometer.
///
/// A, B head toward region V and A', B' toward region E; D1, D2 are the
/// region-V detectors and D1', D2' the region-E detectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Path {
    A,
    APrime,
    B,
    BPrime,
    D1,
    D2,
    D1Prime,
    D2Prime,
}

/// Detection region: V or E.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    V,
    E,
}

impl Path {
    pub const PRE_DETECTOR: [Path; 4] = [Path::A, Path::APrime, Path::B, Path::BPrime];
    pub const DETECTORS: [Path; 4] = [Path::D1, Path::D2, Path::D1Prime, Path::D2Prime];

    pub fn label(self) -> &'static str {
        match self {
            Path::A => "A",
            Path::APrime => "A'",
            Path::B => "B",
            Path::BPrime => "B'",
            Path::D1 => "D1",
            Path::D2 => "D2",
            Path::D1Prime => "D1'",
            Path::D2Prime => "D2'",
        }
    }

    pub fn is_detector(self) -> bool {
        matches!(self, Path::D1 | Path::D2 | Path::D1Prime | Path::D2Prime)
    }

    pub fn region(self) -> Region {
        match self {
            Path::A | Path::B | Path::D1 | Path::D2 => Region::V,
            Path::APrime | Path::BPrime | Path::D1Prime | Path::D2Prime => Region::E,
        }
    }

    /// Balanced-splitter image of a pre-detector path: the two detector paths
    /// it feeds, with their sign of the 1/sqrt2 coefficient.
    fn splitter_image(self) -> Result<[(Path, f64); 2]> {
        match self {
            Path::A => Ok([(Path::D1, 1.0), (Path::D2, 1.0)]),
            Path::B => Ok([(Path::D1, 1.0), (Path::D2, -1.0)]),
            Path::APrime => Ok([(Path::D1Prime, 1.0), (Path::D2Prime, 1.0)]),
            Path::BPrime => Ok([(Path::D1Prime, 1.0), (Path::D2Prime, -1.0)]),
            _ => Err(Error::ExpectedPreDetector),
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Unordered pair of detector paths; the observable coincidence pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetectorPair {
    lo: Path,
    hi: Path,
}

impl DetectorPair {
    pub fn new(a: Path, b: Path) -> Result<Self> {
        if !a.is_detector() || !b.is_detector() {
            return Err(Error::InvalidPattern(format!("({a}, {b})")));
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Ok(Self { lo, hi })
    }

    /// All ten two-particle detector patterns, in canonical order.
    pub fn all() -> Vec<DetectorPair> {
        let mut out = Vec::new();
        for (i, &a) in Path::DETECTORS.iter().enumerate() {
            for &b in &Path::DETECTORS[i..] {
                out.push(DetectorPair::new(a, b).expect("detector paths"));
            }
        }
        out
    }

    pub fn first(self) -> Path {
        self.lo
    }

    pub fn second(self) -> Path {
        self.hi
    }

    pub fn is_double(self) -> bool {
        self.lo == self.hi
    }

    /// True for the matched-index coincidences D1 with D1' and D2 with D2'.
    pub fn is_same_index(self) -> bool {
        (self.lo == Path::D1 && self.hi == Path::D1Prime)
            || (self.lo == Path::D2 && self.hi == Path::D2Prime)
    }

    /// True for the crossed-index coincidences D1 with D2' and D2 with D1'.
    pub fn is_cross_index(self) -> bool {
        (self.lo == Path::D1 && self.hi == Path::D2Prime)
            || (self.lo == Path::D2 && self.hi == Path::D1Prime)
    }

    pub fn is_one_each(self) -> bool {
        self.lo.region() != self.hi.region()
    }
}

impl fmt::Display for DetectorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}&{}", self.lo, self.hi)
    }
}

/// Exchange parity selected by [`LabeledState::project`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExchangeParity {
    Symmetric,
    Antisymmetric,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    PreDetector,
    Detector,
}

/// Amplitudes over ordered (path of L, path of R) pairs.
#[derive(Clone, Debug, Default)]
pub struct LabeledState {
    terms: BTreeMap<(Path, Path), Complex64>,
}

impl LabeledState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ((Path, Path), Complex64)>>(terms: I) -> Self {
        let mut out = Self::new();
        for (key, amp) in terms {
            out.accumulate(key, amp);
        }
        out
    }

    fn accumulate(&mut self, key: (Path, Path), amp: Complex64) {
        use std::collections::btree_map::Entry;
        if amp == Complex64::ZERO {
            return;
        }
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(amp);
            }
            Entry::Occupied(mut e) => {
                let sum = *e.get() + amp;
                if sum == Complex64::ZERO {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn amplitude(&self, l: Path, r: Path) -> Complex64 {
        self.terms.get(&(l, r)).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((Path, Path), Complex64)> + '_ {
        self.terms.iter().map(|(&key, &amp)| (key, amp))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        if c == Complex64::ZERO {
            return Self::new();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&key, &amp)| (key, amp * c))
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (key, amp) in other.terms() {
            out.accumulate(key, amp);
        }
        out
    }

    /// Conjugate-linear in `self`, linear in `other`.
    pub fn inner_product(&self, other: &Self) -> Complex64 {
        self.terms()
            .map(|(key, amp)| amp.conj() * other.amplitude(key.0, key.1))
            .sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    fn stage(&self) -> Result<Option<Stage>> {
        let mut stage = None;
        for ((l, r), _) in self.terms() {
            if l.is_detector() != r.is_detector() {
                return Err(Error::MixedStage);
            }
            let this = if l.is_detector() {
                Stage::Detector
            } else {
                Stage::PreDetector
            };
            match stage {
                None => stage = Some(this),
                Some(s) if s != this => return Err(Error::MixedStage),
                _ => {}
            }
        }
        Ok(stage)
    }

    /// Sends both particles through their balanced splitters: A -> (D1+D2)/sqrt2,
    /// B -> (D1-D2)/sqrt2, and the primed paths likewise onto D1', D2'.
    pub fn evolve(&self) -> Result<Self> {
        match self.stage()? {
            None => return Ok(Self::new()),
            Some(Stage::Detector) => return Err(Error::ExpectedPreDetector),
            Some(Stage::PreDetector) => {}
        }
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let mut out = Self::new();
        for ((l, rr), amp) in self.terms() {
            for (l_out, l_sign) in l.splitter_image()? {
                for (r_out, r_sign) in rr.splitter_image()? {
                    out.accumulate((l_out, r_out), amp * r * r * l_sign * r_sign);
                }
            }
        }
        Ok(out)
    }

    /// Swaps which particle is on which path; slots still read as (L, R).
    pub fn exchange(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(l, r), &amp)| ((r, l), amp))
                .collect(),
        }
    }

    fn projected_unnormalized(&self, parity: ExchangeParity) -> Self {
        let swapped = self.exchange();
        let signed = match parity {
            ExchangeParity::Symmetric => swapped,
            ExchangeParity::Antisymmetric => swapped.scaled(Complex64::new(-1.0, 0.0)),
        };
        self.plus(&signed).scaled(Complex64::new(0.5, 0.0))
    }

    /// Normalized projection onto the chosen exchange parity; the zero state
    /// when the projection vanishes.
    pub fn project(&self, parity: ExchangeParity) -> Self {
        let projected = self.projected_unnormalized(parity);
        match projected.normalized() {
            Ok(s) => s,
            Err(_) => Self::new(),
        }
    }

    /// Squared norm of the unnormalized parity projection.
    pub fn projection_weight(&self, parity: ExchangeParity) -> f64 {
        self.projected_unnormalized(parity).norm_sqr()
    }

    /// Born probabilities of unordered detector pairs for the state as given
    /// (normalized internally, so the result always sums to 1).
    pub fn detection_distribution(&self) -> Result<BTreeMap<DetectorPair, f64>> {
        match self.stage()? {
            None => return Err(Error::ZeroNorm),
            Some(Stage::PreDetector) => return Err(Error::ExpectedDetector),
            Some(Stage::Detector) => {}
        }
        let total = self.norm_sqr();
        let mut dist = BTreeMap::new();
        for ((l, r), amp) in self.terms() {
            let pair = DetectorPair::new(l, r)?;
            *dist.entry(pair).or_insert(0.0) += amp.norm_sqr() / total;
        }
        Ok(dist)
    }
}

/// The post-source state: one particle split toward (A, A'), the other toward
/// (B, B') with the phase riding on B'.
pub fn build_initial(phi: f64) -> LabeledState {
    let half = Complex64::new(0.5, 0.0);
    let phase = Complex64::from_polar(1.0, phi);
    LabeledState::from_terms([
        ((Path::A, Path::B), half),
        ((Path::A, Path::BPrime), -half * phase),
        ((Path::APrime, Path::B), -half),
        ((Path::APrime, Path::BPrime), half * phase),
    ])
}

/// Outcome of [`split_regions`]: normalized components with the complex
/// coefficients that reconstruct the input exactly.
#[derive(Clone, Debug)]
pub struct RegionSplit {
    /// Both particles headed to one region (A with B, or A' with B').
    pub same_region: LabeledState,
    /// One particle per region.
    pub one_each: LabeledState,
    pub coeff_same: Complex64,
    pub coeff_one_each: Complex64,
}

impl RegionSplit {
    pub fn weight_same(&self) -> f64 {
        self.coeff_same.norm_sqr()
    }

    pub fn weight_one_each(&self) -> f64 {
        self.coeff_one_each.norm_sqr()
    }

    /// coeff_same * same_region + coeff_one_each * one_each.
    pub fn reconstruct(&self) -> LabeledState {
        self.same_region
            .scaled(self.coeff_same)
            .plus(&self.one_each.scaled(self.coeff_one_each))
    }
}

/// Splits a state into its same-region and one-each components.
///
/// Each component is returned normalized, with its global phase fixed so the
/// first nonzero amplitude in canonical term order is positive real; the
/// returned coefficients carry the remainder, so
/// `coeff_same * same_region + coeff_one_each * one_each` equals the input.
/// For a normalized input the two weights sum to 1.
pub fn split_regions(s: &LabeledState) -> Result<RegionSplit> {
    if s.stage()?.is_none() {
        return Err(Error::ZeroNorm);
    }
    let mut same = LabeledState::new();
    let mut one_each = LabeledState::new();
    for ((l, r), amp) in s.terms() {
        if l.region() == r.region() {
            same.accumulate((l, r), amp);
        } else {
            one_each.accumulate((l, r), amp);
        }
    }
    let (same_region, coeff_same) = phase_fixed(same);
    let (one_each, coeff_one_each) = phase_fixed(one_each);
    Ok(RegionSplit {
        same_region,
        one_each,
        coeff_same,
        coeff_one_each,
    })
}

fn phase_fixed(collected: LabeledState) -> (LabeledState, Complex64) {
    let norm = collected.norm();
    if norm == 0.0 {
        return (LabeledState::new(), Complex64::ZERO);
    }
    let (_, first) = collected.terms().next().expect("nonzero state");
    let coeff = (first / first.norm()) * norm;
    let component = collected.scaled(Complex64::new(1.0, 0.0) / coeff);
    (component, coeff)
}
