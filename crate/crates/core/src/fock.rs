//! Occupation-number basis states and sparse complex state vectors.
//!
//! A [`StateVector`] maps [`OccupationState`] keys to complex amplitudes and is
//! tagged with the [`Statistics`] of the particles and the [`ModeRegistry`] it
//! lives over. Values are immutable: every operation returns a new state.
//! Creation-operator application is the only statistics-aware primitive; boson
//! sqrt(n+1) factors, fermion exclusion and anticommutation signs, and
//! per-species bookkeeping for distinguishable particles all live here.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default threshold below which circuit application drops amplitudes.
pub const DEFAULT_PRUNE_TOLERANCE: f64 = 1e-12;

/// Tolerance used for amplitude-level comparisons in verification reports.
pub const COMPARISON_TOLERANCE: f64 = 1e-9;

/// Handle to a registered mode. Only meaningful for the registry that issued it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode(u16);

impl Mode {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered set of mode labels.
///
/// The declaration order is the canonical order that all fermion sign
/// conventions derive from, so it is fixed at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeRegistry {
    labels: Vec<String>,
}

impl ModeRegistry {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyRegistry);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateMode(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Looks a mode up by label.
    pub fn mode(&self, label: &str) -> Option<Mode> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| Mode(i as u16))
    }

    pub fn label(&self, mode: Mode) -> Option<&str> {
        self.labels.get(mode.index()).map(String::as_str)
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.labels.len()).map(|i| Mode(i as u16))
    }

    pub fn contains(&self, mode: Mode) -> bool {
        mode.index() < self.labels.len()
    }

    pub(crate) fn check(&self, mode: Mode) -> Result<()> {
        if self.contains(mode) {
            Ok(())
        } else {
            Err(Error::UnregisteredMode(self.describe(mode)))
        }
    }

    pub(crate) fn describe(&self, mode: Mode) -> String {
        match self.label(mode) {
            Some(l) => l.to_owned(),
            None => format!("#{}", mode.index()),
        }
    }
}

/// Exchange behavior of the simulated particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistics {
    Boson,
    Fermion,
    Distinguishable,
}

impl Statistics {
    pub const ALL: [Statistics; 3] = [
        Statistics::Boson,
        Statistics::Fermion,
        Statistics::Distinguishable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
            Statistics::Distinguishable => "distinguishable",
        }
    }
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Statistics {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boson" | "bosons" => Ok(Statistics::Boson),
            "fermion" | "fermions" => Ok(Statistics::Fermion),
            "distinguishable" => Ok(Statistics::Distinguishable),
            other => Err(format!(
                "unknown statistics {other:?} (expected boson, fermion, or distinguishable)"
            )),
        }
    }
}

/// One occupation slot. `species` separates particles under
/// [`Statistics::Distinguishable`] and is always 0 otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub mode: Mode,
    pub species: u16,
}

impl Slot {
    pub fn new(mode: Mode, species: u16) -> Self {
        Self { mode, species }
    }

    pub fn plain(mode: Mode) -> Self {
        Self { mode, species: 0 }
    }
}

/// Fock basis element: particle count per occupied slot.
///
/// Zero counts are never stored, so equality of maps is equality of states.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState {
    counts: BTreeMap<Slot, u32>,
}

impl OccupationState {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_slots<I: IntoIterator<Item = (Slot, u32)>>(slots: I) -> Self {
        let mut counts = BTreeMap::new();
        for (slot, n) in slots {
            if n > 0 {
                *counts.entry(slot).or_insert(0) += n;
            }
        }
        Self { counts }
    }

    /// Builds a species-0 occupation from per-mode counts.
    pub fn from_mode_counts<I: IntoIterator<Item = (Mode, u32)>>(counts: I) -> Self {
        Self::from_slots(counts.into_iter().map(|(m, n)| (Slot::plain(m), n)))
    }

    /// Count on a mode, summed over species.
    pub fn count_on(&self, mode: Mode) -> u32 {
        self.counts
            .iter()
            .filter(|(slot, _)| slot.mode == mode)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn slot_count(&self, slot: Slot) -> u32 {
        self.counts.get(&slot).copied().unwrap_or(0)
    }

    pub fn slots(&self) -> impl Iterator<Item = (Slot, u32)> + '_ {
        self.counts.iter().map(|(&slot, &n)| (slot, n))
    }

    /// Per-mode counts with species erased, i.e. what the detectors resolve.
    pub fn mode_counts(&self) -> BTreeMap<Mode, u32> {
        let mut out = BTreeMap::new();
        for (slot, n) in self.slots() {
            *out.entry(slot.mode).or_insert(0) += n;
        }
        out
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total count on modes strictly before `mode` in canonical order.
    fn occupied_before(&self, mode: Mode) -> u32 {
        self.counts
            .iter()
            .take_while(|(slot, _)| slot.mode < mode)
            .map(|(_, n)| n)
            .sum()
    }

    fn bumped(&self, slot: Slot) -> Self {
        let mut counts = self.counts.clone();
        *counts.entry(slot).or_insert(0) += 1;
        Self { counts }
    }
}

/// Applies one creation operator to a basis state, returning the new state and
/// the real statistics factor, or `None` when fermion exclusion kills the term.
pub(crate) fn create_in(
    occ: &OccupationState,
    slot: Slot,
    statistics: Statistics,
) -> Option<(OccupationState, f64)> {
    match statistics {
        Statistics::Boson => {
            let n = occ.slot_count(slot);
            Some((occ.bumped(slot), ((n + 1) as f64).sqrt()))
        }
        Statistics::Fermion => {
            if occ.count_on(slot.mode) > 0 {
                return None;
            }
            let sign = if occ.occupied_before(slot.mode).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            Some((occ.bumped(slot), sign))
        }
        Statistics::Distinguishable => Some((occ.bumped(slot), 1.0)),
    }
}

pub(crate) fn accumulate(
    terms: &mut BTreeMap<OccupationState, Complex64>,
    key: OccupationState,
    amp: Complex64,
) {
    use std::collections::btree_map::Entry;
    if amp == Complex64::ZERO {
        return;
    }
    match terms.entry(key) {
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

/// Sparse complex vector over occupation-number basis states.
#[derive(Clone, Debug)]
pub struct StateVector {
    registry: Arc<ModeRegistry>,
    statistics: Statistics,
    terms: BTreeMap<OccupationState, Complex64>,
}

impl StateVector {
    /// The empty Fock space: one term, all counts zero, amplitude 1.
    pub fn vacuum(registry: Arc<ModeRegistry>, statistics: Statistics) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(OccupationState::empty(), Complex64::new(1.0, 0.0));
        Self {
            registry,
            statistics,
            terms,
        }
    }

    /// The zero vector (no terms).
    pub fn zero(registry: Arc<ModeRegistry>, statistics: Statistics) -> Self {
        Self {
            registry,
            statistics,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn with_terms(
        registry: Arc<ModeRegistry>,
        statistics: Statistics,
        terms: BTreeMap<OccupationState, Complex64>,
    ) -> Self {
        let state = Self {
            registry,
            statistics,
            terms,
        };
        debug_assert!(state.fermion_counts_ok());
        state
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationState, Complex64)> + '_ {
        self.terms.iter().map(|(occ, &amp)| (occ, amp))
    }

    pub fn amplitude(&self, occ: &OccupationState) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total particle number shared by all terms; `None` for the zero vector.
    pub fn particle_number(&self) -> Result<Option<u32>> {
        let mut iter = self.terms.keys();
        let first = match iter.next() {
            Some(occ) => occ.total(),
            None => return Ok(None),
        };
        if iter.any(|occ| occ.total() != first) {
            return Err(Error::MixedSector);
        }
        Ok(Some(first))
    }

    /// Applies the creation operator for `mode` to every term.
    ///
    /// Bosons gain a sqrt(n+1) factor; fermions acquire the canonical-order
    /// anticommutation sign, and doubly-created terms drop out (exclusion);
    /// distinguishable particles are tagged with a fresh species per call.
    pub fn create(&self, mode: Mode) -> Result<StateVector> {
        self.registry.check(mode)?;
        let species = match self.statistics {
            Statistics::Distinguishable => self.particle_number()?.unwrap_or(0) as u16,
            _ => 0,
        };
        let slot = Slot::new(mode, species);
        let mut terms = BTreeMap::new();
        for (occ, amp) in self.terms() {
            if let Some((new_occ, factor)) = create_in(occ, slot, self.statistics) {
                accumulate(&mut terms, new_occ, amp * factor);
            }
        }
        Ok(Self::with_terms(
            self.registry.clone(),
            self.statistics,
            terms,
        ))
    }

    /// Conjugate-linear in `self`, linear in `other`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        self.check_compatible(other)?;
        let mut sum = Complex64::ZERO;
        for (occ, amp) in self.terms() {
            sum += amp.conj() * other.amplitude(occ);
        }
        Ok(sum)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> StateVector {
        let terms = if c == Complex64::ZERO {
            BTreeMap::new()
        } else {
            self.terms
                .iter()
                .map(|(occ, amp)| (occ.clone(), amp * c))
                .collect()
        };
        Self {
            registry: self.registry.clone(),
            statistics: self.statistics,
            terms,
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (occ, amp) in other.terms() {
            accumulate(&mut terms, occ.clone(), amp);
        }
        Ok(Self {
            registry: self.registry.clone(),
            statistics: self.statistics,
            terms,
        })
    }

    /// Drops terms with |amplitude| < `tol`.
    pub fn prune(&self, tol: f64) -> StateVector {
        let terms = self
            .terms
            .iter()
            .filter(|(_, amp)| amp.norm() >= tol)
            .map(|(occ, amp)| (occ.clone(), *amp))
            .collect();
        Self {
            registry: self.registry.clone(),
            statistics: self.statistics,
            terms,
        }
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// Keeps only the terms selected by `keep`; the post-selection primitive.
    pub fn filter_terms<F: Fn(&OccupationState) -> bool>(&self, keep: F) -> StateVector {
        let terms = self
            .terms
            .iter()
            .filter(|(occ, _)| keep(occ))
            .map(|(occ, amp)| (occ.clone(), *amp))
            .collect();
        Self {
            registry: self.registry.clone(),
            statistics: self.statistics,
            terms,
        }
    }

    fn check_compatible(&self, other: &StateVector) -> Result<()> {
        if self.statistics != other.statistics {
            return Err(Error::StatisticsMismatch);
        }
        if !Arc::ptr_eq(&self.registry, &other.registry) && self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        Ok(())
    }

    fn fermion_counts_ok(&self) -> bool {
        self.statistics != Statistics::Fermion
            || self
                .terms
                .keys()
                .all(|occ| occ.slots().all(|(_, n)| n <= 1))
    }
}
