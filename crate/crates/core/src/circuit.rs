//! Mode transformations: phase shifters, beam splitters, and general mode
//! unitaries applied to [`StateVector`]s by creation-operator substitution.
//!
//! A unitary maps each creation operator on input mode j to the sum over
//! output modes k of `matrix[k][j]` times a creation operator on mode k. Terms
//! are rebuilt through the statistics-aware primitive in [`crate::fock`], so
//! boson factors and fermion signs never need special-casing here.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    accumulate, create_in, Mode, ModeRegistry, Slot, StateVector, DEFAULT_PRUNE_TOLERANCE,
};

/// Largest deviation from U*U^dag = I accepted as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Square complex matrix routing amplitudes from `inputs` to `outputs`
/// (row = output index, column = input index).
///
/// With `inputs == outputs` this is an ordinary in-place mode unitary; with
/// disjoint lists it moves particles between stages of a feed-forward layout.
#[derive(Clone, Debug)]
pub struct ModeUnitary {
    inputs: Vec<Mode>,
    outputs: Vec<Mode>,
    matrix: Vec<Complex64>,
    dim: usize,
}

impl ModeUnitary {
    pub fn new(inputs: Vec<Mode>, outputs: Vec<Mode>, matrix: Vec<Complex64>) -> Result<Self> {
        let dim = inputs.len();
        if outputs.len() != dim || matrix.len() != dim * dim || dim == 0 {
            return Err(Error::BadMatrixShape);
        }
        for (i, m) in inputs.iter().enumerate() {
            if inputs[..i].contains(m) {
                return Err(Error::RepeatedMode(format!("input #{}", m.index())));
            }
        }
        for (i, m) in outputs.iter().enumerate() {
            if outputs[..i].contains(m) {
                return Err(Error::RepeatedMode(format!("output #{}", m.index())));
            }
        }
        check_unitary(&matrix, dim)?;
        Ok(Self {
            inputs,
            outputs,
            matrix,
            dim,
        })
    }

    /// Unitary acting on `modes` in place.
    pub fn in_place(modes: Vec<Mode>, matrix: Vec<Complex64>) -> Result<Self> {
        Self::new(modes.clone(), modes, matrix)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inputs(&self) -> &[Mode] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Mode] {
        &self.outputs
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    /// Applies the unitary, pruning at the default tolerance.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.apply_pruned(state, DEFAULT_PRUNE_TOLERANCE)
    }

    pub fn apply_pruned(&self, state: &StateVector, tol: f64) -> Result<StateVector> {
        let registry = state.registry();
        for &m in self.inputs.iter().chain(&self.outputs) {
            registry.check(m)?;
        }
        let statistics = state.statistics();
        let mut terms = BTreeMap::new();
        for (occ, amp) in state.terms() {
            // Positional creation-operator list for this term, in the canonical
            // product order, with the boson 1/sqrt(n!) normalization pulled out.
            let mut ops: Vec<Slot> = Vec::new();
            let mut prefactor = Complex64::new(1.0, 0.0) * amp;
            for (slot, n) in occ.slots() {
                for _ in 0..n {
                    ops.push(slot);
                }
                prefactor /= factorial(n).sqrt();
            }
            // Expand each substituted operator; untouched modes pass through.
            let mut expanded: Vec<(Vec<Slot>, Complex64)> = vec![(Vec::new(), prefactor)];
            for op in &ops {
                if let Some(col) = self.inputs.iter().position(|&m| m == op.mode) {
                    let mut next = Vec::with_capacity(expanded.len() * self.dim);
                    for row in 0..self.dim {
                        let coeff = self.entry(row, col);
                        if coeff == Complex64::ZERO {
                            continue;
                        }
                        for (seq, c) in &expanded {
                            let mut seq = seq.clone();
                            seq.push(Slot::new(self.outputs[row], op.species));
                            next.push((seq, c * coeff));
                        }
                    }
                    expanded = next;
                } else {
                    if self.outputs.contains(&op.mode) {
                        return Err(Error::OccupiedOutput(registry.describe(op.mode)));
                    }
                    for (seq, _) in &mut expanded {
                        seq.push(*op);
                    }
                }
            }
            // Rebuild each summand: the list reads left to right as an operator
            // product, so apply it to the vacuum from the right end.
            for (seq, c) in expanded {
                let mut new_occ = crate::fock::OccupationState::empty();
                let mut factor = 1.0;
                let mut survives = true;
                for slot in seq.iter().rev() {
                    match create_in(&new_occ, *slot, statistics) {
                        Some((occ, f)) => {
                            new_occ = occ;
                            factor *= f;
                        }
                        None => {
                            survives = false;
                            break;
                        }
                    }
                }
                if survives {
                    accumulate(&mut terms, new_occ, c * factor);
                }
            }
        }
        Ok(StateVector::with_terms(registry.clone(), statistics, terms).prune(tol))
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_unitary(matrix: &[Complex64], dim: usize) -> Result<()> {
    let mut max_dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let mut dot = Complex64::ZERO;
            for k in 0..dim {
                dot += matrix[i * dim + k] * matrix[j * dim + k].conj();
            }
            let expected = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((dot - expected).norm());
        }
    }
    if max_dev > UNITARITY_TOLERANCE {
        return Err(Error::NotUnitary(max_dev));
    }
    Ok(())
}

/// Multiplies each term's amplitude by e^{i*phase*n}, n the count on `mode`.
pub fn phase_shift(state: &StateVector, mode: Mode, phase: f64) -> Result<StateVector> {
    state.registry().check(mode)?;
    let mut terms = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let n = occ.count_on(mode);
        let rotated = amp * Complex64::from_polar(1.0, phase * n as f64);
        accumulate(&mut terms, occ.clone(), rotated);
    }
    Ok(StateVector::with_terms(
        state.registry().clone(),
        state.statistics(),
        terms,
    ))
}

/// The two fixed 50/50 beam-splitter matrices (row = output, column = input).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsConvention {
    /// in-top -> (out-top + out-bottom)/sqrt2, in-bottom -> (out-top - out-bottom)/sqrt2.
    PlusMinus,
    /// in-top -> (out-top - out-bottom)/sqrt2; the in-bottom column is the real
    /// orthonormal completion (1, 1)/sqrt2 and only ever carries vacuum here.
    MinusFirst,
}

impl BsConvention {
    pub fn matrix(self) -> [Complex64; 4] {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            BsConvention::PlusMinus => [r, r, r, -r],
            BsConvention::MinusFirst => [r, r, -r, r],
        }
    }
}

/// One step of a mode circuit.
#[derive(Clone, Debug)]
pub enum CircuitElement {
    PhaseShift {
        mode: Mode,
        phase: f64,
    },
    BeamSplitter {
        in_top: Mode,
        in_bottom: Mode,
        out_top: Mode,
        out_bottom: Mode,
        convention: BsConvention,
    },
    Custom(ModeUnitary),
}

impl CircuitElement {
    fn modes(&self) -> Vec<Mode> {
        match self {
            CircuitElement::PhaseShift { mode, .. } => vec![*mode],
            CircuitElement::BeamSplitter {
                in_top,
                in_bottom,
                out_top,
                out_bottom,
                ..
            } => vec![*in_top, *in_bottom, *out_top, *out_bottom],
            CircuitElement::Custom(u) => u.inputs().iter().chain(u.outputs()).copied().collect(),
        }
    }

    fn unitary(&self) -> Result<Option<ModeUnitary>> {
        match self {
            CircuitElement::PhaseShift { .. } => Ok(None),
            CircuitElement::BeamSplitter {
                in_top,
                in_bottom,
                out_top,
                out_bottom,
                convention,
            } => Ok(Some(ModeUnitary::new(
                vec![*in_top, *in_bottom],
                vec![*out_top, *out_bottom],
                convention.matrix().to_vec(),
            )?)),
            CircuitElement::Custom(u) => Ok(Some(u.clone())),
        }
    }
}

/// Applies a single element, pruning unitary outputs at `tol`.
pub fn apply_element(
    state: &StateVector,
    element: &CircuitElement,
    tol: f64,
) -> Result<StateVector> {
    match element {
        CircuitElement::PhaseShift { mode, phase } => phase_shift(state, *mode, *phase),
        other => other
            .unitary()?
            .expect("non-phase elements carry a unitary")
            .apply_pruned(state, tol),
    }
}

/// Ordered list of elements over one registry.
#[derive(Clone, Debug)]
pub struct Circuit {
    registry: Arc<ModeRegistry>,
    elements: Vec<CircuitElement>,
    prune_tolerance: f64,
}

impl Circuit {
    pub fn new(registry: Arc<ModeRegistry>) -> Self {
        Self {
            registry,
            elements: Vec::new(),
            prune_tolerance: DEFAULT_PRUNE_TOLERANCE,
        }
    }

    pub fn with_prune_tolerance(mut self, tol: f64) -> Self {
        self.prune_tolerance = tol;
        self
    }

    pub fn push(&mut self, element: CircuitElement) -> Result<()> {
        for mode in element.modes() {
            self.registry.check(mode)?;
        }
        self.elements.push(element);
        Ok(())
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    pub fn prune_tolerance(&self) -> f64 {
        self.prune_tolerance
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Folds every element over `state` in list order.
    pub fn run(&self, state: &StateVector) -> Result<StateVector> {
        if state.registry().as_ref() != self.registry.as_ref() {
            return Err(Error::RegistryMismatch);
        }
        let mut current = state.clone();
        for element in &self.elements {
            current = apply_element(&current, element, self.prune_tolerance)?;
        }
        Ok(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{OccupationState, Statistics};

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn registry(labels: &[&str]) -> Arc<ModeRegistry> {
        Arc::new(ModeRegistry::new(labels.iter().copied()).unwrap())
    }

    fn identity(dim: usize) -> Vec<Complex64> {
        let mut m = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = c(1.0, 0.0);
        }
        m
    }

    #[test]
    fn phase_shift_identity_and_negation() {
        let reg = registry(&["a", "b"]);
        let a = reg.mode("a").unwrap();
        let one = StateVector::vacuum(reg.clone(), Statistics::Boson)
            .create(a)
            .unwrap();
        let same = phase_shift(&one, a, 0.0).unwrap();
        let key = OccupationState::from_mode_counts([(a, 1)]);
        assert!(close(same.amplitude(&key), c(1.0, 0.0)));
        let negated = phase_shift(&one, a, std::f64::consts::PI).unwrap();
        assert!(close(negated.amplitude(&key), c(-1.0, 0.0)));
    }

    #[test]
    fn phase_shift_counts_particles() {
        // Two bosons on the shifted mode pick up the phase twice.
        let reg = registry(&["a"]);
        let a = reg.mode("a").unwrap();
        let two = StateVector::vacuum(reg, Statistics::Boson)
            .create(a)
            .unwrap()
            .create(a)
            .unwrap();
        let shifted = phase_shift(&two, a, std::f64::consts::FRAC_PI_2).unwrap();
        let key = OccupationState::from_mode_counts([(a, 2)]);
        assert!(close(shifted.amplitude(&key), c(-(2.0_f64.sqrt()), 0.0)));
    }

    #[test]
    fn identity_unitary_leaves_state_unchanged() {
        let reg = registry(&["a", "b"]);
        let a = reg.mode("a").unwrap();
        let b = reg.mode("b").unwrap();
        let u = ModeUnitary::in_place(vec![a, b], identity(2)).unwrap();
        for stats in Statistics::ALL {
            let s = StateVector::vacuum(reg.clone(), stats)
                .create(a)
                .unwrap()
                .create(b)
                .unwrap();
            let out = u.apply(&s).unwrap();
            assert_eq!(out.num_terms(), s.num_terms());
            for (occ, amp) in s.terms() {
                assert!(close(out.amplitude(occ), amp));
            }
        }
    }

    #[test]
    fn plus_minus_splits_a_single_particle_evenly() {
        let reg = registry(&["A", "B", "D1", "D2"]);
        let a = reg.mode("A").unwrap();
        let b = reg.mode("B").unwrap();
        let d1 = reg.mode("D1").unwrap();
        let d2 = reg.mode("D2").unwrap();
        let u = ModeUnitary::new(
            vec![a, b],
            vec![d1, d2],
            BsConvention::PlusMinus.matrix().to_vec(),
        )
        .unwrap();
        let s = StateVector::vacuum(reg, Statistics::Boson)
            .create(a)
            .unwrap();
        let out = u.apply(&s).unwrap();
        assert!(close(
            out.amplitude(&OccupationState::from_mode_counts([(d1, 1)])),
            c(R, 0.0)
        ));
        assert!(close(
            out.amplitude(&OccupationState::from_mode_counts([(d2, 1)])),
            c(R, 0.0)
        ));
    }

    #[test]
    fn minus_first_routes_the_top_input_with_a_minus() {
        let reg = registry(&["L", "L0", "A", "A'"]);
        let l = reg.mode("L").unwrap();
        let l0 = reg.mode("L0").unwrap();
        let a = reg.mode("A").unwrap();
        let ap = reg.mode("A'").unwrap();
        let u = ModeUnitary::new(
            vec![l, l0],
            vec![a, ap],
            BsConvention::MinusFirst.matrix().to_vec(),
        )
        .unwrap();
        let s = StateVector::vacuum(reg, Statistics::Boson)
            .create(l)
            .unwrap();
        let out = u.apply(&s).unwrap();
        assert!(close(
            out.amplitude(&OccupationState::from_mode_counts([(a, 1)])),
            c(R, 0.0)
        ));
        assert!(close(
            out.amplitude(&OccupationState::from_mode_counts([(ap, 1)])),
            c(-R, 0.0)
        ));
    }

    #[test]
    fn boson_pair_bunches_at_a_balanced_splitter() {
        // One particle per input port: the split outcomes cancel and the pair
        // exits together, amplitude +-1/sqrt2 on the doubly occupied ports.
        let reg = registry(&["A", "B", "D1", "D2"]);
        let a = reg.mode("A").unwrap();
        let b = reg.mode("B").unwrap();
        let d1 = reg.mode("D1").unwrap();
        let d2 = reg.mode("D2").unwrap();
        let u = ModeUnitary::new(
            vec![a, b],
            vec![d1, d2],
            BsConvention::PlusMinus.matrix().to_vec(),
        )
        .unwrap();
        let s = StateVector::vacuum(reg, Statistics::Boson)
            .create(a)
            .unwrap()
            .create(b)
            .unwrap();
        let out = u.apply(&s).unwrap();
        assert!(close(
            out.amplitude(&OccupationState::from_mode_counts([(d1, 2)])),
            c(R, 0.0)
        ));
        assert!(close(
            out.amplitude(&OccupationState::from_mode_counts([(d2, 2)])),
            c(-R, 0.0)
        ));
        assert!(close(
            out.amplitude(&OccupationState::from_mode_counts([(d1, 1), (d2, 1)])),
            Complex64::ZERO
        ));
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fermion_pair_always_splits() {
        let reg = registry(&["A", "B", "D1", "D2"]);
        let a = reg.mode("A").unwrap();
        let b = reg.mode("B").unwrap();
        let d1 = reg.mode("D1").unwrap();
        let d2 = reg.mode("D2").unwrap();
        let u = ModeUnitary::new(
            vec![a, b],
            vec![d1, d2],
            BsConvention::PlusMinus.matrix().to_vec(),
        )
        .unwrap();
        let s = StateVector::vacuum(reg, Statistics::Fermion)
            .create(a)
            .unwrap()
            .create(b)
            .unwrap();
        let out = u.apply(&s).unwrap();
        let split = OccupationState::from_mode_counts([(d1, 1), (d2, 1)]);
        assert_eq!(out.num_terms(), 1);
        assert!((out.amplitude(&split).norm() - 1.0).abs() < 1e-12);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_unitary_matrices_are_rejected() {
        let reg = registry(&["a", "b"]);
        let a = reg.mode("a").unwrap();
        let b = reg.mode("b").unwrap();
        let err = ModeUnitary::in_place(
            vec![a, b],
            vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotUnitary(_)));
    }

    #[test]
    fn occupied_output_mode_is_an_error() {
        let reg = registry(&["in1", "in2", "out1", "out2"]);
        let i1 = reg.mode("in1").unwrap();
        let i2 = reg.mode("in2").unwrap();
        let o1 = reg.mode("out1").unwrap();
        let o2 = reg.mode("out2").unwrap();
        let u = ModeUnitary::new(
            vec![i1, i2],
            vec![o1, o2],
            BsConvention::PlusMinus.matrix().to_vec(),
        )
        .unwrap();
        let s = StateVector::vacuum(reg, Statistics::Boson)
            .create(o1)
            .unwrap();
        assert_eq!(
            u.apply(&s).unwrap_err(),
            Error::OccupiedOutput("out1".into())
        );
    }

    #[test]
    fn empty_circuit_and_full_turn_phase_are_identities() {
        let reg = registry(&["a"]);
        let a = reg.mode("a").unwrap();
        let one = StateVector::vacuum(reg.clone(), Statistics::Boson)
            .create(a)
            .unwrap();
        let empty = Circuit::new(reg.clone());
        let out = empty.run(&one).unwrap();
        let key = OccupationState::from_mode_counts([(a, 1)]);
        assert!(close(out.amplitude(&key), c(1.0, 0.0)));

        let mut two_pis = Circuit::new(reg);
        two_pis
            .push(CircuitElement::PhaseShift {
                mode: a,
                phase: std::f64::consts::PI,
            })
            .unwrap();
        two_pis
            .push(CircuitElement::PhaseShift {
                mode: a,
                phase: std::f64::consts::PI,
            })
            .unwrap();
        let out = two_pis.run(&one).unwrap();
        assert!(close(out.amplitude(&key), c(1.0, 0.0)));
    }

    #[test]
    fn circuit_rejects_foreign_states_and_modes() {
        let reg = registry(&["a"]);
        let other = registry(&["z", "y"]);
        let circuit = Circuit::new(reg);
        let s = StateVector::vacuum(other.clone(), Statistics::Boson);
        assert_eq!(circuit.run(&s).unwrap_err(), Error::RegistryMismatch);

        let mut c2 = Circuit::new(registry(&["a"]));
        let stray = other.mode("y").unwrap();
        let err = c2
            .push(CircuitElement::PhaseShift {
                mode: stray,
                phase: 0.0,
            })
            .unwrap_err();
        assert!(matches!(err, Error::UnregisteredMode(_)));
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        fn unit_complex() -> impl Strategy<Value = Complex64> {
            (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
        }

        /// Gram-Schmidt orthonormalization of a random complex 2x2 matrix.
        fn unitary_2x2() -> impl Strategy<Value = Vec<Complex64>> {
            proptest::collection::vec(unit_complex(), 4).prop_filter_map(
                "columns must be independent",
                |m| {
                    let c0 = [m[0], m[2]];
                    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
                    if n0 < 1e-3 {
                        return None;
                    }
                    let c0 = [c0[0] / n0, c0[1] / n0];
                    let mut c1 = [m[1], m[3]];
                    let overlap = c0[0].conj() * c1[0] + c0[1].conj() * c1[1];
                    c1 = [c1[0] - overlap * c0[0], c1[1] - overlap * c0[1]];
                    let n1 = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
                    if n1 < 1e-3 {
                        return None;
                    }
                    let c1 = [c1[0] / n1, c1[1] / n1];
                    Some(vec![c0[0], c1[0], c0[1], c1[1]])
                },
            )
        }

        fn two_particle_state(
            reg: &Arc<ModeRegistry>,
            stats: Statistics,
            picks: (usize, usize),
        ) -> StateVector {
            let modes: Vec<Mode> = reg.modes().collect();
            let vac = StateVector::vacuum(reg.clone(), stats);
            let first = modes[picks.0 % modes.len()];
            let mut second = modes[picks.1 % modes.len()];
            if stats == Statistics::Fermion && second == first {
                second = modes[(picks.1 + 1) % modes.len()];
            }
            vac.create(first).unwrap().create(second).unwrap()
        }

        proptest! {
            #[test]
            fn unitaries_preserve_norm(
                m in unitary_2x2(),
                picks in (0..3usize, 0..3usize),
                stats_idx in 0..3usize,
            ) {
                let reg = registry(&["a", "b", "c"]);
                let a = reg.mode("a").unwrap();
                let b = reg.mode("b").unwrap();
                let stats = Statistics::ALL[stats_idx];
                let s = two_particle_state(&reg, stats, picks).normalized().unwrap();
                let u = ModeUnitary::in_place(vec![a, b], m).unwrap();
                let out = u.apply_pruned(&s, 0.0).unwrap();
                prop_assert!((out.norm() - s.norm()).abs() < 1e-12);
            }

            #[test]
            fn sequential_application_equals_matrix_product(
                mu in unitary_2x2(),
                mv in unitary_2x2(),
                picks in (0..2usize, 0..2usize),
                stats_idx in 0..3usize,
            ) {
                let reg = registry(&["a", "b"]);
                let a = reg.mode("a").unwrap();
                let b = reg.mode("b").unwrap();
                let stats = Statistics::ALL[stats_idx];
                let s = two_particle_state(&reg, stats, picks).normalized().unwrap();
                let u = ModeUnitary::in_place(vec![a, b], mu.clone()).unwrap();
                let v = ModeUnitary::in_place(vec![a, b], mv.clone()).unwrap();
                let stepped = v.apply_pruned(&u.apply_pruned(&s, 0.0).unwrap(), 0.0).unwrap();
                // product[i][j] = sum_k mv[i][k] * mu[k][j]
                let mut product = vec![Complex64::ZERO; 4];
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            product[i * 2 + j] += mv[i * 2 + k] * mu[k * 2 + j];
                        }
                    }
                }
                let vu = ModeUnitary::in_place(vec![a, b], product).unwrap();
                let direct = vu.apply_pruned(&s, 0.0).unwrap();
                let diff = stepped.add(&direct.scale(Complex64::new(-1.0, 0.0))).unwrap();
                prop_assert!(diff.norm() < 1e-9);
            }
        }
    }
}
