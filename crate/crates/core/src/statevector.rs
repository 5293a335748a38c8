//! Dense state-vector algebra for small qubit registers.
//!
//! Registers are indexed with qubit 1 as the *most significant* bit of the
//! amplitude index, so the basis ket |q1 q2 .. qn> sits at index
//! q1*2^(n-1) + .. + qn and amplitude vectors read off ket strings directly.
//! States carry their squared norm explicitly so unnormalized branch states
//! are representable; collapse operations return the branch probability and
//! a renormalized state separately.

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance for validating that an input matrix is unitary.
pub const UNITARY_TOL: f64 = 1e-9;

/// Probabilities below this threshold are treated as an impossible branch.
/// Genuine branch probabilities in this crate are far larger; values near
/// 1e-33 arise only from floating-point images of exact zeros.
pub const IMPOSSIBLE_PROBABILITY: f64 = 1e-24;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StateError {
    #[error("number of qubits must be at least 1")]
    EmptyRegister,
    #[error("basis label `{label}` repeated in assignment list")]
    DuplicateLabel { label: String },
    #[error("basis label `{label}` has length {found}, expected {expected}")]
    LabelLength {
        label: String,
        expected: usize,
        found: usize,
    },
    #[error("basis label `{label}` contains characters other than 0/1")]
    MalformedLabel { label: String },
    #[error("amplitude vector has length {found}, expected {expected}")]
    BadAmplitudeCount { expected: usize, found: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("both operands address qubit {qubit}")]
    QubitClash { qubit: usize },
    #[error("matrix is not unitary (max deviation {deviation:.3e} from U\u{2020}U = I)")]
    NotUnitary { deviation: f64 },
    #[error("requested branch has probability {probability}: impossible outcome")]
    ImpossibleBranch { probability: f64 },
    #[error("expected a {expected}-qubit state, got {found} qubits")]
    WrongQubitCount { expected: usize, found: usize },
    #[error("state is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("dimension mismatch: {left}-qubit vs {right}-qubit state")]
    DimensionMismatch { left: usize, right: usize },
}

/// A measurement outcome in a two-valued basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Outcome {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Outcome {
    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// The single-qubit measurement basis {cos t |0> + sin t |1>, sin t |0> - cos t |1>},
/// orthonormal for every angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedBasis {
    pub theta: f64,
}

impl RotatedBasis {
    pub fn new(theta: f64) -> Self {
        RotatedBasis { theta }
    }

    /// Components (on |0>, on |1>) of the basis vector for `outcome`.
    pub fn components(self, outcome: Outcome) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        match outcome {
            Outcome::Plus => [c, s],
            Outcome::Minus => [s, -c],
        }
    }
}

/// The four maximally entangled two-qubit basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi_plus",
            BellOutcome::PhiMinus => "phi_minus",
            BellOutcome::PsiPlus => "psi_plus",
            BellOutcome::PsiMinus => "psi_minus",
        }
    }
}

/// Probabilities of the four Bell outcomes; always a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDistribution {
    probs: [f64; 4],
}

impl BellDistribution {
    pub fn probability(&self, outcome: BellOutcome) -> f64 {
        self.probs[outcome as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (BellOutcome, f64)> + '_ {
        BellOutcome::ALL
            .iter()
            .map(|&o| (o, self.probs[o as usize]))
    }

    /// Outcome with the largest probability.
    pub fn most_likely(&self) -> (BellOutcome, f64) {
        let mut best = (BellOutcome::PhiPlus, self.probs[0]);
        for (o, p) in self.iter() {
            if p > best.1 {
                best = (o, p);
            }
        }
        best
    }
}

fn mat_mul_adjoint<const N: usize>(m: &[[Complex64; N]; N]) -> f64 {
    // max |(U U†)_ij - delta_ij|
    let mut dev: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            let acc: Complex64 = m[i].iter().zip(&m[j]).map(|(a, b)| a * b.conj()).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((acc - target).norm());
        }
    }
    dev
}

/// A 2x2 unitary, row-major over the computational basis (|0>, |1>).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneQubitUnitary {
    entries: [[Complex64; 2]; 2],
}

impl OneQubitUnitary {
    pub fn new(entries: [[Complex64; 2]; 2]) -> Result<Self, StateError> {
        let deviation = mat_mul_adjoint(&entries);
        if deviation > UNITARY_TOL {
            return Err(StateError::NotUnitary { deviation });
        }
        Ok(OneQubitUnitary { entries })
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    pub fn identity() -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        OneQubitUnitary {
            entries: [[o, z], [z, o]],
        }
    }

    pub fn pauli_x() -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        OneQubitUnitary {
            entries: [[z, o], [o, z]],
        }
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        OneQubitUnitary {
            entries: [[z, -i], [i, z]],
        }
    }

    pub fn pauli_z() -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        OneQubitUnitary {
            entries: [[o, z], [z, -o]],
        }
    }
}

/// A 4x4 unitary over an ordered qubit pair (a, b).
///
/// Row/column order is (|00>, |10>, |01>, |11>) where the first bit belongs
/// to qubit `a` and the second to qubit `b`, i.e. the first listed qubit
/// varies fastest. `apply_two_qubit` consumes matrices in this order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitUnitary {
    entries: [[Complex64; 4]; 4],
}

impl TwoQubitUnitary {
    pub fn new(entries: [[Complex64; 4]; 4]) -> Result<Self, StateError> {
        let deviation = mat_mul_adjoint(&entries);
        if deviation > UNITARY_TOL {
            return Err(StateError::NotUnitary { deviation });
        }
        Ok(TwoQubitUnitary { entries })
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.entries
    }

    pub fn identity() -> Self {
        let mut entries = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Complex64::new(1.0, 0.0);
        }
        TwoQubitUnitary { entries }
    }
}

/// Dense complex amplitudes over an n-qubit register.
///
/// Qubit 1 is the most significant index bit. The squared norm is carried
/// explicitly and recomputed whenever amplitudes change, so it always equals
/// the amplitude sum of squares to machine precision; states need not be
/// normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
    norm_sq: f64,
}

/// Parse a 0/1 ket string into the amplitude index it names.
pub fn basis_index(label: &str, num_qubits: usize) -> Result<usize, StateError> {
    if label.len() != num_qubits {
        return Err(StateError::LabelLength {
            label: label.to_string(),
            expected: num_qubits,
            found: label.len(),
        });
    }
    let mut idx = 0usize;
    for ch in label.chars() {
        idx <<= 1;
        match ch {
            '0' => {}
            '1' => idx |= 1,
            _ => {
                return Err(StateError::MalformedLabel {
                    label: label.to_string(),
                })
            }
        }
    }
    Ok(idx)
}

impl StateVector {
    /// Build a state from sparse (ket label, amplitude) assignments.
    /// The result keeps the given amplitudes as-is; it is not normalized.
    ///
    /// ```
    /// use densecode::{Complex64, StateVector};
    ///
    /// let s = StateVector::make_state(
    ///     2,
    ///     &[
    ///         ("00", Complex64::new(0.6, 0.0)),
    ///         ("11", Complex64::new(0.8, 0.0)),
    ///     ],
    /// )
    /// .unwrap();
    /// assert!((s.norm_sq() - 1.0).abs() < 1e-12);
    /// assert_eq!(s.amplitude(0b11), Complex64::new(0.8, 0.0));
    /// ```
    pub fn make_state(
        num_qubits: usize,
        assignments: &[(&str, Complex64)],
    ) -> Result<Self, StateError> {
        if num_qubits == 0 {
            return Err(StateError::EmptyRegister);
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        let mut seen = vec![false; 1 << num_qubits];
        for (label, amp) in assignments {
            let idx = basis_index(label, num_qubits)?;
            if seen[idx] {
                return Err(StateError::DuplicateLabel {
                    label: label.to_string(),
                });
            }
            seen[idx] = true;
            amps[idx] = *amp;
        }
        Ok(Self::from_amplitudes_unchecked(num_qubits, amps))
    }

    /// Build a state from a full amplitude vector of length 2^n.
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self, StateError> {
        if num_qubits == 0 {
            return Err(StateError::EmptyRegister);
        }
        if amps.len() != 1 << num_qubits {
            return Err(StateError::BadAmplitudeCount {
                expected: 1 << num_qubits,
                found: amps.len(),
            });
        }
        Ok(Self::from_amplitudes_unchecked(num_qubits, amps))
    }

    fn from_amplitudes_unchecked(num_qubits: usize, amps: Vec<Complex64>) -> Self {
        let norm_sq = amps.iter().map(|a| a.norm_sqr()).sum();
        StateVector {
            num_qubits,
            amps,
            norm_sq,
        }
    }

    /// The two-qubit Bell state for `outcome`.
    pub fn bell(outcome: BellOutcome) -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let assignments: [(&str, Complex64); 2] = match outcome {
            BellOutcome::PhiPlus => [("00", r), ("11", r)],
            BellOutcome::PhiMinus => [("00", r), ("11", -r)],
            BellOutcome::PsiPlus => [("01", r), ("10", r)],
            BellOutcome::PsiMinus => [("01", r), ("10", -r)],
        };
        Self::make_state(2, &assignments).expect("fixed labels are valid")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn check_qubit(&self, qubit: usize) -> Result<usize, StateError> {
        if qubit == 0 || qubit > self.num_qubits {
            return Err(StateError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        // bit position counted from the least significant end
        Ok(self.num_qubits - qubit)
    }

    /// Apply a single-qubit unitary to the indicated tensor factor.
    pub fn apply_one_qubit(
        &self,
        qubit: usize,
        u: &OneQubitUnitary,
    ) -> Result<StateVector, StateError> {
        let bit = self.check_qubit(qubit)?;
        let mask = 1usize << bit;
        let m = u.entries();
        let mut amps = self.amps.clone();
        for i0 in 0..self.amps.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let a0 = self.amps[i0];
            let a1 = self.amps[i1];
            amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(Self::from_amplitudes_unchecked(self.num_qubits, amps))
    }

    /// Apply a two-qubit unitary to the ordered pair (qubit_a, qubit_b).
    ///
    /// The matrix acts on the local basis (|00>, |10>, |01>, |11>) over
    /// (qubit_a, qubit_b); see [`TwoQubitUnitary`].
    pub fn apply_two_qubit(
        &self,
        qubit_a: usize,
        qubit_b: usize,
        u: &TwoQubitUnitary,
    ) -> Result<StateVector, StateError> {
        if qubit_a == qubit_b {
            return Err(StateError::QubitClash { qubit: qubit_a });
        }
        let bit_a = self.check_qubit(qubit_a)?;
        let bit_b = self.check_qubit(qubit_b)?;
        let mask_a = 1usize << bit_a;
        let mask_b = 1usize << bit_b;
        let m = u.entries();
        let mut amps = self.amps.clone();
        for base in 0..self.amps.len() {
            if base & mask_a != 0 || base & mask_b != 0 {
                continue;
            }
            // local index: qubit_a bit + 2 * qubit_b bit
            let idx = [base, base | mask_a, base | mask_b, base | mask_a | mask_b];
            let old = [
                self.amps[idx[0]],
                self.amps[idx[1]],
                self.amps[idx[2]],
                self.amps[idx[3]],
            ];
            for row in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, &val) in old.iter().enumerate() {
                    acc += m[row][col] * val;
                }
                amps[idx[row]] = acc;
            }
        }
        Ok(Self::from_amplitudes_unchecked(self.num_qubits, amps))
    }

    /// Tensor an ancilla prepared in |0> onto the register. The ancilla
    /// becomes the new least significant qubit (index n+1).
    pub fn attach_ancilla(&self) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len() * 2];
        for (i, &a) in self.amps.iter().enumerate() {
            amps[i << 1] = a;
        }
        Self::from_amplitudes_unchecked(self.num_qubits + 1, amps)
    }

    fn project_components(
        &self,
        qubit: usize,
        v0: f64,
        v1: f64,
    ) -> Result<(f64, StateVector), StateError> {
        let bit = self.check_qubit(qubit)?;
        let low_mask = (1usize << bit) - 1;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len() / 2];
        for (r, slot) in amps.iter_mut().enumerate() {
            let i0 = ((r >> bit) << (bit + 1)) | (r & low_mask);
            let i1 = i0 | (1 << bit);
            *slot = v0 * self.amps[i0] + v1 * self.amps[i1];
        }
        let projected_norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let probability = projected_norm_sq / self.norm_sq;
        if probability < IMPOSSIBLE_PROBABILITY {
            return Err(StateError::ImpossibleBranch { probability: 0.0 });
        }
        let scale = 1.0 / projected_norm_sq.sqrt();
        for a in &mut amps {
            *a *= scale;
        }
        Ok((
            probability,
            Self::from_amplitudes_unchecked(self.num_qubits - 1, amps),
        ))
    }

    /// Project `qubit` onto the rotated-basis vector for `outcome`.
    ///
    /// Returns the outcome probability (relative to the input's squared
    /// norm) and the collapsed state, renormalized to squared norm 1 with
    /// the measured qubit removed from the register. Requesting an outcome
    /// of probability zero is an [`StateError::ImpossibleBranch`] error.
    pub fn project_rotated(
        &self,
        qubit: usize,
        basis: RotatedBasis,
        outcome: Outcome,
    ) -> Result<(f64, StateVector), StateError> {
        let [v0, v1] = basis.components(outcome);
        self.project_components(qubit, v0, v1)
    }

    /// Project `qubit` onto the computational basis state |bit>, removing
    /// the measured qubit as in [`StateVector::project_rotated`].
    pub fn project_computational(
        &self,
        qubit: usize,
        bit: u8,
    ) -> Result<(f64, StateVector), StateError> {
        match bit {
            0 => self.project_components(qubit, 1.0, 0.0),
            _ => self.project_components(qubit, 0.0, 1.0),
        }
    }

    /// Probabilities of the four Bell outcomes for a normalized two-qubit state.
    pub fn bell_probabilities(&self) -> Result<BellDistribution, StateError> {
        if self.num_qubits != 2 {
            return Err(StateError::WrongQubitCount {
                expected: 2,
                found: self.num_qubits,
            });
        }
        if (self.norm_sq - 1.0).abs() > 1e-9 {
            return Err(StateError::NotNormalized {
                norm_sq: self.norm_sq,
            });
        }
        let mut probs = [0.0; 4];
        for outcome in BellOutcome::ALL {
            let bell = StateVector::bell(outcome);
            let amp = bell.overlap(self)?;
            probs[outcome as usize] = amp.norm_sqr();
        }
        Ok(BellDistribution { probs })
    }

    /// Inner product <self|other>.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64, StateError> {
        if self.num_qubits != other.num_qubits {
            return Err(StateError::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Squared overlap with `other`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64, StateError> {
        Ok(self.overlap(other)?.norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    fn assert_amp(state: &StateVector, label: &str, expected: Complex64) {
        let idx = basis_index(label, state.num_qubits()).unwrap();
        let got = state.amplitude(idx);
        assert!(
            (got - expected).norm() < 1e-12,
            "amp |{label}>: {got} vs {expected}"
        );
    }

    #[test]
    fn make_state_single_ket() {
        let s = StateVector::make_state(2, &[("00", c(1.0))]).unwrap();
        assert_eq!(s.amplitude(0), c(1.0));
        assert_close(s.norm_sq(), 1.0, 1e-12);
    }

    #[test]
    fn make_state_four_particle_channel() {
        let s = StateVector::make_state(
            4,
            &[
                ("0000", c(0.5)),
                ("1001", c(0.5)),
                ("0110", c(0.5)),
                ("1111", c(0.5)),
            ],
        )
        .unwrap();
        assert_close(s.norm_sq(), 1.0, 1e-12);
        assert_amp(&s, "1001", c(0.5));
        assert_amp(&s, "0110", c(0.5));
        assert_eq!(s.amplitude(0b1001), c(0.5));
    }

    #[test]
    fn make_state_unnormalized_kept() {
        let s = StateVector::make_state(2, &[("00", c(0.6)), ("11", c(0.8))]).unwrap();
        assert_close(s.norm_sq(), 1.0, 1e-12);
        let t = StateVector::make_state(1, &[("0", c(0.5))]).unwrap();
        assert_close(t.norm_sq(), 0.25, 1e-12);
    }

    #[test]
    fn make_state_rejects_bad_labels() {
        let dup = StateVector::make_state(2, &[("00", c(1.0)), ("00", c(0.5))]);
        assert!(matches!(dup, Err(StateError::DuplicateLabel { .. })));
        let short = StateVector::make_state(3, &[("01", c(1.0))]);
        assert!(matches!(short, Err(StateError::LabelLength { .. })));
        let junk = StateVector::make_state(2, &[("0x", c(1.0))]);
        assert!(matches!(junk, Err(StateError::MalformedLabel { .. })));
    }

    #[test]
    fn pauli_x_maps_phi_plus_to_psi_plus() {
        let phi = StateVector::bell(BellOutcome::PhiPlus);
        let out = phi.apply_one_qubit(1, &OneQubitUnitary::pauli_x()).unwrap();
        let psi = StateVector::bell(BellOutcome::PsiPlus);
        assert_close(psi.fidelity(&out).unwrap(), 1.0, 1e-12);
        assert_amp(&out, "10", c(FRAC_1_SQRT_2));
        assert_amp(&out, "01", c(FRAC_1_SQRT_2));
    }

    #[test]
    fn pauli_y_maps_phi_plus_to_psi_minus_up_to_phase() {
        let phi = StateVector::bell(BellOutcome::PhiPlus);
        let out = phi.apply_one_qubit(1, &OneQubitUnitary::pauli_y()).unwrap();
        let psi_minus = StateVector::bell(BellOutcome::PsiMinus);
        let ov = psi_minus.overlap(&out).unwrap();
        assert_close(ov.norm(), 1.0, 1e-12);
    }

    #[test]
    fn identity_leaves_amplitudes() {
        let s = StateVector::make_state(2, &[("01", c(0.3)), ("10", c(0.4))]).unwrap();
        let out = s.apply_one_qubit(2, &OneQubitUnitary::identity()).unwrap();
        assert_eq!(s.amplitudes(), out.amplitudes());
    }

    #[test]
    fn apply_one_qubit_validates_index() {
        let s = StateVector::bell(BellOutcome::PhiPlus);
        assert!(matches!(
            s.apply_one_qubit(0, &OneQubitUnitary::identity()),
            Err(StateError::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            s.apply_one_qubit(3, &OneQubitUnitary::identity()),
            Err(StateError::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn non_unitary_matrices_rejected() {
        let bad = OneQubitUnitary::new([[c(1.0), c(0.0)], [c(0.0), c(0.5)]]);
        assert!(matches!(bad, Err(StateError::NotUnitary { .. })));
        let mut entries = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = c(1.1);
        }
        assert!(matches!(
            TwoQubitUnitary::new(entries),
            Err(StateError::NotUnitary { .. })
        ));
    }

    fn filter_matrix(tan_gamma: f64) -> TwoQubitUnitary {
        let t = c(tan_gamma);
        let s = c((1.0 - tan_gamma * tan_gamma).sqrt());
        let z = c(0.0);
        let o = c(1.0);
        TwoQubitUnitary::new([[t, z, s, z], [z, o, z, z], [s, z, -t, z], [z, z, z, -o]]).unwrap()
    }

    #[test]
    fn two_qubit_filter_at_unit_ratio_fixes_00() {
        let s = StateVector::make_state(2, &[("00", c(1.0))]).unwrap();
        let out = s.apply_two_qubit(1, 2, &filter_matrix(1.0)).unwrap();
        assert_amp(&out, "00", c(1.0));
        assert_close(out.norm_sq(), 1.0, 1e-12);
    }

    #[test]
    fn two_qubit_filter_at_zero_ratio_exchanges() {
        // first column of the ratio-0 matrix is (0,0,1,0): |00> -> |01>
        let s = StateVector::make_state(2, &[("00", c(1.0))]).unwrap();
        let out = s.apply_two_qubit(1, 2, &filter_matrix(0.0)).unwrap();
        assert_amp(&out, "01", c(1.0));
        assert_amp(&out, "00", c(0.0));
    }

    #[test]
    fn two_qubit_identity_and_clash() {
        let s = StateVector::make_state(2, &[("01", c(0.6)), ("10", c(0.8))]).unwrap();
        let out = s
            .apply_two_qubit(2, 1, &TwoQubitUnitary::identity())
            .unwrap();
        assert_eq!(s.amplitudes(), out.amplitudes());
        assert!(matches!(
            s.apply_two_qubit(1, 1, &TwoQubitUnitary::identity()),
            Err(StateError::QubitClash { .. })
        ));
    }

    #[test]
    fn two_qubit_basis_order_is_first_qubit_fastest() {
        // A matrix sending local |10> -> |11> over (a, b): column 1 -> row 3.
        let z = c(0.0);
        let o = c(1.0);
        let u =
            TwoQubitUnitary::new([[o, z, z, z], [z, z, z, o], [z, z, o, z], [z, o, z, z]]).unwrap();
        // 3-qubit register, act on (qubit 1, qubit 3): |100> has qubit1=1, qubit3=0.
        let s = StateVector::make_state(3, &[("100", c(1.0))]).unwrap();
        let out = s.apply_two_qubit(1, 3, &u).unwrap();
        assert_amp(&out, "101", c(1.0));
    }

    #[test]
    fn attach_ancilla_tensors_zero() {
        let phi = StateVector::bell(BellOutcome::PhiPlus);
        let out = phi.attach_ancilla();
        assert_eq!(out.num_qubits(), 3);
        assert_amp(&out, "000", c(FRAC_1_SQRT_2));
        assert_amp(&out, "110", c(FRAC_1_SQRT_2));
        assert_amp(&out, "001", c(0.0));

        let one = StateVector::make_state(1, &[("1", c(1.0))]).unwrap();
        assert_amp(&one.attach_ancilla(), "10", c(1.0));

        let half = StateVector::make_state(1, &[("0", c(FRAC_1_SQRT_2))]).unwrap();
        assert_close(half.attach_ancilla().norm_sq(), 0.5, 1e-12);
    }

    #[test]
    fn project_rotated_reproduces_three_qubit_branch() {
        // Channel with equal coefficients, qubit 4 measured at pi/4, outcome plus.
        // Oracle: explicit projection of all 16 amplitudes (see tests/common).
        let s = StateVector::make_state(
            4,
            &[
                ("0000", c(0.5)),
                ("1001", c(0.5)),
                ("0110", c(0.5)),
                ("1111", c(0.5)),
            ],
        )
        .unwrap();
        let (p, collapsed) = s
            .project_rotated(4, RotatedBasis::new(FRAC_PI_4), Outcome::Plus)
            .unwrap();
        assert_close(p, 0.5, 1e-12);
        assert_eq!(collapsed.num_qubits(), 3);
        for label in ["000", "100", "011", "111"] {
            assert_amp(&collapsed, label, c(0.5));
        }
        assert_close(collapsed.norm_sq(), 1.0, 1e-12);
    }

    #[test]
    fn project_rotated_certain_outcome() {
        let s = StateVector::make_state(2, &[("00", c(1.0))]).unwrap();
        let (p, collapsed) = s
            .project_rotated(2, RotatedBasis::new(0.0), Outcome::Plus)
            .unwrap();
        assert_close(p, 1.0, 1e-12);
        assert_amp(&collapsed, "0", c(1.0));
    }

    #[test]
    fn project_rotated_impossible_branch() {
        let s = StateVector::make_state(1, &[("0", c(1.0))]).unwrap();
        let err = s
            .project_rotated(1, RotatedBasis::new(0.0), Outcome::Minus)
            .unwrap_err();
        assert_eq!(err, StateError::ImpossibleBranch { probability: 0.0 });
    }

    #[test]
    fn project_outcome_probabilities_sum_to_one() {
        let s = StateVector::make_state(
            3,
            &[
                ("000", c(0.5)),
                ("011", Complex64::new(0.1, 0.7)),
                ("110", c(0.5)),
            ],
        )
        .unwrap();
        let basis = RotatedBasis::new(0.83);
        let (pp, _) = s.project_rotated(2, basis, Outcome::Plus).unwrap();
        let (pm, _) = s.project_rotated(2, basis, Outcome::Minus).unwrap();
        assert_close(pp + pm, 1.0, 1e-12);
    }

    #[test]
    fn bell_probabilities_on_basis_states() {
        let phi = StateVector::bell(BellOutcome::PhiPlus);
        let dist = phi.bell_probabilities().unwrap();
        assert_close(dist.probability(BellOutcome::PhiPlus), 1.0, 1e-12);
        assert_close(dist.probability(BellOutcome::PsiMinus), 0.0, 1e-12);

        // i|psi-> measures as psi- with certainty; global phase invisible.
        let i = Complex64::new(0.0, FRAC_1_SQRT_2);
        let s = StateVector::make_state(2, &[("01", i), ("10", -i)]).unwrap();
        let dist = s.bell_probabilities().unwrap();
        assert_close(dist.probability(BellOutcome::PsiMinus), 1.0, 1e-12);
    }

    #[test]
    fn bell_probabilities_of_partial_overlap() {
        // |(0.6 + 0.8)/sqrt2|^2 = 0.98, |(0.6 - 0.8)/sqrt2|^2 = 0.02
        let s = StateVector::make_state(2, &[("00", c(0.6)), ("11", c(0.8))]).unwrap();
        let dist = s.bell_probabilities().unwrap();
        assert_close(dist.probability(BellOutcome::PhiPlus), 0.98, 1e-12);
        assert_close(dist.probability(BellOutcome::PhiMinus), 0.02, 1e-12);
        assert_close(dist.probability(BellOutcome::PsiPlus), 0.0, 1e-12);
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        assert_close(total, 1.0, 1e-12);
    }

    #[test]
    fn bell_probabilities_validates_input() {
        let three = StateVector::make_state(3, &[("000", c(1.0))]).unwrap();
        assert!(matches!(
            three.bell_probabilities(),
            Err(StateError::WrongQubitCount { .. })
        ));
        let unnorm = StateVector::make_state(2, &[("00", c(0.5))]).unwrap();
        assert!(matches!(
            unnorm.bell_probabilities(),
            Err(StateError::NotNormalized { .. })
        ));
    }

    #[test]
    fn overlap_examples() {
        let phi = StateVector::bell(BellOutcome::PhiPlus);
        let ov = phi.overlap(&phi).unwrap();
        assert!((ov - c(1.0)).norm() < 1e-12);

        let phi_minus = StateVector::bell(BellOutcome::PhiMinus);
        assert!(phi.overlap(&phi_minus).unwrap().norm() < 1e-12);

        let zz = StateVector::make_state(2, &[("00", c(1.0))]).unwrap();
        let ov = zz.overlap(&phi).unwrap();
        assert!((ov - c(FRAC_1_SQRT_2)).norm() < 1e-12);

        let one = StateVector::make_state(1, &[("0", c(1.0))]).unwrap();
        assert!(matches!(
            one.overlap(&phi),
            Err(StateError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bell_states_form_an_orthonormal_basis() {
        for (i, a) in BellOutcome::ALL.into_iter().enumerate() {
            for (j, b) in BellOutcome::ALL.into_iter().enumerate() {
                let ov = StateVector::bell(a).overlap(&StateVector::bell(b)).unwrap();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ov.norm() - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotated_basis_is_orthonormal() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let theta = (rng.gen::<f64>() - 0.5) * 20.0;
            let basis = RotatedBasis::new(theta);
            let p = basis.components(Outcome::Plus);
            let m = basis.components(Outcome::Minus);
            assert_close(p[0] * p[0] + p[1] * p[1], 1.0, 1e-12);
            assert_close(m[0] * m[0] + m[1] * m[1], 1.0, 1e-12);
            assert_close(p[0] * m[0] + p[1] * m[1], 0.0, 1e-12);
        }
    }
}
