//! Dense state-vector simulation of the three parameterized gates.
//!
//! Basis convention: qubit 0 is the most significant bit of the basis index,
//! so for `n` qubits qubit `q` corresponds to bit `n - 1 - q`. Two-qubit
//! matrices are written in the `|ab⟩` basis where `a` is the first qubit
//! argument (`q_low` for matchgates, `control` for CRY).
//!
//! The single-qubit gate is implemented verbatim as
//!
//! ```text
//! U(θ, φ) = [[cos θ/2, -e^{iφ} sin θ/2],
//!            [sin θ/2,  e^{iφ} cos θ/2]]
//! ```
//!
//! which equals `RY(θ) · PhaseShift(φ)` (phase applied first). The matchgate
//! embeds the same 2×2 block on `{|01⟩, |10⟩}` and puts `e^{iφ₂}` on `|11⟩`.

use num_complex::Complex64 as C64;
use thiserror::Error;

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 24;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("control and target are the same qubit ({0})")]
    SameQubit(usize),
    #[error("duplicate qubit {0} in index list")]
    DuplicateQubit(usize),
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("amplitude array length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("{0} qubits exceeds the simulator limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("non-finite gate angle")]
    NonFiniteAngle,
}

pub type StateResult<T> = Result<T, StateError>;

/// Angles of one gate instance. `phi2` is only read by matchgates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GateParams {
    pub theta: f64,
    pub phi: f64,
    pub phi2: f64,
}

impl GateParams {
    pub fn new(theta: f64, phi: f64, phi2: f64) -> Self {
        Self { theta, phi, phi2 }
    }

    pub fn check(&self) -> StateResult<()> {
        if self.theta.is_finite() && self.phi.is_finite() && self.phi2.is_finite() {
            Ok(())
        } else {
            Err(StateError::NonFiniteAngle)
        }
    }
}

#[inline]
fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// The 2×2 matrix of `U(θ, φ)`.
pub fn u_matrix(theta: f64, phi: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, phi);
    [[c(co), -e * s], [c(s), e * co]]
}

/// The 4×4 matrix of `M(θ, φ₁, φ₂)` in the `|ab⟩` basis.
pub fn matchgate_matrix(theta: f64, phi1: f64, phi2: f64) -> Mat4 {
    let b = u_matrix(theta, phi1);
    let z = C64::new(0.0, 0.0);
    [
        [c(1.0), z, z, z],
        [z, b[0][0], b[0][1], z],
        [z, b[1][0], b[1][1], z],
        [z, z, z, C64::from_polar(1.0, phi2)],
    ]
}

/// The 4×4 matrix of `CRY(θ)` in the `|control target⟩` basis.
pub fn cry_matrix(theta: f64) -> Mat4 {
    let (s, co) = (theta / 2.0).sin_cos();
    let z = C64::new(0.0, 0.0);
    [
        [c(1.0), z, z, z],
        [z, c(1.0), z, z],
        [z, z, c(co), c(-s)],
        [z, z, c(s), c(co)],
    ]
}

pub fn dagger2(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

/// Sparse two-qubit operator: a 2×2 block on two of the four local basis
/// states plus diagonal entries on the remaining two. Matchgates, CRY and
/// all their angle derivatives have this shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOp {
    pub block_rows: [usize; 2],
    pub block: Mat2,
    pub diag_rows: [usize; 2],
    pub diag: [C64; 2],
}

impl PairOp {
    pub fn dagger(&self) -> Self {
        Self {
            block_rows: self.block_rows,
            block: dagger2(&self.block),
            diag_rows: self.diag_rows,
            diag: [self.diag[0].conj(), self.diag[1].conj()],
        }
    }

    pub fn to_dense(&self) -> Mat4 {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for (i, &r) in self.block_rows.iter().enumerate() {
            for (j, &col) in self.block_rows.iter().enumerate() {
                m[r][col] = self.block[i][j];
            }
        }
        for (k, &r) in self.diag_rows.iter().enumerate() {
            m[r][r] = self.diag[k];
        }
        m
    }
}

/// Normalized complex amplitude array over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> StateResult<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> StateResult<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(StateError::TooManyQubits(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(StateError::BasisOutOfRange { index, dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = c(1.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps an amplitude array; fails unless it is normalized to 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> StateResult<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(StateError::BadLength(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(StateError::TooManyQubits(n_qubits));
        }
        let s = Self { n_qubits, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalized(mut amps: Vec<C64>) -> StateResult<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(StateError::NotNormalized(norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(amps)
    }

    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> StateResult<()> {
        if qubit >= self.n_qubits {
            Err(StateError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Value (0 or 1) of `qubit` in basis state `index`.
    pub fn bit(&self, index: usize, qubit: usize) -> usize {
        (index >> (self.n_qubits - 1 - qubit)) & 1
    }

    pub fn apply_u(&self, qubit: usize, theta: f64, phi: f64) -> StateResult<Self> {
        let mut out = self.clone();
        out.u_in_place(qubit, theta, phi)?;
        Ok(out)
    }

    pub fn apply_matchgate(&self, q_low: usize, theta: f64, phi1: f64, phi2: f64) -> StateResult<Self> {
        let mut out = self.clone();
        out.matchgate_in_place(q_low, theta, phi1, phi2)?;
        Ok(out)
    }

    pub fn apply_cry(&self, control: usize, target: usize, theta: f64) -> StateResult<Self> {
        let mut out = self.clone();
        out.cry_in_place(control, target, theta)?;
        Ok(out)
    }

    pub fn apply_phase_oracle(&self, marked: usize) -> StateResult<Self> {
        let mut out = self.clone();
        out.phase_oracle_in_place(marked)?;
        Ok(out)
    }

    pub fn u_in_place(&mut self, qubit: usize, theta: f64, phi: f64) -> StateResult<()> {
        self.check_qubit(qubit)?;
        GateParams::new(theta, phi, 0.0).check()?;
        self.apply_1q(qubit, &u_matrix(theta, phi));
        Ok(())
    }

    pub fn matchgate_in_place(&mut self, q_low: usize, theta: f64, phi1: f64, phi2: f64) -> StateResult<()> {
        self.check_qubit(q_low)?;
        self.check_qubit(q_low + 1)?;
        GateParams::new(theta, phi1, phi2).check()?;
        self.apply_pair(q_low, q_low + 1, &matchgate_op(theta, phi1, phi2));
        Ok(())
    }

    pub fn cry_in_place(&mut self, control: usize, target: usize, theta: f64) -> StateResult<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(StateError::SameQubit(control));
        }
        GateParams::new(theta, 0.0, 0.0).check()?;
        self.apply_pair(control, target, &cry_op(theta));
        Ok(())
    }

    /// Negates the amplitude of `|marked⟩`.
    pub fn phase_oracle_in_place(&mut self, marked: usize) -> StateResult<()> {
        if marked >= self.dim() {
            return Err(StateError::BasisOutOfRange {
                index: marked,
                dim: self.dim(),
            });
        }
        self.amps[marked] = -self.amps[marked];
        Ok(())
    }

    /// Phase oracle restricted to a sub-register: flips the sign of every basis
    /// state whose bits on `qubits` (first listed = most significant) equal
    /// `marked`.
    pub fn phase_oracle_on(&mut self, qubits: &[usize], marked: usize) -> StateResult<()> {
        self.check_distinct(qubits)?;
        if marked >= 1 << qubits.len() {
            return Err(StateError::BasisOutOfRange {
                index: marked,
                dim: 1 << qubits.len(),
            });
        }
        for i in 0..self.dim() {
            if self.sub_index(i, qubits) == marked {
                self.amps[i] = -self.amps[i];
            }
        }
        Ok(())
    }

    fn check_distinct(&self, qubits: &[usize]) -> StateResult<()> {
        for (k, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..k].contains(&q) {
                return Err(StateError::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    /// Index formed by the bits of `index` on `qubits`, first qubit most significant.
    #[inline]
    pub fn sub_index(&self, index: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | self.bit(index, q))
    }

    /// Born-rule marginal over `qubits`; outcome `k` has the bits of `k` on
    /// `qubits` with the first listed qubit most significant.
    pub fn probabilities(&self, qubits: &[usize]) -> StateResult<Vec<f64>> {
        self.check_distinct(qubits)?;
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[self.sub_index(i, qubits)] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Full-register distribution.
    pub fn distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> StateResult<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(StateError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(inner(&self.amps, &other.amps))
    }

    pub fn fidelity(&self, other: &StateVector) -> StateResult<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Tensor product `self ⊗ other` (self on the leading qubits).
    pub fn tensor(&self, other: &StateVector) -> StateResult<StateVector> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(StateError::TooManyQubits(n));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self::from_raw(n, amps))
    }

    // Kernels below skip validation; callers check indices.

    pub(crate) fn apply_1q(&mut self, qubit: usize, m: &Mat2) {
        let mask = self.mask(qubit);
        let dim = self.amps.len();
        let amps = &mut self.amps;
        let mut base = 0;
        while base < dim {
            for i in base..base + mask {
                let j = i | mask;
                let (a0, a1) = (amps[i], amps[j]);
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += mask << 1;
        }
    }

    pub(crate) fn apply_pair(&mut self, a: usize, b: usize, op: &PairOp) {
        let ma = self.mask(a);
        let mb = self.mask(b);
        let dim = self.amps.len();
        let amps = &mut self.amps;
        for i in 0..dim {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let (r0, r1) = (idx[op.block_rows[0]], idx[op.block_rows[1]]);
            let (x0, x1) = (amps[r0], amps[r1]);
            amps[r0] = op.block[0][0] * x0 + op.block[0][1] * x1;
            amps[r1] = op.block[1][0] * x0 + op.block[1][1] * x1;
            let (d0, d1) = (idx[op.diag_rows[0]], idx[op.diag_rows[1]]);
            amps[d0] *= op.diag[0];
            amps[d1] *= op.diag[1];
        }
    }

    /// `⟨bra| (m on qubit) |self⟩` without materializing the product.
    pub(crate) fn sandwich_1q(&self, bra: &[C64], qubit: usize, m: &Mat2) -> C64 {
        let mask = self.mask(qubit);
        let dim = self.amps.len();
        let amps = &self.amps;
        let mut acc = C64::new(0.0, 0.0);
        let mut base = 0;
        while base < dim {
            for i in base..base + mask {
                let j = i | mask;
                let (a0, a1) = (amps[i], amps[j]);
                acc += bra[i].conj() * (m[0][0] * a0 + m[0][1] * a1);
                acc += bra[j].conj() * (m[1][0] * a0 + m[1][1] * a1);
            }
            base += mask << 1;
        }
        acc
    }

    pub(crate) fn sandwich_pair(&self, bra: &[C64], a: usize, b: usize, op: &PairOp) -> C64 {
        let ma = self.mask(a);
        let mb = self.mask(b);
        let amps = &self.amps;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..amps.len() {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let (r0, r1) = (idx[op.block_rows[0]], idx[op.block_rows[1]]);
            let (x0, x1) = (amps[r0], amps[r1]);
            acc += bra[r0].conj() * (op.block[0][0] * x0 + op.block[0][1] * x1);
            acc += bra[r1].conj() * (op.block[1][0] * x0 + op.block[1][1] * x1);
            let (d0, d1) = (idx[op.diag_rows[0]], idx[op.diag_rows[1]]);
            acc += bra[d0].conj() * op.diag[0] * amps[d0];
            acc += bra[d1].conj() * op.diag[1] * amps[d1];
        }
        acc
    }
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn matchgate_op(theta: f64, phi1: f64, phi2: f64) -> PairOp {
    PairOp {
        block_rows: [1, 2],
        block: u_matrix(theta, phi1),
        diag_rows: [0, 3],
        diag: [c(1.0), C64::from_polar(1.0, phi2)],
    }
}

pub(crate) fn cry_op(theta: f64) -> PairOp {
    PairOp {
        block_rows: [2, 3],
        block: u_matrix(theta, 0.0),
        diag_rows: [0, 1],
        diag: [c(1.0), c(1.0)],
    }
}

/// `∂U/∂θ` and `∂U/∂φ`.
pub(crate) fn u_derivatives(theta: f64, phi: f64) -> [Mat2; 2] {
    let (s, co) = (theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, phi);
    let i = C64::new(0.0, 1.0);
    let dtheta = [[c(-s / 2.0), -e * (co / 2.0)], [c(co / 2.0), -e * (s / 2.0)]];
    let dphi = [[c(0.0), -i * e * s], [c(0.0), i * e * co]];
    [dtheta, dphi]
}

/// Derivatives of the matchgate with respect to `θ`, `φ₁`, `φ₂`.
pub(crate) fn matchgate_derivatives(theta: f64, phi1: f64, phi2: f64) -> [PairOp; 3] {
    let [dt, dp] = u_derivatives(theta, phi1);
    let zero2 = [[c(0.0); 2]; 2];
    let z = c(0.0);
    let i = C64::new(0.0, 1.0);
    [
        PairOp { block_rows: [1, 2], block: dt, diag_rows: [0, 3], diag: [z, z] },
        PairOp { block_rows: [1, 2], block: dp, diag_rows: [0, 3], diag: [z, z] },
        PairOp {
            block_rows: [1, 2],
            block: zero2,
            diag_rows: [0, 3],
            diag: [z, i * C64::from_polar(1.0, phi2)],
        },
    ]
}

pub(crate) fn cry_derivative(theta: f64) -> PairOp {
    let [dt, _] = u_derivatives(theta, 0.0);
    PairOp {
        block_rows: [2, 3],
        block: dt,
        diag_rows: [0, 1],
        diag: [c(0.0), c(0.0)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn assert_state(s: &StateVector, expected: &[C64]) {
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!(close(*a, *b, 1e-12), "{a} vs {b}");
        }
    }

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn u_half_pi_pi_is_hadamard() {
        let s = StateVector::zero(1).unwrap().apply_u(0, PI / 2.0, PI).unwrap();
        assert_state(&s, &[r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]);
    }

    #[test]
    fn u_zero_is_identity() {
        let psi = StateVector::normalized(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.7)]).unwrap();
        let out = psi.apply_u(0, 0.0, 0.0).unwrap();
        assert_state(&out, psi.amplitudes());
    }

    #[test]
    fn u_pi_pi_flips() {
        let s = StateVector::zero(1).unwrap().apply_u(0, PI, PI).unwrap();
        assert_state(&s, &[r(0.0), r(1.0)]);
    }

    #[test]
    fn u_rejects_bad_qubit() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply_u(2, 0.1, 0.2), Err(StateError::QubitOutOfRange { .. })));
    }

    #[test]
    fn matchgate_swap_special_case() {
        // |01⟩ has index 1.
        let s = StateVector::basis(2, 1).unwrap().apply_matchgate(0, PI, PI, 0.0).unwrap();
        assert_state(&s, &[r(0.0), r(0.0), r(1.0), r(0.0)]);
    }

    #[test]
    fn matchgate_fixes_00() {
        let s = StateVector::zero(2).unwrap().apply_matchgate(0, 1.3, -0.4, 2.2).unwrap();
        assert_state(&s, &[r(1.0), r(0.0), r(0.0), r(0.0)]);
    }

    #[test]
    fn matchgate_on_10_follows_third_column() {
        // Column |10⟩ of M(π/2, 0, 0): (0, -sin π/4, cos π/4, 0).
        let s = StateVector::basis(2, 2).unwrap().apply_matchgate(0, PI / 2.0, 0.0, 0.0).unwrap();
        assert_state(&s, &[r(0.0), r(-FRAC_1_SQRT_2), r(FRAC_1_SQRT_2), r(0.0)]);
    }

    #[test]
    fn matchgate_rejects_last_qubit() {
        let s = StateVector::zero(3).unwrap();
        assert!(s.apply_matchgate(2, 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn cry_examples() {
        let s = StateVector::zero(2).unwrap().apply_cry(0, 1, 0.7).unwrap();
        assert_state(&s, &[r(1.0), r(0.0), r(0.0), r(0.0)]);

        let theta: f64 = 0.9;
        let s = StateVector::basis(2, 2).unwrap().apply_cry(0, 1, theta).unwrap();
        assert_state(&s, &[r(0.0), r(0.0), r((theta / 2.0).cos()), r((theta / 2.0).sin())]);

        let plus0 = StateVector::normalized(vec![r(1.0), r(0.0), r(1.0), r(0.0)]).unwrap();
        let bell = plus0.apply_cry(0, 1, PI).unwrap();
        assert_state(&bell, &[r(FRAC_1_SQRT_2), r(0.0), r(0.0), r(FRAC_1_SQRT_2)]);
    }

    #[test]
    fn cry_reversed_orientation() {
        // control = qubit 1, target = qubit 0: |01⟩ → cos|01⟩ + sin|11⟩.
        let s = StateVector::basis(2, 1).unwrap().apply_cry(1, 0, PI).unwrap();
        assert_state(&s, &[r(0.0), r(0.0), r(0.0), r(1.0)]);
        assert!(matches!(
            StateVector::zero(2).unwrap().apply_cry(1, 1, 0.3),
            Err(StateError::SameQubit(1))
        ));
    }

    #[test]
    fn phase_oracle_cases() {
        let w = StateVector::basis(2, 3).unwrap();
        assert_state(&w.apply_phase_oracle(3).unwrap(), &[r(0.0), r(0.0), r(0.0), r(-1.0)]);
        assert_eq!(w.apply_phase_oracle(1).unwrap(), w);
        let psi = StateVector::normalized(vec![r(1.0), r(2.0), r(3.0), r(4.0)]).unwrap();
        let twice = psi.apply_phase_oracle(2).unwrap().apply_phase_oracle(2).unwrap();
        assert_eq!(twice, psi);
        assert!(psi.apply_phase_oracle(4).is_err());
    }

    #[test]
    fn probability_examples() {
        let p = StateVector::zero(3).unwrap().probabilities(&[0, 1, 2]).unwrap();
        assert_eq!(p[0], 1.0);

        let bell = StateVector::normalized(vec![r(1.0), r(0.0), r(0.0), r(1.0)]).unwrap();
        let m = bell.probabilities(&[1]).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);

        // H|0⟩ ⊗ |1⟩, marginal of qubit 0 by direct amplitude summation.
        let s = StateVector::basis(2, 1).unwrap().apply_u(0, PI / 2.0, PI).unwrap();
        let amps = s.amplitudes();
        let p0 = amps[0].norm_sqr() + amps[1].norm_sqr();
        let m = s.probabilities(&[0]).unwrap();
        assert!((m[0] - p0).abs() < 1e-15 && (m[0] - 0.5).abs() < 1e-12);

        assert!(matches!(s.probabilities(&[0, 0]), Err(StateError::DuplicateQubit(0))));
    }

    #[test]
    fn overlap_examples() {
        let z = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let h = z.apply_u(0, PI / 2.0, PI).unwrap();
        assert!(close(h.overlap(&h).unwrap(), r(1.0), 1e-12));
        assert!(close(z.overlap(&one).unwrap(), r(0.0), 1e-12));
        assert!(close(h.overlap(&z).unwrap(), r(FRAC_1_SQRT_2), 1e-12));
        assert!(z.overlap(&StateVector::zero(2).unwrap()).is_err());
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(matches!(
            StateVector::from_amplitudes(vec![r(1.0), r(1.0)]),
            Err(StateError::NotNormalized(_))
        ));
        assert!(matches!(
            StateVector::from_amplitudes(vec![r(1.0), r(0.0), r(0.0)]),
            Err(StateError::BadLength(3))
        ));
    }

    #[test]
    fn subregister_oracle_marks_matching_states() {
        let mut s = StateVector::normalized(vec![r(1.0); 8]).unwrap();
        s.phase_oracle_on(&[2, 0], 0b10).unwrap();
        // qubit 2 = 1, qubit 0 = 0 → indices 0b001, 0b011.
        let neg: Vec<usize> = (0..8).filter(|&i| s.amplitudes()[i].re < 0.0).collect();
        assert_eq!(neg, vec![1, 3]);
    }
}
