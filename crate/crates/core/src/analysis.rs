//! Dense-unitary tools for inspecting trained circuits.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::pqc::{pyramid_columns, Angle, Gate, GateKind, ParamCircuit, PqcError, PqcResult};
use crate::statevec::{StateError, StateVector};

/// Largest register `reconstruct` will expand to a dense matrix.
pub const MAX_DENSE_QUBITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{0} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}")]
    TooLarge(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix text line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Pqc(#[from] PqcError),
    #[error(transparent)]
    State(#[from] StateError),
}

pub type AnalysisResult<T> = Result<T, AnalysisError>;

/// A `2ⁿ × 2ⁿ` complex matrix, basis ordered with qubit 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    n_qubits: usize,
    m: DMatrix<C64>,
}

impl DenseUnitary {
    pub fn identity(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self {
            n_qubits,
            m: DMatrix::identity(d, d),
        }
    }

    /// Wraps a square matrix with power-of-two side. Unitarity is not checked.
    pub fn from_matrix(m: DMatrix<C64>) -> AnalysisResult<Self> {
        let d = m.nrows();
        if d != m.ncols() || !d.is_power_of_two() {
            return Err(AnalysisError::DimensionMismatch(m.nrows(), m.ncols()));
        }
        Ok(Self {
            n_qubits: d.trailing_zeros() as usize,
            m,
        })
    }

    /// Builds the matrix column by column from a state map.
    pub fn from_fn<F>(n_qubits: usize, mut f: F) -> AnalysisResult<Self>
    where
        F: FnMut(&mut StateVector) -> AnalysisResult<()>,
    {
        if n_qubits > MAX_DENSE_QUBITS {
            return Err(AnalysisError::TooLarge(n_qubits));
        }
        let d = 1 << n_qubits;
        let mut m = DMatrix::zeros(d, d);
        for col in 0..d {
            let mut psi = StateVector::basis(n_qubits, col)?;
            f(&mut psi)?;
            m.set_column(col, &nalgebra::DVector::from_column_slice(psi.amplitudes()));
        }
        Ok(Self { n_qubits, m })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            m: self.m.adjoint(),
        }
    }

    /// `self · other`.
    pub fn mul(&self, other: &DenseUnitary) -> AnalysisResult<Self> {
        same_dim(self, other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            m: &self.m * &other.m,
        })
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.m.adjoint() * &self.m;
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let e = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((p[(i, j)] - e).norm());
            }
        }
        worst
    }

    /// Plain-text dump: one row per line, entries `re,im` separated by spaces.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.m[(i, j)];
                    format!("{:?},{:?}", z.re, z.im)
                })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> AnalysisResult<Self> {
        let mut rows: Vec<Vec<C64>> = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| AnalysisError::Parse { line: k + 1, msg };
            let row = line
                .split_whitespace()
                .map(|tok| {
                    let (re, im) = tok
                        .split_once(',')
                        .ok_or_else(|| err(format!("expected 're,im', got '{tok}'")))?;
                    let re: f64 = re.parse().map_err(|_| err(format!("bad number '{re}'")))?;
                    let im: f64 = im.parse().map_err(|_| err(format!("bad number '{im}'")))?;
                    Ok(C64::new(re, im))
                })
                .collect::<AnalysisResult<Vec<_>>>()?;
            rows.push(row);
        }
        let d = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(AnalysisError::Parse {
                line: bad + 1,
                msg: format!("expected {d} entries"),
            });
        }
        Self::from_matrix(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }
}

fn same_dim(u: &DenseUnitary, v: &DenseUnitary) -> AnalysisResult<()> {
    if u.dim() != v.dim() {
        return Err(AnalysisError::DimensionMismatch(u.dim(), v.dim()));
    }
    Ok(())
}

/// Dense matrix of a circuit on its own `n_qubits` (the window is ignored).
pub fn reconstruct(circuit: &ParamCircuit, params: &[f64]) -> AnalysisResult<DenseUnitary> {
    let n = circuit.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(AnalysisError::TooLarge(n));
    }
    circuit.check_params(params)?;
    let local = circuit.clone().at_offset(0);
    DenseUnitary::from_fn(n, |psi| Ok(local.apply_in_place(params, psi)?))
}

/// `|tr(U†V)|² / d²`.
pub fn phase_invariant_fidelity(u: &DenseUnitary, v: &DenseUnitary) -> AnalysisResult<f64> {
    same_dim(u, v)?;
    let d = u.dim() as f64;
    let tr: C64 = u
        .m
        .iter()
        .zip(v.m.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(tr.norm_sqr() / (d * d))
}

/// Best diagonal unitary `D` with `U ≈ V·D`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPhase {
    /// Unit-modulus entries of `D`.
    pub phases: Vec<C64>,
    /// `|(V†U)_jj|`: how much of each column is explained by a pure phase.
    pub magnitudes: Vec<f64>,
    /// `phase_invariant_fidelity(U, V·D)`.
    pub fidelity: f64,
}

pub fn diagonal_phase_factor(u: &DenseUnitary, v: &DenseUnitary) -> AnalysisResult<DiagonalPhase> {
    same_dim(u, v)?;
    let d = u.dim();
    let mut phases = Vec::with_capacity(d);
    let mut magnitudes = Vec::with_capacity(d);
    for j in 0..d {
        let z: C64 = (0..d).map(|i| v.m[(i, j)].conj() * u.m[(i, j)]).sum();
        magnitudes.push(z.norm());
        phases.push(if z.norm() > 1e-300 { z / z.norm() } else { C64::new(1.0, 0.0) });
    }
    let mut vd = v.m.clone();
    for (j, p) in phases.iter().enumerate() {
        for i in 0..d {
            vd[(i, j)] *= p;
        }
    }
    let fidelity = phase_invariant_fidelity(u, &DenseUnitary { n_qubits: u.n_qubits, m: vd })?;
    Ok(DiagonalPhase {
        phases,
        magnitudes,
        fidelity,
    })
}

/// Phase-invariant fidelity of two circuits on the same qubit count. Dense
/// up to [`MAX_DENSE_QUBITS`], otherwise the worst state fidelity over a
/// fixed set of product-basis probes.
pub fn circuit_fidelity(
    a: &ParamCircuit,
    pa: &[f64],
    b: &ParamCircuit,
    pb: &[f64],
) -> PqcResult<f64> {
    let n = a.n_qubits();
    if n <= MAX_DENSE_QUBITS {
        let ua = reconstruct(a, pa).map_err(to_pqc)?;
        let ub = reconstruct(b, pb).map_err(to_pqc)?;
        return phase_invariant_fidelity(&ua, &ub).map_err(to_pqc);
    }
    let (la, lb) = (a.clone().at_offset(0), b.clone().at_offset(0));
    let mut worst: f64 = 1.0;
    let h = Angle::Fixed(PI / 2.0);
    for probe in 0..8usize {
        // Hadamards on a probe-dependent subset, then compare.
        let gates: Vec<Gate> = (0..n)
            .filter(|q| (q + probe) % 3 != 0)
            .map(|q| Gate::u(q, h, Angle::Fixed(PI * (q % 2) as f64)))
            .collect();
        let prep = ParamCircuit::from_gates(n, gates)?;
        let psi = prep.apply(&[], &StateVector::basis(n, probe)?)?;
        let x = la.apply(pa, &psi)?;
        let y = lb.apply(pb, &psi)?;
        worst = worst.min(x.fidelity(&y)?);
    }
    Ok(worst)
}

fn to_pqc(e: AnalysisError) -> PqcError {
    match e {
        AnalysisError::Pqc(p) => p,
        AnalysisError::State(s) => PqcError::State(s),
        other => PqcError::Parse { line: 0, msg: other.to_string() },
    }
}

/// Exact `QFT_{2ⁿ}` with entries `e^{2πi·jk/2ⁿ}/√2ⁿ`.
pub fn qft_matrix(n: usize) -> DenseUnitary {
    let d = 1usize << n;
    let s = 1.0 / (d as f64).sqrt();
    let m = DMatrix::from_fn(d, d, |j, k| {
        C64::from_polar(s, 2.0 * PI * ((j * k) % d) as f64 / d as f64)
    });
    DenseUnitary { n_qubits: n, m }
}

/// `2|s⟩⟨s| − I` on `n` qubits.
pub fn diffusion_matrix(n: usize) -> DenseUnitary {
    let d = 1usize << n;
    let m = DMatrix::from_fn(d, d, |i, j| {
        C64::new(2.0 / d as f64 - if i == j { 1.0 } else { 0.0 }, 0.0)
    });
    DenseUnitary { n_qubits: n, m }
}

/// Diagonal matrix with the given entries.
pub fn diagonal(entries: &[C64]) -> AnalysisResult<DenseUnitary> {
    DenseUnitary::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)))
}

/// Reduced density matrix of `psi` on `keep`, basis ordered with the first
/// kept qubit most significant.
pub fn reduced_density(psi: &StateVector, keep: &[usize]) -> AnalysisResult<DMatrix<C64>> {
    psi.probabilities(keep)?;
    let n = psi.n_qubits();
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let d = 1usize << keep.len();
    let e = 1usize << rest.len();
    // amplitude table indexed [kept][rest]
    let mut t = DMatrix::<C64>::zeros(d, e);
    for (i, a) in psi.amplitudes().iter().enumerate() {
        t[(psi.sub_index(i, keep), psi.sub_index(i, &rest))] = *a;
    }
    Ok(&t * t.adjoint())
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(h: &DMatrix<C64>) -> AnalysisResult<f64> {
    if h.nrows() != h.ncols() {
        return Err(AnalysisError::DimensionMismatch(h.nrows(), h.ncols()));
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    Ok(sym.symmetric_eigenvalues().iter().map(|v| v.abs()).sum())
}

/// Gate tallies of [`general_qft_circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QftGateCounts {
    pub single_qubit: usize,
    pub controlled_rotations: usize,
    pub swaps: usize,
}

/// Nearest-neighbor QFT on `n` qubits.
///
/// Follows the pyramid layout: each `U(π/2, π) = H` on qubit 0 is followed by
/// a run of `M(π, π, φ)` gates, each a SWAP fused with a controlled phase,
/// that carries the freshly transformed qubit down the line while picking up
/// phases `π/2^{b-a}` from every later logical qubit `b`. The descent reverses
/// the qubit order, which is exactly the bit reversal the textbook circuit
/// needs, so the output is in natural order: `reconstruct` equals
/// [`qft_matrix`] with no permutation.
pub fn general_qft_circuit(n: usize) -> PqcResult<ParamCircuit> {
    if n == 0 {
        return Err(PqcError::NoQubits);
    }
    let mut logical: Vec<usize> = (0..n).collect();
    let mut gates = Vec::new();
    for col in pyramid_columns(n) {
        if col.u_on_first {
            gates.push(Gate::u(0, Angle::Fixed(PI / 2.0), Angle::Fixed(PI)));
        }
        for &i in &col.pairs {
            let (a, b) = (logical[i].min(logical[i + 1]), logical[i].max(logical[i + 1]));
            let phase = PI / (1u64 << (b - a)) as f64;
            gates.push(Gate::m(i, Angle::Fixed(PI), Angle::Fixed(PI), Angle::Fixed(phase)));
            logical.swap(i, i + 1);
        }
    }
    ParamCircuit::from_gates(n, gates)
}

pub fn qft_gate_counts(c: &ParamCircuit) -> QftGateCounts {
    let fixed = |a: Angle, v: f64| matches!(a, Angle::Fixed(x) if (x - v).abs() < 1e-15);
    let mut out = QftGateCounts {
        single_qubit: 0,
        controlled_rotations: 0,
        swaps: 0,
    };
    for g in c.gates() {
        match g.kind {
            GateKind::U => out.single_qubit += 1,
            GateKind::M => {
                if fixed(g.angles[0], PI) && fixed(g.angles[1], PI) {
                    out.swaps += 1;
                }
                if !fixed(g.angles[2], 0.0) {
                    out.controlled_rotations += 1;
                }
            }
            GateKind::Cry => out.controlled_rotations += 1,
        }
    }
    out
}

/// OpenQASM 2.0 text for the circuit over its own qubits.
///
/// Expansions:
/// * `U(θ,φ)` → `p(φ); ry(θ)`
/// * `CRY(θ) c,t` → `cry(θ) c,t`
/// * `M(θ,φ₁,φ₂) a,b` → `cx a,b; cp(φ₁) b,a; cry(θ) b,a; x b; cp(φ₂) a,b; x b; cx a,b`
///
/// Adjoint gates emit the reversed sequence with negated angles.
pub fn to_qasm(circuit: &ParamCircuit, params: &[f64]) -> PqcResult<String> {
    circuit.check_params(params)?;
    let mut s = String::new();
    let _ = writeln!(s, "OPENQASM 2.0;");
    let _ = writeln!(s, "include \"qelib1.inc\";");
    let _ = writeln!(s, "qreg q[{}];", circuit.n_qubits());
    for g in circuit.gates() {
        let v = g.resolve(params);
        let sign = if g.adjoint { -1.0 } else { 1.0 };
        let [t, f1, f2] = v.map(|x| x * sign);
        let [a, b] = g.qubits;
        let mut lines: Vec<String> = match g.kind {
            GateKind::U => vec![format!("p({f1:?}) q[{a}];"), format!("ry({t:?}) q[{a}];")],
            GateKind::Cry => vec![format!("cry({t:?}) q[{a}],q[{b}];")],
            GateKind::M => vec![
                format!("cx q[{a}],q[{b}];"),
                format!("cp({f1:?}) q[{b}],q[{a}];"),
                format!("cry({t:?}) q[{b}],q[{a}];"),
                format!("x q[{b}];"),
                format!("cp({f2:?}) q[{a}],q[{b}];"),
                format!("x q[{b}];"),
                format!("cx q[{a}],q[{b}];"),
            ],
        };
        if g.adjoint {
            lines.reverse();
        }
        for l in lines {
            s.push_str(&l);
            s.push('\n');
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqc::{build_policy, LayerKind};
    use crate::statevec::{cry_op, u_matrix, PairOp};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn identity_and_hadamard() {
        let c = ParamCircuit::from_gates(2, vec![]).unwrap();
        let u = reconstruct(&c, &[]).unwrap();
        assert_eq!(u, DenseUnitary::identity(2));

        let h = ParamCircuit::from_gates(1, vec![Gate::u(0, Angle::Fixed(PI / 2.0), Angle::Fixed(PI))]).unwrap();
        let u = reconstruct(&h, &[]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!(close(u.get(0, 0), C64::new(s, 0.0)));
        assert!(close(u.get(0, 1), C64::new(s, 0.0)));
        assert!(close(u.get(1, 0), C64::new(s, 0.0)));
        assert!(close(u.get(1, 1), C64::new(-s, 0.0)));
    }

    #[test]
    fn too_large_is_rejected() {
        let c = ParamCircuit::from_gates(11, vec![]).unwrap();
        assert_eq!(reconstruct(&c, &[]).unwrap_err(), AnalysisError::TooLarge(11));
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = build_policy(3, &LayerKind::ALL).unwrap();
        let p: Vec<f64> = (0..c.n_params()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let u = reconstruct(&c, &p).unwrap();
        assert!(u.unitarity_error() < 1e-9);
        let phased = DenseUnitary::from_matrix(u.matrix() * C64::from_polar(1.0, 0.7)).unwrap();
        assert!((phase_invariant_fidelity(&u, &phased).unwrap() - 1.0).abs() < 1e-12);

        let h2 = ParamCircuit::from_gates(
            2,
            vec![
                Gate::u(0, Angle::Fixed(PI / 2.0), Angle::Fixed(PI)),
                Gate::u(1, Angle::Fixed(PI / 2.0), Angle::Fixed(PI)),
            ],
        )
        .unwrap();
        let f = phase_invariant_fidelity(&reconstruct(&h2, &[]).unwrap(), &DenseUnitary::identity(2)).unwrap();
        assert!(f.abs() < 1e-15);
        assert!(phase_invariant_fidelity(&u, &DenseUnitary::identity(2)).is_err());
    }

    #[test]
    fn diagonal_factor_recovers_flip() {
        let v = qft_matrix(2);
        let one = C64::new(1.0, 0.0);
        let d = diagonal(&[one, -one, one, one]).unwrap();
        let u = v.mul(&d).unwrap();
        let out = diagonal_phase_factor(&u, &v).unwrap();
        assert!(close(out.phases[1], -one));
        assert!(close(out.phases[0], one));
        assert!((out.fidelity - 1.0).abs() < 1e-12);
        let same = diagonal_phase_factor(&v, &v).unwrap();
        assert!(same.phases.iter().all(|p| close(*p, one)));
    }

    #[test]
    fn two_qubit_diffusion_entries() {
        let m = diffusion_matrix(2);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { -0.5 } else { 0.5 };
                assert!(close(m.get(i, j), C64::new(want, 0.0)));
            }
        }
    }

    #[test]
    fn general_qft_matches_dense_qft() {
        for n in 1..=6 {
            let c = general_qft_circuit(n).unwrap();
            let u = reconstruct(&c, &[]).unwrap();
            let f = phase_invariant_fidelity(&u, &qft_matrix(n)).unwrap();
            assert!(f > 1.0 - 1e-9, "n={n} fidelity {f}");
            let k = n * (n - 1) / 2;
            assert_eq!(
                qft_gate_counts(&c),
                QftGateCounts { single_qubit: n, controlled_rotations: k, swaps: k }
            );
        }
    }

    #[test]
    fn matrix_text_round_trip() {
        let q = qft_matrix(2);
        assert_eq!(DenseUnitary::from_text(&q.to_text()).unwrap(), q);
        let err = DenseUnitary::from_text("1,0 0,0\n0,0 x,1\n").unwrap_err();
        assert!(matches!(err, AnalysisError::Parse { line: 2, .. }));
    }

    /// Applies the emitter's gate vocabulary with independent textbook matrices.
    fn run_qasm(text: &str, n: usize) -> DenseUnitary {
        let p = |phi: f64| [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::from_polar(1.0, phi)]];
        let ry = |t: f64| u_matrix(t, 0.0);
        let x = [[C64::new(0.0, 0.0), C64::new(1.0, 0.0)], [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]];
        let controlled = |m: [[C64; 2]; 2]| PairOp {
            block_rows: [2, 3],
            block: m,
            diag_rows: [0, 1],
            diag: [C64::new(1.0, 0.0); 2],
        };
        DenseUnitary::from_fn(n, |psi| {
            for line in text.lines().skip(3) {
                let (head, args) = line.trim_end_matches(';').split_once(' ').unwrap();
                let qs: Vec<usize> = args
                    .split(',')
                    .map(|a| a.trim_start_matches("q[").trim_end_matches(']').parse().unwrap())
                    .collect();
                let (name, angle) = match head.split_once('(') {
                    Some((nm, rest)) => (nm, rest.trim_end_matches(')').parse::<f64>().unwrap()),
                    None => (head, 0.0),
                };
                match name {
                    "p" => psi.apply_1q(qs[0], &p(angle)),
                    "ry" => psi.apply_1q(qs[0], &ry(angle)),
                    "x" => psi.apply_1q(qs[0], &x),
                    "cx" => psi.apply_pair(qs[0], qs[1], &controlled(x)),
                    "cp" => psi.apply_pair(qs[0], qs[1], &controlled(p(angle))),
                    "cry" => psi.apply_pair(qs[0], qs[1], &cry_op(angle)),
                    other => panic!("unexpected gate {other}"),
                }
            }
            Ok(())
        })
        .unwrap()
    }

    #[test]
    fn qasm_expansion_reproduces_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = build_policy(3, &LayerKind::ALL).unwrap();
        let params: Vec<f64> = (0..c.n_params()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let text = to_qasm(&c, &params).unwrap();
        let u = run_qasm(&text, 3);
        let want = reconstruct(&c, &params).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert!((u.get(i, j) - want.get(i, j)).norm() < 1e-10);
            }
        }
    }
}
