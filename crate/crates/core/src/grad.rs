//! Exact reverse-mode gradients through gate sequences.
//!
//! A [`Program`] is a gate list bound to concrete angles, with each trainable
//! angle tagged by its index in a global parameter vector. Gradients follow
//! the adjoint sweep: run forward, seed `λ = ∂R/∂ψ*` at the end, then walk the
//! gates backwards un-applying each one and accumulating
//! `2·Re⟨λ|∂G|ψ⟩` before pulling `λ` back through `G†`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::pqc::{GateAction, ParamCircuit, PqcError};
use crate::statevec::{Mat2, PairOp, StateError, StateVector};

pub type GradientVector = Vec<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradError {
    #[error("operation '{0}' is not differentiable")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("expected {expected} parameters, got {got}")]
    ParamLength { expected: usize, got: usize },
    #[error(transparent)]
    Pqc(#[from] PqcError),
    #[error(transparent)]
    State(#[from] StateError),
}

pub type GradResult<T> = Result<T, GradError>;

/// A scalar reward over a flat parameter vector.
pub trait Objective: Sync {
    fn num_params(&self) -> usize;
    fn value(&self, params: &[f64]) -> GradResult<f64>;
    fn value_and_gradient(&self, params: &[f64]) -> GradResult<(f64, GradientVector)>;
}

/// `∂R/∂params` of an objective.
pub fn gradient(objective: &dyn Objective, params: &[f64]) -> GradResult<GradientVector> {
    objective.value_and_gradient(params).map(|(_, g)| g)
}

/// Central differences with step `h`.
pub fn finite_difference<F>(f: F, params: &[f64], h: f64) -> GradientVector
where
    F: Fn(&[f64]) -> f64,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let mut p = params.to_vec();
    (0..params.len())
        .map(|i| {
            let x = p[i];
            p[i] = x + h;
            let up = f(&p);
            p[i] = x - h;
            let down = f(&p);
            p[i] = x;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Comparison of an analytic gradient against a numeric one.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_abs_error: f64,
    pub worst_index: Option<usize>,
    pub analytic: f64,
    pub numeric: f64,
}

impl GradCheck {
    pub fn within(&self, tol: f64) -> bool {
        self.max_abs_error < tol
    }
}

impl fmt::Display for GradCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.worst_index {
            Some(i) => write!(
                f,
                "max |analytic - numeric| = {:.3e} at parameter {} (analytic {:.9}, numeric {:.9})",
                self.max_abs_error, i, self.analytic, self.numeric
            ),
            None => write!(f, "no parameters"),
        }
    }
}

pub fn compare_gradients(analytic: &[f64], numeric: &[f64]) -> GradCheck {
    assert_eq!(analytic.len(), numeric.len(), "gradient lengths differ");
    let mut out = GradCheck {
        max_abs_error: 0.0,
        worst_index: None,
        analytic: 0.0,
        numeric: 0.0,
    };
    for (i, (a, n)) in analytic.iter().zip(numeric).enumerate() {
        let e = (a - n).abs();
        if out.worst_index.is_none() || e > out.max_abs_error || e.is_nan() {
            out = GradCheck {
                max_abs_error: e,
                worst_index: Some(i),
                analytic: *a,
                numeric: *n,
            };
        }
    }
    out
}

pub type OpaqueFn = Arc<dyn Fn(&mut StateVector) + Send + Sync>;

#[derive(Clone)]
pub(crate) enum Op {
    One {
        q: usize,
        m: Mat2,
        derivs: Vec<(usize, Mat2)>,
    },
    Pair {
        a: usize,
        b: usize,
        op: PairOp,
        derivs: Vec<(usize, PairOp)>,
    },
    /// Sign flip on `qubits == marked`; `fixed` overrides the per-run item.
    Oracle { qubits: Vec<usize>, fixed: Option<usize> },
    Opaque { name: String, f: OpaqueFn },
}

/// A gate sequence over a full register, bound to concrete angles.
#[derive(Clone, Default)]
pub struct Program {
    ops: Vec<Op>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Appends `circuit` with `params`. When `offset` is set, each angle
    /// `Param(i)` is trainable under global index `offset + i`; otherwise the
    /// circuit is treated as fixed.
    pub fn push_circuit(
        &mut self,
        circuit: &ParamCircuit,
        params: &[f64],
        offset: Option<usize>,
    ) -> GradResult<()> {
        circuit.check_params(params)?;
        let w = circuit.window();
        for g in circuit.gates() {
            let v = g.resolve(params);
            let slots: Vec<(usize, usize)> = match offset {
                Some(off) => g
                    .angles()
                    .iter()
                    .enumerate()
                    .filter_map(|(k, a)| match a {
                        crate::pqc::Angle::Param(i) => Some((k, off + i)),
                        crate::pqc::Angle::Fixed(_) => None,
                    })
                    .collect(),
                None => Vec::new(),
            };
            let ds = if slots.is_empty() { Vec::new() } else { g.derivatives(v) };
            match g.action(v) {
                GateAction::One(m) => self.ops.push(Op::One {
                    q: w[g.qubits[0]],
                    m,
                    derivs: slots
                        .iter()
                        .map(|&(k, p)| match ds[k] {
                            GateAction::One(d) => (p, d),
                            GateAction::Pair(_) => unreachable!("single-qubit derivative"),
                        })
                        .collect(),
                }),
                GateAction::Pair(op) => self.ops.push(Op::Pair {
                    a: w[g.qubits[0]],
                    b: w[g.qubits[1]],
                    op,
                    derivs: slots
                        .iter()
                        .map(|&(k, p)| match ds[k] {
                            GateAction::Pair(d) => (p, d),
                            GateAction::One(_) => unreachable!("two-qubit derivative"),
                        })
                        .collect(),
                }),
            }
        }
        Ok(())
    }

    /// Oracle marking the per-run item.
    pub fn push_oracle(&mut self, qubits: Vec<usize>) {
        self.ops.push(Op::Oracle { qubits, fixed: None });
    }

    /// Sign flip of one fixed basis pattern on `qubits`.
    pub fn push_phase_flip(&mut self, qubits: Vec<usize>, marked: usize) {
        self.ops.push(Op::Oracle {
            qubits,
            fixed: Some(marked),
        });
    }

    /// Appends an arbitrary state map. Programs containing one can be run
    /// forward but not differentiated.
    pub fn push_opaque(&mut self, name: impl Into<String>, f: OpaqueFn) {
        self.ops.push(Op::Opaque {
            name: name.into(),
            f,
        });
    }

    pub fn append(&mut self, other: &Program) {
        self.ops.extend(other.ops.iter().cloned());
    }

    fn oracle_marked(marked: Option<usize>) -> GradResult<usize> {
        marked.ok_or_else(|| GradError::Config("oracle applied without a marked item".into()))
    }

    /// Checks every qubit index against the state size.
    pub fn check(&self, n_qubits: usize) -> GradResult<()> {
        for op in &self.ops {
            let worst = match op {
                Op::One { q, .. } => Some(*q),
                Op::Pair { a, b, .. } => Some(*a.max(b)),
                Op::Oracle { qubits, .. } => qubits.iter().copied().max(),
                Op::Opaque { .. } => None,
            };
            if let Some(qubit) = worst.filter(|&q| q >= n_qubits) {
                return Err(GradError::State(StateError::QubitOutOfRange { qubit, n_qubits }));
            }
        }
        Ok(())
    }

    pub fn forward(&self, state: &mut StateVector, marked: Option<usize>) -> GradResult<()> {
        self.check(state.n_qubits())?;
        for op in &self.ops {
            match op {
                Op::One { q, m, .. } => state.apply_1q(*q, m),
                Op::Pair { a, b, op, .. } => state.apply_pair(*a, *b, op),
                Op::Oracle { qubits, fixed } => {
                    state.phase_oracle_on(qubits, Self::oracle_marked(fixed.or(marked))?)?
                }
                Op::Opaque { f, .. } => f(state),
            }
        }
        Ok(())
    }

    /// Adds `∂R/∂params` into `grad`, given the final state and the cotangent
    /// `λ = ∂R/∂ψ*` at the end of the program.
    pub fn backward(
        &self,
        final_state: &StateVector,
        cotangent: &[C64],
        marked: Option<usize>,
        grad: &mut [f64],
    ) -> GradResult<()> {
        if let Some(Op::Opaque { name, .. }) = self.ops.iter().find(|o| matches!(o, Op::Opaque { .. })) {
            return Err(GradError::Unsupported(name.clone()));
        }
        if cotangent.len() != final_state.dim() {
            return Err(GradError::State(StateError::BadLength(cotangent.len())));
        }
        self.check(final_state.n_qubits())?;
        let n = final_state.n_qubits();
        let mut psi = final_state.clone();
        let mut lam = StateVector::from_raw(n, cotangent.to_vec());
        for op in self.ops.iter().rev() {
            match op {
                Op::One { q, m, derivs } => {
                    let md = crate::statevec::dagger2(m);
                    psi.apply_1q(*q, &md);
                    for (p, d) in derivs {
                        grad[*p] += 2.0 * psi.sandwich_1q(lam.amplitudes(), *q, d).re;
                    }
                    lam.apply_1q(*q, &md);
                }
                Op::Pair { a, b, op, derivs } => {
                    let od = op.dagger();
                    psi.apply_pair(*a, *b, &od);
                    for (p, d) in derivs {
                        grad[*p] += 2.0 * psi.sandwich_pair(lam.amplitudes(), *a, *b, d).re;
                    }
                    lam.apply_pair(*a, *b, &od);
                }
                Op::Oracle { qubits, fixed } => {
                    let m = Self::oracle_marked(fixed.or(marked))?;
                    psi.phase_oracle_on(qubits, m)?;
                    lam.phase_oracle_on(qubits, m)?;
                }
                Op::Opaque { .. } => unreachable!("rejected above"),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqc::{build_policy, LayerKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Reward `|⟨target|C(p)|init⟩|²` through a program.
    fn overlap_reward(c: &ParamCircuit, init: &StateVector, target: &StateVector, p: &[f64]) -> (f64, Vec<f64>) {
        let mut prog = Program::new();
        prog.push_circuit(c, p, Some(0)).unwrap();
        let mut psi = init.clone();
        prog.forward(&mut psi, None).unwrap();
        let ov = target.overlap(&psi).unwrap();
        let lam: Vec<C64> = target.amplitudes().iter().map(|t| t * ov).collect();
        let mut g = vec![0.0; p.len()];
        prog.backward(&psi, &lam, None, &mut g).unwrap();
        (ov.norm_sqr(), g)
    }

    #[test]
    fn sin_squared_half_angle() {
        let c = build_policy(1, &[LayerKind::RYPhaseShift]).unwrap();
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let (r, g) = overlap_reward(&c, &zero, &one, &[PI / 2.0, 0.0]);
        assert!((r - 0.5).abs() < 1e-14);
        assert!((g[0] - 0.5).abs() < 1e-12);
        assert!(g[1].abs() < 1e-12);
    }

    #[test]
    fn finite_difference_examples() {
        let lin = finite_difference(|p| 3.5 * p[0], &[0.7], 0.1);
        assert!((lin[0] - 3.5).abs() < 1e-12);
        let s = finite_difference(|p| (p[0] / 2.0).sin().powi(2), &[PI / 2.0], 1e-5);
        assert!((s[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn mismatch_report_names_worst_index() {
        let chk = compare_gradients(&[0.1, 0.2, 0.3], &[0.1, 0.25, 0.3]);
        assert_eq!(chk.worst_index, Some(1));
        assert!(!chk.within(1e-3));
        assert!(chk.to_string().contains("parameter 1"));
    }

    #[test]
    fn matches_finite_differences_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let c = build_policy(4, &LayerKind::ALL).unwrap();
            let p: Vec<f64> = (0..c.n_params()).map(|_| rng.gen_range(-PI..PI)).collect();
            let init = StateVector::basis(4, trial % 16).unwrap();
            let target = StateVector::basis(4, (trial * 7 + 3) % 16).unwrap();
            let (_, g) = overlap_reward(&c, &init, &target, &p);
            let fd = finite_difference(|q| overlap_reward(&c, &init, &target, q).0, &p, 1e-5);
            let chk = compare_gradients(&g, &fd);
            assert!(chk.within(1e-5), "trial {trial}: {chk}");
        }
    }

    #[test]
    fn opaque_ops_are_rejected() {
        let mut prog = Program::new();
        prog.push_opaque("measure", Arc::new(|_s: &mut StateVector| {}));
        let psi = StateVector::zero(1).unwrap();
        let err = prog.backward(&psi, psi.amplitudes(), None, &mut []).unwrap_err();
        assert_eq!(err, GradError::Unsupported("measure".into()));
    }
}
