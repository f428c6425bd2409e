//! Two-agent interactions over a split register `R_A ⊗ R_M ⊗ R_B`.
//!
//! Qubits are indexed `R_A = 0..n_a`, `R_M = n_a..n_a+n_m`,
//! `R_B = n_a+n_m..N`. In every round agent A acts on `R_A ∪ R_M` and then
//! agent B acts on `R_M ∪ R_B`. An episode runs the same interaction on `K`
//! prepared inputs and scores all final states jointly.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

use crate::grad::{GradError, GradResult, GradientVector, Objective, OpaqueFn, Program};
use crate::pqc::ParamCircuit;
use crate::statevec::{StateVector, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameworkError {
    #[error("round {round}: agent {agent} touches qubit {qubit} outside its registers")]
    Confinement { round: usize, agent: Agent, qubit: usize },
    #[error("round {round}: policy slot {slot} does not exist")]
    UnknownPolicy { round: usize, slot: usize },
    #[error("policy slot {0} is never used")]
    UnusedPolicy(usize),
    #[error("register layout has {0} qubits (allowed 1..={MAX_QUBITS})")]
    Layout(usize),
    #[error("an episode needs at least one interaction")]
    NoInteractions,
    #[error("input {index}: {msg}")]
    Input { index: usize, msg: String },
}

pub type FrameworkResult<T> = Result<T, FrameworkError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Agent {
    A,
    B,
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agent::A => "A",
            Agent::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    pub n_a: usize,
    pub n_m: usize,
    pub n_b: usize,
}

impl RegisterLayout {
    pub fn new(n_a: usize, n_m: usize, n_b: usize) -> FrameworkResult<Self> {
        let l = Self { n_a, n_m, n_b };
        let n = l.n_qubits();
        if n == 0 || n > MAX_QUBITS {
            return Err(FrameworkError::Layout(n));
        }
        Ok(l)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_a + self.n_m + self.n_b
    }

    pub fn private_a(&self) -> std::ops::Range<usize> {
        0..self.n_a
    }

    pub fn shared(&self) -> std::ops::Range<usize> {
        self.n_a..self.n_a + self.n_m
    }

    pub fn private_b(&self) -> std::ops::Range<usize> {
        self.n_a + self.n_m..self.n_qubits()
    }

    /// Qubits `agent` may act on.
    pub fn reach(&self, agent: Agent) -> std::ops::Range<usize> {
        match agent {
            Agent::A => 0..self.n_a + self.n_m,
            Agent::B => self.n_a..self.n_qubits(),
        }
    }
}

/// A circuit with its parameters baked in.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedCircuit {
    pub circuit: ParamCircuit,
    pub params: Vec<f64>,
}

impl FixedCircuit {
    pub fn new(circuit: ParamCircuit, params: Vec<f64>) -> GradResult<Self> {
        circuit.check_params(&params)?;
        Ok(Self { circuit, params })
    }

    /// A circuit whose angles are all constants.
    pub fn constant(circuit: ParamCircuit) -> Self {
        assert_eq!(circuit.n_params(), 0, "constant circuit must not reference parameters");
        Self {
            circuit,
            params: Vec::new(),
        }
    }
}

/// What an agent does in one round.
#[derive(Clone)]
pub enum Action {
    /// Trainable circuit held in the interaction's policy slot.
    Policy(usize),
    Fixed(FixedCircuit),
    /// Sign flip of the input's marked item on these qubits.
    PhaseOracle(Vec<usize>),
    /// Sign flip of a fixed basis pattern on these qubits.
    PhaseFlip(Vec<usize>, usize),
    /// Arbitrary state map; runs forward but blocks differentiation.
    Opaque {
        name: String,
        qubits: Vec<usize>,
        f: OpaqueFn,
    },
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Policy(i) => write!(f, "Policy({i})"),
            Action::Fixed(c) => write!(f, "Fixed({} gates)", c.circuit.gates().len()),
            Action::PhaseOracle(q) => write!(f, "PhaseOracle({q:?})"),
            Action::PhaseFlip(q, m) => write!(f, "PhaseFlip({q:?}, {m})"),
            Action::Opaque { name, .. } => write!(f, "Opaque({name})"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Round {
    pub a: Option<Action>,
    pub b: Option<Action>,
}

impl Round {
    pub fn new(a: Option<Action>, b: Option<Action>) -> Self {
        Self { a, b }
    }
}

/// Register layout, trainable policy slots and the round schedule.
#[derive(Debug, Clone)]
pub struct InteractionSpec {
    layout: RegisterLayout,
    policies: Vec<ParamCircuit>,
    offsets: Vec<usize>,
    rounds: Vec<Round>,
}

impl InteractionSpec {
    pub fn new(
        layout: RegisterLayout,
        policies: Vec<ParamCircuit>,
        rounds: Vec<Round>,
    ) -> FrameworkResult<Self> {
        let mut used = vec![false; policies.len()];
        for (t, round) in rounds.iter().enumerate() {
            for (agent, action) in [(Agent::A, &round.a), (Agent::B, &round.b)] {
                let Some(action) = action else { continue };
                let qubits: Vec<usize> = match action {
                    Action::Policy(slot) => {
                        let c = policies
                            .get(*slot)
                            .ok_or(FrameworkError::UnknownPolicy { round: t, slot: *slot })?;
                        used[*slot] = true;
                        c.window().to_vec()
                    }
                    Action::Fixed(fc) => fc.circuit.window().to_vec(),
                    Action::PhaseOracle(q) | Action::PhaseFlip(q, _) => q.clone(),
                    Action::Opaque { qubits, .. } => qubits.clone(),
                };
                let reach = layout.reach(agent);
                if let Some(&qubit) = qubits.iter().find(|q| !reach.contains(q)) {
                    return Err(FrameworkError::Confinement { round: t, agent, qubit });
                }
            }
        }
        if let Some(slot) = used.iter().position(|u| !u) {
            return Err(FrameworkError::UnusedPolicy(slot));
        }
        let mut offsets = Vec::with_capacity(policies.len());
        let mut acc = 0;
        for p in &policies {
            offsets.push(acc);
            acc += p.n_params();
        }
        Ok(Self {
            layout,
            policies,
            offsets,
            rounds,
        })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn policies(&self) -> &[ParamCircuit] {
        &self.policies
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn n_params(&self) -> usize {
        self.policies.iter().map(|p| p.n_params()).sum()
    }

    /// Index range of policy slot `i` inside the flat parameter vector.
    pub fn param_range(&self, slot: usize) -> std::ops::Range<usize> {
        self.offsets[slot]..self.offsets[slot] + self.policies[slot].n_params()
    }

    /// Binds `params` into a runnable program.
    pub fn program(&self, params: &[f64]) -> GradResult<Program> {
        if params.len() != self.n_params() {
            return Err(GradError::ParamLength {
                expected: self.n_params(),
                got: params.len(),
            });
        }
        let mut prog = Program::new();
        for round in &self.rounds {
            for action in [&round.a, &round.b].into_iter().flatten() {
                match action {
                    Action::Policy(slot) => prog.push_circuit(
                        &self.policies[*slot],
                        &params[self.param_range(*slot)],
                        Some(self.offsets[*slot]),
                    )?,
                    Action::Fixed(fc) => prog.push_circuit(&fc.circuit, &fc.params, None)?,
                    Action::PhaseOracle(q) => prog.push_oracle(q.clone()),
                    Action::PhaseFlip(q, m) => prog.push_phase_flip(q.clone(), *m),
                    Action::Opaque { name, f, .. } => prog.push_opaque(name.clone(), f.clone()),
                }
            }
        }
        Ok(prog)
    }

    /// Runs one interaction: preparation, then every round in order.
    pub fn run(&self, input: &InteractionInput, params: &[f64]) -> GradResult<StateVector> {
        let prog = self.program(params)?;
        let mut psi = input.prepare(self.layout.n_qubits())?;
        prog.forward(&mut psi, input.marked)?;
        Ok(psi)
    }
}

/// Per-interaction input: a basis state, optional fixed preparation
/// circuits, and the marked item read by phase oracles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InteractionInput {
    pub basis: usize,
    pub prep: Vec<FixedCircuit>,
    pub marked: Option<usize>,
}

impl InteractionInput {
    pub fn basis(index: usize) -> Self {
        Self {
            basis: index,
            ..Self::default()
        }
    }

    pub fn with_marked(mut self, marked: usize) -> Self {
        self.marked = Some(marked);
        self
    }

    pub fn with_prep(mut self, c: FixedCircuit) -> Self {
        self.prep.push(c);
        self
    }

    pub fn prepare(&self, n_qubits: usize) -> GradResult<StateVector> {
        let mut psi = StateVector::basis(n_qubits, self.basis)?;
        for c in &self.prep {
            c.circuit.apply_in_place(&c.params, &mut psi)?;
        }
        Ok(psi)
    }
}

/// Scalar score of all final states of an episode.
pub trait Utility: Send + Sync {
    fn reward(&self, finals: &[StateVector]) -> GradResult<f64>;

    /// `∂R/∂ψ_k*` for each interaction `k`.
    fn cotangents(&self, _finals: &[StateVector]) -> GradResult<Vec<Vec<C64>>> {
        Err(GradError::Unsupported("utility without cotangents".into()))
    }
}

fn check_count(expected: usize, finals: &[StateVector]) -> GradResult<()> {
    if finals.len() != expected {
        return Err(GradError::Config(format!(
            "utility expects {expected} interactions, got {}",
            finals.len()
        )));
    }
    Ok(())
}

/// `R = Σ_k Σ_i w_k[i] |ψ_k[i]|²`: any reward linear in the outcome
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOutcomes {
    pub weights: Vec<Vec<f64>>,
}

impl Utility for WeightedOutcomes {
    fn reward(&self, finals: &[StateVector]) -> GradResult<f64> {
        check_count(self.weights.len(), finals)?;
        let mut r = 0.0;
        for (w, psi) in self.weights.iter().zip(finals) {
            if w.len() != psi.dim() {
                return Err(GradError::Config("weight table has wrong dimension".into()));
            }
            r += w
                .iter()
                .zip(psi.amplitudes())
                .map(|(w, a)| w * a.norm_sqr())
                .sum::<f64>();
        }
        Ok(r)
    }

    fn cotangents(&self, finals: &[StateVector]) -> GradResult<Vec<Vec<C64>>> {
        check_count(self.weights.len(), finals)?;
        Ok(self
            .weights
            .iter()
            .zip(finals)
            .map(|(w, psi)| w.iter().zip(psi.amplitudes()).map(|(w, a)| a * *w).collect())
            .collect())
    }
}

/// `R = Σ_k c_k |⟨t_k|ψ_k⟩|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFidelity {
    pub targets: Vec<StateVector>,
    pub weights: Vec<f64>,
}

impl Utility for TargetFidelity {
    fn reward(&self, finals: &[StateVector]) -> GradResult<f64> {
        check_count(self.targets.len(), finals)?;
        let mut r = 0.0;
        for ((t, w), psi) in self.targets.iter().zip(&self.weights).zip(finals) {
            r += w * t.overlap(psi)?.norm_sqr();
        }
        Ok(r)
    }

    fn cotangents(&self, finals: &[StateVector]) -> GradResult<Vec<Vec<C64>>> {
        check_count(self.targets.len(), finals)?;
        self.targets
            .iter()
            .zip(&self.weights)
            .zip(finals)
            .map(|((t, w), psi)| {
                let ov = t.overlap(psi)? * *w;
                Ok(t.amplitudes().iter().map(|a| a * ov).collect())
            })
            .collect()
    }
}

pub type RewardFn = Arc<dyn Fn(&[StateVector]) -> f64 + Send + Sync>;

/// A closure reward. It can be evaluated but not differentiated.
#[derive(Clone)]
pub struct CustomUtility(pub RewardFn);

impl Utility for CustomUtility {
    fn reward(&self, finals: &[StateVector]) -> GradResult<f64> {
        Ok((self.0)(finals))
    }
}

/// An interaction run on `K` inputs, scored by a utility.
#[derive(Clone)]
pub struct EpisodeSpec {
    pub interaction: InteractionSpec,
    pub inputs: Vec<InteractionInput>,
    pub utility: Arc<dyn Utility>,
}

impl fmt::Debug for EpisodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EpisodeSpec")
            .field("interaction", &self.interaction)
            .field("inputs", &self.inputs.len())
            .finish()
    }
}

impl EpisodeSpec {
    pub fn new(
        interaction: InteractionSpec,
        inputs: Vec<InteractionInput>,
        utility: Arc<dyn Utility>,
    ) -> FrameworkResult<Self> {
        if inputs.is_empty() {
            return Err(FrameworkError::NoInteractions);
        }
        let n = interaction.layout().n_qubits();
        for (index, inp) in inputs.iter().enumerate() {
            if inp.basis >= 1 << n {
                return Err(FrameworkError::Input {
                    index,
                    msg: format!("basis index {} exceeds {n} qubits", inp.basis),
                });
            }
            if let Some(fc) = inp.prep.iter().find(|c| c.circuit.check_fits(n).is_err()) {
                return Err(FrameworkError::Input {
                    index,
                    msg: format!("preparation window {:?} exceeds {n} qubits", fc.circuit.window()),
                });
            }
        }
        Ok(Self {
            interaction,
            inputs,
            utility,
        })
    }

    pub fn n_interactions(&self) -> usize {
        self.inputs.len()
    }

    /// Final states of all interactions, in input order.
    pub fn final_states(&self, params: &[f64]) -> GradResult<Vec<StateVector>> {
        let prog = self.interaction.program(params)?;
        let n = self.interaction.layout().n_qubits();
        self.inputs
            .par_iter()
            .map(|inp| {
                let mut psi = inp.prepare(n)?;
                prog.forward(&mut psi, inp.marked)?;
                Ok(psi)
            })
            .collect()
    }

    pub fn run(&self, params: &[f64]) -> GradResult<f64> {
        let finals = self.final_states(params)?;
        self.utility.reward(&finals)
    }
}

impl Objective for EpisodeSpec {
    fn num_params(&self) -> usize {
        self.interaction.n_params()
    }

    fn value(&self, params: &[f64]) -> GradResult<f64> {
        self.run(params)
    }

    fn value_and_gradient(&self, params: &[f64]) -> GradResult<(f64, GradientVector)> {
        let prog = self.interaction.program(params)?;
        let n = self.interaction.layout().n_qubits();
        let finals: Vec<StateVector> = self
            .inputs
            .par_iter()
            .map(|inp| {
                let mut psi = inp.prepare(n)?;
                prog.forward(&mut psi, inp.marked)?;
                Ok(psi)
            })
            .collect::<GradResult<_>>()?;
        let reward = self.utility.reward(&finals)?;
        let lams = self.utility.cotangents(&finals)?;
        let d = params.len();
        let parts: Vec<Vec<f64>> = self
            .inputs
            .par_iter()
            .zip(finals.par_iter())
            .zip(lams.par_iter())
            .map(|((inp, psi), lam)| {
                let mut g = vec![0.0; d];
                prog.backward(psi, lam, inp.marked, &mut g)?;
                Ok(g)
            })
            .collect::<GradResult<_>>()?;
        let mut grad = vec![0.0; d];
        for g in &parts {
            for (acc, x) in grad.iter_mut().zip(g) {
                *acc += x;
            }
        }
        Ok((reward, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqc::{build_policy, LayerKind};
    use std::f64::consts::PI;

    #[test]
    fn identity_round_keeps_prepared_state() {
        let layout = RegisterLayout::new(1, 1, 1).unwrap();
        let a = build_policy(2, &[LayerKind::RYPhaseShift]).unwrap();
        let b = build_policy(2, &[LayerKind::RYPhaseShift]).unwrap().at_offset(1);
        let spec = InteractionSpec::new(
            layout,
            vec![a, b],
            vec![Round::new(Some(Action::Policy(0)), Some(Action::Policy(1)))],
        )
        .unwrap();
        let out = spec.run(&InteractionInput::basis(5), &vec![0.0; 8]).unwrap();
        assert!((out.amplitudes()[5].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn swap_layer_moves_private_into_shared() {
        let layout = RegisterLayout::new(2, 2, 0).unwrap();
        let a = build_policy(4, &[LayerKind::SwapLayer]).unwrap();
        let spec = InteractionSpec::new(layout, vec![a], vec![Round::new(Some(Action::Policy(0)), None)])
            .unwrap();
        let out = spec.run(&InteractionInput::basis(0b1000), &vec![PI; 4]).unwrap();
        assert!((out.amplitudes()[0b0010].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn confinement_rejects_cross_register_policy() {
        let layout = RegisterLayout::new(1, 1, 1).unwrap();
        let a = build_policy(2, &[LayerKind::RYPhaseShift]).unwrap().at_offset(1);
        let err = InteractionSpec::new(layout, vec![a], vec![Round::new(Some(Action::Policy(0)), None)])
            .unwrap_err();
        assert_eq!(err, FrameworkError::Confinement { round: 0, agent: Agent::A, qubit: 2 });
    }

    #[test]
    fn all_zero_probability_episode() {
        let layout = RegisterLayout::new(0, 2, 0).unwrap();
        let a = build_policy(2, &LayerKind::CORE).unwrap();
        let spec = InteractionSpec::new(layout, vec![a], vec![Round::new(Some(Action::Policy(0)), None)])
            .unwrap();
        let mut w = vec![0.0; 4];
        w[0] = 1.0;
        let ep = EpisodeSpec::new(
            spec,
            vec![InteractionInput::basis(0)],
            Arc::new(WeightedOutcomes { weights: vec![w] }),
        )
        .unwrap();
        let r = ep.run(&vec![0.0; ep.num_params()]).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn custom_utility_is_not_differentiable() {
        let layout = RegisterLayout::new(0, 1, 0).unwrap();
        let a = build_policy(1, &[LayerKind::RYPhaseShift]).unwrap();
        let spec = InteractionSpec::new(layout, vec![a], vec![Round::new(Some(Action::Policy(0)), None)])
            .unwrap();
        let ep = EpisodeSpec::new(
            spec,
            vec![InteractionInput::basis(0)],
            Arc::new(CustomUtility(Arc::new(|f: &[StateVector]| f[0].distribution()[1]))),
        )
        .unwrap();
        assert!((ep.value(&[PI, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(ep.value_and_gradient(&[PI, 0.0]), Err(GradError::Unsupported(_))));
    }
}
