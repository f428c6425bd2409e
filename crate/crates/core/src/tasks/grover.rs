//! Unstructured search with a phase oracle between agent moves.
//!
//! Round schedule for `k` queries: the pre-query policy, the oracle, then
//! `k` post-query policies each followed by the oracle except the last.
//! Policy slots are ordered `pre, post₁, …, post_k`, so a `k`-query solution
//! is a parameter prefix of a `k+1`-query episode.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::framework::{
    Action, EpisodeSpec, FrameworkResult, InteractionInput, InteractionSpec,
    RegisterLayout, Round, WeightedOutcomes,
};
use crate::grad::Program;
use crate::pqc::{build_policy, Angle, Gate, LayerKind, ParamCircuit};
use crate::statevec::StateVector;

use super::TaskError;

#[derive(Debug, Clone, PartialEq)]
pub struct GroverTask {
    pub n: usize,
    pub queries: usize,
    pub layers: Vec<LayerKind>,
    pub depth: usize,
}

impl GroverTask {
    pub fn new(n: usize, queries: usize) -> Self {
        Self {
            n,
            queries,
            layers: LayerKind::CORE.to_vec(),
            depth: 1,
        }
    }

    pub fn database_size(&self) -> usize {
        1 << self.n
    }

    fn check(&self) -> Result<(), TaskError> {
        if self.n == 0 || self.queries == 0 {
            return Err(TaskError::Invalid("grover needs n >= 1 and queries >= 1".into()));
        }
        Ok(())
    }

    /// Trainable policies: pre-query, then one per query.
    pub fn policies(&self) -> Result<Vec<ParamCircuit>, TaskError> {
        self.check()?;
        let p = build_policy(self.n, &self.layers)?.stack(self.depth)?;
        Ok(vec![p; self.queries + 1])
    }

    pub fn episode_with(&self, pre: Action, post: Vec<Action>, policies: Vec<ParamCircuit>) -> FrameworkResult<EpisodeSpec> {
        let n = self.n;
        let qubits: Vec<usize> = (0..n).collect();
        let oracle = || Some(Action::PhaseOracle(qubits.clone()));
        let mut rounds = vec![Round::new(Some(pre), oracle())];
        let k = post.len();
        for (j, a) in post.into_iter().enumerate() {
            rounds.push(Round::new(Some(a), if j + 1 < k { oracle() } else { None }));
        }
        let spec = InteractionSpec::new(RegisterLayout::new(0, n, 0)?, policies, rounds)?;
        let d = 1usize << n;
        let inputs = (0..d).map(|w| InteractionInput::basis(0).with_marked(w)).collect();
        let weights = (0..d)
            .map(|w| {
                let mut v = vec![0.0; d];
                v[w] = 1.0 / d as f64;
                v
            })
            .collect();
        EpisodeSpec::new(spec, inputs, Arc::new(WeightedOutcomes { weights }))
    }

    pub fn episode(&self) -> Result<EpisodeSpec, TaskError> {
        let policies = self.policies()?;
        let post = (1..=self.queries).map(Action::Policy).collect();
        Ok(self.episode_with(Action::Policy(0), post, policies)?)
    }

    pub fn optimum(&self) -> f64 {
        grover_closed_form(self.database_size(), self.queries)
    }
}

/// `H = U(π/2, π)` on every qubit.
pub fn hadamard_wall(n: usize) -> ParamCircuit {
    let gates = (0..n)
        .map(|q| Gate::u(q, Angle::Fixed(PI / 2.0), Angle::Fixed(PI)))
        .collect();
    ParamCircuit::from_gates(n, gates).expect("single-qubit gates are always valid")
}

/// The textbook diffusion `2|s⟩⟨s| − I`, up to a global sign: Hadamard
/// wall, sign flip of `|0…0⟩`, Hadamard wall.
pub fn diffusion_program(n: usize) -> Program {
    let wall = hadamard_wall(n);
    let mut p = Program::new();
    p.push_circuit(&wall, &[], None).expect("constant circuit");
    p.push_phase_flip((0..n).collect(), 0);
    p.push_circuit(&wall, &[], None).expect("constant circuit");
    p
}

/// Hadamard wall followed by `k` rounds of (oracle, diffusion).
pub fn canonical_grover(n: usize, k: usize) -> Program {
    let mut p = Program::new();
    p.push_circuit(&hadamard_wall(n), &[], None).expect("constant circuit");
    let diffusion = diffusion_program(n);
    for _ in 0..k {
        p.push_oracle((0..n).collect());
        p.append(&diffusion);
    }
    p
}

/// Mean success probability of the canonical pipeline over all marked items.
pub fn canonical_grover_reward(n: usize, k: usize) -> Result<f64, TaskError> {
    let p = canonical_grover(n, k);
    let d = 1usize << n;
    let mut total = 0.0;
    for w in 0..d {
        let mut psi = StateVector::zero(n)?;
        p.forward(&mut psi, Some(w))?;
        total += psi.amplitudes()[w].norm_sqr();
    }
    Ok(total / d as f64)
}

/// `sin²((2k+1)·arcsin(1/√N))`.
pub fn grover_closed_form(database_size: usize, k: usize) -> f64 {
    let theta = (1.0 / (database_size as f64).sqrt()).asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// Episode reward for explicit policies (`pre`, then one per query).
pub fn grover_reward(
    task: &GroverTask,
    pre: &ParamCircuit,
    post: &[ParamCircuit],
    params: &[f64],
) -> Result<f64, TaskError> {
    if post.len() != task.queries {
        return Err(TaskError::Invalid(format!(
            "{} post-query policies for {} queries",
            post.len(),
            task.queries
        )));
    }
    let mut policies = vec![pre.clone()];
    policies.extend(post.iter().cloned());
    let actions = (1..=post.len()).map(Action::Policy).collect();
    let ep = task.episode_with(Action::Policy(0), actions, policies)?;
    Ok(ep.run(params)?)
}
