//! Learning the quantum Fourier transform on a shared register.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::framework::{
    Action, EpisodeSpec, FrameworkResult, InteractionInput, InteractionSpec, RegisterLayout, Round,
    TargetFidelity,
};
use crate::grad::GradResult;
use crate::pqc::{build_policy, LayerKind, ParamCircuit};
use crate::statevec::StateVector;

use super::TaskError;

#[derive(Debug, Clone, PartialEq)]
pub struct QftTask {
    pub n: usize,
    pub layers: Vec<LayerKind>,
    pub depth: usize,
}

impl QftTask {
    /// Defaults to the matchgate pyramid alone: the full layer stack starts
    /// next to a product-state optimum that gradient ascent rarely leaves.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            layers: vec![LayerKind::MatchgatePyramid],
            depth: 1,
        }
    }

    pub fn policy(&self) -> Result<ParamCircuit, TaskError> {
        if self.n == 0 {
            return Err(TaskError::Invalid("qft needs n >= 1".into()));
        }
        Ok(build_policy(self.n, &self.layers)?.stack(self.depth)?)
    }

    /// `K = 2ⁿ` interactions, one per basis input, scored by the mean
    /// fidelity to the transformed state.
    pub fn episode_with(&self, policy: ParamCircuit) -> FrameworkResult<EpisodeSpec> {
        let n = self.n;
        let layout = RegisterLayout::new(0, n, 0)?;
        let spec = InteractionSpec::new(layout, vec![policy], vec![Round::new(Some(Action::Policy(0)), None)])?;
        let d = 1usize << n;
        let inputs = (0..d).map(InteractionInput::basis).collect();
        let utility = TargetFidelity {
            targets: (0..d).map(|x| qft_target(n, x)).collect(),
            weights: vec![1.0 / d as f64; d],
        };
        EpisodeSpec::new(spec, inputs, Arc::new(utility))
    }

    pub fn episode(&self) -> Result<EpisodeSpec, TaskError> {
        Ok(self.episode_with(self.policy()?)?)
    }
}

/// `(1/√2ⁿ) Σ_k e^{2πi·xk/2ⁿ} |k⟩`.
pub fn qft_target(n: usize, x: usize) -> StateVector {
    let d = 1usize << n;
    assert!(x < d, "basis index {x} out of range for {n} qubits");
    let s = 1.0 / (d as f64).sqrt();
    let amps = (0..d)
        .map(|k| C64::from_polar(s, 2.0 * PI * ((x * k) % d) as f64 / d as f64))
        .collect();
    StateVector::from_amplitudes(amps).expect("QFT column is normalized")
}

/// Mean fidelity of `policy` to the QFT over all basis inputs.
pub fn qft_reward(task: &QftTask, policy: &ParamCircuit, params: &[f64]) -> Result<f64, TaskError> {
    if policy.n_qubits() != task.n {
        return Err(TaskError::Invalid(format!(
            "policy has {} qubits, task needs {}",
            policy.n_qubits(),
            task.n
        )));
    }
    let ep = task.episode_with(policy.clone().at_offset(0))?;
    let r: GradResult<f64> = ep.run(params);
    Ok(r?)
}
