//! Strong coin flipping with qutrit commitments.
//!
//! Alice commits to her coin `a` with `|ψ_a⟩ = (|aa⟩ + |22⟩)/√2`, keeps one
//! qutrit and sends the other. Bob answers with his coin `b`. Alice then
//! reveals `a` and her qutrit, and Bob checks the pair against `|ψ_a⟩`.
//! The outcome is `a ⊕ b`. Either side may cheat; the other runs the frozen
//! honest circuits built here. Register placement lives in [`registers`].

pub mod registers;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::analysis::{reduced_density, trace_norm};
use crate::framework::{
    Action, EpisodeSpec, FixedCircuit, FrameworkResult, InteractionInput, InteractionSpec,
    RegisterLayout, Round, WeightedOutcomes,
};
use crate::pqc::{build_policy, Angle, Gate, LayerKind, ParamCircuit};
use crate::statevec::StateVector;

use super::TaskError;
use registers::*;

/// Best cheating probability against the honest protocol.
pub const CHEAT_OPTIMUM: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cheater {
    Alice,
    Bob,
}

impl fmt::Display for Cheater {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cheater::Alice => "alice",
            Cheater::Bob => "bob",
        })
    }
}

impl FromStr for Cheater {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alice" | "a" => Ok(Cheater::Alice),
            "bob" | "b" => Ok(Cheater::Bob),
            _ => Err(TaskError::Invalid(format!("unknown cheater '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoinFlipTask {
    pub cheater: Cheater,
    pub desired_outcome: usize,
    pub layers: Vec<LayerKind>,
    /// Start the cheater's unused coin qubit in `|+⟩`.
    pub ancilla: bool,
}

/// Default cheater stack: every layer except the matchgate pyramid, which
/// slows the final approach to the optimum without adding reach.
pub const CHEATER_LAYERS: [LayerKind; 5] = [
    LayerKind::RYPhaseShift,
    LayerKind::CRYDownLadder,
    LayerKind::CRYUpLadder,
    LayerKind::RYPhaseShiftAdjoint,
    LayerKind::SwapLayer,
];

impl CoinFlipTask {
    pub fn new(cheater: Cheater) -> Self {
        Self {
            cheater,
            desired_outcome: 0,
            layers: CHEATER_LAYERS.to_vec(),
            ancilla: false,
        }
    }

    pub fn layout() -> RegisterLayout {
        RegisterLayout::new(N_A, N_M, N_B).expect("12 qubits fit")
    }

    /// Global qubits the cheater acts on.
    pub fn cheater_window(&self) -> Vec<usize> {
        Self::layout().reach(match self.cheater {
            Cheater::Alice => crate::framework::Agent::A,
            Cheater::Bob => crate::framework::Agent::B,
        })
        .collect()
    }

    fn check(&self) -> Result<(), TaskError> {
        if self.desired_outcome > 1 {
            return Err(TaskError::Invalid("desired outcome must be 0 or 1".into()));
        }
        Ok(())
    }

    /// One trainable circuit per round on the cheater's window.
    pub fn policies(&self) -> Result<Vec<ParamCircuit>, TaskError> {
        self.check()?;
        let p = build_policy(N_A + N_M, &self.layers)?.with_window(self.cheater_window())?;
        Ok(vec![p.clone(), p])
    }

    /// Episode over the honest party's coin with the cheater's two rounds
    /// in policy slots 0 and 1.
    pub fn episode_with(&self, round1: ParamCircuit, round2: ParamCircuit) -> Result<EpisodeSpec, TaskError> {
        self.check()?;
        let (rounds, honest_coin, ancilla) = match self.cheater {
            Cheater::Alice => (
                vec![
                    Round::new(Some(Action::Policy(0)), Some(fixed(honest_bob_round1()))),
                    Round::new(Some(Action::Policy(1)), Some(fixed(honest_bob_round2()))),
                ],
                BOB_COIN,
                ALICE_COIN,
            ),
            Cheater::Bob => (
                vec![
                    Round::new(Some(fixed(honest_alice_round1())), Some(Action::Policy(0))),
                    Round::new(Some(fixed(honest_alice_round2())), Some(Action::Policy(1))),
                ],
                ALICE_COIN,
                BOB_COIN,
            ),
        };
        let spec = InteractionSpec::new(Self::layout(), vec![round1, round2], rounds)?;
        let inputs = (0..2)
            .map(|coin| {
                let ones: &[usize] = if coin == 1 { &[honest_coin] } else { &[] };
                let inp = InteractionInput::basis(basis_with(ones));
                if self.ancilla {
                    inp.with_prep(hadamard_on(ancilla))
                } else {
                    inp
                }
            })
            .collect::<Vec<_>>();
        let w = self.outcome_weights();
        let ep = EpisodeSpec::new(spec, inputs, Arc::new(WeightedOutcomes { weights: vec![w.clone(), w] }))?;
        Ok(ep)
    }

    pub fn episode(&self) -> Result<EpisodeSpec, TaskError> {
        let mut p = self.policies()?;
        let r2 = p.pop().expect("two policies");
        let r1 = p.pop().expect("two policies");
        self.episode_with(r1, r2)
    }

    /// Per-basis-state credit: `1/2` when the cheater wins, already averaged
    /// over the two honest coin values.
    fn outcome_weights(&self) -> Vec<f64> {
        let c = self.desired_outcome;
        (0..1usize << N_QUBITS)
            .map(|i| {
                let win = match self.cheater {
                    Cheater::Alice => {
                        bob_outcome(i) == c && VERIFY_ZERO.iter().all(|&q| bit(i, q) == 0)
                    }
                    Cheater::Bob => alice_outcome(i) == c,
                };
                if win { 0.5 } else { 0.0 }
            })
            .collect()
    }
}

fn fixed(c: ParamCircuit) -> Action {
    Action::Fixed(FixedCircuit::constant(c))
}

fn hadamard_on(q: usize) -> FixedCircuit {
    let h = ParamCircuit::from_gates(1, vec![Gate::u(0, Angle::Fixed(PI / 2.0), Angle::Fixed(PI))])
        .expect("one gate")
        .with_window(vec![q])
        .expect("one qubit");
    FixedCircuit::constant(h)
}

/// Coin value Alice reads in basis state `i`.
pub fn alice_outcome(i: usize) -> usize {
    bit(i, ALICE_COIN) ^ bit(i, ALICE_B_RECORD)
}

/// Coin value Bob reads in basis state `i`.
pub fn bob_outcome(i: usize) -> usize {
    bit(i, MSG_A_DECLARED) ^ bit(i, BOB_COIN)
}

/// Cheater's success probability for explicit round circuits.
pub fn coinflip_cheat_reward(
    task: &CoinFlipTask,
    round1: &ParamCircuit,
    round2: &ParamCircuit,
    params: &[f64],
) -> Result<f64, TaskError> {
    let ep = task.episode_with(round1.clone(), round2.clone())?;
    Ok(ep.run(params)?)
}

/// Tracks named qubits through adjacent swaps so fixed circuits can be
/// written against labels instead of positions.
struct Router {
    labels: Vec<&'static str>,
    gates: Vec<Gate>,
}

impl Router {
    fn new(labels: &[&'static str]) -> Self {
        Self {
            labels: labels.to_vec(),
            gates: Vec::new(),
        }
    }

    fn pos(&self, label: &str) -> usize {
        self.labels
            .iter()
            .position(|l| *l == label)
            .unwrap_or_else(|| panic!("no qubit labelled {label}"))
    }

    fn swap(&mut self, low: usize) {
        self.gates.push(Gate::swap(low));
        self.labels.swap(low, low + 1);
    }

    fn move_to(&mut self, label: &str, target: usize) {
        while self.pos(label) > target {
            self.swap(self.pos(label) - 1);
        }
        while self.pos(label) < target {
            self.swap(self.pos(label));
        }
    }

    fn x(&mut self, label: &str) {
        self.gates.push(Gate::u(self.pos(label), Angle::Fixed(PI), Angle::Fixed(PI)));
    }

    fn ry(&mut self, label: &str, theta: f64) {
        self.gates.push(Gate::u(self.pos(label), Angle::Fixed(theta), Angle::Fixed(0.0)));
    }

    /// Moves `target` next to `control`, then applies `CRY(θ)`.
    fn cry(&mut self, control: &str, target: &str, theta: f64) {
        let c = self.pos(control);
        if self.pos(target) > c {
            self.move_to(target, c + 1);
        } else {
            self.move_to(target, c - 1);
        }
        self.gates.push(Gate::cry(self.pos(control), self.pos(target), Angle::Fixed(theta)));
    }

    /// Permutes every label into the given final order.
    fn arrange(&mut self, order: &[&'static str]) {
        assert_eq!(order.len(), self.labels.len());
        for (i, l) in order.iter().enumerate() {
            self.move_to(l, i);
        }
    }

    fn finish(self, window: std::ops::Range<usize>) -> ParamCircuit {
        ParamCircuit::from_gates(self.labels.len(), self.gates)
            .and_then(|c| c.with_window(window.collect()))
            .expect("router emits nearest-neighbor gates")
    }
}

/// Maps `|c⟩|0000⟩` to `|c⟩|ψ_c⟩` on `(c, x1, y1, x2, y2)`.
fn prep_gadget(r: &mut Router, q: [&'static str; 5]) {
    let [c, x1, y1, x2, y2] = q;
    r.x(c);
    r.cry(c, x1, PI / 2.0);
    r.x(c);
    r.cry(c, y1, PI / 2.0);
    r.cry(x1, x2, PI);
    r.cry(y1, y2, PI);
}

fn prep_gadget_adjoint(r: &mut Router, q: [&'static str; 5]) {
    let [c, x1, y1, x2, y2] = q;
    r.cry(y1, y2, -PI);
    r.cry(x1, x2, -PI);
    r.cry(c, y1, -PI / 2.0);
    r.x(c);
    r.cry(c, x1, -PI / 2.0);
    r.x(c);
}

/// The commitment gadget alone on five qubits `(c, x1, y1, x2, y2)`.
pub fn prep_circuit() -> ParamCircuit {
    let labels = ["c", "x1", "y1", "x2", "y2"];
    let mut r = Router::new(&labels);
    prep_gadget(&mut r, labels);
    r.arrange(&labels);
    r.finish(0..5)
}

/// `|a⟩ ⊗ |ψ_a⟩` on five qubits `(coin, x1, y1, x2, y2)`.
pub fn honest_coinflip_prep(a: usize) -> Result<StateVector, TaskError> {
    if a > 1 {
        return Err(TaskError::Invalid(format!("coin value {a} is not a bit")));
    }
    let mut psi = StateVector::basis(5, a << 4)?;
    prep_circuit().apply_in_place(&[], &mut psi)?;
    Ok(psi)
}

const A_LABELS: [&str; 8] = ["a", "k1", "k2", "r3", "m4", "m5", "m6", "m7"];
const B_LABELS: [&str; 8] = ["m4", "m5", "m6", "m7", "b", "scratch", "s10", "s11"];

/// Round 1, Alice: commit to the coin in qubit 0, keep the first qutrit,
/// place the second in the message register.
pub fn honest_alice_round1() -> ParamCircuit {
    let mut r = Router::new(&A_LABELS);
    prep_gadget(&mut r, ["a", "k1", "k2", "m5", "m6"]);
    r.arrange(&A_LABELS);
    r.finish(0..8)
}

/// Round 1, Bob: store the received qutrit and post a copy of his coin.
pub fn honest_bob_round1() -> ParamCircuit {
    let mut r = Router::new(&B_LABELS);
    r.cry("b", "scratch", PI);
    r.arrange(&["scratch", "m4", "s10", "m7", "b", "s11", "m5", "m6"]);
    r.finish(4..12)
}

/// Round 2, Alice: record Bob's coin, declare her own, reveal her qutrit.
pub fn honest_alice_round2() -> ParamCircuit {
    let mut r = Router::new(&A_LABELS);
    r.swap(ALICE_B_RECORD);
    r.cry("a", "r3", PI);
    r.arrange(&["a", "m5", "m6", "m4", "m7", "k1", "k2", "r3"]);
    r.finish(0..8)
}

/// Round 2, Bob: undo the commitment for the declared coin. Honest input
/// leaves qubits 5, 6, 10, 11 at zero.
pub fn honest_bob_round2() -> ParamCircuit {
    let labels = ["m4", "k1", "k2", "a", "b", "scratch", "s10", "s11"];
    let mut r = Router::new(&labels);
    prep_gadget_adjoint(&mut r, ["a", "k1", "k2", "s10", "s11"]);
    r.arrange(&labels);
    r.finish(4..12)
}

/// Both parties honest.
pub fn honest_interaction() -> FrameworkResult<InteractionSpec> {
    InteractionSpec::new(
        CoinFlipTask::layout(),
        Vec::new(),
        vec![
            Round::new(Some(fixed(honest_alice_round1())), Some(fixed(honest_bob_round1()))),
            Round::new(Some(fixed(honest_alice_round2())), Some(fixed(honest_bob_round2()))),
        ],
    )
}

/// Outcome statistics of the honest protocol with uniform coins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HonestStats {
    /// `P(c = 0)`, `P(c = 1)` as read by Bob, abort excluded.
    pub outcome: [f64; 2],
    pub abort: f64,
    /// Probability that Alice and Bob read different outcomes.
    pub disagree: f64,
}

pub fn honest_statistics() -> Result<HonestStats, TaskError> {
    let spec = honest_interaction()?;
    let mut s = HonestStats {
        outcome: [0.0; 2],
        abort: 0.0,
        disagree: 0.0,
    };
    for a in 0..2 {
        for b in 0..2 {
            let mut ones = Vec::new();
            if a == 1 {
                ones.push(ALICE_COIN);
            }
            if b == 1 {
                ones.push(BOB_COIN);
            }
            let psi = spec.run(&InteractionInput::basis(basis_with(&ones)), &[])?;
            for (i, p) in psi.distribution().into_iter().enumerate() {
                let p = p / 4.0;
                if VERIFY_ZERO.iter().any(|&q| bit(i, q) == 1) {
                    s.abort += p;
                    continue;
                }
                s.outcome[bob_outcome(i)] += p;
                if bob_outcome(i) != alice_outcome(i) {
                    s.disagree += p;
                }
            }
        }
    }
    Ok(s)
}

/// Encoded two-qutrit state from real coefficients `amps[j][k]` on `|jk⟩`.
pub fn qutrit_pair_state(amps: &[[f64; 3]; 3]) -> Result<StateVector, TaskError> {
    let mut v = vec![C64::new(0.0, 0.0); 16];
    for (j, row) in amps.iter().enumerate() {
        for (k, &c) in row.iter().enumerate() {
            let (x1, y1) = encode(j);
            let (x2, y2) = encode(k);
            v[x1 << 3 | y1 << 2 | x2 << 1 | y2] += c;
        }
    }
    Ok(StateVector::normalized(v)?)
}

/// `|ψ_a⟩` on four encoded qubits.
pub fn psi_honest(a: usize) -> Result<StateVector, TaskError> {
    let mut m = [[0.0; 3]; 3];
    m[a][a] = 1.0;
    m[2][2] = 1.0;
    qutrit_pair_state(&m)
}

/// `(|00⟩ + |11⟩ + 2|22⟩)/√6`, Alice's optimal dishonest commitment.
pub fn psi_dishonest() -> Result<StateVector, TaskError> {
    qutrit_pair_state(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]])
}

/// Bob's optimal guess from the qutrit he holds:
/// `1/2 + ‖ρ_0 − ρ_1‖₁/4`, with `ρ_a` the reduced state of `|ψ_a⟩`.
pub fn bob_trace_norm_bound() -> Result<f64, TaskError> {
    let rho = |a| -> Result<_, TaskError> {
        reduced_density(&honest_coinflip_prep(a)?, &[3, 4]).map_err(|e| TaskError::Invalid(e.to_string()))
    };
    let diff = rho(0)? - rho(1)?;
    let t = trace_norm(&diff).map_err(|e| TaskError::Invalid(e.to_string()))?;
    Ok(0.5 + t / 4.0)
}

/// Optimal cheating circuits, for reference and testing.
pub mod optimal {
    use super::*;

    /// Alice commits to `|ψ^d⟩` on her kept qubits and the message qutrit.
    pub fn alice_round1() -> ParamCircuit {
        let mut r = Router::new(&A_LABELS);
        // P(x1 = 1) = 1/6, then P(y1 = 1 | x1 = 0) = 1/5
        r.ry("k1", 2.0 * (1.0f64 / 6.0).sqrt().asin());
        r.x("k1");
        r.cry("k1", "k2", 2.0 * (1.0f64 / 5.0).sqrt().asin());
        r.x("k1");
        r.cry("k1", "m5", PI);
        r.cry("k2", "m6", PI);
        r.arrange(&A_LABELS);
        r.finish(0..8)
    }

    /// Alice declares Bob's coin and reveals her qutrit.
    pub fn alice_round2() -> ParamCircuit {
        let mut r = Router::new(&A_LABELS);
        r.cry("m4", "r3", PI);
        r.arrange(&["a", "m5", "m6", "m4", "m7", "k1", "k2", "r3"]);
        r.finish(0..8)
    }

    /// Bob answers `b = ¬x₂`: the only codewords with `x₂ = 1` encode 0.
    pub fn bob_round1() -> ParamCircuit {
        let mut r = Router::new(&B_LABELS);
        r.x("m4");
        r.cry("m5", "m4", PI);
        r.finish(4..12)
    }

    pub fn bob_round2() -> ParamCircuit {
        Router::new(&B_LABELS).finish(4..12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amp(psi: &StateVector, bits: usize) -> C64 {
        psi.amplitudes()[bits]
    }

    #[test]
    fn honest_prep_matches_commitment() {
        let s = 0.5f64.sqrt();
        let p0 = honest_coinflip_prep(0).unwrap();
        assert!((amp(&p0, 0b01010) - s).norm() < 1e-12);
        assert!((amp(&p0, 0b00000) - s).norm() < 1e-12);
        let p1 = honest_coinflip_prep(1).unwrap();
        assert!((amp(&p1, 0b10101) - s).norm() < 1e-12);
        assert!((amp(&p1, 0b10000) - s).norm() < 1e-12);
        assert!(honest_coinflip_prep(2).is_err());
    }

    #[test]
    fn honest_protocol_is_fair_and_never_aborts() {
        let s = honest_statistics().unwrap();
        assert!((s.outcome[0] - 0.5).abs() < 1e-10);
        assert!((s.outcome[1] - 0.5).abs() < 1e-10);
        assert!(s.abort < 1e-10);
        assert!(s.disagree < 1e-10);
    }

    #[test]
    fn honest_cheater_gets_half() {
        for cheater in [Cheater::Alice, Cheater::Bob] {
            let task = CoinFlipTask::new(cheater);
            let (r1, r2) = match cheater {
                Cheater::Alice => (honest_alice_round1(), honest_alice_round2()),
                Cheater::Bob => (honest_bob_round1(), honest_bob_round2()),
            };
            let r = coinflip_cheat_reward(&task, &r1, &r2, &[]).unwrap();
            assert!((r - 0.5).abs() < 1e-10, "{cheater}: {r}");
        }
    }

    #[test]
    fn optimal_cheats_reach_three_quarters() {
        let alice = CoinFlipTask::new(Cheater::Alice);
        let r = coinflip_cheat_reward(&alice, &optimal::alice_round1(), &optimal::alice_round2(), &[]).unwrap();
        assert!((r - 0.75).abs() < 1e-10, "{r}");
        let bob = CoinFlipTask::new(Cheater::Bob);
        let r = coinflip_cheat_reward(&bob, &optimal::bob_round1(), &optimal::bob_round2(), &[]).unwrap();
        assert!((r - 0.75).abs() < 1e-10, "{r}");
    }

    #[test]
    fn dishonest_overlap_and_trace_norm() {
        let d = psi_dishonest().unwrap();
        for a in 0..2 {
            let f = psi_honest(a).unwrap().fidelity(&d).unwrap();
            assert!((f - 0.75).abs() < 1e-12);
        }
        assert!((bob_trace_norm_bound().unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn policies_cover_cheater_registers() {
        let task = CoinFlipTask::new(Cheater::Bob);
        let p = task.policies().unwrap();
        assert_eq!(p[0].window(), &[4, 5, 6, 7, 8, 9, 10, 11]);
        // U layers 2·8 each, two CRY ladders of 7, swap diamond of 4·4
        assert_eq!(p[0].n_params(), 16 + 7 + 7 + 16 + 16);
        assert!(task.episode().is_ok());
    }
}
