//! Two-player nonlocal games with binary inputs and outputs.
//!
//! Four qubits `(x_A, y_A, y_B, x_B)`: one register each for the inputs and
//! two shared output qubits. A prepares the shared pair before any input is
//! visible, then each player acts on its own input and output qubit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::framework::{
    Action, EpisodeSpec, InteractionInput, InteractionSpec, RegisterLayout, Round, WeightedOutcomes,
};
use crate::pqc::{build_policy, Angle, Gate, LayerKind, ParamCircuit};
use crate::statevec::StateVector;

use super::TaskError;

pub const X_A: usize = 0;
pub const Y_A: usize = 1;
pub const Y_B: usize = 2;
pub const X_B: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Game {
    Chsh,
    ConflictingInterest,
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Game::Chsh => "chsh",
            Game::ConflictingInterest => "conflicting",
        })
    }
}

impl FromStr for Game {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "chsh" => Ok(Game::Chsh),
            "conflicting" | "conflicting-interest" => Ok(Game::ConflictingInterest),
            _ => Err(TaskError::Invalid(format!("unknown game '{s}'"))),
        }
    }
}

impl Game {
    /// `(u_A, u_B)` for types `x` and actions `y`.
    pub fn payoff(&self, x_a: usize, x_b: usize, y_a: usize, y_b: usize) -> (f64, f64) {
        let both = x_a & x_b == 1;
        match self {
            Game::Chsh => {
                let win = (y_a ^ y_b) == (x_a & x_b);
                if win { (1.0, 1.0) } else { (0.0, 0.0) }
            }
            Game::ConflictingInterest => match (both, y_a, y_b) {
                (false, 0, 0) => (1.0, 0.5),
                (false, 1, 1) => (0.5, 1.0),
                (true, 0, 1) | (true, 1, 0) => (0.75, 0.75),
                _ => (0.0, 0.0),
            },
        }
    }

    /// Best achievable `(F_A + F_B)/2` with shared entanglement.
    pub fn quantum_optimum(&self) -> f64 {
        let tsirelson = (PI / 8.0).cos().powi(2);
        match self {
            Game::Chsh => tsirelson,
            Game::ConflictingInterest => 0.75 * tsirelson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payoffs {
    pub f_a: f64,
    pub f_b: f64,
}

impl Payoffs {
    pub fn mean(&self) -> f64 {
        0.5 * (self.f_a + self.f_b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameTask {
    pub game: Game,
    pub layers: Vec<LayerKind>,
}

impl GameTask {
    pub fn new(game: Game) -> Self {
        Self {
            game,
            layers: LayerKind::CORE.to_vec(),
        }
    }

    pub fn layout() -> RegisterLayout {
        RegisterLayout::new(1, 2, 1).expect("4 qubits fit")
    }

    /// Trainable slots: shared preparation, A's local move, B's local move.
    pub fn policies(&self) -> Result<Vec<ParamCircuit>, TaskError> {
        let p = build_policy(2, &self.layers)?;
        Ok(vec![
            p.clone().with_window(vec![Y_A, Y_B])?,
            p.clone().with_window(vec![X_A, Y_A])?,
            p.with_window(vec![Y_B, X_B])?,
        ])
    }

    /// Inputs in order `(x_A, x_B) = 00, 01, 10, 11`.
    pub fn inputs() -> Vec<InteractionInput> {
        (0..4)
            .map(|x| {
                let (x_a, x_b) = (x >> 1, x & 1);
                InteractionInput::basis(x_a << (3 - X_A) | x_b << (3 - X_B))
            })
            .collect()
    }

    pub fn episode_with(&self, policies: Vec<ParamCircuit>) -> Result<EpisodeSpec, TaskError> {
        let rounds = vec![
            Round::new(Some(Action::Policy(0)), None),
            Round::new(Some(Action::Policy(1)), Some(Action::Policy(2))),
        ];
        let spec = InteractionSpec::new(Self::layout(), policies, rounds)?;
        let weights = (0..4)
            .map(|x| {
                (0..16)
                    .map(|i| {
                        let (a, b) = self.payoff_at(x, i);
                        0.25 * 0.5 * (a + b)
                    })
                    .collect()
            })
            .collect();
        Ok(EpisodeSpec::new(spec, Self::inputs(), Arc::new(WeightedOutcomes { weights }))?)
    }

    pub fn episode(&self) -> Result<EpisodeSpec, TaskError> {
        self.episode_with(self.policies()?)
    }

    fn payoff_at(&self, x: usize, i: usize) -> (f64, f64) {
        let y_a = (i >> (3 - Y_A)) & 1;
        let y_b = (i >> (3 - Y_B)) & 1;
        self.game.payoff(x >> 1, x & 1, y_a, y_b)
    }

    /// `F_A`, `F_B` from the four final states in [`GameTask::inputs`] order.
    pub fn payoffs(&self, finals: &[StateVector]) -> Result<Payoffs, TaskError> {
        if finals.len() != 4 {
            return Err(TaskError::Invalid(format!("expected 4 final states, got {}", finals.len())));
        }
        let mut p = Payoffs { f_a: 0.0, f_b: 0.0 };
        for (x, psi) in finals.iter().enumerate() {
            for (i, pr) in psi.distribution().into_iter().enumerate() {
                let (a, b) = self.payoff_at(x, i);
                p.f_a += 0.25 * pr * a;
                p.f_b += 0.25 * pr * b;
            }
        }
        Ok(p)
    }
}

/// Exact `F_A`, `F_B` for explicit circuits.
pub fn game_reward(
    task: &GameTask,
    shared_prep: &ParamCircuit,
    a_local: &ParamCircuit,
    b_local: &ParamCircuit,
    params: &[f64],
) -> Result<Payoffs, TaskError> {
    let ep = task.episode_with(vec![shared_prep.clone(), a_local.clone(), b_local.clone()])?;
    task.payoffs(&ep.final_states(params)?)
}

/// Best `(F_A + F_B)/2` over the 4 × 4 deterministic strategy pairs
/// `y_A = f(x_A)`, `y_B = g(x_B)`. Shared randomness only mixes these, so
/// the bound also covers randomized classical play.
pub fn classical_game_bound(game: Game) -> f64 {
    classical_pairs(game).map(|p| p.mean()).fold(f64::NEG_INFINITY, f64::max)
}

/// Payoffs of every deterministic strategy pair; strategy `s` maps input
/// `x` to bit `x` of `s`.
pub fn classical_pairs(game: Game) -> impl Iterator<Item = Payoffs> {
    (0..4).flat_map(move |f| {
        (0..4).map(move |g| {
            let mut p = Payoffs { f_a: 0.0, f_b: 0.0 };
            for x_a in 0..2 {
                for x_b in 0..2 {
                    let (a, b) = game.payoff(x_a, x_b, (f >> x_a) & 1, (g >> x_b) & 1);
                    p.f_a += 0.25 * a;
                    p.f_b += 0.25 * b;
                }
            }
            p
        })
    })
}

fn fixed(n: usize, gates: Vec<Gate>, window: Vec<usize>) -> ParamCircuit {
    ParamCircuit::from_gates(n, gates)
        .and_then(|c| c.with_window(window))
        .expect("valid fixed circuit")
}

/// A textbook optimal strategy: a Bell pair, then input-controlled RY
/// rotations. Returns `(shared_prep, a_local, b_local)`.
pub fn optimal_strategy() -> (ParamCircuit, ParamCircuit, ParamCircuit) {
    let f = Angle::Fixed;
    let prep = fixed(
        2,
        vec![Gate::u(0, f(PI / 2.0), f(PI)), Gate::cry(0, 1, f(PI))],
        vec![Y_A, Y_B],
    );
    let a = fixed(2, vec![Gate::cry(0, 1, f(-PI / 2.0))], vec![X_A, Y_A]);
    let b = fixed(
        2,
        vec![Gate::u(0, f(-PI / 4.0), f(0.0)), Gate::cry(1, 0, f(PI / 2.0))],
        vec![Y_B, X_B],
    );
    (prep, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(window: Vec<usize>) -> ParamCircuit {
        fixed(2, vec![], window)
    }

    #[test]
    fn conflicting_table_entries() {
        let g = Game::ConflictingInterest;
        assert_eq!(g.payoff(0, 1, 0, 0), (1.0, 0.5));
        assert_eq!(g.payoff(1, 0, 1, 1), (0.5, 1.0));
        assert_eq!(g.payoff(0, 0, 0, 1), (0.0, 0.0));
        assert_eq!(g.payoff(1, 1, 1, 0), (0.75, 0.75));
        assert_eq!(g.payoff(1, 1, 1, 1), (0.0, 0.0));
    }

    #[test]
    fn identity_strategy_wins_three_chsh_cases() {
        let task = GameTask::new(Game::Chsh);
        let p = game_reward(&task, &empty(vec![1, 2]), &empty(vec![0, 1]), &empty(vec![2, 3]), &[]).unwrap();
        assert!((p.f_a - 0.75).abs() < 1e-14 && (p.f_b - 0.75).abs() < 1e-14);
    }

    #[test]
    fn optimal_strategy_reaches_tsirelson() {
        let (prep, a, b) = optimal_strategy();
        let chsh = game_reward(&GameTask::new(Game::Chsh), &prep, &a, &b, &[]).unwrap();
        assert!((chsh.f_a - (PI / 8.0).cos().powi(2)).abs() < 1e-12);
        let ci = game_reward(&GameTask::new(Game::ConflictingInterest), &prep, &a, &b, &[]).unwrap();
        let want = 0.75 * (PI / 8.0).cos().powi(2);
        assert!((ci.f_a - want).abs() < 1e-12 && (ci.f_b - want).abs() < 1e-12);
    }

    #[test]
    fn classical_bounds() {
        assert_eq!(classical_game_bound(Game::Chsh), 0.75);
        assert!((classical_game_bound(Game::ConflictingInterest) - 0.5625).abs() < 1e-15);
        assert_eq!(classical_pairs(Game::Chsh).count(), 16);
    }

    #[test]
    fn policy_windows_respect_timing() {
        let task = GameTask::new(Game::Chsh);
        let ep = task.episode().unwrap();
        assert_eq!(ep.interaction.policies()[0].window(), &[Y_A, Y_B]);
        assert_eq!(ep.n_interactions(), 4);
    }
}
