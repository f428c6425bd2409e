//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use qagents::analysis::{
    diagonal_phase_factor, general_qft_circuit, phase_invariant_fidelity, qft_gate_counts, qft_matrix, reconstruct,
};
use qagents::framework::{Action, InteractionSpec, RegisterLayout, Round};
use qagents::grad::{compare_gradients, finite_difference, gradient, Objective};
use qagents::pqc::{build_policy, prune, LayerKind, ParamCircuit};
use qagents::runner::{run, RunConfig, TaskName};
use qagents::statevec::StateVector;
use qagents::tasks::coinflip::{
    bob_trace_norm_bound, honest_statistics, psi_dishonest, psi_honest, Cheater, CHEAT_OPTIMUM,
};
use qagents::tasks::games::{classical_game_bound, Game};
use qagents::tasks::grover::canonical_grover_reward;
use qagents::tasks::QftTask;
use qagents::trainer::train;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn trained(cfg: RunConfig) -> Result<qagents::runner::RunOutcome, String> {
    run(&cfg).map_err(|e| format!("{}: {e}", cfg.stem()))
}

fn criterion_qft() -> Check {
    let start = Instant::now();
    let n4 = trained(RunConfig::for_task(TaskName::Qft))?;
    let secs = start.elapsed().as_secs_f64();
    let mut cfg6 = RunConfig::for_task(TaskName::Qft);
    cfg6.n = 6;
    cfg6.seeds = 5;
    let n6 = trained(cfg6)?;
    let policy = &n4.circuits[0];
    let pruned = prune(&policy.circuit, &policy.params, 1e-3).map_err(|e| e.to_string())?;
    let u = reconstruct(&pruned.circuit, &pruned.params).map_err(|e| e.to_string())?;
    let f = diagonal_phase_factor(&u, &qft_matrix(4)).map_err(|e| e.to_string())?.fidelity;
    ensure(
        n4.row.learned >= 0.999 && n6.row.learned >= 0.999 && secs <= 600.0 && f >= 0.999,
        format!(
            "n=4 fidelity {:.6} in {secs:.1}s, n=6 best-of-5 {:.6}, pruned n=4 fidelity up to input phases {f:.6}",
            n4.row.learned, n6.row.learned
        ),
    )
}

fn criterion_grover() -> Check {
    let exact = [(2, 1, 1.0), (3, 1, 0.78125), (3, 2, 0.9453125)];
    for (n, k, want) in exact {
        let got = canonical_grover_reward(n, k).map_err(|e| e.to_string())?;
        if (got - want).abs() > 1e-12 {
            return Err(format!("canonical N={} k={k}: {got} != {want}", 1 << n));
        }
    }
    let mut learned = Vec::new();
    for (n, k, bar) in [(2, 1, 0.999), (3, 1, 0.781 - 0.002), (3, 2, 0.944)] {
        let mut c = RunConfig::for_task(TaskName::Grover);
        c.n = n;
        c.queries = k;
        let out = trained(c)?;
        learned.push((n, k, out.row.learned, bar));
    }
    let ok = learned.iter().all(|(_, _, r, bar)| r >= bar);
    let detail: Vec<String> = learned
        .iter()
        .map(|(n, k, r, bar)| format!("N={} k={k}: {r:.6} (bar {bar})", 1 << n))
        .collect();
    ensure(ok, format!("canonical exact; trained {}", detail.join(", ")))
}

fn criterion_coinflip() -> Check {
    let h = honest_statistics().map_err(|e| e.to_string())?;
    let honest_ok = (h.outcome[0] - 0.5).abs() < 1e-10 && (h.outcome[1] - 0.5).abs() < 1e-10 && h.abort < 1e-10;
    let d = psi_dishonest().map_err(|e| e.to_string())?;
    let overlap = psi_honest(0).map_err(|e| e.to_string())?.fidelity(&d).map_err(|e| e.to_string())?;
    let tn = bob_trace_norm_bound().map_err(|e| e.to_string())?;
    let mut results = Vec::new();
    for who in [Cheater::Alice, Cheater::Bob] {
        let mut c = RunConfig::for_task(TaskName::Coinflip);
        c.cheater = who;
        let out = trained(c)?;
        let peak = out.record.rewards.iter().copied().fold(out.record.final_reward, f64::max);
        results.push((who, out.row.learned, peak));
    }
    let cheat_ok = results
        .iter()
        .all(|(_, r, peak)| *r >= 0.7499 && *peak <= CHEAT_OPTIMUM + 1e-6);
    ensure(
        honest_ok && cheat_ok && (overlap - 0.75).abs() < 1e-12 && (tn - 0.75).abs() < 1e-12,
        format!(
            "honest P(c=0)={:.12} abort={:.1e}; alice {:.6}, bob {:.6}; overlap {overlap:.12}, trace-norm bound {tn:.12}",
            h.outcome[0], h.abort, results[0].1, results[1].1
        ),
    )
}

fn criterion_games() -> Check {
    let chsh = trained(RunConfig::for_task(TaskName::Chsh))?;
    let ci = trained(RunConfig::for_task(TaskName::Conflicting))?;
    let (fa, fb) = ci.payoffs.expect("game payoffs");
    let bound = classical_game_bound(Game::Chsh);
    ensure(
        chsh.row.learned >= 0.8535 && fa >= 0.64 && fb >= 0.64 && (fa - fb).abs() < 1e-3 && bound == 0.75,
        format!(
            "CHSH F={:.6}; conflicting F_A={fa:.6} F_B={fb:.6}; classical CHSH bound {bound}",
            chsh.row.learned
        ),
    )
}

fn random_circuit(rng: &mut ChaCha8Rng) -> (ParamCircuit, Vec<f64>) {
    let n = rng.gen_range(1..=4);
    let mut layers: Vec<LayerKind> = LayerKind::ALL.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
    if layers.is_empty() {
        layers.push(LayerKind::RYPhaseShift);
    }
    let c = build_policy(n, &layers).expect("valid policy");
    let p = (0..c.n_params()).map(|_| rng.gen_range(-PI..PI)).collect();
    (c, p)
}

fn criterion_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // unitarity and norm
    let mut worst_norm: f64 = 0.0;
    let mut worst_unitary: f64 = 0.0;
    for _ in 0..20 {
        let (c, p) = random_circuit(&mut rng);
        let u = reconstruct(&c, &p).map_err(|e| e.to_string())?;
        worst_unitary = worst_unitary.max(u.unitarity_error());
        let psi = c.apply(&p, &StateVector::zero(c.n_qubits()).unwrap()).map_err(|e| e.to_string())?;
        worst_norm = worst_norm.max((psi.norm() - 1.0).abs());
    }
    // gradients against central differences on a fidelity objective
    let mut worst_grad: f64 = 0.0;
    for _ in 0..20 {
        let (c, p) = random_circuit(&mut rng);
        let mut task = QftTask::new(c.n_qubits());
        task.layers = c.layers().to_vec();
        let ep = task.episode_with(c).map_err(|e| e.to_string())?;
        let g = gradient(&ep, &p).map_err(|e| e.to_string())?;
        let num = finite_difference(|x| ep.value(x).unwrap(), &p, 1e-5);
        worst_grad = worst_grad.max(compare_gradients(&g, &num).max_abs_error);
    }
    // nearest-neighbor QFT
    let mut qft_ok = true;
    for n in 1..=6 {
        let c = general_qft_circuit(n).map_err(|e| e.to_string())?;
        let f = phase_invariant_fidelity(&reconstruct(&c, &[]).unwrap(), &qft_matrix(n)).unwrap();
        let counts = qft_gate_counts(&c);
        let pairs = n * (n - 1) / 2;
        qft_ok &= f >= 1.0 - 1e-9
            && counts.controlled_rotations == pairs
            && counts.swaps == pairs
            && counts.single_qubit == n;
    }
    // pruning never returns a circuit below its fidelity bound
    let mut prune_ok = true;
    for _ in 0..10 {
        let (c, mut p) = random_circuit(&mut rng);
        for x in p.iter_mut() {
            if rng.gen_bool(0.5) {
                *x = rng.gen_range(-1e-4..1e-4);
            }
        }
        let pr = prune(&c, &p, 1e-3).map_err(|e| e.to_string())?;
        prune_ok &= pr.reverted || pr.fidelity >= 1.0 - 1e-2;
    }
    // register confinement
    let layout = RegisterLayout::new(2, 2, 2).unwrap();
    let intrude = build_policy(3, &[LayerKind::RYPhaseShift]).unwrap().at_offset(2);
    let confined = InteractionSpec::new(layout, vec![intrude], vec![Round::new(Some(Action::Policy(0)), None)]).is_err();
    ensure(
        worst_norm < 1e-12 && worst_unitary < 1e-9 && worst_grad < 1e-5 && qft_ok && prune_ok && confined,
        format!(
            "norm err {worst_norm:.1e}, unitarity err {worst_unitary:.1e}, max grad err {worst_grad:.1e}, \
             qft n=1..6 {qft_ok}, prune bound {prune_ok}, confinement {confined}"
        ),
    )
}

fn criterion_reproducibility() -> Check {
    let mut logs = Vec::new();
    for cfg in [RunConfig::for_task(TaskName::Chsh), RunConfig::for_task(TaskName::Qft)] {
        let ep = cfg.episode().map_err(|e| e.to_string())?.0;
        let tc = qagents::trainer::TrainConfig {
            optimum: Some(1.0),
            ..Default::default()
        };
        let a = train(&ep, &tc).map_err(|e| e.to_string())?.log_text();
        let b = train(&ep, &tc).map_err(|e| e.to_string())?.log_text();
        logs.push((cfg.stem(), a == b, a.lines().count()));
    }
    let ok = logs.iter().all(|(_, same, _)| *same);
    let detail: Vec<String> = logs.iter().map(|(s, same, n)| format!("{s}: {n} lines identical={same}")).collect();
    ensure(ok, detail.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 6] = [
        ("1 qft", criterion_qft),
        ("2 grover", criterion_grover),
        ("3 coin flipping", criterion_coinflip),
        ("4 nonlocal games", criterion_games),
        ("5 property suites", criterion_properties),
        ("6 reproducibility", criterion_reproducibility),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
