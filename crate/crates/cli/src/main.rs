use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qagents::analysis::{
    diagonal_phase_factor, diffusion_matrix, phase_invariant_fidelity, qft_matrix, reconstruct, to_qasm, DenseUnitary,
};
use qagents::dump::{parse_circuits, render, write_circuits, NamedCircuit};
use qagents::pqc::prune;
use qagents::runner::{
    collect_report, evaluate, paper_runs, render_report, run, write_artifacts, RunConfig, RunError, TaskName,
};

#[derive(Parser)]
#[command(name = "qagents", version, about = "Train and analyze parameterized quantum agents")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one configuration and write its artifacts.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Score a circuit file under a task without training.
    Eval {
        circuits: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Summary table from the `.record` files in a directory.
    Report { dir: PathBuf },
    /// Train every row of the summary table, then print the table.
    Reproduce {
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Inspect a circuit file.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
    /// Print the default config of every task.
    Defaults {
        /// Only this task.
        #[arg(long)]
        task: Option<String>,
    },
}

#[derive(Subcommand)]
enum Analyze {
    /// Drop identity gates and snap near-Clifford angles.
    Prune {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Print the dense unitary.
    Unitary {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Fidelity against `qft`, `diffusion` or another circuit file.
    Compare {
        file: PathBuf,
        #[arg(long)]
        against: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// OpenQASM 2.0 export.
    Qasm {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    queries: Option<String>,
    #[arg(long)]
    cheater: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    /// Any config key, as `key=value`. Repeatable.
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Config problems map to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    Usage(e.to_string()).into()
}

impl ConfigArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let flags = [
            ("n", &self.n),
            ("queries", &self.queries),
            ("cheater", &self.cheater),
            ("epochs", &self.epochs),
            ("seed", &self.seed),
            ("seeds", &self.seeds),
            ("learning_rate", &self.learning_rate),
        ];
        let mut out: Vec<(String, String)> = flags
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| usage(format!("--set expects key=value, got '{kv}'")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    /// File first, then `--task`, then the remaining flags in order.
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let keys: Vec<&str> = text
                    .lines()
                    .map(|l| l.split('#').next().unwrap_or("").trim())
                    .filter(|l| !l.is_empty())
                    .map(|l| l.split('=').next().unwrap_or("").trim())
                    .collect();
                if keys.is_empty() && self.task.is_none() {
                    return Err(usage(format!("{}: empty config", path.display())));
                }
                if !keys.contains(&"task") {
                    let mut c = self.base()?;
                    apply_text(&mut c, &text)?;
                    c
                } else {
                    RunConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
                }
            }
            None => self.base()?,
        };
        if let (Some(t), Some(_)) = (&self.task, &self.config) {
            if t.parse::<TaskName>().map_err(usage)? != cfg.task {
                bail!(usage(format!("--task {t} conflicts with the config file")));
            }
        }
        for (k, v) in self.overrides()? {
            cfg.set(&k, &v).map_err(usage)?;
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    fn base(&self) -> Result<RunConfig> {
        let t = self
            .task
            .as_deref()
            .ok_or_else(|| usage("no task: pass --task or a config file with a 'task' key"))?;
        Ok(RunConfig::for_task(t.parse().map_err(usage)?))
    }
}

fn apply_text(cfg: &mut RunConfig, text: &str) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        cfg.set(k.trim(), v.trim()).map_err(|e| usage(format!("config line {}: {e}", i + 1)))?;
    }
    Ok(())
}

fn load(file: &Path, index: usize) -> Result<NamedCircuit> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let mut items = parse_circuits(&text).with_context(|| format!("parsing {}", file.display()))?;
    if index >= items.len() {
        bail!("{} holds {} circuit(s), no index {index}", file.display(), items.len());
    }
    let mut c = items.swap_remove(index);
    c.circuit = c.circuit.at_offset(0);
    Ok(c)
}

fn train_one(cfg: &RunConfig, out: &Path) -> Result<()> {
    let outcome = run(cfg)?;
    let a = write_artifacts(&outcome, out)?;
    let r = &outcome.record;
    println!(
        "{}: reward {:.6} after {} epochs ({:.1}s)",
        cfg.stem(),
        r.final_reward,
        r.rewards.len(),
        r.seconds
    );
    if let Some((fa, fb)) = outcome.payoffs {
        println!("F_A = {fa:.6}, F_B = {fb:.6}");
    }
    println!("wrote {}", a.record.display());
    Ok(())
}

fn analyze(what: Analyze) -> Result<()> {
    match what {
        Analyze::Prune { file, tol, index } => {
            let c = load(&file, index)?;
            let p = prune(&c.circuit, &c.params, tol)?;
            eprintln!(
                "gates {} -> {}, fidelity {:.9}{}",
                c.circuit.gates().len(),
                p.circuit.gates().len(),
                p.fidelity,
                if p.reverted { " (reverted)" } else { "" }
            );
            print!("{}", render(&p.circuit, &p.params)?.text);
            print!(
                "{}",
                write_circuits(&[NamedCircuit {
                    name: c.name,
                    circuit: p.circuit,
                    params: p.params
                }])
            );
        }
        Analyze::Unitary { file, index } => {
            let c = load(&file, index)?;
            print!("{}", reconstruct(&c.circuit, &c.params)?.to_text());
        }
        Analyze::Compare { file, against, index } => {
            let c = load(&file, index)?;
            let u = reconstruct(&c.circuit, &c.params)?;
            let n = u.n_qubits();
            let v: DenseUnitary = match against.as_str() {
                "qft" => qft_matrix(n),
                "diffusion" => diffusion_matrix(n),
                path => {
                    let o = load(Path::new(path), 0)?;
                    reconstruct(&o.circuit, &o.params)?
                }
            };
            let f = phase_invariant_fidelity(&u, &v)?;
            let d = diagonal_phase_factor(&u, &v)?;
            println!("fidelity = {f:.12}");
            println!("fidelity_up_to_input_phases = {:.12}", d.fidelity);
        }
        Analyze::Qasm { file, index } => {
            let c = load(&file, index)?;
            print!("{}", to_qasm(&c.circuit, &c.params)?);
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Train { cfg, out } => train_one(&cfg.resolve()?, &out),
        Cmd::Eval { circuits, cfg } => {
            let cfg = cfg.resolve()?;
            let text = fs::read_to_string(&circuits).with_context(|| format!("reading {}", circuits.display()))?;
            let items = parse_circuits(&text).with_context(|| format!("parsing {}", circuits.display()))?;
            let r = evaluate(&cfg, &items)?;
            println!("reward = {r:.12}");
            Ok(())
        }
        Cmd::Report { dir } => {
            print!("{}", render_report(&collect_report(&dir)?));
            Ok(())
        }
        Cmd::Reproduce { out } => {
            for cfg in paper_runs() {
                train_one(&cfg, &out)?;
            }
            print!("{}", render_report(&collect_report(&out)?));
            Ok(())
        }
        Cmd::Analyze { what } => analyze(what),
        Cmd::Defaults { task } => {
            let tasks = match task {
                Some(t) => vec![t.parse::<TaskName>().map_err(usage)?],
                None => TaskName::ALL.to_vec(),
            };
            for (i, t) in tasks.into_iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", RunConfig::for_task(t).to_text());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            let is_usage = e.downcast_ref::<Usage>().is_some()
                || matches!(e.downcast_ref::<RunError>(), Some(RunError::Config { .. } | RunError::Value { .. }));
            ExitCode::from(if is_usage { 2 } else { 1 })
        }
    }
}
