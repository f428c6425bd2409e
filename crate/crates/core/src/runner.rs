//! Configured end-to-end runs: build a task from a flat `key = value`
//! config, train it, evaluate stored circuits and summarize results.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::dump::{self, NamedCircuit};
use crate::framework::EpisodeSpec;
use crate::grad::Objective;
use crate::pqc::{LayerKind, ParamCircuit, PqcError};
use crate::tasks::coinflip::{Cheater, CoinFlipTask, CHEAT_OPTIMUM};
use crate::tasks::games::{Game, GameTask};
use crate::tasks::grover::grover_closed_form;
use crate::tasks::{GroverTask, QftTask, TaskError};
use crate::trainer::{multi_seed, transfer, Init, Optimizer, SeedSummary, TrainConfig, TrainError, TrainRecord};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid value for '{key}': {msg}")]
    Value { key: String, msg: String },
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Pqc(#[from] PqcError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type RunResult<T> = Result<T, RunError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskName {
    Qft,
    Coinflip,
    Chsh,
    Conflicting,
    Grover,
}

impl TaskName {
    pub const ALL: [TaskName; 5] = [
        TaskName::Qft,
        TaskName::Grover,
        TaskName::Coinflip,
        TaskName::Chsh,
        TaskName::Conflicting,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TaskName::Qft => "qft",
            TaskName::Grover => "grover",
            TaskName::Coinflip => "coinflip",
            TaskName::Chsh => "chsh",
            TaskName::Conflicting => "conflicting",
        }
    }
}

impl fmt::Display for TaskName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskName::ALL
            .iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| format!("unknown task '{s}' (expected qft, grover, coinflip, chsh or conflicting)"))
    }
}

/// Everything needed to reproduce one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: TaskName,
    pub n: usize,
    pub queries: usize,
    pub depth: usize,
    /// Empty means the task's own default stack.
    pub layers: Vec<LayerKind>,
    pub cheater: Cheater,
    pub ancilla: bool,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Radius of the uniform init; 0 means all zeros.
    pub init_radius: f64,
    pub optimizer: Optimizer,
    pub seeds: usize,
    /// Grover with several queries: train `queries - 1` first, then freeze
    /// that prefix and train the last block.
    pub transfer: bool,
    /// Init radius for the new block of a transfer stage.
    pub transfer_init: f64,
}

pub const CONFIG_KEYS: [&str; 15] = [
    "task",
    "n",
    "queries",
    "depth",
    "layers",
    "cheater",
    "ancilla",
    "epochs",
    "learning_rate",
    "seed",
    "init_radius",
    "optimizer",
    "seeds",
    "transfer",
    "transfer_init",
];

impl RunConfig {
    /// Defaults tuned per task.
    pub fn for_task(task: TaskName) -> Self {
        let base = TrainConfig::default();
        let init_radius = match base.init {
            Init::Uniform(r) => r,
            _ => 0.0,
        };
        let mut c = Self {
            task,
            n: 4,
            queries: 1,
            depth: 1,
            layers: Vec::new(),
            cheater: Cheater::Alice,
            ancilla: false,
            epochs: base.epochs,
            learning_rate: base.learning_rate,
            seed: base.seed,
            init_radius,
            optimizer: base.optimizer,
            seeds: 1,
            transfer: false,
            transfer_init: PI,
        };
        match task {
            TaskName::Qft | TaskName::Chsh | TaskName::Conflicting => {}
            TaskName::Grover => {
                c.n = 2;
                c.depth = 2;
                c.seeds = 5;
                c.transfer = true;
            }
            TaskName::Coinflip => {
                c.init_radius = PI;
                c.seeds = 5;
            }
        }
        c
    }

    /// Parses `key = value` lines; `#` starts a comment. The `task` key
    /// selects the defaults the remaining keys override.
    pub fn parse(text: &str) -> RunResult<Self> {
        let mut pairs = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| RunError::Config {
                line: k + 1,
                msg: format!("expected key = value, got '{line}'"),
            })?;
            pairs.push((k + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let task = pairs
            .iter()
            .find(|(_, k, _)| k == "task")
            .ok_or(RunError::Config {
                line: 0,
                msg: "missing 'task'".into(),
            })?;
        let task = task.2.parse().map_err(|msg| RunError::Config { line: task.0, msg })?;
        let mut cfg = Self::for_task(task);
        for (line, key, value) in &pairs {
            cfg.set(key, value).map_err(|e| match e {
                RunError::Value { key, msg } => RunError::Config {
                    line: *line,
                    msg: format!("{key}: {msg}"),
                },
                e => e,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> RunResult<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> RunResult<T>
        where
            T::Err: fmt::Display,
        {
            v.parse().map_err(|e: T::Err| RunError::Value {
                key: key.into(),
                msg: e.to_string(),
            })
        }
        let bad = |msg: String| RunError::Value { key: key.into(), msg };
        match key {
            "task" => {
                let t: TaskName = value.parse().map_err(bad)?;
                if t != self.task {
                    *self = Self::for_task(t);
                }
            }
            "n" => self.n = num(key, value)?,
            "queries" => self.queries = num(key, value)?,
            "depth" => self.depth = num(key, value)?,
            "layers" => {
                self.layers = if value == "default" || value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|s| s.trim().parse())
                        .collect::<Result<_, _>>()
                        .map_err(bad)?
                }
            }
            "cheater" => self.cheater = value.parse().map_err(|e: TaskError| bad(e.to_string()))?,
            "ancilla" => self.ancilla = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "init_radius" => self.init_radius = num(key, value)?,
            "optimizer" => {
                self.optimizer = match value {
                    "adam" => Optimizer::adam(),
                    "plain" => Optimizer::Plain,
                    _ => return Err(bad(format!("unknown optimizer '{value}'"))),
                }
            }
            "seeds" => self.seeds = num(key, value)?,
            "transfer" => self.transfer = num(key, value)?,
            "transfer_init" => self.transfer_init = num(key, value)?,
            _ => return Err(bad("unknown key".into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> RunResult<()> {
        let bad = |key: &str, msg: &str| {
            Err(RunError::Value {
                key: key.into(),
                msg: msg.into(),
            })
        };
        match self.task {
            TaskName::Qft if !(1..=10).contains(&self.n) => return bad("n", "qft needs 1 <= n <= 10"),
            TaskName::Grover if !(1..=10).contains(&self.n) => return bad("n", "grover needs 1 <= n <= 10"),
            _ => {}
        }
        if self.queries == 0 {
            return bad("queries", "must be at least 1");
        }
        if self.depth == 0 {
            return bad("depth", "must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs", "must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be positive");
        }
        if !(self.init_radius >= 0.0 && self.init_radius.is_finite()) {
            return bad("init_radius", "must be non-negative");
        }
        if !(self.transfer_init >= 0.0 && self.transfer_init.is_finite()) {
            return bad("transfer_init", "must be non-negative");
        }
        if self.seeds == 0 {
            return bad("seeds", "must be at least 1");
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let layers = if self.layers.is_empty() {
            "default".to_string()
        } else {
            self.layers.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
        };
        let optimizer = match self.optimizer {
            Optimizer::Plain => "plain",
            Optimizer::Adam { .. } => "adam",
        };
        let values = [
            self.task.to_string(),
            self.n.to_string(),
            self.queries.to_string(),
            self.depth.to_string(),
            layers,
            self.cheater.to_string(),
            self.ancilla.to_string(),
            self.epochs.to_string(),
            format!("{:?}", self.learning_rate),
            self.seed.to_string(),
            format!("{:?}", self.init_radius),
            optimizer.to_string(),
            self.seeds.to_string(),
            self.transfer.to_string(),
            format!("{:?}", self.transfer_init),
        ];
        let mut s = String::new();
        for (k, v) in CONFIG_KEYS.iter().zip(values) {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// File stem for this run's artifacts.
    pub fn stem(&self) -> String {
        match self.task {
            TaskName::Qft => format!("qft_n{}", self.n),
            TaskName::Grover => format!("grover_n{}_k{}", self.n, self.queries),
            TaskName::Coinflip => format!("coinflip_{}", self.cheater),
            TaskName::Chsh => "chsh".into(),
            TaskName::Conflicting => "conflicting".into(),
        }
    }

    pub fn row(&self) -> ReportRow {
        let (label, metric, optimal) = match self.task {
            TaskName::Qft => (format!("QFT (n={})", self.n), "Fidelity", 1.0),
            TaskName::Grover => {
                let q = if self.queries == 1 { "query" } else { "queries" };
                (
                    format!("Grover (N={}, {} {q})", 1usize << self.n, self.queries),
                    "P_success",
                    grover_closed_form(1 << self.n, self.queries),
                )
            }
            TaskName::Coinflip => {
                let who = match self.cheater {
                    Cheater::Alice => "Alice",
                    Cheater::Bob => "Bob",
                };
                (format!("Coin Flip ({who})"), "P*", CHEAT_OPTIMUM)
            }
            TaskName::Chsh => ("CHSH".into(), "F", Game::Chsh.quantum_optimum()),
            TaskName::Conflicting => (
                "Conflicting-Interest".into(),
                "F",
                Game::ConflictingInterest.quantum_optimum(),
            ),
        };
        ReportRow {
            key: self.sort_key(),
            label,
            metric: metric.into(),
            learned: f64::NAN,
            optimal,
        }
    }

    fn sort_key(&self) -> (usize, usize, usize) {
        let rank = match self.task {
            TaskName::Qft => 0,
            TaskName::Coinflip => 1,
            TaskName::Chsh => 2,
            TaskName::Conflicting => 3,
            TaskName::Grover => 4,
        };
        let sub = match self.task {
            TaskName::Coinflip => self.cheater as usize,
            _ => self.n,
        };
        (rank, sub, self.queries)
    }

    fn train_config(&self, optimum: f64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed: self.seed,
            init: if self.init_radius == 0.0 {
                Init::Zeros
            } else {
                Init::Uniform(self.init_radius)
            },
            optimizer: self.optimizer,
            optimum: Some(optimum),
            ..TrainConfig::default()
        }
    }

    fn qft(&self) -> QftTask {
        let mut t = QftTask::new(self.n);
        if !self.layers.is_empty() {
            t.layers = self.layers.clone();
        }
        t.depth = self.depth;
        t
    }

    fn grover(&self, queries: usize) -> GroverTask {
        let mut t = GroverTask::new(self.n, queries);
        if !self.layers.is_empty() {
            t.layers = self.layers.clone();
        }
        t.depth = self.depth;
        t
    }

    fn coinflip(&self) -> CoinFlipTask {
        let mut t = CoinFlipTask::new(self.cheater);
        if !self.layers.is_empty() {
            t.layers = self.layers.clone();
        }
        t.ancilla = self.ancilla;
        t
    }

    fn game(&self) -> GameTask {
        let g = match self.task {
            TaskName::Conflicting => Game::ConflictingInterest,
            _ => Game::Chsh,
        };
        let mut t = GameTask::new(g);
        if !self.layers.is_empty() {
            t.layers = self.layers.clone();
        }
        t
    }

    /// The episode and the policy names for its slots.
    pub fn episode(&self) -> RunResult<(EpisodeSpec, Vec<String>)> {
        self.episode_for(None)
    }

    fn episode_for(&self, policies: Option<Vec<ParamCircuit>>) -> RunResult<(EpisodeSpec, Vec<String>)> {
        let named = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Ok(match self.task {
            TaskName::Qft => {
                let t = self.qft();
                let p = match policies {
                    Some(mut p) => p.remove(0),
                    None => t.policy()?,
                };
                (t.episode_with(p).map_err(TaskError::from)?, named(&["policy"]))
            }
            TaskName::Grover => {
                let t = self.grover(self.queries);
                let p = match policies {
                    Some(p) => p,
                    None => t.policies()?,
                };
                let post = (1..=self.queries).map(crate::framework::Action::Policy).collect();
                let ep = t
                    .episode_with(crate::framework::Action::Policy(0), post, p)
                    .map_err(TaskError::from)?;
                let mut names = vec!["pre".to_string()];
                names.extend((1..=self.queries).map(|j| format!("post{j}")));
                (ep, names)
            }
            TaskName::Coinflip => {
                let t = self.coinflip();
                let mut p = match policies {
                    Some(p) => p,
                    None => t.policies()?,
                };
                let r2 = p.pop().expect("two slots");
                let r1 = p.pop().expect("two slots");
                (t.episode_with(r1, r2)?, named(&["round1", "round2"]))
            }
            TaskName::Chsh | TaskName::Conflicting => {
                let t = self.game();
                let p = match policies {
                    Some(p) => p,
                    None => t.policies()?,
                };
                (t.episode_with(p)?, named(&["shared_prep", "a_local", "b_local"]))
            }
        })
    }
}

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    key: (usize, usize, usize),
    pub label: String,
    pub metric: String,
    pub learned: f64,
    pub optimal: f64,
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub record: TrainRecord,
    pub seeds: Vec<SeedSummary>,
    pub circuits: Vec<NamedCircuit>,
    pub row: ReportRow,
    /// `(F_A, F_B)` for the games.
    pub payoffs: Option<(f64, f64)>,
}

fn split_params(ep: &EpisodeSpec, names: &[String], params: &[f64]) -> Vec<NamedCircuit> {
    ep.interaction
        .policies()
        .iter()
        .enumerate()
        .map(|(i, p)| NamedCircuit {
            name: Some(names[i].clone()),
            circuit: p.clone(),
            params: params[ep.interaction.param_range(i)].to_vec(),
        })
        .collect()
}

fn train_stage(cfg: &RunConfig, ep: &EpisodeSpec, tc: &TrainConfig) -> RunResult<(TrainRecord, Vec<SeedSummary>)> {
    Ok(multi_seed(ep, tc, cfg.seeds)?)
}

/// Trains the configured task.
pub fn run(cfg: &RunConfig) -> RunResult<RunOutcome> {
    cfg.validate()?;
    let mut row = cfg.row();
    let (ep, names) = cfg.episode()?;
    let (record, seeds) = if cfg.task == TaskName::Grover && cfg.transfer && cfg.queries > 1 {
        let mut prev: Option<TrainRecord> = None;
        let mut out = None;
        for k in 1..=cfg.queries {
            let stage = RunConfig { queries: k, ..cfg.clone() };
            let (sep, _) = stage.episode()?;
            let mut tc = stage.train_config(grover_closed_form(1 << cfg.n, k));
            if let Some(p) = &prev {
                tc.init = Init::Uniform(cfg.transfer_init);
                tc = transfer(p, sep.num_params(), &[0..sep.interaction.param_range(k - 1).end], &tc)?;
            }
            let (rec, summary) = train_stage(cfg, &sep, &tc)?;
            prev = Some(rec.clone());
            out = Some((rec, summary));
        }
        out.expect("at least one stage")
    } else {
        train_stage(cfg, &ep, &cfg.train_config(row.optimal))?
    };
    row.learned = record.final_reward;
    let payoffs = match cfg.task {
        TaskName::Chsh | TaskName::Conflicting => {
            let p = cfg.game().payoffs(&ep.final_states(&record.final_params).map_err(TaskError::from)?)?;
            Some((p.f_a, p.f_b))
        }
        _ => None,
    };
    let circuits = split_params(&ep, &names, &record.final_params);
    Ok(RunOutcome {
        config: cfg.clone(),
        record,
        seeds,
        circuits,
        row,
        payoffs,
    })
}

/// Scores stored circuits, one per policy slot, without training.
pub fn evaluate(cfg: &RunConfig, circuits: &[NamedCircuit]) -> RunResult<f64> {
    cfg.validate()?;
    let (ep, _) = cfg.episode()?;
    let slots = ep.interaction.policies();
    if circuits.len() != slots.len() {
        return Err(RunError::Mismatch(format!(
            "{} task expects {} circuits, file has {}",
            cfg.task,
            slots.len(),
            circuits.len()
        )));
    }
    for (i, (c, slot)) in circuits.iter().zip(slots).enumerate() {
        if c.circuit.window() != slot.window() {
            return Err(RunError::Mismatch(format!(
                "circuit {i} acts on qubits {:?}, the task slot expects {:?}",
                c.circuit.window(),
                slot.window()
            )));
        }
        c.circuit.check_params(&c.params)?;
    }
    let (ep, _) = cfg.episode_for(Some(circuits.iter().map(|c| c.circuit.clone()).collect()))?;
    let params: Vec<f64> = circuits.iter().flat_map(|c| c.params.iter().copied()).collect();
    Ok(ep.run(&params).map_err(TaskError::from)?)
}

/// Files written by [`write_artifacts`].
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub config: PathBuf,
    pub log: PathBuf,
    pub params: PathBuf,
    pub dump: PathBuf,
    pub record: PathBuf,
}

/// Writes config, epoch log, circuit file, diagram dump and summary record
/// under `dir`. Contents depend only on the config, never on wall time.
pub fn write_artifacts(out: &RunOutcome, dir: &Path) -> RunResult<Artifacts> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let stem = out.config.stem();
    let a = Artifacts {
        config: dir.join(format!("{stem}.cfg")),
        log: dir.join(format!("{stem}.log")),
        params: dir.join(format!("{stem}.circuit")),
        dump: dir.join(format!("{stem}.dump")),
        record: dir.join(format!("{stem}.record")),
    };
    let write = |p: &PathBuf, s: String| fs::write(p, s).map_err(io_err(p));
    write(&a.config, out.config.to_text())?;
    write(&a.log, out.record.log_text())?;
    write(&a.params, dump::write_circuits(&out.circuits))?;
    let mut d = String::new();
    for c in &out.circuits {
        let _ = writeln!(d, "# {}", c.name.as_deref().unwrap_or("policy"));
        d.push_str(&dump::render(&c.circuit, &c.params)?.text);
        d.push('\n');
    }
    write(&a.dump, d)?;
    write(&a.record, record_text(out))?;
    Ok(a)
}

fn record_text(out: &RunOutcome) -> String {
    let r = &out.row;
    let mut s = String::new();
    let _ = writeln!(s, "label = {}", r.label);
    let _ = writeln!(s, "metric = {}", r.metric);
    let _ = writeln!(s, "learned = {:?}", r.learned);
    let _ = writeln!(s, "optimal = {:?}", r.optimal);
    if let Some((fa, fb)) = out.payoffs {
        let _ = writeln!(s, "f_a = {fa:?}");
        let _ = writeln!(s, "f_b = {fb:?}");
    }
    for sm in &out.seeds {
        let _ = writeln!(s, "seed_{} = {:?}", sm.seed, sm.final_reward);
    }
    s.push_str(&out.config.to_text());
    s
}

/// Reads one `.record` file back into a table row.
pub fn parse_record(text: &str) -> RunResult<ReportRow> {
    let mut learned = None;
    let mut cfg_lines = String::new();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            let (k, v) = (k.trim(), v.trim());
            if k == "learned" {
                learned = Some(v.parse::<f64>().map_err(|e| RunError::Value {
                    key: "learned".into(),
                    msg: e.to_string(),
                })?);
            } else if CONFIG_KEYS.contains(&k) {
                let _ = writeln!(cfg_lines, "{k} = {v}");
            }
        }
    }
    let cfg = RunConfig::parse(&cfg_lines)?;
    let mut row = cfg.row();
    row.learned = learned.ok_or(RunError::Config {
        line: 0,
        msg: "record has no 'learned' value".into(),
    })?;
    Ok(row)
}

/// Rows from every `.record` file in `dir`, in table order.
pub fn collect_report(dir: &Path) -> RunResult<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let entries = fs::read_dir(dir).map_err(io_err(dir))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "record"))
        .collect();
    paths.sort();
    for p in paths {
        let text = fs::read_to_string(&p).map_err(io_err(&p))?;
        rows.push(parse_record(&text)?);
    }
    rows.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(rows)
}

pub fn render_report(rows: &[ReportRow]) -> String {
    let header = ["Task", "Metric", "Learned", "Optimal"];
    let cells: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.label.clone(),
                r.metric.clone(),
                format!("{:.6}", r.learned),
                format!("{:.6}", r.optimal),
            ]
        })
        .collect();
    let mut w = header.map(|h| h.len());
    for c in &cells {
        for (i, x) in c.iter().enumerate() {
            w[i] = w[i].max(x.len());
        }
    }
    let line = |c: [&str; 4]| format!("{:<a$}  {:<b$}  {:>c$}  {:>d$}\n", c[0], c[1], c[2], c[3], a = w[0], b = w[1], c = w[2], d = w[3]);
    let mut s = line(header);
    for c in &cells {
        s.push_str(&line([&c[0], &c[1], &c[2], &c[3]]));
    }
    s
}

/// The nine runs behind the summary table.
pub fn paper_runs() -> Vec<RunConfig> {
    let mut out = Vec::new();
    for n in [4, 6] {
        let mut c = RunConfig::for_task(TaskName::Qft);
        c.n = n;
        if n == 6 {
            c.seeds = 5;
        }
        out.push(c);
    }
    for who in [Cheater::Alice, Cheater::Bob] {
        let mut c = RunConfig::for_task(TaskName::Coinflip);
        c.cheater = who;
        out.push(c);
    }
    out.push(RunConfig::for_task(TaskName::Chsh));
    out.push(RunConfig::for_task(TaskName::Conflicting));
    for (n, k) in [(2, 1), (3, 1), (3, 2)] {
        let mut c = RunConfig::for_task(TaskName::Grover);
        c.n = n;
        c.queries = k;
        out.push(c);
    }
    out
}
