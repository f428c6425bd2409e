//! Gradient-ascent policy search over an episode's parameters.

use std::fmt;
use std::ops::Range;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::grad::{GradError, Objective};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("non-finite {what} at epoch {epoch}{}", index.map(|i| format!(", parameter {i}")).unwrap_or_default())]
    NonFinite {
        what: &'static str,
        epoch: usize,
        index: Option<usize>,
    },
    #[error("reward {reward} at epoch {epoch} exceeds the optimum {optimum}")]
    AboveOptimum { epoch: usize, reward: f64, optimum: f64 },
    #[error(transparent)]
    Grad(#[from] GradError),
}

pub type TrainResult<T> = Result<T, TrainError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// `θ ← θ + η·g`.
    Plain,
    /// Bias-corrected first/second moment ascent.
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Zeros,
    /// Independent `uniform(-r, r)` draws from the seeded generator.
    Uniform(f64),
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub init: Init,
    pub optimizer: Optimizer,
    /// Per-parameter freeze flags; empty means nothing is frozen.
    pub frozen: Vec<bool>,
    /// `(index, value)` overrides applied after initialization.
    pub pinned: Vec<(usize, f64)>,
    /// Training aborts if the reward ever exceeds this by more than 1e-6.
    pub optimum: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.05,
            seed: 0,
            init: Init::Uniform(0.1),
            optimizer: Optimizer::adam(),
            frozen: Vec::new(),
            pinned: Vec::new(),
            optimum: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, n_params: usize) -> TrainResult<()> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config("learning rate must be positive".into()));
        }
        if n_params == 0 {
            return Err(TrainError::Config("episode has no trainable parameters".into()));
        }
        if !self.frozen.is_empty() && self.frozen.len() != n_params {
            return Err(TrainError::Config(format!(
                "frozen mask has {} entries for {n_params} parameters",
                self.frozen.len()
            )));
        }
        if let Init::Given(p) = &self.init {
            if p.len() != n_params {
                return Err(TrainError::Config(format!(
                    "initial parameters have length {} for {n_params} parameters",
                    p.len()
                )));
            }
        }
        if let Some((i, _)) = self.pinned.iter().find(|(i, _)| *i >= n_params) {
            return Err(TrainError::Config(format!("pinned index {i} out of range")));
        }
        Ok(())
    }

    pub fn initial_params(&self, n_params: usize) -> Vec<f64> {
        let mut p = match &self.init {
            Init::Zeros => vec![0.0; n_params],
            Init::Uniform(r) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..n_params).map(|_| rng.gen_range(-r..=*r)).collect()
            }
            Init::Given(v) => v.clone(),
        };
        for &(i, v) in &self.pinned {
            p[i] = v;
        }
        p
    }

    fn is_frozen(&self, i: usize) -> bool {
        self.frozen.get(i).copied().unwrap_or(false)
    }
}

impl fmt::Display for TrainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let init = match &self.init {
            Init::Zeros => "zeros".to_string(),
            Init::Uniform(r) => format!("uniform({r})"),
            Init::Given(_) => "given".to_string(),
        };
        let opt = match self.optimizer {
            Optimizer::Plain => "plain".to_string(),
            Optimizer::Adam { .. } => "adam".to_string(),
        };
        write!(
            f,
            "epochs={} learning_rate={} seed={} init={} optimizer={} frozen={} pinned={}",
            self.epochs,
            self.learning_rate,
            self.seed,
            init,
            opt,
            self.frozen.iter().filter(|b| **b).count(),
            self.pinned.len()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub config: TrainConfig,
    /// Reward at the start of each epoch, before that epoch's update.
    pub rewards: Vec<f64>,
    pub gnorms: Vec<f64>,
    pub final_params: Vec<f64>,
    pub final_reward: f64,
    pub seconds: f64,
}

impl TrainRecord {
    /// `epoch=<i> reward=<r> gnorm=<g>` per epoch, full precision.
    pub fn log_lines(&self) -> Vec<String> {
        self.rewards
            .iter()
            .zip(&self.gnorms)
            .enumerate()
            .map(|(i, (r, g))| format_epoch(i, *r, *g))
            .collect()
    }

    pub fn log_text(&self) -> String {
        let mut s = self.log_lines().join("\n");
        s.push('\n');
        s
    }
}

pub fn format_epoch(epoch: usize, reward: f64, gnorm: f64) -> String {
    format!("epoch={epoch} reward={reward:?} gnorm={gnorm:?}")
}

pub fn train(objective: &dyn Objective, config: &TrainConfig) -> TrainResult<TrainRecord> {
    train_with(objective, config, |_, _, _| {})
}

/// Like [`train`], calling `on_epoch(epoch, reward, gnorm)` after each epoch.
pub fn train_with<F>(objective: &dyn Objective, config: &TrainConfig, mut on_epoch: F) -> TrainResult<TrainRecord>
where
    F: FnMut(usize, f64, f64),
{
    let d = objective.num_params();
    config.validate(d)?;
    let start = Instant::now();
    let mut params = config.initial_params(d);
    let mut m = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut rewards = Vec::with_capacity(config.epochs);
    let mut gnorms = Vec::with_capacity(config.epochs);
    let check = |epoch: usize, reward: f64| -> TrainResult<()> {
        if !reward.is_finite() {
            return Err(TrainError::NonFinite {
                what: "reward",
                epoch,
                index: None,
            });
        }
        if let Some(opt) = config.optimum {
            if reward > opt + 1e-6 {
                return Err(TrainError::AboveOptimum {
                    epoch,
                    reward,
                    optimum: opt,
                });
            }
        }
        Ok(())
    };
    for epoch in 0..config.epochs {
        let (reward, mut grad) = objective.value_and_gradient(&params)?;
        check(epoch, reward)?;
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(TrainError::NonFinite {
                what: "gradient",
                epoch,
                index: Some(i),
            });
        }
        for (i, g) in grad.iter_mut().enumerate() {
            if config.is_frozen(i) {
                *g = 0.0;
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let t = (epoch + 1) as i32;
        for i in 0..d {
            if config.is_frozen(i) {
                continue;
            }
            let step = match config.optimizer {
                Optimizer::Plain => grad[i],
                Optimizer::Adam { beta1, beta2, eps } => {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    let mh = m[i] / (1.0 - beta1.powi(t));
                    let vh = v[i] / (1.0 - beta2.powi(t));
                    mh / (vh.sqrt() + eps)
                }
            };
            params[i] += config.learning_rate * step;
        }
        rewards.push(reward);
        gnorms.push(gnorm);
        on_epoch(epoch, reward, gnorm);
    }
    let final_reward = objective.value(&params)?;
    check(config.epochs, final_reward)?;
    Ok(TrainRecord {
        config: config.clone(),
        rewards,
        gnorms,
        final_params: params,
        final_reward,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Warm-start config for a larger episode: copies `record.final_params` at
/// every index in `frozen` and freezes those slots.
pub fn transfer(
    record: &TrainRecord,
    new_n_params: usize,
    frozen: &[Range<usize>],
    base: &TrainConfig,
) -> TrainResult<TrainConfig> {
    let mut cfg = base.clone();
    let mut mask = vec![false; new_n_params];
    let mut pinned = Vec::new();
    for r in frozen {
        if r.end > new_n_params || r.end > record.final_params.len() {
            return Err(TrainError::Config(format!(
                "frozen range {r:?} exceeds {} old / {new_n_params} new parameters",
                record.final_params.len()
            )));
        }
        for i in r.clone() {
            mask[i] = true;
            pinned.push((i, record.final_params[i]));
        }
    }
    cfg.frozen = mask;
    cfg.pinned = pinned;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub seed: u64,
    pub final_reward: f64,
    pub best_reward: f64,
}

/// Trains with seeds `seed..seed+n_seeds` and returns the best record.
pub fn multi_seed(
    objective: &dyn Objective,
    config: &TrainConfig,
    n_seeds: usize,
) -> TrainResult<(TrainRecord, Vec<SeedSummary>)> {
    if n_seeds == 0 {
        return Err(TrainError::Config("need at least one seed".into()));
    }
    let records: Vec<TrainRecord> = (0..n_seeds as u64)
        .into_par_iter()
        .map(|k| {
            let mut c = config.clone();
            c.seed = config.seed + k;
            train(objective, &c)
        })
        .collect::<TrainResult<_>>()?;
    let summary = records
        .iter()
        .map(|r| SeedSummary {
            seed: r.config.seed,
            final_reward: r.final_reward,
            best_reward: r.rewards.iter().copied().fold(r.final_reward, f64::max),
        })
        .collect();
    let best = records
        .into_iter()
        .reduce(|a, b| if b.final_reward > a.final_reward { b } else { a })
        .expect("at least one seed");
    Ok((best, summary))
}
