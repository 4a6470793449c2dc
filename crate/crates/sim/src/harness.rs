//! Round loop, grid execution and aggregation.

use dpcascade_core::bounds::{self, BoundKind, BoundParams};
use dpcascade_core::{Policy, PolicyParams, ProblemInstance, ProblemKind, Variant};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, RegretMode};
use crate::error::{Result, SimError};
use crate::seed::{derive_rng, repetition_seed, ENVIRONMENT};

/// What to simulate in one run, apart from the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub variant: Variant,
    pub params: PolicyParams,
    pub mode: RegretMode,
    /// Record every n-th round; the final round is always recorded.
    pub record_every: u64,
}

impl RunSpec {
    pub fn new(variant: Variant, params: PolicyParams) -> Self {
        Self {
            variant,
            params,
            mode: RegretMode::Pseudo,
            record_every: 1,
        }
    }
}

/// Rounds at which cumulative regret is recorded, starting at 1.
pub fn recorded_rounds(horizon: u64, every: u64) -> Vec<u64> {
    let every = every.max(1);
    let mut rounds: Vec<u64> = (1..=horizon / every).map(|i| i * every).collect();
    if rounds.last() != Some(&horizon) && horizon > 0 {
        rounds.push(horizon);
    }
    rounds
}

/// Runs one learner for `instance.horizon()` rounds and returns cumulative
/// regret at the recorded rounds.
///
/// The initial full-feedback draw is free. Environment draws come from the
/// stream `(seed, "environment")`, shared by all learners, and learner noise
/// from `(seed, variant name)`.
pub fn run_single(instance: &ProblemInstance, spec: &RunSpec, seed: u64) -> Result<Vec<f64>> {
    let mut env_rng = derive_rng(seed, ENVIRONMENT);
    let mut rng = derive_rng(seed, spec.variant.name());

    let w0 = instance.sample_round(&mut env_rng);
    let mut policy = Policy::initialize(instance, spec.variant, spec.params, &w0, &mut rng)?;

    let horizon = instance.horizon();
    let every = spec.record_every.max(1);
    let mut out = Vec::with_capacity(recorded_rounds(horizon, every).len());
    let mut indices = Vec::with_capacity(instance.num_items());
    let mut cumulative = 0.0;

    for t in 1..=horizon {
        policy.compute_indices_into(&mut indices);
        if let Some(item) = indices.iter().position(|x| x.is_nan()) {
            return Err(SimError::NumericFault { round: t, item: item + 1 });
        }
        let action = policy.select_action(&indices, &mut rng)?;
        let realization = instance.sample_round(&mut env_rng);
        cumulative += match spec.mode {
            RegretMode::Pseudo => instance.per_round_regret(&action)?,
            RegretMode::Realized => instance.realized_regret(&action, &realization)?,
        };
        match instance.kind() {
            ProblemKind::Cascade => {
                let fb = dpcascade_core::env::observe_click(&realization, &action)?;
                policy.update(&fb.observed, &mut rng)?;
            }
            ProblemKind::SemiBandit => {
                let obs = instance.semibandit_feedback(&realization, &action)?;
                policy.update(&obs, &mut rng)?;
            }
        }
        if t % every == 0 || t == horizon {
            out.push(cumulative);
        }
    }
    Ok(out)
}

/// Cumulative regret of one (variant, parameters) cell over all
/// repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub variant: Variant,
    pub params: PolicyParams,
    pub num_items: usize,
    pub list_size: usize,
    pub horizon: u64,
    pub rounds: Vec<u64>,
    /// `runs[r][i]` is repetition `r` at `rounds[i]`.
    pub runs: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Sample standard deviation (n - 1 denominator); 0 for one repetition.
    pub std: Vec<f64>,
    pub upper_bound: Option<Vec<f64>>,
}

impl RegretTrace {
    pub fn from_runs(
        variant: Variant,
        params: PolicyParams,
        instance: &ProblemInstance,
        rounds: Vec<u64>,
        runs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if runs.is_empty() {
            return Err(SimError::Aggregation("no repetitions".into()));
        }
        if runs.iter().any(|r| r.len() != rounds.len()) {
            return Err(SimError::Aggregation("repetition length differs from the round grid".into()));
        }
        let (mean, std) = mean_std(&runs, rounds.len());
        Ok(Self {
            variant,
            params,
            num_items: instance.num_items(),
            list_size: instance.list_size(),
            horizon: instance.horizon(),
            rounds,
            runs,
            mean,
            std,
            upper_bound: None,
        })
    }

    pub fn repetitions(&self) -> usize {
        self.runs.len()
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean.last().unwrap_or(&0.0)
    }

    pub fn final_std(&self) -> f64 {
        *self.std.last().unwrap_or(&0.0)
    }

    /// Evaluates the matching closed-form upper bound at each recorded
    /// round. Learners without one get no overlay.
    pub fn attach_bound(&mut self, params: &BoundParams) -> Result<()> {
        let Some(kind) = BoundKind::for_variant(self.variant) else {
            self.upper_bound = None;
            return Ok(());
        };
        let mut p = params.clone().with_privacy(self.params.epsilon, self.params.delta);
        p.c1 = self.params.c1;
        let values = self
            .rounds
            .iter()
            .map(|&t| bounds::upper_bound(kind, &p, t as f64))
            .collect::<Result<Vec<_>, _>>()?;
        self.upper_bound = Some(values);
        Ok(())
    }
}

fn mean_std(runs: &[Vec<f64>], len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = runs.len() as f64;
    let mut mean = vec![0.0; len];
    for run in runs {
        for (m, x) in mean.iter_mut().zip(run) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut std = vec![0.0; len];
    if runs.len() > 1 {
        for run in runs {
            for ((s, x), m) in std.iter_mut().zip(run).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        std.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt());
    }
    (mean, std)
}

/// Bound inputs for an instance under the config's bound settings.
pub fn bound_params(config: &ExperimentConfig, instance: &ProblemInstance) -> BoundParams {
    let mut p = BoundParams::from_instance(instance);
    p.xi = config.bound_xi;
    p.constant_source = config.bound_constants.into();
    p
}

/// A grid cell that did not complete.
#[derive(Debug)]
pub struct CellFailure {
    pub variant: Variant,
    pub params: PolicyParams,
    pub seed: u64,
    pub error: SimError,
}

#[derive(Debug, Default)]
pub struct GridResult {
    pub traces: Vec<RegretTrace>,
    pub failures: Vec<CellFailure>,
}

/// Expands a config into its (variant, parameters) cells, in config order.
pub fn cells(config: &ExperimentConfig) -> Vec<RunSpec> {
    config
        .variants
        .iter()
        .flat_map(|v| {
            v.epsilon.iter().map(move |&eps| RunSpec {
                variant: v.name,
                params: v.params(eps),
                mode: config.regret_mode,
                record_every: config.record_every,
            })
        })
        .collect()
}

/// Runs every cell for every repetition, possibly concurrently.
///
/// The result does not depend on the number of worker threads: each run
/// owns its random streams and the per-cell aggregation walks repetitions in
/// index order. A failing repetition drops its cell and is reported in
/// [`GridResult::failures`]; the other cells still run.
pub fn run_grid(config: &ExperimentConfig) -> Result<GridResult> {
    config.validate()?;
    let specs = cells(config);
    let instances = specs
        .iter()
        .map(|s| config.instance_for(s.variant))
        .collect::<Result<Vec<_>>>()?;
    let reps = config.repetitions;
    let rounds = recorded_rounds(config.horizon, config.record_every);

    let outcomes: Vec<Result<Vec<f64>>> = (0..specs.len() * reps)
        .into_par_iter()
        .map(|job| {
            let cell = job / reps;
            run_single(&instances[cell], &specs[cell], repetition_seed(config.base_seed, job % reps))
        })
        .collect();

    let mut result = GridResult::default();
    let mut outcomes = outcomes.into_iter();
    for (spec, instance) in specs.iter().zip(&instances) {
        let mut runs = Vec::with_capacity(reps);
        let mut failure = None;
        for r in 0..reps {
            match outcomes.next().expect("one outcome per job") {
                Ok(run) => runs.push(run),
                Err(error) if failure.is_none() => {
                    failure = Some(CellFailure {
                        variant: spec.variant,
                        params: spec.params,
                        seed: repetition_seed(config.base_seed, r),
                        error,
                    })
                }
                Err(_) => {}
            }
        }
        if let Some(f) = failure {
            log::warn!("{} eps={}: {}", f.variant, f.params.epsilon, f.error);
            result.failures.push(f);
            continue;
        }
        let mut trace = RegretTrace::from_runs(spec.variant, spec.params, instance, rounds.clone(), runs)?;
        if config.overlay {
            trace.attach_bound(&bound_params(config, instance))?;
        }
        log::info!(
            "{} eps={} final mean regret {:.3}",
            trace.variant,
            trace.params.epsilon,
            trace.final_mean()
        );
        result.traces.push(trace);
    }
    Ok(result)
}

/// Final-round statistics of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub variant: Variant,
    pub epsilon: f64,
    pub delta: f64,
    pub num_items: usize,
    pub list_size: usize,
    pub repetitions: usize,
    pub final_mean_regret: f64,
    pub final_std_regret: f64,
    /// Empty for completed cells, otherwise the failure message.
    pub error: Option<String>,
}

/// One row per trace with its final cumulative regret.
pub fn summarize(traces: &[RegretTrace]) -> Result<Vec<SummaryRow>> {
    if let Some(first) = traces.first() {
        if traces.iter().any(|t| t.horizon != first.horizon) {
            return Err(SimError::Aggregation("traces have different horizons".into()));
        }
    }
    Ok(traces
        .iter()
        .map(|t| SummaryRow {
            variant: t.variant,
            epsilon: t.params.epsilon,
            delta: t.params.delta,
            num_items: t.num_items,
            list_size: t.list_size,
            repetitions: t.repetitions(),
            final_mean_regret: t.final_mean(),
            final_std_regret: t.final_std(),
            error: None,
        })
        .collect())
}

/// Summary rows for a grid, failed cells included as error rows.
pub fn summarize_grid(config: &ExperimentConfig, grid: &GridResult) -> Result<Vec<SummaryRow>> {
    let mut rows = summarize(&grid.traces)?;
    rows.extend(grid.failures.iter().map(|f| SummaryRow {
        variant: f.variant,
        epsilon: f.params.epsilon,
        delta: f.params.delta,
        num_items: config.instance.num_items,
        list_size: config.instance.list_size,
        repetitions: config.repetitions,
        final_mean_regret: f64::NAN,
        final_std_regret: f64::NAN,
        error: Some(format!("seed {}: {}", f.seed, f.error)),
    }));
    Ok(rows)
}

/// Which configuration field a sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Replaces every variant's ε list.
    Epsilon(Vec<f64>),
    /// Number of items; weights are regenerated.
    NumItems(Vec<usize>),
    /// List size; weights are regenerated.
    ListSize(Vec<usize>),
}

/// Runs one grid per swept value and collects final-regret rows. Only the
/// final round is recorded.
pub fn sweep(config: &ExperimentConfig, axis: &Sweep) -> Result<Vec<SummaryRow>> {
    let mut configs = Vec::new();
    let mut base = config.clone();
    base.record_every = base.horizon.max(1);
    base.overlay = false;
    match axis {
        Sweep::Epsilon(values) => {
            if values.is_empty() {
                return Err(SimError::Config("empty epsilon sweep".into()));
            }
            for v in &mut base.variants {
                v.epsilon = values.clone();
            }
            configs.push(base);
        }
        Sweep::NumItems(values) | Sweep::ListSize(values) => {
            if values.is_empty() {
                return Err(SimError::Config("empty sweep".into()));
            }
            for &x in values {
                let mut c = base.clone();
                if matches!(axis, Sweep::NumItems(_)) {
                    c.instance.num_items = x;
                } else {
                    c.instance.list_size = x;
                }
                configs.push(c);
            }
        }
    }
    // Validate everything before simulating anything.
    for c in &configs {
        c.validate()?;
    }
    let mut rows = Vec::new();
    for c in &configs {
        let grid = run_grid(c)?;
        rows.extend(summarize_grid(c, &grid)?);
    }
    Ok(rows)
}

/// Least-squares fit of `y = a ln t + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

pub fn log_fit(ts: &[f64], ys: &[f64]) -> Option<LogFit> {
    if ts.len() != ys.len() || ts.len() < 2 {
        return None;
    }
    let n = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LogFit { a, b, r_squared })
}
