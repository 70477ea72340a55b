//! Training runs: wires the network fitness into the CRO engine, watches the
//! validation set once per window of training evaluations, and aggregates
//! independent trials.

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cro::{CroParams, Engine, Problem};
use crate::data::{split_dataset, DatasetSplit, Portion, RawDataset, SplitCounts};
use crate::operators::{self, OperatorParams};
use crate::slfn::{self, NetworkConfig};
use crate::stats::Stats;
use crate::structure::SolutionStructure;
use crate::{Error, Result};

/// CRO problem: minimise network fitness on a training portion.
pub struct NetworkProblem<'a> {
    pub network: NetworkConfig,
    pub operators: OperatorParams,
    pub train: &'a Portion,
}

impl Problem for NetworkProblem<'_> {
    type Solution = SolutionStructure;

    fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> SolutionStructure {
        operators::initial_gen(&self.network, rng)
    }

    fn neighbour<R: Rng + ?Sized>(&self, s: &SolutionStructure, rng: &mut R) -> SolutionStructure {
        operators::neighbour(s, &self.operators, rng)
    }

    fn decompose<R: Rng + ?Sized>(
        &self,
        s: &SolutionStructure,
        rng: &mut R,
    ) -> (SolutionStructure, SolutionStructure) {
        operators::decomposition(s, &self.operators, rng)
    }

    fn synthesize<R: Rng + ?Sized>(
        &self,
        a: &SolutionStructure,
        b: &SolutionStructure,
        rng: &mut R,
    ) -> SolutionStructure {
        operators::synthesis(a, b, rng)
    }

    fn objective(&self, s: &SolutionStructure) -> f64 {
        slfn::fitness(s, self.train, &self.network)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoppingConfig {
    /// Training evaluations per validation window.
    pub window_size: u64,
    /// Consecutive non-improving windows tolerated before stopping.
    pub max_window_count: u32,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        StoppingConfig {
            window_size: 100,
            max_window_count: 300,
        }
    }
}

impl StoppingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::config("stopping.window_size must be positive"));
        }
        if self.max_window_count == 0 {
            return Err(Error::config("stopping.max_window_count must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    FeLimit,
    Overfitness,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::FeLimit => "fe_limit",
            StopReason::Overfitness => "overfitness",
        })
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fe_limit" => Ok(StopReason::FeLimit),
            "overfitness" => Ok(StopReason::Overfitness),
            other => Err(Error::config(format!("unknown stop reason {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop(StopReason),
}

/// Sliding-window overfitting detector.
#[derive(Debug, Clone)]
pub struct StoppingState {
    config: StoppingConfig,
    overfit_count: u32,
    val_best: f64,
    last_val: Option<f64>,
    saved_network: Option<SolutionStructure>,
    next_boundary: u64,
    checks: u32,
}

impl StoppingState {
    pub fn new(config: StoppingConfig) -> Self {
        StoppingState {
            config,
            overfit_count: 0,
            val_best: f64::INFINITY,
            last_val: None,
            saved_network: None,
            next_boundary: config.window_size,
            checks: 0,
        }
    }

    pub fn overfit_count(&self) -> u32 {
        self.overfit_count
    }

    pub fn val_best(&self) -> f64 {
        self.val_best
    }

    pub fn last_validation(&self) -> Option<f64> {
        self.last_val
    }

    /// Network that achieved [`val_best`](Self::val_best).
    pub fn saved_network(&self) -> Option<&SolutionStructure> {
        self.saved_network.as_ref()
    }

    /// Validation checks performed so far.
    pub fn checks(&self) -> u32 {
        self.checks
    }

    /// Whether `fe_count` has crossed the next window boundary.
    pub fn window_due(&self, fe_count: u64) -> bool {
        fe_count >= self.next_boundary
    }

    /// Window-boundary check. Stops at the FE limit; otherwise scores
    /// `current_best` on the validation portion and updates the detector.
    pub fn check(
        &mut self,
        fe_count: u64,
        fe_limit: u64,
        current_best: &SolutionStructure,
        validation: &Portion,
        cfg: &NetworkConfig,
    ) -> StopDecision {
        if fe_count >= fe_limit {
            return StopDecision::Stop(StopReason::FeLimit);
        }
        self.next_boundary = (fe_count / self.config.window_size + 1) * self.config.window_size;
        let val = slfn::fitness(current_best, validation, cfg);
        self.record_validation(val, current_best)
    }

    /// Updates the detector with one validation fitness value.
    pub fn record_validation(
        &mut self,
        val_fitness: f64,
        current_best: &SolutionStructure,
    ) -> StopDecision {
        self.checks += 1;
        self.last_val = Some(val_fitness);
        if val_fitness < self.val_best {
            self.overfit_count = 0;
            self.val_best = val_fitness;
            self.saved_network = Some(current_best.clone());
            StopDecision::Continue
        } else {
            self.overfit_count += 1;
            if self.overfit_count > self.config.max_window_count {
                StopDecision::Stop(StopReason::Overfitness)
            } else {
                StopDecision::Continue
            }
        }
    }
}

/// Everything needed to train one network apart from data and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub cro: CroParams,
    pub network: NetworkConfig,
    pub operators: OperatorParams,
    pub stopping: StoppingConfig,
}

impl TrainSettings {
    /// Defaults for a dataset with `n0` attributes and `n2` classes.
    pub fn new(n0: usize, n2: usize) -> Self {
        TrainSettings {
            cro: CroParams::default(),
            network: NetworkConfig::new(n0, NetworkConfig::DEFAULT_HIDDEN, n2),
            operators: OperatorParams::default(),
            stopping: StoppingConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cro.validate()?;
        self.network.validate()?;
        self.operators.validate()?;
        self.stopping.validate()
    }

    fn validate_for(&self, n_attributes: usize, n_classes: usize) -> Result<()> {
        self.validate()?;
        if self.network.n0 != n_attributes {
            return Err(Error::Dimension {
                expected: n_attributes,
                actual: self.network.n0,
            });
        }
        if self.network.n2 != n_classes {
            return Err(Error::Dimension {
                expected: n_classes,
                actual: self.network.n2,
            });
        }
        Ok(())
    }
}

/// Emitted at every validation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgressRecord {
    pub trial: usize,
    pub fe_count: u64,
    pub train_fitness: f64,
    pub val_fitness: f64,
}

pub trait ProgressSink: Sync {
    fn record(&self, record: &ProgressRecord);
}

/// Discards progress records.
pub struct NoProgress;

impl ProgressSink for NoProgress {
    fn record(&self, _: &ProgressRecord) {}
}

impl<F: Fn(&ProgressRecord) + Sync> ProgressSink for F {
    fn record(&self, record: &ProgressRecord) {
        self(record)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub train_error: f64,
    pub validation_error: f64,
    pub test_error: f64,
    pub fe_used: u64,
    pub stop_reason: StopReason,
}

/// A finished run together with the network it produced.
#[derive(Debug, Clone)]
pub struct Training {
    pub report: TrialReport,
    pub network: SolutionStructure,
    /// Best validation fitness seen, if any window was checked.
    pub val_best: Option<f64>,
    pub validation_checks: u32,
}

/// Trains one network and returns it alongside its report.
pub fn train(
    split: &DatasetSplit,
    settings: &TrainSettings,
    seed: u64,
    trial: usize,
    sink: &dyn ProgressSink,
) -> Result<Training> {
    settings.validate_for(split.n_attributes(), split.n_classes())?;
    let cfg = settings.network;
    let problem = NetworkProblem {
        network: cfg,
        operators: settings.operators,
        train: &split.train,
    };
    let mut engine = Engine::new(settings.cro, problem, ChaCha8Rng::seed_from_u64(seed))?;
    let fe_limit = settings.cro.fe_limit;
    let mut stopping = StoppingState::new(settings.stopping);
    let mut reason = StopReason::FeLimit;

    let outcome = engine.run(|e| {
        let fe = e.fe_count();
        if !stopping.window_due(fe) && fe < fe_limit {
            return ControlFlow::Continue(());
        }
        match stopping.check(fe, fe_limit, e.best(), &split.validation, &cfg) {
            StopDecision::Continue => {
                sink.record(&ProgressRecord {
                    trial,
                    fe_count: fe,
                    train_fitness: e.best_pe(),
                    val_fitness: stopping.last_validation().unwrap_or(f64::NAN),
                });
                ControlFlow::Continue(())
            }
            StopDecision::Stop(r) => {
                reason = r;
                ControlFlow::Break(())
            }
        }
    });

    let network = match reason {
        StopReason::Overfitness => stopping
            .saved_network()
            .cloned()
            .expect("overfitness implies a saved network"),
        StopReason::FeLimit => outcome.best,
    };
    let error = |p: &Portion| slfn::percent_error(&slfn::predict(&network, p), p.labels());
    let report = TrialReport {
        trial,
        seed,
        train_error: error(&split.train),
        validation_error: error(&split.validation),
        test_error: error(&split.test),
        fe_used: outcome.fe_count,
        stop_reason: reason,
    };
    Ok(Training {
        report,
        val_best: stopping.saved_network().map(|_| stopping.val_best()),
        validation_checks: stopping.checks(),
        network,
    })
}

/// Trains one network on a fixed split.
pub fn train_once(
    split: &DatasetSplit,
    settings: &TrainSettings,
    seed: u64,
    trial: usize,
    sink: &dyn ProgressSink,
) -> Result<TrialReport> {
    train(split, settings, seed, trial, sink).map(|t| t.report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub train: Stats,
    pub validation: Stats,
    pub test: Stats,
}

impl Summary {
    pub fn from_reports(reports: &[TrialReport]) -> Self {
        let column = |f: fn(&TrialReport) -> f64| {
            Stats::from_values(&reports.iter().map(f).collect::<Vec<_>>())
        };
        Summary {
            train: column(|r| r.train_error),
            validation: column(|r| r.validation_error),
            test: column(|r| r.test_error),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialSet {
    /// Ordered by trial index.
    pub reports: Vec<TrialReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Trials run on the current rayon pool. Without the `parallel` feature
    /// this behaves like `Sequential`.
    #[default]
    Parallel,
}

/// Seed of trial `i`.
pub fn trial_seed(base_seed: u64, i: usize) -> u64 {
    base_seed.wrapping_add(i as u64)
}

/// Runs `n_trials` independent trials. Trial `i` resamples the split and
/// seeds its optimizer with `base_seed + i`.
pub fn run_trials(
    raw: &RawDataset,
    counts: SplitCounts,
    settings: &TrainSettings,
    n_trials: usize,
    base_seed: u64,
    execution: Execution,
    sink: &dyn ProgressSink,
) -> Result<TrialSet> {
    if n_trials == 0 {
        return Err(Error::config("run.trials must be at least 1"));
    }
    settings.validate_for(raw.n_attributes(), raw.n_classes())?;
    let one = |i: usize| {
        let seed = trial_seed(base_seed, i);
        let split = split_dataset(raw, counts, seed)?;
        train_once(&split, settings, seed, i, sink)
    };
    let reports = match execution {
        Execution::Sequential => (0..n_trials).map(one).collect::<Result<Vec<_>>>()?,
        Execution::Parallel => parallel_map(n_trials, one)?,
    };
    Ok(TrialSet {
        summary: Summary::from_reports(&reports),
        reports,
    })
}

#[cfg(feature = "parallel")]
fn parallel_map<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(&f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T>(n: usize, f: impl Fn(usize) -> Result<T>) -> Result<Vec<T>> {
    (0..n).map(f).collect()
}
