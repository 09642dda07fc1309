//! Tuning, single-pass training and frozen-model evaluation.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use log::info;

use super::config::{Algorithm, ExperimentConfig, Hyper};
use super::data::{Dataset, RepRounds};
use super::report::{self, Trial};
use crate::baselines::{Banditron, BanditronModel, Confidit, ConfiditModel};
use crate::env::{pick_error, write_trace_csv, Round, TraceRecord};
use crate::error::{Error, Result};
use crate::learner::{Conquer, Learner};
use crate::parallel::Execution;
use crate::projection::ProjectionConfig;
use crate::rng::{self, SimRng};

/// A fresh learner for `algorithm` at grid point `hyper`.
pub fn build_learner(
    algorithm: Algorithm,
    hyper: Hyper,
    config: &ExperimentConfig,
    dim: usize,
) -> Result<Box<dyn Learner>> {
    let missing = |p: &str| Error::Config(format!("{algorithm} needs `{p}`"));
    Ok(match algorithm {
        Algorithm::Conquer(policy) => {
            let eta = hyper.eta.ok_or_else(|| missing("eta"))?;
            let projection = config.project.then(ProjectionConfig::default);
            Box::new(
                Conquer::new(policy, config.matrix, dim, eta)?
                    .with_projection(projection)
                    .with_feedback(config.feedback),
            )
        }
        Algorithm::Confidit => {
            let eta = hyper.eta.ok_or_else(|| missing("eta"))?;
            let alpha = hyper.alpha.ok_or_else(|| missing("alpha"))?;
            Box::new(Confidit::new(ConfiditModel::new(config.matrix, dim, eta, alpha)?))
        }
        Algorithm::Banditron => {
            let gamma = hyper.gamma.ok_or_else(|| missing("gamma"))?;
            Box::new(Banditron::new(BanditronModel::new(dim, gamma)?))
        }
    })
}

/// Trains online on every round in order.
pub fn online_pass(learner: &mut dyn Learner, rounds: &[Round], rng: &mut SimRng) -> Result<Vec<TraceRecord>> {
    rounds.iter().map(|r| learner.train_round(r, None, rng)).collect()
}

/// Mean first-pick error of the frozen learner's greedy choice.
pub fn evaluate(learner: &dyn Learner, rounds: &[Round]) -> Result<f64> {
    if rounds.is_empty() {
        return Err(Error::InvalidArgument("no evaluation rounds".into()));
    }
    let mut total = 0.0;
    for r in rounds {
        total += pick_error(r, learner.predict(r.items())?)?;
    }
    Ok(total / rounds.len() as f64)
}

fn mean_error(trace: &[TraceRecord]) -> f64 {
    if trace.is_empty() {
        return 0.0;
    }
    trace.iter().map(|t| t.error).sum::<f64>() / trace.len() as f64
}

fn learner_rng(seed: u64, phase: &str, rep: usize) -> SimRng {
    rng::stream(seed, &[rng::label(phase), rep as u64])
}

/// Dev error of every grid point and the selected one.
#[derive(Clone, Debug, PartialEq)]
pub struct TuneResult {
    pub algorithm: Algorithm,
    pub grid: Vec<(Hyper, f64)>,
    pub best: Hyper,
}

/// For each grid point, one online pass over each repetition's dev rounds;
/// picks the lowest mean online error (first point on ties).
pub fn tune_grid(
    config: &ExperimentConfig,
    algorithm: Algorithm,
    dim: usize,
    reps: &[RepRounds],
    exec: Execution,
) -> Result<TuneResult> {
    let grid = config.grid(algorithm);
    if grid.is_empty() {
        return Err(Error::Config(format!("empty hyperparameter grid for {algorithm}")));
    }
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..reps.len()).map(move |r| (g, r)))
        .collect();
    let errors = exec.map(&jobs, |&(g, r)| -> Result<f64> {
        let mut learner = build_learner(algorithm, grid[g], config, dim)?;
        let trace = online_pass(learner.as_mut(), &reps[r].dev, &mut learner_rng(config.seed, "dev", r))?;
        Ok(mean_error(&trace))
    });
    let mut sums = vec![0.0; grid.len()];
    for (&(g, _), e) in jobs.iter().zip(errors) {
        sums[g] += e?;
    }
    let scored: Vec<(Hyper, f64)> = grid
        .iter()
        .zip(sums)
        .map(|(h, s)| (*h, s / reps.len() as f64))
        .collect();
    let best = scored
        .iter()
        .fold(None, |best: Option<&(Hyper, f64)>, cand| match best {
            Some(b) if b.1 <= cand.1 => Some(b),
            _ => Some(cand),
        })
        .expect("non-empty grid")
        .0;
    Ok(TuneResult {
        algorithm,
        grid: scored,
        best,
    })
}

/// Training trace of one algorithm in one repetition.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub rep: usize,
    pub records: Vec<TraceRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub tuning: Vec<TuneResult>,
    pub trials: Vec<Trial>,
    pub traces: Vec<RunTrace>,
}

/// Loads the data and builds every repetition's rounds.
pub fn prepare(config: &ExperimentConfig, exec: Execution) -> Result<(Dataset, Vec<RepRounds>)> {
    config.validate()?;
    let data = Dataset::load(config, exec)?;
    let reps = exec.map_range(config.repetitions, |r| data.rounds(config.k, config.seed, r));
    let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((data, reps))
}

/// Tunes every algorithm only.
pub fn tune_all(config: &ExperimentConfig, exec: Execution) -> Result<Vec<TuneResult>> {
    let (data, reps) = prepare(config, exec)?;
    config
        .algorithms
        .iter()
        .map(|&a| tune_grid(config, a, data.dim(), &reps, exec))
        .collect()
}

/// Per algorithm: tune on dev, train one pass on train, freeze, and
/// evaluate the greedy pick on test, in every repetition.
pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<RunOutput> {
    let (data, reps) = prepare(config, exec)?;
    let dim = data.dim();
    let mut tuning = Vec::new();
    for &a in &config.algorithms {
        let t = tune_grid(config, a, dim, &reps, exec)?;
        info!("{a}: selected {}", t.best);
        tuning.push(t);
    }
    let jobs: Vec<(usize, usize)> = (0..tuning.len())
        .flat_map(|i| (0..reps.len()).map(move |r| (i, r)))
        .collect();
    let results = exec.map(&jobs, |&(i, r)| -> Result<(Trial, RunTrace)> {
        let t = &tuning[i];
        let mut learner = build_learner(t.algorithm, t.best, config, dim)?;
        let records = online_pass(
            learner.as_mut(),
            &reps[r].train,
            &mut learner_rng(config.seed, "train", r),
        )?;
        let test_error = evaluate(learner.as_ref(), &reps[r].test)?;
        let skip_rate = learner.skipped_rounds() as f64 / records.len().max(1) as f64;
        Ok((
            Trial {
                algorithm: t.algorithm.name().to_string(),
                k: config.k,
                rep: r,
                params: t.best.to_string(),
                test_error,
                skip_rate,
            },
            RunTrace {
                algorithm: t.algorithm,
                rep: r,
                records,
            },
        ))
    });
    let mut trials = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    for res in results {
        let (trial, trace) = res?;
        trials.push(trial);
        traces.push(trace);
    }
    Ok(RunOutput { tuning, trials, traces })
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const TUNING_FILE: &str = "tuning.csv";
pub const WIN_MATRIX_FILE: &str = "win_matrix.csv";
pub const TRACE_DIR: &str = "traces";

/// `algorithm,params,dev_error,selected`.
pub fn write_tuning_csv(path: &Path, tuning: &[TuneResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["algorithm", "params", "dev_error", "selected"])?;
    for t in tuning {
        for (h, e) in &t.grid {
            w.write_record([
                t.algorithm.name().to_string(),
                h.to_string(),
                format!("{e:.6}"),
                (*h == t.best).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes summary, trials, tuning, the win matrix (with ≥ 2 algorithms)
/// and, if enabled, one training trace per algorithm and repetition.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    report::write_summary_csv(create(&dir.join(SUMMARY_FILE))?, &report::summarize(&out.trials))?;
    report::write_trials_csv(create(&dir.join(TRIALS_FILE))?, &out.trials)?;
    write_tuning_csv(&dir.join(TUNING_FILE), &out.tuning)?;
    if out.tuning.len() >= 2 {
        let m = report::one_vs_one_matrix(&out.trials)?;
        report::write_win_matrix_csv(create(&dir.join(WIN_MATRIX_FILE))?, &m)?;
    }
    if config.write_traces {
        let tdir = dir.join(TRACE_DIR);
        fs::create_dir_all(&tdir).map_err(|e| Error::io(&tdir, e))?;
        for t in &out.traces {
            let path = tdir.join(format!("{}_K{}_rep{}.csv", t.algorithm.name(), config.k, t.rep));
            let mut w = create(&path)?;
            write_trace_csv(&mut w, t.algorithm.name(), &t.records).map_err(|e| Error::io(&path, e))?;
            std::io::Write::flush(&mut w).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}
