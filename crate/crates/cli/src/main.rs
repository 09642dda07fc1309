use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use conquer::depparse::{gold_annotator, write_dp_trace, CnqrDp, SyntheticTreebank, TreebankSpec};
use conquer::experiment::{self, Algorithm, ExperimentConfig};
use conquer::text::{self, SyntheticCorpus};
use conquer::{rng, Execution, MatrixKind};

#[derive(Parser)]
#[command(name = "conquer", version, about = "Contextual dueling-bandit simulator")]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grid-tune every selected algorithm on the dev rounds.
    Tune(ExpArgs),
    /// Tune, train one pass, evaluate on test, and write reports.
    Run(ExpArgs),
    /// Rebuild the summary and win matrix from a trials file.
    Report {
        /// Directory holding `trials.csv` (reports are written next to it).
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Featurize reviews and write the sparse feature format.
    DumpFeatures(DumpArgs),
    /// Learn a parser from single-edge queries on a synthetic treebank.
    ParseDemo(ParseArgs),
}

#[derive(Args)]
struct ExpArgs {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated algorithms (ttg, gnr, gnu, gnc, confidit, banditron).
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated η grid.
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_parser = ["full", "diag"])]
    matrix: Option<String>,
    /// Enable the Bregman projection step.
    #[arg(long)]
    project: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl ExpArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if !self.algo.is_empty() {
            cfg.algorithms = self
                .algo
                .iter()
                .map(|a| a.parse::<Algorithm>())
                .collect::<Result<_, _>>()?;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if !self.eta.is_empty() {
            cfg.eta_grid = self.eta.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.reps {
            cfg.repetitions = r;
        }
        if let Some(m) = &self.matrix {
            cfg.matrix = m.parse::<MatrixKind>()?;
        }
        if self.project {
            cfg.project = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct DumpArgs {
    /// Review TSV; a synthetic corpus is generated when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Hash dimension (power of two).
    #[arg(long, default_value_t = text::DEFAULT_HASH_DIM)]
    dim: usize,
    /// Seed for the synthetic corpus.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the reviews back out as TSV.
    #[arg(long)]
    reviews_out: Option<PathBuf>,
    /// Feature file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParseArgs {
    #[arg(long, default_value_t = 2000)]
    sentences: usize,
    #[arg(long, default_value_t = 5)]
    words: usize,
    #[arg(long, default_value_t = 128)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = ["full", "diag"], default_value = "full")]
    matrix: String,
    /// Write the per-round trace CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn tune(args: &ExpArgs, exec: Execution) -> Result<()> {
    let cfg = args.config()?;
    let results = experiment::tune_all(&cfg, exec)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let path = args.out.join(experiment::TUNING_FILE);
    experiment::write_tuning_csv(&path, &results)?;
    for r in &results {
        let err = r
            .grid
            .iter()
            .find(|(h, _)| *h == r.best)
            .map(|(_, e)| *e)
            .unwrap_or(f64::NAN);
        println!("{:<10} {}  dev_error={err:.4}", r.algorithm.name(), r.best);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn run(args: &ExpArgs, exec: Execution) -> Result<()> {
    let cfg = args.config()?;
    let out = experiment::run_experiment(&cfg, exec)?;
    experiment::write_outputs(&args.out, &cfg, &out)?;
    print_summary(&experiment::summarize(&out.trials));
    println!("wrote reports to {}", args.out.display());
    Ok(())
}

fn print_summary(rows: &[experiment::SummaryRow]) {
    println!(
        "{:<10} {:>3} {:>10} {:>10} {:>10} {:>9}",
        "algorithm", "K", "mean_error", "p95_low", "p95_high", "skip_rate"
    );
    for r in rows {
        println!(
            "{:<10} {:>3} {:>10.4} {:>10.4} {:>10.4} {:>8.2}%",
            r.algorithm,
            r.k,
            r.mean_error,
            r.p95_low,
            r.p95_high,
            100.0 * r.skip_rate
        );
    }
}

fn report(dir: &Path) -> Result<()> {
    let trials_path = dir.join(experiment::TRIALS_FILE);
    let file = fs::File::open(&trials_path).with_context(|| format!("opening {}", trials_path.display()))?;
    let trials = experiment::read_trials_csv(file)?;
    if trials.is_empty() {
        bail!("{} has no trials", trials_path.display());
    }
    let rows = experiment::summarize(&trials);
    experiment::write_summary_csv(create(&dir.join(experiment::SUMMARY_FILE))?, &rows)?;
    print_summary(&rows);
    if rows.len() >= 2 {
        let m = experiment::one_vs_one_matrix(&trials)?;
        experiment::write_win_matrix_csv(create(&dir.join(experiment::WIN_MATRIX_FILE))?, &m)?;
        println!();
        print!("{:<10}", "");
        for a in &m.algorithms {
            print!(" {a:>10}");
        }
        println!();
        for (i, a) in m.algorithms.iter().enumerate() {
            print!("{a:<10}");
            for w in &m.wins[i] {
                print!(" {w:>10}");
            }
            println!();
        }
    }
    Ok(())
}

fn dump_features(args: &DumpArgs, exec: Execution) -> Result<()> {
    let reviews = match &args.input {
        Some(p) => text::load_reviews(p)?,
        None => SyntheticCorpus {
            seed: args.seed,
            ..Default::default()
        }
        .generate()?,
    };
    if let Some(p) = &args.reviews_out {
        text::save_reviews(p, &reviews)?;
    }
    let docs = text::featurize(&reviews, args.dim, exec)?;
    if docs.len() < reviews.len() {
        log::warn!("{} reviews had no tokens and were dropped", reviews.len() - docs.len());
    }
    match &args.out {
        Some(p) => text::save_documents(p, args.dim, &docs)?,
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            text::write_documents(&mut w, args.dim, &docs)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn parse_demo(args: &ParseArgs) -> Result<()> {
    let mut bank = SyntheticTreebank::new(&TreebankSpec {
        words: args.words,
        dim: args.dim,
        seed: args.seed,
    })?;
    let mut learner = CnqrDp::new(args.matrix.parse()?, args.dim, args.eta)?;
    let mut feedback_rng = rng::stream(args.seed, &[rng::label("parse-demo")]);
    let mut records = Vec::with_capacity(args.sentences);
    for _ in 0..args.sentences {
        let sentence = bank.next_sentence()?;
        let gold = sentence
            .gold()
            .cloned()
            .context("synthetic sentences carry gold trees")?;
        let (_, record) = learner.play(&sentence, |q, r| Ok(gold_annotator(&gold, q, r)), &mut feedback_rng)?;
        records.push(record);
    }
    let window = (args.sentences / 10).max(1);
    let mean_acc =
        |rs: &[conquer::depparse::DpRecord]| rs.iter().filter_map(|r| r.accuracy).sum::<f64>() / rs.len().max(1) as f64;
    let queried = records.iter().filter(|r| r.query.is_some()).count();
    println!("sentences: {}  queries: {queried}", records.len());
    println!(
        "edge accuracy, first {window}: {:.3}",
        mean_acc(&records[..window.min(records.len())])
    );
    println!(
        "edge accuracy, last {window}:  {:.3}",
        mean_acc(&records[records.len().saturating_sub(window)..])
    );
    if let Some(p) = &args.out {
        let mut w = create(p)?;
        write_dp_trace(&mut w, &records)?;
        w.flush()?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Tune(a) => tune(a, exec),
        Command::Run(a) => run(a, exec),
        Command::Report { out } => report(out),
        Command::DumpFeatures(a) => dump_features(a, exec),
        Command::ParseDemo(a) => parse_demo(a),
    }
}
