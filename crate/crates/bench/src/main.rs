use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rklmpc_bench::config::{parse_solver, FileConfig};
use rklmpc_bench::output::{self, boxplot_script, output_dir, write_file};
use rklmpc_bench::{ablation_sweep, normalize_scores, run_experiment, summarize, SweepSpec};

#[derive(Parser)]
#[command(
    name = "bench",
    about = "Seeded closed-loop benchmarks for the sampling-based MPC solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one environment over every seed.
    Run(Common),
    /// Run several solvers on the same task and normalise their scores.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated solver names.
        #[arg(long, value_delimiter = ',', default_value = "forward,reverse,reject,accel")]
        solvers: Vec<String>,
    },
    /// Repeat a run for each value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// kappa, gamma, beta or alpha.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with [experiment], [solver] and [weights] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $BENCH_OUTPUT_DIR, then the config file).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    /// simple, complex or robot.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    episode_length: Option<usize>,
    /// Run a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run this many consecutive seeds, starting at --seed or 0.
    #[arg(long)]
    seeds: Option<u64>,
    /// Rollout threads (0: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    oversample: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    /// cem or mppi.
    #[arg(long)]
    backend: Option<String>,
    /// Negative disables the deadline.
    #[arg(long, allow_hyphen_values = true)]
    deadline_ms: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl Common {
    fn file_config(&self) -> Result<FileConfig, Box<dyn std::error::Error>> {
        let base = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut over = FileConfig::default();
        let e = &mut over.experiment;
        e.env = self.env.clone();
        e.solver = self.solver.clone();
        e.preset = self.preset.clone();
        e.episode_length = self.episode_length;
        e.threads = self.threads;
        match (self.seed, self.seeds) {
            (start, Some(count)) => {
                let start = start.unwrap_or(0);
                e.seeds = Some((start..start + count).collect());
            }
            (Some(seed), None) => e.seeds = Some(vec![seed]),
            (None, None) => {}
        }
        let s = &mut over.solver;
        s.horizon = self.horizon;
        s.candidates = self.candidates;
        s.oversample = self.oversample;
        s.alpha = self.alpha;
        s.gamma = self.gamma;
        s.eta = self.eta;
        s.kappa = self.kappa;
        s.deadline_ms = self.deadline_ms;
        s.max_iterations = self.max_iterations;
        let w = &mut over.weights;
        w.backend = self.backend.clone();
        w.lambda = self.lambda;
        w.temperature = self.temperature;
        w.beta = self.beta;
        Ok(base.merge(over))
    }
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.file_config()?.resolve()?;
            let dir = output_dir(common.output.as_deref(), cfg.output.as_deref());
            let records = run_experiment(&cfg)?;
            let stem = format!("{}_{}", cfg.env, cfg.solver.kind);
            report(&output::write_run(&dir, &stem, &records)?);
            let totals: Vec<f64> = records.iter().map(|r| r.total_reward).collect();
            let s = summarize(&totals);
            println!(
                "{stem}: total reward {:.4} ± {:.4} over {} seeds",
                s.mean, s.std, s.count
            );
        }
        Command::Compare { common, solvers } => {
            let file = common.file_config()?;
            let first = file.resolve()?;
            let dir = output_dir(common.output.as_deref(), first.output.as_deref());
            let mut totals = Vec::new();
            for name in &solvers {
                let kind = parse_solver(name)?;
                let mut f = file.clone();
                f.experiment.solver = Some(kind.to_string());
                let cfg = f.resolve()?;
                let records = run_experiment(&cfg)?;
                report(&output::write_run(&dir, &format!("{}_{}", cfg.env, kind), &records)?);
                totals.push((
                    kind.to_string(),
                    records.iter().map(|r| r.total_reward).collect::<Vec<_>>(),
                ));
            }
            let scores = normalize_scores(&totals);
            if scores.degenerate {
                eprintln!("warning: every total is equal; scores set to 0.5");
            }
            let rows: Vec<_> = scores.groups.iter().map(|(n, v)| (n.clone(), summarize(v))).collect();
            let stem = format!("{}_compare", first.env);
            let mut summary = Vec::new();
            output::write_summary(&mut summary, &rows)?;
            let mut data = Vec::new();
            output::write_boxplot_data(&mut data, &scores.groups)?;
            let data_name = format!("{stem}.dat");
            report(&[
                write_file(&dir, &format!("{stem}.csv"), &summary)?,
                write_file(&dir, &data_name, &data)?,
                write_file(
                    &dir,
                    &format!("{stem}.gp"),
                    boxplot_script(&data_name, &first.env, "normalized score").as_bytes(),
                )?,
            ]);
            println!("{:<10} {:>8} {:>8}", "method", "mean", "std");
            for (name, s) in &rows {
                println!("{name:<10} {:>8.3} {:>8.3}", s.mean, s.std);
            }
        }
        Command::Sweep { common, param, values } => {
            let cfg = common.file_config()?.resolve()?;
            let dir = output_dir(common.output.as_deref(), cfg.output.as_deref());
            let spec = SweepSpec {
                parameter: param.parse()?,
                values,
            };
            let table = ablation_sweep(&cfg, &spec)?;
            let stem = format!("{}_{}_sweep_{}", cfg.env, cfg.solver.kind, spec.parameter);
            let mut buf = Vec::new();
            output::write_sweep(&mut buf, &table)?;
            let groups: Vec<_> = table
                .points
                .iter()
                .map(|p| {
                    (
                        format!("{}={}", spec.parameter, p.value),
                        p.records.iter().map(|r| r.total_reward).collect(),
                    )
                })
                .collect();
            let mut data = Vec::new();
            output::write_boxplot_data(&mut data, &groups)?;
            let data_name = format!("{stem}.dat");
            report(&[
                write_file(&dir, &format!("{stem}.csv"), &buf)?,
                write_file(&dir, &data_name, &data)?,
                write_file(
                    &dir,
                    &format!("{stem}.gp"),
                    boxplot_script(&data_name, &stem, "total reward").as_bytes(),
                )?,
            ]);
            for p in &table.points {
                println!(
                    "{}={:<10} total {:.4} ± {:.4} (negative updates {})",
                    spec.parameter, p.value, p.totals.mean, p.totals.std, p.negative_updates
                );
                if p.negative_updates == 0 {
                    println!("  bad-candidate cluster was empty at every iteration");
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
