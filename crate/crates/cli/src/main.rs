use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use komwu::efg::SequenceFormGame;
use komwu::harness::{
    bench, oracle_check, parse_domain, run_cols, Algorithm, GameSpec, RunConfig, Schedule,
    CHECK_TOLERANCE,
};
use komwu::oracle::EnumerateVertices;

#[derive(Parser)]
#[command(name = "komwu", version, about = "Kernelized OMWU self-play and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Self-play on a game and write the regret/exploitability series as CSV.
    Run(RunArgs),
    /// Write a game tree as JSON.
    Gen {
        /// kuhn:p=P,r=R | leduc:p=P,r=R,s=S,bets=B | pennies | nfg:p=P,a=A | json:PATH
        #[arg(long)]
        game: GameSpec,
        /// Seed for randomly generated games.
        #[arg(long, default_value_t = 0, env = "KOMWU_SEED")]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare KOMWU against explicit OMWU over the vertices of a domain.
    Check {
        /// e.g. nset:d=6,n=3 | cube:d=5 | dag | dag:edges=0-1/1-2/0-2 |
        /// kuhn:player=1 | tree:seed=3 | simplex:n=4, joined by `*` for products
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 100)]
        iters: u64,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = 0, env = "KOMWU_SEED")]
        seed: u64,
    },
    /// Per-iteration KOMWU time across deck sizes.
    Bench {
        /// kuhn or leduc, optionally with parameters other than r
        #[arg(long, default_value = "kuhn")]
        game: GameSpec,
        #[arg(long, value_delimiter = ',', default_value = "3,6,12,24")]
        ranks: Vec<usize>,
        #[arg(long, default_value_t = 2000)]
        iters: u64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    game: GameSpec,
    /// One algorithm for all players or a comma-separated list, one per player.
    #[arg(long, value_delimiter = ',', default_value = "komwu")]
    algo: Vec<Algorithm>,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// constant | inv-sqrt
    #[arg(long, default_value = "constant")]
    schedule: Schedule,
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    #[arg(long, default_value_t = 10)]
    stride: u64,
    #[arg(long, default_value_t = 0, env = "KOMWU_SEED")]
    seed: u64,
    /// Rescale payoffs to [0, 1] before learning.
    #[arg(long)]
    normalize: bool,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(args: RunArgs) -> Result<()> {
    let config = RunConfig {
        game: args.game,
        algorithms: args.algo,
        eta: args.eta,
        schedule: args.schedule,
        iterations: args.iters,
        stride: args.stride,
        seed: args.seed,
        normalize: args.normalize,
        keep_iterates: false,
    };
    let record = run_cols(&config)?;
    let mut out = output(args.out.as_ref())?;
    record.write_csv(&mut out)?;
    out.flush()?;
    let last = record.final_row();
    eprintln!(
        "{} iterations in {:.2}s, max regret {:.6}{}",
        last.t,
        record.total_seconds,
        last.max_regret,
        last.expl_avg
            .map(|e| format!(", exploitability of average {e:.6}"))
            .unwrap_or_default()
    );
    Ok(())
}

fn gen(game: GameSpec, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let tree = game.build(seed)?;
    let sf = SequenceFormGame::new(&tree)?;
    let mut w = output(out.as_ref())?;
    writeln!(w, "{}", tree.to_json())?;
    w.flush()?;
    let sizes: Vec<String> = sf
        .tfsdps()
        .iter()
        .map(|t| t.num_sequences().to_string())
        .collect();
    eprintln!(
        "{} nodes, {} infosets, sequences per player: {}",
        tree.nodes.len(),
        tree.infosets.len(),
        sizes.join(" ")
    );
    Ok(())
}

fn check(domain: &str, iters: u64, eta: f64, seed: u64) -> Result<bool> {
    let parsed = parse_domain(domain)?;
    let count = parsed.vertex_count();
    let report = oracle_check(&parsed, iters, eta, seed)?;
    println!(
        "{domain}: d={} vertices={count} iterations={} max deviation {:.3e} ({})",
        report.dim,
        report.iterations,
        report.max_deviation,
        if report.passed() { "ok" } else { "FAILED" }
    );
    if !report.passed() {
        eprintln!("deviation exceeds {CHECK_TOLERANCE:e}");
    }
    Ok(report.passed())
}

fn bench_cmd(game: GameSpec, ranks: &[usize], iters: u64, repeats: usize) -> Result<()> {
    let report = bench(&game, ranks, iters, repeats)?;
    println!("ranks  sequences  learner_us  iteration_us");
    for row in &report.rows {
        println!(
            "{:>5}  {:>9}  {:>10.3}  {:>12.3}",
            row.ranks, row.sequences, row.learner_us, row.iteration_us
        );
    }
    println!(
        "learner time ~ {:.5} us/sequence + {:.3} us, max residual {:.1}% of fit",
        report.fit.slope,
        report.fit.intercept,
        100.0 * report.max_residual_ratio
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args).map(|_| true),
        Command::Gen { game, seed, out } => gen(game, seed, out).map(|_| true),
        Command::Check {
            domain,
            iters,
            eta,
            seed,
        } => check(&domain, iters, eta, seed),
        Command::Bench {
            game,
            ranks,
            iters,
            repeats,
        } => bench_cmd(game, &ranks, iters, repeats).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
