use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use hetnet::book::{
    dnn_embedding, embedding_to_json, exact_thickness, greedy_embed, parse_embedding_json, render_embedding_svg,
    BookEmbedding, DnnMode, SpineOrder,
};
use hetnet::ccn::{build_pn, build_q, minimal_synchrony};
use hetnet::dynamics::{verify_all, Grade, RealizationReport, VerifySettings};
use hetnet::graph::{export_dot, parse_hetnet_with, samples, HetNet};
use hetnet::report::{render_summary, trajectory_plots, write_files};
use hetnet::synth::{realize_almost_complete, realize_book, Realization, RealizationConfig};
use hetnet::{Error, Result};

#[derive(Parser)]
#[command(name = "hetnet", version, about = "Realize heteroclinic networks in coupled cell systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Exact,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Book,
    AlmostComplete,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    DnnIncoming,
    DnnOutgoing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    #[value(alias = "Pn", alias = "PN")]
    Pn,
    #[value(alias = "Q")]
    Q,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a constrained book embedding of a network.
    Embed {
        /// Network JSON file; not needed with --generator.
        graph: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "exact")]
        solver: Solver,
        #[arg(long, default_value_t = 8)]
        pages_max: usize,
        /// Use a fixed double-next-neighbour layout instead of a solver.
        #[arg(long, value_enum)]
        generator: Option<Generator>,
        /// Node count of the generated network.
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long)]
        allow_weak: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build a coupled cell network P_n or Q(n1, n2).
    Network {
        #[arg(value_enum, ignore_case = true)]
        family: Family,
        params: Vec<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Realize a network, verify it and write a report with plots.
    Realize {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "book")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "exact")]
        solver: Solver,
        #[arg(long, default_value_t = 8)]
        pages_max: usize,
        /// Embedding JSON to use instead of running a solver.
        #[arg(long)]
        embedding: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long)]
        allow_weak: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-run verification on a realization dump.
    Verify {
        realization: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

const SOLVER_TIME_LIMIT: Duration = Duration::from_secs(60);

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidParam(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path, allow_weak: bool) -> Result<HetNet> {
    parse_hetnet_with(&read(path)?, allow_weak)
}

fn solve(net: &HetNet, solver: Solver, pages_max: usize) -> Result<BookEmbedding> {
    let emb = match solver {
        Solver::Exact => match exact_thickness(net, pages_max, SOLVER_TIME_LIMIT) {
            Ok(t) => t.embedding,
            Err(Error::SizeGuard(m)) => return Err(Error::SolverLimit(m)),
            Err(e) => return Err(e),
        },
        Solver::Greedy => greedy_embed(net, &SpineOrder::identity(net.num_nodes())),
    };
    if emb.pages > pages_max {
        return Err(Error::SolverLimit(format!("embedding needs {} pages, limit is {pages_max}", emb.pages)));
    }
    Ok(emb)
}

fn text_file(name: &str, text: String) -> (String, String) {
    (name.to_string(), text)
}

fn cmd_embed(
    graph: Option<PathBuf>,
    solver: Solver,
    pages_max: usize,
    generator: Option<Generator>,
    n: usize,
    allow_weak: bool,
    out: &Path,
) -> Result<()> {
    let (net, emb) = match (generator, graph) {
        (Some(g), _) => {
            let mode = match g {
                Generator::DnnIncoming => DnnMode::IncomingPairs,
                Generator::DnnOutgoing => DnnMode::OutgoingPairs,
            };
            (samples::dnn(n.max(4)), dnn_embedding(n, mode)?)
        }
        (None, Some(path)) => {
            let net = load_graph(&path, allow_weak)?;
            let emb = solve(&net, solver, pages_max)?;
            (net, emb)
        }
        (None, None) => return Err(Error::InvalidParam("give a network file or --generator".into())),
    };
    write_files(
        out,
        &[
            text_file("network.json", net.to_json()),
            text_file("network.dot", export_dot(&net)),
            text_file("embedding.json", embedding_to_json(&net, &emb)),
            text_file("embedding.svg", render_embedding_svg(&net, &emb)),
        ],
    )?;
    println!("pages={}, cells={}", emb.pages, emb.pages + 1);
    Ok(())
}

fn cmd_network(family: Family, params: &[usize], out: &Path) -> Result<()> {
    let ccn = match (family, params) {
        (Family::Pn, [n]) => build_pn(*n)?,
        (Family::Q, [n1, n2]) => build_q(*n1, *n2)?,
        (Family::Pn, _) => return Err(Error::InvalidParam("Pn takes one parameter n".into())),
        (Family::Q, _) => return Err(Error::InvalidParam("Q takes two parameters n1 n2".into())),
    };
    write_files(out, &[text_file("ccn.json", ccn.to_json()), text_file("ccn.dot", ccn.to_dot())])?;
    println!("cells={} types={}", ccn.cells, ccn.types);
    let subs = minimal_synchrony(&ccn)?;
    let names: Vec<String> = subs.iter().map(|s| s.to_string()).collect();
    println!("minimal synchrony subspaces: {}", if names.is_empty() { "none".into() } else { names.join(" ") });
    Ok(())
}

fn settings(seed: u64, perturb: f64, trials: usize) -> Result<VerifySettings> {
    if !(perturb >= 0.0 && perturb.is_finite()) {
        return Err(Error::InvalidParam("--perturb must be a non-negative number".into()));
    }
    Ok(VerifySettings { seed, perturb, trials, ..VerifySettings::default() })
}

fn verify_and_report(real: &Realization, s: &VerifySettings, out: &Path, dump: bool) -> Result<()> {
    let report = verify_all(real, s)?;
    let mut files = Vec::new();
    if dump {
        files.push(text_file("realization.json", real.to_json()));
    }
    files.push(text_file("report.json", report.to_json()));
    files.extend(trajectory_plots(real, s)?);
    write_files(out, &files)?;
    print!("{}", render_summary(real, &report));
    check(&report)
}

fn check(report: &RealizationReport) -> Result<()> {
    let failed = report.connections.len() - report.connections_passed();
    if failed > 0 {
        return Err(Error::Verification(format!("{failed} connection(s) failed")));
    }
    if let Some(r) = &report.robustness {
        if r.passed_trials < r.trials.len() {
            return Err(Error::Verification(format!(
                "{} of {} perturbed trials failed",
                r.trials.len() - r.passed_trials,
                r.trials.len()
            )));
        }
    }
    if report.grade == Grade::Partial {
        return Err(Error::Verification("realization graded partial".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed { graph, solver, pages_max, generator, n, allow_weak, out } => {
            cmd_embed(graph, solver, pages_max, generator, n, allow_weak, &out)
        }
        Command::Network { family, params, out } => cmd_network(family, &params, &out),
        Command::Realize { graph, mode, solver, pages_max, embedding, seed, perturb, trials, allow_weak, out } => {
            let net = load_graph(&graph, allow_weak)?;
            let s = settings(seed, perturb, trials)?;
            let cfg = RealizationConfig { seed, ..RealizationConfig::default() };
            let real = match mode {
                Mode::Book => {
                    let emb = match embedding {
                        Some(p) => parse_embedding_json(&net, &read(&p)?)?,
                        None => solve(&net, solver, pages_max)?,
                    };
                    realize_book(&net, &emb, &cfg)?
                }
                Mode::AlmostComplete => realize_almost_complete(&net, &cfg)?,
            };
            verify_and_report(&real, &s, &out, true)
        }
        Command::Verify { realization, seed, perturb, trials, out } => {
            let real = Realization::from_json(&read(&realization)?)?;
            let s = settings(seed, perturb, trials)?;
            verify_and_report(&real, &s, &out, false)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
