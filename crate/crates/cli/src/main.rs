//! `qedgraph` command-line interface.
//!
//! Exit codes: 0 on success, 1 on domain errors (parity, infeasible data,
//! vertex condition violated, integral domain), 2 on usage and parse errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qedgraph::counting::{classify_divergence, solve_direct, solve_inverse, CountingError};
use qedgraph::diagram::{check_main_condition_with, Diagram, Strictness};
use qedgraph::dsl::{parse, serialize, summary_document};
use qedgraph::enumeration::{enumerate, DirectionMode, EnumerationError, EnumerationRequest};
use qedgraph::integral::{
    closed_form, divergence_scan, format_sig12, integrate, scan_csv, FourVector, IntegralError,
    IntegralSpec, Method,
};
use qedgraph::topology::TopologyError;
use qedgraph::ExternalData;
use qedgraph::InternalData;

#[derive(Parser)]
#[command(
    name = "qedgraph",
    version,
    about = "Electron-photon diagram topology and divergence checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a diagram file and check the vertex condition.
    Validate { file: PathBuf },
    /// Print the invariants of a diagram file.
    Summary {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Superficial divergence from external legs and loop count.
    Classify {
        #[arg(long)]
        ne: u64,
        #[arg(long)]
        np: u64,
        #[arg(long, default_value_t = 1)]
        m: u64,
    },
    /// Recover line counts from internal or external data.
    Solve {
        #[command(subcommand)]
        problem: Problem,
    },
    /// Generate diagrams satisfying the vertex condition.
    Enumerate(EnumerateArgs),
    /// Estimate the one-loop cutoff integral.
    Integrate(IntegrateArgs),
    /// Estimate the integral over a list of cutoffs and print CSV.
    Scan(ScanArgs),
}

#[derive(Subcommand)]
enum Problem {
    /// From internal electron and photon lines.
    Direct {
        #[arg(long)]
        fe: u64,
        #[arg(long)]
        fp: u64,
    },
    /// From external electron and photon legs.
    Inverse {
        #[arg(long)]
        ne: u64,
        #[arg(long)]
        np: u64,
    },
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, requires = "np")]
    ne: Option<u64>,
    #[arg(long, requires = "ne")]
    np: Option<u64>,
    #[arg(long)]
    connected: bool,
    #[arg(long)]
    irreducible: bool,
    /// Keep one diagram per isomorphism class.
    #[arg(long)]
    dedupe: bool,
    #[arg(long)]
    limit: Option<usize>,
    /// Every in/out assignment of external legs instead of the normalized one.
    #[arg(long)]
    all_directions: bool,
    /// Print summaries as a JSON array instead of diagram sources.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mc,
    Quad,
}

#[derive(Args)]
struct IntegralArgs {
    /// Components of q, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    q: Vec<f64>,
    #[arg(long)]
    ell: f64,
    #[arg(long, default_value_t = 1)]
    mu: usize,
    #[arg(long, value_enum, default_value = "quad")]
    method: MethodArg,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample the ball uniformly instead of by radial shells.
    #[arg(long)]
    uniform: bool,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    common: IntegralArgs,
    #[arg(long = "L")]
    cutoff: f64,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: IntegralArgs,
    #[arg(long = "L-list", value_delimiter = ',', required = true)]
    cutoffs: Vec<f64>,
}

enum Failure {
    Domain(String),
    Usage(String),
}

impl From<CountingError> for Failure {
    fn from(e: CountingError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<TopologyError> for Failure {
    fn from(e: TopologyError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<EnumerationError> for Failure {
    fn from(e: EnumerationError) -> Self {
        match e {
            EnumerationError::Counting(_) | EnumerationError::VertexMismatch { .. } => {
                Failure::Domain(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<IntegralError> for Failure {
    fn from(e: IntegralError) -> Self {
        match e {
            IntegralError::Domain(_) => Failure::Domain(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn load(path: &PathBuf) -> Result<Diagram, Failure> {
    let source = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse(&source).map_err(|e| Failure::Usage(format!("{}:{e}", path.display())))
}

impl IntegralArgs {
    fn spec(&self, cutoff: f64) -> Result<IntegralSpec, Failure> {
        let q: [f64; 4] = self.q.as_slice().try_into().map_err(|_| {
            Failure::Usage(format!("--q needs four components, got {}", self.q.len()))
        })?;
        let method = match (self.method, self.uniform) {
            (MethodArg::Quad, _) => Method::quadrature(),
            (MethodArg::Mc, false) => Method::monte_carlo(self.samples),
            (MethodArg::Mc, true) => Method::uniform_monte_carlo(self.samples),
        };
        Ok(
            IntegralSpec::new(FourVector(q), self.ell, cutoff, self.mu, method)
                .with_seed(self.seed),
        )
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { file } => {
            let d = load(&file)?;
            let report = check_main_condition_with(&d, Strictness::Strict);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if !report.main_condition {
                for v in &report.violations {
                    eprintln!(
                        "vertex {}: {} (expected 2 electron, 1 photon; 2 internal, 1 external)",
                        v.vertex, v.reason
                    );
                }
                return Err(Failure::Domain(format!(
                    "main condition violated at {} of {} vertices",
                    report.violations.len(),
                    d.vertex_count()
                )));
            }
            println!(
                "ok: {} vertices satisfy the main condition",
                d.vertex_count()
            );
        }
        Command::Summary { file, json } => {
            let doc = summary_document(&load(&file)?)?;
            if json {
                print!("{}", doc.to_json());
            } else {
                println!(
                    "n={} C={} Q={} Ne={} Np={} Fe={} Fp={} F={} m={} K={}",
                    doc.n,
                    doc.components,
                    doc.contact_points,
                    doc.external_electrons,
                    doc.external_photons,
                    doc.internal_electrons,
                    doc.internal_photons,
                    doc.internal_lines,
                    doc.m,
                    doc.power_counter
                );
                println!(
                    "irreducible={} physical={} degenerate={}",
                    doc.irreducible, doc.physical, doc.degenerate
                );
                println!("contact points: {}", doc.contact_points_list.join(" "));
            }
        }
        Command::Classify { ne, np, m } => {
            println!("{}", classify_divergence(ne, np, m)?);
        }
        Command::Solve { problem } => match problem {
            Problem::Direct { fe, fp } => {
                let r = solve_direct(InternalData::new(fe, fp))?;
                println!(
                    "Q={} n={} Ne={} Np={}",
                    r.contact_points, r.vertices, r.external.electrons, r.external.photons
                );
            }
            Problem::Inverse { ne, np } => {
                let r = solve_inverse(ExternalData::new(ne, np))?;
                println!(
                    "Q={} n={} Fp={} Fe={}",
                    r.contact_points, r.vertices, r.internal.photons, r.internal.electrons
                );
            }
        },
        Command::Enumerate(args) => {
            let mut req = match (args.ne, args.np) {
                (Some(ne), Some(np)) => EnumerationRequest {
                    vertices: args.n,
                    ..EnumerationRequest::external(ExternalData::new(ne, np))
                },
                _ => match args.n {
                    Some(n) => EnumerationRequest::vertices(n),
                    None => return Err(Failure::Usage("give --n or both --ne and --np".into())),
                },
            };
            req.connected_only = args.connected;
            req.irreducible_only = args.irreducible;
            req.dedupe = args.dedupe;
            req.limit = args.limit;
            if args.all_directions {
                req.directions = DirectionMode::Exhaustive;
            }
            let diagrams = enumerate(&req)?;
            if args.json {
                let docs = diagrams
                    .iter()
                    .map(summary_document)
                    .collect::<Result<Vec<_>, _>>()?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&docs).expect("summaries serialize")
                );
            } else {
                for (k, d) in diagrams.iter().enumerate() {
                    if k > 0 {
                        println!();
                    }
                    println!("# diagram {}", k + 1);
                    print!("{}", serialize(d));
                }
                eprintln!("{} diagrams", diagrams.len());
            }
        }
        Command::Integrate(args) => {
            let spec = args.common.spec(args.cutoff)?;
            let estimate = integrate(&spec)?;
            let closed = closed_form(&spec)?;
            println!("estimate={}", format_sig12(estimate.value));
            println!("std_error={}", format_sig12(estimate.std_error));
            println!("closed_form={}", format_sig12(closed));
            println!("residual={}", format_sig12(estimate.value - closed));
            println!("samples={}", estimate.samples_used);
            println!("converged={}", estimate.converged);
        }
        Command::Scan(args) => {
            let first = args.cutoffs.first().copied().unwrap_or(1.0);
            let rows = divergence_scan(&args.common.spec(first)?, &args.cutoffs)?;
            print!("{}", scan_csv(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
