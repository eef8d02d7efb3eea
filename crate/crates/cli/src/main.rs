use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nlbounds_core::doubling::{
    family, verify_family, FamilyDocument, FamilyVerdict, SetFamily, DEFAULT_MAX_FAMILY_PARTIES,
};
use nlbounds_core::graph::{build_graph, independence_number, is_vertex_transitive, ExclusivityGraph, GraphDocument};
use nlbounds_core::report::{bounds_report, consolidated_report, round_sig, Relation, ReportOptions, ReportRow, Skip};
use nlbounds_core::scenario::Event;
use nlbounds_core::sigma::build_sigma;
use nlbounds_core::theta::{lovasz_theta_with, ThetaMethod, ThetaOptions};
use nlbounds_core::Error;

#[derive(Parser, Debug)]
#[command(name = "nlbounds", version, about = "Bounds on the n-party Svetlichny expression")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    emit: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Print timings to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Args, Debug, Clone, Copy)]
struct PartyArg {
    /// Number of parties.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
    n: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Terms and support events of the expression.
    Scenario(PartyArg),
    /// Structural checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// The exclusive-set family for the doubled experiment.
    Family {
        #[command(flatten)]
        party: PartyArg,
        /// Allow more than the default number of parties.
        #[arg(long)]
        force: bool,
    },
    /// Exclusivity graphs.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Local, hybrid, quantum, theta and nonsignaling values.
    Bounds {
        #[command(flatten)]
        party: PartyArg,
        /// Comma-separated parts to skip: quantum, hybrid, ns, theta.
        #[arg(long, default_value = "")]
        skip: String,
    },
    /// Bounds, graph invariants and family verification in one document.
    Report {
        #[command(flatten)]
        party: PartyArg,
        #[arg(long, default_value = "")]
        skip: String,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Verify the exclusive-set family.
    Doubling {
        /// Number of parties; taken from the file when `--family` is given.
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
        n: Option<u32>,
        /// Allow more than the default number of parties.
        #[arg(long)]
        force: bool,
        /// Verify a family read from JSON instead of the built-in one.
        #[arg(long)]
        family: Option<PathBuf>,
        /// Also list every ancillary event compatible with each set.
        #[arg(long)]
        search_ancillary: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// Exclusivity graph of the support events.
    Build(PartyArg),
    /// Lovász number of a graph.
    Theta {
        /// Graph JSON with `vertices` and `edges`.
        #[arg(long, conflicts_with = "n", required_unless_present = "n")]
        input: Option<PathBuf>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
        n: Option<u32>,
        /// Use the complement graph.
        #[arg(long)]
        complement: bool,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Ipm,
    Admm,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Mismatch(anyhow::Error),
    Usage(anyhow::Error),
    Resource(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) | Failure::Other(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooFewParties(_) | Error::TooManyParties { .. } | Error::InvalidArgument(_) => {
                Failure::Usage(e.into())
            }
            Error::SizeLimit { .. } => Failure::Resource(e.into()),
            Error::FamilyInvalid(_) => Failure::Mismatch(e.into()),
            _ => Failure::Other(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

type Outcome = Result<bool, Failure>;

struct Output {
    emit: Option<PathBuf>,
    format: Format,
}

impl Output {
    fn write(&self, text: &str) -> Result<(), Failure> {
        match &self.emit {
            Some(path) => fs::write(path, text)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(Failure::Other),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.into()))?;
        text.push('\n');
        self.write(&text)
    }

    fn require(&self, allowed: &[Format]) -> Result<(), Failure> {
        if allowed.contains(&self.format) {
            Ok(())
        } else {
            Err(Failure::Usage(anyhow!(
                "format {:?} is not available for this command",
                self.format
            )))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(2);
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let out = Output {
        emit: cli.emit.clone(),
        format: cli.format,
    };
    let start = Instant::now();
    let result = run(&cli, &out);
    if cli.verbose {
        eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let (Failure::Mismatch(e) | Failure::Usage(e) | Failure::Resource(e) | Failure::Other(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli, out: &Output) -> Outcome {
    match &cli.command {
        Command::Scenario(p) => scenario(p.n as usize, out),
        Command::Verify(VerifyCommand::Doubling {
            n,
            force,
            family,
            search_ancillary,
        }) => verify(n.map(|n| n as usize), *force, family.as_ref(), *search_ancillary, out),
        Command::Family { party, force } => {
            out.require(&[Format::Json])?;
            let n = party.n as usize;
            gate(n, *force)?;
            out.json(&family(n)?.document())?;
            Ok(true)
        }
        Command::Graph(GraphCommand::Build(p)) => graph_build(p.n as usize, out),
        Command::Graph(GraphCommand::Theta {
            input,
            n,
            complement,
            method,
        }) => graph_theta(input.as_ref(), n.map(|n| n as usize), *complement, *method, cli.tol, out),
        Command::Bounds { party, skip } => {
            out.require(&[Format::Json, Format::Csv])?;
            let opts = ReportOptions {
                tol: cli.tol,
                skip: Skip::parse(skip)?,
            };
            let r = bounds_report(party.n as usize, &opts)?;
            match out.format {
                Format::Csv => out.write(&rows_csv(&r.rows))?,
                _ => out.json(&r)?,
            }
            Ok(r.all_match)
        }
        Command::Report { party, skip } => {
            out.require(&[Format::Json, Format::Csv])?;
            let opts = ReportOptions {
                tol: cli.tol,
                skip: Skip::parse(skip)?,
            };
            let r = consolidated_report(party.n as usize, &opts)?;
            match out.format {
                Format::Csv => out.write(&rows_csv(&r.rows))?,
                _ => out.json(&r)?,
            }
            Ok(r.all_match)
        }
    }
}

fn scenario(n: usize, out: &Output) -> Outcome {
    let sigma = build_sigma(n)?;
    match out.format {
        Format::Json => out.json(&sigma.document())?,
        Format::Csv => {
            let mut s = String::from("context,sign\n");
            for (t, d) in sigma.terms().iter().zip(sigma.document().terms) {
                let ctx: Vec<String> = d.context.iter().map(|b| b.to_string()).collect();
                let _ = writeln!(s, "{},{}", ctx.join(""), t.sign);
            }
            out.write(&s)?;
        }
        Format::Dot => out.write(&build_graph(sigma.support())?.to_dot())?,
    }
    Ok(true)
}

/// Bytes needed to build and verify the family for `n` parties.
fn memory_estimate(n: usize) -> u128 {
    let sets = 1u128 << (2 * n);
    let events = sets * 2 * (1u128 << (2 * (n - 1)));
    let bitset = (1u128 << (4 * n)) / 8;
    events * 16 + sets * 64 + bitset
}

fn gate(n: usize, force: bool) -> Result<(), Failure> {
    if n > DEFAULT_MAX_FAMILY_PARTIES && !force {
        let mib = memory_estimate(n) as f64 / (1u64 << 20) as f64;
        return Err(Failure::Resource(anyhow!(
            "the family for n = {n} needs about {mib:.0} MiB; pass --force to build it anyway"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    #[serde(flatten)]
    verdict: &'a FamilyVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    compatible_ancillaries: Option<Vec<Vec<String>>>,
}

fn verify(n: Option<usize>, force: bool, path: Option<&PathBuf>, search: bool, out: &Output) -> Outcome {
    out.require(&[Format::Json])?;
    let f: SetFamily = match path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Usage)?;
            let doc: FamilyDocument = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::Usage)?;
            if let Some(n) = n {
                if n != doc.n {
                    return Err(Failure::Usage(anyhow!("--n {n} disagrees with the file (n = {})", doc.n)));
                }
            }
            gate(doc.n, force)?;
            SetFamily::from_document(&doc).map_err(|e| Failure::Mismatch(e.into()))?
        }
        None => {
            let n = n.ok_or_else(|| Failure::Usage(anyhow!("--n or --family is required")))?;
            gate(n, force)?;
            family(n)?
        }
    };
    // Full precision: nine significant digits cannot meet a 1e-9 check on the bound.
    let verdict = verify_family(&f, &build_sigma(f.n())?)?;
    let compatible_ancillaries = search.then(|| {
        let scenario = f.scenario();
        f.sets()
            .iter()
            .map(|s| {
                s.compatible_ancillaries()
                    .into_iter()
                    .map(|a| Event::ancillary(scenario, a).expect("doubled scenario").token())
                    .collect()
            })
            .collect()
    });
    out.json(&VerifyOutput {
        verdict: &verdict,
        compatible_ancillaries,
    })?;
    if !verdict.passed() {
        eprintln!("failed checks: {}", verdict.failures.join(", "));
    }
    Ok(verdict.passed())
}

fn graph_build(n: usize, out: &Output) -> Outcome {
    out.require(&[Format::Json, Format::Dot])?;
    let g = build_graph(build_sigma(n)?.support())?;
    match out.format {
        Format::Dot => out.write(&g.to_dot())?,
        _ => {
            let mut doc = g.document();
            doc.alpha = independence_number(&g).value();
            doc.vertex_transitive = is_vertex_transitive(&g).ok();
            out.json(&doc)?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct ThetaOutput {
    vertices: usize,
    edges: usize,
    theta: f64,
    primal_value: f64,
    dual_value: f64,
    duality_gap: f64,
    iterations: usize,
    method: ThetaMethod,
}

fn graph_theta(
    input: Option<&PathBuf>,
    n: Option<usize>,
    complement: bool,
    method: MethodArg,
    tol: f64,
    out: &Output,
) -> Outcome {
    out.require(&[Format::Json])?;
    let g = match (input, n) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Usage)?;
            let doc: GraphDocument = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::Usage)?;
            ExclusivityGraph::from_document(&doc).map_err(|e| Failure::Usage(e.into()))?
        }
        (None, Some(n)) => build_graph(build_sigma(n)?.support())?,
        (None, None) => return Err(Failure::Usage(anyhow!("--input or --n is required"))),
    };
    let g = if complement { g.complement() } else { g };
    let opts = ThetaOptions {
        tol,
        method: match method {
            MethodArg::Auto => ThetaMethod::Auto,
            MethodArg::Ipm => ThetaMethod::InteriorPoint,
            MethodArg::Admm => ThetaMethod::Admm,
        },
        ..ThetaOptions::default()
    };
    let r = lovasz_theta_with::<f64>(&g, &opts)?;
    out.json(&ThetaOutput {
        vertices: g.order(),
        edges: g.edge_count(),
        theta: round_sig(r.value),
        primal_value: round_sig(r.primal_value),
        dual_value: round_sig(r.dual_value),
        duality_gap: round_sig(r.duality_gap),
        iterations: r.iterations,
        method: r.method,
    })?;
    Ok(true)
}

fn rows_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from("name,computed,relation,expected,tolerance,matches\n");
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.name,
            opt(r.computed.map(|c| c.to_string())),
            match r.relation {
                Relation::Equal => "eq",
                Relation::AtMost => "le",
            },
            r.expected,
            r.tolerance,
            opt(r.matches.map(|m| m.to_string())),
        );
    }
    s
}
