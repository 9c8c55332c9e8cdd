use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gapwalk::analysis::knee_report;
use gapwalk::io::{
    load_policy, load_topology, run_search, topology_to_json, FrontierKind, IoError, PolicyDocument, ReportContext,
    ResultDocument, SearchRequest, SAFETY_CAP_ENV,
};
use gapwalk::oracle::{enumerate_solutions, OracleConfig};
use gapwalk::scenarios::{generate_datacenter, generate_telco, DatacenterGenParams, TelcoGenParams};
use gapwalk::{estimate_state_bound, with_scenario, AccumulationState, SearchConfig, SearchError, TypedGraph};

#[derive(Parser)]
#[command(name = "gapwalk", version, about = "Policy-driven traversal search over incomplete network graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a topology (and optionally a policy) loads cleanly.
    Validate {
        topology: PathBuf,
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Find every admissible traversal from a node.
    Search(SearchArgs),
    /// Run the policy's budget sweep and print connectivity as CSV.
    Sweep {
        topology: PathBuf,
        policy: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Default safety cap per search.
        #[arg(long, env = SAFETY_CAP_ENV)]
        safety_cap: Option<usize>,
    },
    /// Write a seeded synthetic topology.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Print the state-count bound (|E|/|N| + b)^L.
    Estimate {
        topology: PathBuf,
        #[arg(long)]
        max_domain: usize,
        #[arg(long)]
        depth: u32,
    },
    /// Brute-force enumeration, for checking search results on small graphs.
    #[command(hide = true)]
    OracleSearch {
        #[command(flatten)]
        search: SearchArgs,
        /// Run even above the advisory graph size.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args)]
struct SearchArgs {
    topology: PathBuf,
    policy: PathBuf,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: Option<String>,
    #[arg(long, value_enum)]
    frontier: Option<FrontierArg>,
    /// Report at most this many solutions; the search itself is unchanged.
    #[arg(long)]
    max_solutions: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cap on expanded states; also allows custom policies without a prune horizon.
    #[arg(long)]
    safety_cap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrontierArg {
    Fifo,
    Lifo,
    Priority,
    Beam,
}

impl From<FrontierArg> for FrontierKind {
    fn from(f: FrontierArg) -> Self {
        match f {
            FrontierArg::Fifo => FrontierKind::Fifo,
            FrontierArg::Lifo => FrontierKind::Lifo,
            FrontierArg::Priority => FrontierKind::Priority,
            FrontierArg::Beam => FrontierKind::Beam,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Optical sites on a ring, with undocumented patches.
    Telco {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long)]
        odfs_per_site: Option<usize>,
        #[arg(long)]
        amplifier_fraction: Option<f64>,
        #[arg(long)]
        extra_links: Option<usize>,
        #[arg(long)]
        documented_fraction: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rooms of rows of racks, with partial trunk documentation.
    Datacenter {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        rooms: Option<usize>,
        #[arg(long)]
        rows_per_room: Option<usize>,
        #[arg(long)]
        racks_per_row: Option<usize>,
        #[arg(long)]
        servers_per_rack: Option<usize>,
        #[arg(long)]
        trunk_fraction: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Invalid(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Cap(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Search(SearchError::SafetyCapExceeded { .. }) => Failure::Cap(e.to_string()),
            IoError::Analysis(ref a) if a.to_string().contains("safety cap") => Failure::Cap(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        IoError::Search(e).into()
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn topology(path: &Path) -> Result<Arc<TypedGraph>, Failure> {
    Ok(Arc::new(load_topology(path)?))
}

fn request(args: &SearchArgs) -> SearchRequest {
    let mut req = SearchRequest::new(args.from.as_str());
    req.to = args.to.as_deref().map(Into::into);
    req.frontier = args.frontier.map(Into::into);
    req.safety_cap = args.safety_cap;
    req.default_safety_cap = std::env::var(SAFETY_CAP_ENV).ok().and_then(|v| v.parse().ok());
    req
}

fn render(doc: &ResultDocument, format: Format) -> String {
    match format {
        Format::Json => doc.to_json() + "\n",
        Format::Csv => doc.to_csv(),
        Format::Table => doc.to_table(),
    }
}

fn report_empty(doc: &ResultDocument) {
    if let Some(m) = &doc.message {
        eprintln!("{m}");
    }
}

fn cmd_search(args: &SearchArgs) -> Result<(), Failure> {
    let g = topology(&args.topology)?;
    let policy = load_policy(&args.policy)?;
    let doc = run_search(g, &policy, &request(args), args.max_solutions)?;
    write_output(args.out.as_deref(), &render(&doc, args.format))?;
    report_empty(&doc);
    Ok(())
}

fn cmd_oracle(args: &SearchArgs, force: bool) -> Result<(), Failure> {
    let g = topology(&args.topology)?;
    let policy: PolicyDocument = load_policy(&args.policy)?;
    let search = policy.search_config(g, &request(args))?;
    let scenario = format!("{:?}", policy.scenario).to_lowercase();
    fn go<A: AccumulationState>(
        cfg: &SearchConfig<A>,
        force: bool,
        ctx: ReportContext<'_>,
    ) -> Result<ResultDocument, Failure> {
        let mut oc = OracleConfig::from_search(cfg);
        oc.force = force;
        let set = enumerate_solutions(&oc).map_err(|e| Failure::Invalid(e.to_string()))?;
        Ok(ResultDocument::build(cfg, &set, ctx))
    }
    let ctx = ReportContext {
        scenario: &scenario,
        to: args.to.as_deref().map(Into::into),
        dimensions: policy.dimension_names(),
        limits: policy.limits(),
        max_solutions: args.max_solutions,
    };
    let doc = with_scenario!(&search, cfg => go(cfg, force, ctx))?;
    write_output(args.out.as_deref(), &render(&doc, args.format))?;
    report_empty(&doc);
    Ok(())
}

fn cmd_sweep(topo: &Path, policy: &Path, out: Option<&Path>, cap: Option<usize>) -> Result<(), Failure> {
    let g = topology(topo)?;
    let policy = load_policy(policy)?;
    let result = policy.run_sweep(g, cap)?;
    write_output(out, &result.to_csv())?;
    if let Ok(knee) = knee_report(&result) {
        for p in knee {
            let gain = p.marginal_gain_f64.map_or("-".to_string(), |g| format!("{g:+.4}"));
            eprintln!("budget {:>8}  fraction {:.4}  gain {gain}", p.budget, *p.fraction.numer() as f64 / *p.fraction.denom() as f64);
        }
    }
    Ok(())
}

fn cmd_generate(kind: &GenerateKind) -> Result<(), Failure> {
    let (graph, out) = match kind {
        GenerateKind::Telco {
            seed,
            sites,
            odfs_per_site,
            amplifier_fraction,
            extra_links,
            documented_fraction,
            out,
        } => {
            let d = TelcoGenParams::default();
            let p = TelcoGenParams {
                seed: *seed,
                sites: sites.unwrap_or(d.sites),
                odfs_per_site: odfs_per_site.unwrap_or(d.odfs_per_site),
                amplifier_fraction: amplifier_fraction.unwrap_or(d.amplifier_fraction),
                extra_links: extra_links.unwrap_or(d.extra_links),
                documented_fraction: documented_fraction.unwrap_or(d.documented_fraction),
                ..d
            };
            (generate_telco(&p), out)
        }
        GenerateKind::Datacenter {
            seed,
            rooms,
            rows_per_room,
            racks_per_row,
            servers_per_rack,
            trunk_fraction,
            out,
        } => {
            let d = DatacenterGenParams::default();
            let p = DatacenterGenParams {
                seed: *seed,
                rooms: rooms.unwrap_or(d.rooms),
                rows_per_room: rows_per_room.unwrap_or(d.rows_per_room),
                racks_per_row: racks_per_row.unwrap_or(d.racks_per_row),
                servers_per_rack: servers_per_rack.unwrap_or(d.servers_per_rack),
                trunk_fraction: trunk_fraction.unwrap_or(d.trunk_fraction),
                ..d
            };
            (generate_datacenter(&p), out)
        }
    };
    let graph = graph.map_err(|e| Failure::Usage(e.to_string()))?;
    write_output(Some(out), &(topology_to_json(&graph) + "\n"))?;
    eprintln!("wrote {} nodes, {} edges to {}", graph.node_count(), graph.edge_count(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate { topology: t, policy } => {
            let g = topology(t)?;
            if let Some(p) = policy {
                load_policy(p)?;
            }
            println!("ok: {} nodes, {} edges", g.node_count(), g.edge_count());
            Ok(())
        }
        Command::Search(args) => cmd_search(args),
        Command::OracleSearch { search, force } => cmd_oracle(search, *force),
        Command::Sweep {
            topology: t,
            policy,
            out,
            safety_cap,
        } => cmd_sweep(t, policy, out.as_deref(), *safety_cap),
        Command::Generate { kind } => cmd_generate(kind),
        Command::Estimate {
            topology: t,
            max_domain,
            depth,
        } => {
            let g = topology(t)?;
            let bound = estimate_state_bound(&g, *max_domain, *depth).map_err(|e| Failure::Invalid(e.to_string()))?;
            println!("{bound}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
