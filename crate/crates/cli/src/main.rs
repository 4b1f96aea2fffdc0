use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwalk::depth::{build_depth_chain, transitive_overlaps, DepthRecord};
use qwalk::graph::{load_edge_list, Family, Graph};
use qwalk::pipelines::{replay, verify_graph, BipartiteSearch, VerifyConfig, WalkContext};
use qwalk::report::{sig12, write_report, Format};
use qwalk::schedule::{dagger, Schedule};
use qwalk::spectral::{eigendecompose, validate_integer_spectrum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Alternating quantum walks on integral graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and print it.
    Graph {
        #[command(flatten)]
        source: GraphSource,
        /// Print an edge list instead of JSON.
        #[arg(long)]
        edge_list: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Laplacian spectrum with the integer check.
    Spectrum {
        #[command(flatten)]
        source: GraphSource,
        /// Also write eigenvectors as CSV.
        #[arg(long, value_name = "PATH")]
        eigenvectors: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Depth chain of the Laplacian spectrum.
    Depth {
        #[command(flatten)]
        source: GraphSource,
        /// Also report the overlaps of this vertex.
        #[arg(long)]
        marked: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Synthesize a schedule and write it as JSON.
    Schedule {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_enum)]
        task: ScheduleTask,
        /// Marked vertex: synthesis input for sample and promise-search,
        /// simulation binding for the fidelity check otherwise (default 0).
        #[arg(long)]
        marked: Option<usize>,
        /// Bipartite branch.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        branch: u8,
        #[command(flatten)]
        out: Output,
    },
    /// Run a task end to end and report.
    Run {
        /// Task to run; omit with --schedule.
        #[arg(value_enum, required_unless_present = "schedule")]
        task: Option<RunTask>,
        #[command(flatten)]
        source: GraphSource,
        /// Replay a schedule file written by `schedule`.
        #[arg(long, value_name = "PATH", conflicts_with = "task")]
        schedule: Option<PathBuf>,
        #[arg(long)]
        marked: Option<usize>,
        /// Start vertex for sample and transfer.
        #[arg(long = "source")]
        from: Option<usize>,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        format: OutFormat,
        #[command(flatten)]
        out: Output,
    },
    /// Run every pipeline over the graph and aggregate.
    Verify {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = qwalk::pipelines::DEFAULT_VERIFY_CAP)]
        cap: usize,
        /// Ordered transfer pairs to sample.
        #[arg(long, default_value_t = 64)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        format: OutFormat,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct GraphSource {
    /// johnson, kneser, hamming, rook, complete-square, complete-bipartite or cycle<k>.
    #[arg(long, required_unless_present = "edges", conflicts_with = "edges")]
    family: Option<String>,
    /// Comma-separated family parameters.
    #[arg(long, value_delimiter = ',', requires = "family")]
    params: Vec<usize>,
    /// Edge-list file.
    #[arg(long, value_name = "PATH")]
    edges: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleTask {
    Sample,
    Search,
    PromiseSearch,
    Bipartite,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunTask {
    Sample,
    Transfer,
    Search,
    PromiseSearch,
    BipartiteSearch,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }
    }
}

enum Failure {
    Usage(String),
    Domain(qwalk::Error),
}

impl From<qwalk::Error> for Failure {
    fn from(e: qwalk::Error) -> Failure {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Domain(e.into())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

impl GraphSource {
    fn load(&self) -> CliResult<Graph> {
        if let Some(path) = &self.edges {
            return Ok(load_edge_list(BufReader::new(File::open(path)?))?);
        }
        let name = self.family.as_deref().expect("clap enforces one source");
        if let Some(k) = name.strip_prefix("cycle") {
            let k = match (k, self.params.as_slice()) {
                ("", [k]) => *k,
                (digits, []) => digits.parse().or_else(|_| usage("use --family cycle<k>"))?,
                _ => return usage("use --family cycle<k>"),
            };
            return Ok(Graph::cycle(k)?);
        }
        let family = Family::from_name(name, &self.params).or_else(|e| usage(e.to_string()))?;
        Ok(Graph::build_family(family)?)
    }
}

impl Output {
    fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn json(&self, value: &impl Serialize) -> CliResult {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value).map_err(qwalk::Error::from)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn need(v: Option<usize>, flag: &str) -> CliResult<usize> {
    v.map_or_else(|| usage(format!("{flag} is required for this task")), Ok)
}

fn bipartite_parts(g: &Graph) -> CliResult<(usize, usize)> {
    match g.family() {
        Family::CompleteBipartite { n1, n2 } => Ok((n1, n2)),
        _ => usage("bipartite tasks need --family complete-bipartite"),
    }
}

#[derive(Serialize)]
struct DepthOutput {
    #[serde(flatten)]
    chain: DepthRecord,
    transitive_overlaps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    overlaps: Option<Vec<f64>>,
}

fn execute(cli: Cli) -> CliResult {
    match cli.command {
        Command::Graph { source, edge_list, out } => {
            let g = source.load()?;
            if edge_list {
                let mut w = out.writer()?;
                w.write_all(g.to_edge_list().as_bytes())?;
                w.flush()?;
                Ok(())
            } else {
                out.json(&g)
            }
        }
        Command::Spectrum { source, eigenvectors, out } => {
            let g = source.load()?;
            let ints = validate_integer_spectrum(eigendecompose(&g.laplacian())?)?;
            if let Some(path) = eigenvectors {
                ints.spectrum().write_eigenvectors_csv(BufWriter::new(File::create(path)?))?;
            }
            out.json(&ints.to_record())
        }
        Command::Depth { source, marked, out } => {
            let ctx = WalkContext::new(source.load()?)?;
            let chain = build_depth_chain(ctx.integer_spectrum());
            let overlaps = marked.map(|m| ctx.vertex_overlaps(m)).transpose()?;
            out.json(&DepthOutput { chain: chain.to_record(), transitive_overlaps: transitive_overlaps(&chain), overlaps })
        }
        Command::Schedule { source, task, marked, branch, out } => {
            let g = source.load()?;
            let sched: Schedule = match task {
                ScheduleTask::Sample => WalkContext::new(g.clone())?.sampling_schedule(need(marked, "--marked")?)?,
                ScheduleTask::PromiseSearch => {
                    dagger(&WalkContext::new(g.clone())?.sampling_schedule(need(marked, "--marked")?)?)
                }
                ScheduleTask::Search => WalkContext::new(g.clone())?.search_schedule()?,
                ScheduleTask::Bipartite => {
                    let (n1, n2) = bipartite_parts(&g)?;
                    BipartiteSearch::new(n1, n2)?.schedule(branch).clone()
                }
            };
            let m = marked.unwrap_or(0);
            let check = replay(&g, &sched, m)?;
            eprintln!("fidelity {} (marked vertex {m})", sig12(check.fidelity));
            out.json(&sched)
        }
        Command::Run { task, source, schedule, marked, from, target, format, out } => {
            let g = source.load()?;
            let report = match (task, schedule) {
                (_, Some(path)) => {
                    let text = std::fs::read_to_string(path)?;
                    replay(&g, &Schedule::from_json(&text)?, need(marked, "--marked")?)?
                }
                (Some(RunTask::Sample), None) => {
                    let m = need(from.or(marked), "--source")?;
                    WalkContext::new(g)?.uniform_sample(m)?
                }
                (Some(RunTask::Transfer), None) => {
                    let (u, v) = (need(from, "--source")?, need(target, "--target")?);
                    WalkContext::new(g)?.transfer(u, v)?
                }
                (Some(RunTask::Search), None) => WalkContext::new(g)?.search_vertex_transitive(need(marked, "--marked")?)?,
                (Some(RunTask::PromiseSearch), None) => WalkContext::new(g)?.promise_search(need(marked, "--marked")?)?,
                (Some(RunTask::BipartiteSearch), None) => {
                    let (n1, n2) = bipartite_parts(&g)?;
                    BipartiteSearch::new(n1, n2)?.run(need(marked, "--marked")?)?
                }
                (None, None) => return usage("give a task or --schedule"),
            };
            eprintln!("fidelity {}", sig12(report.fidelity));
            write_report(&report, format.into(), out.writer()?)?;
            Ok(())
        }
        Command::Verify { source, cap, pairs, seed, format, out } => {
            let g = source.load()?;
            let cfg = VerifyConfig { cap, transfer_pairs: pairs, seed, ..VerifyConfig::from_env() };
            let agg = verify_graph(&g, &cfg)?;
            for note in &agg.notes {
                eprintln!("note: {note}");
            }
            eprintln!(
                "min fidelity {}, max bound ratio {}, {} runs in {:.3} s",
                sig12(agg.min_fidelity),
                sig12(agg.max_bound_ratio),
                agg.runs.len(),
                agg.wall_time.as_secs_f64()
            );
            write_report(&agg, format.into(), out.writer()?)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
