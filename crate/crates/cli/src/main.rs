use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use loglin::estimate::{estimate_report, LocalFitter, Method, SolverConfig};
use loglin::graph::{cliques_generating_class, Graph};
use loglin::harness::{
    mse_sweep, variance_sweep, verify_theorems, write_mse_csv, write_variance_sweep_csv,
    Experiment, ExperimentSpec, GraphSource,
};
use loglin::model::{build_jset, CellSpace, ContingencyTable, JSet, ThetaRecord, ThetaVector};
use loglin::sampling::{exact_sample, gibbs_sample, random_theta, RngSeed, SampleSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// 1 is a runtime error and 2 a command-line usage error (from clap).
/// Exit status when the estimate does not exist for the data.
const EXIT_NONEXISTENCE: u8 = 3;
/// Exit status when a verification check fails.
const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "loglin", version, about = "Distributed estimation for discrete log-linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a graph as an edge list.
    GenGraph {
        /// lattice:K, cycle:N, path:N, star:LEAVES or random:N:P
        family: String,
        /// Seed for random graphs.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample synthetic data from a graphical model.
    GenData {
        #[command(flatten)]
        model: ModelArgs,
        /// True parameters as JSON; drawn uniformly on [-1, 1] from --theta-seed otherwise.
        #[arg(long, conflicts_with = "theta_seed")]
        theta: Option<PathBuf>,
        #[arg(long)]
        theta_seed: Option<u64>,
        /// Where to write the true parameters (JSON).
        #[arg(long)]
        theta_out: Option<PathBuf>,
        #[arg(short = 'n', long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "auto")]
        sampler: Sampler,
        #[arg(long, default_value_t = loglin::sampling::DEFAULT_BURN_IN)]
        burn_in: usize,
        #[arg(long, default_value_t = loglin::sampling::DEFAULT_THINNING)]
        thinning: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: DataFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a model and print the estimate as JSON.
    Estimate {
        #[command(flatten)]
        model: ModelArgs,
        /// Contingency table CSV (`cell,count`) or one encoded cell per line.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        method: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relative MSE per method and sample size (CSV).
    MseSweep {
        /// Experiment spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Data-generation seed; overrides the spec.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample variance of one parameter per method and sample size (CSV).
    VarianceSweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        vertex: usize,
        /// Encoded cell of the target parameter, e.g. 1100.
        #[arg(long)]
        cell: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the marginal-parameter formula, exemption and variance ordering.
    Verify {
        /// lattice:K, cycle:N, path:N, star:LEAVES, random:N:P or an edge-list file.
        graph: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        draws: usize,
        /// Seed of a random graph family.
        #[arg(long)]
        graph_seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// Levels per vertex: one number for all, or a comma-separated list.
    #[arg(long, default_value = "2")]
    levels: String,
    #[arg(long, default_value_t = loglin::model::DEFAULT_ENUMERATION_GUARD)]
    guard: usize,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    ipf_tolerance: Option<f64>,
    #[arg(long)]
    ipf_max_cycles: Option<usize>,
    #[arg(long)]
    newton_tolerance: Option<f64>,
    #[arg(long)]
    newton_max_iterations: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    divergence_threshold: Option<f64>,
    /// Fit relaxed local models with Newton instead of IPF.
    #[arg(long)]
    local_newton: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            ipf_tolerance: self.ipf_tolerance.unwrap_or(d.ipf_tolerance),
            ipf_max_cycles: self.ipf_max_cycles.unwrap_or(d.ipf_max_cycles),
            newton_tolerance: self.newton_tolerance.unwrap_or(d.newton_tolerance),
            newton_max_iterations: self.newton_max_iterations.unwrap_or(d.newton_max_iterations),
            epsilon_smoothing: self.epsilon.unwrap_or(d.epsilon_smoothing),
            divergence_threshold: self.divergence_threshold.unwrap_or(d.divergence_threshold),
            local_fitter: if self.local_newton { LocalFitter::Newton } else { LocalFitter::Ipf },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Exact,
    Gibbs,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Table,
    Cells,
}

fn parse_family(text: &str, seed: Option<u64>) -> anyhow::Result<GraphSource> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |k: usize| -> anyhow::Result<usize> {
        parts
            .get(k)
            .ok_or_else(|| anyhow!("graph family `{text}` is missing a size"))?
            .parse()
            .with_context(|| format!("invalid size in `{text}`"))
    };
    Ok(match parts[0] {
        "lattice" => GraphSource::Lattice { k: num(1)? },
        "cycle" => GraphSource::Cycle { n: num(1)? },
        "path" => GraphSource::Path { n: num(1)? },
        "star" => GraphSource::Star { leaves: num(1)? },
        "random" => GraphSource::Random {
            n: num(1)?,
            edge_prob: parts
                .get(2)
                .ok_or_else(|| anyhow!("random graphs need random:N:P"))?
                .parse()
                .context("invalid edge probability")?,
            seed: seed.ok_or_else(|| anyhow!("random graphs need a graph seed"))?,
        },
        _ => GraphSource::File { path: PathBuf::from(text) },
    })
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

fn load_model(args: &ModelArgs) -> anyhow::Result<(Graph, JSet)> {
    let g = Graph::read_edge_list(open(&args.graph)?)
        .with_context(|| format!("reading graph {}", args.graph.display()))?;
    let levels: Vec<usize> = args
        .levels
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .context("invalid --levels")?;
    let levels = match levels.len() {
        1 => vec![levels[0]; g.vertex_count()],
        n if n == g.vertex_count() => levels,
        n => bail!("--levels lists {n} values but the graph has {} vertices", g.vertex_count()),
    };
    let space = CellSpace::with_guard(levels, args.guard)?;
    let jset = build_jset(&space, &cliques_generating_class(&g)?)?;
    Ok((g, jset))
}

fn read_data(path: &Path, space: &CellSpace) -> anyhow::Result<ContingencyTable> {
    let mut reader = open(path)?;
    let first = {
        let buf = reader.fill_buf()?;
        String::from_utf8_lossy(buf).lines().find(|l| !l.trim().is_empty()).map(str::to_owned)
    };
    let table = if first.as_deref().map(str::trim) == Some("cell,count") {
        ContingencyTable::read_csv(space.clone(), reader)
    } else {
        SampleSet::read_cells(space.clone(), reader).map(|s| s.table)
    };
    table.with_context(|| format!("reading data {}", path.display()))
}

fn load_spec(path: &Path, seed: u64) -> anyhow::Result<ExperimentSpec> {
    let mut spec: ExperimentSpec = serde_json::from_reader(open(path)?)
        .with_context(|| format!("parsing spec {}", path.display()))?;
    spec.seed = seed;
    Ok(spec)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::GenGraph { family, seed, out } => {
            let g = parse_family(&family, seed)?.build()?;
            let mut w = output(&out)?;
            g.write_edge_list(&mut w)?;
            w.flush()?;
        }
        Command::GenData {
            model,
            theta,
            theta_seed,
            theta_out,
            samples,
            seed,
            sampler,
            burn_in,
            thinning,
            format,
            out,
        } => {
            let (g, jset) = load_model(&model)?;
            let theta = match (theta, theta_seed) {
                (Some(path), _) => {
                    let record: ThetaRecord = serde_json::from_reader(open(&path)?)?;
                    ThetaVector::from_record(&record, &jset)?
                }
                (None, Some(s)) => random_theta(jset.len(), RngSeed::new(s, 0)),
                (None, None) => bail!("give either --theta FILE or --theta-seed"),
            };
            if let Some(path) = theta_out {
                serde_json::to_writer_pretty(output(&Some(path))?, &theta.to_record(&jset))?;
            }
            let rng = RngSeed::new(seed, 1);
            let exact = match sampler {
                Sampler::Exact => true,
                Sampler::Gibbs => false,
                Sampler::Auto => jset.space().is_enumerable(),
            };
            let data = if exact {
                exact_sample(&theta, &jset, samples, rng)?
            } else {
                gibbs_sample(&theta, &jset, &g, samples, burn_in, thinning, rng)?
            };
            let mut w = output(&out)?;
            match format {
                DataFormat::Table => data.table.write_csv(&mut w)?,
                DataFormat::Cells => data.write_cells(&mut w)?,
            }
            w.flush()?;
        }
        Command::Estimate { model, data, method, solver, out } => {
            let (g, jset) = load_model(&model)?;
            let method: Method = method.parse()?;
            let table = read_data(&data, jset.space())?;
            let report = estimate_report(&table, &g, &jset, method, &solver.config())?;
            let mut w = output(&out)?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
            if !report.existence {
                eprintln!(
                    "estimate does not exist: {}",
                    report.failure.as_deref().unwrap_or("unknown reason")
                );
                return Ok(EXIT_NONEXISTENCE);
            }
        }
        Command::MseSweep { spec, seed, out } => {
            let spec = load_spec(&spec, seed)?;
            let exp = Experiment::resolve(&spec)?;
            let rows = mse_sweep(&exp)?;
            let mut w = output(&out.or_else(|| spec.output.clone()))?;
            write_mse_csv(&spec, &rows, &mut w)?;
            w.flush()?;
        }
        Command::VarianceSweep { spec, seed, vertex, cell, out } => {
            let spec = load_spec(&spec, seed)?;
            let exp = Experiment::resolve(&spec)?;
            let rows = variance_sweep(&exp, vertex, &cell)?;
            let mut w = output(&out.or_else(|| spec.output.clone()))?;
            write_variance_sweep_csv(&spec, vertex, &cell, &rows, &mut w)?;
            w.flush()?;
        }
        Command::Verify { graph, seed, draws, graph_seed, out } => {
            let source = parse_family(&graph, graph_seed)?;
            let report = verify_theorems(&source, seed, draws)?;
            let mut w = output(&out)?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
            for c in &report.checks {
                eprintln!(
                    "{} {} ({} cases, max error {:e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.cases,
                    c.max_error
                );
            }
            if !report.passed {
                return Ok(EXIT_CHECK_FAILED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let missing = e.chain().any(|c| {
                c.downcast_ref::<loglin::Error>().is_some_and(|le| {
                    le.is_nonexistence() || matches!(le, loglin::Error::DataStarvation { .. })
                })
            });
            ExitCode::from(if missing { EXIT_NONEXISTENCE } else { 1 })
        }
    }
}
