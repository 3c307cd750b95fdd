//! Experiment drivers: relative-MSE sweeps, sample-variance sweeps and the
//! batch verification of the marginalization and variance results.

use crate::asymptotics::{global_inverse, variance_ordering_at, VarianceRow};
use crate::error::{Error, Result};
use crate::estimate::{
    decomposable_theta, estimate, local_marginal_estimate, newton_mle, Method, SolverConfig,
};
use crate::graph::{
    cliques_generating_class, junction_tree, make_cycle, make_lattice, make_path,
    make_random_graph, make_star, neighborhood, Graph, Hop,
};
use crate::marginal::{classify_buffer, lemma_one_formula, marginal_theta_oracle};
use crate::model::{
    build_jset, p_from_theta, CellSpace, ContingencyTable, JSet, ThetaRecord, ThetaVector,
    DEFAULT_ENUMERATION_GUARD,
};
use crate::sampling::{
    exact_sample, gibbs_sample, random_theta, RngSeed, SampleSet, DEFAULT_BURN_IN,
    DEFAULT_THINNING,
};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    Lattice { k: usize },
    Cycle { n: usize },
    Path { n: usize },
    Star { leaves: usize },
    Random { n: usize, edge_prob: f64, seed: u64 },
    File { path: PathBuf },
}

impl GraphSource {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSource::Lattice { k } => make_lattice(*k),
            GraphSource::Cycle { n } => make_cycle(*n),
            GraphSource::Path { n } => make_path(*n),
            GraphSource::Star { leaves } => make_star(*leaves),
            GraphSource::Random { n, edge_prob, seed } => make_random_graph(*n, *edge_prob, *seed),
            GraphSource::File { path } => Graph::read_edge_list(BufReader::new(File::open(path)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThetaSource {
    /// I.i.d. uniform on [−1, 1], drawn from the given seed.
    Random { seed: u64 },
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerChoice {
    Exact,
    Gibbs,
    /// Exact when the full space is enumerable, Gibbs otherwise.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub graph: GraphSource,
    #[serde(default = "default_levels")]
    pub levels: usize,
    pub theta: ThetaSource,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerChoice,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    /// Seed for all data generation; the CLI overrides it with `--seed`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_guard")]
    pub enumeration_guard: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_levels() -> usize {
    2
}
fn default_sampler() -> SamplerChoice {
    SamplerChoice::Auto
}
fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}
fn default_thinning() -> usize {
    DEFAULT_THINNING
}
fn default_guard() -> usize {
    DEFAULT_ENUMERATION_GUARD
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::usage("replications must be at least 1"));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes[0] == 0 {
            return Err(Error::usage("sample sizes must be positive"));
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::usage("sample sizes must be strictly ascending"));
        }
        if self.methods.is_empty() {
            return Err(Error::usage("at least one method is required"));
        }
        if self.levels < 2 || self.levels > u16::MAX as usize {
            return Err(Error::usage("levels must be at least 2"));
        }
        if self.thinning == 0 {
            return Err(Error::usage("thinning must be at least 1"));
        }
        self.solver.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

/// A spec with its graph, J-set and true parameters materialized.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub graph: Graph,
    pub jset: JSet,
    pub theta: ThetaVector<f64>,
}

const THETA_STREAM: u64 = 0;

impl Experiment {
    pub fn resolve(spec: &ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let graph = spec.graph.build()?;
        let space = CellSpace::with_guard(vec![spec.levels; graph.vertex_count()], spec.enumeration_guard)?;
        let jset = build_jset(&space, &cliques_generating_class(&graph)?)?;
        let theta = match &spec.theta {
            ThetaSource::Random { seed } => random_theta(jset.len(), RngSeed::new(*seed, THETA_STREAM)),
            ThetaSource::File { path } => {
                let record: ThetaRecord = serde_json::from_reader(BufReader::new(File::open(path)?))?;
                ThetaVector::from_record(&record, &jset)?
            }
        };
        if spec.methods.contains(&Method::Global) && !space.is_enumerable() {
            space.dense_len("global maximum likelihood in a sweep")?;
        }
        Ok(Experiment {
            spec: spec.clone(),
            graph,
            jset,
            theta,
        })
    }

    /// Data for replication `rep` at the `size_index`-th sample size.
    pub fn sample(&self, size_index: usize, rep: usize) -> Result<SampleSet> {
        let n = self.spec.sample_sizes[size_index];
        let seed = RngSeed::new(self.spec.seed, ((size_index as u64) << 32) | (rep as u64 + 1));
        let exact = match self.spec.sampler {
            SamplerChoice::Exact => true,
            SamplerChoice::Gibbs => false,
            SamplerChoice::Auto => self.jset.space().is_enumerable(),
        };
        if exact {
            exact_sample(&self.theta, &self.jset, n, seed)
        } else {
            gibbs_sample(
                &self.theta,
                &self.jset,
                &self.graph,
                n,
                self.spec.burn_in,
                self.spec.thinning,
                seed,
            )
        }
    }
}

pub fn relative_mse(estimate: &[f64], truth: &[f64]) -> f64 {
    let num: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = truth.iter().map(|b| b * b).sum();
    num / den
}

/// Outcome of one replication: per-method values, or `None` when some
/// method flagged a missing MLE.
type Replication = Option<Vec<f64>>;

fn run_replications<F>(exp: &Experiment, size_index: usize, per_method: F) -> Result<Vec<Replication>>
where
    F: Fn(&ContingencyTable, Method) -> Result<f64> + Sync,
{
    (0..exp.spec.replications)
        .into_par_iter()
        .map(|rep| {
            let data = exp.sample(size_index, rep)?;
            let mut values = Vec::with_capacity(exp.spec.methods.len());
            for &m in &exp.spec.methods {
                match per_method(&data.table, m) {
                    Ok(x) => values.push(x),
                    Err(e) if e.is_nonexistence() => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Some(values))
        })
        .collect()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub method: Method,
    pub n: usize,
    pub mean_rel_mse: f64,
    pub sd: f64,
    pub kept: usize,
    pub discarded: usize,
}

/// Relative MSE `‖θ̂−θ‖²/‖θ‖²` per method and sample size. Replications in
/// which any method flags a missing MLE are discarded and counted.
pub fn mse_sweep(exp: &Experiment) -> Result<Vec<MseRow>> {
    let truth = exp.theta.values();
    let mut rows = Vec::new();
    for (si, &n) in exp.spec.sample_sizes.iter().enumerate() {
        let reps = run_replications(exp, si, |table, m| {
            let est = estimate::<f64>(table, &exp.graph, &exp.jset, m, &exp.spec.solver)?;
            Ok(relative_mse(est.theta.values(), truth))
        })?;
        rows.extend(summarize(&exp.spec.methods, n, &reps, mean_sd)?.into_iter().map(
            |(method, (mean, sd), kept, discarded)| MseRow {
                method,
                n,
                mean_rel_mse: mean,
                sd,
                kept,
                discarded,
            },
        ));
    }
    rows.sort_by_key(|r| (r.method, r.n));
    Ok(rows)
}

type Summary<S> = Vec<(Method, S, usize, usize)>;

fn summarize<S, F>(methods: &[Method], n: usize, reps: &[Replication], stat: F) -> Result<Summary<S>>
where
    F: Fn(&[f64]) -> S,
{
    let kept: Vec<&Vec<f64>> = reps.iter().flatten().collect();
    let discarded = reps.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::DataStarvation { sample_size: n });
    }
    Ok(methods
        .iter()
        .enumerate()
        .map(|(mi, &m)| {
            let xs: Vec<f64> = kept.iter().map(|v| v[mi]).collect();
            (m, stat(&xs), kept.len(), discarded)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceSweepRow {
    pub method: Method,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// Monte-Carlo standard error of the sample variance, `s²·√(2/(R−1))`.
    pub variance_se: f64,
    pub kept: usize,
    pub discarded: usize,
}

/// Sample variance over replications of the estimate of one exempt
/// parameter. One- and two-hop use the local problem at `vertex`; pseudo
/// uses the averaged estimate; global uses the full MLE.
pub fn variance_sweep(exp: &Experiment, vertex: usize, cell: &str) -> Result<Vec<VarianceSweepRow>> {
    let space = exp.jset.space();
    let target = space.decode(cell).map_err(Error::Usage)?;
    let k = exp
        .jset
        .position(&target)
        .ok_or_else(|| Error::usage(format!("cell {cell} is not a model parameter")))?;
    let nb = neighborhood(&exp.graph, vertex, Hop::One)?;
    if !classify_buffer(&nb, &exp.jset).exempt.contains(&target) {
        return Err(Error::usage(format!(
            "cell {cell} is not exempt at vertex {vertex}: its support must lie in the one-hop \
             neighbourhood and not inside the buffer"
        )));
    }
    let cfg = &exp.spec.solver;
    let mut rows = Vec::new();
    for (si, &n) in exp.spec.sample_sizes.iter().enumerate() {
        let reps = run_replications(exp, si, |table, m| match m {
            Method::OneHop | Method::TwoHop => {
                let hop = if m == Method::OneHop { Hop::One } else { Hop::Two };
                let local = local_marginal_estimate::<f64>(table, &exp.graph, &exp.jset, vertex, hop, cfg)?;
                Ok(local
                    .components
                    .iter()
                    .find(|&&(pos, _)| pos == k)
                    .expect("exempt cell is estimated locally")
                    .1)
            }
            _ => Ok(estimate::<f64>(table, &exp.graph, &exp.jset, m, cfg)?.theta.get(k)),
        })?;
        let stats = summarize(&exp.spec.methods, n, &reps, |xs| {
            let (mean, sd) = mean_sd(xs);
            let var = sd * sd;
            let se = if xs.len() > 1 { var * (2.0 / (xs.len() as f64 - 1.0)).sqrt() } else { f64::INFINITY };
            (mean, var, se)
        })?;
        rows.extend(stats.into_iter().map(|(method, (mean, variance, variance_se), kept, discarded)| {
            VarianceSweepRow {
                method,
                n,
                mean,
                variance,
                variance_se,
                kept,
                discarded,
            }
        }));
    }
    rows.sort_by_key(|r| (r.method, r.n));
    Ok(rows)
}

fn spec_header<W: Write>(w: &mut W, spec_json: &str) -> Result<()> {
    writeln!(w, "# spec: {spec_json}")?;
    Ok(())
}

pub fn write_mse_csv<W: Write>(spec: &ExperimentSpec, rows: &[MseRow], mut w: W) -> Result<()> {
    spec_header(&mut w, &spec.to_json())?;
    writeln!(w, "method,n,mean_rel_mse,sd,kept,discarded")?;
    for r in rows {
        writeln!(w, "{},{},{:e},{:e},{},{}", r.method, r.n, r.mean_rel_mse, r.sd, r.kept, r.discarded)?;
    }
    Ok(())
}

pub fn write_variance_sweep_csv<W: Write>(
    spec: &ExperimentSpec,
    vertex: usize,
    cell: &str,
    rows: &[VarianceSweepRow],
    mut w: W,
) -> Result<()> {
    spec_header(&mut w, &spec.to_json())?;
    writeln!(w, "# target: vertex {vertex}, cell {cell}")?;
    writeln!(w, "method,n,mean,variance,variance_se,kept,discarded")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:e},{:e},{:e},{},{}",
            r.method, r.n, r.mean, r.variance, r.variance_se, r.kept, r.discarded
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub graph: GraphSource,
    pub seed: u64,
    pub draws: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub variance_rows: Vec<VarianceRow>,
}

struct Tally {
    cases: usize,
    max_error: f64,
    failed: bool,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, max_error: 0.0, failed: false }
    }

    fn record(&mut self, err: f64, tol: f64) {
        self.cases += 1;
        // NaN counts as a failure
        if !(err < tol) {
            self.failed = true;
        }
        if err > self.max_error || err.is_nan() {
            self.max_error = err;
        }
    }

    fn finish(self, name: &str, tol: f64) -> Check {
        Check {
            name: name.to_string(),
            passed: !self.failed && self.cases > 0,
            cases: self.cases,
            max_error: self.max_error,
            tolerance: tol,
        }
    }
}

/// Lemma-1 formula against the oracle, exemption equalities, variance
/// ordering at every vertex and, on decomposable graphs, closed form against
/// Newton, over `draws` random parameter vectors on a binary model.
pub fn verify_theorems(source: &GraphSource, seed: u64, draws: usize) -> Result<VerifyReport> {
    if draws == 0 {
        return Err(Error::usage("draws must be at least 1"));
    }
    let g = source.build()?;
    let space = CellSpace::binary(g.vertex_count())?;
    let jset = build_jset(&space, &cliques_generating_class(&g)?)?;
    let decomposable = junction_tree(&g).is_ok();
    const FORMULA_TOL: f64 = 1e-9;
    const CLOSED_TOL: f64 = 1e-6;
    let mut formula = Tally::new();
    let mut exempt = Tally::new();
    let mut ordering = Tally::new();
    let mut closed = Tally::new();
    let mut rows = Vec::new();
    for draw in 0..draws {
        let theta = random_theta(jset.len(), RngSeed::new(seed, draw as u64));
        let joint = p_from_theta(&theta, &jset)?;
        let ginv = global_inverse(&joint, &jset)?;
        for v in 0..g.vertex_count() {
            for hop in [Hop::One, Hop::Two] {
                let nb = neighborhood(&g, v, hop)?;
                let (sat, tm) = marginal_theta_oracle(&theta, &jset, &nb.members)?;
                for (k, c) in sat.cells().iter().enumerate() {
                    let f = lemma_one_formula(&theta, &jset, &nb.members, c)?;
                    formula.record((f - tm.get(k)).abs(), FORMULA_TOL);
                }
                for c in classify_buffer(&nb, &jset).exempt {
                    let local = sat.position(&c.restrict(&nb.members)).expect("saturated");
                    let full = jset.position(&c).expect("exempt cells are parameters");
                    exempt.record((tm.get(local) - theta.get(full)).abs(), FORMULA_TOL);
                }
            }
            for r in variance_ordering_at(&joint, &jset, &g, v, &ginv)? {
                let shortfall = (r.var_two_hop - r.var_one_hop).max(r.var_global - r.var_two_hop);
                ordering.record(shortfall.max(0.0), 1e-10);
                rows.push(r);
            }
        }
        if decomposable {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (draw as u64).wrapping_mul(0x9E37_79B9));
            let counts = (0..space.total_cells()).map(|_| rng.gen_range(1..50u64)).collect();
            let table = ContingencyTable::from_dense(space.clone(), counts)?;
            let a = decomposable_theta::<f64>(&table, &g, &jset)?;
            let b = newton_mle::<f64>(&table, &jset, &SolverConfig::default())?.theta;
            let err = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            closed.record(err, CLOSED_TOL);
        }
    }
    let mut checks = vec![
        formula.finish("marginal-parameter formula vs oracle", FORMULA_TOL),
        exempt.finish("exempt parameters unchanged by marginalization", FORMULA_TOL),
        ordering.finish("variance ordering one-hop >= two-hop >= global", 1e-10),
    ];
    if decomposable {
        checks.push(closed.finish("decomposable closed form vs Newton", CLOSED_TOL));
    }
    Ok(VerifyReport {
        graph: source.clone(),
        seed,
        draws,
        passed: checks.iter().all(|c| c.passed),
        checks,
        variance_rows: rows,
    })
}
