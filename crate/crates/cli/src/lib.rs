//! Experiment runner behind the `pgls` binary: seeded repetitions, per-run
//! CSV, summary JSON, optional event traces, and result comparison.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, ensure, Context, Result};
use pgls_core::coop::{run_parallel, CoopConfig, CoopStrategy, Topology, TopologyKind};
use pgls_core::gls::{run_sequential, GlsParams, InitialTour, Lambda, SequentialAlgorithm, StopCriterion};
use pgls_core::metrics::excess;
use pgls_core::record::RunRecord;
use pgls_core::stats::{mann_whitney_u, mean, median};
use pgls_core::{Cost, NeighborLists, TspInstance};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Gls,
    Ebgls,
    Parallel,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Gls => "gls",
            Algo::Ebgls => "ebgls",
            Algo::Parallel => "parallel",
        })
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gls" => Ok(Algo::Gls),
            "ebgls" => Ok(Algo::Ebgls),
            "parallel" => Ok(Algo::Parallel),
            other => Err(format!("unknown algorithm `{other}` (expected gls, ebgls or parallel)")),
        }
    }
}

/// Target cost that ends a run early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Optimum,
    Cost(Cost),
    None,
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimum" | "opt" => Ok(Target::Optimum),
            "none" => Ok(Target::None),
            other => other
                .parse::<Cost>()
                .ok()
                .filter(|c| *c >= 0)
                .map(Target::Cost)
                .ok_or_else(|| format!("invalid target `{other}` (expected optimum, none or a cost)")),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Optimum => f.write_str("optimum"),
            Target::Cost(c) => write!(f, "{c}"),
            Target::None => f.write_str("none"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// A TSPLIB file, or the name of a bundled instance.
    pub instance: String,
    pub algo: Algo,
    pub strategy: CoopStrategy,
    pub topology: TopologyKind,
    pub k: usize,
    pub seed_base: u64,
    pub lambda_coeff: f64,
    pub w: f64,
    pub u: u64,
    pub nn_k: usize,
    pub initial: InitialTour,
    pub max_seconds: Option<f64>,
    pub max_iterations: Option<u64>,
    pub target: Target,
    pub reps: u64,
    pub out: PathBuf,
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: String::new(),
            algo: Algo::Ebgls,
            strategy: CoopStrategy::EliteBiased,
            topology: TopologyKind::Ring,
            k: 8,
            seed_base: 0,
            lambda_coeff: 0.3,
            w: 2.0,
            u: 100,
            nn_k: 10,
            initial: InitialTour::Random,
            max_seconds: None,
            max_iterations: None,
            target: Target::Optimum,
            reps: 1,
            out: PathBuf::from("results"),
            trace: false,
        }
    }
}

impl ExperimentConfig {
    /// Workers per repetition.
    pub fn workers(&self) -> usize {
        match self.algo {
            Algo::Parallel => self.k,
            _ => 1,
        }
    }

    /// Seed of worker `w` in repetition `r`.
    pub fn seed(&self, rep: u64, worker: usize) -> u64 {
        self.seed_base + rep * self.workers() as u64 + worker as u64
    }

    fn params(&self) -> GlsParams {
        GlsParams {
            lambda: Lambda::Auto,
            w: self.w,
            u: self.u,
            lambda_coeff: self.lambda_coeff,
            initial: self.initial,
        }
    }

    fn topology(&self) -> Result<Topology> {
        if !self.strategy.communicates() {
            return Ok(Topology::isolated(self.k));
        }
        Topology::build(self.topology, self.k).with_context(|| format!("invalid {} topology", self.topology))
    }

    fn validate(&self) -> Result<()> {
        ensure!(self.reps >= 1, "--reps must be at least 1");
        ensure!(self.nn_k >= 1, "--nn-k must be at least 1");
        if self.algo == Algo::Parallel {
            ensure!(self.k >= 2, "parallel runs need --k of at least 2");
        }
        if let Some(s) = self.max_seconds {
            ensure!(s.is_finite() && s > 0.0, "--max-seconds must be positive");
        }
        self.params().validate()?;
        Ok(())
    }
}

/// Loads a TSPLIB file, falling back to a bundled instance of that name.
pub fn load_instance(spec: &str) -> Result<TspInstance> {
    let path = Path::new(spec);
    if path.exists() {
        return TspInstance::from_path(path).with_context(|| format!("cannot load {spec}"));
    }
    TspInstance::bundled(spec).with_context(|| format!("{spec} is neither a readable file nor a bundled instance"))
}

/// One CSV row: one worker of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run_id: u64,
    pub worker_id: usize,
    pub seed: u64,
    pub final_cost: Cost,
    #[serde(serialize_with = "four_decimals")]
    pub excess_pct: Option<f64>,
    pub success: bool,
    #[serde(serialize_with = "six_decimals")]
    pub wall_seconds: f64,
    pub iterations: u64,
    pub sends: u64,
    pub receives: u64,
    pub penalizations: u64,
}

fn four_decimals<S: serde::Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_str(&format!("{x:.4}")),
        None => s.serialize_none(),
    }
}

fn six_decimals<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:.6}"))
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Aggregates of one result set. Every figure is derived from the CSV rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub instance: String,
    pub cities: usize,
    pub optimum: Option<Cost>,
    pub algo: Algo,
    pub strategy: Option<String>,
    pub topology: Option<String>,
    pub workers: usize,
    pub seed_base: u64,
    pub target: Option<Cost>,
    pub runs: usize,
    pub success_count: usize,
    /// Best excess per run: the lowest over the run's workers.
    pub mean_excess: Option<f64>,
    pub median_excess: Option<f64>,
    pub best_cost: Cost,
    /// Mean wall time per run, capped runs included.
    pub mean_runtime: f64,
    /// Mean wall time over successful runs only.
    pub mean_runtime_successful: Option<f64>,
    pub mean_iterations: f64,
    pub total_sends: u64,
    pub total_receives: u64,
}

/// Per-run figures: best cost and excess over workers, success if any
/// worker succeeded, and the longest worker wall time.
struct RunView {
    best_cost: Cost,
    best_excess: Option<f64>,
    success: bool,
    wall: f64,
}

fn per_run(rows: &[RunRow]) -> Vec<RunView> {
    let mut ids: Vec<u64> = rows.iter().map(|r| r.run_id).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let rs: Vec<&RunRow> = rows.iter().filter(|r| r.run_id == id).collect();
            RunView {
                best_cost: rs.iter().map(|r| r.final_cost).min().unwrap_or(0),
                best_excess: rs.iter().filter_map(|r| r.excess_pct).min_by(f64::total_cmp),
                success: rs.iter().any(|r| r.success),
                wall: rs.iter().map(|r| r.wall_seconds).fold(0.0, f64::max),
            }
        })
        .collect()
}

/// Best excess of every run, in run order.
pub fn run_excesses(rows: &[RunRow]) -> Vec<f64> {
    per_run(rows).iter().filter_map(|r| r.best_excess).collect()
}

fn summarize(cfg: &ExperimentConfig, inst: &TspInstance, target: Option<Cost>, rows: &[RunRow]) -> Summary {
    let runs = per_run(rows);
    let excesses: Vec<f64> = runs.iter().filter_map(|r| r.best_excess).collect();
    let walls: Vec<f64> = runs.iter().map(|r| r.wall).collect();
    let success_walls: Vec<f64> = runs.iter().filter(|r| r.success).map(|r| r.wall).collect();
    let parallel = cfg.algo == Algo::Parallel;
    Summary {
        instance: inst.name().to_string(),
        cities: inst.len(),
        optimum: inst.known_optimum(),
        algo: cfg.algo,
        strategy: parallel.then(|| cfg.strategy.to_string()),
        topology: (parallel && cfg.strategy.communicates()).then(|| cfg.topology.to_string()),
        workers: cfg.workers(),
        seed_base: cfg.seed_base,
        target,
        runs: runs.len(),
        success_count: runs.iter().filter(|r| r.success).count(),
        mean_excess: mean(&excesses).ok(),
        median_excess: median(&excesses).ok(),
        best_cost: runs.iter().map(|r| r.best_cost).min().unwrap_or(0),
        mean_runtime: mean(&walls).unwrap_or(0.0),
        mean_runtime_successful: mean(&success_walls).ok(),
        mean_iterations: rows.iter().map(|r| r.iterations as f64).sum::<f64>() / rows.len().max(1) as f64,
        total_sends: rows.iter().map(|r| r.sends).sum(),
        total_receives: rows.iter().map(|r| r.receives).sum(),
    }
}

#[derive(Serialize)]
struct TraceFile<'a> {
    run_id: u64,
    workers: &'a [RunRecord],
}

/// Runs every repetition and writes `runs.csv`, `summary.json` and, with
/// tracing on, `trace/run_NNNN.json` under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    let inst = load_instance(&cfg.instance)?;
    let optimum = inst.known_optimum();
    let target = match cfg.target {
        Target::Optimum => Some(optimum.with_context(|| {
            format!("no known optimum for {}; pass --target none or a cost", inst.name())
        })?),
        Target::Cost(c) => Some(c),
        Target::None => None,
    };
    let stop = StopCriterion {
        max_iterations: cfg.max_iterations,
        max_time: cfg.max_seconds.map(Duration::from_secs_f64),
        target_cost: target,
    };
    ensure!(
        stop.is_bounded(),
        "the run needs a stop: --max-seconds, --max-iters or a target"
    );
    let topology = match cfg.algo {
        Algo::Parallel => Some(cfg.topology()?),
        _ => None,
    };
    let nl = NeighborLists::new(&inst, cfg.nn_k);

    fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
    if cfg.trace {
        fs::create_dir_all(cfg.out.join("trace"))?;
    }

    let mut rows = Vec::new();
    for rep in 0..cfg.reps {
        let records: Vec<RunRecord> = match (cfg.algo, &topology) {
            (Algo::Parallel, Some(topology)) => {
                let coop = CoopConfig {
                    params: cfg.params(),
                    strategy: cfg.strategy,
                    topology: topology.clone(),
                    seeds: (0..cfg.k).map(|w| cfg.seed(rep, w)).collect(),
                    stop,
                    trace_penalties: cfg.trace,
                };
                run_parallel(&inst, &nl, &coop)?.records()
            }
            (algo, _) => {
                let algorithm = if algo == Algo::Gls {
                    SequentialAlgorithm::Gls
                } else {
                    SequentialAlgorithm::Ebgls
                };
                let run = run_sequential(&inst, &nl, cfg.params(), algorithm, cfg.seed(rep, 0), &stop, cfg.trace)?;
                vec![run.record]
            }
        };
        for r in &records {
            let excess_pct = match optimum {
                Some(opt) => Some(round4(excess(r.final_cost, opt).with_context(|| {
                    format!("worker {} found a tour below the registered optimum", r.worker)
                })?)),
                None => None,
            };
            rows.push(RunRow {
                run_id: rep,
                worker_id: r.worker,
                seed: r.seed,
                final_cost: r.final_cost,
                excess_pct,
                success: target.is_some_and(|t| r.final_cost <= t),
                wall_seconds: r.wall_seconds,
                iterations: r.iterations,
                sends: r.sends,
                receives: r.receives,
                penalizations: r.penalizations,
            });
        }
        if cfg.trace {
            let path = cfg.out.join("trace").join(format!("run_{rep:04}.json"));
            let file = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
            serde_json::to_writer(
                std::io::BufWriter::new(file),
                &TraceFile {
                    run_id: rep,
                    workers: &records,
                },
            )?;
        }
    }

    write_rows(&cfg.out.join("runs.csv"), &rows)?;
    let summary = summarize(cfg, &inst, target, &rows);
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(cfg.out.join("summary.json"), json + "\n")?;
    Ok(summary)
}

pub fn write_rows(path: &Path, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let rows = r
        .deserialize()
        .collect::<Result<Vec<RunRow>, _>>()
        .with_context(|| format!("malformed results in {}", path.display()))?;
    Ok(rows)
}

/// Side-by-side statistics of two result sets and the U test on their
/// per-run best excess.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub a: SideStats,
    pub b: SideStats,
    /// U of `a` against `b`.
    pub u: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideStats {
    pub path: String,
    pub runs: usize,
    pub success_count: usize,
    pub mean_excess: f64,
    pub median_excess: f64,
}

fn instance_of(csv_path: &Path) -> Option<(String, Option<Cost>)> {
    let summary = csv_path.parent()?.join("summary.json");
    let text = fs::read_to_string(summary).ok()?;
    let s: Summary = serde_json::from_str(&text).ok()?;
    Some((s.instance, s.optimum))
}

pub fn compare(a: &Path, b: &Path) -> Result<Comparison> {
    if let (Some(ia), Some(ib)) = (instance_of(a), instance_of(b)) {
        if ia != ib {
            bail!(
                "result sets are for different instances: {} (optimum {:?}) and {} (optimum {:?})",
                ia.0,
                ia.1,
                ib.0,
                ib.1
            );
        }
    }
    let side = |path: &Path| -> Result<(SideStats, Vec<f64>)> {
        let rows = read_rows(path)?;
        ensure!(!rows.is_empty(), "{} holds no runs", path.display());
        let ex = run_excesses(&rows);
        ensure!(!ex.is_empty(), "{} has no excess values (unknown optimum)", path.display());
        let runs = per_run(&rows);
        Ok((
            SideStats {
                path: path.display().to_string(),
                runs: runs.len(),
                success_count: runs.iter().filter(|r| r.success).count(),
                mean_excess: mean(&ex)?,
                median_excess: median(&ex)?,
            },
            ex,
        ))
    };
    let (sa, ea) = side(a)?;
    let (sb, eb) = side(b)?;
    let test = mann_whitney_u(&ea, &eb)?;
    Ok(Comparison {
        a: sa,
        b: sb,
        u: test.u,
        p_value: test.p_value,
    })
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, s) in [("A", &self.a), ("B", &self.b)] {
            writeln!(
                f,
                "{label}: {} runs={} success={} median_excess={:.4}% mean_excess={:.4}%",
                s.path, s.runs, s.success_count, s.median_excess, s.mean_excess
            )?;
        }
        write!(f, "Mann-Whitney U={} p={:.6}", self.u, self.p_value)
    }
}
