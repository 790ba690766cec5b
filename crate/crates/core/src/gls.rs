//! Guided Local Search and its elite-biased variant.
//!
//! The engine alternates a 2-opt descent on the augmented objective
//! `h(s) = g(s) + λ·Σ p_i·I_i(s)` with a penalization step that adds one
//! to every edge of the local optimum whose utility `c_i / (1 + p_i)` is
//! maximal. In elite-biased mode edges missing from the elite tour have
//! their utility multiplied by `w`, which steers penalties away from the
//! elite and so pulls the search towards it.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Cost, TspInstance};
use crate::penalty::PenaltyTable;
use crate::record::{EventKind, RunRecord, StopReason};
use crate::search::{local_search, HistoricalBest, SearchStats};
use crate::tour::{ActivationBits, NeighborLists, Tour};

/// Relative slack under which two utilities count as tied.
pub const UTILITY_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GlsError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    /// Resolved from the first local optimum as `coeff · g / n`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialTour {
    #[default]
    Random,
    NearestNeighbor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlsParams {
    pub lambda: Lambda,
    /// Utility multiplier for edges outside the elite tour; 1 turns the
    /// elite bias off.
    pub w: f64,
    /// Elite refresh period in iterations.
    pub u: u64,
    pub lambda_coeff: f64,
    pub initial: InitialTour,
}

impl Default for GlsParams {
    fn default() -> Self {
        Self {
            lambda: Lambda::Auto,
            w: 2.0,
            u: 100,
            lambda_coeff: 0.3,
            initial: InitialTour::Random,
        }
    }
}

impl GlsParams {
    pub fn validate(&self) -> Result<(), GlsError> {
        if !(self.w >= 1.0) || !self.w.is_finite() {
            return Err(GlsError::InvalidParams(format!("w must be at least 1, got {}", self.w)));
        }
        if self.u < 1 {
            return Err(GlsError::InvalidParams("U must be at least 1".into()));
        }
        if !(self.lambda_coeff > 0.0) {
            return Err(GlsError::InvalidParams(format!(
                "lambda coefficient must be positive, got {}",
                self.lambda_coeff
            )));
        }
        if let Lambda::Fixed(l) = self.lambda {
            if !(l > 0.0) || !l.is_finite() {
                return Err(GlsError::InvalidParams(format!("lambda must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// `coeff · g(first local optimum) / n`.
pub fn compute_lambda(first_local_opt_cost: Cost, n: usize, coeff: f64) -> Result<f64, GlsError> {
    if first_local_opt_cost <= 0 {
        return Err(GlsError::Contract(format!(
            "first local optimum cost must be positive, got {first_local_opt_cost}"
        )));
    }
    if n < 3 {
        return Err(GlsError::Contract(format!("n must be at least 3, got {n}")));
    }
    if !(coeff > 0.0) {
        return Err(GlsError::Contract(format!("coefficient must be positive, got {coeff}")));
    }
    Ok(coeff * first_local_opt_cost as f64 / n as f64)
}

/// h(t) = g(t) + λ · Σ penalties of the edges in `t`.
pub fn augmented_cost(t: &Tour, pen: &PenaltyTable, lambda: f64) -> f64 {
    let penalty: u64 = t.edges().map(|(a, b)| pen.get(a, b) as u64).sum();
    t.cost() as f64 + lambda * penalty as f64
}

/// Penalizing utility of edge {a, b} with respect to the local optimum `t`.
/// With an elite tour, edges outside it are weighted by `w`.
pub fn utility(
    edge: (usize, usize),
    t: &Tour,
    inst: &TspInstance,
    pen: &PenaltyTable,
    elite: Option<&Tour>,
    w: f64,
) -> f64 {
    let (a, b) = edge;
    if !t.has_edge(a, b) {
        return 0.0;
    }
    let base = inst.cost(a, b) as f64 / (1.0 + pen.get(a, b) as f64);
    match elite {
        Some(e) if !e.has_edge(a, b) => w * base,
        _ => base,
    }
}

/// Increments the penalty of every maximum-utility edge of `t` and
/// activates their endpoints. Returns the penalized edges as `(min, max)`
/// pairs in tour order.
pub fn penalize(
    t: &Tour,
    inst: &TspInstance,
    pen: &mut PenaltyTable,
    elite: Option<&Tour>,
    w: f64,
    bits: &mut ActivationBits,
) -> Vec<(usize, usize)> {
    let utils: Vec<((usize, usize), f64)> = t
        .edges()
        .map(|e| (e, utility(e, t, inst, pen, elite, w)))
        .collect();
    let max = utils.iter().map(|&(_, u)| u).fold(f64::NEG_INFINITY, f64::max);
    let threshold = max * (1.0 - UTILITY_TIE_EPS);
    let mut penalized = Vec::new();
    for ((a, b), u) in utils {
        if u >= threshold {
            pen.increment(a, b);
            bits.set(a);
            bits.set(b);
            penalized.push((a.min(b), a.max(b)));
        }
    }
    penalized
}

/// What one GLS iteration did.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    /// Iteration index before the increment.
    pub iteration: u64,
    pub search: SearchStats,
    pub penalized: Vec<(usize, usize)>,
    pub best_cost: Cost,
    /// Set on the iteration that resolved an automatic λ.
    pub lambda_resolved: Option<f64>,
}

/// One GLS/EBGLS search trajectory: current tour, historical best,
/// penalties, activation bits and the optional elite tour.
#[derive(Debug, Clone)]
pub struct GlsEngine<'a> {
    inst: &'a TspInstance,
    nl: &'a NeighborLists,
    params: GlsParams,
    current: Tour,
    best: HistoricalBest,
    penalties: PenaltyTable,
    bits: ActivationBits,
    lambda: Option<f64>,
    first_local_optimum: Option<Cost>,
    iteration: u64,
    elite: Option<Tour>,
}

impl<'a> GlsEngine<'a> {
    /// Starts from a tour drawn from `seed` according to `params.initial`.
    pub fn new(
        inst: &'a TspInstance,
        nl: &'a NeighborLists,
        params: GlsParams,
        seed: u64,
    ) -> Result<Self, GlsError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let initial = match params.initial {
            InitialTour::Random => Tour::random(inst, &mut rng),
            InitialTour::NearestNeighbor => Tour::nearest_neighbor(inst, &mut rng),
        };
        Self::with_initial(inst, nl, params, initial)
    }

    pub fn with_initial(
        inst: &'a TspInstance,
        nl: &'a NeighborLists,
        params: GlsParams,
        initial: Tour,
    ) -> Result<Self, GlsError> {
        params.validate()?;
        if initial.len() != inst.len() {
            return Err(GlsError::Contract(format!(
                "initial tour has {} cities, instance has {}",
                initial.len(),
                inst.len()
            )));
        }
        let lambda = match params.lambda {
            Lambda::Fixed(l) => Some(l),
            Lambda::Auto => None,
        };
        Ok(Self {
            inst,
            nl,
            params,
            best: HistoricalBest::new(initial.clone()),
            current: initial,
            penalties: PenaltyTable::new(),
            bits: ActivationBits::all_active(inst.len()),
            lambda,
            first_local_optimum: None,
            iteration: 0,
            elite: None,
        })
    }

    pub fn instance(&self) -> &'a TspInstance {
        self.inst
    }

    pub fn params(&self) -> &GlsParams {
        &self.params
    }

    pub fn current(&self) -> &Tour {
        &self.current
    }

    /// Historical best with respect to g.
    pub fn best(&self) -> &Tour {
        self.best.tour()
    }

    pub fn best_cost(&self) -> Cost {
        self.best.cost()
    }

    pub fn penalties(&self) -> &PenaltyTable {
        &self.penalties
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn first_local_optimum(&self) -> Option<Cost> {
        self.first_local_optimum
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn elite(&self) -> Option<&Tour> {
        self.elite.as_ref()
    }

    /// Sets s_e; `None` selects the plain GLS utility.
    pub fn set_elite(&mut self, elite: Option<Tour>) {
        self.elite = elite;
    }

    /// Copies s_hb into s_e.
    pub fn elite_from_best(&mut self) {
        match &mut self.elite {
            Some(e) => e.clone_from(self.best.tour()),
            None => self.elite = Some(self.best.tour().clone()),
        }
    }

    /// Replaces the current tour and re-activates every city. Penalties
    /// are kept. The historical best absorbs the tour if it is better.
    pub fn restart_from(&mut self, tour: &Tour) {
        self.current.clone_from(tour);
        self.best.offer(tour);
        self.bits = ActivationBits::all_active(self.inst.len());
    }

    /// One descent to a local optimum of h followed by one penalization.
    pub fn iterate(&mut self) -> IterationReport {
        let iteration = self.iteration;
        let mut lambda_resolved = None;
        let search = match self.lambda {
            Some(lambda) => self.descend(lambda),
            None => {
                // Penalties are all zero before the first local optimum,
                // so the first descent is a pure g descent.
                let stats = self.descend(0.0);
                let lambda = compute_lambda(self.current.cost(), self.inst.len(), self.params.lambda_coeff)
                    .unwrap_or(f64::MIN_POSITIVE);
                self.lambda = Some(lambda);
                lambda_resolved = Some(lambda);
                stats
            }
        };
        if self.first_local_optimum.is_none() {
            self.first_local_optimum = Some(self.current.cost());
        }
        let penalized = penalize(
            &self.current,
            self.inst,
            &mut self.penalties,
            self.elite.as_ref(),
            self.params.w,
            &mut self.bits,
        );
        self.iteration += 1;
        IterationReport {
            iteration,
            search,
            penalized,
            best_cost: self.best.cost(),
            lambda_resolved,
        }
    }

    fn descend(&mut self, lambda: f64) -> SearchStats {
        local_search(
            &mut self.current,
            self.inst,
            &self.penalties,
            lambda,
            &mut self.bits,
            self.nl,
            &mut self.best,
        )
    }
}

/// When a run ends. Criteria are checked once per iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StopCriterion {
    pub max_iterations: Option<u64>,
    pub max_time: Option<Duration>,
    pub target_cost: Option<Cost>,
}

impl StopCriterion {
    pub fn iterations(n: u64) -> Self {
        Self {
            max_iterations: Some(n),
            ..Self::default()
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.max_iterations.is_some() || self.max_time.is_some() || self.target_cost.is_some()
    }

    /// Reason to stop given the current state, if any.
    pub fn check(&self, iterations: u64, elapsed: Duration, best: Cost) -> Option<StopReason> {
        if self.target_cost.is_some_and(|t| best <= t) {
            return Some(StopReason::TargetReached);
        }
        if self.max_iterations.is_some_and(|m| iterations >= m) {
            return Some(StopReason::IterationLimit);
        }
        if self.max_time.is_some_and(|m| elapsed >= m) {
            return Some(StopReason::TimeLimit);
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequentialAlgorithm {
    Gls,
    /// Single-process elite-biased GLS: s_e ← s_hb every U iterations.
    Ebgls,
}

/// Outcome of a sequential run.
#[derive(Debug, Clone)]
pub struct SequentialRun {
    pub record: RunRecord,
    pub best: Tour,
    pub penalties: PenaltyTable,
}

/// Runs sequential GLS or EBGLS until `stop` fires.
pub fn run_sequential(
    inst: &TspInstance,
    nl: &NeighborLists,
    params: GlsParams,
    algorithm: SequentialAlgorithm,
    seed: u64,
    stop: &StopCriterion,
    trace_penalties: bool,
) -> Result<SequentialRun, GlsError> {
    if !stop.is_bounded() {
        return Err(GlsError::InvalidParams("a stop criterion is required".into()));
    }
    let start = Instant::now();
    let mut engine = GlsEngine::new(inst, nl, params, seed)?;
    let mut record = RunRecord::new(0, seed);
    let reason = loop {
        let elapsed = start.elapsed();
        if let Some(reason) = stop.check(engine.iteration(), elapsed, engine.best_cost()) {
            break reason;
        }
        if algorithm == SequentialAlgorithm::Ebgls && engine.iteration() % params.u == 0 {
            engine.elite_from_best();
        }
        let report = engine.iterate();
        let t = start.elapsed().as_secs_f64();
        if report.search.improved_best {
            record.push(t, report.iteration, EventKind::Improvement { cost: report.best_cost });
        }
        record.penalizations += 1;
        if trace_penalties {
            record.push(t, report.iteration, EventKind::Penalize { edges: report.penalized });
        }
    };
    let t = start.elapsed().as_secs_f64();
    record.push(t, engine.iteration(), EventKind::Stop);
    record.stop_reason = reason;
    record.final_cost = engine.best_cost();
    record.wall_seconds = t;
    record.iterations = engine.iteration();
    record.lambda = engine.lambda().unwrap_or(0.0);
    record.first_local_optimum = engine.first_local_optimum();
    Ok(SequentialRun {
        record,
        best: engine.best().clone(),
        penalties: engine.penalties().clone(),
    })
}
