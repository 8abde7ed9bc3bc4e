//! Multi-restart fiducial search.
//!
//! Each restart draws a Haar-random starting vector from its own seeded
//! stream, minimizes the frame error with L-BFGS (optionally restricted to a
//! Zauner eigenspace), and, once below the success threshold, polishes the
//! result further so that it clears the verifier's acceptance tier.
//! Restarts share nothing, so in exhaustive mode the outcome depends only on
//! the configuration and never on scheduling.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clock::Instant;
use crate::error::{Error, Result};
use crate::lbfgs::{self, LbfgsParams, Termination};
use crate::objective::{FrameObjective, RowsObjective};
use crate::overlaps::FiducialVector;
use crate::store::SicSolution;
use crate::verify::verify_sic;
use crate::whgroup::{zauner_unitary, CMatrix, ZaunerData};

/// Frame error the polishing phase aims for after a hit.
const POLISH_TARGET: f64 = 1e-28;
const POLISH_ITERATIONS: usize = 2_000;
/// Fractional digits of double-precision search output.
pub const SEARCH_OUTPUT_DIGITS: usize = 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subspace {
    /// Cycle through the nonempty eigenspaces, largest first.
    Auto,
    Index(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    None,
    Zauner(Subspace),
}

impl Symmetry {
    /// `none`, `zauner`, or `zauner:<m>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Symmetry::None),
            "zauner" | "zauner:auto" => Ok(Symmetry::Zauner(Subspace::Auto)),
            _ => s
                .strip_prefix("zauner:")
                .and_then(|m| m.parse::<usize>().ok())
                .filter(|&m| m < 3)
                .map(|m| Symmetry::Zauner(Subspace::Index(m)))
                .ok_or_else(|| Error::InvalidConfig(format!("unknown symmetry `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Stop outstanding restarts at the first hit. The winner may depend on scheduling.
    FirstHit,
    /// Run every restart and keep the best hit.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub dim: usize,
    pub symmetry: Symmetry,
    pub restarts: usize,
    pub master_seed: u64,
    /// Frame error counted as a hit.
    pub success_threshold: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub worker_count: usize,
    pub mode: SearchMode,
    pub memory: usize,
}

impl SearchConfig {
    /// Defaults: Zauner symmetry (auto subspace) for `d > 2`, none for `d = 2`;
    /// `12·d` restarts; threshold `1e-14`; exhaustive mode on one worker.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            symmetry: if dim > 2 { Symmetry::Zauner(Subspace::Auto) } else { Symmetry::None },
            restarts: 12 * dim,
            master_seed: 0,
            success_threshold: 1e-14,
            max_iterations: 100_000,
            gradient_tolerance: 1e-12,
            worker_count: 1,
            mode: SearchMode::Exhaustive,
            memory: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall(self.dim));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if !(self.success_threshold > 0.0) || !(self.gradient_tolerance >= 0.0) {
            return Err(Error::InvalidConfig("thresholds must be positive".into()));
        }
        if self.worker_count == 0 {
            return Err(Error::InvalidConfig("worker count must be at least 1".into()));
        }
        if self.memory == 0 {
            return Err(Error::InvalidConfig("memory must be at least 1".into()));
        }
        Ok(())
    }
}

/// Projectors and the per-restart subspace schedule for a configuration.
struct Restriction {
    zauner: Option<ZaunerData>,
    order: Vec<usize>,
}

impl Restriction {
    fn new(config: &SearchConfig) -> Result<Self> {
        match config.symmetry {
            Symmetry::None => Ok(Self { zauner: None, order: Vec::new() }),
            Symmetry::Zauner(sub) => {
                let z = zauner_unitary(config.dim)?;
                let order = match sub {
                    Subspace::Auto => z.subspaces_by_size(),
                    Subspace::Index(m) if m < 3 && z.subspace_dims[m] > 0 => vec![m],
                    Subspace::Index(m) => {
                        return Err(Error::InvalidConfig(format!(
                            "Zauner subspace {m} is empty in dimension {}",
                            config.dim
                        )))
                    }
                };
                Ok(Self { zauner: Some(z), order })
            }
        }
    }

    fn for_restart(&self, index: usize) -> Option<(usize, CMatrix)> {
        let z = self.zauner.as_ref()?;
        let m = self.order[index % self.order.len()];
        Some((m, z.projectors[m].clone()))
    }
}

fn symmetry_label(subspace: Option<usize>) -> String {
    match subspace {
        Some(m) => format!("zauner:{m}"),
        None => "none".to_string(),
    }
}

/// Haar-random unit vector: `2d` standard normals, normalized.
pub fn haar_random_fiducial(d: usize, seed: u64) -> Result<FiducialVector> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..2 * d).map(|_| StandardNormal.sample(&mut rng)).collect();
    FiducialVector::from_interleaved(&x)
}

#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    /// `Px/‖Px‖` at termination.
    pub vector: FiducialVector,
    pub frame_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Accepted objective values of the main phase.
    pub trace: Vec<f64>,
}

fn lbfgs_params(config: &SearchConfig) -> LbfgsParams {
    LbfgsParams {
        memory: config.memory,
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        value_target: Some(config.success_threshold),
        ..Default::default()
    }
}

fn run_objective(
    obj: &FrameObjective,
    x0: &[f64],
    params: &LbfgsParams,
    cancel: Option<&AtomicBool>,
) -> lbfgs::LbfgsResult {
    let f = |x: &[f64], g: &mut [f64]| obj.evaluate(x, Some(g)).unwrap_or(f64::INFINITY);
    let project = |x: &[f64]| obj.project(x);
    let project: Option<&dyn Fn(&[f64]) -> Vec<f64>> = if obj.projector().is_some() { Some(&project) } else { None };
    lbfgs::minimize(f, x0, params, project, cancel)
}

fn minimize_with(
    config: &SearchConfig,
    projector: Option<CMatrix>,
    x0: &FiducialVector,
    cancel: Option<&AtomicBool>,
    record_trace: bool,
) -> Result<MinimizeOutcome> {
    let obj = FrameObjective::new(config.dim, projector)?;
    let start = obj.project(&x0.to_interleaved());
    FiducialVector::from_interleaved(&start)
        .map_err(|_| Error::ZeroVector { after_projection: obj.projector().is_some() })?;
    let params = LbfgsParams { record_trace, ..lbfgs_params(config) };
    let main = run_objective(&obj, &start, &params, cancel);
    let mut best = (main.x.clone(), main.value);
    let mut iterations = main.iterations;
    let converged = main.value <= config.success_threshold;
    if converged && main.value > POLISH_TARGET {
        let polish = LbfgsParams {
            max_iterations: POLISH_ITERATIONS,
            gradient_tolerance: 0.0,
            value_target: Some(POLISH_TARGET),
            ..lbfgs_params(config)
        };
        let p = run_objective(&obj, &main.x, &polish, None);
        iterations += p.iterations;
        if p.value <= best.1 {
            best = (p.x, p.value);
        }
    }
    let vector = FiducialVector::from_interleaved(&obj.project(&best.0))?;
    Ok(MinimizeOutcome {
        vector,
        frame_error: best.1,
        iterations,
        converged,
        termination: main.termination,
        trace: main.trace,
    })
}

/// One L-BFGS run from `x0` under `config`, including the polish phase.
///
/// With `zauner(auto)` the largest eigenspace is used.
pub fn minimize(config: &SearchConfig, x0: &FiducialVector) -> Result<MinimizeOutcome> {
    config.validate()?;
    if x0.dim() != config.dim {
        return Err(Error::DimensionMismatch { expected: config.dim, found: x0.dim() });
    }
    let r = Restriction::new(config)?;
    minimize_with(config, r.for_restart(0).map(|(_, p)| p), x0, None, true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    pub seed: u64,
    pub symmetry: String,
    pub iterations: usize,
    pub frame_error: f64,
    /// Reached the success threshold and passed verification.
    pub hit: bool,
    pub termination: String,
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct FoundFiducial {
    pub restart: usize,
    pub seed: u64,
    pub symmetry: String,
    pub vector: FiducialVector,
    pub frame_error: f64,
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    /// One record per restart attempted, in restart order.
    pub records: Vec<RestartRecord>,
    pub best: Option<FoundFiducial>,
    pub mode: SearchMode,
    /// False when a first-hit search ran restarts concurrently.
    pub deterministic: bool,
    pub total_seconds: f64,
}

impl SearchReport {
    pub fn hits(&self) -> usize {
        self.records.iter().filter(|r| r.hit).count()
    }
}

#[derive(Clone, Debug)]
pub enum ProgressEvent<'a> {
    RestartStarted { index: usize, seed: u64 },
    RestartFinished(&'a RestartRecord),
    NewBest { index: usize, frame_error: f64 },
}

pub trait ProgressSink: Sync {
    fn event(&self, event: ProgressEvent<'_>);
}

struct Silent;

impl ProgressSink for Silent {
    fn event(&self, _: ProgressEvent<'_>) {}
}

struct RestartOutcome {
    record: RestartRecord,
    found: Option<FoundFiducial>,
}

fn run_restart(
    config: &SearchConfig,
    restriction: &Restriction,
    index: usize,
    cancel: Option<&AtomicBool>,
) -> Result<RestartOutcome> {
    let started = Instant::now();
    let seed = config.master_seed.wrapping_add(index as u64);
    let (subspace, projector) = match restriction.for_restart(index) {
        Some((m, p)) => (Some(m), Some(p)),
        None => (None, None),
    };
    let symmetry = symmetry_label(subspace);
    let x0 = haar_random_fiducial(config.dim, seed)?;
    let out = minimize_with(config, projector, &x0, cancel, false)?;
    let tolerance = 1e-6 * (config.dim as f64).sqrt();
    let hit = out.converged && verify_sic(&out.vector, tolerance).passed;
    let record = RestartRecord {
        index,
        seed,
        symmetry: symmetry.clone(),
        iterations: out.iterations,
        frame_error: out.frame_error,
        hit,
        termination: format!("{:?}", out.termination),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    let found =
        hit.then_some(FoundFiducial { restart: index, seed, symmetry, vector: out.vector, frame_error: out.frame_error });
    Ok(RestartOutcome { record, found })
}

/// Lower frame error wins; ties go to the earlier restart.
fn better(candidate: &FoundFiducial, current: Option<&FoundFiducial>) -> bool {
    match current {
        None => true,
        Some(c) => (candidate.frame_error, candidate.restart) < (c.frame_error, c.restart),
    }
}

struct Aggregate {
    records: Vec<RestartRecord>,
    best: Option<FoundFiducial>,
}

impl Aggregate {
    fn absorb(&mut self, out: RestartOutcome, sink: &dyn ProgressSink) {
        sink.event(ProgressEvent::RestartFinished(&out.record));
        self.records.push(out.record);
        if let Some(f) = out.found {
            if better(&f, self.best.as_ref()) {
                sink.event(ProgressEvent::NewBest { index: f.restart, frame_error: f.frame_error });
                self.best = Some(f);
            }
        }
    }
}

pub fn search_sic(config: &SearchConfig) -> Result<(Option<SicSolution>, SearchReport)> {
    search_sic_with_progress(config, &Silent)
}

pub fn search_sic_with_progress(
    config: &SearchConfig,
    sink: &dyn ProgressSink,
) -> Result<(Option<SicSolution>, SearchReport)> {
    config.validate()?;
    let started = Instant::now();
    let restriction = Restriction::new(config)?;
    let first_hit = config.mode == SearchMode::FirstHit;
    let cancel = AtomicBool::new(false);
    let agg = Mutex::new(Aggregate { records: Vec::new(), best: None });
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    let task = |index: usize| {
        if first_hit && cancel.load(Ordering::Relaxed) {
            return;
        }
        sink.event(ProgressEvent::RestartStarted { index, seed: config.master_seed.wrapping_add(index as u64) });
        match run_restart(config, &restriction, index, first_hit.then_some(&cancel)) {
            Ok(out) => {
                if first_hit && out.found.is_some() {
                    cancel.store(true, Ordering::Relaxed);
                }
                agg.lock().expect("aggregate lock").absorb(out, sink);
            }
            Err(e) => {
                failure.lock().expect("failure lock").get_or_insert(e);
                cancel.store(true, Ordering::Relaxed);
            }
        }
    };

    let parallel = run_restarts(config, &task)?;
    if let Some(e) = failure.into_inner().expect("failure lock") {
        return Err(e);
    }
    let mut agg = agg.into_inner().expect("aggregate lock");
    agg.records.sort_by_key(|r| r.index);
    let report = SearchReport {
        records: agg.records,
        best: agg.best,
        mode: config.mode,
        deterministic: !(first_hit && parallel),
        total_seconds: started.elapsed().as_secs_f64(),
    };
    let solution = report.best.as_ref().map(|b| {
        SicSolution::from_vector(&b.vector, &b.symmetry, SEARCH_OUTPUT_DIGITS, b.frame_error)
            .with_provenance(crate::TOOL_VERSION, config.master_seed)
    });
    Ok((solution, report))
}

/// Runs `task` for every restart index; returns whether restarts ran concurrently.
#[cfg(feature = "parallel")]
fn run_restarts(config: &SearchConfig, task: &(dyn Fn(usize) + Sync)) -> Result<bool> {
    use rayon::prelude::*;
    if config.worker_count <= 1 {
        (0..config.restarts).for_each(task);
        return Ok(false);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| (0..config.restarts).into_par_iter().with_max_len(1).for_each(task));
    Ok(true)
}

#[cfg(not(feature = "parallel"))]
fn run_restarts(config: &SearchConfig, task: &(dyn Fn(usize) + Sync)) -> Result<bool> {
    (0..config.restarts).for_each(task);
    Ok(false)
}

#[derive(Clone, Debug)]
pub struct ThreeRowOutcome {
    /// Normalized minimizer of the reduced system, if a restart reached the threshold.
    pub vector: Option<FiducialVector>,
    pub rows_residual: f64,
    /// Full frame error of `vector`, evaluated but never optimized.
    pub frame_error: f64,
    pub restarts_used: usize,
    pub seed: u64,
}

/// Minimizes only the rows `{0,1,2}` residual, restarting until it falls to
/// `config.success_threshold`, and reports the full frame error of the result.
pub fn search_3d(config: &SearchConfig) -> Result<ThreeRowOutcome> {
    config.validate()?;
    let restriction = Restriction::new(config)?;
    let params = lbfgs_params(config);
    let full = FrameObjective::new(config.dim, None)?;
    let mut last = None;
    for index in 0..config.restarts {
        let seed = config.master_seed.wrapping_add(index as u64);
        let projector = restriction.for_restart(index).map(|(_, p)| p);
        let obj = RowsObjective::new(config.dim, projector.clone())?;
        let x0 = haar_random_fiducial(config.dim, seed)?.to_interleaved();
        let f = |x: &[f64], g: &mut [f64]| obj.evaluate(x, Some(g)).unwrap_or(f64::INFINITY);
        let proj_obj = FrameObjective::new(config.dim, projector)?;
        let project = |x: &[f64]| proj_obj.project(x);
        let mut r = lbfgs::minimize(f, &proj_obj.project(&x0), &params, Some(&project), None);
        if r.value <= config.success_threshold && r.value > POLISH_TARGET {
            // The reduced system can be ill-conditioned: a point meeting the
            // threshold may still sit far from the solution it is approaching.
            let polish = LbfgsParams {
                max_iterations: POLISH_ITERATIONS,
                gradient_tolerance: 0.0,
                value_target: Some(POLISH_TARGET),
                ..params.clone()
            };
            let p = lbfgs::minimize(f, &r.x, &polish, Some(&project), None);
            if p.value <= r.value {
                r = p;
            }
            let x = obj.gauss_newton(&r.x, 8)?;
            let value = obj.evaluate(&x, None)?;
            if value <= r.value {
                r.x = x;
                r.value = value;
            }
        }
        let Ok(vector) = FiducialVector::from_interleaved(&proj_obj.project(&r.x)) else { continue };
        let frame_error = full.evaluate(&vector.to_interleaved(), None)?;
        let outcome = ThreeRowOutcome {
            vector: Some(vector),
            rows_residual: r.value,
            frame_error,
            restarts_used: index + 1,
            seed,
        };
        if r.value <= config.success_threshold {
            return Ok(outcome);
        }
        last = Some(outcome);
    }
    Ok(match last {
        Some(o) => ThreeRowOutcome { vector: None, ..o },
        None => ThreeRowOutcome {
            vector: None,
            rows_residual: f64::INFINITY,
            frame_error: f64::INFINITY,
            restarts_used: config.restarts,
            seed: config.master_seed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiducials;
    use crate::verify::verify_zauner;

    #[test]
    fn symmetry_parsing() {
        assert_eq!(Symmetry::parse("none").unwrap(), Symmetry::None);
        assert_eq!(Symmetry::parse("zauner").unwrap(), Symmetry::Zauner(Subspace::Auto));
        assert_eq!(Symmetry::parse("zauner:2").unwrap(), Symmetry::Zauner(Subspace::Index(2)));
        assert!(Symmetry::parse("zauner:3").is_err());
        assert!(Symmetry::parse("clifford").is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SearchConfig::new(3);
        assert!(c.validate().is_ok());
        c.restarts = 0;
        assert!(c.validate().is_err());
        assert!(SearchConfig::new(1).validate().is_err());
        assert_eq!(SearchConfig::new(2).symmetry, Symmetry::None);
        assert_eq!(SearchConfig::new(7).restarts, 84);
        let mut c = SearchConfig::new(3);
        c.symmetry = Symmetry::Zauner(Subspace::Index(0));
        assert!(search_sic(&c).is_err(), "subspace 0 is empty for d = 3");
    }

    #[test]
    fn haar_vectors_are_reproducible_unit_vectors() {
        let a = haar_random_fiducial(5, 42).unwrap();
        let b = haar_random_fiducial(5, 42).unwrap();
        assert_eq!(a.to_interleaved(), b.to_interleaved());
        assert_ne!(a.to_interleaved(), haar_random_fiducial(5, 43).unwrap().to_interleaved());
        let n: f64 = a.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_first_component_mean() {
        // |a_0|² ~ Beta(1, d−1) under the Haar measure.
        let d = 4;
        let n = 100_000;
        let samples: Vec<f64> =
            (0..n).map(|s| haar_random_fiducial(d, s as u64).unwrap().amplitudes()[0].norm_sqr()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = (d as f64 - 1.0) / ((d * d) as f64 * (d as f64 + 1.0));
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0 / d as f64).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn minimize_from_exact_fiducial() {
        let out = minimize(&SearchConfig::new(2), &fiducials::qubit()).unwrap();
        assert!(out.iterations <= 2);
        assert!(out.frame_error < 1e-14);
        assert!(out.converged);
    }

    #[test]
    fn minimize_trace_is_monotone() {
        let mut c = SearchConfig::new(6);
        c.symmetry = Symmetry::None;
        let out = minimize(&c, &haar_random_fiducial(6, 3).unwrap()).unwrap();
        assert!(out.trace.len() > 2);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn zauner_search_d4() {
        let mut c = SearchConfig::new(4);
        c.restarts = 50;
        c.master_seed = 11;
        let (sol, report) = search_sic(&c).unwrap();
        assert!(report.hits() >= 1);
        assert_eq!(report.records.len(), 50);
        let best = report.best.unwrap();
        assert!(best.frame_error < 1e-13);
        let m: usize = best.symmetry.strip_prefix("zauner:").unwrap().parse().unwrap();
        let z = zauner_unitary(4).unwrap();
        let checks = verify_zauner(&best.vector, &z);
        assert!(checks.projection_residuals[m] < 1e-10);
        assert!(checks.g_relation_residual < 1e-10);
        assert_eq!(sol.unwrap().dim, 4);
    }

    #[test]
    fn unrestricted_search_d3() {
        let mut c = SearchConfig::new(3);
        c.symmetry = Symmetry::None;
        c.restarts = 10;
        let (sol, report) = search_sic(&c).unwrap();
        assert!(sol.is_some());
        assert!(verify_sic(&report.best.unwrap().vector, 1e-9).passed);
    }

    #[test]
    fn first_hit_serial_stops_early() {
        let mut c = SearchConfig::new(5);
        c.mode = SearchMode::FirstHit;
        c.restarts = 40;
        let (sol, report) = search_sic(&c).unwrap();
        assert!(sol.is_some());
        assert!(report.deterministic);
        assert_eq!(report.hits(), 1);
        assert!(report.records.last().unwrap().hit);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn exhaustive_independent_of_workers() {
        let mut c = SearchConfig::new(6);
        c.restarts = 12;
        c.master_seed = 99;
        let (a, ra) = search_sic(&c).unwrap();
        c.worker_count = 4;
        let (b, rb) = search_sic(&c).unwrap();
        assert_eq!(a, b);
        assert!(rb.deterministic);
        let strip = |r: &SearchReport| r.records.iter().map(|x| (x.seed, x.frame_error, x.hit)).collect::<Vec<_>>();
        assert_eq!(strip(&ra), strip(&rb));
    }

    #[test]
    fn three_row_system_from_exact_input() {
        let r = RowsObjective::new(2, None).unwrap();
        assert!(r.evaluate(&fiducials::qubit().to_interleaved(), None).unwrap() < 1e-30);
        let mut c = SearchConfig::new(5);
        c.success_threshold = 1e-20;
        c.symmetry = Symmetry::None;
        let out = search_3d(&c).unwrap();
        assert!(out.vector.is_some());
        assert!(out.rows_residual < 1e-20);
        assert!(out.frame_error < 1e-10);
    }
}
