//! Seeded experiment orchestration and result emission.
//!
//! Every trial `i` draws from its own stream seeded with `mix64(seed, i)`, so
//! results are identical for any number of worker threads. Aggregation is by
//! trial index.

use std::io::Write;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{
    classical_lower_bounds, collect, expected_uncollected, guess_success_prob_exact, t3_success_exact, t3_trial,
    T3Config,
};
use crate::error::{Error, Result};
use crate::markov::{expected_k_bound, lower_bound_reference};
use crate::padded::{
    self, block_norms, build_ensembles, decay_sweep, fidelity_and_distance, pure_state_distance_eigen,
    support_size_distribution, t0_threshold, t2_optimal_success_exact, DecayReport, Mode,
};
use crate::qcc::{run_trial, sample_budget, Branch, Engine, QccParams, TrialRecord};
use crate::rng::stream_for;
use crate::subset::{k_subsets, Subset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Parameters shared by all experiments. Fields a command does not use are
/// ignored; fields it needs are validated before any work starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub t: Option<usize>,
    pub p: Option<u32>,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub samples: Option<usize>,
    pub engine: EngineChoice,
    pub trajectories: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    #[default]
    Categorical,
    Statevec,
}

impl From<EngineChoice> for Engine {
    fn from(e: EngineChoice) -> Engine {
        match e {
            EngineChoice::Categorical => Engine::Categorical,
            EngineChoice::Statevec => Engine::StateVector,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: None,
            k: None,
            l: None,
            t: None,
            p: None,
            delta: 0.1,
            trials: 1000,
            seed: 0,
            samples: None,
            engine: EngineChoice::default(),
            trajectories: false,
        }
    }
}

fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("--{name} is required")))
}

impl ExperimentConfig {
    fn check_trials(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn qcc_params(&self) -> Result<QccParams> {
        self.check_trials()?;
        let params = QccParams::new(require(self.n, "n")?, require(self.k, "k")?, self.delta)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.engine == EngineChoice::Statevec && params.n > 4096 {
            return Err(Error::Config("state-vector engine is limited to n <= 4096".into()));
        }
        Ok(params)
    }
}

/// One aggregated experiment result. Columns that do not apply are empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub t: Option<usize>,
    pub p: Option<u32>,
    pub delta: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub samples: Option<usize>,
    pub branch: Option<String>,
    pub successes: usize,
    pub success_rate: f64,
    pub stderr: f64,
    /// Exact success probability of the simulated strategy, when known.
    pub exact: Option<f64>,
    /// Sample budget `ell` of the learner.
    pub ell: Option<usize>,
    /// Reference curve for the expected residual distance after `samples`.
    pub expected_k_bound: Option<f64>,
    pub t0: Option<f64>,
    pub lower_bound: Option<f64>,
    pub below_budget: bool,
}

impl ResultRow {
    fn new(experiment: &str, trials: usize, seed: u64, successes: usize) -> Self {
        let rate = successes as f64 / trials as f64;
        ResultRow {
            experiment: experiment.into(),
            n: None,
            k: None,
            l: None,
            t: None,
            p: None,
            delta: None,
            trials,
            seed,
            samples: None,
            branch: None,
            successes,
            success_rate: rate,
            stderr: standard_error(rate, trials),
            exact: None,
            ell: None,
            expected_k_bound: None,
            t0: None,
            lower_bound: None,
            below_budget: false,
        }
    }

    pub fn failure_rate(&self) -> f64 {
        1.0 - self.success_rate
    }
}

pub fn standard_error(rate: f64, trials: usize) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

/// `(J_t, L_t)` along one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub trial: usize,
    pub step: usize,
    pub rogue: usize,
    pub uncollected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QccRun {
    pub row: ResultRow,
    pub branch: Branch,
    pub records: Vec<TrialRecord>,
}

impl QccRun {
    pub fn trajectories(&self) -> Vec<TrajectoryRow> {
        self.records
            .iter()
            .enumerate()
            .flat_map(|(trial, rec)| {
                rec.walk
                    .iter()
                    .enumerate()
                    .map(move |(step, &(rogue, uncollected))| TrajectoryRow { trial, step, rogue, uncollected })
            })
            .collect()
    }
}

fn run_trials<T: Send>(trials: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..trials).into_par_iter().map(f).collect()
}

fn lower_reference(n: usize, k: usize, delta: f64) -> Option<f64> {
    lower_bound_reference(n, k, delta).ok().map(|r| r.lower_value)
}

fn qcc_row(cfg: &ExperimentConfig, params: &QccParams, samples: usize, records: &[TrialRecord]) -> ResultRow {
    let (branch, ell) = sample_budget(params);
    let successes = records.iter().filter(|r| r.success).count();
    let mut row = ResultRow::new("qcc", cfg.trials, cfg.seed, successes);
    row.n = Some(params.n);
    row.k = Some(params.k);
    row.delta = Some(params.delta);
    row.samples = Some(samples);
    row.branch = Some(branch.as_str().into());
    row.ell = Some(ell);
    row.expected_k_bound = Some(match branch {
        Branch::Complement => expected_k_bound(params.n, params.k, samples).unwrap_or(f64::NAN),
        Branch::Classical => expected_uncollected(params.k, samples),
    });
    row.lower_bound = lower_reference(params.n, params.k, params.delta);
    row.below_budget = samples < ell;
    row
}

/// Runs `trials` independent learners against uniformly random hidden sets.
pub fn run_qcc(cfg: &ExperimentConfig) -> Result<QccRun> {
    let params = cfg.qcc_params()?;
    let (branch, ell) = sample_budget(&params);
    let samples = cfg.samples.unwrap_or(ell);
    let engine = Engine::from(cfg.engine);
    let records = run_trials(cfg.trials, |i| {
        let mut rng = stream_for(cfg.seed, i as u64);
        let s = Subset::random(params.n, params.k, &mut rng)?;
        Ok(run_trial(&params, &s, Some(samples), engine, &mut rng)?.1)
    })?;
    Ok(QccRun { row: qcc_row(cfg, &params, samples, &records), branch, records })
}

/// Parses `start:end[:step]` (inclusive) or a single count.
pub fn parse_range(text: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad sample range `{text}`")));
    let (start, end, step) = match parts.as_slice() {
        [single] => {
            let v = num(single)?;
            (v, v, 1)
        }
        [a, b] => (num(a)?, num(b)?, 1),
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(Error::Config(format!("bad sample range `{text}`"))),
    };
    if step == 0 || start > end {
        return Err(Error::Config(format!("sample range `{text}` is empty")));
    }
    Ok((start..=end).step_by(step).collect())
}

/// Success-probability curve over sample counts. Every point reuses the same
/// per-trial streams.
pub fn sweep(cfg: &ExperimentConfig, samples: &[usize]) -> Result<Vec<ResultRow>> {
    if samples.is_empty() {
        return Err(Error::Config("sample range is empty".into()));
    }
    samples
        .iter()
        .map(|&s| {
            let point = ExperimentConfig { samples: Some(s), ..cfg.clone() };
            let mut row = run_qcc(&point)?.row;
            row.experiment = "qcc-sweep".into();
            Ok(row)
        })
        .collect()
}

/// Monte-Carlo mean of `K_t = J_t + L_t` next to its envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistancePoint {
    pub step: usize,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
}

pub fn distance_curve(cfg: &ExperimentConfig) -> Result<Vec<DistancePoint>> {
    let run = run_qcc(cfg)?;
    if run.branch != Branch::Complement {
        return Err(Error::Config("the distance envelope applies to the complement branch only".into()));
    }
    let params = cfg.qcc_params()?;
    let steps = run.row.samples.unwrap_or(0);
    let trials = run.records.len() as f64;
    (0..=steps)
        .map(|t| {
            let values: Vec<f64> = run
                .records
                .iter()
                .map(|r| {
                    let (j, l) = r.walk.get(t).or(r.walk.last()).copied().unwrap_or((0, 0));
                    (j + l) as f64
                })
                .collect();
            let mean = values.iter().sum::<f64>() / trials;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1.0).max(1.0);
            Ok(DistancePoint { step: t, mean, stderr: (var / trials).sqrt(), bound: expected_k_bound(params.n, params.k, t)? })
        })
        .collect()
}

/// Classical collection with `t` samples (default: the classical learner's
/// budget). Success means at least `k - l` distinct coupons.
pub fn run_classical(cfg: &ExperimentConfig) -> Result<ResultRow> {
    cfg.check_trials()?;
    let k = require(cfg.k, "k")?;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1), got {}", cfg.delta)));
    }
    let l = cfg.l.unwrap_or(0);
    if l > k {
        return Err(Error::Config(format!("l={l} exceeds k={k}")));
    }
    let kf = k as f64;
    let ell = (kf * kf.ln() + kf * (1.0 / cfg.delta).ln()).ceil().max(1.0) as usize;
    let t = cfg.samples.or(cfg.t).unwrap_or(ell);
    let hits = run_trials(cfg.trials, |i| {
        let mut rng = stream_for(cfg.seed, i as u64);
        Ok(collect(k, t, &mut rng)?.distinct_count >= k - l)
    })?;
    let mut row = ResultRow::new("classical", cfg.trials, cfg.seed, hits.iter().filter(|&&h| h).count());
    row.k = Some(k);
    row.l = Some(l);
    row.delta = Some(cfg.delta);
    row.samples = Some(t);
    row.ell = Some(ell);
    row.expected_k_bound = Some(expected_uncollected(k, t));
    if cfg.delta < 0.5 {
        row.lower_bound = classical_lower_bounds(k, l, cfg.delta).ok().map(|(c, _)| c);
    }
    row.below_budget = t < ell;
    Ok(row)
}

/// Collect-then-guess estimation (`n` defaults to `k + 5l`). With `p` set the
/// row also carries the exact restricted-ensemble success probability in
/// `exact`, otherwise the exact success of the classical strategy.
pub fn run_t3(cfg: &ExperimentConfig) -> Result<ResultRow> {
    cfg.check_trials()?;
    let k = require(cfg.k, "k")?;
    let l = require(cfg.l, "l")?;
    let t = require(cfg.t.or(cfg.samples), "t")?;
    let t3 = match cfg.n {
        Some(n) => T3Config::new(n, k, l, t),
        None => T3Config::padded_default(k, l, t),
    }
    .map_err(|e| Error::Config(e.to_string()))?;
    let hits = run_trials(cfg.trials, |i| {
        let mut rng = stream_for(cfg.seed, i as u64);
        Ok(t3_trial(&t3, &mut rng).success)
    })?;
    let mut row = ResultRow::new("t3", cfg.trials, cfg.seed, hits.iter().filter(|&&h| h).count());
    row.n = Some(t3.n);
    row.k = Some(k);
    row.l = Some(l);
    row.t = Some(t);
    row.delta = Some(cfg.delta);
    row.p = cfg.p;
    row.exact = Some(match cfg.p {
        Some(p) => t2_optimal_success_exact(t3.n, k, l, t, p)?.to_f64().unwrap_or(f64::NAN),
        None => t3_success_exact(&t3)?.to_f64().unwrap_or(f64::NAN),
    });
    if l >= 1 {
        row.t0 = t0_threshold(k, l, cfg.delta).ok();
    }
    if cfg.delta < 0.5 {
        row.lower_bound = classical_lower_bounds(k, l, cfg.delta).ok().map(|(_, learn)| learn);
    }
    Ok(row)
}

/// Exact random-guess success over `l` in `[10m, 20m]` for each `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessRow {
    pub l: usize,
    pub m: usize,
    pub exact: String,
    pub value: f64,
    pub at_most_half: bool,
}

pub fn run_guess(ms: &[usize]) -> Result<Vec<GuessRow>> {
    let mut rows = Vec::new();
    for &m in ms {
        for l in 10 * m..=20 * m {
            let q = guess_success_prob_exact(l, m)?;
            let value = q.to_f64().unwrap_or(f64::NAN);
            let half = num_rational::BigRational::new(1.into(), 2.into());
            rows.push(GuessRow { l, m, exact: q.to_string(), at_most_half: q <= half, value });
        }
    }
    Ok(rows)
}

/// Analytic figures for one `(n, k, delta)` and sample count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub branch: String,
    pub ell: usize,
    pub samples: usize,
    pub expected_k_curve: f64,
    pub lower_case: Option<String>,
    pub lower_bound: Option<f64>,
    pub lower_certified: Option<bool>,
    pub c0: Option<f64>,
}

pub fn bounds_eval(cfg: &ExperimentConfig) -> Result<BoundsRow> {
    let params = QccParams::new(require(cfg.n, "n")?, require(cfg.k, "k")?, cfg.delta)
        .map_err(|e| Error::Config(e.to_string()))?;
    let (branch, ell) = sample_budget(&params);
    let samples = cfg.samples.unwrap_or(ell);
    let reference = lower_bound_reference(params.n, params.k, params.delta).ok();
    Ok(BoundsRow {
        n: params.n,
        k: params.k,
        delta: params.delta,
        branch: branch.as_str().into(),
        ell,
        samples,
        expected_k_curve: match branch {
            Branch::Complement => expected_k_bound(params.n, params.k, samples)?,
            Branch::Classical => expected_uncollected(params.k, samples),
        },
        lower_case: reference.as_ref().map(|r| format!("{:?}", r.lower_case)),
        lower_bound: reference.as_ref().map(|r| r.lower_value),
        lower_certified: reference.as_ref().map(|r| r.lower_certified),
        c0: reference.as_ref().map(|r| r.c0),
    })
}

/// Grid for [`verify_padded`]. Combinations with `k > n` are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaddedGrid {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub ts: Vec<usize>,
    pub ps: Vec<u32>,
}

impl Default for PaddedGrid {
    fn default() -> Self {
        PaddedGrid { ns: vec![2, 3, 4], ks: vec![2, 3], ts: vec![0, 1, 2, 3], ps: vec![2, 3] }
    }
}

impl PaddedGrid {
    pub fn points(&self) -> Vec<(usize, usize, usize, u32)> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &k in &self.ks {
                if k == 0 || k > n {
                    continue;
                }
                for &t in &self.ts {
                    for &p in &self.ps {
                        out.push((n, k, t, p));
                    }
                }
            }
        }
        out
    }
}

/// Weight of the blocks excluded from the fidelity bound, next to the share of
/// sample sequences that carry a zero pad.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerateRow {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub p: u32,
    pub degenerate_weight: f64,
    pub zero_pad_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PaddedReport {
    pub checks: usize,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub degenerate: Vec<DegenerateRow>,
    /// Largest `1/2 ||rho - rho'||_1 / sqrt(k^t / p)` among dense instances.
    pub max_distance_ratio: Option<f64>,
    pub decay: Option<DecayReport>,
}

impl PaddedReport {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            1
        }
    }

    fn fail(&mut self, what: impl Into<String>) {
        self.violations.push(what.into());
    }
}

/// Number of pad sequences in `N_p^t` with at least one zero coordinate,
/// by enumeration.
fn zero_pad_count(t: usize, p: u32) -> u64 {
    let mut with_zero = 0u64;
    padded::signature::for_each_sequence(p as usize, t, |x| {
        if x.contains(&0) {
            with_zero += 1;
        }
    });
    with_zero
}

/// Runs every padded-ensemble invariant over the grid.
pub fn verify_padded(grid: &PaddedGrid, inject_fault: bool) -> Result<PaddedReport> {
    let mut report = PaddedReport::default();
    let points = grid.points();
    if points.is_empty() {
        report.warnings.push("empty grid: nothing to verify".into());
        return Ok(report);
    }
    for (idx, &(n, k, t, p)) in points.iter().enumerate() {
        let counting = if inject_fault && idx == 0 {
            padded::blocks::verify_counting_identities_with_fault(n, k, t, p)?
        } else {
            padded::verify_counting_identities(n, k, t, p)?
        };
        report.checks += counting.checks;
        for v in counting.violations {
            let b = v.b.map(|b| b.to_string()).unwrap_or_else(|| "-".into());
            report.fail(format!(
                "{:?} fails for n={n} k={k} t={t} p={p} S={} b={b}: {} != {}",
                v.identity, v.s, v.lhs, v.rhs
            ));
        }
        check_blocks(&mut report, n, k, t, p)?;
        if t >= 1 && (n * p as usize).pow(t as u32) <= padded::ensemble::MAX_DENSE_DIM {
            check_ensembles(&mut report, n, k, t, p);
        }
        if n == points.iter().map(|pt| pt.0).filter(|&m| m >= k).min().unwrap_or(n) {
            let dist = support_size_distribution(k, t, p, Mode::Exact)?;
            report.checks += 1;
            if dist.dominance_gap() > 1e-12 {
                report.fail(format!("support size not dominated by range size for k={k} t={t} p={p}"));
            }
        }
    }
    let ks: Vec<usize> = grid.ks.iter().copied().filter(|&k| k >= 1).collect();
    let ts: Vec<usize> = grid.ts.iter().copied().filter(|&t| t >= 1).collect();
    if !ks.is_empty() && !ts.is_empty() {
        report.decay = Some(decay_sweep(&ks, &ts, &[2, 3, 5, 11, 101])?);
    }
    Ok(report)
}

fn check_blocks(report: &mut PaddedReport, n: usize, k: usize, t: usize, p: u32) -> Result<()> {
    // Weights are tracked as integer counts over k^t p^t pairs.
    let mut degenerate_units = None;
    for (idx, s) in k_subsets(n, k).iter().enumerate() {
        let table = block_norms(s, t, p, n)?;
        let mut units = 0u64;
        for (b, norms) in &table.entries {
            report.checks += 1;
            let fid = match fidelity_and_distance(s, b, t, p) {
                Ok(fid) => fid,
                Err(e) => {
                    report.fail(format!("fidelity check for n={n} S={s} t={t} p={p} b={b}: {e}"));
                    continue;
                }
            };
            if fid.degenerate {
                units += norms.norm_s;
                continue;
            }
            if idx == 0 {
                match pure_state_distance_eigen(s, b, t, p) {
                    Ok(eig) if (eig - fid.trace_distance).abs() > 1e-10 => report.fail(format!(
                        "eigenvalue distance {eig} differs from {} for S={s} t={t} p={p} b={b}",
                        fid.trace_distance
                    )),
                    Ok(_) | Err(Error::BudgetExceeded(_)) => {}
                    Err(e) => report.fail(format!("eigenvalue distance for S={s} b={b}: {e}")),
                }
            }
        }
        match degenerate_units {
            None => degenerate_units = Some(units),
            Some(u) if u != units => {
                report.fail(format!("degenerate weight depends on S for n={n} k={k} t={t} p={p}"));
            }
            _ => {}
        }
    }
    let units = degenerate_units.unwrap_or(0);
    let kt = (k as u64).pow(t as u32);
    let pt = (p as u64).pow(t as u32);
    let zero_pad_units = zero_pad_count(t, p) * kt;
    report.checks += 1;
    if units > zero_pad_units {
        report.fail(format!(
            "degenerate weight {units}/{} exceeds zero-pad fraction {zero_pad_units}/{} for k={k} t={t} p={p}",
            kt * pt,
            kt * pt
        ));
    }
    let total = (kt * pt) as f64;
    report.degenerate.push(DegenerateRow {
        n,
        k,
        t,
        p,
        degenerate_weight: units as f64 / total,
        zero_pad_fraction: zero_pad_units as f64 / total,
    });
    Ok(())
}

fn check_ensembles(report: &mut PaddedReport, n: usize, k: usize, t: usize, p: u32) {
    let s = Subset::new(n, 0..k).expect("k <= n");
    report.checks += 1;
    match build_ensembles(&s, t, p, n) {
        Ok(ens) => {
            let kt_over_p = (k as f64).powi(t as i32) / p as f64;
            if ens.half_trace_distance > ens.distance_bound + 1e-12 {
                report.fail(format!(
                    "1/2 ||rho - rho'||_1 = {} exceeds {} for n={n} k={k} t={t} p={p}",
                    ens.half_trace_distance, ens.distance_bound
                ));
            }
            if ens.trace_deficit() > kt_over_p + 1e-12 {
                report.fail(format!("trace deficit {} exceeds k^t/p for n={n} k={k} t={t} p={p}", ens.trace_deficit()));
            }
            let ratio = ens.half_trace_distance / ens.distance_bound;
            report.max_distance_ratio = Some(report.max_distance_ratio.map_or(ratio, |r: f64| r.max(ratio)));
        }
        Err(e) => report.fail(format!("ensemble reconstruction for n={n} k={k} t={t} p={p}: {e}")),
    }
}

/// One block of a [`padded::BlockTable`], flattened for output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRow {
    pub signature: String,
    pub support_size: usize,
    pub norm_s: u64,
    pub norm_restricted: u64,
    pub weight: f64,
    pub ratio: String,
    pub trace_distance: f64,
    pub degenerate: bool,
}

pub fn padded_weights(cfg: &ExperimentConfig) -> Result<Vec<BlockRow>> {
    let n = require(cfg.n, "n")?;
    let k = require(cfg.k, "k")?;
    let t = require(cfg.t, "t")?;
    let p = require(cfg.p, "p")?;
    if k == 0 || k > n || p < 2 {
        return Err(Error::Config(format!("need 1 <= k <= n and p >= 2, got n={n}, k={k}, p={p}")));
    }
    let s = Subset::new(n, 0..k)?;
    let table = block_norms(&s, t, p, n)?;
    table
        .entries
        .iter()
        .map(|(b, norms)| {
            let fid = fidelity_and_distance(&s, b, t, p)?;
            Ok(BlockRow {
                signature: b.to_string(),
                support_size: b.support_size(),
                norm_s: norms.norm_s,
                norm_restricted: norms.norm_restricted,
                weight: table.weight(b),
                ratio: fid.ratio.to_string(),
                trace_distance: fid.trace_distance,
                degenerate: fid.degenerate,
            })
        })
        .collect()
}

/// Rows that can be written as CSV.
pub trait CsvRecord {
    fn header() -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

/// Floats use 17 significant digits so they round-trip exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

impl CsvRecord for ResultRow {
    fn header() -> Vec<&'static str> {
        vec![
            "experiment", "n", "k", "l", "t", "p", "delta", "trials", "seed", "samples", "branch", "successes",
            "success_rate", "stderr", "exact", "ell", "expected_k_bound", "t0", "lower_bound", "below_budget",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            opt(&self.n),
            opt(&self.k),
            opt(&self.l),
            opt(&self.t),
            opt(&self.p),
            opt_float(self.delta),
            self.trials.to_string(),
            self.seed.to_string(),
            opt(&self.samples),
            opt(&self.branch),
            self.successes.to_string(),
            fmt_float(self.success_rate),
            fmt_float(self.stderr),
            opt_float(self.exact),
            opt(&self.ell),
            opt_float(self.expected_k_bound),
            opt_float(self.t0),
            opt_float(self.lower_bound),
            self.below_budget.to_string(),
        ]
    }
}

impl CsvRecord for TrajectoryRow {
    fn header() -> Vec<&'static str> {
        vec!["trial", "step", "rogue", "uncollected"]
    }

    fn record(&self) -> Vec<String> {
        vec![self.trial.to_string(), self.step.to_string(), self.rogue.to_string(), self.uncollected.to_string()]
    }
}

impl CsvRecord for GuessRow {
    fn header() -> Vec<&'static str> {
        vec!["l", "m", "exact", "value", "at_most_half"]
    }

    fn record(&self) -> Vec<String> {
        vec![self.l.to_string(), self.m.to_string(), self.exact.clone(), fmt_float(self.value), self.at_most_half.to_string()]
    }
}

impl CsvRecord for BoundsRow {
    fn header() -> Vec<&'static str> {
        vec![
            "n", "k", "delta", "branch", "ell", "samples", "expected_k_curve", "lower_case", "lower_bound",
            "lower_certified", "c0",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            fmt_float(self.delta),
            self.branch.clone(),
            self.ell.to_string(),
            self.samples.to_string(),
            fmt_float(self.expected_k_curve),
            opt(&self.lower_case),
            opt_float(self.lower_bound),
            opt(&self.lower_certified),
            opt_float(self.c0),
        ]
    }
}

impl CsvRecord for BlockRow {
    fn header() -> Vec<&'static str> {
        vec!["signature", "support_size", "norm_s", "norm_restricted", "weight", "ratio", "trace_distance", "degenerate"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.signature.clone(),
            self.support_size.to_string(),
            self.norm_s.to_string(),
            self.norm_restricted.to_string(),
            fmt_float(self.weight),
            self.ratio.clone(),
            fmt_float(self.trace_distance),
            self.degenerate.to_string(),
        ]
    }
}

impl CsvRecord for DegenerateRow {
    fn header() -> Vec<&'static str> {
        vec!["n", "k", "t", "p", "degenerate_weight", "zero_pad_fraction"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.t.to_string(),
            self.p.to_string(),
            fmt_float(self.degenerate_weight),
            fmt_float(self.zero_pad_fraction),
        ]
    }
}

pub fn write_csv<T: CsvRecord, W: Write>(rows: &[T], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(T::header()).map_err(io)?;
    for row in rows {
        w.write_record(row.record()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_rows<T: CsvRecord + Serialize, W: Write>(rows: &[T], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}
