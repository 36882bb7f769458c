//! Monte Carlo sweeps over `(N, x)`, oracle validation and result I/O.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{m_coefficient, PhaseConstants};
use crate::error::{Error, Result};
use crate::hypercube::{
    count_accessible_paths, enumerate_sequences, is_accessible_bfs, is_accessible_with,
    sample_field, walk_from_origin, AccessScratch, FitnessField, VertexId, MAX_SIM_DIM,
};
use crate::nk::{build_landscape, exhaustive_max};
use crate::rng::{derive_key, CounterRng};
use crate::sequence::{
    hamming_profile, interval_stats, is_good, pmf_mu_kn, sample_continuous, GoodnessConfig,
    GoodnessMode, UpdateSequence,
};
use crate::stats::{weighted_slope, wilson_interval, Z95};

pub const CSV_HEADER: &str = "N,beta,x,offset,trials,successes,p_hat,ci_low,ci_high,seed,wall_time";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    TransitionSweep,
    CriticalWindow,
    NkExperiment,
    OracleValidation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetMode {
    /// `x = x_c(N) + offset`.
    Absolute,
    /// `x = x_c(N) + offset / N`.
    Scaled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub kind: PlanKind,
    pub n_list: Vec<usize>,
    pub beta: f64,
    pub offsets: Vec<f64>,
    pub offset_mode: OffsetMode,
    pub trials: u64,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub thread_count: usize,
    /// Leave `wall_time` empty so reruns are byte-identical.
    pub redact_timing: bool,
}

impl ExperimentPlan {
    pub fn transition_sweep(
        n_list: Vec<usize>,
        beta: f64,
        offsets: Vec<f64>,
        trials: u64,
        master_seed: u64,
    ) -> Self {
        Self {
            kind: PlanKind::TransitionSweep,
            n_list,
            beta,
            offsets,
            offset_mode: OffsetMode::Absolute,
            trials,
            master_seed,
            thread_count: 0,
            redact_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.offsets.is_empty() {
            return Err(Error::domain("plan needs at least one N and one offset"));
        }
        if let Some(&n) = self
            .n_list
            .iter()
            .find(|&&n| !(2..=MAX_SIM_DIM).contains(&n))
        {
            return Err(Error::SizeCap {
                what: "N",
                value: n,
                max: MAX_SIM_DIM,
            });
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::domain(format!(
                "beta must lie in (0, 1], got {}",
                self.beta
            )));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials must be positive"));
        }
        if self.offsets.iter().any(|o| !o.is_finite()) {
            return Err(Error::domain("offsets must be finite"));
        }
        Ok(())
    }
}

/// Target distance `n = floor(beta N)`, at least 1.
pub fn target_distance(n_dim: usize, beta: f64) -> usize {
    ((beta * n_dim as f64 + 1e-9).floor() as usize).clamp(1, n_dim)
}

/// Clamps a gap into `(0, 1]`.
pub fn clamp_gap(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// Effective `n / N`.
    pub beta: f64,
    pub x: f64,
    pub offset: f64,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Cell seed; rerun with `estimate_accessibility(N, n, x, trials, seed)`.
    pub seed: u64,
    /// Seconds; `None` when timing is redacted.
    pub wall_time: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Fraction of accessible fields among `trials` independent samples; trial
/// `t` uses the field seed `derive_key(seed, [t])`.
pub fn estimate_accessibility(
    n_dim: usize,
    n: usize,
    x: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::domain("trials must be positive"));
    }
    sample_field(n_dim, n, x, seed)?;
    let mut scratch = AccessScratch::new();
    let mut successes = 0;
    for t in 0..trials {
        let field = sample_field(n_dim, n, x, derive_key(seed, &[t]))?;
        successes += u64::from(is_accessible_with(&field, &mut scratch).accessible);
    }
    let (ci_low, ci_high) = wilson_interval(successes, trials, Z95);
    Ok(Estimate {
        successes,
        trials,
        p_hat: successes as f64 / trials as f64,
        ci_low,
        ci_high,
    })
}

fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Evaluates every `(N, offset)` cell of the plan. Cells run in parallel;
/// each has its own substream `derive_key(master, [N, offset_index])`, so
/// results do not depend on the thread count.
pub fn run_transition_sweep(plan: &ExperimentPlan) -> Result<SweepResult> {
    plan.validate()?;
    let constants = PhaseConstants::new(plan.beta, 0.05)?;
    let mut cells = Vec::new();
    for &n_dim in &plan.n_list {
        let n = target_distance(n_dim, plan.beta);
        let x_c = PhaseConstants::for_distance(n, n_dim, constants.epsilon)?.critical_x(n_dim)?;
        for (oi, &offset) in plan.offsets.iter().enumerate() {
            let shift = match plan.offset_mode {
                OffsetMode::Absolute => offset,
                OffsetMode::Scaled => offset / n_dim as f64,
            };
            cells.push((n_dim, n, oi, offset, clamp_gap(x_c + shift)));
        }
    }
    let rows: Vec<Result<SweepRow>> = with_pool(plan.thread_count, || {
        cells
            .par_iter()
            .map(|&(n_dim, n, oi, offset, x)| {
                let seed = derive_key(plan.master_seed, &[n_dim as u64, oi as u64]);
                let start = Instant::now();
                let est = estimate_accessibility(n_dim, n, x, plan.trials, seed)?;
                let elapsed = start.elapsed().as_secs_f64().max(1e-9);
                Ok(SweepRow {
                    n: n_dim,
                    beta: n as f64 / n_dim as f64,
                    x,
                    offset,
                    trials: est.trials,
                    successes: est.successes,
                    p_hat: est.p_hat,
                    ci_low: est.ci_low,
                    ci_high: est.ci_high,
                    seed,
                    wall_time: (!plan.redact_timing).then_some(elapsed),
                })
            })
            .collect()
    })?;
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(SweepResult { rows })
}

fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.x.total_cmp(&b.x))
            .then(a.offset.total_cmp(&b.offset))
    });
}

impl SweepResult {
    pub fn rows_for(&self, n_dim: usize) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.n == n_dim).collect()
    }

    pub fn dimensions(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.dedup();
        ns
    }
}

/// Gap at which `p_hat` first crosses 1/2, by linear interpolation between
/// the bracketing grid points; `None` without a bracket.
pub fn crossing_point(result: &SweepResult, n_dim: usize) -> Option<f64> {
    let rows = result.rows_for(n_dim);
    rows.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.p_hat < 0.5 && b.p_hat >= 0.5 {
            Some(a.x + (0.5 - a.p_hat) * (b.x - a.x) / (b.p_hat - a.p_hat))
        } else {
            None
        }
    })
}

/// Least-squares slope of `p_hat` against `x` over rows with
/// `|x - center| <= half_width`, weighted by binomial variances; returns
/// `(slope, standard error)`.
pub fn transition_slope(
    result: &SweepResult,
    n_dim: usize,
    center: f64,
    half_width: f64,
) -> Result<(f64, f64)> {
    let rows: Vec<&SweepRow> = result
        .rows_for(n_dim)
        .into_iter()
        .filter(|r| (r.x - center).abs() <= half_width + 1e-12)
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let ps: Vec<f64> = rows.iter().map(|r| r.p_hat).collect();
    let vars: Vec<f64> = rows
        .iter()
        .map(|r| {
            // floor p away from 0/1 so empty cells keep a finite weight
            let p = r
                .p_hat
                .clamp(0.5 / r.trials as f64, 1.0 - 0.5 / r.trials as f64);
            p * (1.0 - p) / r.trials as f64
        })
        .collect();
    weighted_slope(&xs, &ps, &vars)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub result: SweepResult,
    pub bounds: (f64, f64),
    /// Every Wilson interval lies strictly inside `bounds`.
    pub inside: bool,
}

/// Estimates at `x_c(N) +- delta / N` (just `x_c` when `delta = 0`).
pub fn run_critical_window(
    n_list: &[usize],
    beta: f64,
    delta: f64,
    trials: u64,
    seed: u64,
    threads: usize,
    bounds: (f64, f64),
) -> Result<WindowReport> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::domain(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    let offsets = if delta == 0.0 {
        vec![0.0]
    } else {
        vec![-delta, delta]
    };
    let plan = ExperimentPlan {
        kind: PlanKind::CriticalWindow,
        n_list: n_list.to_vec(),
        beta,
        offsets,
        offset_mode: OffsetMode::Scaled,
        trials,
        master_seed: seed,
        thread_count: threads,
        redact_timing: false,
    };
    let result = run_transition_sweep(&plan)?;
    let inside = result
        .rows
        .iter()
        .all(|r| r.ci_low > bounds.0 && r.ci_high < bounds.1);
    Ok(WindowReport {
        result,
        bounds,
        inside,
    })
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(result: &SweepResult) -> String {
    let mut rows = result.rows.clone();
    sort_rows(&mut rows);
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt_float(r.beta),
            fmt_float(r.x),
            fmt_float(r.offset),
            r.trials,
            r.successes,
            fmt_float(r.p_hat),
            fmt_float(r.ci_low),
            fmt_float(r.ci_high),
            r.seed,
            r.wall_time.map(fmt_float).unwrap_or_default()
        );
    }
    out
}

pub fn to_json(result: &SweepResult) -> Result<String> {
    let mut sorted = result.clone();
    sort_rows(&mut sorted.rows);
    let mut s = serde_json::to_string_pretty(&sorted).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize, name: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} value {field:?}")))
}

pub fn from_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(Error::Parse(format!(
                "line {lineno}: expected 11 fields, got {}",
                f.len()
            )));
        }
        rows.push(SweepRow {
            n: parse_field(f[0], lineno, "N")?,
            beta: parse_field(f[1], lineno, "beta")?,
            x: parse_field(f[2], lineno, "x")?,
            offset: parse_field(f[3], lineno, "offset")?,
            trials: parse_field(f[4], lineno, "trials")?,
            successes: parse_field(f[5], lineno, "successes")?,
            p_hat: parse_field(f[6], lineno, "p_hat")?,
            ci_low: parse_field(f[7], lineno, "ci_low")?,
            ci_high: parse_field(f[8], lineno, "ci_high")?,
            seed: parse_field(f[9], lineno, "seed")?,
            wall_time: if f[10].trim().is_empty() {
                None
            } else {
                Some(parse_field(f[10], lineno, "wall_time")?)
            },
        });
    }
    Ok(SweepResult { rows })
}

pub fn from_json(text: &str) -> Result<SweepResult> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Writes `result` to `path` (sorted rows, newline-terminated).
pub fn emit(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(result),
        OutputFormat::Json => to_json(result)?,
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse(path: &Path, format: OutputFormat) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        OutputFormat::Csv => from_csv(&text),
        OutputFormat::Json => from_json(&text),
    }
}

/// Deliberate defects for checking that the oracle suite catches them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Treats coordinate `n` as odd when enumerating sequences.
    ParityOffByOne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// First counterexample, if any.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub checks: Vec<CheckOutcome>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn outcome(name: &str, cases: usize, witness: Option<String>) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: witness.is_none(),
        cases,
        witness,
    }
}

fn check_enumeration(fault: Option<Fault>) -> Result<CheckOutcome> {
    let mut cases = 0;
    for dim in 0..=4 {
        for n in 0..=dim {
            for ell in 0..=8 {
                cases += 1;
                let odd = match fault {
                    Some(Fault::ParityOffByOne) => (n + 1).min(dim),
                    None => n,
                };
                let seqs = enumerate_sequences(odd, dim, ell)?;
                let expected = m_coefficient(n, dim, ell)?;
                if seqs.len() as u128 != expected {
                    return Ok(outcome(
                        "enumeration = m_coefficient",
                        cases,
                        Some(format!(
                            "(n={n}, N={dim}, ell={ell}): enumerated {} vs M = {expected}",
                            seqs.len()
                        )),
                    ));
                }
                let target = VertexId::prefix(n);
                let mut ends = std::collections::HashSet::new();
                for s in &seqs {
                    let walk = walk_from_origin(s);
                    if *walk.last().unwrap() != target || !ends.insert(walk) {
                        return Ok(outcome(
                            "enumeration = m_coefficient",
                            cases,
                            Some(format!(
                                "(n={n}, N={dim}, ell={ell}): sequence {s:?} breaks the bijection"
                            )),
                        ));
                    }
                }
            }
        }
    }
    Ok(outcome("enumeration = m_coefficient", cases, None))
}

fn check_count_vs_access(seed: u64, fields: usize) -> Result<CheckOutcome> {
    let mut scratch = AccessScratch::new();
    let mut rng = CounterRng::new(derive_key(seed, &[1]));
    for i in 0..fields {
        let dim = rng.random_range(1..=8usize);
        let n = rng.random_range(1..=dim);
        let x = 0.05 + 0.95 * rng.random::<f64>();
        let field = sample_field(dim, n, x, rng.random())?;
        let count = count_accessible_paths(&field)?;
        let split = is_accessible_with(&field, &mut scratch).accessible;
        let bfs = is_accessible_bfs(&field).accessible;
        if (count > 0) != split || split != bfs {
            return Ok(outcome(
                "count > 0 <=> accessible",
                i + 1,
                Some(format!(
                    "(N={dim}, n={n}, x={x}): count {count}, split {split}, bfs {bfs}"
                )),
            ));
        }
    }
    Ok(outcome("count > 0 <=> accessible", fields, None))
}

/// All sequences over `{0, 1}` of length `ell`, as bit patterns.
fn binary_sequences(ell: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1u32 << ell).map(move |p| (0..ell).map(|i| ((p >> i) & 1) as usize).collect())
}

fn check_pmf_normalization() -> Result<CheckOutcome> {
    let (dim, x) = (2usize, 0.4f64);
    let mut cases = 0;
    for n in 0..=dim {
        for k in 0..dim {
            cases += 1;
            let mut mass = 0.0;
            for ell in 1..=6 {
                for seq in binary_sequences(ell) {
                    if seq[ell - 1] == k
                        && UpdateSequence::new(dim, n, seq.clone())?.reaches_target()
                    {
                        mass += pmf_mu_kn(&seq, k, n, dim, x)?;
                    }
                }
            }
            // Sequences of length l ending in k correspond to free prefixes of
            // length l - 1 with k's parity class flipped.
            let (odd, sinh_pow, cosh_pow) = if k < n {
                (n - 1, n as i32 - 1, (dim - n) as i32 + 1)
            } else {
                (n + 1, n as i32 + 1, (dim - n) as i32 - 1)
            };
            let norm = x.sinh().powi(sinh_pow) * x.cosh().powi(cosh_pow);
            let mut tail = 0.0;
            let mut term = 1.0; // x^(l-1) / (l-1)!
            for ell in 1..=60usize {
                if ell > 1 {
                    term *= x / (ell - 1) as f64;
                }
                if ell > 6 {
                    tail += m_coefficient(odd, dim, ell - 1)? as f64 * term / norm;
                }
            }
            let total = mass + tail;
            if (total - 1.0).abs() > 1e-9 {
                return Ok(outcome(
                    "mu_kn pmf normalization",
                    cases,
                    Some(format!("(k={k}, n={n}, N={dim}): total mass {total}")),
                ));
            }
        }
    }
    Ok(outcome("mu_kn pmf normalization", cases, None))
}

fn check_profile(seed: u64, trials: usize) -> Result<CheckOutcome> {
    let mut rng = CounterRng::new(derive_key(seed, &[2]));
    for t in 0..trials {
        let len = rng.random_range(0..=20usize);
        let entries: Vec<usize> = (0..len).map(|_| rng.random_range(0..6)).collect();
        let seq = UpdateSequence::new(6, 3, entries.clone())?;
        let profile = hamming_profile(&seq);
        let walk = walk_from_origin(&entries);
        for i in 0..=len {
            for j in 0..=len {
                let h = profile.hamming(i, j)?;
                let hp = profile.hamming_first_block(i, j)?;
                let diff = walk[i].0 ^ walk[j].0;
                if h != diff.count_ones() as usize || hp != (diff & 0b111).count_ones() as usize {
                    return Ok(outcome(
                        "profile = XOR simulation",
                        t + 1,
                        Some(format!("{entries:?} at ({i}, {j})")),
                    ));
                }
            }
        }
    }
    Ok(outcome("profile = XOR simulation", trials, None))
}

fn check_nk_k1(seed: u64, landscapes: u64) -> Result<CheckOutcome> {
    for s in 0..landscapes {
        let land_seed = derive_key(seed, &[3, s]);
        let land = build_landscape(12, 1, land_seed)?;
        let (_, v) = exhaustive_max(&land);
        let expected: f64 = (0..12).map(|i| land.y(i, 0).max(land.y(i, 1))).sum();
        if v != expected {
            return Ok(outcome(
                "NK K=1 decomposition",
                s as usize + 1,
                Some(format!("seed {land_seed}: max {v} vs {expected}")),
            ));
        }
    }
    Ok(outcome("NK K=1 decomposition", landscapes as usize, None))
}

/// Runs the cross-module oracle checks; `fault` injects a known defect.
pub fn run_oracle_validation(seed: u64, fault: Option<Fault>) -> Result<OracleReport> {
    Ok(OracleReport {
        checks: vec![
            check_enumeration(fault)?,
            check_count_vs_access(seed, 2000)?,
            check_pmf_normalization()?,
            check_profile(seed, 300)?,
            check_nk_k1(seed, 50)?,
        ],
    })
}

/// One row of the `seqmodel` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqModelRow {
    pub trial: u64,
    #[serde(rename = "L")]
    pub length: usize,
    pub good: bool,
    pub first_violated_clause: Option<String>,
    #[serde(rename = "T_half")]
    pub t_half: usize,
    #[serde(rename = "O_half")]
    pub o_half: usize,
}

/// Samples continuous-model sequences and scores them against the
/// good-path predicate; the half-interval statistics use `[0, 1/2]`.
pub fn run_seqmodel(
    n_dim: usize,
    beta: f64,
    x: Option<f64>,
    epsilon: f64,
    mode: GoodnessMode,
    trials: u64,
    seed: u64,
) -> Result<Vec<SeqModelRow>> {
    let n = target_distance(n_dim, beta);
    let cfg = GoodnessConfig::new(mode, n_dim, n, epsilon)?;
    let x = x.unwrap_or(cfg.constants.x0);
    (0..trials)
        .map(|t| {
            let mut rng = CounterRng::new(derive_key(seed, &[n_dim as u64, t]));
            let seq = sample_continuous(n_dim, n, x, &mut rng)?;
            let (good, clause) = is_good(&seq, &cfg)?;
            let half = interval_stats(&seq, 0.0..=0.5)?;
            Ok(SeqModelRow {
                trial: t,
                length: seq.len(),
                good,
                first_violated_clause: clause.map(|c| c.to_string()),
                t_half: half.total,
                o_half: half.odd,
            })
        })
        .collect()
}

/// Single-field trial as exposed by the CLI.
pub fn single_trial(
    n_dim: usize,
    n: usize,
    x: f64,
    seed: u64,
) -> Result<(FitnessField, crate::hypercube::AccessResult)> {
    let field = sample_field(n_dim, n, x, seed)?;
    let res = is_accessible_with(&field, &mut AccessScratch::new());
    Ok((field, res))
}
