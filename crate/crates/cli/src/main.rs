mod config;

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use apl_core::analytic::{m_coefficient, m_coefficient_big, PhaseConstants};
use apl_core::harness::{
    run_critical_window, run_oracle_validation, run_seqmodel, run_transition_sweep, single_trial,
    to_csv, to_json, ExperimentPlan, OffsetMode, OutputFormat, PlanKind, SweepResult,
};
use apl_core::nk::{
    adaptive_walk, build_landscape, exhaustive_max, greedy_block_max, iid_gaussian_max, WalkRule,
};
use apl_core::rng::{derive_key, CounterRng};
use apl_core::sequence::GoodnessMode;
use apl_core::stats::ks_two_sample;
use clap::Parser;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use config::{Cli, Command, GlobalArgs, NkMode};

/// Failure modes mapped to exit codes: bad input is 2, a check that ran
/// and failed is 1.
enum Failure {
    Usage(String),
    Validation(String),
}

impl From<apl_core::Error> for Failure {
    fn from(e: apl_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn required<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing required --{flag}")))
}

struct Output<'a> {
    path: Option<&'a Path>,
    format: OutputFormat,
}

impl Output<'_> {
    fn write(&self, text: &str) -> Outcome {
        match self.path {
            Some(p) => {
                std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> Outcome {
        let mut s =
            serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
        s.push('\n');
        self.write(&s)
    }

    fn sweep(&self, result: &SweepResult) -> Outcome {
        match self.format {
            OutputFormat::Csv => self.write(&to_csv(result)),
            OutputFormat::Json => self.write(&to_json(result)?),
        }
    }

    /// Rows as CSV (header plus preformatted lines) or as a JSON array.
    fn table<T: Serialize>(&self, header: &str, lines: Vec<String>, rows: &[T]) -> Outcome {
        match self.format {
            OutputFormat::Csv => {
                let mut s = format!("{header}\n");
                for l in lines {
                    s.push_str(&l);
                    s.push('\n');
                }
                self.write(&s)
            }
            OutputFormat::Json => self.json(&rows),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (global, command) = match config::resolve(cli) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(&global, command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(global: &GlobalArgs, command: Command) -> Outcome {
    let seed = global.seed.unwrap_or(1);
    let threads = global.threads.unwrap_or(0);
    let out = Output {
        path: global.out.as_deref(),
        format: global.format.map(Into::into).unwrap_or(OutputFormat::Csv),
    };

    match command {
        Command::Constants(a) => {
            let beta = a.beta.unwrap_or(1.0);
            let c = PhaseConstants::new(beta, a.eps.unwrap_or(0.05))?;
            let mut value = serde_json::to_value(&c).map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(n_dim) = a.n {
                value["N"] = json!(n_dim);
                value["x_c"] = json!(c.critical_x(n_dim)?);
            }
            out.json(&value)
        }

        Command::Series(a) => {
            let n_dim = required(a.n, "n")?;
            let max_ell = a.max_ell.unwrap_or(8);
            let big = a.big.unwrap_or(false);
            let distances: Vec<usize> = match a.distance {
                Some(d) => vec![d],
                None => (0..=n_dim).collect(),
            };
            let mut lines = Vec::new();
            let mut rows = Vec::new();
            for &n in &distances {
                for ell in 0..=max_ell {
                    let count = if big {
                        m_coefficient_big(n, n_dim, ell)?.to_string()
                    } else {
                        m_coefficient(n, n_dim, ell)?.to_string()
                    };
                    lines.push(format!("{n},{n_dim},{ell},{count}"));
                    rows.push(json!({ "n": n, "N": n_dim, "ell": ell, "count": count }));
                }
            }
            out.table("n,N,ell,count", lines, &rows)
        }

        Command::Trial(a) => {
            let n_dim = required(a.n, "n")?;
            let n = a.distance.unwrap_or(n_dim);
            let x = required(a.x, "x")?;
            let (_, res) = single_trial(n_dim, n, x, seed)?;
            out.json(&json!({
                "N": n_dim,
                "distance": n,
                "x": x,
                "seed": seed,
                "accessible": res.accessible,
                "visited_count": res.visited_count,
                "path_witness": res.path_witness,
            }))
        }

        Command::OracleValidate(a) => {
            let report = run_oracle_validation(seed, a.inject_fault.map(Into::into))?;
            out.json(&report)?;
            if report.all_passed() {
                Ok(())
            } else {
                let failed: Vec<String> = report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| format!("{} ({})", c.name, c.witness.as_deref().unwrap_or("")))
                    .collect();
                Err(Failure::Validation(failed.join("; ")))
            }
        }

        Command::Seqmodel(a) => {
            let n_dim = required(a.n, "n")?;
            let beta = a.beta.unwrap_or(1.0);
            let mode = a.mode.map(Into::into).unwrap_or(if beta == 1.0 {
                GoodnessMode::Antipodal
            } else {
                GoodnessMode::General
            });
            let rows = run_seqmodel(
                n_dim,
                beta,
                a.x,
                a.eps.unwrap_or(0.05),
                mode,
                a.trials.unwrap_or(100),
                seed,
            )?;
            let lines = rows
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{},{},{},{}",
                        r.trial,
                        r.length,
                        u8::from(r.good),
                        r.first_violated_clause.as_deref().unwrap_or(""),
                        r.t_half,
                        r.o_half
                    )
                })
                .collect();
            out.table(
                "trial,L,good,first_violated_clause,T_half,O_half",
                lines,
                &rows,
            )
        }

        Command::Sweep(a) => {
            let plan = ExperimentPlan {
                kind: PlanKind::TransitionSweep,
                n_list: a.n_list.unwrap_or_else(|| vec![10, 12, 14, 16]),
                beta: a.beta.unwrap_or(1.0),
                offsets: a
                    .offsets
                    .unwrap_or_else(|| (0..8).map(|i| -0.04 + 0.04 * i as f64).collect()),
                offset_mode: a
                    .offset_mode
                    .map(Into::into)
                    .unwrap_or(OffsetMode::Absolute),
                trials: a.trials.unwrap_or(1000),
                master_seed: seed,
                thread_count: threads,
                redact_timing: a.redact_timing.unwrap_or(false),
            };
            let result = run_transition_sweep(&plan)?;
            out.sweep(&result)?;
            for n_dim in result.dimensions() {
                match apl_core::harness::crossing_point(&result, n_dim) {
                    Some(x) => eprintln!("N={n_dim}: p_hat crosses 1/2 at x = {x:.6}"),
                    None => eprintln!("N={n_dim}: no crossing of 1/2 on this grid"),
                }
            }
            Ok(())
        }

        Command::Window(a) => {
            let bounds = (a.lower.unwrap_or(0.0), a.upper.unwrap_or(1.0));
            let mut report = run_critical_window(
                &a.n_list.unwrap_or_else(|| vec![12, 16, 20]),
                a.beta.unwrap_or(1.0),
                a.delta.unwrap_or(1.0),
                a.trials.unwrap_or(2000),
                seed,
                threads,
                bounds,
            )?;
            if a.redact_timing.unwrap_or(false) {
                report
                    .result
                    .rows
                    .iter_mut()
                    .for_each(|r| r.wall_time = None);
            }
            out.sweep(&report.result)?;
            if report.inside {
                Ok(())
            } else {
                Err(Failure::Validation(format!(
                    "some interval leaves ({}, {})",
                    bounds.0, bounds.1
                )))
            }
        }

        Command::Nk(a) => run_nk(a, seed, &out),
    }
}

#[derive(Serialize)]
struct NkRow {
    seed: u64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    value: f64,
    normalized_value: f64,
    steps: usize,
}

fn run_nk(a: config::NkArgs, master: u64, out: &Output) -> Outcome {
    let n = required(a.n, "n")?;
    let mode = a.mode.unwrap_or(NkMode::Exhaustive);
    let k = if mode == NkMode::Iidcheck {
        n
    } else {
        required(a.k, "k")?
    };
    let seeds = a.seeds.unwrap_or(100);
    let rule: WalkRule = a.walk_rule.map(Into::into).unwrap_or(WalkRule::Steepest);

    let mut rows = Vec::new();
    for s in 0..seeds {
        let land_seed = derive_key(master, &[s]);
        let land = build_landscape(n, k, land_seed)?;
        let (value, steps) = match mode {
            NkMode::Exhaustive | NkMode::Iidcheck => (exhaustive_max(&land).1, 0),
            NkMode::Greedy => (greedy_block_max(&land).value, 0),
            NkMode::Walk => {
                let start = CounterRng::new(derive_key(land_seed, &[1])).random_range(0..1u32 << n);
                let w = adaptive_walk(&land, start, rule, derive_key(land_seed, &[2]))?;
                (w.final_fitness, w.steps)
            }
        };
        rows.push(NkRow {
            seed: land_seed,
            n,
            k,
            value,
            normalized_value: value / n as f64,
            steps,
        });
    }

    let mut lines = Vec::with_capacity(rows.len());
    for r in &rows {
        let mut l = String::new();
        let _ = write!(
            l,
            "{},{},{},{:.16e},{:.16e},{}",
            r.seed, r.n, r.k, r.value, r.normalized_value, r.steps
        );
        lines.push(l);
    }
    out.table("seed,N,K,value,normalized_value,steps", lines, &rows)?;

    if mode == NkMode::Iidcheck {
        let mut rng = CounterRng::new(derive_key(master, &[u64::MAX]));
        let iid: Vec<f64> = (0..seeds)
            .map(|_| iid_gaussian_max(1 << n, n as f64, &mut rng))
            .collect();
        let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let (d, p) = ks_two_sample(&values, &iid)?;
        eprintln!("KS against i.i.d. maxima: D = {d:.4}, p = {p:.4}");
        if p <= 1e-3 {
            return Err(Failure::Validation(format!("KS p-value {p:.3e} <= 1e-3")));
        }
    }
    Ok(())
}
