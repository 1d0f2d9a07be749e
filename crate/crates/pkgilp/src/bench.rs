//! Benchmark runs and the per-solver statistics table.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use pkgilp_core::cudf::{Request, Universe};
use pkgilp_core::encoder::{build_model, CriteriaMode};
use pkgilp_core::solver::{lexicographic_solve_with, SolveStatus};
use pkgilp_core::IlpModel;

use crate::pipeline::{solve_model, Criteria, SolveOptions};

/// Smallest time used in the geometric mean, so instant runs do not
/// collapse it to zero.
pub const MIN_TIME: Duration = Duration::from_micros(1);

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub universe: Universe,
    pub request: Request,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub label: String,
    pub options: SolveOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Optimal,
    Infeasible,
    TimedOut,
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Optimal => "optimal",
            RunStatus::Infeasible => "infeasible",
            RunStatus::TimedOut => "timeout",
            RunStatus::Error => "error",
        }
    }
}

impl From<SolveStatus> for RunStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => RunStatus::Optimal,
            SolveStatus::Infeasible => RunStatus::Infeasible,
            SolveStatus::TimedOut => RunStatus::TimedOut,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub instance: String,
    pub solver: String,
    pub status: RunStatus,
    pub elapsed: Duration,
    pub objective: Option<i64>,
}

/// Runs every solver on every instance with at most `jobs` runs in flight.
/// Only the solve call is timed; encoding happens before the clock starts.
/// Records come back ordered by solver, then instance.
pub fn run_bench(instances: &[Instance], solvers: &[SolverConfig], jobs: usize) -> Vec<RunRecord> {
    let tasks: Vec<(usize, usize)> = (0..solvers.len())
        .flat_map(|s| (0..instances.len()).map(move |i| (s, i)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; tasks.len()]);
    thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, tasks.len().max(1)) {
            scope.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(s, i)) = tasks.get(t) else { break };
                let record = run_one(&instances[i], &solvers[s]);
                results.lock().expect("no worker panicked")[t] = Some(record);
            });
        }
    });
    results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every task ran"))
        .collect()
}

fn run_one(instance: &Instance, solver: &SolverConfig) -> RunRecord {
    let opts = &solver.options;
    let (u, r) = (&instance.universe, &instance.request);
    let init = u.initial_configuration();
    let solve_timed = |model: &IlpModel| {
        let start = Instant::now();
        let result = solve_model(model, &opts.backend, opts.timeout);
        (result, start.elapsed())
    };
    let mut wall = Duration::ZERO;
    let result = match opts.criteria {
        Criteria::Lexicographic => lexicographic_solve_with(u, &init, r, |m| {
            let (out, t) = solve_timed(m);
            wall += t;
            out
        })
        .map(|lex| lex.outcome),
        Criteria::Aggregate | Criteria::RemovedOnly | Criteria::ChangesOnly => {
            let mode = match opts.criteria {
                Criteria::RemovedOnly => CriteriaMode::Criterion1,
                Criteria::ChangesOnly => CriteriaMode::Criterion2,
                _ => CriteriaMode::Aggregate,
            };
            let (out, t) = solve_timed(&build_model(u, &init, r, mode, opts.weighting));
            wall = t;
            out
        }
    };
    let (status, objective) = match result {
        Ok(out) => (out.status.into(), out.objective()),
        Err(_) => (RunStatus::Error, None),
    };
    RunRecord {
        instance: instance.name.clone(),
        solver: solver.label.clone(),
        status,
        elapsed: wall,
        objective,
    }
}

/// One row of the results table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub runs: usize,
    pub timeouts: usize,
    /// Instances proved infeasible.
    pub failed: usize,
    pub errors: usize,
    pub min: f64,
    pub max: f64,
    pub geometric_mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub total: f64,
}

/// Statistics over `records`, in seconds. Timed-out runs count as exactly
/// `timeout`; every run, including infeasible and failed ones, contributes
/// its time.
pub fn compute_stats<'a>(records: impl IntoIterator<Item = &'a RunRecord>, timeout: Duration) -> Stats {
    let mut times = Vec::new();
    let (mut timeouts, mut failed, mut errors) = (0, 0, 0);
    for r in records {
        let t = match r.status {
            RunStatus::TimedOut => {
                timeouts += 1;
                timeout
            }
            RunStatus::Infeasible => {
                failed += 1;
                r.elapsed
            }
            RunStatus::Error => {
                errors += 1;
                r.elapsed
            }
            RunStatus::Optimal => r.elapsed,
        };
        times.push(t.max(MIN_TIME).as_secs_f64());
    }
    let n = times.len();
    if n == 0 {
        return Stats {
            runs: 0,
            timeouts,
            failed,
            errors,
            min: 0.0,
            max: 0.0,
            geometric_mean: 0.0,
            std_dev: 0.0,
            total: 0.0,
        };
    }
    let total: f64 = times.iter().sum();
    let mean = total / n as f64;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n as f64;
    let log_mean = times.iter().map(|t| t.ln()).sum::<f64>() / n as f64;
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Stats {
        runs: n,
        timeouts,
        failed,
        errors,
        min,
        max,
        // Rounding in exp/ln can leave the mean a hair outside [min, max].
        geometric_mean: log_mean.exp().clamp(min, max),
        std_dev: var.sqrt(),
        total,
    }
}

/// Groups records by solver label, in first-appearance order.
pub fn stats_by_solver(records: &[RunRecord], timeout: Duration) -> Vec<(String, Stats)> {
    let mut labels: Vec<&str> = Vec::new();
    for r in records {
        if !labels.contains(&r.solver.as_str()) {
            labels.push(&r.solver);
        }
    }
    labels
        .into_iter()
        .map(|l| {
            let stats = compute_stats(records.iter().filter(|r| r.solver == l), timeout);
            (l.to_string(), stats)
        })
        .collect()
}

/// Fixed-width table: one row per statistic, one column per solver.
pub fn format_table(rows: &[(String, Stats)]) -> String {
    const LABEL: usize = 22;
    const COL: usize = 12;
    let mut out = String::new();
    let _ = write!(out, "{:<LABEL$}", "");
    for (label, _) in rows {
        let _ = write!(out, "{label:>COL$}");
    }
    out.push('\n');
    type Row = (&'static str, fn(&Stats) -> String);
    let lines: [Row; 7] = [
        ("nb time out", |s| s.timeouts.to_string()),
        ("nb failed", |s| s.failed.to_string()),
        ("min time", |s| format!("{:.2}", s.min)),
        ("max time", |s| format!("{:.2}", s.max)),
        ("geometric mean time", |s| format!("{:.2}", s.geometric_mean)),
        ("standard deviation", |s| format!("{:.2}", s.std_dev)),
        ("total time", |s| format!("{:.2}", s.total)),
    ];
    for (name, f) in lines {
        let _ = write!(out, "{name:<LABEL$}");
        for (_, s) in rows {
            let _ = write!(out, "{:>COL$}", f(s));
        }
        out.push('\n');
    }
    if rows.iter().any(|(_, s)| s.errors > 0) {
        let _ = write!(out, "{:<LABEL$}", "nb errors");
        for (_, s) in rows {
            let _ = write!(out, "{:>COL$}", s.errors);
        }
        out.push('\n');
    }
    out
}

/// Tab-separated `instance, solver, status, elapsed ms, objective` lines.
pub fn format_records(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let objective = r.objective.map_or_else(|| "-".to_string(), |o| o.to_string());
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.instance,
            r.solver,
            r.status.as_str(),
            r.elapsed.as_millis(),
            objective
        );
    }
    out
}
