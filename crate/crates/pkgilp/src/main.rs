use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pkgilp::bench::{format_records, format_table, run_bench, stats_by_solver, Instance, SolverConfig};
use pkgilp::external::ExternalSolverSpec;
use pkgilp::generate::{gen_random, synth_universe, SynthParams};
use pkgilp::pipeline::{solve_problem, Backend, Criteria, SolveOptions};
use pkgilp_core::cudf::{
    parse_configuration, parse_document, write_configuration, write_document, write_failure, Request, Universe,
};
use pkgilp_core::emit::{emit_lp, emit_opb, emit_opb_names};
use pkgilp_core::encoder::{build_model, CriteriaMode, Weighting};
use pkgilp_core::validator::{check_consistency, check_request, diff_configurations};
use pkgilp_core::SolveStatus;

const EXIT_INFEASIBLE: u8 = 10;
const EXIT_TIMEOUT: u8 = 20;
const EXIT_VIOLATIONS: u8 = 2;

/// Package upgradeability solver for CUDF problems.
#[derive(Parser)]
#[command(name = "pkgilp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a CUDF problem and print the final configuration (or FAIL).
    Solve {
        /// CUDF file, `-` for standard input.
        file: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the linear model of a CUDF problem in LP or OPB format.
    Encode {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Lp)]
        format: Format,
        /// Write the OPB variable name map to this file.
        #[arg(long)]
        names: Option<PathBuf>,
        #[command(flatten)]
        objective: ObjectiveArgs,
    },
    /// Check a solution file against a CUDF problem.
    Validate {
        file: PathBuf,
        solution: PathBuf,
        /// Time limit for confirming a FAIL answer, in seconds.
        #[arg(long, default_value_t = 300.0)]
        timeout: f64,
    },
    /// Write a random request over a base universe as a CUDF document.
    Gen {
        base: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic universe with a consistent installed set.
    Synth {
        #[arg(long, default_value_t = 50_000)]
        units: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_versions: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run solvers over instances and print the statistics table.
    Bench {
        /// CUDF problem files.
        files: Vec<PathBuf>,
        /// Generate instances from this base universe instead of or besides files.
        #[arg(long)]
        base: Option<PathBuf>,
        /// Number of generated instances, with seeds `seed..seed+count`.
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[command(flatten)]
        gen: GenArgs,
        /// Solver to compare, repeatable (`builtin` or `<dialect>:<template>`).
        #[arg(long = "solver", default_values_t = vec![String::from("builtin")])]
        solvers: Vec<String>,
        #[arg(long, default_value_t = 300.0)]
        timeout: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write the tab-separated run records to this file.
        #[arg(long)]
        records: Option<PathBuf>,
        #[command(flatten)]
        objective: ObjectiveArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Lp,
    Opb,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriteriaArg {
    Aggregate,
    Lex,
    C1,
    C2,
}

#[derive(Args)]
struct ObjectiveArgs {
    /// Optimization criteria.
    #[arg(long, value_enum, default_value_t = CriteriaArg::Aggregate)]
    criteria: CriteriaArg,
    /// Weight the first criterion by the number of units instead of that plus one.
    #[arg(long)]
    cardinality_weight: bool,
}

impl ObjectiveArgs {
    fn criteria(&self) -> Criteria {
        match self.criteria {
            CriteriaArg::Aggregate => Criteria::Aggregate,
            CriteriaArg::Lex => Criteria::Lexicographic,
            CriteriaArg::C1 => Criteria::RemovedOnly,
            CriteriaArg::C2 => Criteria::ChangesOnly,
        }
    }

    fn weighting(&self) -> Weighting {
        if self.cardinality_weight {
            Weighting::Cardinality
        } else {
            Weighting::Strict
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// `builtin`, or `external:<lp|opb>:<command template with {input}>`.
    #[arg(long, default_value = "builtin")]
    solver: String,
    /// Time limit in seconds.
    #[arg(long, default_value_t = 300.0)]
    timeout: f64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    install: usize,
    #[arg(long, default_value_t = 0)]
    upgrade: usize,
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load(path: &Path) -> Result<(Universe, Request)> {
    let text = read_input(path)?;
    parse_document(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn timeout(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs)
        .ok()
        .filter(|d| !d.is_zero())
        .with_context(|| format!("invalid timeout {secs}"))
}

fn parse_backend(s: &str) -> Result<Backend> {
    if s == "builtin" {
        return Ok(Backend::Builtin);
    }
    let spec = s.strip_prefix("external:").unwrap_or(s);
    Ok(Backend::External(
        spec.parse::<ExternalSolverSpec>()
            .with_context(|| format!("solver `{s}`"))?,
    ))
}

fn mode_of(criteria: Criteria) -> Result<CriteriaMode> {
    Ok(match criteria {
        Criteria::Aggregate => CriteriaMode::Aggregate,
        Criteria::RemovedOnly => CriteriaMode::Criterion1,
        Criteria::ChangesOnly => CriteriaMode::Criterion2,
        Criteria::Lexicographic => bail!("lexicographic mode solves two models; pick aggregate, c1 or c2"),
    })
}

fn cmd_solve(file: &Path, objective: &ObjectiveArgs, run: &RunArgs) -> Result<ExitCode> {
    let (u, r) = load(file)?;
    let opts = SolveOptions {
        criteria: objective.criteria(),
        weighting: objective.weighting(),
        backend: parse_backend(&run.solver)?,
        timeout: timeout(run.timeout)?,
    };
    let report = solve_problem(&u, &r, &opts)?;
    match &report.configuration {
        Some(c) => write_output(None, &write_configuration(c))?,
        None if report.status() == SolveStatus::Infeasible => write_output(None, &write_failure())?,
        None => {}
    }
    let mut summary = format!("status: {}", report.status().as_str());
    if let Some(d) = report.diff {
        summary += &format!(
            "; removed functionalities: {}; changed units: {}",
            d.removed_functionalities, d.changed_units
        );
    }
    eprintln!("{summary}");
    Ok(match report.status() {
        SolveStatus::Optimal => ExitCode::SUCCESS,
        SolveStatus::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
        SolveStatus::TimedOut => ExitCode::from(EXIT_TIMEOUT),
    })
}

fn cmd_encode(file: &Path, format: Format, names: Option<&Path>, objective: &ObjectiveArgs) -> Result<ExitCode> {
    let (u, r) = load(file)?;
    let init = u.initial_configuration();
    let model = build_model(&u, &init, &r, mode_of(objective.criteria())?, objective.weighting());
    for reason in model.infeasibility_reasons() {
        eprintln!("note: {reason}");
    }
    let text = match format {
        Format::Lp => emit_lp(&model),
        Format::Opb => emit_opb(&model),
    };
    if let Some(path) = names {
        write_output(Some(path), &emit_opb_names(&model))?;
    }
    write_output(None, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(file: &Path, solution: &Path, limit: f64) -> Result<ExitCode> {
    let (u, r) = load(file)?;
    let answer =
        parse_configuration(&read_input(solution)?).with_context(|| format!("parsing {}", solution.display()))?;
    let Some(config) = answer else {
        println!("solution declares the problem unsolvable");
        let opts = SolveOptions {
            timeout: timeout(limit)?,
            ..SolveOptions::default()
        };
        let report = solve_problem(&u, &r, &opts)?;
        return Ok(match report.status() {
            SolveStatus::Infeasible => {
                println!("confirmed: the problem is infeasible");
                ExitCode::SUCCESS
            }
            SolveStatus::Optimal => {
                println!("wrong: the problem has a solution");
                ExitCode::from(EXIT_VIOLATIONS)
            }
            SolveStatus::TimedOut => {
                println!("unconfirmed: infeasibility was not decided within the time limit");
                ExitCode::from(EXIT_VIOLATIONS)
            }
        });
    };
    let init = u.initial_configuration();
    let mut violations = check_consistency(&u, &config);
    violations.extend(check_request(&u, &init, &r, &config));
    for v in &violations {
        println!("violation: {v}");
    }
    let d = diff_configurations(&init, &config, &u);
    println!(
        "removed functionalities: {}; changed units: {}",
        d.removed_functionalities, d.changed_units
    );
    if violations.is_empty() {
        println!("ok");
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_VIOLATIONS))
    }
}

fn cmd_gen(base: &Path, gen: &GenArgs, output: Option<&Path>) -> Result<ExitCode> {
    let (u, _) = load(base)?;
    let request = gen_random(&u, &u.initial_configuration(), gen.install, gen.upgrade, gen.seed)?;
    write_output(output, &write_document(&u, &request))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(units: usize, seed: u64, max_versions: u64, output: Option<&Path>) -> Result<ExitCode> {
    let params = SynthParams {
        units,
        max_versions,
        ..SynthParams::default()
    };
    let u = synth_universe(&params, seed);
    write_output(output, &write_document(&u, &Request::default()))?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    files: &[PathBuf],
    base: Option<&Path>,
    count: u64,
    gen: &GenArgs,
    solvers: &[String],
    limit: f64,
    jobs: usize,
    records: Option<&Path>,
    objective: &ObjectiveArgs,
) -> Result<ExitCode> {
    let limit = timeout(limit)?;
    let mut instances = Vec::new();
    for f in files {
        let (universe, request) = load(f)?;
        instances.push(Instance {
            name: f.display().to_string(),
            universe,
            request,
        });
    }
    if let Some(base) = base {
        let (u, _) = load(base)?;
        let init = u.initial_configuration();
        for seed in gen.seed..gen.seed + count {
            instances.push(Instance {
                name: format!("seed{seed}"),
                universe: u.clone(),
                request: gen_random(&u, &init, gen.install, gen.upgrade, seed)?,
            });
        }
    }
    if instances.is_empty() {
        bail!("no instances: give CUDF files or --base");
    }
    let configs = solvers
        .iter()
        .map(|s| {
            Ok(SolverConfig {
                label: s.clone(),
                options: SolveOptions {
                    criteria: objective.criteria(),
                    weighting: objective.weighting(),
                    backend: parse_backend(s)?,
                    timeout: limit,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = run_bench(&instances, &configs, jobs);
    if let Some(path) = records {
        write_output(Some(path), &format_records(&runs))?;
    }
    write_output(None, &format_table(&stats_by_solver(&runs, limit)))?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Solve { file, objective, run } => cmd_solve(file, objective, run),
        Command::Encode {
            file,
            format,
            names,
            objective,
        } => cmd_encode(file, *format, names.as_deref(), objective),
        Command::Validate {
            file,
            solution,
            timeout,
        } => cmd_validate(file, solution, *timeout),
        Command::Gen { base, gen, output } => cmd_gen(base, gen, output.as_deref()),
        Command::Synth {
            units,
            seed,
            max_versions,
            output,
        } => cmd_synth(*units, *seed, *max_versions, output.as_deref()),
        Command::Bench {
            files,
            base,
            count,
            gen,
            solvers,
            timeout,
            jobs,
            records,
            objective,
        } => cmd_bench(
            files,
            base.as_deref(),
            *count,
            gen,
            solvers,
            *timeout,
            *jobs,
            records.as_deref(),
            objective,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
