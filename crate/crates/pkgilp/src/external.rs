//! Running third-party MILP / pseudo-Boolean solvers on emitted models.
//!
//! A solver is described by a shell command template. `{input}` (required,
//! exactly once) is replaced by the path of the emitted model, `{timeout}` by
//! the time limit in whole seconds, `{output}` by a path the solver may write
//! its answer to and `{names}` by the OPB name map. Without `{output}` the
//! answer is read from standard output.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::thread;
use std::time::{Duration, Instant};

use pkgilp_core::emit::{
    emit_lp, emit_opb, emit_opb_names, outcome_from_answer, parse_lp_answer, parse_opb_answer, AnswerError,
};
use pkgilp_core::solver::SolveStats;
use pkgilp_core::{IlpModel, SolveOutcome, SolveStatus};

const POLL: Duration = Duration::from_millis(5);

/// Interchange format sent to the solver, which also fixes the answer format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    /// CPLEX LP in, neutral `<status>` + `<variable> <value>` lines out.
    Lp,
    /// OPB in, competition `s`/`v` lines out.
    Opb,
}

impl Dialect {
    fn extension(self) -> &'static str {
        match self {
            Dialect::Lp => "lp",
            Dialect::Opb => "opb",
        }
    }
}

impl FromStr for Dialect {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        match s {
            "lp" => Ok(Dialect::Lp),
            "opb" => Ok(Dialect::Opb),
            other => Err(SpecError::Dialect(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("command template must contain `{{input}}` exactly once, found {0}")]
    InputPlaceholder(usize),
    #[error("unknown answer dialect `{0}` (expected lp or opb)")]
    Dialect(String),
    #[error("expected `<dialect>:<command template>`")]
    Syntax,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolverSpec {
    template: String,
    dialect: Dialect,
}

impl ExternalSolverSpec {
    pub fn new(template: impl Into<String>, dialect: Dialect) -> Result<Self, SpecError> {
        let template = template.into();
        let n = template.matches("{input}").count();
        if n != 1 {
            return Err(SpecError::InputPlaceholder(n));
        }
        Ok(ExternalSolverSpec { template, dialect })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn dialect(&self) -> Dialect {
        self.dialect
    }

    fn command_line(&self, input: &Path, output: &Path, names: &Path, timeout: Duration) -> String {
        self.template
            .replace("{input}", &shell_quote(input))
            .replace("{output}", &shell_quote(output))
            .replace("{names}", &shell_quote(names))
            .replace("{timeout}", &timeout.as_secs().max(1).to_string())
    }
}

/// Parses `<dialect>:<template>`, e.g. `opb:my-solver {input}`.
impl FromStr for ExternalSolverSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let (dialect, template) = s.split_once(':').ok_or(SpecError::Syntax)?;
        ExternalSolverSpec::new(template, dialect.parse()?)
    }
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("external solver i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("external solver protocol error: {0}")]
    Protocol(AnswerError),
    #[error("external solver failed ({status}) without an answer: {stderr}")]
    FailedRun { status: String, stderr: String },
}

/// Kills the whole process group started for the solver, so shell wrappers
/// do not leave the actual solver running.
fn kill_group(pid: u32) {
    if cfg!(unix) {
        let _ = Command::new("kill")
            .args(["-KILL", "--", &format!("-{pid}")])
            .stderr(Stdio::null())
            .status();
    }
}

fn read_all(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Writes the model, runs the solver and converts its answer. Feasibility
/// and objective are recomputed on `model`. A run exceeding `timeout` is
/// killed and reported as timed out without a solution.
pub fn run_external(
    spec: &ExternalSolverSpec,
    model: &IlpModel,
    timeout: Duration,
) -> Result<SolveOutcome, ExternalError> {
    let start = Instant::now();
    if model.is_marked_infeasible() {
        return Ok(SolveOutcome::infeasible(SolveStats::default()));
    }
    let dir = tempfile::tempdir()?;
    let input = dir.path().join(format!("model.{}", spec.dialect.extension()));
    let output = dir.path().join("answer.txt");
    let names = dir.path().join("model.names");
    match spec.dialect {
        Dialect::Lp => std::fs::write(&input, emit_lp(model))?,
        Dialect::Opb => {
            std::fs::write(&input, emit_opb(model))?;
            std::fs::write(&names, emit_opb_names(model))?;
        }
    }
    let mut command = Command::new("sh");
    command
        .arg("-c")
        .arg(spec.command_line(&input, &output, &names, timeout))
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut command, 0);
    let mut child = command.spawn()?;
    let stdout = read_all(child.stdout.take().expect("piped stdout"));
    let stderr = read_all(child.stderr.take().expect("piped stderr"));

    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if start.elapsed() >= timeout {
            kill_group(child.id());
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        thread::sleep(POLL);
    };
    let stats = SolveStats {
        elapsed: start.elapsed(),
        ..SolveStats::default()
    };
    let Some(status) = status else {
        return Ok(SolveOutcome {
            status: SolveStatus::TimedOut,
            best: None,
            stats,
        });
    };
    let stdout = stdout.join().unwrap_or_default();
    let stderr = stderr.join().unwrap_or_default();
    let answer_text = if spec.template.contains("{output}") {
        std::fs::read_to_string(&output).unwrap_or_default()
    } else {
        stdout
    };
    let parsed = match spec.dialect {
        Dialect::Lp => parse_lp_answer(&answer_text, model),
        Dialect::Opb => parse_opb_answer(&answer_text, model.num_vars()),
    };
    let answer = match parsed {
        Ok(a) => a,
        Err(_) if !status.success() => {
            return Err(ExternalError::FailedRun {
                status: status.to_string(),
                stderr: stderr.trim().to_string(),
            })
        }
        Err(e) => return Err(ExternalError::Protocol(e)),
    };
    let mut outcome = outcome_from_answer(model, &answer).map_err(ExternalError::Protocol)?;
    outcome.stats = stats;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let s: ExternalSolverSpec = "opb:solver --t {timeout} {input}".parse().unwrap();
        assert_eq!(s.dialect(), Dialect::Opb);
        assert_eq!(s.template(), "solver --t {timeout} {input}");
        assert_eq!(
            "lp:solver".parse::<ExternalSolverSpec>(),
            Err(SpecError::InputPlaceholder(0))
        );
        assert_eq!(
            "lp:cat {input} {input}".parse::<ExternalSolverSpec>(),
            Err(SpecError::InputPlaceholder(2))
        );
        assert!(matches!(
            "mps:x {input}".parse::<ExternalSolverSpec>(),
            Err(SpecError::Dialect(_))
        ));
        assert_eq!("no-colon".parse::<ExternalSolverSpec>(), Err(SpecError::Syntax));
    }

    #[test]
    fn command_line_substitution() {
        let s = ExternalSolverSpec::new("run {input} -o {output} -t {timeout}", Dialect::Lp).unwrap();
        let line = s.command_line(
            Path::new("/tmp/a b/m.lp"),
            Path::new("/tmp/o"),
            Path::new("/tmp/n"),
            Duration::from_millis(2500),
        );
        assert_eq!(line, "run '/tmp/a b/m.lp' -o '/tmp/o' -t 2");
        assert_eq!(shell_quote(Path::new("it's")), r"'it'\''s'");
    }
}
