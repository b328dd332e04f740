//! Pluggable MILP solvers.
//!
//! Nothing here solves a model; a backend receives the LP text and returns
//! variable values that can then be checked with
//! [`feasibility_check`](super::feasibility_check).

use std::path::{Path, PathBuf};
use std::process::Command;

use thiserror::Error;

use super::{emit_lp, parse_assignment, Assignment, MilpModel};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exited with status {status}: {stderr}")]
    Failed { status: String, stderr: String },
    #[error("cannot read solver output: {0}")]
    Output(String),
}

pub trait SolverBackend {
    fn name(&self) -> &str;
    fn solve(&self, model: &MilpModel) -> Result<Assignment, BackendError>;
}

/// Runs an external program. The model is written to `workdir/model.lp`
/// and `{model}` in the arguments is replaced by its path; standard output
/// must consist of `name value` lines.
#[derive(Debug, Clone)]
pub struct ExternalCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub workdir: PathBuf,
}

impl ExternalCommand {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>, workdir: impl Into<PathBuf>) -> Self {
        Self { program: program.into(), args, workdir: workdir.into() }
    }

    fn model_path(&self) -> PathBuf {
        self.workdir.join("model.lp")
    }

    fn run(&self, model_path: &Path) -> Result<String, BackendError> {
        let path = model_path.to_string_lossy();
        let args: Vec<String> = self.args.iter().map(|a| a.replace("{model}", &path)).collect();
        let output = Command::new(&self.program).args(&args).output()?;
        if !output.status.success() {
            return Err(BackendError::Failed {
                status: output.status.to_string(),
                stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
            });
        }
        String::from_utf8(output.stdout).map_err(|e| BackendError::Output(e.to_string()))
    }
}

impl SolverBackend for ExternalCommand {
    fn name(&self) -> &str {
        self.program.to_str().unwrap_or("external")
    }

    fn solve(&self, model: &MilpModel) -> Result<Assignment, BackendError> {
        std::fs::create_dir_all(&self.workdir)?;
        let path = self.model_path();
        std::fs::write(&path, emit_lp(model))?;
        let stdout = self.run(&path)?;
        parse_assignment(&stdout).map_err(BackendError::Output)
    }
}
