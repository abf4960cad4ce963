use std::path::PathBuf;

use thiserror::Error;

use crate::toolpath::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("machine parameter `{field}`: {message}")]
    MachineParam { field: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("G-code line {line}: {message}")]
    Gcode { line: usize, message: String },

    #[error("toolpath is not valid:{}", format_violations(.0))]
    InvalidToolpath(Vec<Violation>),

    #[error("block {block}: infeasible plan: {message}")]
    Infeasible { block: usize, message: String },

    #[error("degenerate point set: {0}")]
    DegenerateFit(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("\n  - {v}"))
        .collect::<String>()
}
