//! Error types shared across the pipeline.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid method reference `{0}` (expected Owner.method)")]
    BadMethodRef(String),
    #[error("{method} ii={ii}: {message}")]
    BadInstruction {
        method: String,
        ii: usize,
        message: String,
    },
    #[error("unresolved reference to `{name}` ({context})")]
    Resolve { name: String, context: String },
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{method} ii={ii}: instruction uses variable `{var}` of unknown static type")]
    UnknownVarType {
        method: String,
        ii: usize,
        var: String,
    },
    #[error("{method} ii={ii}: {message}")]
    Inconsistent {
        method: String,
        ii: usize,
        message: String,
    },
    #[error("unknown type `{0}`")]
    UnknownType(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("placement error: {0}")]
    Placement(String),
    #[error("trace error: {0}")]
    Trace(String),
    #[error("hint error: {0}")]
    Hint(String),
    #[error("dataset error: {0}")]
    Dataset(String),
}

#[derive(Debug, Error)]
#[error("benchmark spec error: {0}")]
pub struct SpecError(pub String);
