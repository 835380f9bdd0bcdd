//! JSON file schemas for instances and solve reports.
//!
//! An instance document carries exactly the fields of
//! [`ProblemInstance`](crate::model::ProblemInstance) plus an optional
//! `witness` array (the generator's feasible point). A report document
//! carries the solve outcome: `status`, `objective`, `lambda`, `y`,
//! `iterations`, `max_residual`, `wall_time_s`, and optionally `trace`.

use crate::model::ProblemInstance;
use crate::multi::IterationTrace;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path} at field `{field}`: {message}")]
    Parse {
        path: String,
        field: String,
        message: String,
    },
}

/// On-disk instance document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub m: usize,
    pub delta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_parts(instance: &ProblemInstance, witness: Option<&[f64]>) -> Self {
        InstanceFile {
            n: instance.n,
            m: instance.m,
            delta: instance.delta.clone(),
            alpha: instance.alpha.clone(),
            theta: instance.theta.clone(),
            beta: instance.beta.clone(),
            sigma: instance.sigma.clone(),
            lower: instance.lower.clone(),
            upper: instance.upper.clone(),
            witness: witness.map(<[f64]>::to_vec),
        }
    }

    pub fn into_parts(self) -> (ProblemInstance, Option<Vec<f64>>) {
        (
            ProblemInstance {
                n: self.n,
                m: self.m,
                delta: self.delta,
                alpha: self.alpha,
                theta: self.theta,
                beta: self.beta,
                sigma: self.sigma,
                lower: self.lower,
                upper: self.upper,
            },
            self.witness,
        )
    }
}

/// On-disk solve report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    /// One of `converged`, `iteration_cap_reached`, `bracket_failure`,
    /// `invalid_instance`.
    pub status: String,
    pub objective: f64,
    pub lambda: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub max_residual: f64,
    /// Wall-clock seconds spent inside the solve call (file I/O excluded).
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
}

/// Trace entry in a report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub k_updated: usize,
    pub lambda_after: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_value: Option<f64>,
    pub index_count: usize,
}

impl From<&IterationTrace> for TraceRow {
    fn from(t: &IterationTrace) -> Self {
        TraceRow {
            iteration: t.iteration,
            k_updated: t.k_updated,
            lambda_after: t.lambda_after.to_vec(),
            dual_value: t.dual_value,
            index_count: t.index_count,
        }
    }
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, FileError> {
    read_json(path)
}

pub fn write_instance(path: &Path, file: &InstanceFile) -> Result<(), FileError> {
    write_json(path, file)
}

pub fn read_report(path: &Path) -> Result<ReportFile, FileError> {
    read_json(path)
}

pub fn write_report(path: &Path, file: &ReportFile) -> Result<(), FileError> {
    write_json(path, file)
}

/// Serialize a document the same way the write helpers do.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("document serialization cannot fail");
    out.push('\n');
    out
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FileError> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|err| FileError::Parse {
        path: path.display().to_string(),
        field: err.path().to_string(),
        message: err.inner().to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    fs::write(path, to_json_string(value)).map_err(|source| FileError::Write {
        path: path.display().to_string(),
        source,
    })
}
