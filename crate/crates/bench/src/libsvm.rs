//! LIBSVM sparse text format: `label idx:val idx:val ...`, 1-based indices.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use minieg::problems::LogRegProblem;
use minieg::ProblemError;

#[derive(Debug, thiserror::Error)]
pub enum LibsvmError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("labels must be binary ({{-1, +1}} or {{0, 1}}), found {0:?}")]
    Labels(Vec<f64>),
    #[error("no samples")]
    Empty,
    #[error("feature index {index} exceeds the requested dimension {dim}")]
    Dimension { index: usize, dim: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Parsed samples with labels already mapped to ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmData {
    pub n_features: usize,
    /// 0-based `(feature, value)` pairs per sample.
    pub samples: Vec<Vec<(usize, f64)>>,
    pub labels: Vec<f64>,
}

impl LibsvmData {
    pub fn into_problem(self, tau: f64) -> Result<LogRegProblem, LibsvmError> {
        Ok(LogRegProblem::new(
            self.n_features,
            &self.samples,
            self.labels,
            tau,
        )?)
    }
}

pub fn load_libsvm(path: &Path, n_features: Option<usize>) -> Result<LibsvmData, LibsvmError> {
    let file = File::open(path).map_err(|source| LibsvmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_libsvm(BufReader::new(file), n_features).map_err(|e| match e {
        LibsvmError::Io { source, .. } => LibsvmError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

/// Parses LIBSVM text. The feature dimension is the largest index seen
/// unless `n_features` is given.
pub fn parse_libsvm<R: BufRead>(
    reader: R,
    n_features: Option<usize>,
) -> Result<LibsvmData, LibsvmError> {
    let mut samples = Vec::new();
    let mut raw_labels = Vec::new();
    let mut max_index = 0usize;
    let mut seen = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| LibsvmError::Io {
            path: String::new(),
            source,
        })?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok.parse().map_err(|_| LibsvmError::Parse {
            line: lineno,
            message: format!("bad label '{label_tok}'"),
        })?;
        let mut row = Vec::new();
        seen.clear();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| LibsvmError::Parse {
                line: lineno,
                message: format!("expected idx:val, got '{tok}'"),
            })?;
            let idx: usize = idx.parse().map_err(|_| LibsvmError::Parse {
                line: lineno,
                message: format!("bad feature index '{idx}'"),
            })?;
            if idx == 0 {
                return Err(LibsvmError::Parse {
                    line: lineno,
                    message: "feature indices are 1-based".into(),
                });
            }
            let val: f64 = val.parse().map_err(|_| LibsvmError::Parse {
                line: lineno,
                message: format!("bad value '{val}'"),
            })?;
            if !val.is_finite() {
                return Err(LibsvmError::Parse {
                    line: lineno,
                    message: format!("non-finite value at feature {idx}"),
                });
            }
            if !seen.insert(idx) {
                return Err(LibsvmError::Parse {
                    line: lineno,
                    message: format!("duplicate feature index {idx}"),
                });
            }
            max_index = max_index.max(idx);
            if val != 0.0 {
                row.push((idx - 1, val));
            }
        }
        row.sort_by_key(|e| e.0);
        samples.push(row);
        raw_labels.push(label);
    }
    if samples.is_empty() {
        return Err(LibsvmError::Empty);
    }
    let dim = match n_features {
        Some(d) if d < max_index => {
            return Err(LibsvmError::Dimension {
                index: max_index,
                dim: d,
            })
        }
        Some(d) => d,
        None => max_index.max(1),
    };
    Ok(LibsvmData {
        n_features: dim,
        samples,
        labels: map_labels(&raw_labels)?,
    })
}

fn map_labels(raw: &[f64]) -> Result<Vec<f64>, LibsvmError> {
    let mut distinct: Vec<f64> = Vec::new();
    for &l in raw {
        if !distinct.contains(&l) {
            distinct.push(l);
        }
    }
    let signed = distinct.iter().all(|&l| l == 1.0 || l == -1.0);
    let binary = distinct.iter().all(|&l| l == 0.0 || l == 1.0);
    if signed {
        Ok(raw.to_vec())
    } else if binary {
        Ok(raw
            .iter()
            .map(|&l| if l == 1.0 { 1.0 } else { -1.0 })
            .collect())
    } else {
        distinct.sort_by(f64::total_cmp);
        Err(LibsvmError::Labels(distinct))
    }
}
