//! Annotated examples and JSONL ingestion.
//!
//! One record per line: `{"features": [...], "annotation": ..., "score": ...,
//! "meta": ...}`. Annotations may be the integers `1`/`-1` or the strings
//! `"yes"`, `"title"`, `"no"`; `"yes"` maps to correct, `"no"` to incorrect,
//! and `"title"` maps according to a caller-chosen policy because a bare
//! title can be counted either as an acceptable answer or as an error.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Whether the predictor's answer counts as correct (`+1`) or as an error
/// (`-1`) for rejection purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Annotation {
    Correct,
    Incorrect,
}

impl Annotation {
    pub fn from_int(v: i64, index: usize) -> Result<Self> {
        match v {
            1 => Ok(Annotation::Correct),
            -1 => Ok(Annotation::Incorrect),
            _ => Err(CoreError::InvalidAnnotation {
                index,
                value: v.to_string(),
            }),
        }
    }

    /// `+1.0` or `-1.0`, the value `a` appearing in the losses.
    pub fn as_f64(self) -> f64 {
        match self {
            Annotation::Correct => 1.0,
            Annotation::Incorrect => -1.0,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Annotation::Correct => 1,
            Annotation::Incorrect => -1,
        }
    }

    pub fn is_correct(self) -> bool {
        matches!(self, Annotation::Correct)
    }
}

/// How the string annotation `"title"` is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TitlePolicy {
    /// Count a bare title as an acceptable answer (the default).
    #[default]
    Correct,
    /// Count a bare title as an error.
    Incorrect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub annotation: Annotation,
    /// Confidence score from the underlying predictor, when available.
    pub score: Option<f64>,
    pub meta: Option<String>,
}

impl Example {
    pub fn new(features: Vec<f64>, annotation: Annotation) -> Self {
        Self {
            features,
            annotation,
            score: None,
            meta: None,
        }
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = Some(score);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    dim: usize,
}

impl Dataset {
    /// Validates and bundles examples: consistent feature dimension, finite
    /// features and scores. The first example fixes the dimension.
    pub fn from_examples(examples: Vec<Example>) -> Result<Self> {
        let dim = match examples.first() {
            Some(e) => e.features.len(),
            None => return Err(CoreError::EmptyDataset),
        };
        for (index, e) in examples.iter().enumerate() {
            if e.features.len() != dim {
                return Err(CoreError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: e.features.len(),
                });
            }
            if e.features.iter().any(|f| !f.is_finite()) {
                return Err(CoreError::NonFiniteFeature { index });
            }
            if let Some(s) = e.score {
                if !s.is_finite() {
                    return Err(CoreError::NonFiniteScore { index });
                }
            }
        }
        Ok(Self { examples, dim })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fraction of examples annotated correct.
    pub fn positive_rate(&self) -> f64 {
        let pos = self
            .examples
            .iter()
            .filter(|e| e.annotation.is_correct())
            .count();
        pos as f64 / self.examples.len() as f64
    }

    /// Scores of all examples; errors on the first example lacking one.
    pub fn scores(&self) -> Result<Vec<f64>> {
        self.examples
            .iter()
            .enumerate()
            .map(|(index, e)| e.score.ok_or(CoreError::MissingScore { index }))
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let examples = indices
            .iter()
            .map(|&i| self.examples[i].clone())
            .collect();
        Self::from_examples(examples)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAnnotation {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    features: Vec<f64>,
    annotation: RawAnnotation,
    #[serde(default)]
    score: Option<f64>,
    #[serde(default)]
    meta: Option<String>,
}

fn map_annotation(raw: RawAnnotation, policy: TitlePolicy, index: usize) -> Result<Annotation> {
    match raw {
        RawAnnotation::Int(v) => Annotation::from_int(v, index),
        RawAnnotation::Text(s) => match s.as_str() {
            "yes" => Ok(Annotation::Correct),
            "no" => Ok(Annotation::Incorrect),
            "title" => Ok(match policy {
                TitlePolicy::Correct => Annotation::Correct,
                TitlePolicy::Incorrect => Annotation::Incorrect,
            }),
            _ => Err(CoreError::InvalidAnnotation { index, value: s }),
        },
    }
}

/// Parses a JSONL dataset. Blank lines are skipped; `index` in errors is the
/// zero-based record index among non-blank lines.
pub fn read_jsonl<R: Read>(reader: R, policy: TitlePolicy) -> Result<Dataset> {
    let mut examples = Vec::new();
    let mut index = 0usize;
    for line in BufReader::new(reader).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| CoreError::MalformedRecord {
                index,
                message: e.to_string(),
            })?;
        let annotation = map_annotation(raw.annotation, policy, index)?;
        examples.push(Example {
            features: raw.features,
            annotation,
            score: raw.score,
            meta: raw.meta,
        });
        index += 1;
    }
    Dataset::from_examples(examples)
}

pub fn read_jsonl_str(text: &str, policy: TitlePolicy) -> Result<Dataset> {
    read_jsonl(text.as_bytes(), policy)
}

pub fn read_jsonl_path<P: AsRef<Path>>(path: P, policy: TitlePolicy) -> Result<Dataset> {
    read_jsonl(File::open(path)?, policy)
}

#[derive(Serialize)]
struct RecordOut<'a> {
    features: &'a [f64],
    annotation: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<&'a str>,
}

/// Writes the canonical JSONL form (integer annotations) of a dataset.
pub fn write_jsonl<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for e in dataset.examples() {
        let rec = RecordOut {
            features: &e.features,
            annotation: e.annotation.as_int(),
            score: e.score,
            meta: e.meta.as_deref(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl_path<P: AsRef<Path>>(dataset: &Dataset, path: P) -> Result<()> {
    write_jsonl(dataset, File::create(path)?)
}
