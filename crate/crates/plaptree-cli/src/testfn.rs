//! Test-function files: values or ratios keyed by vertex id, a domain tag,
//! and an optional cutoff level for the plateau domains.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use plaptree::domains::{detect_plateau, DomainTag, RatioFunction, RatioValue, TestFunction};
use plaptree::{VertexFunction, WeightedTree};

use crate::CliError;

#[derive(Debug, Deserialize)]
pub struct TestFunctionFile {
    #[serde(default)]
    pub id: Option<String>,
    /// "values" or "ratios".
    pub kind: String,
    /// One of: increasing, positive, ratio, increasing-plateau,
    /// positive-plateau, ratio-plateau, positive-integrable.
    pub tag: String,
    #[serde(default)]
    pub cutoff: Option<u32>,
    /// Vertex id to value; ratios also accept the string "inf".
    pub values: BTreeMap<String, serde_json::Value>,
}

pub enum LoadedFunction {
    Values(VertexFunction),
    Ratios(RatioFunction),
}

impl LoadedFunction {
    pub fn as_test_function(&self) -> TestFunction<'_> {
        match self {
            LoadedFunction::Values(f) => TestFunction::Values(f),
            LoadedFunction::Ratios(w) => TestFunction::Ratios(w),
        }
    }
}

pub struct LoadedTestFunction {
    pub id: String,
    pub tag: DomainTag,
    pub function: LoadedFunction,
}

pub fn load_test_function(
    path: &Path,
    tree: &WeightedTree,
) -> Result<LoadedTestFunction, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let file: TestFunctionFile = serde_json::from_str(&raw)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;

    for id in file.values.keys() {
        if tree.find(id).is_none() {
            return Err(CliError::input(format!("unknown vertex id {id:?}")));
        }
    }

    let function = match file.kind.as_str() {
        "values" => {
            let mut values = vec![0.0; tree.vertex_count()];
            for i in tree.non_root() {
                values[i] = lookup_number(&file, tree.label(i))?;
            }
            if let Some(v) = file.values.get(tree.label(0)) {
                if v.as_f64() != Some(0.0) {
                    return Err(CliError::input(format!(
                        "root vertex {:?} must carry value 0",
                        tree.label(0)
                    )));
                }
            }
            LoadedFunction::Values(
                VertexFunction::new(tree, values).map_err(CliError::input)?,
            )
        }
        "ratios" => {
            let mut values = vec![RatioValue::Infinite; tree.vertex_count()];
            for i in tree.non_root() {
                values[i] = lookup_ratio(&file, tree.label(i))?;
            }
            LoadedFunction::Ratios(
                RatioFunction::new(tree, values).map_err(CliError::input)?,
            )
        }
        other => {
            return Err(CliError::input(format!(
                "unknown kind {other:?} (expected \"values\" or \"ratios\")"
            )));
        }
    };

    let cutoff_for = |what: &str| {
        file.cutoff.ok_or_else(|| {
            CliError::input(format!("tag {what:?} requires a cutoff level"))
        })
    };
    let tag = match file.tag.as_str() {
        "increasing" => DomainTag::Increasing,
        "positive" => DomainTag::Positive,
        "ratio" => DomainTag::Ratio,
        "increasing-plateau" => DomainTag::IncreasingPlateau {
            cutoff: cutoff_for("increasing-plateau")?,
        },
        "positive-plateau" => {
            let cutoff = match file.cutoff {
                Some(c) => c,
                None => match &function {
                    LoadedFunction::Values(f) => detect_plateau(tree, f).ok_or_else(|| {
                        CliError::input("cannot detect a plateau on the zero function")
                    })?,
                    LoadedFunction::Ratios(_) => {
                        return Err(CliError::input(
                            "tag \"positive-plateau\" takes a values function",
                        ));
                    }
                },
            };
            DomainTag::PositivePlateau { cutoff }
        }
        "ratio-plateau" => DomainTag::RatioPlateau {
            cutoff: cutoff_for("ratio-plateau")?,
        },
        "positive-integrable" => DomainTag::PositiveIntegrable,
        other => {
            return Err(CliError::input(format!("unknown domain tag {other:?}")));
        }
    };

    let id = file.id.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "test-function".into())
    });
    Ok(LoadedTestFunction { id, tag, function })
}

fn lookup_number(file: &TestFunctionFile, id: &str) -> Result<f64, CliError> {
    let v = file
        .values
        .get(id)
        .ok_or_else(|| CliError::input(format!("missing value for vertex {id:?}")))?;
    v.as_f64()
        .ok_or_else(|| CliError::input(format!("value for vertex {id:?} is not a number")))
}

fn lookup_ratio(file: &TestFunctionFile, id: &str) -> Result<RatioValue, CliError> {
    let v = file
        .values
        .get(id)
        .ok_or_else(|| CliError::input(format!("missing ratio for vertex {id:?}")))?;
    if let Some(x) = v.as_f64() {
        return Ok(RatioValue::Finite(x));
    }
    if v.as_str() == Some("inf") {
        return Ok(RatioValue::Infinite);
    }
    Err(CliError::input(format!(
        "ratio for vertex {id:?} must be a number or \"inf\""
    )))
}
