//! The tree document format: JSON, UTF-8, versioned. Annotations (generator
//! parameters, the closed-form sigma) live in the optional `meta` object.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use plaptree::{PExponent, VertexSpec, WeightedTree};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeDocument {
    pub format_version: u32,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub vertices: Vec<DocVertex>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocVertex {
    pub id: String,
    pub parent: Option<String>,
    pub mu: f64,
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Closed-form sigma of the generated tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl TreeDocument {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let doc: TreeDocument = serde_json::from_str(&raw)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(CliError::input(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::input(format!("serialization failed: {e}")))?;
        fs::write(path, body + "\n")
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
    }

    /// Validated tree plus the exponent, with `--p` taking precedence over
    /// the document's.
    pub fn realize(&self, p_override: Option<f64>) -> Result<(WeightedTree, PExponent), CliError> {
        let spec: Vec<VertexSpec> = self
            .vertices
            .iter()
            .map(|v| VertexSpec::new(v.id.as_str(), v.parent.as_deref(), v.mu, v.nu))
            .collect();
        let tree = WeightedTree::build(&spec).map_err(CliError::input)?;
        let p = PExponent::new(p_override.unwrap_or(self.p)).map_err(CliError::input)?;
        Ok((tree, p))
    }

    pub fn from_tree(tree: &WeightedTree, p: f64, meta: Option<Meta>) -> Self {
        let vertices = tree
            .vertices()
            .map(|i| DocVertex {
                id: tree.label(i).to_owned(),
                parent: tree.parent(i).map(|q| tree.label(q).to_owned()),
                mu: tree.mu(i),
                nu: tree.parent(i).map(|_| tree.nu(i)),
            })
            .collect();
        TreeDocument {
            format_version: FORMAT_VERSION,
            p,
            meta,
            vertices,
        }
    }
}
