//! Report structures: one schema for JSON output and human rendering.
//! Reals are printed with 12 significant digits in the human form; the JSON
//! form keeps full float precision so documents and reports round-trip.

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Report {
    pub tree: TreeSummary,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basic: Option<BasicSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_function: Option<TestFunctionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<SequenceRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated: Option<GeneratedSection>,
}

#[derive(Debug, Serialize)]
pub struct GeneratedSection {
    pub path: String,
    pub sigma_closed_form: f64,
}

#[derive(Debug, Serialize)]
pub struct TreeSummary {
    pub vertices: usize,
    pub max_level: u32,
    pub root: String,
}

#[derive(Debug, Serialize)]
pub struct BasicSection {
    pub sigma: f64,
    pub sigma_argmax: String,
    pub c_sup: f64,
    pub c_sup_clipped: f64,
    /// Lower bound with the corrections as printed; not certified (see the
    /// clipped variant).
    pub lower: Option<f64>,
    pub lower_clipped: f64,
    pub upper: f64,
    pub lower_provenance: String,
    pub upper_provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<HomogeneousSection>,
}

/// Closed forms available when the document records generator parameters,
/// shown next to the correction-based constant without asserting agreement.
#[derive(Debug, Serialize)]
pub struct HomogeneousSection {
    pub sigma_closed_form: f64,
    pub branching_constant_closed_form: f64,
    pub constant_from_corrections: f64,
}

#[derive(Debug, Serialize)]
pub struct TestFunctionSection {
    pub id: String,
    pub tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub provenance: String,
}

#[derive(Debug, Serialize)]
pub struct OracleSection {
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: String,
    pub interval: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct SequenceRow {
    pub m: u32,
    pub lambda: f64,
}

#[derive(Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// 12 significant digits.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

impl Report {
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(
            &mut out,
            format!(
                "tree: {} vertices, max level {}, root {:?}",
                self.tree.vertices, self.tree.max_level, self.tree.root
            ),
        );
        push(&mut out, format!("p = {}", sig12(self.p)));
        if let Some(basic) = &self.basic {
            push(
                &mut out,
                format!(
                    "sigma = {} at vertex {:?}",
                    sig12(basic.sigma),
                    basic.sigma_argmax
                ),
            );
            let lower = match basic.lower {
                Some(v) => sig12(v),
                None => "not applicable (nonpositive branching constant)".into(),
            };
            push(&mut out, format!("basic lower bound: {lower}"));
            push(
                &mut out,
                format!(
                    "certified lower bound: {} (positive-part corrections)",
                    sig12(basic.lower_clipped)
                ),
            );
            push(&mut out, format!("upper bound: {}", sig12(basic.upper)));
            push(&mut out, format!("  lower = {}", basic.lower_provenance));
            push(&mut out, format!("  upper = {}", basic.upper_provenance));
            if let Some(h) = &basic.homogeneous {
                push(
                    &mut out,
                    format!(
                        "homogeneous closed forms: sigma = {}, branching constant = {} (corrections give {})",
                        sig12(h.sigma_closed_form),
                        sig12(h.branching_constant_closed_form),
                        sig12(h.constant_from_corrections)
                    ),
                );
            }
        }
        if let Some(tf) = &self.test_function {
            let side = match (tf.lower, tf.upper) {
                (Some(v), _) => format!("lower bound {}", sig12(v)),
                (_, Some(v)) => format!("upper bound {}", sig12(v)),
                _ => "no bound".into(),
            };
            push(
                &mut out,
                format!("test function {:?} ({}): {side}", tf.id, tf.tag),
            );
            push(&mut out, format!("  from: {}", tf.provenance));
        }
        if let Some(oracle) = &self.oracle {
            push(&mut out, format!("lambda = {}", sig12(oracle.lambda)));
            push(
                &mut out,
                format!(
                    "  certified interval [{}, {}], residual {}, {} iterations, method {}",
                    sig12(oracle.interval[0]),
                    sig12(oracle.interval[1]),
                    sig12(oracle.residual),
                    oracle.iterations,
                    oracle.method
                ),
            );
        }
        if let Some(rows) = &self.sequence {
            push(&mut out, "truncation sequence:".into());
            for row in rows {
                push(&mut out, format!("  m = {:3}  lambda = {}", row.m, sig12(row.lambda)));
            }
        }
        if let Some(checks) = &self.checks {
            for c in checks {
                let tag = match c.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skipped => "SKIP",
                };
                push(&mut out, format!("{tag} {} — {}", c.name, c.detail));
            }
        }
        if let Some(generated) = &self.generated {
            push(
                &mut out,
                format!(
                    "wrote {} (closed-form sigma = {})",
                    generated.path,
                    sig12(generated.sigma_closed_form)
                ),
            );
        }
        out
    }
}
