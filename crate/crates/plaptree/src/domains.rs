//! Test-function domains for the variational functionals.
//!
//! Plain domains certify lower bounds; the plateau ("frozen beyond a cutoff
//! level") variants certify upper bounds. Membership is checked with exact
//! comparisons: the definitions are strict inequalities and exact equalities,
//! not approximate ones.

use thiserror::Error;

use crate::exponent::PExponent;
use crate::form::{signed_power, VertexFunction};
use crate::tree::{VertexId, WeightedTree};

/// A ratio value: finite, or the symbolic infinity used at the boundary
/// (a positive function divided by the root value 0). The sentinel never
/// enters arithmetic; the one place it is consumed, `1 - 1/w`, is hardcoded
/// to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioValue {
    Finite(f64),
    Infinite,
}

impl RatioValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, RatioValue::Infinite)
    }

    /// `1 - 1/w`, with the infinite sentinel mapped to 1.
    pub fn one_minus_reciprocal(&self) -> f64 {
        match *self {
            RatioValue::Finite(x) => 1.0 - 1.0 / x,
            RatioValue::Infinite => 1.0,
        }
    }
}

/// Successive-ratio functions `w_i = g_i / g_parent(i)`. The root slot is the
/// infinite sentinel by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioFunction {
    values: Vec<RatioValue>,
}

impl RatioFunction {
    pub fn new(tree: &WeightedTree, mut values: Vec<RatioValue>) -> Result<Self, DomainViolation> {
        if values.len() != tree.vertex_count() {
            return Err(DomainViolation {
                vertex: None,
                reason: format!(
                    "ratio function length {} does not match vertex count {}",
                    values.len(),
                    tree.vertex_count()
                ),
            });
        }
        values[0] = RatioValue::Infinite;
        for i in tree.non_root() {
            if let RatioValue::Finite(x) = values[i] {
                if !x.is_finite() {
                    return Err(DomainViolation {
                        vertex: Some(i),
                        reason: format!("nonfinite ratio {x}"),
                    });
                }
            }
        }
        Ok(Self { values })
    }

    /// Ratios of a positive function along the edges; infinite at root
    /// children, where the parent value is the pinned 0.
    pub fn from_function(
        tree: &WeightedTree,
        g: &VertexFunction,
    ) -> Result<Self, DomainViolation> {
        let mut values = vec![RatioValue::Infinite; tree.vertex_count()];
        for i in tree.non_root() {
            if g.value(i) <= 0.0 {
                return Err(DomainViolation {
                    vertex: Some(i),
                    reason: format!("ratios need a positive function, got {}", g.value(i)),
                });
            }
            let p = tree.parent_of(i);
            if p != 0 {
                values[i] = RatioValue::Finite(g.value(i) / g.value(p));
            }
        }
        Ok(Self { values })
    }

    pub fn value(&self, i: VertexId) -> RatioValue {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which domain a test function claims to belong to.
///
/// * `Increasing`: strictly increasing along every root path (zero at the
///   root); its single-sum values certify lower bounds.
/// * `Positive`: positive on every non-root vertex; double-sum lower bounds.
/// * `Ratio`: successive ratios > 1; difference-form lower bounds.
/// * `*Plateau { cutoff }`: the upper-bound variants, frozen beyond the
///   cutoff level (ratios equal to 1 there).
/// * `PositiveIntegrable`: nonnegative, nonzero, with p-integrable
///   double-sum image. On a finite tree the integrability condition is
///   vacuous, so this coincides with membership in the plateau family with
///   cutoff at the maximal level; the tag exists so files can state the
///   intent explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainTag {
    Increasing,
    Positive,
    Ratio,
    IncreasingPlateau { cutoff: u32 },
    PositivePlateau { cutoff: u32 },
    RatioPlateau { cutoff: u32 },
    PositiveIntegrable,
}

impl DomainTag {
    /// Does this tag certify an upper bound (plateau family) rather than a
    /// lower bound?
    pub fn is_upper(&self) -> bool {
        matches!(
            self,
            DomainTag::IncreasingPlateau { .. }
                | DomainTag::PositivePlateau { .. }
                | DomainTag::RatioPlateau { .. }
                | DomainTag::PositiveIntegrable
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            DomainTag::Increasing => "increasing",
            DomainTag::Positive => "positive",
            DomainTag::Ratio => "ratio",
            DomainTag::IncreasingPlateau { .. } => "increasing-plateau",
            DomainTag::PositivePlateau { .. } => "positive-plateau",
            DomainTag::RatioPlateau { .. } => "ratio-plateau",
            DomainTag::PositiveIntegrable => "positive-integrable",
        }
    }
}

/// A test function of either kind.
#[derive(Debug, Clone, Copy)]
pub enum TestFunction<'a> {
    Values(&'a VertexFunction),
    Ratios(&'a RatioFunction),
}

/// First violation found while checking domain membership.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain violation{}: {reason}", match .vertex { Some(v) => format!(" at vertex {v}"), None => String::new() })]
pub struct DomainViolation {
    pub vertex: Option<VertexId>,
    pub reason: String,
}

fn violation(vertex: VertexId, reason: impl Into<String>) -> DomainViolation {
    DomainViolation {
        vertex: Some(vertex),
        reason: reason.into(),
    }
}

/// Largest level carrying a nonzero increment, i.e. the smallest admissible
/// plateau cutoff. `None` for the zero function.
pub fn detect_plateau(tree: &WeightedTree, f: &VertexFunction) -> Option<u32> {
    let mut cutoff = None;
    for i in tree.non_root() {
        if f.value(i) != f.value(tree.parent_of(i)) {
            let l = tree.level(i);
            if cutoff.map_or(true, |c| l > c) {
                cutoff = Some(l);
            }
        }
    }
    cutoff
}

/// Checks membership of `input` in the domain named by `tag`. Scans in index
/// order, so the reported violation is the one at the smallest BFS index.
pub fn validate_domain(
    tree: &WeightedTree,
    p: PExponent,
    input: TestFunction<'_>,
    tag: DomainTag,
) -> Result<(), DomainViolation> {
    match (tag, input) {
        (DomainTag::Increasing, TestFunction::Values(f)) => {
            check_len(tree, f.len())?;
            for i in tree.non_root() {
                if !(f.value(i) > f.value(tree.parent_of(i))) {
                    return Err(violation(i, "expected a strict increase over the parent"));
                }
            }
            Ok(())
        }
        (DomainTag::Positive, TestFunction::Values(f)) => {
            check_len(tree, f.len())?;
            for i in tree.non_root() {
                if !(f.value(i) > 0.0) {
                    return Err(violation(i, "expected a positive value"));
                }
            }
            Ok(())
        }
        (DomainTag::Ratio, TestFunction::Ratios(w)) => {
            check_len(tree, w.len())?;
            for i in tree.non_root() {
                if let RatioValue::Finite(x) = w.value(i) {
                    if !(x > 1.0) {
                        return Err(violation(i, "expected a ratio above 1"));
                    }
                }
            }
            Ok(())
        }
        (DomainTag::IncreasingPlateau { cutoff }, TestFunction::Values(f)) => {
            check_len(tree, f.len())?;
            check_cutoff(tree, cutoff)?;
            for i in tree.non_root() {
                let fi = f.value(i);
                let fp = f.value(tree.parent_of(i));
                if fi < 0.0 {
                    return Err(violation(i, "expected a nonnegative value"));
                }
                if tree.level(i) <= cutoff {
                    if !(fi > fp) {
                        return Err(violation(
                            i,
                            "expected a strict increase below the cutoff",
                        ));
                    }
                } else if fi != fp {
                    return Err(violation(i, "expected the plateau beyond the cutoff"));
                }
            }
            Ok(())
        }
        (DomainTag::PositivePlateau { cutoff }, TestFunction::Values(f)) => {
            check_len(tree, f.len())?;
            check_cutoff(tree, cutoff)?;
            validate_nonneg_nonzero(tree, f)?;
            for i in tree.non_root() {
                if tree.level(i) > cutoff && f.value(i) != f.value(tree.parent_of(i)) {
                    return Err(violation(i, "expected the plateau beyond the cutoff"));
                }
            }
            Ok(())
        }
        (DomainTag::PositiveIntegrable, TestFunction::Values(f)) => {
            check_len(tree, f.len())?;
            // The integrability requirement is automatic on a finite tree.
            validate_nonneg_nonzero(tree, f)
        }
        (DomainTag::RatioPlateau { cutoff }, TestFunction::Ratios(w)) => {
            check_len(tree, w.len())?;
            check_cutoff(tree, cutoff)?;
            let q = p.p();
            for i in tree.non_root() {
                let wi = w.value(i);
                if tree.level(i) > cutoff {
                    if wi != RatioValue::Finite(1.0) {
                        return Err(violation(i, "expected ratio exactly 1 beyond the cutoff"));
                    }
                    continue;
                }
                match wi {
                    // A finite ratio against the root value 0 is impossible,
                    // and the upper-bound chain genuinely fails without the
                    // sentinel here.
                    RatioValue::Finite(_) if tree.parent_of(i) == 0 => {
                        return Err(violation(
                            i,
                            "root children must carry the infinite boundary ratio",
                        ));
                    }
                    RatioValue::Finite(x) if !(x > 1.0) => {
                        return Err(violation(i, "expected a ratio above 1 below the cutoff"));
                    }
                    RatioValue::Infinite if tree.parent_of(i) != 0 => {
                        return Err(violation(
                            i,
                            "the infinite sentinel is only admissible at root children",
                        ));
                    }
                    _ => {}
                }
                // Strict dominance of the parent-edge term over the child sum.
                let mut child_sum = 0.0;
                for &j in tree.children(i) {
                    match w.value(j) {
                        RatioValue::Finite(x) => {
                            child_sum += tree.nu(j) * signed_power(x - 1.0, q);
                        }
                        RatioValue::Infinite => {
                            return Err(violation(
                                j,
                                "the infinite sentinel is only admissible at root children",
                            ));
                        }
                    }
                }
                let parent_term =
                    tree.nu(i) * signed_power(wi.one_minus_reciprocal(), q);
                if !(child_sum < parent_term) {
                    return Err(violation(
                        i,
                        "child ratio terms must stay strictly below the parent edge term",
                    ));
                }
            }
            Ok(())
        }
        (tag, TestFunction::Values(_)) => Err(DomainViolation {
            vertex: None,
            reason: format!("domain '{}' takes a ratio function", tag.name()),
        }),
        (tag, TestFunction::Ratios(_)) => Err(DomainViolation {
            vertex: None,
            reason: format!("domain '{}' takes a vertex function", tag.name()),
        }),
    }
}

fn check_len(tree: &WeightedTree, got: usize) -> Result<(), DomainViolation> {
    if got != tree.vertex_count() {
        return Err(DomainViolation {
            vertex: None,
            reason: format!(
                "function length {} does not match vertex count {}",
                got,
                tree.vertex_count()
            ),
        });
    }
    Ok(())
}

fn check_cutoff(tree: &WeightedTree, cutoff: u32) -> Result<(), DomainViolation> {
    if cutoff < 1 || cutoff > tree.max_level() {
        return Err(DomainViolation {
            vertex: None,
            reason: format!(
                "cutoff {} out of range 1..={}",
                cutoff,
                tree.max_level()
            ),
        });
    }
    Ok(())
}

fn validate_nonneg_nonzero(
    tree: &WeightedTree,
    f: &VertexFunction,
) -> Result<(), DomainViolation> {
    for i in tree.non_root() {
        if f.value(i) < 0.0 {
            return Err(violation(i, "expected a nonnegative value"));
        }
    }
    if f.is_zero() {
        return Err(DomainViolation {
            vertex: None,
            reason: "the zero function is excluded".into(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::VertexSpec;

    fn p2() -> PExponent {
        PExponent::new(2.0).unwrap()
    }

    fn unit_path(len: u32) -> WeightedTree {
        let mut spec = vec![VertexSpec::new("v0", None, 1.0, None)];
        for k in 1..=len {
            spec.push(VertexSpec::new(
                format!("v{k}"),
                Some(&format!("v{}", k - 1)),
                1.0,
                Some(1.0),
            ));
        }
        WeightedTree::build(&spec).unwrap()
    }

    #[test]
    fn level_function_is_increasing() {
        let t = unit_path(3);
        let f = VertexFunction::from_fn(&t, |i| t.level(i) as f64);
        assert!(validate_domain(&t, p2(), TestFunction::Values(&f), DomainTag::Increasing).is_ok());
    }

    #[test]
    fn constant_one_is_plateau_not_increasing() {
        let t = unit_path(3);
        let f = VertexFunction::constant_one(&t);
        assert_eq!(detect_plateau(&t, &f), Some(1));
        assert!(validate_domain(
            &t,
            p2(),
            TestFunction::Values(&f),
            DomainTag::PositivePlateau { cutoff: 1 }
        )
        .is_ok());
        assert!(validate_domain(&t, p2(), TestFunction::Values(&f), DomainTag::Increasing).is_err());
        // Any cutoff at or above the detected one is also admissible.
        assert!(validate_domain(
            &t,
            p2(),
            TestFunction::Values(&f),
            DomainTag::PositivePlateau { cutoff: 3 }
        )
        .is_ok());
    }

    #[test]
    fn plain_ratio_only_requires_above_one() {
        let t = unit_path(2);
        let w = RatioFunction::new(
            &t,
            vec![
                RatioValue::Infinite,
                RatioValue::Finite(1.5),
                RatioValue::Finite(1.5),
            ],
        )
        .unwrap();
        assert!(validate_domain(&t, p2(), TestFunction::Ratios(&w), DomainTag::Ratio).is_ok());

        let bad = RatioFunction::new(
            &t,
            vec![
                RatioValue::Infinite,
                RatioValue::Finite(0.9),
                RatioValue::Finite(1.5),
            ],
        )
        .unwrap();
        let err =
            validate_domain(&t, p2(), TestFunction::Ratios(&bad), DomainTag::Ratio).unwrap_err();
        assert_eq!(err.vertex, Some(1));
    }

    #[test]
    fn ratio_plateau_needs_boundary_sentinel() {
        let t = unit_path(2);
        // Finite ratio at the root child: rejected for the upper-bound domain.
        let finite = RatioFunction::new(
            &t,
            vec![
                RatioValue::Infinite,
                RatioValue::Finite(2.0),
                RatioValue::Finite(1.0),
            ],
        )
        .unwrap();
        assert!(validate_domain(
            &t,
            p2(),
            TestFunction::Ratios(&finite),
            DomainTag::RatioPlateau { cutoff: 1 }
        )
        .is_err());

        let good = RatioFunction::new(
            &t,
            vec![
                RatioValue::Infinite,
                RatioValue::Infinite,
                RatioValue::Finite(1.0),
            ],
        )
        .unwrap();
        assert!(validate_domain(
            &t,
            p2(),
            TestFunction::Ratios(&good),
            DomainTag::RatioPlateau { cutoff: 1 }
        )
        .is_ok());
    }

    #[test]
    fn ratio_plateau_checks_strict_dominance() {
        // Star: root -> c -> three leaves; heavy leaf ratios break dominance.
        let t = WeightedTree::build(&[
            VertexSpec::new("o", None, 1.0, None),
            VertexSpec::new("c", Some("o"), 1.0, Some(1.0)),
            VertexSpec::new("l1", Some("c"), 1.0, Some(1.0)),
            VertexSpec::new("l2", Some("c"), 1.0, Some(1.0)),
            VertexSpec::new("l3", Some("c"), 1.0, Some(1.0)),
        ])
        .unwrap();
        let mk = |leaf: f64| {
            RatioFunction::new(
                &t,
                vec![
                    RatioValue::Infinite,
                    RatioValue::Infinite,
                    RatioValue::Finite(leaf),
                    RatioValue::Finite(leaf),
                    RatioValue::Finite(leaf),
                ],
            )
            .unwrap()
        };
        assert!(validate_domain(
            &t,
            p2(),
            TestFunction::Ratios(&mk(1.2)),
            DomainTag::RatioPlateau { cutoff: 2 }
        )
        .is_ok());
        assert!(validate_domain(
            &t,
            p2(),
            TestFunction::Ratios(&mk(1.5)),
            DomainTag::RatioPlateau { cutoff: 2 }
        )
        .is_err());
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let t = unit_path(1);
        let f = VertexFunction::constant_one(&t);
        assert!(validate_domain(&t, p2(), TestFunction::Values(&f), DomainTag::Ratio).is_err());
    }

    #[test]
    fn ratios_from_function() {
        let t = unit_path(2);
        let g = VertexFunction::new(&t, vec![0.0, 1.0, 1.5]).unwrap();
        let w = RatioFunction::from_function(&t, &g).unwrap();
        assert!(w.value(1).is_infinite());
        assert_eq!(w.value(2), RatioValue::Finite(1.5));
        let bad = VertexFunction::new(&t, vec![0.0, 1.0, 0.0]).unwrap();
        assert!(RatioFunction::from_function(&t, &bad).is_err());
    }
}
