//! The three variational functionals and bound extraction.
//!
//! Each functional is evaluated for every non-root vertex in one O(V) sweep:
//!
//! * single-sum: subtree mass of `mu f^(p-1)` over the weighted increment,
//! * double-sum: a root-path accumulation of dual-weighted subtree masses,
//! * difference form: the normalized edge-term deficit of a ratio function.
//!
//! Functions from the plain domains certify lower bounds on the principal
//! eigenvalue via the vertex infimum; functions from the plateau domains
//! certify upper bounds via the vertex supremum below the cutoff. The
//! double-sum map doubles as an inverse iteration whose per-step inf/sup
//! give a certified shrinking interval.

use crate::domains::{
    detect_plateau, validate_domain, DomainTag, DomainViolation, RatioFunction, RatioValue,
    TestFunction,
};
use crate::exponent::PExponent;
use crate::form::{signed_power, VertexFunction};
use crate::num::CompensatedSum;
use crate::tree::{VertexId, WeightedTree};
use crate::weights::DerivedWeights;

/// A one- or two-sided enclosure of the principal eigenvalue, with the
/// provenance of each side.
#[derive(Debug, Clone)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_source: Option<String>,
    pub upper_source: Option<String>,
}

impl BoundInterval {
    pub fn lower_only(value: f64, source: String) -> Self {
        Self {
            lower: value,
            upper: f64::INFINITY,
            lower_source: Some(source),
            upper_source: None,
        }
    }

    pub fn upper_only(value: f64, source: String) -> Self {
        Self {
            lower: 0.0,
            upper: value,
            lower_source: None,
            upper_source: None,
        }
        .with_upper_source(source)
    }

    fn with_upper_source(mut self, source: String) -> Self {
        self.upper_source = Some(source);
        self
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Tightest combination of two enclosures.
    pub fn intersect(&self, other: &BoundInterval) -> BoundInterval {
        let (lower, lower_source) = if other.lower > self.lower {
            (other.lower, other.lower_source.clone())
        } else {
            (self.lower, self.lower_source.clone())
        };
        let (upper, upper_source) = if other.upper < self.upper {
            (other.upper, other.upper_source.clone())
        } else {
            (self.upper, self.upper_source.clone())
        };
        BoundInterval {
            lower,
            upper,
            lower_source,
            upper_source,
        }
    }
}

/// Subtree sums of `mu * f^(p-1)` (signed power), one reverse pass.
pub(crate) fn subtree_power_sums(
    tree: &WeightedTree,
    p: PExponent,
    f: &VertexFunction,
) -> Vec<f64> {
    let q = p.p();
    let n = tree.vertex_count();
    let mut acc: Vec<CompensatedSum> = (0..n)
        .map(|i| {
            let mut s = CompensatedSum::new();
            if i != 0 {
                s.add(tree.mu(i) * signed_power(f.value(i), q));
            }
            s
        })
        .collect();
    for i in (1..n).rev() {
        let v = acc[i].value();
        acc[tree.parent_of(i)].add(v);
    }
    acc.into_iter().map(|s| s.value()).collect()
}

/// Single-sum functional at every non-root vertex: the subtree power sum
/// divided by `nu_i * (f_i - f_parent)^(p-1)`. A zero increment yields
/// `+inf` (the 1/0 convention); slot 0 is unused.
///
/// Callers are responsible for domain membership; `bounds_from_test_function`
/// validates first.
pub fn single_sum(
    tree: &WeightedTree,
    p: PExponent,
    f: &VertexFunction,
) -> Vec<f64> {
    let q = p.p();
    let sums = subtree_power_sums(tree, p, f);
    let mut out = vec![0.0; tree.vertex_count()];
    for i in tree.non_root() {
        let d = f.value(i) - f.value(tree.parent_of(i));
        out[i] = if d == 0.0 {
            f64::INFINITY
        } else {
            sums[i] / (tree.nu(i) * signed_power(d, q))
        };
    }
    out
}

/// Double-sum functional at every non-root vertex. Computed from the subtree
/// power sums and one forward pass of `nu_hat * sum^(p̂-1)` down each root
/// path; a zero function value yields `+inf`.
pub fn double_sum(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    f: &VertexFunction,
) -> Vec<f64> {
    let path = double_sum_path_accumulation(tree, weights, p, f);
    let mut out = vec![0.0; tree.vertex_count()];
    for i in tree.non_root() {
        let fi = f.value(i);
        out[i] = if fi == 0.0 {
            f64::INFINITY
        } else {
            (path[i].value() / fi).powf(p.p() - 1.0)
        };
    }
    out
}

fn double_sum_path_accumulation(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    f: &VertexFunction,
) -> Vec<CompensatedSum> {
    debug_assert_eq!(weights.len(), tree.vertex_count());
    let dual = p.conjugate() - 1.0;
    let sums = subtree_power_sums(tree, p, f);
    let mut path = vec![CompensatedSum::new(); tree.vertex_count()];
    for i in tree.non_root() {
        let mut acc = path[tree.parent_of(i)];
        acc.add(weights.nu_hat(i) * sums[i].powf(dual));
        path[i] = acc;
    }
    path
}

/// Difference-form functional of a ratio function at every non-root vertex:
/// `(nu_i (1 - 1/w_i)^(p-1) - sum_children nu_j (w_j - 1)^(p-1)) / mu_i`.
/// An infinite child ratio sends the value to `-inf` without any float
/// arithmetic on the sentinel.
pub fn difference_form(tree: &WeightedTree, p: PExponent, w: &RatioFunction) -> Vec<f64> {
    difference_form_impl(tree, p, w, None)
}

/// Difference form with the vertex weight replaced by the subtree mass at
/// level `m` and the value pinned to 0 beyond level `m`.
pub fn difference_form_truncated(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    w: &RatioFunction,
    m: u32,
) -> Vec<f64> {
    difference_form_impl(tree, p, w, Some((weights, m)))
}

fn difference_form_impl(
    tree: &WeightedTree,
    p: PExponent,
    w: &RatioFunction,
    truncation: Option<(&DerivedWeights, u32)>,
) -> Vec<f64> {
    let q = p.p();
    let mut out = vec![0.0; tree.vertex_count()];
    for i in tree.non_root() {
        if let Some((_, m)) = truncation {
            if tree.level(i) > m {
                out[i] = 0.0;
                continue;
            }
        }
        let mut infinite_child = false;
        let mut child_sum = CompensatedSum::new();
        for &j in tree.children(i) {
            match w.value(j) {
                RatioValue::Finite(x) => child_sum.add(tree.nu(j) * signed_power(x - 1.0, q)),
                RatioValue::Infinite => infinite_child = true,
            }
        }
        if infinite_child {
            out[i] = f64::NEG_INFINITY;
            continue;
        }
        let parent_term = tree.nu(i) * signed_power(w.value(i).one_minus_reciprocal(), q);
        let mass = match truncation {
            Some((weights, m)) if tree.level(i) == m => weights.subtree_mu(i),
            _ => tree.mu(i),
        };
        out[i] = (parent_term - child_sum.value()) / mass;
    }
    out
}

fn extremum<I: Iterator<Item = (VertexId, f64)>>(iter: I, want_max: bool) -> (VertexId, f64) {
    let mut best: Option<(VertexId, f64)> = None;
    for (i, v) in iter {
        let better = match best {
            None => true,
            // Strict comparison keeps the smallest BFS index on ties.
            Some((_, b)) => {
                if want_max {
                    v > b
                } else {
                    v < b
                }
            }
        };
        if better {
            best = Some((i, v));
        }
    }
    best.expect("at least one non-root vertex")
}

/// Validates the function against its claimed domain, then extracts the one
/// bound that domain certifies: a vertex infimum (lower bound) for the plain
/// domains, a vertex supremum below the cutoff (upper bound) for the plateau
/// domains.
pub fn bounds_from_test_function(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    input: TestFunction<'_>,
    tag: DomainTag,
    id: &str,
) -> Result<BoundInterval, DomainViolation> {
    validate_domain(tree, p, input, tag)?;
    let interval = match (tag, input) {
        (DomainTag::Increasing, TestFunction::Values(f)) => {
            let vals = single_sum(tree, p, f);
            let (v, max) = extremum(tree.non_root().map(|i| (i, vals[i])), true);
            BoundInterval::lower_only(
                1.0 / max,
                format!("single-sum inf over vertices, test function '{id}', vertex {v}"),
            )
        }
        (DomainTag::Positive, TestFunction::Values(f)) => {
            let vals = double_sum(tree, weights, p, f);
            let (v, max) = extremum(tree.non_root().map(|i| (i, vals[i])), true);
            BoundInterval::lower_only(
                1.0 / max,
                format!("double-sum inf over vertices, test function '{id}', vertex {v}"),
            )
        }
        (DomainTag::Ratio, TestFunction::Ratios(w)) => {
            let vals = difference_form(tree, p, w);
            let (v, min) = extremum(tree.non_root().map(|i| (i, vals[i])), false);
            BoundInterval::lower_only(
                min,
                format!("difference-form inf over vertices, test function '{id}', vertex {v}"),
            )
        }
        (DomainTag::IncreasingPlateau { cutoff }, TestFunction::Values(f)) => {
            let vals = single_sum(tree, p, f);
            let (v, min) = extremum(
                tree.non_root()
                    .filter(|&i| tree.level(i) <= cutoff)
                    .map(|i| (i, vals[i])),
                false,
            );
            BoundInterval::upper_only(
                1.0 / min,
                format!("single-sum sup below cutoff {cutoff}, test function '{id}', vertex {v}"),
            )
        }
        (DomainTag::PositivePlateau { .. } | DomainTag::PositiveIntegrable, TestFunction::Values(f)) => {
            // Beyond the detected plateau the double-sum inverse only
            // decreases, so the supremum over levels up to the cutoff is the
            // global one.
            let cutoff = match tag {
                DomainTag::PositivePlateau { cutoff } => cutoff,
                _ => detect_plateau(tree, f).expect("nonzero validated function"),
            };
            let vals = double_sum(tree, weights, p, f);
            let (v, min) = extremum(
                tree.non_root()
                    .filter(|&i| tree.level(i) <= cutoff && f.value(i) > 0.0)
                    .map(|i| (i, vals[i])),
                false,
            );
            BoundInterval::upper_only(
                1.0 / min,
                format!("double-sum sup below cutoff {cutoff}, test function '{id}', vertex {v}"),
            )
        }
        (DomainTag::RatioPlateau { cutoff }, TestFunction::Ratios(w)) => {
            let vals = difference_form_truncated(tree, weights, p, w, cutoff);
            let (v, max) = extremum(
                tree.non_root()
                    .filter(|&i| tree.level(i) <= cutoff)
                    .map(|i| (i, vals[i])),
                true,
            );
            BoundInterval::upper_only(
                max,
                format!(
                    "truncated difference-form sup below cutoff {cutoff}, test function '{id}', vertex {v}"
                ),
            )
        }
        _ => unreachable!("validate_domain rejects kind mismatches"),
    };
    Ok(interval)
}

/// The double-sum map itself (unnormalized): the image's edge increments
/// satisfy `nu_i (g_i - g_parent)^(p-1) = subtree power sum of f at i`,
/// so the image is strictly increasing along root paths whenever `f` is
/// nonnegative with full-support subtree sums.
pub fn double_sum_image(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    f: &VertexFunction,
) -> VertexFunction {
    let (image, _, _) = ii_step(tree, weights, p, f);
    VertexFunction::from_raw(image)
}

/// One inverse-iteration step and its certified interval.
#[derive(Debug, Clone)]
pub struct IterationStep {
    pub lower: f64,
    pub upper: f64,
    /// The next iterate: the double-sum image of the previous one,
    /// normalized to 1 at the root's first child.
    pub iterate: VertexFunction,
}

/// Result of running the double-sum inverse iteration.
#[derive(Debug, Clone)]
pub struct IiRun {
    pub steps: Vec<IterationStep>,
    pub converged: bool,
}

impl IiRun {
    pub fn last_interval(&self) -> BoundInterval {
        let step = self.steps.last().expect("at least one step");
        BoundInterval {
            lower: step.lower,
            upper: step.upper,
            lower_source: Some("double-sum iteration inf".into()),
            upper_source: Some("double-sum iteration sup".into()),
        }
    }
}

/// Applies the double-sum map once: the image's increment over each edge is
/// `((subtree power sum)/nu)^(p̂-1)`, so the image is positive and strictly
/// increasing whenever `f` is nonnegative and nonzero. Returns the image
/// (unnormalized) together with inf/sup of the double-sum inverse of `f`.
pub(crate) fn ii_step(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    f: &VertexFunction,
) -> (Vec<f64>, f64, f64) {
    let path = double_sum_path_accumulation(tree, weights, p, f);
    let pm1 = p.p() - 1.0;
    let mut lower = f64::INFINITY;
    let mut upper: f64 = 0.0;
    let mut image = vec![0.0; tree.vertex_count()];
    for i in tree.non_root() {
        let g = path[i].value();
        image[i] = g;
        let fi = f.value(i);
        let inv = if fi == 0.0 { 0.0 } else { (fi / g).powf(pm1) };
        if inv < lower {
            lower = inv;
        }
        if inv > upper {
            upper = inv;
        }
    }
    (image, lower, upper)
}

/// Runs the double-sum inverse iteration from `f0`, which must be
/// nonnegative, nonzero, and zero at the root. Each step records the
/// certified interval `[inf, sup]` of the double-sum inverse of the current
/// iterate and replaces it with its normalized image. Stops when the
/// interval width falls below `tol * lower`, or flags non-convergence after
/// `max_iters` steps.
///
/// Zeros in `f0` survive into the image on subtrees the support never
/// reaches, making the lower bounds trivial (0); start from a positive
/// function, e.g. `VertexFunction::constant_one`, for nontrivial intervals.
///
/// When the root has several children the problem decouples into branches
/// and the supremum side of the interval converges to the *largest* branch
/// eigenvalue, so the run is flagged unconverged even though both bounds are
/// valid; `solver::solve_principal` performs the branch decomposition.
pub fn ii_iteration(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    f0: &VertexFunction,
    max_iters: usize,
    tol: f64,
) -> Result<IiRun, DomainViolation> {
    validate_domain(tree, p, TestFunction::Values(f0), DomainTag::PositiveIntegrable)?;
    let mut f = f0.clone();
    let mut steps = Vec::new();
    let mut converged = false;
    for _ in 0..max_iters.max(1) {
        let (mut image, lower, upper) = ii_step(tree, weights, p, &f);
        let anchor = image[1];
        for v in &mut image[1..] {
            *v /= anchor;
        }
        let iterate = VertexFunction::from_raw(image);
        steps.push(IterationStep {
            lower,
            upper,
            iterate: iterate.clone(),
        });
        if upper - lower <= tol * lower {
            converged = true;
            break;
        }
        f = iterate;
    }
    Ok(IiRun { steps, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::relative_gap;
    use crate::tree::VertexSpec;
    use crate::weights::derive_weights;

    fn p(v: f64) -> PExponent {
        PExponent::new(v).unwrap()
    }

    fn single_edge(nu: f64, mu: f64) -> WeightedTree {
        WeightedTree::build(&[
            VertexSpec::new("o", None, 1.0, None),
            VertexSpec::new("a", Some("o"), mu, Some(nu)),
        ])
        .unwrap()
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
    fn single_sum_on_single_edge() {
        let t = single_edge(2.0, 3.0);
        let f = VertexFunction::new(&t, vec![0.0, 1.0]).unwrap();
        for q in [1.5, 2.0, 3.0] {
            let vals = single_sum(&t, p(q), &f);
            assert!((vals[1] - 1.5).abs() < 1e-15);
        }
        let dw = derive_weights(&t, p(2.0)).unwrap();
        let b = bounds_from_test_function(
            &t,
            &dw,
            p(2.0),
            TestFunction::Values(&f),
            DomainTag::Increasing,
            "f",
        )
        .unwrap();
        assert!((b.lower - 2.0 / 3.0).abs() < 1e-15);
        assert!(b.upper.is_infinite());
    }

    #[test]
    fn double_sum_on_single_edge_ignores_value() {
        let t = single_edge(2.0, 3.0);
        for q in [1.5, 2.0, 2.5, 4.0] {
            let dw = derive_weights(&t, p(q)).unwrap();
            for v in [0.3, 1.0, 7.0] {
                let f = VertexFunction::new(&t, vec![0.0, v]).unwrap();
                let vals = double_sum(&t, &dw, p(q), &f);
                assert!(
                    relative_gap(vals[1], 1.5) < 1e-13,
                    "p={q} v={v}: {}",
                    vals[1]
                );
            }
        }
    }

    #[test]
    fn double_sum_matches_brute_force() {
        // Constant 1 from level 1 on the 2-path, p = 2: the level-1 value is
        // the dual weight times the subtree mass.
        let t = unit_path(2);
        let dw = derive_weights(&t, p(2.0)).unwrap();
        let f = VertexFunction::constant_one(&t);
        let vals = double_sum(&t, &dw, p(2.0), &f);
        assert!((vals[1] - 2.0).abs() < 1e-15);

        // Brute-force evaluation of the nested sums on a branched tree.
        let tree = WeightedTree::build(&[
            VertexSpec::new("o", None, 1.0, None),
            VertexSpec::new("a", Some("o"), 0.7, Some(1.3)),
            VertexSpec::new("b", Some("a"), 2.0, Some(0.4)),
            VertexSpec::new("c", Some("a"), 0.5, Some(2.2)),
            VertexSpec::new("d", Some("b"), 1.1, Some(0.9)),
        ])
        .unwrap();
        let q = p(2.7);
        let dw = derive_weights(&tree, q).unwrap();
        let f = VertexFunction::new(&tree, vec![0.0, 0.8, 1.4, 0.3, 2.0]).unwrap();
        let fast = double_sum(&tree, &dw, q, &f);
        for i in tree.non_root() {
            let mut path_total = 0.0;
            for k in tree.path_to_root(i).unwrap() {
                let mut sub = 0.0;
                for j in tree.subtree_vertices(k).unwrap() {
                    sub += tree.mu(j) * f.value(j).powf(q.p() - 1.0);
                }
                path_total += dw.nu_hat(k) * sub.powf(q.conjugate() - 1.0);
            }
            let brute = (path_total / f.value(i)).powf(q.p() - 1.0);
            assert!(relative_gap(fast[i], brute) < 1e-12);
        }
    }

    #[test]
    fn difference_form_single_edge() {
        let t = single_edge(2.0, 3.0);
        let q = p(2.5);
        for c in [1.5, 4.0, 100.0] {
            let w = RatioFunction::new(&t, vec![RatioValue::Infinite, RatioValue::Finite(c)])
                .unwrap();
            let vals = difference_form(&t, q, &w);
            let expect = 2.0 * (1.0 - 1.0 / c).powf(1.5) / 3.0;
            assert!(relative_gap(vals[1], expect) < 1e-14);
        }
        // With the boundary sentinel the value reaches nu/mu.
        let w = RatioFunction::new(&t, vec![RatioValue::Infinite, RatioValue::Infinite]).unwrap();
        let vals = difference_form(&t, q, &w);
        assert!((vals[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_difference_uses_subtree_mass() {
        let t = unit_path(2);
        let q = p(2.0);
        let dw = derive_weights(&t, q).unwrap();
        let w = RatioFunction::new(
            &t,
            vec![
                RatioValue::Infinite,
                RatioValue::Infinite,
                RatioValue::Finite(1.0),
            ],
        )
        .unwrap();
        let vals = difference_form_truncated(&t, &dw, q, &w, 1);
        assert!((vals[1] - 0.5).abs() < 1e-15); // mass 2 at the cutoff
        assert_eq!(vals[2], 0.0);

        let b = bounds_from_test_function(
            &t,
            &dw,
            q,
            TestFunction::Ratios(&w),
            DomainTag::RatioPlateau { cutoff: 1 },
            "w",
        )
        .unwrap();
        // Upper bound 1/2 encloses the true value (3 - sqrt 5)/2.
        assert!((b.upper - 0.5).abs() < 1e-15);
        assert!(b.upper >= (3.0 - 5f64.sqrt()) / 2.0);
    }

    #[test]
    fn ii_iteration_single_edge_converges_immediately() {
        let t = single_edge(2.0, 3.0);
        for q in [1.5, 2.0, 3.0, 4.0] {
            let dw = derive_weights(&t, p(q)).unwrap();
            let run = ii_iteration(
                &t,
                &dw,
                p(q),
                &VertexFunction::constant_one(&t),
                50,
                1e-12,
            )
            .unwrap();
            assert!(run.converged);
            assert_eq!(run.steps.len(), 1);
            let iv = run.last_interval();
            assert!(relative_gap(iv.lower, 2.0 / 3.0) < 1e-14);
            assert!(relative_gap(iv.upper, 2.0 / 3.0) < 1e-14);
        }
    }

    #[test]
    fn ii_iteration_two_path_hits_known_value() {
        let t = unit_path(2);
        let q = p(2.0);
        let dw = derive_weights(&t, q).unwrap();
        let run = ii_iteration(&t, &dw, q, &VertexFunction::constant_one(&t), 60, 1e-10).unwrap();
        assert!(run.converged, "not converged in 60 iterations");
        let iv = run.last_interval();
        let truth = (3.0 - 5f64.sqrt()) / 2.0;
        assert!(iv.lower <= truth + 1e-12 && truth - 1e-12 <= iv.upper);
        assert!(relative_gap((iv.lower * iv.upper).sqrt(), truth) < 1e-10);
    }

    #[test]
    fn ii_bounds_are_monotone() {
        let t = unit_path(5);
        let q = p(3.0);
        let dw = derive_weights(&t, q).unwrap();
        let run = ii_iteration(&t, &dw, q, &VertexFunction::constant_one(&t), 200, 1e-12).unwrap();
        for pair in run.steps.windows(2) {
            assert!(pair[1].lower >= pair[0].lower - 1e-12 * pair[0].lower.abs());
            assert!(pair[1].upper <= pair[0].upper + 1e-12 * pair[0].upper.abs());
        }
    }

    #[test]
    fn interval_intersection_prefers_tighter_sides() {
        let a = BoundInterval::lower_only(0.2, "a".into());
        let b = BoundInterval::upper_only(0.7, "b".into());
        let c = a.intersect(&b);
        assert_eq!(c.lower, 0.2);
        assert_eq!(c.upper, 0.7);
        assert_eq!(c.lower_source.as_deref(), Some("a"));
        assert_eq!(c.upper_source.as_deref(), Some("b"));
    }
}
