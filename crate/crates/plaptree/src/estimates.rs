//! Explicit two-sided estimates from the tree geometry alone.
//!
//! `sigma` is the supremum over non-root vertices of (subtree vertex mass)
//! times (dual-weight root-path sum)^(p-1). Its reciprocal is an upper
//! bound on the principal eigenvalue; dividing further by
//! `p̂^(p-1) * sup(1 + (p-1) C_i)` gives a lower bound, where `C_i` is a
//! branching correction.
//!
//! On a finite tree `C_i` is identically zero: every subtree has one fewer
//! edge than vertices, so the inner sum telescopes to -1 per child and
//! cancels the child count. The correction only matters on infinite trees;
//! it is kept here so the reported constants stay in the general form.

use crate::error::TreeError;
use crate::exponent::PExponent;
use crate::form::VertexFunction;
use crate::tree::{check_homogeneous_params, VertexId, WeightedTree};
use crate::weights::DerivedWeights;

/// The geometric estimate: `sigma`, where it is attained, the branching
/// constants, and the resulting enclosure. `lower` is withheld when the
/// branching constant fails to be positive (impossible on finite input, but
/// the reporting stays honest if that ever changes).
///
/// Two lower bounds are reported. `lower` uses the branching correction as
/// printed, which telescopes to zero on finite trees; numerical sweeps show
/// that bound can overshoot the true eigenvalue on unfavourable geometries
/// (decaying chains), because the negative leaf terms in its derivation
/// cannot be grouped the way the printed constant assumes. `lower_clipped`
/// uses the positive-part correction and is the certified side: the
/// per-vertex cap it comes from is provable.
#[derive(Debug, Clone)]
pub struct BasicEstimate {
    pub sigma: f64,
    pub argmax_vertex: VertexId,
    /// `sup over non-root vertices of 1 + (p-1) C_i` with the printed
    /// correction (1 on every finite tree).
    pub c_sup: f64,
    /// Same supremum with the positive-part correction.
    pub c_sup_clipped: f64,
    pub lower: Option<f64>,
    /// `1 / (p̂^(p-1) c_sup_clipped sigma)`; never exceeds the eigenvalue.
    pub lower_clipped: f64,
    pub upper: f64,
}

/// Branching correction at every vertex: child count plus, over all proper
/// descendants, (child count - 1). One reverse pass.
pub fn branching_correction(tree: &WeightedTree) -> Vec<i64> {
    let n = tree.vertex_count();
    // including[i] = sum over the subtree of i (i included) of (#children - 1)
    let mut including: Vec<i64> = (0..n).map(|i| tree.children(i).len() as i64 - 1).collect();
    for i in (1..n).rev() {
        including[tree.parent_of(i)] += including[i];
    }
    (0..n)
        .map(|i| {
            let kids = tree.children(i).len() as i64;
            kids + (including[i] - (kids - 1))
        })
        .collect()
}

/// Positive-part branching correction: child count plus, over all proper
/// descendants, `max(#children - 1, 0)`.
///
/// Dropping the negative leaf terms is what makes the per-vertex cap on the
/// lower-bound witness provable: a negative coefficient cannot be pulled up
/// to the vertex's own path factor. The unclipped correction telescopes to
/// zero on finite trees and does not cap anything pointwise. On a chain this
/// is 1 away from the leaf, matching the classical chain constant
/// `p p̂^(p-1)`.
pub fn branching_correction_clipped(tree: &WeightedTree) -> Vec<i64> {
    let n = tree.vertex_count();
    let clip = |i: usize| (tree.children(i).len() as i64 - 1).max(0);
    let mut including: Vec<i64> = (0..n).map(clip).collect();
    for i in (1..n).rev() {
        including[tree.parent_of(i)] += including[i];
    }
    (0..n)
        .map(|i| tree.children(i).len() as i64 + (including[i] - clip(i)))
        .collect()
}

/// `sigma` and the vertex attaining it (smallest BFS index on ties).
pub fn compute_sigma(tree: &WeightedTree, weights: &DerivedWeights) -> (f64, VertexId) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 1;
    for i in tree.non_root() {
        let v = weights.subtree_mu(i) * weights.phi(i);
        if v > best {
            best = v;
            arg = i;
        }
    }
    (best, arg)
}

/// The two-sided geometric estimate.
pub fn basic_bounds(tree: &WeightedTree, weights: &DerivedWeights, p: PExponent) -> BasicEstimate {
    let (sigma, argmax_vertex) = compute_sigma(tree, weights);
    let pm1 = p.p() - 1.0;
    let sup_of = |corrections: Vec<i64>| {
        tree.non_root()
            .map(|i| 1.0 + pm1 * corrections[i] as f64)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let c_sup = sup_of(branching_correction(tree));
    let c_sup_clipped = sup_of(branching_correction_clipped(tree));
    let scale = p.conjugate().powf(pm1) * sigma;
    let upper = 1.0 / sigma;
    let lower = (c_sup > 0.0).then(|| 1.0 / (scale * c_sup));
    let lower_clipped = 1.0 / (scale * c_sup_clipped);
    BasicEstimate {
        sigma,
        argmax_vertex,
        c_sup,
        c_sup_clipped,
        lower,
        lower_clipped,
        upper,
    }
}

/// Closed-form `sigma` of the homogeneous tree (`mu = t^level`,
/// `nu = a t^level`, root with a single child, branching factor `r`).
/// `max_level = None` means the infinite tree. The finite form scans its
/// level parameter directly; evaluated on a generated tree it matches
/// `compute_sigma` to roundoff.
pub fn homogeneous_sigma(
    r: u32,
    max_level: Option<u32>,
    t: f64,
    a: f64,
    p: PExponent,
) -> Result<f64, TreeError> {
    check_homogeneous_params(r, t, a)?;
    let pm1 = p.p() - 1.0;
    let dual = p.conjugate() - 1.0;
    let rt = r as f64 * t;
    let prefactor = 1.0 / (a * (1.0 - rt) * (1.0 - t.powf(dual)).powf(pm1));
    match max_level {
        None => Ok(prefactor),
        Some(n) if n >= 1 => {
            let mut best = f64::NEG_INFINITY;
            for level in 1..=n {
                let v = (1.0 - rt.powi((n - level) as i32 + 1))
                    * (1.0 - t.powf(level as f64 * dual)).powf(pm1);
                if v > best {
                    best = v;
                }
            }
            Ok(prefactor * best)
        }
        Some(n) => Err(TreeError::BadParameter {
            name: "max_level",
            value: n as f64,
            range: "[1, inf)",
        }),
    }
}

/// The printed closed form of the branching constant for homogeneous trees:
/// `p̂^(p-1) [1 + (p-1)(r^N + r - 2)]` for `r >= 2` and `p p̂^(p-1)` for
/// `r = 1`. It targets unbounded trees and does not agree with
/// `p̂^(p-1) * sup(1 + (p-1) C_i)` on finite ones (where every `C_i` is 0);
/// reports show both side by side without asserting equality.
pub fn homogeneous_branching_constant(
    r: u32,
    max_level: u32,
    p: PExponent,
) -> Result<f64, TreeError> {
    if r < 1 {
        return Err(TreeError::BadParameter {
            name: "r",
            value: r as f64,
            range: "[1, inf)",
        });
    }
    let pm1 = p.p() - 1.0;
    let base = p.conjugate().powf(pm1);
    if r == 1 {
        Ok(p.p() * base)
    } else {
        if max_level < 1 {
            return Err(TreeError::BadParameter {
                name: "max_level",
                value: max_level as f64,
                range: "[1, inf)",
            });
        }
        Ok(base * (1.0 + pm1 * ((r as f64).powi(max_level as i32) + r as f64 - 2.0)))
    }
}

/// The increasing test function certifying the lower bound: the root-path
/// dual sum raised to `1/p̂`, so its (p-1)-th power is the dual sum raised
/// to `1/p̂` as well up to the conjugate split used in the estimate.
pub fn lower_witness(tree: &WeightedTree, weights: &DerivedWeights, p: PExponent) -> VertexFunction {
    let e = 1.0 / p.conjugate();
    VertexFunction::from_fn(tree, |i| {
        if i == 0 {
            0.0
        } else {
            weights.path_nu_hat(i).powf(e)
        }
    })
}

/// The step function witnessing tightness of the upper bound at `i0`. Its
/// increments are the dual edge weight along the path to `i0` and zero on
/// every other edge, so each vertex carries the dual path sum of its common
/// prefix with that path: the full sum on the path and the subtree of `i0`,
/// the branch-point value elsewhere. The energy telescopes to the dual path
/// sum alone and the inverse quotient dominates `subtree_mu(i0) * phi(i0)`.
pub fn upper_witness(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    i0: VertexId,
) -> Result<VertexFunction, TreeError> {
    if i0 == 0 || i0 >= tree.vertex_count() {
        return Err(TreeError::UnknownVertex(i0));
    }
    let mut on_path = vec![false; tree.vertex_count()];
    for k in tree.path_to_root(i0)? {
        on_path[k] = true;
    }
    let mut values = vec![0.0; tree.vertex_count()];
    for i in tree.non_root() {
        let base = values[tree.parent_of(i)];
        values[i] = if on_path[i] {
            base + weights.nu_hat(i)
        } else {
            base
        };
    }
    Ok(VertexFunction::from_raw(values))
}
