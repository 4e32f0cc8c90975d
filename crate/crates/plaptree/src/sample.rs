//! Reproducible random trees and functions, used by the verification suites
//! and handy for exploration.

use crate::form::VertexFunction;
use crate::rng::Lcg64;
use crate::tree::{VertexSpec, WeightedTree};

/// A random tree with exactly `vertices` vertices (at least 2), levels capped
/// at `max_level`, and log-uniform weights in `[weight_lo, weight_hi)`.
/// Parents are drawn uniformly among the non-root vertices that still have
/// room below the level cap, so shapes range from near-paths to near-stars.
///
/// The root always has exactly one child. That is the setting in which the
/// eigenfunction is positive and increasing; a root with several children
/// splits the problem into independent branches instead.
pub fn random_tree(
    rng: &mut Lcg64,
    vertices: usize,
    max_level: u32,
    weight_lo: f64,
    weight_hi: f64,
) -> WeightedTree {
    assert!(vertices >= 2, "need at least a root and one child");
    assert!(max_level >= 2 || vertices == 2, "depth 1 only fits a single edge");
    let mut spec = Vec::with_capacity(vertices);
    let mut levels = vec![0u32; vertices];
    spec.push(VertexSpec::new("v0", None, rng.log_uniform(weight_lo, weight_hi), None));
    for k in 1..vertices {
        let parent = if k == 1 {
            0
        } else {
            // Uniform among eligible non-root parents; resample on level
            // overflow.
            loop {
                let cand = 1 + rng.below(k - 1);
                if levels[cand] < max_level {
                    break cand;
                }
            }
        };
        levels[k] = levels[parent] + 1;
        spec.push(VertexSpec::new(
            format!("v{k}"),
            Some(&format!("v{parent}")),
            rng.log_uniform(weight_lo, weight_hi),
            Some(rng.log_uniform(weight_lo, weight_hi)),
        ));
    }
    WeightedTree::build(&spec).expect("generated spec is valid")
}

/// Uniform values in [lo, hi) on the non-root vertices, zero at the root.
pub fn random_function(rng: &mut Lcg64, tree: &WeightedTree, lo: f64, hi: f64) -> VertexFunction {
    let values: Vec<f64> = tree
        .vertices()
        .map(|i| if i == 0 { 0.0 } else { rng.uniform(lo, hi) })
        .collect();
    VertexFunction::new(tree, values).expect("generated values are valid")
}

/// A random member of the strictly-increasing domain: positive increments
/// accumulated along root paths.
pub fn random_increasing_function(rng: &mut Lcg64, tree: &WeightedTree) -> VertexFunction {
    let mut values = vec![0.0; tree.vertex_count()];
    for i in tree.non_root() {
        values[i] = values[tree.parent_of(i)] + rng.uniform(0.05, 1.0);
    }
    VertexFunction::new(tree, values).expect("increasing values are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respects_size_and_level_caps() {
        let mut rng = Lcg64::new(123);
        for _ in 0..20 {
            let n = 2 + rng.below(120);
            let t = random_tree(&mut rng, n, 6, 0.1, 10.0);
            assert_eq!(t.vertex_count(), n);
            assert!(t.max_level() <= 6);
            for i in t.non_root() {
                assert!(t.mu(i) > 0.0 && t.nu(i) > 0.0);
            }
        }
    }

    #[test]
    fn increasing_samples_increase() {
        let mut rng = Lcg64::new(9);
        let t = random_tree(&mut rng, 40, 8, 0.5, 2.0);
        let f = random_increasing_function(&mut rng, &t);
        for i in t.non_root() {
            assert!(f.value(i) > f.value(t.parent_of(i)));
        }
    }
}
