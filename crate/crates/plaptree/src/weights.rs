//! Exponent-dependent aggregates derived from a tree once per `(tree, p)`.

use crate::error::TreeError;
use crate::exponent::PExponent;
use crate::num::CompensatedSum;
use crate::tree::{VertexId, WeightedTree};

/// Precomputed per-vertex aggregates:
///
/// * `nu_hat`: the dual edge weight `nu^(1 - p̂)`;
/// * `subtree_mu`: vertex-weight mass of the subtree (vertex included);
/// * `path_nu_hat`: sum of `nu_hat` along the root path (root excluded);
/// * `phi`: `path_nu_hat^(p-1)`, nondecreasing along every root path.
#[derive(Debug, Clone)]
pub struct DerivedWeights {
    nu_hat: Vec<f64>,
    subtree_mu: Vec<f64>,
    path_nu_hat: Vec<f64>,
    phi: Vec<f64>,
}

impl DerivedWeights {
    pub fn nu_hat(&self, i: VertexId) -> f64 {
        debug_assert!(i != 0);
        self.nu_hat[i]
    }

    pub fn subtree_mu(&self, i: VertexId) -> f64 {
        self.subtree_mu[i]
    }

    pub fn path_nu_hat(&self, i: VertexId) -> f64 {
        debug_assert!(i != 0);
        self.path_nu_hat[i]
    }

    pub fn phi(&self, i: VertexId) -> f64 {
        debug_assert!(i != 0);
        self.phi[i]
    }

    pub fn len(&self) -> usize {
        self.nu_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu_hat.is_empty()
    }
}

/// One reverse pass for subtree masses, one forward pass for path sums.
pub fn derive_weights(tree: &WeightedTree, p: PExponent) -> Result<DerivedWeights, TreeError> {
    let n = tree.vertex_count();
    let dual = 1.0 - p.conjugate();
    let mut nu_hat = vec![0.0; n];
    for i in tree.non_root() {
        nu_hat[i] = tree.nu(i).powf(dual);
    }

    let subtree_mu = tree.subtree_mu_masses();

    // Path sums carry the compensation down each chain.
    let mut path_acc = vec![CompensatedSum::new(); n];
    let mut path_nu_hat = vec![0.0; n];
    let mut phi = vec![0.0; n];
    for i in tree.non_root() {
        let mut acc = path_acc[tree.parent_of(i)];
        acc.add(nu_hat[i]);
        path_acc[i] = acc;
        path_nu_hat[i] = acc.value();
        phi[i] = path_nu_hat[i].powf(p.p() - 1.0);
    }

    for i in tree.non_root() {
        if !(nu_hat[i].is_finite() && path_nu_hat[i].is_finite() && phi[i].is_finite()) {
            return Err(TreeError::NonFinite(tree.label(i).to_owned()));
        }
    }
    if subtree_mu.iter().any(|m| !m.is_finite()) {
        return Err(TreeError::NonFinite(tree.label(0).to_owned()));
    }

    Ok(DerivedWeights {
        nu_hat,
        subtree_mu,
        path_nu_hat,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{generate_homogeneous, VertexSpec};

    fn p(v: f64) -> PExponent {
        PExponent::new(v).unwrap()
    }

    #[test]
    fn single_edge_values() {
        let t = WeightedTree::build(&[
            VertexSpec::new("o", None, 1.0, None),
            VertexSpec::new("a", Some("o"), 3.0, Some(2.0)),
        ])
        .unwrap();
        let dw = derive_weights(&t, p(2.0)).unwrap();
        assert_eq!(dw.nu_hat(1), 0.5); // p = 2 makes the dual weight 1/nu
        assert_eq!(dw.subtree_mu(1), 3.0);
        assert_eq!(dw.phi(1), 0.5);
    }

    #[test]
    fn unit_path_accumulates_levels() {
        let mut spec = vec![VertexSpec::new("v0", None, 1.0, None)];
        for k in 1..=5 {
            spec.push(VertexSpec::new(
                format!("v{k}"),
                Some(&format!("v{}", k - 1)),
                1.0,
                Some(1.0),
            ));
        }
        let t = WeightedTree::build(&spec).unwrap();
        let dw = derive_weights(&t, p(2.0)).unwrap();
        for i in t.non_root() {
            assert_eq!(dw.path_nu_hat(i), t.level(i) as f64);
        }
    }

    #[test]
    fn homogeneous_subtree_mass() {
        let t = generate_homogeneous(2, 2, 0.25, 1.0).unwrap();
        let dw = derive_weights(&t, p(2.0)).unwrap();
        assert!((dw.subtree_mu(1) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn phi_monotone_along_paths() {
        let t = generate_homogeneous(3, 5, 0.2, 0.7).unwrap();
        for pv in [1.5, 2.0, 2.5, 3.0] {
            let dw = derive_weights(&t, p(pv)).unwrap();
            for i in t.non_root() {
                if t.parent_of(i) != 0 {
                    assert!(dw.phi(i) >= dw.phi(t.parent_of(i)));
                }
            }
        }
    }

    #[test]
    fn subtree_mass_recursion() {
        let t = generate_homogeneous(2, 4, 0.3, 1.0).unwrap();
        let dw = derive_weights(&t, p(2.5)).unwrap();
        for i in t.vertices() {
            let direct: f64 =
                t.mu(i) + t.children(i).iter().map(|&c| dw.subtree_mu(c)).sum::<f64>();
            assert!((dw.subtree_mu(i) - direct).abs() <= 1e-12 * direct);
        }
    }
}
