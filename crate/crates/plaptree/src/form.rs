//! Vertex functions, the p-Laplacian, and the Dirichlet form.

use thiserror::Error;

use crate::exponent::PExponent;
use crate::num::CompensatedSum;
use crate::tree::{VertexId, WeightedTree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("function length {got} does not match vertex count {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("value at the root must be 0, got {0}")]
    NonzeroRoot(f64),
    #[error("nonfinite value {value} at vertex {vertex}")]
    NonFiniteValue { vertex: VertexId, value: f64 },
    #[error("quotient undefined for the zero function")]
    ZeroFunction,
}

/// Real values on the vertices with the root pinned to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(tree: &WeightedTree, values: Vec<f64>) -> Result<Self, FormError> {
        if values.len() != tree.vertex_count() {
            return Err(FormError::LengthMismatch {
                got: values.len(),
                want: tree.vertex_count(),
            });
        }
        if values[0] != 0.0 {
            return Err(FormError::NonzeroRoot(values[0]));
        }
        for (vertex, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(FormError::NonFiniteValue { vertex, value });
            }
        }
        Ok(Self { values })
    }

    /// Builds from a per-vertex closure; the root value is forced to 0.
    pub fn from_fn(tree: &WeightedTree, f: impl Fn(VertexId) -> f64) -> Self {
        let mut values: Vec<f64> = tree.vertices().map(f).collect();
        values[0] = 0.0;
        Self { values }
    }

    /// 1 on every non-root vertex.
    pub fn constant_one(tree: &WeightedTree) -> Self {
        Self::from_fn(tree, |i| if i == 0 { 0.0 } else { 1.0 })
    }

    pub fn value(&self, i: VertexId) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| c * v).collect(),
        }
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert_eq!(values.first(), Some(&0.0));
        Self { values }
    }
}

/// `|x|^(q-2) x`, extended by 0 at the origin (its limit for q > 1).
///
/// Computed as `|x|^(q-1) * sign(x)` so no divergent intermediate appears
/// for q < 2.
pub fn signed_power(x: f64, q: f64) -> f64 {
    debug_assert!(q > 1.0);
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(q - 1.0).copysign(x)
    }
}

/// The weighted p-Laplacian on the non-root vertices: at `i`, the signed
/// (p-1)-powers of the increments towards all neighbours, weighted by the
/// edge weights. Slot 0 of the result is unused.
pub fn apply_p_laplacian(tree: &WeightedTree, p: PExponent, f: &VertexFunction) -> Vec<f64> {
    let q = p.p();
    let mut out = vec![0.0; tree.vertex_count()];
    for i in tree.non_root() {
        let fi = f.value(i);
        let mut acc = CompensatedSum::new();
        for &j in tree.children(i) {
            acc.add(tree.nu(j) * signed_power(f.value(j) - fi, q));
        }
        acc.add(tree.nu(i) * signed_power(f.value(tree.parent_of(i)) - fi, q));
        out[i] = acc.value();
    }
    out
}

/// Dirichlet energy: sum over non-root vertices of `nu_i |f_i - f_parent|^p`.
pub fn dirichlet_energy(tree: &WeightedTree, p: PExponent, f: &VertexFunction) -> f64 {
    let q = p.p();
    let mut acc = CompensatedSum::new();
    for i in tree.non_root() {
        acc.add(tree.nu(i) * (f.value(i) - f.value(tree.parent_of(i))).abs().powf(q));
    }
    acc.value()
}

/// Weighted p-mass: sum over non-root vertices of `mu_i |f_i|^p`.
/// The root is excluded (its value is pinned to 0), so the root vertex
/// weight never matters.
pub fn lp_mass(tree: &WeightedTree, p: PExponent, f: &VertexFunction) -> f64 {
    let q = p.p();
    let mut acc = CompensatedSum::new();
    for i in tree.non_root() {
        acc.add(tree.mu(i) * f.value(i).abs().powf(q));
    }
    acc.value()
}

/// Energy-to-mass quotient; scale invariant; its infimum over nonzero
/// functions is the principal eigenvalue.
pub fn rayleigh_quotient(
    tree: &WeightedTree,
    p: PExponent,
    f: &VertexFunction,
) -> Result<f64, FormError> {
    if f.is_zero() {
        return Err(FormError::ZeroFunction);
    }
    Ok(dirichlet_energy(tree, p, f) / lp_mass(tree, p, f))
}

/// The two evaluations of the pairing of `-Laplacian(f)` against `g`.
///
/// `vertex_sum` contracts the operator values against `g`; `edge_sum` is the
/// telescoped edge form. They agree identically for functions vanishing at
/// the root, which is the summation-by-parts identity checked in tests.
#[derive(Debug, Clone, Copy)]
pub struct PairingForms {
    pub vertex_sum: f64,
    pub edge_sum: f64,
}

pub fn pairing(
    tree: &WeightedTree,
    p: PExponent,
    f: &VertexFunction,
    g: &VertexFunction,
) -> PairingForms {
    let q = p.p();
    let omega = apply_p_laplacian(tree, p, f);
    let mut vertex = CompensatedSum::new();
    let mut edge = CompensatedSum::new();
    for i in tree.non_root() {
        vertex.add(-omega[i] * g.value(i));
        let df = f.value(i) - f.value(tree.parent_of(i));
        let dg = g.value(i) - g.value(tree.parent_of(i));
        edge.add(tree.nu(i) * signed_power(df, q) * dg);
    }
    PairingForms {
        vertex_sum: vertex.value(),
        edge_sum: edge.value(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::relative_gap;
    use crate::tree::VertexSpec;

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
    fn signed_power_examples() {
        assert_eq!(signed_power(-2.0, 3.0), -4.0);
        assert_eq!(signed_power(0.0, 1.5), 0.0);
        assert_eq!(signed_power(5.0, 2.0), 5.0);
        // Odd and increasing.
        assert_eq!(signed_power(1.5, 2.7), -signed_power(-1.5, 2.7));
        assert!(signed_power(2.0, 1.5) > signed_power(1.0, 1.5));
    }

    #[test]
    fn laplacian_single_edge() {
        let t = single_edge(2.0, 3.0);
        let f = VertexFunction::new(&t, vec![0.0, 1.0]).unwrap();
        for q in [1.5, 2.0, 3.0] {
            let omega = apply_p_laplacian(&t, p(q), &f);
            assert!((omega[1] + 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn laplacian_vanishes_on_flat_interior() {
        // Constant from level 1 on a path: zero differences at the interior.
        let t = unit_path(3);
        let f = VertexFunction::from_fn(&t, |i| if i == 0 { 0.0 } else { 1.0 });
        let omega = apply_p_laplacian(&t, p(2.5), &f);
        assert_eq!(omega[2], 0.0);
        assert_eq!(omega[3], 0.0);
    }

    #[test]
    fn energy_and_mass_examples() {
        let t = single_edge(2.0, 3.0);
        let f = VertexFunction::new(&t, vec![0.0, 1.0]).unwrap();
        for q in [1.5, 2.0, 3.0, 4.0] {
            assert_eq!(dirichlet_energy(&t, p(q), &f), 2.0);
        }
        assert_eq!(lp_mass(&t, p(2.0), &f), 3.0);

        let path = unit_path(2);
        let g = VertexFunction::new(&path, vec![0.0, 1.0, 1.0]).unwrap();
        assert_eq!(dirichlet_energy(&path, p(3.0), &g), 1.0);
        let h = VertexFunction::new(&path, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(lp_mass(&path, p(2.0), &h), 5.0);

        let zero = VertexFunction::from_fn(&path, |_| 0.0);
        assert_eq!(dirichlet_energy(&path, p(2.0), &zero), 0.0);
        assert_eq!(lp_mass(&path, p(2.0), &zero), 0.0);
        assert_eq!(
            rayleigh_quotient(&path, p(2.0), &zero),
            Err(FormError::ZeroFunction)
        );
    }

    #[test]
    fn rayleigh_single_edge_is_constant() {
        let t = single_edge(2.0, 3.0);
        for q in [1.5, 2.0, 3.0] {
            for v in [0.2, 1.0, 5.0] {
                let f = VertexFunction::new(&t, vec![0.0, v]).unwrap();
                let r = rayleigh_quotient(&t, p(q), &f).unwrap();
                assert!((r - 2.0 / 3.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rayleigh_path_level_function() {
        let t = unit_path(2);
        let f = VertexFunction::new(&t, vec![0.0, 1.0, 1.0]).unwrap();
        assert!((rayleigh_quotient(&t, p(2.0), &f).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pairing_matches_energy() {
        let t = unit_path(4);
        let f = VertexFunction::new(&t, vec![0.0, 0.3, -0.2, 1.1, 0.9]).unwrap();
        for q in [1.5, 2.0, 2.7, 4.0] {
            let both = pairing(&t, p(q), &f, &f);
            let e = dirichlet_energy(&t, p(q), &f);
            assert!(relative_gap(both.vertex_sum, e) < 1e-12);
            assert!(relative_gap(both.edge_sum, e) < 1e-12);
        }
        let zero = VertexFunction::from_fn(&t, |_| 0.0);
        let both = pairing(&t, p(2.7), &f, &zero);
        assert_eq!(both.vertex_sum, 0.0);
        assert_eq!(both.edge_sum, 0.0);
    }

    #[test]
    fn vertex_function_validation() {
        let t = unit_path(1);
        assert!(matches!(
            VertexFunction::new(&t, vec![1.0, 1.0]),
            Err(FormError::NonzeroRoot(_))
        ));
        assert!(matches!(
            VertexFunction::new(&t, vec![0.0]),
            Err(FormError::LengthMismatch { .. })
        ));
        assert!(matches!(
            VertexFunction::new(&t, vec![0.0, f64::NAN]),
            Err(FormError::NonFiniteValue { .. })
        ));
    }
}
