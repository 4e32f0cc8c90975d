//! Independent linear-algebra route at p = 2.
//!
//! Assembles the Dirichlet quadratic form relative to the vertex-weight
//! inner product as a dense symmetric matrix, Householder-tridiagonalizes
//! it, brackets the smallest eigenvalue by bisection on the inertia count,
//! and recovers the eigenvector by shifted inverse iteration plus
//! back-transform. Nothing here shares code with the nonlinear solver, so
//! the two can check each other.

use crate::exponent::PExponent;
use crate::form::VertexFunction;
use crate::rng::Lcg64;
use crate::solver::{eigen_residual, EigenPair, SolveError, SolveMethod};
use crate::tree::WeightedTree;

/// Dense assembly is quadratic in memory; refuse anything bigger.
pub const DENSE_VERTEX_CAP: usize = 2000;

/// Smallest eigenvalue and eigenvector of the p = 2 problem by dense
/// symmetric methods.
pub fn dense_p2_solve(tree: &WeightedTree) -> Result<EigenPair, SolveError> {
    let total = tree.vertex_count();
    if total > DENSE_VERTEX_CAP {
        return Err(SolveError::TooLarge {
            cap: DENSE_VERTEX_CAP,
            got: total,
        });
    }
    let n = total - 1; // non-root vertices, matrix index = vertex - 1

    // B = M^(-1/2) L M^(-1/2) with L the Dirichlet form matrix.
    let mut a = vec![vec![0.0f64; n]; n];
    for i in tree.non_root() {
        let row = i - 1;
        let mut diag = tree.nu(i);
        for &j in tree.children(i) {
            diag += tree.nu(j);
            let coupling = -tree.nu(j) / (tree.mu(i) * tree.mu(j)).sqrt();
            a[row][j - 1] = coupling;
            a[j - 1][row] = coupling;
        }
        a[row][row] = diag / tree.mu(i);
    }

    let (d, e, reflectors) = tridiagonalize(a);
    let (lambda, bisection_steps) = smallest_eigenvalue(&d, &e);
    let mut v = tridiag_eigenvector(&d, &e, lambda);
    apply_reflectors(&reflectors, &mut v);

    // Undo the similarity transform and pin the root-child value to 1.
    let mut g = vec![0.0; total];
    for i in tree.non_root() {
        g[i] = v[i - 1] / tree.mu(i).sqrt();
    }
    let anchor = g[1];
    if anchor == 0.0 {
        return Err(SolveError::NonConvergence {
            iterations: bisection_steps,
            lower: lambda,
            upper: lambda,
        });
    }
    for x in &mut g[1..] {
        *x /= anchor;
    }
    let g = VertexFunction::new(tree, g).map_err(|_| SolveError::NonConvergence {
        iterations: bisection_steps,
        lower: lambda,
        upper: lambda,
    })?;

    let p2 = PExponent::new(2.0).expect("2 is in range");
    let residual = eigen_residual(tree, p2, lambda, &g);
    Ok(EigenPair {
        lambda,
        g,
        residual,
        iterations: bisection_steps,
        method: SolveMethod::DenseP2,
        interval: (lambda, lambda),
    })
}

struct Reflector {
    /// First row/column the reflector acts on.
    offset: usize,
    v: Vec<f64>,
    beta: f64,
}

/// Householder reduction to symmetric tridiagonal form. Consumes the matrix;
/// returns the diagonal, the subdiagonal, and the reflectors for the
/// eigenvector back-transform.
fn tridiagonalize(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<f64>, Vec<Reflector>) {
    let n = a.len();
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::new();
    if n >= 3 {
        for k in 0..n - 2 {
            let m = n - k - 1;
            let x: Vec<f64> = (0..m).map(|r| a[k + 1 + r][k]).collect();
            let (v, beta) = householder_vector(&x);
            // New subdiagonal entry: the reflected column collapses onto e1.
            let vdotx: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
            e[k] = x[0] - beta * vdotx;

            if beta != 0.0 {
                // p = beta * A22 v ; w = p - (beta/2)(p.v) v ; A22 -= v w' + w v'
                let mut p = vec![0.0; m];
                for r in 0..m {
                    let mut s = 0.0;
                    for c in 0..m {
                        s += a[k + 1 + r][k + 1 + c] * v[c];
                    }
                    p[r] = beta * s;
                }
                let pv: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
                let half = 0.5 * beta * pv;
                let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - half * vi).collect();
                for r in 0..m {
                    for c in 0..m {
                        a[k + 1 + r][k + 1 + c] -= v[r] * w[c] + w[r] * v[c];
                    }
                }
            }
            for r in 1..m {
                a[k + 1 + r][k] = 0.0;
            }
            reflectors.push(Reflector {
                offset: k + 1,
                v,
                beta,
            });
        }
        e[n - 2] = a[n - 1][n - 2];
    } else if n == 2 {
        e[0] = a[1][0];
    }
    let d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    (d, e, reflectors)
}

/// Householder vector (normalized to leading entry 1) and scale such that
/// `(I - beta v v^T) x` is a multiple of e1.
fn householder_vector(x: &[f64]) -> (Vec<f64>, f64) {
    let sigma: f64 = x[1..].iter().map(|&t| t * t).sum();
    let mut v = x.to_vec();
    v[0] = 1.0;
    if sigma == 0.0 {
        return (v, 0.0);
    }
    let norm = (x[0] * x[0] + sigma).sqrt();
    let v0 = if x[0] <= 0.0 {
        x[0] - norm
    } else {
        -sigma / (x[0] + norm)
    };
    let beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
    for t in &mut v[1..] {
        *t /= v0;
    }
    (v, beta)
}

fn apply_reflectors(reflectors: &[Reflector], y: &mut [f64]) {
    // Q = H_0 H_1 ...; apply the last reflector first.
    for r in reflectors.iter().rev() {
        let seg = &y[r.offset..];
        let dot: f64 = r.v.iter().zip(seg).map(|(a, b)| a * b).sum();
        let scale = r.beta * dot;
        for (t, &vi) in y[r.offset..].iter_mut().zip(&r.v) {
            *t -= scale * vi;
        }
    }
}

/// Eigenvalues of T strictly below x, by the inertia of the shifted LDL^T
/// factorization.
fn count_below(d: &[f64], e: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        if q.abs() < pivmin {
            q = -pivmin;
        }
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn smallest_eigenvalue(d: &[f64], e: &[f64]) -> (f64, usize) {
    let n = d.len();
    if n == 1 {
        return (d[0], 0);
    }
    let mut norm: f64 = 0.0;
    let mut gl = f64::INFINITY;
    let mut gu = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < n - 1 { e[i].abs() } else { 0.0 };
        gl = gl.min(d[i] - r);
        gu = gu.max(d[i] + r);
        norm = norm.max(d[i].abs() + r);
    }
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * norm);
    let mut steps = 0;
    while gu - gl > 2.0 * f64::EPSILON * gl.abs().max(gu.abs()) + 2.0 * pivmin {
        let mid = 0.5 * (gl + gu);
        if count_below(d, e, mid, pivmin) >= 1 {
            gu = mid;
        } else {
            gl = mid;
        }
        steps += 1;
        if steps > 200 {
            break;
        }
    }
    (0.5 * (gl + gu), steps)
}

/// Shifted inverse iteration on the tridiagonal; a handful of passes is
/// plenty this close to the eigenvalue.
fn tridiag_eigenvector(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut rng = Lcg64::new(0x746AE529);
    let mut x: Vec<f64> = (0..n).map(|_| 1.0 + 0.01 * rng.next_f64()).collect();
    normalize(&mut x);
    for _ in 0..4 {
        x = solve_shifted(d, e, lambda, &x);
        normalize(&mut x);
    }
    x
}

/// Solves (T - lambda I) y = b by banded LU with partial pivoting (one
/// fill-in superdiagonal); near-singular pivots are nudged, which is exactly
/// what inverse iteration wants.
fn solve_shifted(d: &[f64], e: &[f64], lambda: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let tiny = f64::EPSILON * d.iter().fold(1.0f64, |m, &t| m.max(t.abs()));
    let mut main: Vec<f64> = (0..n).map(|i| d[i] - lambda).collect();
    let mut up1 = e.to_vec();
    let mut up2 = vec![0.0; n.saturating_sub(2)];
    let mut rhs = b.to_vec();

    for k in 0..n - 1 {
        // Earlier steps never touch row k+1's column-k entry.
        let mut sub = e[k];
        if sub.abs() > main[k].abs() {
            // Swap rows k and k+1; the displaced row k becomes the one to
            // eliminate. up2[k] is still zero at this point, so the swapped
            // row's third entry is zero.
            let (ak, bk) = (main[k], up1[k]);
            main[k] = sub;
            up1[k] = main[k + 1];
            if k + 2 < n {
                up2[k] = up1[k + 1];
            }
            sub = ak;
            main[k + 1] = bk;
            if k + 2 < n {
                up1[k + 1] = 0.0;
            }
            rhs.swap(k, k + 1);
        }
        if main[k].abs() < tiny {
            main[k] = if main[k] < 0.0 { -tiny } else { tiny };
        }
        let m = sub / main[k];
        main[k + 1] -= m * up1[k];
        if k + 2 < n {
            up1[k + 1] -= m * up2[k];
        }
        rhs[k + 1] -= m * rhs[k];
    }
    if main[n - 1].abs() < tiny {
        main[n - 1] = if main[n - 1] < 0.0 { -tiny } else { tiny };
    }

    let mut y = vec![0.0; n];
    y[n - 1] = rhs[n - 1] / main[n - 1];
    if n >= 2 {
        y[n - 2] = (rhs[n - 2] - up1[n - 2] * y[n - 1]) / main[n - 2];
    }
    for k in (0..n.saturating_sub(2)).rev() {
        y[k] = (rhs[k] - up1[k] * y[k + 1] - up2[k] * y[k + 2]) / main[k];
    }
    y
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|&t| t * t).sum::<f64>().sqrt();
    if norm > 0.0 {
        for t in x {
            *t /= norm;
        }
    }
}
