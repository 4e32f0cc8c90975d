//! The principal eigenpair solver and its independent checks.
//!
//! The primary method is the double-sum inverse iteration: every step yields
//! a certified enclosure of the eigenvalue, the enclosures shrink
//! monotonically, and the iterate converges to the eigenfunction. The
//! reported eigenvalue is the geometric mean of the final enclosure.
//!
//! A method-independent check then runs projected gradient descent on the
//! energy-to-mass quotient from three deterministic pseudo-random starts
//! (an explicit 64-bit LCG, see [`crate::rng`]; seeds derived from the
//! fixed constant `0x9E3779B97F4A7C15`) and requires agreement within ten
//! times the solve tolerance.

use thiserror::Error;

use crate::exponent::PExponent;
use crate::form::{apply_p_laplacian, signed_power, VertexFunction};
use crate::num::CompensatedSum;
use crate::ops::ii_step;
use crate::rng::Lcg64;
use crate::tree::{VertexId, WeightedTree};
use crate::weights::derive_weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Double-sum inverse iteration with certified interval.
    InverseIteration,
    /// Dense symmetric eigensolve, p = 2 only.
    DenseP2,
}

impl SolveMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SolveMethod::InverseIteration => "double-sum-inverse-iteration",
            SolveMethod::DenseP2 => "dense-p2",
        }
    }
}

/// A principal eigenpair: the eigenvalue, the eigenfunction normalized to 1
/// at the root's first child (at the supporting branch's root child when the
/// root has several children), the worst relative defect of the eigenvalue
/// equation, the iteration count, and the certified enclosure the value was
/// taken from.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub g: VertexFunction,
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations; best interval [{lower}, {upper}]")]
    NonConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },
    #[error("descent cross-check disagrees: certified {lambda}, descent reached {descent}")]
    CrossCheckFailed { lambda: f64, descent: f64 },
    #[error("dense solve limited to {cap} vertices, tree has {got}")]
    TooLarge { cap: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Convergence criterion: (upper - lower) <= tol * lower.
    pub tol: f64,
    pub max_iters: usize,
    /// Run the projected-gradient cross-check after converging.
    pub cross_check: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            cross_check: true,
        }
    }
}

/// Solves for the principal eigenpair with the default cross-check enabled.
pub fn solve_principal(
    tree: &WeightedTree,
    p: PExponent,
    tol: f64,
    max_iters: usize,
) -> Result<EigenPair, SolveError> {
    solve_principal_with(
        tree,
        p,
        &SolveOptions {
            tol,
            max_iters,
            cross_check: true,
        },
    )
}

pub fn solve_principal_with(
    tree: &WeightedTree,
    p: PExponent,
    opts: &SolveOptions,
) -> Result<EigenPair, SolveError> {
    if tree.children(0).len() > 1 {
        return solve_decoupled(tree, p, opts);
    }
    let weights = derive_weights(tree, p).expect("tree weights are finite");
    let mut f = VertexFunction::constant_one(tree);
    let mut best = (0.0f64, f64::INFINITY);
    let mut converged = false;
    let mut iterations = 0;
    let mut eigenfunction = f.clone();
    for k in 1..=opts.max_iters.max(1) {
        let (mut image, lower, upper) = ii_step(tree, &weights, p, &f);
        let anchor = image[1];
        for v in &mut image[1..] {
            *v /= anchor;
        }
        let g = VertexFunction::from_raw(image);
        iterations = k;
        best = (lower, upper);
        eigenfunction = g.clone();
        if upper - lower <= opts.tol * lower {
            converged = true;
            break;
        }
        f = g;
    }
    if !converged {
        return Err(SolveError::NonConvergence {
            iterations,
            lower: best.0,
            upper: best.1,
        });
    }
    let lambda = (best.0 * best.1).sqrt();
    let residual = eigen_residual(tree, p, lambda, &eigenfunction);
    if opts.cross_check {
        descent_check(tree, p, lambda, opts.tol)?;
    }
    Ok(EigenPair {
        lambda,
        g: eigenfunction,
        residual,
        iterations,
        method: SolveMethod::InverseIteration,
        interval: best,
    })
}

/// A root with several children decouples the problem: the boundary value 0
/// cuts every interaction between branches, so the eigenvalue is the
/// smallest branch eigenvalue and the eigenfunction is supported on that
/// branch (zero on the others, normalized to 1 at its own root child).
/// Branches are solved at half the tolerance so the combined enclosure still
/// meets the requested one.
fn solve_decoupled(
    tree: &WeightedTree,
    p: PExponent,
    opts: &SolveOptions,
) -> Result<EigenPair, SolveError> {
    let branch_opts = SolveOptions {
        tol: 0.5 * opts.tol,
        max_iters: opts.max_iters,
        cross_check: false,
    };
    let mut winner: Option<(EigenPair, Vec<usize>)> = None;
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    for &child in tree.children(0) {
        let (branch, map) = tree.branch(child).expect("child of the root");
        let pair = solve_principal_with(&branch, p, &branch_opts)?;
        lower = lower.min(pair.interval.0);
        upper = upper.min(pair.interval.1);
        iterations = iterations.max(pair.iterations);
        if winner.as_ref().map_or(true, |(w, _)| pair.lambda < w.lambda) {
            winner = Some((pair, map));
        }
    }
    let (best, map) = winner.expect("root has children");
    let mut values = vec![0.0; tree.vertex_count()];
    for (branch_index, &original) in map.iter().enumerate() {
        values[original] = best.g.value(branch_index);
    }
    let g = VertexFunction::from_raw(values);
    let lambda = (lower * upper).sqrt();
    let residual = eigen_residual(tree, p, lambda, &g);
    if opts.cross_check {
        descent_check(tree, p, lambda, opts.tol)?;
    }
    Ok(EigenPair {
        lambda,
        g,
        residual,
        iterations,
        method: SolveMethod::InverseIteration,
        interval: (lower, upper),
    })
}

/// Worst relative defect of the eigenvalue equation over non-root vertices:
/// |Laplacian(g) + lambda mu signed_power(g)| against lambda mu |g|^(p-1).
pub fn eigen_residual(tree: &WeightedTree, p: PExponent, lambda: f64, g: &VertexFunction) -> f64 {
    let q = p.p();
    let omega = apply_p_laplacian(tree, p, g);
    let mut worst = 0.0f64;
    for i in tree.non_root() {
        let scale = lambda * tree.mu(i) * g.value(i).abs().powf(q - 1.0);
        let defect = (omega[i] + lambda * tree.mu(i) * signed_power(g.value(i), q)).abs();
        if scale > 0.0 {
            worst = worst.max(defect / scale);
        } else if defect > 0.0 {
            worst = f64::INFINITY;
        }
    }
    worst
}

/// Eigenvalues of the level-m truncations for m = 1..=N: a nonincreasing
/// sequence ending at the full-tree eigenvalue.
pub fn approximation_sequence(
    tree: &WeightedTree,
    p: PExponent,
    tol: f64,
) -> Result<Vec<(u32, f64)>, SolveError> {
    let mut out = Vec::with_capacity(tree.max_level() as usize);
    for m in 1..=tree.max_level() {
        let truncated = tree.truncate(m).expect("level in range");
        let pair = solve_principal_with(
            &truncated,
            p,
            &SolveOptions {
                tol,
                ..SolveOptions::default()
            },
        )?;
        out.push((m, pair.lambda));
    }
    Ok(out)
}

/// Extends a function on a level-m truncation to the full tree by freezing
/// values below the cut: every vertex beyond the truncation inherits its
/// parent's value. Truncations keep a prefix of the BFS indexing, so the
/// local values transfer verbatim.
pub fn plateau_extension(tree: &WeightedTree, local: &VertexFunction) -> VertexFunction {
    let keep = local.len();
    assert!(keep <= tree.vertex_count(), "not a truncation of this tree");
    let mut values = vec![0.0; tree.vertex_count()];
    values[..keep].copy_from_slice(local.values());
    for i in keep..tree.vertex_count() {
        values[i] = values[tree.parent_of(i)];
    }
    VertexFunction::from_raw(values)
}

/// Verdict on the eigenfunction increasing strictly along every root path.
/// Asserted only for p >= 2; for smaller p the observation is reported
/// without judgement, since the monotonicity question is open there.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotonicityVerdict {
    Holds,
    Violated { vertex: VertexId, deficit: f64 },
    Observed { violations: usize },
}

impl MonotonicityVerdict {
    pub fn is_failure(&self) -> bool {
        matches!(self, MonotonicityVerdict::Violated { .. })
    }
}

pub fn monotonicity_check(
    pair: &EigenPair,
    tree: &WeightedTree,
    p: PExponent,
) -> MonotonicityVerdict {
    let g = &pair.g;
    let scale = g.values().iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let slack = 1e-12 * scale;
    let mut violations = 0usize;
    let mut worst: Option<(VertexId, f64)> = None;
    for i in tree.non_root() {
        let d = g.value(i) - g.value(tree.parent_of(i));
        if d <= -slack {
            violations += 1;
            if worst.map_or(true, |(_, w)| d < w) {
                worst = Some((i, d));
            }
        }
    }
    if p.p() >= 2.0 {
        match worst {
            None => MonotonicityVerdict::Holds,
            Some((vertex, deficit)) => MonotonicityVerdict::Violated { vertex, deficit },
        }
    } else {
        MonotonicityVerdict::Observed { violations }
    }
}

// ---------------------------------------------------------------------------
// Projected gradient descent cross-check.

fn descent_check(
    tree: &WeightedTree,
    p: PExponent,
    lambda: f64,
    tol: f64,
) -> Result<(), SolveError> {
    let target = 10.0 * tol;
    let stop_at = lambda * (1.0 + 0.5 * target);
    let mut best = f64::INFINITY;
    for start in 0..3u64 {
        let mut rng = Lcg64::new(0x9E3779B97F4A7C15 ^ start.wrapping_mul(0xD1B54A32D192ED03));
        let f0: Vec<f64> = tree
            .vertices()
            .map(|i| if i == 0 { 0.0 } else { rng.uniform(0.25, 1.25) })
            .collect();
        let reached = descend_quotient(tree, p, f0, stop_at, 50_000);
        best = best.min(reached);
    }
    if (best - lambda).abs() <= target * lambda {
        Ok(())
    } else {
        Err(SolveError::CrossCheckFailed {
            lambda,
            descent: best,
        })
    }
}

fn raw_energy(tree: &WeightedTree, q: f64, f: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for i in tree.non_root() {
        acc.add(tree.nu(i) * (f[i] - f[tree.parent_of(i)]).abs().powf(q));
    }
    acc.value()
}

fn raw_mass(tree: &WeightedTree, q: f64, f: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for i in tree.non_root() {
        acc.add(tree.mu(i) * f[i].abs().powf(q));
    }
    acc.value()
}

/// Gradient of the quotient at unit mass:
/// p (-Laplacian(f) - R mu signed_power(f)) per non-root vertex.
fn raw_gradient(tree: &WeightedTree, q: f64, f: &[f64], quotient: f64, out: &mut [f64]) {
    out[0] = 0.0;
    for i in tree.non_root() {
        let fi = f[i];
        let mut omega = CompensatedSum::new();
        for &j in tree.children(i) {
            omega.add(tree.nu(j) * signed_power(f[j] - fi, q));
        }
        omega.add(tree.nu(i) * signed_power(f[tree.parent_of(i)] - fi, q));
        out[i] = q * (-omega.value() - quotient * tree.mu(i) * signed_power(fi, q));
    }
}

/// First-order descent on the scale-invariant quotient: nonlinear
/// conjugate gradients (Polak-Ribiere, restarted) over Jacobi-equilibrated
/// variables, with a derivative-based line search. Plain gradient steps need
/// on the order of the landscape condition number of iterations, which runs
/// into the millions on wide-weight trees; the conjugate recurrence is the
/// minimal standard acceleration that stays a gradient-only method, so the
/// check remains independent of the certified iteration. Returns the best
/// quotient value reached; stops early once `stop_at` is attained.
fn descend_quotient(
    tree: &WeightedTree,
    p: PExponent,
    f0: Vec<f64>,
    stop_at: f64,
    max_iters: usize,
) -> f64 {
    let q = p.p();
    let n = f0.len();
    // Diagonal metric from the edge-degree to vertex-weight ratio; the
    // quotient itself is untouched, only its parameterization.
    let mut scale = vec![1.0; n];
    for i in tree.non_root() {
        let mut degree = tree.nu(i);
        for &j in tree.children(i) {
            degree += tree.nu(j);
        }
        scale[i] = (tree.mu(i) / degree).sqrt();
    }
    let resync = |u: &[f64], f: &mut [f64]| {
        f[0] = 0.0;
        for i in 1..n {
            f[i] = scale[i] * u[i];
        }
    };

    let mut u: Vec<f64> = (0..n).map(|i| f0[i] / scale[i]).collect();
    u[0] = 0.0;
    let mut f = vec![0.0; n];
    resync(&u, &mut f);
    let m = raw_mass(tree, q, &f);
    let c = m.powf(-1.0 / q);
    for i in 1..n {
        u[i] *= c;
    }
    resync(&u, &mut f);
    let mut quotient = raw_energy(tree, q, &f);
    let mut best = quotient;

    let mut grad_f = vec![0.0; n];
    let mut grad = vec![0.0; n];
    raw_gradient(tree, q, &f, quotient, &mut grad_f);
    for i in 1..n {
        grad[i] = scale[i] * grad_f[i];
    }
    let mut direction: Vec<f64> = grad.iter().map(|&g| -g).collect();
    let mut step_dir = vec![0.0; n]; // direction mapped back to plain values
    let mut new_grad = vec![0.0; n];
    let mut theta_prev = 0.0f64;
    let mut window_best = best;
    let mut window_end = 3000usize;

    for iter in 0..max_iters {
        if best <= stop_at {
            break;
        }
        let gg: f64 = grad.iter().map(|&g| g * g).sum();
        if gg <= f64::MIN_POSITIVE {
            break;
        }
        let mut slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            // Not a descent direction: restart with steepest descent.
            for i in 0..n {
                direction[i] = -grad[i];
            }
            slope = -gg;
        }
        resync(&direction, &mut step_dir);

        let dnorm = direction.iter().map(|&d| d * d).sum::<f64>().sqrt();
        let unorm = u.iter().map(|&t| t * t).sum::<f64>().sqrt();
        let theta_scale = (unorm / dnorm).max(f64::MIN_POSITIVE);
        let guess = if theta_prev > 0.0 {
            theta_prev.clamp(1e-8 * theta_scale, 1e4 * theta_scale)
        } else {
            0.01 * theta_scale
        };
        let Some(theta) = line_search(tree, q, &f, &step_dir, quotient, slope, guess) else {
            break;
        };
        theta_prev = theta;

        for i in 1..n {
            u[i] += theta * direction[i];
        }
        resync(&u, &mut f);
        let m = raw_mass(tree, q, &f);
        let c = m.powf(-1.0 / q);
        // The whole trajectory rescales with the iterate, the direction
        // included; leaving the direction unscaled breaks the conjugate
        // recurrence.
        for i in 1..n {
            u[i] *= c;
            direction[i] *= c;
        }
        resync(&u, &mut f);
        let new_quotient = raw_energy(tree, q, &f);
        raw_gradient(tree, q, &f, new_quotient, &mut grad_f);
        for i in 1..n {
            new_grad[i] = scale[i] * grad_f[i];
        }

        // Polak-Ribiere with restart on non-positivity and periodically.
        let mut num = 0.0;
        for i in 1..n {
            num += new_grad[i] * (new_grad[i] - grad[i]);
        }
        let beta = if iter % (2 * n.max(16)) == 0 {
            0.0
        } else {
            (num / gg).max(0.0)
        };
        for i in 0..n {
            direction[i] = -new_grad[i] + beta * direction[i];
        }
        std::mem::swap(&mut grad, &mut new_grad);

        best = best.min(new_quotient);
        // Conjugate descent moves in long plateau-and-drop phases, so stall
        // detection has to look at a wide window, not single steps.
        if iter >= window_end {
            if best > window_best * (1.0 - 1e-14) {
                break;
            }
            window_best = best;
            window_end = iter + 3000;
        }
        quotient = new_quotient;
    }
    best
}

/// Minimizes the quotient along `f + theta * dir` by bracketing the sign
/// change of the directional derivative and refining with secant/bisection
/// steps. The quotient tends to a finite limit as theta grows (it is scale
/// invariant, so the limit is the quotient of the direction itself), so an
/// unbracketed search just accepts the far point. Returns `None` when no
/// progress is possible.
fn line_search(
    tree: &WeightedTree,
    q: f64,
    f: &[f64],
    dir: &[f64],
    r0: f64,
    slope_at_zero: f64,
    guess: f64,
) -> Option<f64> {
    debug_assert!(slope_at_zero < 0.0);
    let eval = |theta: f64| quotient_and_slope(tree, q, f, dir, theta);

    // Walk the trial step back until the value actually improves on r0.
    // Merely having a downhill slope is not enough: along a ray the quotient
    // can dip, rise over a hump, and descend again into a worse far basin,
    // and a search started past the hump would converge there and report no
    // progress.
    let mut theta = guess.max(f64::MIN_POSITIVE);
    let mut r;
    let mut s;
    let mut attempts = 0;
    loop {
        let (nr, ns) = eval(theta);
        r = nr;
        s = ns;
        if r.is_finite() && r < r0 {
            break;
        }
        theta *= 0.125;
        attempts += 1;
        if attempts > 200 {
            return None;
        }
    }

    let mut lo = 0.0;
    let mut slo = slope_at_zero;
    let mut hi = None;
    let mut best = if r < r0 { (theta, r) } else { (0.0, r0) };
    if s < 0.0 {
        // Expand to bracket the minimizer.
        lo = theta;
        slo = s;
        if r < best.1 {
            best = (theta, r);
        }
        for _ in 0..60 {
            theta *= 2.0;
            let (nr, ns) = eval(theta);
            if !nr.is_finite() {
                break;
            }
            if nr < best.1 {
                best = (theta, nr);
            }
            if ns >= 0.0 {
                hi = Some((theta, ns));
                break;
            }
            lo = theta;
            slo = ns;
        }
    } else {
        hi = Some((theta, s));
    }

    if let Some((mut hi, mut shi)) = hi {
        for _ in 0..32 {
            // Secant proposal, midpoint fallback.
            let mut mid = if (shi - slo).abs() > f64::MIN_POSITIVE {
                lo - slo * (hi - lo) / (shi - slo)
            } else {
                0.5 * (lo + hi)
            };
            if !(mid > lo && mid < hi) {
                mid = 0.5 * (lo + hi);
            }
            let (rm, sm) = eval(mid);
            if rm.is_finite() && rm < best.1 {
                best = (mid, rm);
                // Wolfe-grade accuracy is all the conjugate recurrence
                // needs; over-polishing the step wastes evaluations.
                if sm.abs() <= 0.1 * slope_at_zero.abs() {
                    break;
                }
            }
            if sm < 0.0 {
                lo = mid;
                slo = sm;
            } else {
                hi = mid;
                shi = sm;
            }
            if (hi - lo) <= 1e-13 * hi {
                break;
            }
        }
    }

    (best.1 < r0 && best.0 > 0.0).then_some(best.0)
}

/// Quotient and its theta-derivative along a ray, one pass. The q = 2 case
/// is branch-specialized: the descent check evaluates this in a tight loop
/// and `powf` dominates its cost otherwise.
fn quotient_and_slope(tree: &WeightedTree, q: f64, f: &[f64], dir: &[f64], theta: f64) -> (f64, f64) {
    let mut energy = CompensatedSum::new();
    let mut denergy = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    let mut dmass = CompensatedSum::new();
    if q == 2.0 {
        for i in tree.non_root() {
            let parent = tree.parent_of(i);
            let df = (f[i] + theta * dir[i]) - (f[parent] + theta * dir[parent]);
            let dd = dir[i] - dir[parent];
            energy.add(tree.nu(i) * df * df);
            denergy.add(tree.nu(i) * df * dd);
            let v = f[i] + theta * dir[i];
            mass.add(tree.mu(i) * v * v);
            dmass.add(tree.mu(i) * v * dir[i]);
        }
    } else {
        for i in tree.non_root() {
            let parent = tree.parent_of(i);
            let df = (f[i] + theta * dir[i]) - (f[parent] + theta * dir[parent]);
            let dd = dir[i] - dir[parent];
            energy.add(tree.nu(i) * df.abs().powf(q));
            denergy.add(tree.nu(i) * signed_power(df, q) * dd);
            let v = f[i] + theta * dir[i];
            mass.add(tree.mu(i) * v.abs().powf(q));
            dmass.add(tree.mu(i) * signed_power(v, q) * dir[i]);
        }
    }
    let (e, de) = (energy.value(), q * denergy.value());
    let (m, dm) = (mass.value(), q * dmass.value());
    let r = e / m;
    (r, (de * m - e * dm) / (m * m))
}
