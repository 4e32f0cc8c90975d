//! The four subcommands, each producing a report plus a process exit code.

use std::path::Path;

use plaptree::domains::{DomainTag, RatioFunction, TestFunction};
use plaptree::estimates::{
    basic_bounds, homogeneous_branching_constant, homogeneous_sigma, lower_witness,
};
use plaptree::form::{dirichlet_energy, pairing};
use plaptree::num::relative_gap;
use plaptree::ops::bounds_from_test_function;
use plaptree::rng::Lcg64;
use plaptree::sample::{random_function, random_increasing_function};
use plaptree::solver::{
    approximation_sequence, monotonicity_check, plateau_extension, solve_principal_with,
    EigenPair, MonotonicityVerdict, SolveError, SolveOptions,
};
use plaptree::weights::{derive_weights, DerivedWeights};
use plaptree::{generate_homogeneous, PExponent, WeightedTree};

use crate::document::{Meta, TreeDocument};
use crate::report::{
    BasicSection, CheckRow, CheckStatus, GeneratedSection, HomogeneousSection, OracleSection,
    Report, SequenceRow, TestFunctionSection, TreeSummary,
};
use crate::testfn::load_test_function;
use crate::{CliError, Suite};

pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

fn summarize(tree: &WeightedTree) -> TreeSummary {
    TreeSummary {
        vertices: tree.vertex_count(),
        max_level: tree.max_level(),
        root: tree.label(0).to_owned(),
    }
}

fn basic_section(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    meta: Option<&Meta>,
) -> BasicSection {
    let est = basic_bounds(tree, weights, p);
    let homogeneous = meta.and_then(|m| {
        let (r, n, t, a) = (m.r?, m.max_level?, m.t?, m.a?);
        let sigma_closed_form = homogeneous_sigma(r, Some(n), t, a, p).ok()?;
        let branching = homogeneous_branching_constant(r, n, p).ok()?;
        Some(HomogeneousSection {
            sigma_closed_form,
            branching_constant_closed_form: branching,
            constant_from_corrections: p.conjugate().powf(p.p() - 1.0) * est.c_sup,
        })
    });
    BasicSection {
        sigma: est.sigma,
        sigma_argmax: tree.label(est.argmax_vertex).to_owned(),
        c_sup: est.c_sup,
        c_sup_clipped: est.c_sup_clipped,
        lower: est.lower,
        lower_clipped: est.lower_clipped,
        upper: est.upper,
        lower_provenance:
            "1/(phat^(p-1) * c_sup * sigma); clipped variant uses positive-part branching corrections"
                .into(),
        upper_provenance:
            "1/sigma, sigma = sup over non-root vertices of subtree mass * (dual path sum)^(p-1)"
                .into(),
        homogeneous,
    }
}

pub fn cmd_bounds(
    input: &Path,
    p_override: Option<f64>,
    test_function: Option<&Path>,
) -> Result<Outcome, CliError> {
    let doc = TreeDocument::load(input)?;
    let (tree, p) = doc.realize(p_override)?;
    let weights = derive_weights(&tree, p).map_err(CliError::input)?;
    let basic = basic_section(&tree, &weights, p, doc.meta.as_ref());

    let test_function = match test_function {
        None => None,
        Some(path) => {
            let loaded = load_test_function(path, &tree)?;
            let interval = bounds_from_test_function(
                &tree,
                &weights,
                p,
                loaded.function.as_test_function(),
                loaded.tag,
                &loaded.id,
            )
            .map_err(CliError::input)?;
            let (lower, upper) = if loaded.tag.is_upper() {
                (None, Some(interval.upper))
            } else {
                (Some(interval.lower), None)
            };
            let cutoff = match loaded.tag {
                DomainTag::IncreasingPlateau { cutoff }
                | DomainTag::PositivePlateau { cutoff }
                | DomainTag::RatioPlateau { cutoff } => Some(cutoff),
                _ => None,
            };
            Some(TestFunctionSection {
                id: loaded.id,
                tag: loaded.tag.name().to_owned(),
                cutoff,
                lower,
                upper,
                provenance: interval
                    .lower_source
                    .or(interval.upper_source)
                    .unwrap_or_default(),
            })
        }
    };

    Ok(Outcome {
        report: Report {
            tree: summarize(&tree),
            p: p.p(),
            basic: Some(basic),
            test_function,
            oracle: None,
            sequence: None,
            checks: None,
            generated: None,
        },
        code: 0,
    })
}

fn oracle_section(pair: &EigenPair) -> OracleSection {
    OracleSection {
        lambda: pair.lambda,
        residual: pair.residual,
        iterations: pair.iterations,
        method: pair.method.name().to_owned(),
        interval: [pair.interval.0, pair.interval.1],
    }
}

pub fn cmd_solve(
    input: &Path,
    p_override: Option<f64>,
    tol: f64,
    max_iters: usize,
    sequence: bool,
) -> Result<Outcome, CliError> {
    let doc = TreeDocument::load(input)?;
    let (tree, p) = doc.realize(p_override)?;
    let opts = SolveOptions {
        tol,
        max_iters,
        cross_check: true,
    };
    let mut code = 0;
    let oracle = match solve_principal_with(&tree, p, &opts) {
        Ok(pair) => oracle_section(&pair),
        Err(SolveError::NonConvergence {
            iterations,
            lower,
            upper,
        }) => {
            // The best enclosure is still reported, with exit code 3.
            code = 3;
            OracleSection {
                lambda: f64::NAN,
                residual: f64::NAN,
                iterations,
                method: "double-sum-inverse-iteration (not converged)".into(),
                interval: [lower, upper],
            }
        }
        Err(e @ SolveError::CrossCheckFailed { .. }) => {
            return Err(CliError::failure(e.to_string()));
        }
        Err(e) => return Err(CliError::input(e.to_string())),
    };
    let sequence = if sequence && code == 0 {
        let rows = approximation_sequence(&tree, p, tol)
            .map_err(|e| CliError::non_convergence(e.to_string()))?
            .into_iter()
            .map(|(m, lambda)| SequenceRow { m, lambda })
            .collect();
        Some(rows)
    } else {
        None
    };
    Ok(Outcome {
        report: Report {
            tree: summarize(&tree),
            p: p.p(),
            basic: None,
            test_function: None,
            oracle: Some(oracle),
            sequence,
            checks: None,
            generated: None,
        },
        code,
    })
}

pub fn cmd_generate(
    params: &[f64],
    p_value: Option<f64>,
    out: &Path,
) -> Result<Outcome, CliError> {
    let [r, n, t, a] = params else {
        return Err(CliError::input("--homogeneous takes R N T A"));
    };
    let (r, n, t, a) = (*r, *n, *t, *a);
    if r.fract() != 0.0 || !(1.0..=1e6).contains(&r) {
        return Err(CliError::input("r must be an integer >= 1"));
    }
    if n.fract() != 0.0 || !(1.0..=1e6).contains(&n) {
        return Err(CliError::input("N must be an integer >= 1"));
    }
    let (r, n) = (r as u32, n as u32);
    if !(t > 0.0 && t < 1.0 / r as f64) {
        return Err(CliError::input("t must lie in (0, 1/r)"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(CliError::input("a must be positive"));
    }
    let p = p_value.unwrap_or(2.0);
    let exponent = PExponent::new(p).map_err(CliError::input)?;
    let tree = generate_homogeneous(r, n, t, a).map_err(CliError::input)?;
    let sigma = homogeneous_sigma(r, Some(n), t, a, exponent).map_err(CliError::input)?;
    let meta = Meta {
        generator: Some("homogeneous".into()),
        r: Some(r),
        max_level: Some(n),
        t: Some(t),
        a: Some(a),
        sigma: Some(sigma),
    };
    let doc = TreeDocument::from_tree(&tree, p, Some(meta));
    doc.save(out)?;
    Ok(Outcome {
        report: Report {
            tree: summarize(&tree),
            p,
            basic: None,
            test_function: None,
            oracle: None,
            sequence: None,
            checks: None,
            generated: Some(GeneratedSection {
                path: out.display().to_string(),
                sigma_closed_form: sigma,
            }),
        },
        code: 0,
    })
}

pub fn cmd_verify(
    input: &Path,
    suite: Suite,
    p_override: Option<f64>,
    tol: f64,
) -> Result<Outcome, CliError> {
    let doc = TreeDocument::load(input)?;
    let (tree, p) = doc.realize(p_override)?;
    let weights = derive_weights(&tree, p).map_err(CliError::input)?;
    let checks = match suite {
        Suite::Identities => identities_suite(&tree, p),
        Suite::Sandwich => sandwich_suite(&tree, &weights, p, tol)?,
        Suite::Equalities => equalities_suite(&tree, &weights, p, tol)?,
        Suite::Lemma21 => lemma21_suite(&tree, p, tol)?,
        Suite::Lemma31 => lemma31_suite(&tree, p, tol)?,
    };
    let code = if checks.iter().any(|c| c.status == CheckStatus::Fail) {
        1
    } else {
        0
    };
    Ok(Outcome {
        report: Report {
            tree: summarize(&tree),
            p: p.p(),
            basic: None,
            test_function: None,
            oracle: None,
            sequence: None,
            checks: Some(checks),
            generated: None,
        },
        code,
    })
}

fn solve_quietly(
    tree: &WeightedTree,
    p: PExponent,
    tol: f64,
) -> Result<EigenPair, CliError> {
    solve_principal_with(
        tree,
        p,
        &SolveOptions {
            tol,
            max_iters: 100_000,
            cross_check: false,
        },
    )
    .map_err(|e| CliError::non_convergence(e.to_string()))
}

fn row(name: &str, status: CheckStatus, detail: String) -> CheckRow {
    CheckRow {
        name: name.to_owned(),
        status,
        detail,
    }
}

fn pass_fail(name: &str, passed: bool, detail: String) -> CheckRow {
    row(
        name,
        if passed {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail,
    )
}

fn identities_suite(tree: &WeightedTree, p: PExponent) -> Vec<CheckRow> {
    let mut rng = Lcg64::new(0x1DE57);
    let mut worst_parts = (0.0f64, String::new());
    let mut worst_energy = (0.0f64, String::new());
    for k in 0..20 {
        let f = random_function(&mut rng, tree, -1.0, 1.0);
        let g = random_function(&mut rng, tree, -1.0, 1.0);
        let both = pairing(tree, p, &f, &g);
        let gap = relative_gap(both.vertex_sum, both.edge_sum);
        if gap > worst_parts.0 {
            worst_parts = (gap, format!("pair {k}"));
        }
        let with_self = pairing(tree, p, &f, &f);
        let energy = dirichlet_energy(tree, p, &f);
        let gap_e = relative_gap(with_self.edge_sum, energy)
            .max(relative_gap(with_self.vertex_sum, energy));
        if gap_e > worst_energy.0 {
            worst_energy = (gap_e, format!("pair {k}"));
        }
    }
    vec![
        pass_fail(
            "summation-by-parts",
            worst_parts.0 <= 1e-10,
            format!(
                "vertex and edge forms agree; worst relative gap {:.2e} at {}",
                worst_parts.0, worst_parts.1
            ),
        ),
        pass_fail(
            "energy-pairing",
            worst_energy.0 <= 1e-10,
            format!(
                "self-pairing equals the energy; worst relative gap {:.2e} at {}",
                worst_energy.0, worst_energy.1
            ),
        ),
    ]
}

fn sandwich_suite(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    tol: f64,
) -> Result<Vec<CheckRow>, CliError> {
    let pair = solve_quietly(tree, p, tol)?;
    let lambda = pair.lambda;
    let slack = 1e-8 * lambda;
    let est = basic_bounds(tree, weights, p);
    let mut rows = Vec::new();
    let lower_text = est
        .lower
        .map_or_else(|| "withheld".to_owned(), |l| l.to_string());
    rows.push(pass_fail(
        "basic-interval",
        est.lower.map_or(true, |l| l <= lambda + slack) && lambda <= est.upper + slack,
        format!(
            "lower {lower_text} <= lambda {lambda} <= upper {}",
            est.upper
        ),
    ));
    rows.push(pass_fail(
        "basic-interval-clipped",
        est.lower_clipped <= lambda + slack,
        format!("certified lower {} <= lambda {lambda}", est.lower_clipped),
    ));

    let mut rng = Lcg64::new(0x5A17D);
    let mut worst: Option<(f64, String)> = None;
    let mut note = |bound_gap: f64, what: String| {
        if worst.as_ref().map_or(true, |(g, _)| bound_gap > *g) {
            worst = Some((bound_gap, what));
        }
    };
    for k in 0..3 {
        let inc = random_increasing_function(&mut rng, tree);
        let b = bounds_from_test_function(
            tree,
            weights,
            p,
            TestFunction::Values(&inc),
            DomainTag::Increasing,
            &format!("random-increasing-{k}"),
        )
        .map_err(CliError::input)?;
        note(b.lower - lambda, format!("random-increasing-{k} lower"));
        let pos = random_function(&mut rng, tree, 0.05, 2.0);
        let b = bounds_from_test_function(
            tree,
            weights,
            p,
            TestFunction::Values(&pos),
            DomainTag::Positive,
            &format!("random-positive-{k}"),
        )
        .map_err(CliError::input)?;
        note(b.lower - lambda, format!("random-positive-{k} lower"));
        let ratios = RatioFunction::from_function(tree, &inc).map_err(CliError::input)?;
        let b = bounds_from_test_function(
            tree,
            weights,
            p,
            TestFunction::Ratios(&ratios),
            DomainTag::Ratio,
            &format!("random-ratio-{k}"),
        )
        .map_err(CliError::input)?;
        note(b.lower - lambda, format!("random-ratio-{k} lower"));
    }
    // The geometric witness itself.
    let witness = lower_witness(tree, weights, p);
    let b = bounds_from_test_function(
        tree,
        weights,
        p,
        TestFunction::Values(&witness),
        DomainTag::Increasing,
        "path-weight-witness",
    )
    .map_err(CliError::input)?;
    note(b.lower - lambda, "path-weight-witness lower".into());
    let (gap, what) = worst.unwrap();
    rows.push(pass_fail(
        "lower-bounds",
        gap <= slack,
        format!("all lower bounds stayed below lambda; tightest slack {gap:.2e} ({what})"),
    ));

    // Upper bounds from truncation eigenfunctions, frozen below the cut.
    let mut worst_upper: Option<(f64, String)> = None;
    let mut skipped = None;
    for m in [1, tree.max_level().div_ceil(2), tree.max_level()] {
        let local = solve_quietly(&tree.truncate(m).map_err(CliError::input)?, p, tol)?;
        let extended = plateau_extension(tree, &local.g);
        let fi = bounds_from_test_function(
            tree,
            weights,
            p,
            TestFunction::Values(&extended),
            DomainTag::IncreasingPlateau { cutoff: m },
            &format!("truncation-{m}"),
        );
        let w = RatioFunction::from_function(tree, &extended).map_err(CliError::input)?;
        let wt = bounds_from_test_function(
            tree,
            weights,
            p,
            TestFunction::Ratios(&w),
            DomainTag::RatioPlateau { cutoff: m },
            &format!("truncation-{m}"),
        );
        match (fi, wt) {
            (Ok(fi), Ok(wt)) => {
                for (b, what) in [(fi, "single-sum"), (wt, "difference")] {
                    let gap = lambda - b.upper;
                    if worst_upper.as_ref().map_or(true, |(g, _)| gap > *g) {
                        worst_upper = Some((gap, format!("{what} upper at cut {m}")));
                    }
                }
            }
            // Membership of the extension rests on eigenfunction
            // monotonicity, which is open below p = 2.
            (Err(e), _) | (_, Err(e)) => skipped = Some(e),
        }
    }
    match (worst_upper, skipped) {
        (Some((gap, what)), None) => rows.push(pass_fail(
            "upper-bounds",
            gap <= slack,
            format!("all plateau upper bounds stayed above lambda; tightest slack {gap:.2e} ({what})"),
        )),
        (_, Some(e)) => rows.push(row(
            "upper-bounds",
            CheckStatus::Skipped,
            format!("plateau membership not established here: {e}"),
        )),
        (None, None) => unreachable!("at least one truncation level exists"),
    }
    Ok(rows)
}

fn equalities_suite(
    tree: &WeightedTree,
    weights: &DerivedWeights,
    p: PExponent,
    tol: f64,
) -> Result<Vec<CheckRow>, CliError> {
    if p.p() < 2.0 {
        return Ok(vec![row(
            "operator-equalities",
            CheckStatus::Skipped,
            "skipped: open for p<2".into(),
        )]);
    }
    let pair = solve_quietly(tree, p, tol)?;
    let lambda = pair.lambda;
    let allowed = 1e-6 * lambda;
    let single = plaptree::ops::single_sum(tree, p, &pair.g);
    let double = plaptree::ops::double_sum(tree, weights, p, &pair.g);
    let ratios = RatioFunction::from_function(tree, &pair.g).map_err(CliError::input)?;
    let difference = plaptree::ops::difference_form(tree, p, &ratios);
    let mut rows = Vec::new();
    for (name, values, inverted) in [
        ("single-sum-equality", &single, true),
        ("double-sum-equality", &double, true),
        ("difference-equality", &difference, false),
    ] {
        let mut worst = (0.0f64, 0usize);
        for i in tree.non_root() {
            let v = if inverted { 1.0 / values[i] } else { values[i] };
            let dev = (v - lambda).abs();
            if dev > worst.0 {
                worst = (dev, i);
            }
        }
        rows.push(pass_fail(
            name,
            worst.0 <= allowed,
            format!(
                "worst deviation {:.2e} at vertex {:?} (allowed {allowed:.2e})",
                worst.0,
                tree.label(worst.1)
            ),
        ));
    }
    Ok(rows)
}

fn lemma21_suite(
    tree: &WeightedTree,
    p: PExponent,
    tol: f64,
) -> Result<Vec<CheckRow>, CliError> {
    if p.p() < 2.0 {
        return Ok(vec![row(
            "eigenfunction-monotonicity",
            CheckStatus::Skipped,
            "skipped: open for p<2".into(),
        )]);
    }
    let pair = solve_quietly(tree, p, tol)?;
    let verdict = monotonicity_check(&pair, tree, p);
    Ok(vec![match verdict {
        MonotonicityVerdict::Holds => pass_fail(
            "eigenfunction-monotonicity",
            true,
            "strictly increasing along every root path".into(),
        ),
        MonotonicityVerdict::Violated { vertex, deficit } => pass_fail(
            "eigenfunction-monotonicity",
            false,
            format!(
                "decrease of {deficit:.2e} at vertex {:?}",
                tree.label(vertex)
            ),
        ),
        MonotonicityVerdict::Observed { violations } => row(
            "eigenfunction-monotonicity",
            CheckStatus::Skipped,
            format!("observed only ({violations} decreases)"),
        ),
    }])
}

fn lemma31_suite(
    tree: &WeightedTree,
    p: PExponent,
    tol: f64,
) -> Result<Vec<CheckRow>, CliError> {
    let seq = approximation_sequence(tree, p, tol)
        .map_err(|e| CliError::non_convergence(e.to_string()))?;
    let mut monotone = true;
    let mut witness = String::from("nonincreasing throughout");
    for pair in seq.windows(2) {
        if pair[1].1 > pair[0].1 + 1e-12 * pair[0].1 {
            monotone = false;
            witness = format!("increase at m = {}: {} -> {}", pair[1].0, pair[0].1, pair[1].1);
            break;
        }
    }
    let full = solve_quietly(tree, p, tol)?;
    let last = seq.last().expect("max level >= 1").1;
    let gap = relative_gap(last, full.lambda);
    Ok(vec![
        pass_fail("truncation-monotonicity", monotone, witness),
        pass_fail(
            "truncation-limit",
            gap <= 1e-10,
            format!("final entry matches the full eigenvalue to {gap:.2e}"),
        ),
    ])
}
