//! Self-check suite behind the `verify` command.
//!
//! Nine checks cover the triple-point construction, the degenerate Jacobian,
//! the `a1 > 3/2` region, both families of normal-form certificates, agreement
//! of stability verdicts with simulation, the cusp geometry in the `(a, h)`
//! plane, the Taylor jet against finite differences, and reproducibility of
//! the artifacts. Random draws come from a seeded ChaCha stream, so every run
//! with the same seed produces the same artifacts byte for byte.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bifurcation::{
    fold_curves, sweep, unfolding_coords, unfolding_jacobian, FoldCurves, Range,
};
use crate::classification::{classify, lemma21_region, lemma_lambda_bound, lemma_m_bound, Kind};
use crate::equilibria::{
    degenerate_point, equilibrium_cubic, lambda_max, shengjin_classify, CubicBranch,
    CubicCoefficients, Equilibrium,
};
use crate::error::Result;
use crate::io::{fmt_f64, folds_csv, sweep_csv};
use crate::model::{det, jacobian, taylor_jet, trace, vector_field, ScaledParams, State};
use crate::normal_form::normal_form_at;
use crate::poly::DEGREE;
use crate::simulation::{probe_solver_config, stability_probe, ProbeConfig, Verdict};

pub const DEFAULT_SEED: u64 = 0x5eed_c05b;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct Suite {
    pub criteria: Vec<CriterionResult>,
    /// Artifacts as `(file name, contents)`; independent of timing.
    pub artifacts: Vec<(PathBuf, String)>,
}

impl Suite {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    /// Human-readable table including run times.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let _ = writeln!(
                out,
                "[{}] {:>2}. {:<34} {:>8.3}s  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.title,
                c.elapsed.as_secs_f64(),
                c.detail
            );
        }
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.criteria.len());
        out
    }
}

struct Outcome {
    passed: bool,
    detail: String,
    artifacts: Vec<(PathBuf, String)>,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self {
            passed,
            detail,
            artifacts: Vec::new(),
        }
    }

    fn with(mut self, name: &str, contents: String) -> Self {
        self.artifacts.push((PathBuf::from(name), contents));
        self
    }
}

/// Runtime limits, in seconds, for the checks that carry one.
const TIME_LIMITS: [(usize, f64); 3] = [(1, 1.0), (6, 60.0), (7, 30.0)];

type Check = fn(&mut ChaCha8Rng) -> Result<Outcome>;

const CHECKS: [(usize, &str, Check); 8] = [
    (1, "triple-point construction", triple_point_construction),
    (2, "jacobian degeneracy", jacobian_degeneracy),
    (3, "a1 > 3/2 region", lemma_region),
    (4, "codim-2 certificates", codim2_certificates),
    (5, "codim-3 certificates", codim3_certificates),
    (6, "stability verdicts vs dynamics", stability_vs_dynamics),
    (7, "cusp structure", cusp_structure),
    (8, "taylor jet vs finite differences", taylor_jet_oracle),
];

/// Each check draws from its own stream so that checks are independent.
fn rng_for(seed: u64, id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

fn run_checks(seed: u64) -> (Vec<CriterionResult>, Vec<(PathBuf, String)>) {
    let mut criteria = Vec::new();
    let mut artifacts = Vec::new();
    for (id, title, check) in CHECKS {
        let start = Instant::now();
        let outcome = check(&mut rng_for(seed, id))
            .unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let mut passed = outcome.passed;
        let mut detail = outcome.detail;
        if let Some(&(_, limit)) = TIME_LIMITS.iter().find(|(i, _)| *i == id) {
            if elapsed.as_secs_f64() >= limit {
                passed = false;
                detail.push_str(&format!("; exceeded {limit} s"));
            }
        }
        criteria.push(CriterionResult {
            id,
            title,
            passed,
            detail,
            elapsed,
        });
        artifacts.extend(outcome.artifacts);
    }
    (criteria, artifacts)
}

fn summary_csv(criteria: &[CriterionResult]) -> String {
    let mut out = String::from("criterion,title,passed,detail\n");
    for c in criteria {
        let _ = writeln!(
            out,
            "{},{},{},\"{}\"",
            c.id,
            c.title,
            c.passed,
            c.detail.replace('"', "'")
        );
    }
    out
}

/// Runs every check. The reproducibility check reruns checks 1 to 8 and
/// compares all artifacts byte for byte.
pub fn run(seed: u64) -> Suite {
    let (mut criteria, mut artifacts) = run_checks(seed);

    let start = Instant::now();
    let (_, again) = run_checks(seed);
    let identical = again == artifacts;
    let differing: Vec<String> = artifacts
        .iter()
        .zip(again.iter())
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.display().to_string())
        .collect();
    let detail = if identical {
        format!("{} artifacts identical across two runs", artifacts.len())
    } else {
        format!("artifacts differ: {}", differing.join(", "))
    };
    criteria.push(CriterionResult {
        id: 9,
        title: "determinism",
        passed: identical,
        detail,
        elapsed: start.elapsed(),
    });
    artifacts.insert(0, (PathBuf::from("summary.csv"), summary_csv(&criteria)));
    Suite {
        criteria,
        artifacts,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// `(m, lambda)` with a triple interior equilibrium.
fn draw_existence(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let m = rng.random_range(0.05..0.9);
    let lambda = lambda_max(m) * rng.random_range(0.05..0.95);
    (m, lambda)
}

/// `(m, lambda)` inside `m < (11 - sqrt 105)/4`, `lambda < m + 1 - sqrt(30 m)/2`.
fn draw_lemma(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let m = lemma_m_bound() * rng.random_range(1e-6..1.0);
    let lambda = lemma_lambda_bound(m) * rng.random_range(1e-6..1.0);
    (m, lambda)
}

fn triple_point_construction(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let d = degenerate_point(0.1, 0.2)?;
    let reference = [rel(d.a1, 1.7), rel(d.h1, 1.0 / 270.0), rel(d.x1, 1.0 / 9.0)];
    let mut passed = reference.iter().all(|&e| e <= 1e-14);
    let mut csv = String::from("m,lambda,a1,h1,x1,shengjin_a,shengjin_b,root,multiplicity\n");
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for i in 0..=1000 {
        let (m, lambda) = if i == 0 {
            (0.1, 0.2)
        } else {
            draw_existence(rng)
        };
        let d = degenerate_point(m, lambda)?;
        let s = shengjin_classify(&equilibrium_cubic(&d.params(1.0)?)?)?;
        let ok = s.shengjin_a.abs() <= 1e-12
            && s.shengjin_b.abs() <= 1e-12
            && s.branch == CubicBranch::Triple
            && s.roots.len() == 1
            && s.roots[0].multiplicity == 3
            && s.roots[0].value > 0.0
            && rel(s.roots[0].value, d.x1) <= 1e-12;
        worst = worst.max(s.shengjin_a.abs()).max(s.shengjin_b.abs());
        if !ok {
            failures += 1;
        }
        let root = s.roots.first().map_or(f64::NAN, |r| r.value);
        let mult = s.roots.first().map_or(0, |r| r.multiplicity);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(m),
            fmt_f64(lambda),
            fmt_f64(d.a1),
            fmt_f64(d.h1),
            fmt_f64(d.x1),
            fmt_f64(s.shengjin_a),
            fmt_f64(s.shengjin_b),
            fmt_f64(root),
            mult
        );
    }
    passed &= failures == 0;
    let detail = format!(
        "reference rel errors a1 {:.1e} h1 {:.1e} x1 {:.1e}; 1000 draws, {failures} failures, max |A|,|B| {worst:.1e}",
        reference[0], reference[1], reference[2]
    );
    Ok(Outcome::new(passed, detail).with("triple_points.csv", csv))
}

fn jacobian_degeneracy(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst_det: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    let mut csv = String::from("m,lambda,s,s1,trace,det\n");
    for _ in 0..100 {
        let (m, lambda) = draw_existence(rng);
        let d = degenerate_point(m, lambda)?;
        let s = d.s1() * rng.random_range(0.1..3.0);
        let p = d.params(s)?;
        let j = jacobian(&d.equilibrium(), &p)?;
        let (tr, dt) = (trace(&j), det(&j));
        worst_det = worst_det.max(dt.abs());
        worst_trace = worst_trace.max((tr - (d.s1() - s)).abs());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(m),
            fmt_f64(lambda),
            fmt_f64(s),
            fmt_f64(d.s1()),
            fmt_f64(tr),
            fmt_f64(dt)
        );
    }
    let passed = worst_det <= 1e-12 && worst_trace <= 1e-12;
    let detail =
        format!("100 draws, max |det| {worst_det:.1e}, max |trace - (s1 - s)| {worst_trace:.1e}");
    Ok(Outcome::new(passed, detail).with("jacobian_degeneracy.csv", csv))
}

fn lemma_region(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut min_a1 = f64::INFINITY;
    let mut min_bound = f64::INFINITY;
    let mut outside = 0;
    for _ in 0..10_000 {
        let (m, lambda) = draw_lemma(rng);
        let (inside, a1) = lemma21_region(m, lambda);
        if !inside {
            outside += 1;
        }
        min_a1 = min_a1.min(a1);
        min_bound = min_bound.min(lemma_lambda_bound(m));
    }
    let passed = outside == 0 && min_a1 > 1.5 && min_bound > 0.0;
    let detail = format!(
        "10000 draws, min a1 {}, min lambda bound {min_bound:.3e}, {outside} draws outside",
        fmt_f64(min_a1)
    );
    Ok(Outcome::new(passed, detail))
}

fn codim2_certificates(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut csv = String::from("m,lambda,s,s1,kind,e30,e30_closed,e11f30\n");
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let below = i < 50;
        let (m, lambda) = draw_existence(rng);
        let d = degenerate_point(m, lambda)?;
        let factor = if below {
            rng.random_range(0.1..0.9)
        } else {
            rng.random_range(1.1..3.0)
        };
        let s = d.s1() * factor;
        let p = d.params(s)?;
        let c = classify(
            &p,
            &Equilibrium {
                state: d.equilibrium(),
                multiplicity: 3,
            },
        )?;
        let nf = c.normal_form.as_ref();
        let e30 = nf.and_then(|r| r.e30).unwrap_or(f64::NAN);
        let e11f30 = nf.and_then(|r| r.e11f30).unwrap_or(f64::NAN);
        let closed = s * (p.a + 1.0) / (d.s1() - s).powi(2);
        let err = rel(e30, closed);
        worst = worst.max(err);
        let expected = if below {
            Kind::Codim2NodeUnstable
        } else {
            Kind::Codim2NodeStable
        };
        let nondegenerate = nf.and_then(|r| r.nondegenerate_e11f30) == Some(true);
        if !(err <= 1e-8 && e30 > 0.0 && nondegenerate && c.kind == expected) {
            failures.push(i);
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(m),
            fmt_f64(lambda),
            fmt_f64(s),
            fmt_f64(d.s1()),
            c.kind.as_str(),
            fmt_f64(e30),
            fmt_f64(closed),
            fmt_f64(e11f30)
        );
    }
    let detail = format!(
        "50 draws each side of s1, max e30 rel error {worst:.1e}, {} failures",
        failures.len()
    );
    Ok(Outcome::new(failures.is_empty(), detail).with("codim2_certificates.csv", csv))
}

fn codim3_certificates(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut csv = String::from("m,lambda,s1,kind,j30,j30_closed,j11,j21_plus_3i30\n");
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut reference_j30 = f64::NAN;
    for i in 0..=50 {
        let (m, lambda) = if i == 0 { (0.1, 0.2) } else { draw_lemma(rng) };
        let d = degenerate_point(m, lambda)?;
        let p = d.params(d.s1())?;
        let c = classify(
            &p,
            &Equilibrium {
                state: d.equilibrium(),
                multiplicity: 3,
            },
        )?;
        let nf = match c.normal_form {
            Some(nf) => nf,
            None => normal_form_at(&p, &d.equilibrium())?,
        };
        let j30 = nf.j30.unwrap_or(f64::NAN);
        let closed = -d.s1().powi(3) * (d.a1 + 1.0);
        let err = rel(j30, closed);
        worst = worst.max(err);
        if i == 0 {
            reference_j30 = j30;
        }
        let ok = err <= 1e-8
            && nf.nondegenerate_j11 == Some(true)
            && nf.nondegenerate_j21_plus_3i30 == Some(true)
            && c.kind == Kind::Codim3Degenerate;
        if !ok {
            failures += 1;
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(m),
            fmt_f64(lambda),
            fmt_f64(d.s1()),
            c.kind.as_str(),
            fmt_f64(j30),
            fmt_f64(closed),
            fmt_f64(nf.j11.unwrap_or(f64::NAN)),
            fmt_f64(nf.j21_plus_3i30.unwrap_or(f64::NAN))
        );
    }
    let reference_ok = (reference_j30 + 7.144e-4).abs() <= 1e-7;
    let detail = format!(
        "reference j30 {reference_j30:.6e}; 50 draws, max j30 rel error {worst:.1e}, {failures} failures"
    );
    Ok(Outcome::new(failures == 0 && reference_ok, detail).with("codim3_certificates.csv", csv))
}

fn stability_vs_dynamics(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let probe = ProbeConfig::default();
    let cfg = probe_solver_config();
    let mut csv = String::from("m,lambda,s,s1,expected,verdict\n");
    let mut mismatches = 0;
    let mut inconclusive = 0;
    for _ in 0..20 {
        let (m, lambda) = draw_existence(rng);
        let d = degenerate_point(m, lambda)?;
        let eq = Equilibrium {
            state: d.equilibrium(),
            multiplicity: 3,
        };
        let sides = [
            (d.s1() * rng.random_range(1.25..3.0), Verdict::Attracting),
            (d.s1() * rng.random_range(0.2..0.8), Verdict::Repelling),
        ];
        for (s, expected) in sides {
            let verdict = stability_probe(&d.params(s)?, &eq, &probe, &cfg)?.verdict;
            if verdict == Verdict::Inconclusive {
                inconclusive += 1;
            }
            if verdict != expected {
                mismatches += 1;
            }
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                fmt_f64(m),
                fmt_f64(lambda),
                fmt_f64(s),
                fmt_f64(d.s1()),
                expected.as_str(),
                verdict.as_str()
            );
        }
    }
    let detail =
        format!("20 draws x 2 sides, {mismatches} mismatches, {inconclusive} inconclusive");
    Ok(Outcome::new(mismatches == 0, detail).with("probe_verdicts.csv", csv))
}

/// Positive real roots of a cubic with positive leading coefficient, counted
/// by sign changes of `p` at `0`, at its positive critical points and at `+inf`.
fn positive_roots_by_critical_points(c: &CubicCoefficients) -> usize {
    let (qa, qb, qc) = (3.0 * c.c3, 2.0 * c.c2, c.c1);
    let disc = qb * qb - 4.0 * qa * qc;
    let mut probes = vec![c.eval(0.0)];
    if disc > 0.0 {
        let r = disc.sqrt();
        let mut crit = [(-qb - r) / (2.0 * qa), (-qb + r) / (2.0 * qa)];
        crit.sort_by(f64::total_cmp);
        probes.extend(crit.iter().filter(|&&x| x > 0.0).map(|&x| c.eval(x)));
    }
    probes.push(f64::INFINITY);
    probes
        .windows(2)
        .filter(|w| (w[0] < 0.0) != (w[1] < 0.0))
        .count()
}

fn between_folds(folds: &FoldCurves, a: f64, h: f64) -> Option<bool> {
    let lookup =
        |branch: &[crate::bifurcation::FoldPoint]| branch.iter().find(|p| p.a == a).map(|p| p.h);
    Some(h > lookup(&folds.lower)? && h < lookup(&folds.upper)?)
}

fn cusp_structure(_: &mut ChaCha8Rng) -> Result<Outcome> {
    let d = degenerate_point(0.1, 0.2)?;
    let base = d.params(0.1)?;
    let mut problems = Vec::new();

    let eta = unfolding_coords(&base)?;
    if eta.eta1 != 0.0 || eta.eta2 != 0.0 {
        problems.push(format!("eta at cusp ({:e}, {:e})", eta.eta1, eta.eta2));
    }
    let j = unfolding_jacobian(&base, 1e-5 * base.a, 1e-5 * base.h)?;
    let jac_det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    // both coordinates are O(1) in (a, h) units scaled by the cusp location
    let scaled_det = jac_det * base.a * base.h;
    if !(scaled_det.abs() > 1e-6) {
        problems.push(format!("scaled unfolding determinant {scaled_det:e}"));
    }

    let (a_range, h_range, n) = (Range::new(1.5, 1.9), Range::new(0.002, 0.006), 201);
    let cells = sweep(&base, a_range, h_range, (n, n))?;
    let folds = fold_curves(base.m, base.lambda, a_range, n)?;
    let one = cells.iter().filter(|c| c.multiplicities == [1]).count();
    let three = cells
        .iter()
        .filter(|c| c.multiplicities == [1, 1, 1])
        .count();
    if one == 0 || three == 0 {
        problems.push(format!("{one} one-root and {three} three-root cells"));
    }
    let mut misplaced = 0;
    for c in cells
        .iter()
        .filter(|c| c.multiplicities == [1] || c.multiplicities == [1, 1, 1])
    {
        let inside = between_folds(&folds, c.a, c.h).unwrap_or(false);
        if inside != (c.multiplicities.len() == 3) {
            misplaced += 1;
        }
    }
    if misplaced > 0 {
        problems.push(format!("{misplaced} cells on the wrong side of the folds"));
    }

    let (da, dh) = (a_range_step(a_range, n), a_range_step(h_range, n));
    let meet = |branch: &[crate::bifurcation::FoldPoint]| {
        branch
            .iter()
            .filter(|p| p.a < d.a1)
            .max_by(|x, y| x.a.total_cmp(&y.a))
            .is_some_and(|p| (d.a1 - p.a) <= da * (1.0 + 1e-9) && (p.h - d.h1).abs() <= dh)
    };
    if !(meet(&folds.upper) && meet(&folds.lower)) {
        problems.push("fold branches do not meet within one cell of the cusp".to_string());
    }

    let mut crossings = 0;
    let mut bad_crossings = 0;
    for branch in [&folds.upper, &folds.lower] {
        for p in branch.iter().filter(|p| p.a < d.a1).step_by(5) {
            let delta = 1e-7 * p.h;
            let count = |h: f64| {
                positive_roots_by_critical_points(&CubicCoefficients::new(
                    1.0 + p.a,
                    -(base.m + 1.0 - base.lambda),
                    base.m,
                    -h,
                ))
            };
            let (below, above) = (count(p.h - delta), count(p.h + delta));
            crossings += 1;
            if below.abs_diff(above) != 2 {
                bad_crossings += 1;
            }
        }
    }
    if crossings == 0 || bad_crossings > 0 {
        problems.push(format!(
            "{bad_crossings} of {crossings} fold crossings do not change the count by 2"
        ));
    }

    let detail = if problems.is_empty() {
        format!(
            "scaled det {scaled_det:.3e}; {one} one-root, {three} three-root cells; {crossings} crossings change count by 2"
        )
    } else {
        problems.join("; ")
    };
    Ok(Outcome::new(problems.is_empty(), detail)
        .with("cusp_sweep.csv", sweep_csv(&cells)?)
        .with("cusp_folds.csv", folds_csv(&folds)?))
}

fn a_range_step(r: Range, n: usize) -> f64 {
    (r.hi - r.lo) / (n - 1) as f64
}

/// Fornberg weights for the `order`-th derivative at 0 on integer offsets.
fn fornberg_weights(order: usize, offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn taylor_jet_oracle(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    const HALF_WIDTH: i32 = 6;
    let offsets: Vec<f64> = (-HALF_WIDTH..=HALF_WIDTH).map(f64::from).collect();
    let weights: Vec<Vec<f64>> = (0..=DEGREE)
        .map(|k| fornberg_weights(k, &offsets))
        .collect();
    let mut csv = String::from("draw,name,jet,finite_difference,rel_error\n");
    let mut worst: f64 = 0.0;
    let mut worst_spurious: f64 = 0.0;
    for draw in 0..20 {
        let (m, lambda) = draw_existence(rng);
        let d = degenerate_point(m, lambda)?;
        let p: ScaledParams = d.params(d.s1() * rng.random_range(0.2..3.0))?;
        let e = d.equilibrium();
        let jet = taylor_jet(&e, &p)?;
        let step = e.x / 40.0;
        let mut grid = vec![vec![[0.0; 2]; offsets.len()]; offsets.len()];
        for (i, dx) in offsets.iter().enumerate() {
            for (j, dy) in offsets.iter().enumerate() {
                grid[i][j] = vector_field(&State::new(e.x + dx * step, e.y + dy * step), &p)?;
            }
        }
        let fd = |comp: usize, i: usize, j: usize| -> f64 {
            let mut acc = 0.0;
            for (u, wu) in weights[i].iter().enumerate() {
                for (v, wv) in weights[j].iter().enumerate() {
                    acc += wu * wv * grid[u][v][comp];
                }
            }
            acc / step.powi((i + j) as i32) / (factorial(i) * factorial(j))
        };
        let named = jet.named();
        for comp in 0..2 {
            let prefix = if comp == 0 { 'a' } else { 'b' };
            for deg in 1..=DEGREE {
                let listed: Vec<_> = named
                    .iter()
                    .filter(|(n, i, j, _)| n.starts_with(prefix) && i + j == deg)
                    .collect();
                let scale = listed.iter().map(|t| t.3.abs()).fold(0.0, f64::max);
                for i in 0..=deg {
                    let j = deg - i;
                    let approx = fd(comp, i, j);
                    match listed.iter().find(|t| t.1 == i && t.2 == j) {
                        Some((name, _, _, value)) => {
                            let err = (approx - value).abs() / value.abs().max(1e-3 * scale);
                            worst = worst.max(err);
                            let _ = writeln!(
                                csv,
                                "{draw},{name},{},{},{:.3e}",
                                fmt_f64(*value),
                                fmt_f64(approx),
                                err
                            );
                        }
                        None => {
                            worst_spurious = worst_spurious.max(approx.abs() / scale.max(1.0));
                        }
                    }
                }
            }
        }
    }
    let passed = worst <= 1e-6 && worst_spurious <= 1e-6;
    let detail = format!(
        "20 draws, max rel error {worst:.1e}, max unlisted coefficient {worst_spurious:.1e}"
    );
    Ok(Outcome::new(passed, detail).with("taylor_jet_oracle.csv", csv))
}
