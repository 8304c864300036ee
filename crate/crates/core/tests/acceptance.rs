mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{
    draw_existence, draw_lemma, eta, fd_taylor, lemma_lambda_bound, lemma_m_bound,
    positive_root_count, rel_err, rng, triple,
};
use lgcusp::bifurcation::{fold_curves, sweep, unfolding_coords, Range};
use lgcusp::classification::{classify, lemma21_region, Kind};
use lgcusp::equilibria::{degenerate_point, equilibrium_cubic, shengjin_classify, Equilibrium};
use lgcusp::model::{det, jacobian, taylor_jet, trace, ScaledParams};
use lgcusp::normal_form::{normal_form_at, NormalFormCase};
use lgcusp::simulation::{probe_solver_config, stability_probe, ProbeConfig, Verdict};
use rand::Rng;

struct Check {
    problems: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            problems: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.problems.len() < 5 {
            self.problems.push(what());
        }
    }

    fn report(self, n: usize, title: &str, detail: String, tolerance: &str) -> bool {
        let ok = self.problems.is_empty();
        let detail = if ok { detail } else { self.problems.join("; ") };
        println!(
            "{} [{n}] {title}: {detail} (tolerance {tolerance})",
            if ok { "PASS" } else { "FAIL" }
        );
        ok
    }
}

fn at_triple(m: f64, lambda: f64, s: f64) -> (ScaledParams, Equilibrium) {
    let d = degenerate_point(m, lambda).unwrap();
    (
        d.params(s).unwrap(),
        Equilibrium {
            state: d.equilibrium(),
            multiplicity: 3,
        },
    )
}

fn triple_point_construction() -> bool {
    let mut c = Check::new();
    let start = Instant::now();
    let d = degenerate_point(0.1, 0.2).unwrap();
    for (name, v, e) in [
        ("a1", d.a1, 1.7),
        ("h1", d.h1, 1.0 / 270.0),
        ("x1", d.x1, 1.0 / 9.0),
    ] {
        c.require(rel_err(v, e) <= 1e-14, || format!("{name} = {v} vs {e}"));
    }
    let mut draws = vec![(0.1, 0.2)];
    let mut r = rng(101);
    draws.extend((0..1000).map(|_| draw_existence(&mut r)));
    for &(m, lambda) in &draws {
        let d = degenerate_point(m, lambda).unwrap();
        let t = triple(m, lambda);
        c.require(
            rel_err(d.a1, t.a1) <= 1e-12 && rel_err(d.h1, t.h1) <= 1e-12,
            || format!("m {m} lambda {lambda}"),
        );
        let cubic = equilibrium_cubic(&d.params(0.1).unwrap()).unwrap();
        let (c3, c2, c1, c0) = (cubic.c3, cubic.c2, cubic.c1, cubic.c0);
        let a = c2 * c2 - 3.0 * c3 * c1;
        let b = c2 * c1 - 9.0 * c3 * c0;
        c.require(
            a.abs() <= 1e-12 * c2 * c2 && b.abs() <= 1e-12 * (c2 * c1).abs(),
            || format!("m {m} lambda {lambda}: A {a:e} B {b:e}"),
        );
        let roots = shengjin_classify(&cubic).unwrap().roots;
        c.require(
            roots.len() == 1 && roots[0].multiplicity == 3 && roots[0].value > 0.0,
            || format!("m {m} lambda {lambda}: roots {roots:?}"),
        );
    }
    let elapsed = start.elapsed();
    c.require(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    });
    c.report(
        1,
        "triple-point construction",
        format!(
            "reference plus {} draws, triple positive root, {elapsed:.1?}",
            draws.len() - 1
        ),
        "1e-14 reference, 1e-12 A/B relative, < 1 s",
    )
}

fn jacobian_degeneracy() -> bool {
    let mut c = Check::new();
    let mut r = rng(102);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (m, lambda) = draw_existence(&mut r);
        let t = triple(m, lambda);
        let s = t.s1 * r.random_range(0.1..3.0);
        let (p, eq) = at_triple(m, lambda, s);
        let j = jacobian(&eq.state, &p).unwrap();
        let gap = (trace(&j) - (t.s1 - s)).abs();
        worst = (worst.0.max(det(&j).abs()), worst.1.max(gap));
        c.require(det(&j).abs() <= 1e-12 && gap <= 1e-12, || {
            format!("m {m} lambda {lambda} s {s}")
        });
    }
    c.report(
        2,
        "Jacobian degeneracy",
        format!(
            "100 draws, max |det| {:.1e}, max trace gap {:.1e}",
            worst.0, worst.1
        ),
        "1e-12 absolute",
    )
}

fn lemma_region() -> bool {
    let mut c = Check::new();
    let mut r = rng(103);
    let mut min_a1 = f64::INFINITY;
    for _ in 0..10_000 {
        let (m, lambda) = draw_lemma(&mut r);
        let t = triple(m, lambda);
        min_a1 = min_a1.min(t.a1);
        c.require(
            m < lemma_m_bound() && lambda < lemma_lambda_bound(m),
            || format!("draw outside region: {m} {lambda}"),
        );
        c.require(t.a1 > 1.5, || format!("m {m} lambda {lambda}: a1 {}", t.a1));
        c.require(lemma_lambda_bound(m) > 0.0, || {
            format!("m {m}: bound {}", lemma_lambda_bound(m))
        });
        let (inside, a1) = lemma21_region(m, lambda);
        c.require(inside && rel_err(a1, t.a1) <= 1e-12, || {
            format!("library disagrees at m {m} lambda {lambda}")
        });
    }
    c.report(
        3,
        "strong cooperation region",
        format!("10000 draws, min a1 {min_a1:.6}"),
        "strict inequalities",
    )
}

fn codim2_certificates() -> bool {
    let mut c = Check::new();
    let mut r = rng(104);
    let mut worst = 0.0f64;
    for (lo, hi, kind) in [
        (0.1, 0.9, Kind::Codim2NodeUnstable),
        (1.1, 3.0, Kind::Codim2NodeStable),
    ] {
        for _ in 0..50 {
            let (m, lambda) = draw_existence(&mut r);
            let t = triple(m, lambda);
            let s = t.s1 * r.random_range(lo..hi);
            let (p, eq) = at_triple(m, lambda, s);
            let nf = normal_form_at(&p, &eq.state).unwrap();
            let expected = s * (t.a1 + 1.0) / (t.s1 - s).powi(2);
            let e30 = nf.e30.unwrap_or(f64::NAN);
            worst = worst.max(rel_err(e30, expected));
            c.require(nf.case == NormalFormCase::SingleZero, || {
                format!("case {:?}", nf.case)
            });
            c.require(rel_err(e30, expected) <= 1e-8 && e30 > 0.0, || {
                format!("e30 {e30} vs {expected}")
            });
            c.require(
                nf.e11f30.is_some_and(|v| v != 0.0) && nf.nondegenerate_e11f30 == Some(true),
                || format!("e11f30 {:?} at m {m} lambda {lambda} s {s}", nf.e11f30),
            );
            let got = classify(&p, &eq).unwrap().kind;
            c.require(got == kind, || format!("kind {got:?} at s/s1 {}", s / t.s1));
        }
    }
    c.report(
        4,
        "codim-2 certificates",
        format!("50 + 50 draws, max e30 error {worst:.1e}"),
        "1e-8 relative",
    )
}

fn codim3_certificates() -> bool {
    let mut c = Check::new();
    let mut r = rng(105);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (m, lambda) = draw_lemma(&mut r);
        let t = triple(m, lambda);
        let (p, eq) = at_triple(m, lambda, t.s1);
        let nf = normal_form_at(&p, &eq.state).unwrap();
        let expected = -t.s1.powi(3) * (t.a1 + 1.0);
        let j30 = nf.j30.unwrap_or(f64::NAN);
        worst = worst.max(rel_err(j30, expected));
        c.require(nf.case == NormalFormCase::DoubleZero, || {
            format!("case {:?}", nf.case)
        });
        c.require(rel_err(j30, expected) <= 1e-8, || {
            format!("j30 {j30} vs {expected}")
        });
        c.require(
            nf.j11.is_some_and(|v| v != 0.0) && nf.nondegenerate_j11 == Some(true),
            || format!("j11 {:?} at m {m} lambda {lambda}", nf.j11),
        );
        c.require(
            nf.j21_plus_3i30.is_some_and(|v| v != 0.0)
                && nf.nondegenerate_j21_plus_3i30 == Some(true),
            || {
                format!(
                    "j21 + 3 i30 {:?} at m {m} lambda {lambda}",
                    nf.j21_plus_3i30
                )
            },
        );
    }
    let (p, eq) = at_triple(0.1, 0.2, triple(0.1, 0.2).s1);
    let j30 = normal_form_at(&p, &eq.state)
        .unwrap()
        .j30
        .unwrap_or(f64::NAN);
    c.require((j30 + 7.144e-4).abs() <= 1e-7, || {
        format!("reference j30 {j30:e}")
    });
    c.report(
        5,
        "codim-3 certificates",
        format!("50 draws, max j30 error {worst:.1e}, reference j30 {j30:.6e}"),
        "1e-8 relative, reference 1e-7 absolute",
    )
}

fn stability_verdicts() -> bool {
    let mut c = Check::new();
    let start = Instant::now();
    let probe = ProbeConfig::default();
    let cfg = probe_solver_config();
    c.require(probe.radius == 1e-2 && cfg.t_end == 5e3, || {
        "probe defaults changed".to_string()
    });
    let mut r = rng(106);
    let mut inconclusive = 0;
    for _ in 0..20 {
        let (m, lambda) = draw_existence(&mut r);
        let s1 = triple(m, lambda).s1;
        for (s, expected) in [
            (s1 * r.random_range(1.25..3.0), Verdict::Attracting),
            (s1 * r.random_range(0.2..0.8), Verdict::Repelling),
        ] {
            let (p, eq) = at_triple(m, lambda, s);
            let verdict = stability_probe(&p, &eq, &probe, &cfg).unwrap().verdict;
            inconclusive += usize::from(verdict == Verdict::Inconclusive);
            c.require(verdict == expected, || {
                format!("m {m} lambda {lambda} s/s1 {}: {verdict:?}", s / s1)
            });
        }
    }
    let elapsed = start.elapsed();
    c.require(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    });
    c.report(
        6,
        "stability verdicts vs dynamics",
        format!("20 draws x 2 sides, {inconclusive} inconclusive, {elapsed:.1?}"),
        "radius 1e-2, horizon 5e3, < 60 s",
    )
}

/// Closed-form fold heights at `a`: the depressed cubic has a double root when
/// `eta1 = -/+ sqrt(-4 eta2^3 / 27)`.
fn fold_heights(a: f64) -> Option<(f64, f64)> {
    let (eta2, eta1_0) = eta(0.1, 0.2, a, 0.0);
    if eta2 >= 0.0 {
        return None;
    }
    let r = (-4.0 * eta2.powi(3) / 27.0).sqrt();
    Some(((1.0 + a) * (eta1_0 - r), (1.0 + a) * (eta1_0 + r)))
}

fn cusp_structure() -> bool {
    let mut c = Check::new();
    let start = Instant::now();
    let t = triple(0.1, 0.2);
    let base = ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 0.1).unwrap();
    let at_cusp = degenerate_point(0.1, 0.2).unwrap().params(0.1).unwrap();
    let e = unfolding_coords(&at_cusp).unwrap();
    c.require(e.eta1 == 0.0 && e.eta2 == 0.0, || {
        format!("eta at cusp ({:e}, {:e})", e.eta1, e.eta2)
    });

    let (da, dh) = (1e-5 * t.a1, 1e-5 * t.h1);
    let d_a = {
        let (p, q) = (
            eta(0.1, 0.2, t.a1 + da, t.h1),
            eta(0.1, 0.2, t.a1 - da, t.h1),
        );
        ((p.0 - q.0) / (2.0 * da), (p.1 - q.1) / (2.0 * da))
    };
    let d_h = {
        let (p, q) = (
            eta(0.1, 0.2, t.a1, t.h1 + dh),
            eta(0.1, 0.2, t.a1, t.h1 - dh),
        );
        ((p.0 - q.0) / (2.0 * dh), (p.1 - q.1) / (2.0 * dh))
    };
    let scaled_det = (d_a.0 * d_h.1 - d_h.0 * d_a.1) * t.a1 * t.h1;
    c.require(scaled_det.abs() > 1e-6, || {
        format!("scaled determinant {scaled_det:e}")
    });

    let n = 201;
    let (a_range, h_range) = (Range::new(1.5, 1.9), Range::new(0.002, 0.006));
    let cells = sweep(&base, a_range, h_range, (n, n)).unwrap();
    c.require(cells.len() == n * n, || format!("{} cells", cells.len()));
    let mut counts = BTreeMap::new();
    for cell in &cells {
        *counts.entry(cell.n_positive_roots).or_insert(0usize) += 1;
        let simple = cell.multiplicities.iter().all(|&k| k == 1);
        let expected = match fold_heights(cell.a) {
            Some((lo, hi)) if cell.h > lo && cell.h < hi => 3,
            _ => 1,
        };
        if simple {
            c.require(cell.n_positive_roots == expected, || {
                format!(
                    "cell ({}, {}) has {} roots",
                    cell.a, cell.h, cell.n_positive_roots
                )
            });
            c.require(
                positive_root_count(&base.with_a_h(cell.a, cell.h)) == cell.n_positive_roots,
                || format!("oracle disagrees at ({}, {})", cell.a, cell.h),
            );
        }
    }
    let (one, three) = (
        counts.get(&1).copied().unwrap_or(0),
        counts.get(&3).copied().unwrap_or(0),
    );
    c.require(one > 0 && three > 0, || {
        format!("{one} one-root and {three} three-root cells")
    });

    let folds = fold_curves(0.1, 0.2, a_range, n).unwrap();
    let (step_a, step_h) = (
        (a_range.hi - a_range.lo) / (n - 1) as f64,
        (h_range.hi - h_range.lo) / (n - 1) as f64,
    );
    for (name, branch) in [("upper", &folds.upper), ("lower", &folds.lower)] {
        let last = branch
            .iter()
            .filter(|p| p.a < t.a1)
            .max_by(|x, y| x.a.total_cmp(&y.a));
        c.require(
            last.is_some_and(|p| {
                t.a1 - p.a <= step_a * (1.0 + 1e-9) && (p.h - t.h1).abs() <= step_h
            }),
            || format!("{name} branch ends at {last:?}"),
        );
    }
    let mut crossings = 0;
    for p in folds
        .upper
        .iter()
        .chain(&folds.lower)
        .filter(|p| p.a < t.a1)
        .step_by(5)
    {
        let delta = 1e-7 * p.h;
        let below = positive_root_count(&base.with_a_h(p.a, p.h - delta));
        let above = positive_root_count(&base.with_a_h(p.a, p.h + delta));
        crossings += 1;
        c.require(below.abs_diff(above) == 2, || {
            format!("crossing at {p:?}: {below} -> {above}")
        });
    }
    c.require(crossings > 0, || "no fold crossings tested".to_string());
    let elapsed = start.elapsed();
    c.require(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    });
    c.report(
        7,
        "cusp structure",
        format!(
            "scaled det {scaled_det:.3e}, {one} one-root and {three} three-root cells, {crossings} crossings, {elapsed:.1?}"
        ),
        "|scaled det| > 1e-6, one grid cell, < 30 s",
    )
}

fn jet_oracle() -> bool {
    let mut c = Check::new();
    let mut r = rng(108);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (m, lambda) = draw_existence(&mut r);
        let s1 = triple(m, lambda).s1;
        let (p, eq) = at_triple(m, lambda, s1 * r.random_range(0.2..2.0));
        let jet = taylor_jet(&eq.state, &p).unwrap();
        let named = jet.named();
        let degree_scale = |deg: usize| {
            named
                .iter()
                .filter(|(_, i, j, _)| i + j == deg)
                .map(|t| t.3.abs())
                .fold(0.0, f64::max)
        };
        for (name, i, j, coeff) in &named {
            let comp = usize::from(name.starts_with('b'));
            let fd = fd_taylor(&p, eq.state, comp, *i, *j, eq.state.x / 40.0, 6);
            let err = (fd - coeff).abs() / coeff.abs().max(1e-3 * degree_scale(i + j));
            worst = worst.max(err);
            c.require(err <= 1e-6, || {
                format!("{name}: jet {coeff} fd {fd} at m {m} lambda {lambda}")
            });
        }
    }
    c.report(
        8,
        "Taylor jet vs finite differences",
        format!("20 draws, max error {worst:.1e}"),
        "1e-6 relative",
    )
}

fn read_artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism() -> bool {
    let mut c = Check::new();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_lgcusp"))
            .args(["verify", "--out-dir"])
            .arg(dir.path())
            .env_remove("LGCUSP_OUT_DIR")
            .output()
            .unwrap();
        c.require(out.status.success(), || {
            format!("verify exited with {:?}", out.status.code())
        });
        runs.push(read_artifacts(dir.path()));
    }
    let files = runs[0].len();
    c.require(files > 0, || "no artifacts written".to_string());
    c.require(runs[0] == runs[1], || {
        "artifacts differ between runs".to_string()
    });
    c.report(
        9,
        "determinism",
        format!("two verify runs, {files} identical artifacts"),
        "byte-identical",
    )
}

#[test]
fn acceptance() {
    let results = [
        triple_point_construction(),
        jacobian_degeneracy(),
        lemma_region(),
        codim2_certificates(),
        codim3_certificates(),
        stability_verdicts(),
        cusp_structure(),
        jet_oracle(),
        determinism(),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed", results.len());
    assert_eq!(passed, results.len());
}
