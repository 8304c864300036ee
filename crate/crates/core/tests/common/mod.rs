//! Oracles shared by the integration tests. None of them call into the
//! library's root finders or jet code.
#![allow(dead_code)]

use lgcusp::model::{vector_field, ScaledParams, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(value: f64, expected: f64) -> f64 {
    if value == expected {
        0.0
    } else {
        (value - expected).abs() / expected.abs()
    }
}

/// Triple-point formulas, written out independently.
pub struct Triple {
    pub m: f64,
    pub lambda: f64,
    pub a1: f64,
    pub h1: f64,
    pub x1: f64,
    pub s1: f64,
}

pub fn triple(m: f64, lambda: f64) -> Triple {
    let w = m + 1.0 - lambda;
    let a1 = w * w / (3.0 * m) - 1.0;
    let x1 = m / w;
    let h1 = x1 * x1 * x1 * (1.0 + a1);
    let s1 = x1 * (2.0 * a1 * x1 + lambda);
    Triple {
        m,
        lambda,
        a1,
        h1,
        x1,
        s1,
    }
}

/// `(m, lambda)` with a triple point: `m` in `[0.05, 0.9)`, `lambda` inside
/// `(0, m + 1 - sqrt(3m))`.
pub fn draw_existence(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let m: f64 = rng.random_range(0.05..0.9);
    let bound = m + 1.0 - (3.0 * m).sqrt();
    (m, bound * rng.random_range(0.05..0.95))
}

pub fn lemma_m_bound() -> f64 {
    (11.0 - 105f64.sqrt()) / 4.0
}

pub fn lemma_lambda_bound(m: f64) -> f64 {
    m + 1.0 - (30.0 * m).sqrt() / 2.0
}

/// `(m, lambda)` inside the region where `a1 > 3/2` is claimed.
pub fn draw_lemma(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let m = lemma_m_bound() * rng.random_range(1e-6..1.0);
    (m, lemma_lambda_bound(m) * rng.random_range(1e-6..1.0))
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots of `c3 x^3 + c2 x^2 + c1 x + c0` by bisection on the monotone
/// pieces between critical points. Simple roots only.
pub fn cubic_roots_oracle(c: [f64; 4]) -> Vec<f64> {
    let [c3, c2, c1, c0] = c;
    let f = move |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let bound = 1.0
        + [c2, c1, c0]
            .iter()
            .map(|v| (v / c3).abs())
            .fold(0.0, f64::max);
    let mut breaks = vec![-bound];
    // f' = 3 c3 x^2 + 2 c2 x + c1
    let (qa, qb, qc) = (3.0 * c3, 2.0 * c2, c1);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (qb + qb.signum() * sq);
        let mut crit = [q / qa, if q != 0.0 { qc / q } else { -qb / (2.0 * qa) }];
        crit.sort_by(f64::total_cmp);
        breaks.extend(crit.iter().filter(|x| x.abs() < bound));
    }
    breaks.push(bound);
    let mut roots = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (f_lo, f_hi) = (f(lo), f(hi));
        if f_lo == 0.0 {
            roots.push(lo);
        } else if (f_lo < 0.0) != (f_hi < 0.0) && f_hi != 0.0 {
            roots.push(bisect(&f, lo, hi));
        }
    }
    if f(bound) == 0.0 {
        roots.push(bound);
    }
    roots
}

/// Positive roots of the equilibrium cubic, counted by the oracle above.
pub fn positive_root_count(p: &ScaledParams) -> usize {
    let c = [1.0 + p.a, -(p.m + 1.0 - p.lambda), p.m, -p.h];
    cubic_roots_oracle(c)
        .into_iter()
        .filter(|&x| x > 0.0)
        .count()
}

/// Depressed-cubic coordinates `(eta2, eta1)` of the equilibrium cubic.
pub fn eta(m: f64, lambda: f64, a: f64, h: f64) -> (f64, f64) {
    let (c3, c2, c1, c0) = (1.0 + a, -(m + 1.0 - lambda), m, -h);
    let p = c1 / c3 - c2 * c2 / (3.0 * c3 * c3);
    let q = 2.0 * c2.powi(3) / (27.0 * c3.powi(3)) - c2 * c1 / (3.0 * c3 * c3) + c0 / c3;
    (p, q)
}

/// Weights for the `k`-th derivative at 0 on the given nodes (Fornberg).
pub fn fd_weights(nodes: &[f64], k: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; k + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for l in (1..=mn).rev() {
                    c[i][l] = c1 * (l as f64 * c[i - 1][l - 1] - c5 * c[i - 1][l]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for l in (1..=mn).rev() {
                c[j][l] = (c4 * c[j][l] - l as f64 * c[j][l - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[k]).collect()
}

/// Taylor coefficient `d^(i+j) F / dx^i dy^j / (i! j!)` of component `comp`
/// by tensor-product central differences on `2 half + 1` points per axis.
pub fn fd_taylor(
    p: &ScaledParams,
    at: State,
    comp: usize,
    i: usize,
    j: usize,
    step: f64,
    half: usize,
) -> f64 {
    let nodes: Vec<f64> = (-(half as i32)..=half as i32).map(|k| k as f64).collect();
    let wi = fd_weights(&nodes, i);
    let wj = fd_weights(&nodes, j);
    let mut sum = 0.0;
    for (a, &wa) in nodes.iter().zip(&wi) {
        if wa == 0.0 {
            continue;
        }
        for (b, &wb) in nodes.iter().zip(&wj) {
            if wb == 0.0 {
                continue;
            }
            let st = State::new(at.x + a * step, at.y + b * step);
            sum += wa * wb * vector_field(&st, p).unwrap()[comp];
        }
    }
    let fact = |n: usize| (1..=n).product::<usize>() as f64;
    sum / (step.powi((i + j) as i32) * fact(i) * fact(j))
}
