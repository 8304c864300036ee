//! Interior equilibria through the equilibrium cubic.
//!
//! Interior equilibria lie on the diagonal `y = x`, where the prey equation
//! reduces to `(1 + a) x^3 - (m + 1 - lambda) x^2 + m x - h = 0`. Roots are
//! extracted with Shengjin's closed-form discriminant branches so that the
//! triple-root configuration is reported exactly instead of as a cluster of
//! nearby iterates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ScaledParams, State};

/// Roots closer than this are merged into one root of higher multiplicity.
pub const ROOT_MERGE_TOLERANCE: f64 = 1e-7;

/// Relative size under which `A` and `B` are treated as zero (triple root).
pub const TRIPLE_TOLERANCE: f64 = 1e-12;

/// Relative size under which `Delta` is treated as zero (double root).
pub const DOUBLE_TOLERANCE: f64 = 1e-9;

/// `c3 x^3 + c2 x^2 + c1 x + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubicCoefficients {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicCoefficients {
    pub const fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.c3 * k, self.c2 * k, self.c1 * k, self.c0 * k)
    }
}

/// A real root together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    pub multiplicity: usize,
}

/// Which closed-form branch produced the roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubicBranch {
    /// `A = B = 0`.
    Triple,
    /// `Delta > 0`: one real root and a complex pair.
    OneReal,
    /// `Delta = 0`, `A != 0`: a double and a simple root.
    DoubleAndSimple,
    /// `Delta < 0`: three distinct real roots.
    ThreeReal,
}

/// Shengjin discriminants and the real roots they select.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicRootStructure {
    /// `A = c2^2 - 3 c3 c1`.
    pub shengjin_a: f64,
    /// `B = c2 c1 - 9 c3 c0`.
    pub shengjin_b: f64,
    /// `C = c1^2 - 3 c2 c0`.
    pub shengjin_c: f64,
    /// `Delta = B^2 - 4 A C`.
    pub delta: f64,
    pub branch: CubicBranch,
    /// Real roots in nondecreasing order.
    pub roots: Vec<Root>,
}

impl CubicRootStructure {
    /// `Delta` divided by the magnitude of its two terms.
    pub fn relative_delta(&self) -> f64 {
        let scale =
            self.shengjin_b * self.shengjin_b + (4.0 * self.shengjin_a * self.shengjin_c).abs();
        if scale == 0.0 {
            0.0
        } else {
            self.delta / scale
        }
    }

    pub fn real_root_count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

/// Equilibrium cubic `(1 + a, -(m + 1 - lambda), m, -h)`.
pub fn equilibrium_cubic(p: &ScaledParams) -> Result<CubicCoefficients> {
    p.validate()?;
    Ok(CubicCoefficients::new(
        1.0 + p.a,
        -(p.m + 1.0 - p.lambda),
        p.m,
        -p.h,
    ))
}

fn newton_polish(c: &CubicCoefficients, x: f64) -> f64 {
    let mut best = x;
    let mut best_res = c.eval(x).abs();
    let mut cur = x;
    for _ in 0..3 {
        let d = c.derivative(cur);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        cur -= c.eval(cur) / d;
        let res = c.eval(cur).abs();
        if res < best_res {
            best = cur;
            best_res = res;
        } else {
            break;
        }
    }
    best
}

/// Classifies the real roots of a cubic with Shengjin's discriminants.
pub fn shengjin_classify(c: &CubicCoefficients) -> Result<CubicRootStructure> {
    let CubicCoefficients { c3, c2, c1, c0 } = *c;
    if c3 == 0.0 || !c3.is_finite() {
        return Err(Error::DegenerateLeading);
    }
    let a = c2 * c2 - 3.0 * c3 * c1;
    let b = c2 * c1 - 9.0 * c3 * c0;
    let cc = c1 * c1 - 3.0 * c2 * c0;
    let delta = b * b - 4.0 * a * cc;

    let scale_a = c2 * c2 + (3.0 * c3 * c1).abs();
    let scale_b = (c2 * c1).abs() + (9.0 * c3 * c0).abs();
    let scale_delta = b * b + (4.0 * a * cc).abs();

    let structure = |branch, roots| CubicRootStructure {
        shengjin_a: a,
        shengjin_b: b,
        shengjin_c: cc,
        delta,
        branch,
        roots,
    };

    if a.abs() <= TRIPLE_TOLERANCE * scale_a && b.abs() <= TRIPLE_TOLERANCE * scale_b {
        let x = -c2 / (3.0 * c3);
        return Ok(structure(
            CubicBranch::Triple,
            vec![Root {
                value: x,
                multiplicity: 3,
            }],
        ));
    }

    let (branch, raw): (CubicBranch, Vec<f64>) = if delta.abs() <= DOUBLE_TOLERANCE * scale_delta {
        let k = b / a;
        (
            CubicBranch::DoubleAndSimple,
            vec![-c2 / c3 + k, -k / 2.0, -k / 2.0],
        )
    } else if delta > 0.0 {
        let sq = delta.sqrt();
        let y1 = a * c2 + 1.5 * c3 * (-b + sq);
        let y2 = a * c2 + 1.5 * c3 * (-b - sq);
        let x = (-c2 - (y1.cbrt() + y2.cbrt())) / (3.0 * c3);
        (CubicBranch::OneReal, vec![newton_polish(c, x)])
    } else {
        let sqrt_a = a.sqrt();
        let t = ((2.0 * a * c2 - 3.0 * c3 * b) / (2.0 * a * sqrt_a)).clamp(-1.0, 1.0);
        let third = t.acos() / 3.0;
        let (cos, sin) = (third.cos(), third.sin());
        let r3 = 3.0_f64.sqrt();
        let xs = [
            (-c2 - 2.0 * sqrt_a * cos) / (3.0 * c3),
            (-c2 + sqrt_a * (cos + r3 * sin)) / (3.0 * c3),
            (-c2 + sqrt_a * (cos - r3 * sin)) / (3.0 * c3),
        ];
        (
            CubicBranch::ThreeReal,
            xs.iter().map(|&x| newton_polish(c, x)).collect(),
        )
    };

    Ok(structure(branch, merge_roots(raw)))
}

fn merge_roots(mut xs: Vec<f64>) -> Vec<Root> {
    xs.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::with_capacity(3);
    for x in xs {
        match out.last_mut() {
            Some((sum, n)) if (x - *sum / *n as f64).abs() <= ROOT_MERGE_TOLERANCE => {
                *sum += x;
                *n += 1;
            }
            _ => out.push((x, 1)),
        }
    }
    out.into_iter()
        .map(|(sum, n)| Root {
            value: sum / n as f64,
            multiplicity: n,
        })
        .collect()
}

/// Interior equilibrium `(x*, x*)` with its multiplicity as a root of the cubic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    pub state: State,
    pub multiplicity: usize,
}

/// All equilibria with `x* > 0`, `y* = x* > 0`, in increasing `x*`.
pub fn interior_equilibria(p: &ScaledParams) -> Result<Vec<Equilibrium>> {
    let cubic = equilibrium_cubic(p)?;
    Ok(positive_equilibria(&shengjin_classify(&cubic)?))
}

pub(crate) fn positive_equilibria(structure: &CubicRootStructure) -> Vec<Equilibrium> {
    structure
        .roots
        .iter()
        .filter(|r| r.value > 0.0)
        .map(|r| Equilibrium {
            state: State::new(r.value, r.value),
            multiplicity: r.multiplicity,
        })
        .collect()
}

/// Parameter point carrying the triple interior equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegeneratePoint {
    pub m: f64,
    pub lambda: f64,
    /// `((m + 1 - lambda)^2 - 3m) / (3m)`.
    pub a1: f64,
    /// `(m + 1 - lambda) m / (9 (a1 + 1))`.
    pub h1: f64,
    /// Triple root `(m + 1 - lambda) / (3 (a1 + 1))`.
    pub x1: f64,
    /// Existence bound `m + 1 - sqrt(3m)` on the attack rate.
    pub lambda_max: f64,
}

impl DegeneratePoint {
    /// Trace threshold `s1 = x1 (2 a1 x1 + lambda)`.
    pub fn s1(&self) -> f64 {
        self.x1 * (2.0 * self.a1 * self.x1 + self.lambda)
    }

    pub fn params(&self, s: f64) -> Result<ScaledParams> {
        ScaledParams::new(self.m, self.lambda, self.a1, self.h1, s)
    }

    pub fn equilibrium(&self) -> State {
        State::new(self.x1, self.x1)
    }
}

pub fn lambda_max(m: f64) -> f64 {
    m + 1.0 - (3.0 * m).sqrt()
}

/// The `(a1, h1)` at which the cubic has the triple root `x1`.
pub fn degenerate_point(m: f64, lambda: f64) -> Result<DegeneratePoint> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InvalidParams(format!("need 0 < m < 1, got m = {m}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let bound = lambda_max(m);
    if lambda >= bound {
        return Err(Error::ExistenceBound { lambda, bound });
    }
    let w = m + 1.0 - lambda;
    let a1 = (w * w - 3.0 * m) / (3.0 * m);
    let h1 = w * m / (9.0 * (a1 + 1.0));
    let x1 = w / (3.0 * (a1 + 1.0));
    Ok(DegeneratePoint {
        m,
        lambda,
        a1,
        h1,
        x1,
        lambda_max: bound,
    })
}
