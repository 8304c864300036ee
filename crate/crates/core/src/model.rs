//! The stocked Leslie-Gower model with strong Allee effect and hunting cooperation.
//!
//! Raw form, with prey `x` and predator `y`:
//!
//! ```text
//! dx/dt = r x (1 - x/K)(x - m) - (lambda + a y) x y + h
//! dy/dt = s y (1 - y/(c x))
//! ```
//!
//! With `x~ = x/K`, `y~ = y/(cK)` and `tau = rK t` this becomes the
//! five-parameter system evaluated by [`vector_field`]:
//!
//! ```text
//! dx/dt = x (1 - x)(x - m) - (lambda + a y) x y + h
//! dy/dt = s y (1 - y/x)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Mat2, Poly2, PolyMap2, DEGREE};

/// Largest residual `|F(x*, y*)|` accepted by [`taylor_jet`].
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-10;

/// Dimensional parameters of the raw model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    /// Prey birth rate.
    pub r: f64,
    /// Prey carrying capacity.
    #[serde(rename = "K")]
    pub k: f64,
    /// Allee threshold, in prey density units.
    pub m_raw: f64,
    pub lambda_raw: f64,
    pub a_raw: f64,
    /// Constant prey stocking rate.
    pub h_raw: f64,
    pub s_raw: f64,
    /// Predator-to-prey conversion scale.
    pub c: f64,
}

impl RawParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("r", self.r),
            ("K", self.k),
            ("m_raw", self.m_raw),
            ("lambda_raw", self.lambda_raw),
            ("a_raw", self.a_raw),
            ("h_raw", self.h_raw),
            ("s_raw", self.s_raw),
            ("c", self.c),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.m_raw >= self.k {
            return Err(Error::InvalidParams(format!(
                "strong Allee effect needs m_raw < K, got m_raw = {} and K = {}",
                self.m_raw, self.k
            )));
        }
        Ok(())
    }

    /// Multiplier turning raw time into scaled time, `tau = rK t`.
    pub fn time_scale(&self) -> f64 {
        self.r * self.k
    }

    /// Raw densities to scaled densities.
    pub fn scale_state(&self, raw: State) -> State {
        State::new(raw.x / self.k, raw.y / (self.c * self.k))
    }

    /// Scaled densities back to raw densities.
    pub fn unscale_state(&self, scaled: State) -> State {
        State::new(scaled.x * self.k, scaled.y * self.c * self.k)
    }
}

/// Dimensionless parameters `(m, lambda, a, h, s)` of the scaled model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledParams {
    /// Allee threshold, `0 < m < 1`.
    pub m: f64,
    /// Attack rate.
    pub lambda: f64,
    /// Hunting cooperation.
    pub a: f64,
    /// Prey stocking rate.
    pub h: f64,
    /// Predator growth rate.
    pub s: f64,
}

impl ScaledParams {
    pub fn new(m: f64, lambda: f64, a: f64, h: f64, s: f64) -> Result<Self> {
        let p = Self { m, lambda, a, h, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("m", self.m),
            ("lambda", self.lambda),
            ("a", self.a),
            ("h", self.h),
            ("s", self.s),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.m >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "strong Allee threshold must satisfy 0 < m < 1, got {}",
                self.m
            )));
        }
        Ok(())
    }

    pub fn with_a_h(&self, a: f64, h: f64) -> Self {
        Self { a, h, ..*self }
    }

    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..*self }
    }
}

/// A point `(x, y)` of the scaled phase plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Maps the raw parameters onto the scaled ones.
pub fn nondimensionalize(p: &RawParams) -> Result<ScaledParams> {
    p.validate()?;
    let scaled = ScaledParams {
        m: p.m_raw / p.k,
        lambda: p.c * p.lambda_raw / p.r,
        a: p.c * p.c * p.k * p.a_raw / p.r,
        h: p.h_raw / (p.r * p.k * p.k),
        s: p.s_raw / (p.r * p.k),
    };
    scaled.validate()?;
    Ok(scaled)
}

fn check_domain(st: &State) -> Result<()> {
    if st.x > 0.0 && st.x.is_finite() && st.y.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { x: st.x })
    }
}

/// Right-hand side of the scaled model.
pub fn vector_field(st: &State, p: &ScaledParams) -> Result<[f64; 2]> {
    check_domain(st)?;
    let State { x, y } = *st;
    let dx = x * (1.0 - x) * (x - p.m) - (p.lambda + p.a * y) * x * y + p.h;
    let dy = p.s * y * (1.0 - y / x);
    Ok([dx, dy])
}

/// Right-hand side of the raw (dimensional) model, in raw time.
pub fn raw_vector_field(st: &State, p: &RawParams) -> Result<[f64; 2]> {
    check_domain(st)?;
    let State { x, y } = *st;
    let dx =
        p.r * x * (1.0 - x / p.k) * (x - p.m_raw) - (p.lambda_raw + p.a_raw * y) * x * y + p.h_raw;
    let dy = p.s_raw * y * (1.0 - y / (p.c * x));
    Ok([dx, dy])
}

/// Analytic Jacobian of [`vector_field`].
pub fn jacobian(st: &State, p: &ScaledParams) -> Result<Mat2> {
    check_domain(st)?;
    let State { x, y } = *st;
    let fx = -3.0 * x * x + 2.0 * (1.0 + p.m) * x - p.m - (p.lambda + p.a * y) * y;
    let fy = -p.lambda * x - 2.0 * p.a * x * y;
    let gx = p.s * y * y / (x * x);
    let gy = p.s * (1.0 - 2.0 * y / x);
    Ok([[fx, fy], [gx, gy]])
}

pub fn trace(j: &Mat2) -> f64 {
    j[0][0] + j[1][1]
}

pub fn det(j: &Mat2) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// Degree-4 Taylor expansion of the vector field about `st`, in the translated
/// coordinates `u = x - st.x`, `v = y - st.y`. The constant term is `F(st)`.
pub fn taylor_expansion(st: &State, p: &ScaledParams) -> Result<PolyMap2> {
    check_domain(st)?;
    let x = Poly2::constant(st.x) + Poly2::u();
    let y = Poly2::constant(st.y) + Poly2::v();
    let one = Poly2::constant(1.0);

    let f = x * (one - x) * (x - Poly2::constant(p.m))
        - (Poly2::constant(p.lambda) + y.scale(p.a)) * x * y
        + Poly2::constant(p.h);

    // 1 / (x* + u) = sum_k (-u)^k / x*^(k+1)
    let mut inv_x = Poly2::zero();
    for k in 0..=DEGREE {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        inv_x.set(k, 0, sign / st.x.powi(k as i32 + 1));
    }
    let g = y.scale(p.s) - (y * y * inv_x).scale(p.s);
    Ok(PolyMap2::new(f, g))
}

/// Jet of the translated system at an equilibrium, named as in the
/// expansion `du/dt = sum a_ij u^i v^j`, `dv/dt = sum b_ij u^i v^j`.
///
/// At an interior equilibrium these are all the nonzero coefficients up to
/// total degree 4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    pub a10: f64,
    pub a01: f64,
    pub a20: f64,
    pub a11: f64,
    pub a02: f64,
    pub a30: f64,
    pub a12: f64,
    pub b10: f64,
    pub b01: f64,
    pub b20: f64,
    pub b11: f64,
    pub b02: f64,
    pub b30: f64,
    pub b21: f64,
    pub b12: f64,
    pub b40: f64,
    pub b31: f64,
    pub b22: f64,
}

impl TaylorCoefficients {
    const A_TERMS: [(usize, usize); 7] = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (1, 2)];
    const B_TERMS: [(usize, usize); 11] = [
        (1, 0),
        (0, 1),
        (2, 0),
        (1, 1),
        (0, 2),
        (3, 0),
        (2, 1),
        (1, 2),
        (4, 0),
        (3, 1),
        (2, 2),
    ];

    fn from_expansion(e: &PolyMap2) -> Self {
        let (f, g) = (&e.f, &e.g);
        Self {
            a10: f.get(1, 0),
            a01: f.get(0, 1),
            a20: f.get(2, 0),
            a11: f.get(1, 1),
            a02: f.get(0, 2),
            a30: f.get(3, 0),
            a12: f.get(1, 2),
            b10: g.get(1, 0),
            b01: g.get(0, 1),
            b20: g.get(2, 0),
            b11: g.get(1, 1),
            b02: g.get(0, 2),
            b30: g.get(3, 0),
            b21: g.get(2, 1),
            b12: g.get(1, 2),
            b40: g.get(4, 0),
            b31: g.get(3, 1),
            b22: g.get(2, 2),
        }
    }

    fn a_values(&self) -> [f64; 7] {
        [
            self.a10, self.a01, self.a20, self.a11, self.a02, self.a30, self.a12,
        ]
    }

    fn b_values(&self) -> [f64; 11] {
        [
            self.b10, self.b01, self.b20, self.b11, self.b02, self.b30, self.b21, self.b12,
            self.b40, self.b31, self.b22,
        ]
    }

    /// Named coefficients as `(name, value)` pairs, prey equation first.
    pub fn named(&self) -> Vec<(String, usize, usize, f64)> {
        let a = Self::A_TERMS
            .iter()
            .zip(self.a_values())
            .map(|(&(i, j), c)| (format!("a{i}{j}"), i, j, c));
        let b = Self::B_TERMS
            .iter()
            .zip(self.b_values())
            .map(|(&(i, j), c)| (format!("b{i}{j}"), i, j, c));
        a.chain(b).collect()
    }

    /// The translated vector field with zero constant term.
    pub fn field(&self) -> PolyMap2 {
        let mut f = Poly2::zero();
        let mut g = Poly2::zero();
        for (&(i, j), c) in Self::A_TERMS.iter().zip(self.a_values()) {
            f.set(i, j, c);
        }
        for (&(i, j), c) in Self::B_TERMS.iter().zip(self.b_values()) {
            g.set(i, j, c);
        }
        PolyMap2::new(f, g)
    }
}

/// Taylor jet at an equilibrium; rejects points whose residual exceeds
/// [`EQUILIBRIUM_TOLERANCE`].
pub fn taylor_jet(eq: &State, p: &ScaledParams) -> Result<TaylorCoefficients> {
    let [dx, dy] = vector_field(eq, p)?;
    let residual = dx.hypot(dy);
    if residual > EQUILIBRIUM_TOLERANCE || !residual.is_finite() {
        return Err(Error::NotEquilibrium {
            residual,
            tolerance: EQUILIBRIUM_TOLERANCE,
        });
    }
    let expansion = taylor_expansion(eq, p)?;
    let jet = TaylorCoefficients::from_expansion(&expansion);

    // Every other coefficient of the expansion vanishes identically at an equilibrium.
    let rest = PolyMap2::new(
        expansion.f - jet.field().f - Poly2::constant(dx),
        expansion.g - jet.field().g - Poly2::constant(dy),
    );
    let scale = (1..=DEGREE)
        .map(|d| expansion.max_abs_at_degree(d))
        .fold(1.0, f64::max);
    let stray = (0..=DEGREE)
        .map(|d| rest.max_abs_at_degree(d))
        .fold(0.0, f64::max);
    if stray > 1e-12 * scale {
        return Err(Error::Truncation(format!(
            "unexpected jet coefficient of size {stray:e} at ({}, {})",
            eq.x, eq.y
        )));
    }
    Ok(jet)
}
