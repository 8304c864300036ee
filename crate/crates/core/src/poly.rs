//! Truncated bivariate polynomials and planar polynomial vector fields.
//!
//! Everything is truncated at total degree [`DEGREE`]. Substitutions are only
//! allowed for maps without a constant term, which keeps truncation exact:
//! the degree-`k` part of a composition depends only on parts of degree `<= k`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Highest retained total degree.
pub const DEGREE: usize = 4;

/// Number of monomials `u^i v^j` with `i + j <= DEGREE`.
pub const N_TERMS: usize = (DEGREE + 1) * (DEGREE + 2) / 2;

#[inline]
const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Bivariate polynomial `sum c_ij u^i v^j`, truncated at total degree 4.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Poly2 {
    coeffs: [f64; N_TERMS],
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.set(0, 0, c);
        p
    }

    /// The coordinate function `u`.
    pub fn u() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    /// The coordinate function `v`.
    pub fn v() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn monomial(i: usize, j: usize, c: f64) -> Self {
        let mut p = Self::zero();
        p.set(i, j, c);
        p
    }

    /// Coefficient of `u^i v^j`; zero beyond the truncation degree.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j > DEGREE {
            0.0
        } else {
            self.coeffs[index(i, j)]
        }
    }

    /// Sets the coefficient of `u^i v^j`. Terms above the truncation degree are dropped.
    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        if i + j <= DEGREE {
            self.coeffs[index(i, j)] = c;
        }
    }

    /// Iterates `(i, j, c_ij)` in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=DEGREE).flat_map(move |d| (0..=d).map(move |j| (d - j, j, self.get(d - j, j))))
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Homogeneous part of total degree `d`.
    pub fn homogeneous(&self, d: usize) -> Self {
        let mut out = Self::zero();
        for j in 0..=d.min(DEGREE) {
            out.set(d - j, j, self.get(d - j, j));
        }
        out
    }

    /// Drops every term of total degree below `d`.
    pub fn from_degree(&self, d: usize) -> Self {
        let mut out = *self;
        for (i, j, _) in self.terms() {
            if i + j < d {
                out.set(i, j, 0.0);
            }
        }
        out
    }

    /// Lowest degree with a nonzero coefficient, `None` for the zero polynomial.
    pub fn order(&self) -> Option<usize> {
        self.terms()
            .find(|&(_, _, c)| c != 0.0)
            .map(|(i, j, _)| i + j)
    }

    /// Largest coefficient magnitude among terms of total degree `d`.
    pub fn max_abs_at_degree(&self, d: usize) -> f64 {
        (0..=d)
            .map(|j| self.get(d - j, j).abs())
            .fold(0.0, f64::max)
    }

    pub fn deriv_u(&self) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            if i > 0 {
                out.set(i - 1, j, c * i as f64);
            }
        }
        out
    }

    pub fn deriv_v(&self) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            if j > 0 {
                out.set(i, j - 1, c * j as f64);
            }
        }
        out
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.terms()
            .map(|(i, j, c)| c * u.powi(i as i32) * v.powi(j as i32))
            .sum()
    }

    pub fn powi(&self, n: usize) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| acc * *self)
    }

    /// Substitutes `u -> p(u, v)`, `v -> q(u, v)`.
    ///
    /// `p` and `q` must vanish at the origin; otherwise higher-degree terms would
    /// leak into the retained part and the truncation would be inconsistent.
    pub fn compose(&self, p: &Poly2, q: &Poly2) -> Result<Self> {
        if p.get(0, 0) != 0.0 || q.get(0, 0) != 0.0 {
            return Err(Error::Truncation(
                "substituted map has a constant term".to_string(),
            ));
        }
        let p_pows: Vec<Poly2> = (0..=DEGREE).map(|k| p.powi(k)).collect();
        let q_pows: Vec<Poly2> = (0..=DEGREE).map(|k| q.powi(k)).collect();
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            if c != 0.0 {
                out = out + (p_pows[i] * q_pows[j]).scale(c);
            }
        }
        Ok(out)
    }

    /// Restricts to the curve `v = h(u)`; `h` must vanish at the origin.
    pub fn on_curve(&self, h: &Series1) -> Result<Series1> {
        if h.get(0) != 0.0 {
            return Err(Error::Truncation(
                "curve does not pass through the origin".to_string(),
            ));
        }
        let h_pows: Vec<Series1> = (0..=DEGREE).map(|k| h.powi(k)).collect();
        let mut out = Series1::zero();
        for (i, j, c) in self.terms() {
            if c != 0.0 {
                out = out + (Series1::monomial(i, 1.0) * h_pows[j]).scale(c);
            }
        }
        Ok(out)
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(mut self, rhs: Poly2) -> Poly2 {
        self.coeffs
            .iter_mut()
            .zip(rhs.coeffs)
            .for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(mut self, rhs: Poly2) -> Poly2 {
        self.coeffs
            .iter_mut()
            .zip(rhs.coeffs)
            .for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (i1, j1, c1) in self.terms() {
            if c1 == 0.0 {
                continue;
            }
            for (i2, j2, c2) in rhs.terms() {
                if c2 != 0.0 && i1 + i2 + j1 + j2 <= DEGREE {
                    let k = index(i1 + i2, j1 + j2);
                    out.coeffs[k] += c1 * c2;
                }
            }
        }
        out
    }
}

/// One-variable power series truncated at degree 4.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Series1 {
    coeffs: [f64; DEGREE + 1],
}

impl Series1 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(k: usize, c: f64) -> Self {
        let mut s = Self::zero();
        s.set(k, c);
        s
    }

    pub fn from_coeffs(coeffs: [f64; DEGREE + 1]) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> [f64; DEGREE + 1] {
        self.coeffs
    }

    pub fn get(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, k: usize, c: f64) {
        if k <= DEGREE {
            self.coeffs[k] = c;
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    pub fn deriv(&self) -> Self {
        let mut out = Self::zero();
        for k in 1..=DEGREE {
            out.coeffs[k - 1] = self.coeffs[k] * k as f64;
        }
        out
    }

    pub fn powi(&self, n: usize) -> Self {
        (0..n).fold(Self::monomial(0, 1.0), |acc, _| acc * *self)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }
}

impl Add for Series1 {
    type Output = Series1;
    fn add(mut self, rhs: Series1) -> Series1 {
        self.coeffs
            .iter_mut()
            .zip(rhs.coeffs)
            .for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Series1 {
    type Output = Series1;
    fn sub(mut self, rhs: Series1) -> Series1 {
        self.coeffs
            .iter_mut()
            .zip(rhs.coeffs)
            .for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul for Series1 {
    type Output = Series1;
    fn mul(self, rhs: Series1) -> Series1 {
        let mut out = Series1::zero();
        for i in 0..=DEGREE {
            for j in 0..=DEGREE - i {
                out.coeffs[i + j] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        out
    }
}

/// 2x2 real matrix, row major.
pub type Mat2 = [[f64; 2]; 2];

/// Planar polynomial vector field `(du/dt, dv/dt) = (f(u, v), g(u, v))`, or a
/// polynomial coordinate map when used as a change of variables.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PolyMap2 {
    pub f: Poly2,
    pub g: Poly2,
}

impl PolyMap2 {
    pub fn new(f: Poly2, g: Poly2) -> Self {
        Self { f, g }
    }

    pub fn linear_part(&self) -> Mat2 {
        [
            [self.f.get(1, 0), self.f.get(0, 1)],
            [self.g.get(1, 0), self.g.get(0, 1)],
        ]
    }

    pub fn eval(&self, u: f64, v: f64) -> [f64; 2] {
        [self.f.eval(u, v), self.g.eval(u, v)]
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.f.scale(c), self.g.scale(c))
    }

    pub fn homogeneous(&self, d: usize) -> Self {
        Self::new(self.f.homogeneous(d), self.g.homogeneous(d))
    }

    /// Largest coefficient magnitude over both components at total degree `d`.
    pub fn max_abs_at_degree(&self, d: usize) -> f64 {
        self.f.max_abs_at_degree(d).max(self.g.max_abs_at_degree(d))
    }

    /// Vector field expressed in new coordinates `w` with `z = T w`, i.e. `T^{-1} F(T w)`.
    pub fn linear_change(&self, t: &Mat2) -> Result<Self> {
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Truncation(
                "singular linear change of coordinates".to_string(),
            ));
        }
        let (u, v) = (Poly2::u(), Poly2::v());
        let p = u.scale(t[0][0]) + v.scale(t[0][1]);
        let q = u.scale(t[1][0]) + v.scale(t[1][1]);
        let f = self.f.compose(&p, &q)?;
        let g = self.g.compose(&p, &q)?;
        let inv = [
            [t[1][1] / det, -t[0][1] / det],
            [-t[1][0] / det, t[0][0] / det],
        ];
        Ok(Self::new(
            f.scale(inv[0][0]) + g.scale(inv[0][1]),
            f.scale(inv[1][0]) + g.scale(inv[1][1]),
        ))
    }

    /// Vector field in coordinates `w` with `z = w + phi(w)`, i.e.
    /// `(I + D phi(w))^{-1} F(w + phi(w))`.
    ///
    /// `phi` must start at degree 2.
    pub fn near_identity_change(&self, phi: &PolyMap2) -> Result<Self> {
        for d in 0..2 {
            if phi.max_abs_at_degree(d) != 0.0 {
                return Err(Error::Truncation(
                    "near-identity change has terms below degree 2".to_string(),
                ));
            }
        }
        let p = Poly2::u() + phi.f;
        let q = Poly2::v() + phi.g;
        let fz = self.f.compose(&p, &q)?;
        let gz = self.g.compose(&p, &q)?;

        // (I + M)^{-1} = sum_k (-M)^k; entries of M have order >= 1.
        let m = [
            [phi.f.deriv_u(), phi.f.deriv_v()],
            [phi.g.deriv_u(), phi.g.deriv_v()],
        ];
        let neg_m = [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]];
        let identity = [
            [Poly2::constant(1.0), Poly2::zero()],
            [Poly2::zero(), Poly2::constant(1.0)],
        ];
        let mut inv = identity;
        let mut power = identity;
        for _ in 0..DEGREE {
            power = mat_mul(&power, &neg_m);
            for r in 0..2 {
                for c in 0..2 {
                    inv[r][c] = inv[r][c] + power[r][c];
                }
            }
        }
        Ok(Self::new(
            inv[0][0] * fz + inv[0][1] * gz,
            inv[1][0] * fz + inv[1][1] * gz,
        ))
    }

    /// For a change `z = w + phi(w)`, returns `psi` with `w = z + psi(z)`.
    pub fn invert_near_identity(phi: &PolyMap2) -> Result<PolyMap2> {
        let mut psi = PolyMap2::new(-phi.f, -phi.g);
        for _ in 0..DEGREE {
            let p = Poly2::u() + psi.f;
            let q = Poly2::v() + psi.g;
            psi = PolyMap2::new(-phi.f.compose(&p, &q)?, -phi.g.compose(&p, &q)?);
        }
        Ok(psi)
    }
}

fn mat_mul(a: &[[Poly2; 2]; 2], b: &[[Poly2; 2]; 2]) -> [[Poly2; 2]; 2] {
    let mut out = [[Poly2::zero(); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// Inverse of a 2x2 matrix, `None` when singular.
pub fn mat2_inverse(t: &Mat2) -> Option<Mat2> {
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    (det != 0.0 && det.is_finite()).then(|| {
        [
            [t[1][1] / det, -t[0][1] / det],
            [-t[1][0] / det, t[0][0] / det],
        ]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_truncates_at_degree_four() {
        let p = Poly2::u() + Poly2::v();
        let p5 = p.powi(5);
        assert_eq!(p5, Poly2::zero());
        let p4 = p.powi(4);
        assert_eq!(p4.get(2, 2), 6.0);
        assert_eq!(p4.get(4, 0), 1.0);
    }

    #[test]
    fn compose_rejects_constant_terms() {
        let p = Poly2::u();
        assert!(p.compose(&Poly2::constant(1.0), &Poly2::v()).is_err());
    }

    #[test]
    fn curve_restriction_of_uv() {
        // u * v on v = u^2 + u^3  ->  u^3 + u^4
        let mut h = Series1::zero();
        h.set(2, 1.0);
        h.set(3, 1.0);
        let s = Poly2::monomial(1, 1, 1.0).on_curve(&h).unwrap();
        assert_eq!(s.coeffs(), [0.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn linear_change_diagonalizes() {
        // J = [[1, 1], [0, 2]], eigenvectors (1, 0) and (1, 1)
        let f = Poly2::u() + Poly2::v();
        let g = Poly2::v().scale(2.0);
        let field = PolyMap2::new(f, g);
        let t = [[1.0, 1.0], [0.0, 1.0]];
        let lin = field.linear_change(&t).unwrap().linear_part();
        assert_eq!(lin, [[1.0, 0.0], [0.0, 2.0]]);
    }

    #[test]
    fn near_identity_change_of_linear_field() {
        // z' = z with z = w + w^2 gives w' = (w + w^2)/(1 + 2w) = w - w^2 + 2w^3 - 4w^4
        let field = PolyMap2::new(Poly2::u(), Poly2::v());
        let phi = PolyMap2::new(Poly2::monomial(2, 0, 1.0), Poly2::zero());
        let out = field.near_identity_change(&phi).unwrap();
        assert_eq!(out.f.get(1, 0), 1.0);
        assert_eq!(out.f.get(2, 0), -1.0);
        assert_eq!(out.f.get(3, 0), 2.0);
        assert_eq!(out.f.get(4, 0), -4.0);
    }
}
