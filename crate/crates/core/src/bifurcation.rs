//! Cusp unfolding in the `(a, h)` plane.
//!
//! Equilibria of the unfolded flow `du/dt = eta1 + eta2 u + u^3` are the roots
//! of a depressed cubic, so the unfolding coordinates are read off the
//! equilibrium cubic itself: shift `x = u - c2 / (3 c3)` and divide by `c3`.
//! At `(a1, h1)` both coordinates vanish; the fold (saddle-node) curves are the
//! zero set of `4 eta2^3 + 27 eta1^2`, which exists only for `eta2 < 0`, that
//! is for `a < a1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::classification::{classify, Kind};
use crate::equilibria::{
    degenerate_point, equilibrium_cubic, positive_equilibria, shengjin_classify, CubicBranch,
    CubicCoefficients, DOUBLE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::model::ScaledParams;
use crate::simulation::linspace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnfoldingCoords {
    pub eta1: f64,
    pub eta2: f64,
}

impl UnfoldingCoords {
    /// `4 eta2^3 + 27 eta1^2`: negative with three real roots, positive with one.
    pub fn discriminant(&self) -> f64 {
        4.0 * self.eta2.powi(3) + 27.0 * self.eta1 * self.eta1
    }
}

/// Depressed form `u^3 + eta2 u + eta1` of a cubic, with `x = u + shift`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DepressedCubic {
    pub eta: UnfoldingCoords,
    pub shift: f64,
    pub leading: f64,
}

impl DepressedCubic {
    pub fn of(c: &CubicCoefficients) -> Result<Self> {
        let CubicCoefficients { c3, c2, c1, c0 } = *c;
        if c3 == 0.0 || !c3.is_finite() {
            return Err(Error::DegenerateLeading);
        }
        let eta2 = (3.0 * c3 * c1 - c2 * c2) / (3.0 * c3 * c3);
        let eta1 =
            (2.0 * c2 * c2 * c2 - 9.0 * c3 * c2 * c1 + 27.0 * c3 * c3 * c0) / (27.0 * c3 * c3 * c3);
        Ok(Self {
            eta: UnfoldingCoords { eta1, eta2 },
            shift: -c2 / (3.0 * c3),
            leading: c3,
        })
    }

    /// Expands `leading * ((x - shift)^3 + eta2 (x - shift) + eta1)`.
    pub fn reconstruct(&self) -> CubicCoefficients {
        let (k, d) = (self.leading, self.shift);
        let UnfoldingCoords { eta1, eta2 } = self.eta;
        CubicCoefficients::new(
            k,
            -3.0 * k * d,
            k * (3.0 * d * d + eta2),
            k * (-d * d * d - eta2 * d + eta1),
        )
    }
}

/// Unfolding coordinates of the equilibrium cubic at `p`.
///
/// When the cubic is recognized as a perfect cube (the triple-root branch of
/// [`shengjin_classify`]) the coordinates are returned as exactly zero, so the
/// organizing point `(a1, h1)` maps to the origin despite rounding in `a1, h1`.
pub fn unfolding_coords(p: &ScaledParams) -> Result<UnfoldingCoords> {
    let cubic = equilibrium_cubic(p)?;
    if shengjin_classify(&cubic)?.branch == CubicBranch::Triple {
        return Ok(UnfoldingCoords {
            eta1: 0.0,
            eta2: 0.0,
        });
    }
    Ok(DepressedCubic::of(&cubic)?.eta)
}

/// Central finite-difference Jacobian of `(a, h) -> (eta2, eta1)`, rows
/// `(eta2, eta1)`, columns `(a, h)`. Uses the unsnapped depressed form so the
/// differences stay smooth across the triple point.
pub fn unfolding_jacobian(p: &ScaledParams, da: f64, dh: f64) -> Result<[[f64; 2]; 2]> {
    let eta = |a: f64, h: f64| -> Result<UnfoldingCoords> {
        let q = ScaledParams { a, h, ..*p };
        let c = CubicCoefficients::new(1.0 + q.a, -(q.m + 1.0 - q.lambda), q.m, -q.h);
        Ok(DepressedCubic::of(&c)?.eta)
    };
    let (ap, am) = (eta(p.a + da, p.h)?, eta(p.a - da, p.h)?);
    let (hp, hm) = (eta(p.a, p.h + dh)?, eta(p.a, p.h - dh)?);
    Ok([
        [
            (ap.eta2 - am.eta2) / (2.0 * da),
            (hp.eta2 - hm.eta2) / (2.0 * dh),
        ],
        [
            (ap.eta1 - am.eta1) / (2.0 * da),
            (hp.eta1 - hm.eta1) / (2.0 * dh),
        ],
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn validate_positive(&self, name: &str) -> Result<()> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite()) {
            return Err(Error::InvalidRange(format!(
                "{name} range must satisfy 0 < lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.lo..=self.hi).contains(&v)
    }
}

/// Type of one equilibrium in a sweep cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Classified(Kind),
    /// A classification gate failed, typically right on a fold.
    Boundary,
}

impl Serialize for CellKind {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl CellKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellKind::Classified(k) => k.as_str(),
            CellKind::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub a: f64,
    pub h: f64,
    /// Positive roots of the equilibrium cubic counted with multiplicity.
    pub n_positive_roots: usize,
    /// Multiplicity of each distinct positive root, in increasing `x`.
    pub multiplicities: Vec<usize>,
    /// One entry per distinct positive root, in increasing `x`.
    pub kinds: Vec<CellKind>,
    pub eta: UnfoldingCoords,
}

fn sweep_cell(base: &ScaledParams, a: f64, h: f64) -> Result<SweepCell> {
    let p = base.with_a_h(a, h);
    let cubic = equilibrium_cubic(&p)?;
    let structure = shengjin_classify(&cubic)?;
    let equilibria = positive_equilibria(&structure);
    let kinds = equilibria
        .iter()
        .map(|eq| match classify(&p, eq) {
            Ok(c) => CellKind::Classified(c.kind),
            Err(_) => CellKind::Boundary,
        })
        .collect();
    Ok(SweepCell {
        a,
        h,
        n_positive_roots: equilibria.iter().map(|e| e.multiplicity).sum(),
        multiplicities: equilibria.iter().map(|e| e.multiplicity).collect(),
        kinds,
        eta: unfolding_coords(&p)?,
    })
}

/// Classifies a `resolution.0 x resolution.1` grid over `a_range x h_range`
/// with `m, lambda, s` taken from `base`. Cells come out row-major with `a` as
/// the row index and `h` varying fastest.
pub fn sweep(
    base: &ScaledParams,
    a_range: Range,
    h_range: Range,
    resolution: (usize, usize),
) -> Result<Vec<SweepCell>> {
    base.validate()?;
    a_range.validate_positive("a")?;
    h_range.validate_positive("h")?;
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(Error::InvalidRange(format!(
            "sweep grid must be at least 2x2, got {}x{}",
            resolution.0, resolution.1
        )));
    }
    let a_values = linspace(a_range.lo, a_range.hi, resolution.0);
    let h_values = linspace(h_range.lo, h_range.hi, resolution.1);
    let points: Vec<(f64, f64)> = a_values
        .iter()
        .flat_map(|&a| h_values.iter().map(move |&h| (a, h)))
        .collect();
    points
        .par_iter()
        .map(|&(a, h)| sweep_cell(base, a, h))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldBranch {
    Upper,
    Lower,
}

impl FoldBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            FoldBranch::Upper => "upper",
            FoldBranch::Lower => "lower",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FoldPoint {
    pub a: f64,
    pub h: f64,
    /// Location of the double root.
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldCurves {
    /// Larger-`h` branch, increasing `a`.
    pub upper: Vec<FoldPoint>,
    /// Smaller-`h` branch, increasing `a`.
    pub lower: Vec<FoldPoint>,
}

impl FoldCurves {
    pub fn branch(&self, b: FoldBranch) -> &[FoldPoint] {
        match b {
            FoldBranch::Upper => &self.upper,
            FoldBranch::Lower => &self.lower,
        }
    }
}

fn cubic_at(m: f64, lambda: f64, a: f64, h: f64) -> CubicCoefficients {
    CubicCoefficients::new(1.0 + a, -(m + 1.0 - lambda), m, -h)
}

/// Shengjin discriminant `B^2 - 4AC` as a function of `h` at fixed `a`.
fn delta_of_h(m: f64, lambda: f64, a: f64, h: f64) -> f64 {
    let CubicCoefficients { c3, c2, c1, c0 } = cubic_at(m, lambda, a, h);
    let big_a = c2 * c2 - 3.0 * c3 * c1;
    let big_b = c2 * c1 - 9.0 * c3 * c0;
    let big_c = c1 * c1 - 3.0 * c2 * c0;
    big_b * big_b - 4.0 * big_a * big_c
}

/// Bisection in `h` on the sign change of the discriminant inside `[lo, hi]`,
/// down to a relative bracket of `1e-12` or exhaustion of doubles.
fn bisect_delta(m: f64, lambda: f64, a: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut s_lo = delta_of_h(m, lambda, a, lo) > 0.0;
    while hi - lo > 1e-12 * hi.abs().max(lo.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s_mid = delta_of_h(m, lambda, a, mid) > 0.0;
        if s_mid == s_lo {
            lo = mid;
            s_lo = s_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Double root of the cubic at a fold point, accepted only when the Shengjin
/// discriminant vanishes within the double-root gate and the root is positive.
fn verified_double_root(m: f64, lambda: f64, a: f64, h: f64) -> Option<f64> {
    let s = shengjin_classify(&cubic_at(m, lambda, a, h)).ok()?;
    if s.relative_delta() > DOUBLE_TOLERANCE {
        return None;
    }
    s.roots
        .iter()
        .find(|r| r.multiplicity >= 2 && r.value > 0.0)
        .map(|r| r.value)
}

/// Solves the fold condition in `h` for `resolution` values of `a` across
/// `a_range`, bracketing each branch around the centre `eta1 = 0` and bisecting
/// on the discriminant. Only points with `h > 0` and a verified positive double
/// root are kept. The cusp `(a1, h1)` closes both branches when it lies in range.
pub fn fold_curves(m: f64, lambda: f64, a_range: Range, resolution: usize) -> Result<FoldCurves> {
    a_range.validate_positive("a")?;
    if resolution < 2 {
        return Err(Error::InvalidRange(format!(
            "fold resolution must be >= 2, got {resolution}"
        )));
    }
    let cusp = degenerate_point(m, lambda)?;
    let slices: Vec<(Option<FoldPoint>, Option<FoldPoint>)> =
        linspace(a_range.lo, a_range.hi, resolution)
            .into_par_iter()
            .filter(|&a| (a - cusp.a1).abs() > 1e-12 * cusp.a1)
            .map(|a| {
                let depressed = DepressedCubic::of(&cubic_at(m, lambda, a, 0.0))
                    .expect("leading coefficient 1 + a is positive");
                let eta2 = depressed.eta.eta2;
                if eta2 >= 0.0 {
                    return (None, None);
                }
                // eta1 = eta1(h = 0) - h / c3, so the centre and half-width in h are explicit
                let c3 = 1.0 + a;
                let centre = c3 * depressed.eta.eta1;
                let half = c3 * (-4.0 * eta2.powi(3) / 27.0).sqrt();
                let solve = |inner: f64, dir: f64| -> Option<FoldPoint> {
                    let mut outer = inner + dir * 2.0 * half;
                    let mut guard = 0;
                    while (delta_of_h(m, lambda, a, outer) > 0.0)
                        == (delta_of_h(m, lambda, a, inner) > 0.0)
                    {
                        outer = inner + 2.0 * (outer - inner);
                        guard += 1;
                        if guard > 60 {
                            return None;
                        }
                    }
                    let (lo, hi) = if dir > 0.0 {
                        (inner, outer)
                    } else {
                        (outer, inner)
                    };
                    let h = bisect_delta(m, lambda, a, lo, hi);
                    if h <= 0.0 {
                        return None;
                    }
                    verified_double_root(m, lambda, a, h).map(|x| FoldPoint { a, h, x })
                };
                (solve(centre, 1.0), solve(centre, -1.0))
            })
            .collect();
    let mut curves = FoldCurves {
        upper: Vec::new(),
        lower: Vec::new(),
    };
    for (upper, lower) in slices {
        curves.upper.extend(upper);
        curves.lower.extend(lower);
    }
    if a_range.contains(cusp.a1) {
        let tip = FoldPoint {
            a: cusp.a1,
            h: cusp.h1,
            x: cusp.x1,
        };
        for branch in [&mut curves.upper, &mut curves.lower] {
            let at = branch.partition_point(|p| p.a < tip.a);
            branch.insert(at, tip);
        }
    }
    if curves.upper.is_empty() && curves.lower.is_empty() {
        return Err(Error::NoFold);
    }
    Ok(curves)
}
