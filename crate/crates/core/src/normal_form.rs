//! Local normal forms at a non-hyperbolic interior equilibrium.
//!
//! Every step acts on the degree-4 jet by exact truncated composition:
//!
//! * one zero eigenvalue (`s != s1`): linear change with columns `(1, 1)` and
//!   `(s1, s)`, division of the field by `s1 - s`, then a center manifold
//!   `v = h(u)` and the reduced one-dimensional flow;
//! * double zero eigenvalue (`s = s1`): linear change with columns
//!   `(-s1, -s1)` and `(0, 1)` to `U' = V + ...`, followed by near-identity
//!   changes that leave only `V' = j11 U V + j30 U^3 + (j21 + 3 i30) U^2 V`
//!   up to cubic order.
//!
//! Certificates are read off the transformed expansions; closed forms are
//! carried alongside as cross-checks only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{taylor_jet, ScaledParams, State, TaylorCoefficients};
use crate::poly::{Mat2, Poly2, PolyMap2, Series1, DEGREE};

/// `|s - s1|` at or below this selects the double-zero branch.
pub const TRACE_GATE: f64 = 1e-9;

/// A certificate counts as nonzero when it exceeds this multiple of its
/// sensitivity to relative perturbations of the nonlinear jet.
pub const CERTIFICATE_GATE: f64 = 1e-10;

/// Relative size of the jet perturbations used to measure that sensitivity.
pub const PERTURBATION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalFormCase {
    SingleZero,
    DoubleZero,
}

/// Output of [`linear_normalize_single_zero`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleZeroSystem {
    /// Field after the linear change, before the time rescale.
    pub unscaled: PolyMap2,
    /// Field with linear part `diag(0, 1)`.
    pub system: PolyMap2,
    /// Columns are the zero and nonzero eigenvectors.
    pub transform: Mat2,
    /// The nonzero eigenvalue `s1 - s` the time was divided by.
    pub eigenvalue: f64,
    /// Largest rounding leftover removed from the diagonalized linear part.
    pub linear_residual: f64,
    /// True when the rescale runs time backwards (`s > s1`).
    pub time_reversed: bool,
}

/// Output of [`center_manifold_reduce`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenterManifold {
    /// Coefficient of `u^2` in `h(u)`.
    pub sigma1: f64,
    /// Coefficient of `u^3` in `h(u)`.
    pub sigma2: f64,
    /// `h(u)` through degree 4.
    pub manifold: Series1,
    /// Flow on the manifold, `du/dtau = r(u)`.
    pub reduced: Series1,
    /// Invariance defect `h'(u) F1(u, h) - F2(u, h)`; vanishes through degree 4.
    pub defect: Series1,
}

/// Certificates from either branch, flattened for serialization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalFormReport {
    pub case: NormalFormCase,
    pub s: f64,
    /// Prey-equation entry `a10` of the Jacobian; equals `s1` at the triple point.
    pub s1: f64,
    /// Largest entry of the linear part left over by the gated normalization.
    pub linear_residual: f64,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_reversed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e30: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e11: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f30: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e11f30: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    /// `u^2` coefficient of the reduced flow; zero at a triple equilibrium.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_u2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_u3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_u4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondegenerate_reduced_u2: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondegenerate_e30: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondegenerate_e11f30: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub i30: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j21: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j20: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j11: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j30: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j21_plus_3i30: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondegenerate_j11: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondegenerate_j30: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondegenerate_j21_plus_3i30: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_forms: Option<ClosedForms>,
}

impl NormalFormReport {
    fn empty(case: NormalFormCase, s: f64, s1: f64, linear_residual: f64) -> Self {
        Self {
            case,
            s,
            s1,
            linear_residual,
            time_reversed: None,
            e30: None,
            e11: None,
            f30: None,
            e11f30: None,
            sigma1: None,
            sigma2: None,
            reduced_u2: None,
            reduced_u3: None,
            reduced_u4: None,
            nondegenerate_reduced_u2: None,
            nondegenerate_e30: None,
            nondegenerate_e11f30: None,
            i30: None,
            j21: None,
            j20: None,
            j11: None,
            j30: None,
            j21_plus_3i30: None,
            nondegenerate_j11: None,
            nondegenerate_j30: None,
            nondegenerate_j21_plus_3i30: None,
            closed_forms: None,
        }
    }

    /// True when every certificate of the branch is nonzero.
    pub fn nondegenerate(&self) -> bool {
        let flags = match self.case {
            NormalFormCase::SingleZero => [
                self.nondegenerate_e30,
                self.nondegenerate_e11f30,
                Some(true),
            ],
            NormalFormCase::DoubleZero => [
                self.nondegenerate_j11,
                self.nondegenerate_j30,
                self.nondegenerate_j21_plus_3i30,
            ],
        };
        flags.iter().all(|f| *f == Some(true))
    }
}

/// Closed-form expressions at the triple equilibrium, evaluated for comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForms {
    /// `s1 = x1 (2 a x1 + lambda)`.
    pub s1: f64,
    /// `s (a + 1) / (s1 - s)^2`.
    pub e30: f64,
    /// `s (a + 1)(lambda + 4 a x1) / (s1 - s)^3`, from the jet by hand.
    pub e11f30: f64,
    /// `-s1^3 (a + 1)`.
    pub j30: f64,
    /// `-s1 (lambda + 4 a x1)`, from the jet by hand.
    pub j11: f64,
    /// `-s1 (m + 1 + 4 a x1)`, the variant carrying `m + 1` in place of `lambda`.
    pub j11_m_variant: f64,
    /// `(s1^3 + s1^2 lambda x1 + 2 s1 a lambda x1^3 + 2 a^2 s1 x1^4 + 2 s1^2 x1^2 (2a - 3)) / (2 x1^2)`.
    pub j21_plus_3i30_printed: f64,
}

impl ClosedForms {
    pub fn evaluate(p: &ScaledParams, x1: f64) -> Self {
        let ScaledParams {
            m, lambda, a, s, ..
        } = *p;
        let s1 = x1 * (2.0 * a * x1 + lambda);
        let d = s1 - s;
        Self {
            s1,
            e30: s * (a + 1.0) / (d * d),
            e11f30: s * (a + 1.0) * (lambda + 4.0 * a * x1) / (d * d * d),
            j30: -s1.powi(3) * (a + 1.0),
            j11: -s1 * (lambda + 4.0 * a * x1),
            j11_m_variant: -s1 * (m + 1.0 + 4.0 * a * x1),
            j21_plus_3i30_printed: (s1.powi(3)
                + s1 * s1 * lambda * x1
                + 2.0 * s1 * a * lambda * x1.powi(3)
                + 2.0 * a * a * s1 * x1.powi(4)
                + 2.0 * s1 * s1 * x1 * x1 * (2.0 * a - 3.0))
                / (2.0 * x1 * x1),
        }
    }
}

fn check_single_zero_jacobian(jet: &TaylorCoefficients) -> Result<()> {
    let j = [[jet.a10, jet.a01], [jet.b10, jet.b01]];
    let norm = j.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det.abs() > 1e-10 * norm.max(1.0) {
        return Err(Error::WrongBranch(format!(
            "Jacobian determinant {det:e} is not zero; equilibrium is hyperbolic"
        )));
    }
    Ok(())
}

/// Linear change to `diag(0, s1 - s)` followed by division of the field by `s1 - s`.
pub fn linear_normalize_single_zero(
    jet: &TaylorCoefficients,
    p: &ScaledParams,
) -> Result<SingleZeroSystem> {
    check_single_zero_jacobian(jet)?;
    let q = jet.a10;
    let s = jet.b10;
    let eigenvalue = q - s;
    if eigenvalue.abs() <= TRACE_GATE {
        return Err(Error::WrongBranch(format!(
            "|s - s1| = {:e} is inside the double-zero gate (s = {}, s1 = {q})",
            eigenvalue.abs(),
            p.s
        )));
    }
    let transform = [[1.0, q], [1.0, s]];
    let mut unscaled = jet.field().linear_change(&transform)?;
    let lin = unscaled.linear_part();
    let residual = [lin[0][0], lin[0][1], lin[1][0], lin[1][1] - eigenvalue]
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if residual > 1e-10 * q.abs().max(s.abs()) {
        return Err(Error::Truncation(format!(
            "linear part not diagonalized, residual {residual:e}"
        )));
    }
    // rounding leftovers would be amplified by the division below
    unscaled.f.set(1, 0, 0.0);
    unscaled.f.set(0, 1, 0.0);
    unscaled.g.set(1, 0, 0.0);
    unscaled.g.set(0, 1, eigenvalue);
    let mut system = unscaled.scale(1.0 / eigenvalue);
    system.g.set(0, 1, 1.0);
    Ok(SingleZeroSystem {
        unscaled,
        system,
        transform,
        eigenvalue,
        linear_residual: residual,
        time_reversed: eigenvalue < 0.0,
    })
}

/// Center manifold `v = h(u)` of a field with linear part `diag(0, mu)`, `mu != 0`.
pub fn center_manifold_reduce(sys: &PolyMap2) -> Result<CenterManifold> {
    let lin = sys.linear_part();
    let mu = lin[1][1];
    let scale = sys.max_abs_at_degree(1).max(f64::MIN_POSITIVE);
    if lin[0][0].abs() > 1e-8 * scale || lin[0][1].abs() > 1e-8 * scale {
        return Err(Error::WrongBranch(
            "first component has a nonvanishing linear term".to_string(),
        ));
    }
    if lin[1][0].abs() > 1e-8 * scale || mu.abs() <= 1e-8 * scale {
        return Err(Error::WrongBranch(
            "second component is not of the form mu v + O(2)".to_string(),
        ));
    }
    let mut f = sys.f;
    f.set(1, 0, 0.0);
    f.set(0, 1, 0.0);
    let mut nonlinear = sys.g;
    nonlinear.set(1, 0, 0.0);
    nonlinear.set(0, 1, 0.0);

    // mu h = h' F1(u, h) - N2(u, h), solved degree by degree; the degree-k
    // coefficient of the right side only involves h_2 .. h_{k-1}.
    let mut h = Series1::zero();
    for k in 2..=DEGREE {
        let rhs = h.deriv() * f.on_curve(&h)? - nonlinear.on_curve(&h)?;
        h.set(k, rhs.get(k) / mu);
    }
    let reduced = f.on_curve(&h)?;
    let g_full = nonlinear + Poly2::v().scale(mu);
    let defect = h.deriv() * reduced - g_full.on_curve(&h)?;
    Ok(CenterManifold {
        sigma1: h.get(2),
        sigma2: h.get(3),
        manifold: h,
        reduced,
        defect,
    })
}

/// Full single-zero certificate set.
pub fn single_zero_report(jet: &TaylorCoefficients, p: &ScaledParams) -> Result<NormalFormReport> {
    let sz = linear_normalize_single_zero(jet, p)?;
    let cm = center_manifold_reduce(&sz.system)?;
    let sys = &sz.system;
    let e30 = sys.f.get(3, 0);
    let e11 = sys.f.get(1, 1);
    let f30 = sys.g.get(3, 0);
    let mut report = NormalFormReport::empty(NormalFormCase::SingleZero, jet.b10, jet.a10, 0.0);
    report.time_reversed = Some(sz.time_reversed);
    report.e30 = Some(e30);
    report.e11 = Some(e11);
    report.f30 = Some(f30);
    report.e11f30 = Some(e11 * f30);
    report.sigma1 = Some(cm.sigma1);
    report.sigma2 = Some(cm.sigma2);
    report.reduced_u2 = Some(cm.reduced.get(2));
    report.reduced_u3 = Some(cm.reduced.get(3));
    report.reduced_u4 = Some(cm.reduced.get(4));
    report.linear_residual = sz.linear_residual;
    Ok(report)
}

/// Near-identity change `z = w + phi(w)` removing every degree-`k` term of a
/// field with linear part `[[0, 1], [0, 0]]` except `(0, U^k)` and `(0, U^(k-1) V)`.
pub fn bogdanov_homological_step(field: &PolyMap2, k: usize) -> PolyMap2 {
    let f = field.f.homogeneous(k);
    let g = field.g.homogeneous(k);
    let mut p = Poly2::zero();
    let mut q = Poly2::zero();
    q.set(k, 0, -f.get(k, 0));
    for i in 1..k {
        let j = k - i;
        q.set(i, j, g.get(i - 1, j + 1) / i as f64);
    }
    for j in 1..=k {
        let i = k - j;
        p.set(i + 1, j - 1, (q.get(i, j) + f.get(i, j)) / (i + 1) as f64);
    }
    PolyMap2::new(p, q)
}

/// Largest degree-`k` coefficient outside the Bogdanov normal-form complement.
fn non_normal_residual(field: &PolyMap2, k: usize) -> f64 {
    let mut rest = field.homogeneous(k);
    rest.g.set(k, 0, 0.0);
    rest.g.set(k - 1, 1, 0.0);
    rest.max_abs_at_degree(k)
}

/// Double-zero reduction to `U' = V`, `V' = j11 U V + j30 U^3 + (j21 + 3 i30) U^2 V`.
pub fn double_zero_chain(jet: &TaylorCoefficients, p: &ScaledParams) -> Result<NormalFormReport> {
    check_single_zero_jacobian(jet)?;
    let q = jet.a10;
    let s = jet.b10;
    if (q - s).abs() > TRACE_GATE {
        return Err(Error::WrongBranch(format!(
            "|s - s1| = {:e} exceeds the double-zero gate (s = {}, s1 = {q})",
            (q - s).abs(),
            p.s
        )));
    }
    let transform = [[-q, 0.0], [-q, 1.0]];
    let mut field = jet.field().linear_change(&transform)?;
    let lin = field.linear_part();
    let linear_residual = [lin[0][0], lin[0][1] - 1.0, lin[1][0], lin[1][1]]
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if linear_residual > 10.0 * TRACE_GATE * q.abs().max(1.0) {
        return Err(Error::Truncation(format!(
            "linear part not nilpotent, residual {linear_residual:e}"
        )));
    }
    // inside the gate the leftover trace is treated as zero
    field.f.set(1, 0, 0.0);
    field.f.set(0, 1, 1.0);
    field.g.set(1, 0, 0.0);
    field.g.set(0, 1, 0.0);

    let scale2 = field.max_abs_at_degree(2).max(f64::MIN_POSITIVE);
    let scale3 = field.max_abs_at_degree(3).max(f64::MIN_POSITIVE);

    let phi2 = bogdanov_homological_step(&field, 2);
    let quadratic = field.near_identity_change(&phi2)?;
    let phi3 = bogdanov_homological_step(&quadratic, 3);
    let cubic = quadratic.near_identity_change(&phi3)?;

    let r2 = non_normal_residual(&cubic, 2);
    let r3 = non_normal_residual(&cubic, 3);
    if r2 > 1e-10 * scale2 || r3 > 1e-10 * scale3.max(scale2 * scale2) {
        return Err(Error::Truncation(format!(
            "non-normal terms survive the reduction: degree 2 {r2:e}, degree 3 {r3:e}"
        )));
    }

    let i30 = quadratic.f.get(3, 0);
    let j21 = quadratic.g.get(2, 1);
    let combined = cubic.g.get(2, 1);
    let scale_combined = scale3.max(scale2 * scale2);
    if (combined - (j21 + 3.0 * i30)).abs() > 1e-9 * scale_combined {
        return Err(Error::Truncation(format!(
            "cubic normal-form coefficient {combined:e} disagrees with j21 + 3 i30 = {:e}",
            j21 + 3.0 * i30
        )));
    }

    let j11 = cubic.g.get(1, 1);
    let j30 = cubic.g.get(3, 0);
    let mut report = NormalFormReport::empty(NormalFormCase::DoubleZero, s, q, linear_residual);
    report.i30 = Some(i30);
    report.j21 = Some(j21);
    report.j20 = Some(cubic.g.get(2, 0));
    report.j11 = Some(j11);
    report.j30 = Some(j30);
    report.j21_plus_3i30 = Some(combined);
    Ok(report)
}

fn branch_report(jet: &TaylorCoefficients, p: &ScaledParams) -> Result<NormalFormReport> {
    if (jet.a10 - jet.b10).abs() <= TRACE_GATE {
        double_zero_chain(jet, p)
    } else {
        single_zero_report(jet, p)
    }
}

/// The jet with every nonlinear coefficient `c_i` replaced by
/// `c_i (1 + PERTURBATION * sign(i))`.
fn perturbed_jet(jet: &TaylorCoefficients, sign: impl Fn(usize) -> f64) -> TaylorCoefficients {
    let mut out = *jet;
    let nonlinear = [
        &mut out.a20,
        &mut out.a11,
        &mut out.a02,
        &mut out.a30,
        &mut out.a12,
        &mut out.b20,
        &mut out.b11,
        &mut out.b02,
        &mut out.b30,
        &mut out.b21,
        &mut out.b12,
        &mut out.b40,
        &mut out.b31,
        &mut out.b22,
    ];
    for (i, c) in nonlinear.into_iter().enumerate() {
        *c *= 1.0 + PERTURBATION * sign(i);
    }
    out
}

type Certificate = (
    fn(&NormalFormReport) -> Option<f64>,
    fn(&mut NormalFormReport, bool),
);

const CERTIFICATES: [Certificate; 6] = [
    (
        |r| r.reduced_u2,
        |r, v| r.nondegenerate_reduced_u2 = Some(v),
    ),
    (|r| r.e30, |r, v| r.nondegenerate_e30 = Some(v)),
    (|r| r.e11f30, |r, v| r.nondegenerate_e11f30 = Some(v)),
    (|r| r.j11, |r, v| r.nondegenerate_j11 = Some(v)),
    (|r| r.j30, |r, v| r.nondegenerate_j30 = Some(v)),
    (
        |r| r.j21_plus_3i30,
        |r, v| r.nondegenerate_j21_plus_3i30 = Some(v),
    ),
];

/// Sets the nonzero flags by comparing each certificate with how far it moves
/// under two perturbation patterns of the nonlinear jet: uniform, and
/// alternating in sign.
fn certify(
    report: &mut NormalFormReport,
    jet: &TaylorCoefficients,
    p: &ScaledParams,
) -> Result<()> {
    let variants = [
        branch_report(&perturbed_jet(jet, |_| 1.0), p)?,
        branch_report(
            &perturbed_jet(jet, |i| if i % 2 == 0 { 1.0 } else { -1.0 }),
            p,
        )?,
    ];
    for (get, set) in CERTIFICATES {
        let Some(value) = get(report) else { continue };
        let sensitivity = variants
            .iter()
            .filter_map(get)
            .map(|v| (v - value).abs() / PERTURBATION)
            .fold(0.0, f64::max);
        set(report, value.abs() > CERTIFICATE_GATE * sensitivity);
    }
    Ok(())
}

/// Jet, branch selection, certificate gates and closed-form cross-checks at an
/// interior equilibrium.
pub fn normal_form_at(p: &ScaledParams, eq: &State) -> Result<NormalFormReport> {
    let jet = taylor_jet(eq, p)?;
    let mut report = branch_report(&jet, p)?;
    certify(&mut report, &jet, p)?;
    report.closed_forms = Some(ClosedForms::evaluate(p, eq.x));
    Ok(report)
}
