//! Local type of interior equilibria.
//!
//! Simple roots of the equilibrium cubic are hyperbolic or linear centers and are
//! sorted by the trace/determinant pattern. A triple root makes the determinant
//! vanish; its type then depends on `s` against `s1 = x1 (2 a x1 + lambda)`:
//! a degenerate (codimension-two) node for `s != s1`, unstable when `s < s1`,
//! and a codimension-three point for `s = s1`. Degenerate verdicts are only
//! issued with nonvanishing normal-form certificates.

use std::fmt;

use serde::Serialize;

use crate::equilibria::{interior_equilibria, Equilibrium};
use crate::error::{Error, Result};
use crate::model::{det, jacobian, trace, ScaledParams};
use crate::normal_form::{normal_form_at, NormalFormReport, TRACE_GATE};

/// `|det J| <= DET_GATE * max(1, |J|)` counts as a zero determinant.
pub const DET_GATE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    Saddle,
    CenterCandidate,
    /// Double root of the cubic with nonzero trace.
    SaddleNode,
    #[serde(rename = "codim2-node-stable")]
    Codim2NodeStable,
    #[serde(rename = "codim2-node-unstable")]
    Codim2NodeUnstable,
    #[serde(rename = "codim3-degenerate")]
    Codim3Degenerate,
    UnclassifiedDegenerate,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::StableNode => "stable-node",
            Kind::UnstableNode => "unstable-node",
            Kind::StableFocus => "stable-focus",
            Kind::UnstableFocus => "unstable-focus",
            Kind::Saddle => "saddle",
            Kind::CenterCandidate => "center-candidate",
            Kind::SaddleNode => "saddle-node",
            Kind::Codim2NodeStable => "codim2-node-stable",
            Kind::Codim2NodeUnstable => "codim2-node-unstable",
            Kind::Codim3Degenerate => "codim3-degenerate",
            Kind::UnclassifiedDegenerate => "unclassified-degenerate",
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Kind::SaddleNode
                | Kind::Codim2NodeStable
                | Kind::Codim2NodeUnstable
                | Kind::Codim3Degenerate
                | Kind::UnclassifiedDegenerate
        )
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub value: f64,
}

impl Certificate {
    fn new(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub kind: Kind,
    pub trace: f64,
    pub det: f64,
    pub s1: f64,
    /// Node/focus decided on a vanishing discriminant `trace^2 - 4 det`.
    pub borderline: bool,
    pub certificates: Vec<Certificate>,
    #[serde(skip)]
    pub normal_form: Option<NormalFormReport>,
}

impl Classification {
    pub fn certificate(&self, name: &str) -> Option<f64> {
        self.certificates
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.value)
    }
}

/// `s1 = x1 (2 a x1 + lambda)`; the trace of the Jacobian at the triple point is `s1 - s`.
pub fn s1_threshold(p: &ScaledParams, x1: f64) -> f64 {
    x1 * (2.0 * p.a * x1 + p.lambda)
}

/// Upper bound on `m` for the region where `a1 > 3/2` can be guaranteed.
pub fn lemma_m_bound() -> f64 {
    (11.0 - 105.0_f64.sqrt()) / 4.0
}

/// Upper bound `m + 1 - sqrt(30 m) / 2` on `lambda` in that region.
pub fn lemma_lambda_bound(m: f64) -> f64 {
    m + 1.0 - (30.0 * m).sqrt() / 2.0
}

/// Membership in `0 < m < (11 - sqrt(105))/4`, `0 < lambda < m + 1 - sqrt(30m)/2`,
/// together with `a1 = ((m + 1 - lambda)^2 - 3m) / (3m)`.
pub fn lemma21_region(m: f64, lambda: f64) -> (bool, f64) {
    let w = m + 1.0 - lambda;
    let a1 = (w * w - 3.0 * m) / (3.0 * m);
    let inside = m > 0.0 && m < lemma_m_bound() && lambda > 0.0 && lambda < lemma_lambda_bound(m);
    (inside, a1)
}

fn hyperbolic(tr: f64, dt: f64, scale: f64) -> (Kind, bool) {
    if dt < 0.0 {
        return (Kind::Saddle, false);
    }
    if tr.abs() <= DET_GATE * scale {
        return (Kind::CenterCandidate, false);
    }
    let disc = tr * tr - 4.0 * dt;
    let borderline = disc.abs() <= 1e-10 * (tr * tr).max(4.0 * dt);
    let node = borderline || disc > 0.0;
    let kind = match (node, tr < 0.0) {
        (true, true) => Kind::StableNode,
        (true, false) => Kind::UnstableNode,
        (false, true) => Kind::StableFocus,
        (false, false) => Kind::UnstableFocus,
    };
    (kind, borderline)
}

/// Classifies an interior equilibrium.
pub fn classify(p: &ScaledParams, eq: &Equilibrium) -> Result<Classification> {
    p.validate()?;
    let j = jacobian(&eq.state, p)?;
    let tr = trace(&j);
    let dt = det(&j);
    let scale = j.iter().flatten().map(|x| x.abs()).fold(1.0, f64::max);
    let s1 = s1_threshold(p, eq.state.x);
    let det_zero = dt.abs() <= DET_GATE * scale;

    let mut out = Classification {
        kind: Kind::UnclassifiedDegenerate,
        trace: tr,
        det: dt,
        s1,
        borderline: false,
        certificates: Vec::new(),
        normal_form: None,
    };

    match (eq.multiplicity, det_zero) {
        (1, false) => {
            let (kind, borderline) = hyperbolic(tr, dt, scale);
            out.kind = kind;
            out.borderline = borderline;
            return Ok(out);
        }
        (1, true) | (2.., false) => {
            return Err(Error::InconsistentMultiplicity {
                multiplicity: eq.multiplicity,
                det: dt,
            });
        }
        _ => {}
    }

    if eq.multiplicity == 2 {
        if tr.abs() <= TRACE_GATE {
            return Ok(out);
        }
        let nf = normal_form_at(p, &eq.state)?;
        out.certificates
            .push(Certificate::new("reduced_u2", nf.reduced_u2.unwrap_or(0.0)));
        if nf.nondegenerate_reduced_u2 == Some(true) {
            out.kind = Kind::SaddleNode;
        }
        out.normal_form = Some(nf);
        return Ok(out);
    }

    if (p.s - s1).abs() <= TRACE_GATE {
        let nf = normal_form_at(p, &eq.state)?;
        let (in_region, a1) = lemma21_region(p.m, p.lambda);
        out.certificates
            .push(Certificate::new("j11", nf.j11.unwrap_or(0.0)));
        out.certificates
            .push(Certificate::new("j30", nf.j30.unwrap_or(0.0)));
        out.certificates.push(Certificate::new(
            "j21_plus_3i30",
            nf.j21_plus_3i30.unwrap_or(0.0),
        ));
        out.certificates.push(Certificate::new(
            "lemma_region",
            f64::from(u8::from(in_region)),
        ));
        out.certificates.push(Certificate::new("lemma_a1", a1));
        if in_region && nf.nondegenerate() {
            out.kind = Kind::Codim3Degenerate;
        }
        out.normal_form = Some(nf);
        return Ok(out);
    }

    let nf = normal_form_at(p, &eq.state)?;
    let e30 = nf.e30.unwrap_or(0.0);
    out.certificates.push(Certificate::new("e30", e30));
    out.certificates
        .push(Certificate::new("e11f30", nf.e11f30.unwrap_or(0.0)));
    out.certificates
        .push(Certificate::new("sigma2", nf.sigma2.unwrap_or(0.0)));
    out.certificates
        .push(Certificate::new("reduced_u2", nf.reduced_u2.unwrap_or(0.0)));
    let quadratic_vanishes = nf.nondegenerate_reduced_u2 == Some(false);
    if quadratic_vanishes && nf.nondegenerate_e30 == Some(true) && e30 > 0.0 {
        // e30 > 0 repels in the rescaled time; the rescale reverses time when s > s1
        out.kind = if nf.time_reversed == Some(true) {
            Kind::Codim2NodeStable
        } else {
            Kind::Codim2NodeUnstable
        };
    }
    out.normal_form = Some(nf);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifiedEquilibrium {
    pub equilibrium: Equilibrium,
    pub classification: Classification,
}

/// All interior equilibria with their classification.
pub fn classify_all(p: &ScaledParams) -> Result<Vec<ClassifiedEquilibrium>> {
    interior_equilibria(p)?
        .into_iter()
        .map(|equilibrium| {
            classify(p, &equilibrium).map(|classification| ClassifiedEquilibrium {
                equilibrium,
                classification,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::degenerate_point;
    use crate::model::State;

    fn triple(s: f64) -> (ScaledParams, Equilibrium) {
        let d = degenerate_point(0.1, 0.2).unwrap();
        (
            d.params(s).unwrap(),
            Equilibrium {
                state: d.equilibrium(),
                multiplicity: 3,
            },
        )
    }

    #[test]
    fn threshold_reference_value() {
        let p = ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 0.05).unwrap();
        assert!((s1_threshold(&p, 1.0 / 9.0) - 26.0 / 405.0).abs() < 1e-16);
        let flat = ScaledParams {
            lambda: 0.0,
            a: 0.0,
            ..p
        };
        assert_eq!(s1_threshold(&flat, 0.3), 0.0);
    }

    #[test]
    fn lemma_region_reference() {
        assert!((lemma_m_bound() - 0.188262).abs() < 1e-6);
        assert!((lemma_lambda_bound(0.1) - 0.233975).abs() < 1e-6);
        let (inside, a1) = lemma21_region(0.1, 0.2);
        assert!(inside);
        assert!((a1 - 1.7).abs() < 1e-14);
        assert!(!lemma21_region(0.3, 0.1).0);
    }

    #[test]
    fn codim2_sign_rule() {
        let (p, eq) = triple(0.1);
        let c = classify(&p, &eq).unwrap();
        assert_eq!(c.kind, Kind::Codim2NodeStable);
        assert!(c.certificate("e30").unwrap() > 0.0);

        let (p, eq) = triple(0.03);
        assert_eq!(classify(&p, &eq).unwrap().kind, Kind::Codim2NodeUnstable);
    }

    #[test]
    fn codim3_at_trace_zero() {
        let (p, eq) = triple(26.0 / 405.0);
        let c = classify(&p, &eq).unwrap();
        assert_eq!(c.kind, Kind::Codim3Degenerate);
        let j30 = c.certificate("j30").unwrap();
        assert!((j30 + 7.144e-4).abs() < 1e-7);
        assert!(c.certificate("j11").unwrap() != 0.0);
        assert!(c.certificate("j21_plus_3i30").unwrap() != 0.0);
    }

    #[test]
    fn codim3_outside_lemma_region_is_unclassified() {
        // m above the lemma bound
        let d = degenerate_point(0.3, 0.1).unwrap();
        let p = d.params(d.s1()).unwrap();
        let eq = Equilibrium {
            state: d.equilibrium(),
            multiplicity: 3,
        };
        assert_eq!(
            classify(&p, &eq).unwrap().kind,
            Kind::UnclassifiedDegenerate
        );
    }

    #[test]
    fn multiplicity_must_match_determinant() {
        let (p, eq) = triple(0.1);
        let lie = Equilibrium {
            multiplicity: 1,
            ..eq
        };
        assert!(matches!(
            classify(&p, &lie),
            Err(Error::InconsistentMultiplicity { .. })
        ));

        let p = ScaledParams::new(0.1, 0.2, 1.7, 0.006, 0.1).unwrap();
        let eq = interior_equilibria(&p).unwrap()[0];
        let lie = Equilibrium {
            multiplicity: 3,
            ..eq
        };
        assert!(matches!(
            classify(&p, &lie),
            Err(Error::InconsistentMultiplicity { .. })
        ));
    }

    #[test]
    fn simple_equilibria_are_never_degenerate() {
        let p = ScaledParams::new(0.1, 0.2, 1.7, 0.006, 0.1).unwrap();
        for ce in classify_all(&p).unwrap() {
            assert_eq!(ce.equilibrium.multiplicity, 1);
            assert!(!ce.classification.kind.is_degenerate());
        }
    }

    #[test]
    fn hyperbolic_patterns() {
        let scale = 1.0;
        assert_eq!(hyperbolic(0.1, -1.0, scale).0, Kind::Saddle);
        assert_eq!(hyperbolic(-3.0, 1.0, scale).0, Kind::StableNode);
        assert_eq!(hyperbolic(3.0, 1.0, scale).0, Kind::UnstableNode);
        assert_eq!(hyperbolic(-0.1, 1.0, scale).0, Kind::StableFocus);
        assert_eq!(hyperbolic(0.1, 1.0, scale).0, Kind::UnstableFocus);
        assert_eq!(hyperbolic(0.0, 1.0, scale).0, Kind::CenterCandidate);
        let (kind, borderline) = hyperbolic(-2.0, 1.0, scale);
        assert_eq!(kind, Kind::StableNode);
        assert!(borderline);
    }

    #[test]
    fn jacobian_state_outside_domain() {
        let p = ScaledParams::new(0.1, 0.2, 1.7, 0.006, 0.1).unwrap();
        let eq = Equilibrium {
            state: State::new(-1.0, -1.0),
            multiplicity: 1,
        };
        assert!(matches!(classify(&p, &eq), Err(Error::Domain { .. })));
    }
}
