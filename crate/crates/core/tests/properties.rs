use lgcusp::bifurcation::{unfolding_coords, DepressedCubic};
use lgcusp::equilibria::{
    degenerate_point, equilibrium_cubic, interior_equilibria, shengjin_classify, CubicCoefficients,
};
use lgcusp::model::{
    jacobian, nondimensionalize, taylor_expansion, vector_field, RawParams, ScaledParams, State,
};
use lgcusp::poly::{Poly2, PolyMap2};
use proptest::prelude::*;

fn scaled() -> impl Strategy<Value = ScaledParams> {
    (
        0.02..0.95f64,
        0.01..1.0f64,
        0.0..4.0f64,
        1e-4..0.05f64,
        0.01..2.0f64,
    )
        .prop_map(|(m, lambda, a, h, s)| ScaledParams::new(m, lambda, a, h, s).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cubic_roots_ignore_overall_scale(p in scaled(), k in 0.01..100.0f64) {
        let c = equilibrium_cubic(&p).unwrap();
        let a = shengjin_classify(&c).unwrap();
        let b = shengjin_classify(&c.scale(k)).unwrap();
        prop_assert_eq!(a.real_root_count(), b.real_root_count());
        for (ra, rb) in a.roots.iter().zip(&b.roots) {
            prop_assert_eq!(ra.multiplicity, rb.multiplicity);
            prop_assert!(close(ra.value, rb.value, 1e-9), "{} vs {}", ra.value, rb.value);
        }
    }

    #[test]
    fn predator_rests_on_the_diagonal(p in scaled(), x in 0.001..3.0f64) {
        prop_assert_eq!(vector_field(&State::new(x, x), &p).unwrap()[1], 0.0);
    }

    #[test]
    fn equilibria_zero_the_field(p in scaled()) {
        for eq in interior_equilibria(&p).unwrap() {
            let [dx, dy] = vector_field(&eq.state, &p).unwrap();
            prop_assert!(dx.abs() < 1e-12 && dy == 0.0);
        }
    }

    #[test]
    fn unit_raw_scales_round_trip(p in scaled()) {
        let raw = RawParams { r: 1.0, k: 1.0, m_raw: p.m, lambda_raw: p.lambda, a_raw: p.a, h_raw: p.h, s_raw: p.s, c: 1.0 };
        prop_assert_eq!(nondimensionalize(&raw).unwrap(), p);
    }

    #[test]
    fn raw_scales_compose(p in scaled(), r in 0.1..10.0f64, k in 0.1..10.0f64, c in 0.1..10.0f64) {
        let raw = RawParams {
            r,
            k,
            m_raw: p.m * k,
            lambda_raw: p.lambda * r / c,
            a_raw: p.a * r / (c * c * k),
            h_raw: p.h * r * k * k,
            s_raw: p.s * r * k,
            c,
        };
        let q = nondimensionalize(&raw).unwrap();
        for (u, v) in [(q.m, p.m), (q.lambda, p.lambda), (q.a, p.a), (q.h, p.h), (q.s, p.s)] {
            prop_assert!(close(u, v, 1e-13), "{u} vs {v}");
        }
    }

    #[test]
    fn depressed_cubic_reconstructs(p in scaled()) {
        let c = equilibrium_cubic(&p).unwrap();
        let back = DepressedCubic::of(&c).unwrap().reconstruct();
        for (u, v) in [(back.c3, c.c3), (back.c2, c.c2), (back.c1, c.c1), (back.c0, c.c0)] {
            prop_assert!((u - v).abs() <= 1e-12 * c.c3.abs(), "{u} vs {v}");
        }
    }

    #[test]
    fn unfolding_discriminant_matches_root_count(p in scaled()) {
        let eta = unfolding_coords(&p).unwrap();
        let s = shengjin_classify(&equilibrium_cubic(&p).unwrap()).unwrap();
        let disc = eta.discriminant();
        let scale = (4.0 * eta.eta2.powi(3)).abs() + 27.0 * eta.eta1 * eta.eta1;
        prop_assume!(disc.abs() > 1e-6 * scale);
        prop_assert_eq!(s.real_root_count(), if disc < 0.0 { 3 } else { 1 });
    }

    #[test]
    fn linear_change_round_trips(
        coeffs in proptest::collection::vec(-1.0..1.0f64, 8),
        t in [0.5..2.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.5..2.0f64],
    ) {
        let t = [[t[0], t[1]], [t[2], t[3]]];
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        prop_assume!(det.abs() > 0.1);
        let inv = [[t[1][1] / det, -t[0][1] / det], [-t[1][0] / det, t[0][0] / det]];
        let mut f = Poly2::zero();
        let mut g = Poly2::zero();
        for (n, (i, j)) in [(1, 0), (0, 1), (2, 0), (1, 1)].into_iter().enumerate() {
            f.set(i, j, coeffs[n]);
            g.set(j, i, coeffs[n + 4]);
        }
        let field = PolyMap2::new(f, g);
        let back = field.linear_change(&t).unwrap().linear_change(&inv).unwrap();
        for d in 1..=2 {
            let diff = (back.f.homogeneous(d) - field.f.homogeneous(d))
                .max_abs_at_degree(d)
                .max((back.g.homogeneous(d) - field.g.homogeneous(d)).max_abs_at_degree(d));
            prop_assert!(diff < 1e-12, "degree {d}: {diff}");
        }
    }

    #[test]
    fn expansion_linear_part_is_the_jacobian(p in scaled(), x in 0.05..2.0f64, y in 0.01..2.0f64) {
        let st = State::new(x, y);
        let lin = taylor_expansion(&st, &p).unwrap().linear_part();
        let j = jacobian(&st, &p).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                prop_assert!(close(lin[r][c], j[r][c], 1e-13));
            }
        }
    }

    #[test]
    fn triple_point_cubic_is_triple(m in 0.02..0.95f64, frac in 0.02..0.98f64) {
        let bound = m + 1.0 - (3.0 * m).sqrt();
        let d = degenerate_point(m, frac * bound).unwrap();
        let c = equilibrium_cubic(&d.params(0.1).unwrap()).unwrap();
        let s = shengjin_classify(&c).unwrap();
        prop_assert_eq!(s.roots.len(), 1);
        prop_assert_eq!(s.roots[0].multiplicity, 3);
        prop_assert!(close(s.roots[0].value, d.x1, 1e-12));
        let scale = c.c2 * c.c2;
        prop_assert!(s.shengjin_a.abs() <= 1e-12 * scale);
    }
}

#[test]
fn scale_helper_is_linear() {
    let c = CubicCoefficients::new(1.0, 2.0, 3.0, 4.0).scale(2.0);
    assert_eq!((c.c3, c.c2, c.c1, c.c0), (2.0, 4.0, 6.0, 8.0));
}
