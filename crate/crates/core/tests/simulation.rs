use lgcusp::classification::classify_all;
use lgcusp::equilibria::{degenerate_point, interior_equilibria, Equilibrium};
use lgcusp::model::{ScaledParams, State};
use lgcusp::simulation::{
    integrate, nullcline_intersections, phase_portrait, probe_solver_config, stability_probe,
    PortraitGrid, ProbeConfig, SolverConfig, Termination, Verdict, Window,
};

fn focus_params() -> ScaledParams {
    ScaledParams::new(0.1, 0.2, 1.5, 0.002, 0.1).unwrap()
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let p = focus_params();
    let eq = interior_equilibria(&p).unwrap()[0].state;
    let traj = integrate(&p, eq, &SolverConfig::default().with_t_end(100.0)).unwrap();
    assert_eq!(traj.terminated, Termination::Horizon);
    for s in &traj.samples {
        assert!(
            s.state().distance(&eq) < 1e-8,
            "t {} drifted to {:?}",
            s.t,
            s.state()
        );
    }
}

/// `y = x` is the predator nullcline, not an invariant line: orbits cross it
/// with zero vertical speed, so `y` moves only at second order in time.
#[test]
fn diagonal_is_crossed_horizontally() {
    for s in [0.01, 0.3, 2.0] {
        let p = ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, s).unwrap();
        let init = State::new(0.4, 0.4);
        let cfg = SolverConfig {
            t_end: 1e-3,
            max_step: 1e-4,
            ..SolverConfig::default()
        };
        let end = *integrate(&p, init, &cfg).unwrap().last();
        let (dx, dy) = ((end.x - init.x).abs(), (end.y - init.y).abs());
        assert!(dx > 1e-6, "s {s}: prey should move off the diagonal");
        assert!(dy < 1e-3 * dx, "s {s}: dx {dx:e} dy {dy:e}");
    }
}

#[test]
fn endpoint_converges_when_tolerances_halve() {
    let p = ScaledParams::new(0.1, 0.2, 1.7, 0.0035, 0.1).unwrap();
    let coarse = SolverConfig {
        rel_tol: 1e-6,
        abs_tol: 1e-8,
        t_end: 30.0,
        ..SolverConfig::default()
    };
    let fine = SolverConfig {
        rel_tol: 5e-7,
        abs_tol: 5e-9,
        ..coarse
    };
    let init = State::new(0.6, 0.3);
    let a = *integrate(&p, init, &coarse).unwrap().last();
    let b = *integrate(&p, init, &fine).unwrap().last();
    assert_eq!((a.t, b.t), (30.0, 30.0));
    let diff = a.state().distance(&b.state());
    assert!(
        diff < coarse.rel_tol * b.state().distance(&State::new(0.0, 0.0)).max(1.0),
        "{diff:e}"
    );
}

#[test]
fn trajectories_stay_in_positive_prey() {
    let p = ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 0.03).unwrap();
    let window = Window {
        x_min: 0.01,
        x_max: 1.0,
        y_min: 0.0,
        y_max: 1.0,
    };
    let portrait = phase_portrait(
        &p,
        &window,
        &PortraitGrid::default(),
        &SolverConfig::default().with_t_end(200.0),
    )
    .unwrap();
    assert_eq!(portrait.trajectories.len(), 25);
    for traj in &portrait.trajectories {
        assert!(traj.samples.iter().all(|s| s.x > 0.0));
    }
}

#[test]
fn reference_probe_verdicts() {
    let d = degenerate_point(0.1, 0.2).unwrap();
    let eq = Equilibrium {
        state: d.equilibrium(),
        multiplicity: 3,
    };
    for (s, verdict) in [(0.1, Verdict::Attracting), (0.03, Verdict::Repelling)] {
        let report = stability_probe(
            &d.params(s).unwrap(),
            &eq,
            &ProbeConfig::default(),
            &probe_solver_config(),
        )
        .unwrap();
        assert_eq!(report.verdict, verdict, "s = {s}");
        assert_eq!(report.seeds.len(), 8);
    }
}

#[test]
fn hyperbolic_stable_focus_attracts() {
    let p = focus_params();
    let c = classify_all(&p).unwrap().remove(0);
    let cls = &c.classification;
    // eigenvalues of a stable focus: negative real part, nonzero imaginary part
    assert!(cls.trace < 0.0 && cls.trace * cls.trace < 4.0 * cls.det);
    let report = stability_probe(
        &p,
        &c.equilibrium,
        &ProbeConfig::default(),
        &probe_solver_config(),
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Attracting);
}

#[test]
fn nullcline_crossings_are_the_equilibria() {
    let p = ScaledParams::new(0.1, 0.2, 1.6, 0.00355, 0.1).unwrap();
    let eqs = interior_equilibria(&p).unwrap();
    assert_eq!(eqs.len(), 3);
    let crossings = nullcline_intersections(&p, 1e-3, 1.0, 4001).unwrap();
    assert_eq!(crossings.len(), 3);
    for (c, e) in crossings.iter().zip(&eqs) {
        assert!(c.distance(&e.state) < 1e-8, "{c:?} vs {e:?}");
    }
}

#[test]
fn triple_point_portrait_has_one_crossing() {
    let p = ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 0.1).unwrap();
    let window = Window {
        x_min: 1e-3,
        x_max: 1.0,
        y_min: 0.0,
        y_max: 1.0,
    };
    let grid = PortraitGrid {
        nx: 2,
        ny: 2,
        nullcline_samples: 1001,
    };
    let portrait = phase_portrait(
        &p,
        &window,
        &grid,
        &SolverConfig::default().with_t_end(10.0),
    )
    .unwrap();
    assert_eq!(portrait.equilibria.len(), 1);
    assert_eq!(portrait.equilibria[0].multiplicity, 3);
    assert_eq!(portrait.intersections.len(), 1);
    // a triple root is only resolved to about the cube root of the rounding level
    assert!(portrait.intersections[0].distance(&State::new(1.0 / 9.0, 1.0 / 9.0)) < 1e-5);
}
