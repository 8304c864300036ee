//! Time integration of the scaled model, stability probes and phase-portrait data.
//!
//! The integrator is the Dormand-Prince 5(4) pair with a standard PI-free step
//! controller. Two guards stop a run early: the prey density falling to
//! `x_floor` (the `y/x` term is singular on the axis) and the state norm
//! exceeding [`BLOWUP_NORM`].

use std::f64::consts::PI;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{equilibrium_cubic, interior_equilibria, Equilibrium};
use crate::error::{Error, Result};
use crate::model::{raw_vector_field, vector_field, RawParams, ScaledParams, State};

/// Euclidean norm beyond which a trajectory is reported as blowing up.
pub const BLOWUP_NORM: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub t_end: f64,
    pub x_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 10.0,
            min_step: 1e-12,
            t_end: 100.0,
            x_floor: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn with_t_end(self, t_end: f64) -> Self {
        Self { t_end, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel-tol", self.rel_tol),
            ("abs-tol", self.abs_tol),
            ("min-step", self.min_step),
            ("max-step", self.max_step),
            ("t-end", self.t_end),
            ("x-floor", self.x_floor),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.min_step > self.max_step {
            return Err(Error::InvalidParams(format!(
                "min-step {} exceeds max-step {}",
                self.min_step, self.max_step
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Horizon,
    BlowUp,
    XFloor,
    /// The observer asked to stop.
    Stopped,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Horizon => "horizon",
            Termination::BlowUp => "blow-up",
            Termination::XFloor => "x-floor",
            Termination::Stopped => "stopped",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl Sample {
    pub fn state(&self) -> State {
        State::new(self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminated: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory holds at least the initial sample")
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

enum Attempt {
    Accepted {
        next: [f64; 2],
        f_next: [f64; 2],
        error: f64,
    },
    Rejected {
        error: f64,
    },
    /// A stage left the domain `x > x_floor`.
    OutOfDomain,
}

fn attempt<F>(field: &F, y: [f64; 2], f0: [f64; 2], h: f64, cfg: &SolverConfig) -> Attempt
where
    F: Fn(&State) -> Result<[f64; 2]>,
{
    let mut k = [[0.0; 2]; 7];
    k[0] = f0;
    let mut stage = y;
    for i in 1..7 {
        for c in 0..2 {
            stage[c] = y[c] + h * (0..i).map(|j| A[i][j] * k[j][c]).sum::<f64>();
        }
        if !(stage[0] > cfg.x_floor) {
            return Attempt::OutOfDomain;
        }
        k[i] = match field(&State::new(stage[0], stage[1])) {
            Ok(v) => v,
            Err(_) => return Attempt::OutOfDomain,
        };
    }
    // FSAL: the last stage is the fifth-order solution
    let next = stage;
    let mut error = 0.0;
    for c in 0..2 {
        let delta = h * (0..7).map(|j| E[j] * k[j][c]).sum::<f64>();
        let scale = cfg.abs_tol + cfg.rel_tol * y[c].abs().max(next[c].abs());
        error += (delta / scale).powi(2);
    }
    let error = (error / 2.0).sqrt();
    if error.is_finite() && error <= 1.0 {
        Attempt::Accepted {
            next,
            f_next: k[6],
            error,
        }
    } else {
        Attempt::Rejected { error }
    }
}

fn initial_step(y: [f64; 2], f0: [f64; 2], cfg: &SolverConfig) -> f64 {
    let norm = |v: [f64; 2]| {
        let s = v
            .iter()
            .zip(y.iter())
            .map(|(vi, yi)| (vi / (cfg.abs_tol + cfg.rel_tol * yi.abs())).powi(2))
            .sum::<f64>();
        (s / 2.0).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.clamp(cfg.min_step, cfg.max_step).min(cfg.t_end)
}

/// Integrates `dz/dt = field(z)` from `t = 0` to `cfg.t_end`, calling `observe`
/// after every accepted step.
pub fn integrate_field<F, O>(
    field: F,
    init: State,
    cfg: &SolverConfig,
    mut observe: O,
) -> Result<Trajectory>
where
    F: Fn(&State) -> Result<[f64; 2]>,
    O: FnMut(&Sample) -> ControlFlow<()>,
{
    cfg.validate()?;
    if !(init.x > cfg.x_floor) || !init.y.is_finite() {
        return Err(Error::Domain { x: init.x });
    }
    let mut y = [init.x, init.y];
    let mut f = field(&init)?;
    let mut t = 0.0;
    let mut h = initial_step(y, f, cfg);
    let mut traj = Trajectory {
        samples: vec![Sample {
            t,
            x: y[0],
            y: y[1],
        }],
        terminated: Termination::Horizon,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if observe(&traj.samples[0]).is_break() {
        traj.terminated = Termination::Stopped;
        return Ok(traj);
    }
    while t < cfg.t_end {
        let last_step = t + h >= cfg.t_end;
        let step = if last_step { cfg.t_end - t } else { h };
        match attempt(&field, y, f, step, cfg) {
            Attempt::Accepted {
                next,
                f_next,
                error,
            } => {
                debug_assert!(error <= 1.0, "accepted step with scaled error {error}");
                t = if last_step { cfg.t_end } else { t + step };
                y = next;
                f = f_next;
                traj.accepted_steps += 1;
                let sample = Sample {
                    t,
                    x: y[0],
                    y: y[1],
                };
                traj.samples.push(sample);
                if y[0].hypot(y[1]) > BLOWUP_NORM {
                    traj.terminated = Termination::BlowUp;
                    return Ok(traj);
                }
                if observe(&sample).is_break() {
                    traj.terminated = Termination::Stopped;
                    return Ok(traj);
                }
                let factor = if error == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * error.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                h = (step * factor).clamp(cfg.min_step, cfg.max_step);
            }
            Attempt::Rejected { error } => {
                traj.rejected_steps += 1;
                if step <= cfg.min_step {
                    return Err(Error::StepUnderflow {
                        t,
                        x: y[0],
                        y: y[1],
                    });
                }
                let factor = if error.is_finite() {
                    (SAFETY * error.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h = (step * factor).max(cfg.min_step);
            }
            Attempt::OutOfDomain => {
                traj.rejected_steps += 1;
                if step <= cfg.min_step {
                    traj.terminated = Termination::XFloor;
                    return Ok(traj);
                }
                h = (step * 0.5).max(cfg.min_step);
            }
        }
    }
    Ok(traj)
}

/// Integrates the scaled model from `init`.
pub fn integrate(p: &ScaledParams, init: State, cfg: &SolverConfig) -> Result<Trajectory> {
    p.validate()?;
    integrate_field(
        |st| vector_field(st, p),
        init,
        cfg,
        |_| ControlFlow::Continue(()),
    )
}

/// Integrates the raw model in raw time and raw state units.
pub fn integrate_raw(p: &RawParams, init: State, cfg: &SolverConfig) -> Result<Trajectory> {
    p.validate()?;
    integrate_field(
        |st| raw_vector_field(st, p),
        init,
        cfg,
        |_| ControlFlow::Continue(()),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Attracting,
    Repelling,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Attracting => "attracting",
            Verdict::Repelling => "repelling",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub radius: f64,
    pub seeds: usize,
    /// Checkpoints sit at `t_end / 2^k`, `k = checkpoints - 1, ..., 0`.
    pub checkpoints: usize,
    /// Number of final checkpoints over which a slowly converging seed must
    /// shrink strictly.
    pub decay_checkpoints: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            radius: 1e-2,
            seeds: 8,
            checkpoints: 8,
            decay_checkpoints: 4,
        }
    }
}

/// Solver settings for probes near degenerate nodes.
pub fn probe_solver_config() -> SolverConfig {
    SolverConfig {
        t_end: 5e3,
        ..SolverConfig::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub angle: f64,
    /// Distance to the equilibrium at each checkpoint reached, in time order.
    pub checkpoint_distances: Vec<f64>,
    pub final_distance: f64,
    /// First time the distance exceeded ten radii, or the time a guard
    /// stopped the run.
    pub escape_time: Option<f64>,
    /// Largest distance from the first of the last `decay_checkpoints`
    /// checkpoints to the end of the run.
    pub late_max_distance: f64,
    pub terminated: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub verdict: Verdict,
    pub seeds: Vec<SeedOutcome>,
}

fn probe_seed(
    p: &ScaledParams,
    center: State,
    angle: f64,
    probe: &ProbeConfig,
    cfg: &SolverConfig,
) -> Result<SeedOutcome> {
    let init = State::new(
        center.x + probe.radius * angle.cos(),
        center.y + probe.radius * angle.sin(),
    );
    let checkpoint_times: Vec<f64> = (0..probe.checkpoints)
        .rev()
        .map(|k| cfg.t_end / 2f64.powi(k as i32))
        .collect();
    let mut next = 0;
    let mut distances = Vec::with_capacity(checkpoint_times.len());
    let mut escape_time = None;
    let mut previous: Option<Sample> = None;
    let escape = 10.0 * probe.radius;
    let late_start = checkpoint_times[probe.checkpoints.saturating_sub(probe.decay_checkpoints)];
    let mut late_max = 0.0f64;
    let traj = integrate_field(
        |st| vector_field(st, p),
        init,
        cfg,
        |sample| {
            let d = sample.state().distance(&center);
            // checkpoints are read off by linear interpolation between steps
            while next < checkpoint_times.len() && sample.t >= checkpoint_times[next] {
                let tc = checkpoint_times[next];
                let dc = match previous {
                    Some(prev) if sample.t > prev.t => {
                        let w = (tc - prev.t) / (sample.t - prev.t);
                        let dp = prev.state().distance(&center);
                        dp + w * (d - dp)
                    }
                    _ => d,
                };
                distances.push(dc);
                next += 1;
            }
            previous = Some(*sample);
            if sample.t >= late_start {
                late_max = late_max.max(d);
            }
            if d > escape && escape_time.is_none() {
                escape_time = Some(sample.t);
            }
            ControlFlow::Continue(())
        },
    )?;
    if escape_time.is_none() && traj.terminated != Termination::Horizon {
        escape_time = Some(traj.last().t);
    }
    Ok(SeedOutcome {
        angle,
        checkpoint_distances: distances,
        final_distance: traj.last().state().distance(&center),
        escape_time,
        late_max_distance: late_max,
        terminated: traj.terminated,
    })
}

fn seed_attracted(seed: &SeedOutcome, probe: &ProbeConfig) -> bool {
    if seed.terminated != Termination::Horizon {
        return false;
    }
    if seed.final_distance < probe.radius / 10.0 {
        return true;
    }
    // slow algebraic approach: strict decay over the last checkpoints, which
    // span a factor 2^(decay_checkpoints - 1) in time, with no excursion in between
    let d = &seed.checkpoint_distances;
    if d.len() < probe.decay_checkpoints {
        return false;
    }
    let window = &d[d.len() - probe.decay_checkpoints..];
    seed.late_max_distance < 10.0 * probe.radius
        && seed.late_max_distance <= 1.5 * window[0]
        && window.windows(2).all(|w| w[1] < w[0])
}

/// Empirical stability of an interior equilibrium from seeds on a small circle
/// around it, placed at uniform angles.
///
/// A seed is attracted when it reaches the horizon either within
/// `radius / 10`, or after shrinking strictly over the last
/// `decay_checkpoints` geometric checkpoints without growing past 1.5 times
/// the first of them in between; the second route covers the `t^(-1/2)`
/// approach to a degenerate node. Transient excursions do not
/// matter. A seed escapes when its distance ever exceeds `10 * radius` or the
/// run hits a guard. All seeds attracted gives [`Verdict::Attracting`]; all
/// seeds escaping and none attracted gives [`Verdict::Repelling`].
pub fn stability_probe(
    p: &ScaledParams,
    eq: &Equilibrium,
    probe: &ProbeConfig,
    cfg: &SolverConfig,
) -> Result<ProbeReport> {
    p.validate()?;
    cfg.validate()?;
    if !(probe.radius > 0.0)
        || probe.seeds == 0
        || probe.decay_checkpoints < 2
        || probe.checkpoints < probe.decay_checkpoints
    {
        return Err(Error::InvalidParams(format!(
            "probe needs positive radius, a seed, and 2 <= decay_checkpoints <= checkpoints, got {probe:?}"
        )));
    }
    if eq.state.x - probe.radius <= cfg.x_floor {
        return Err(Error::InvalidParams(format!(
            "probe radius {} reaches the prey axis from x = {}",
            probe.radius, eq.state.x
        )));
    }
    let seeds = (0..probe.seeds)
        .into_par_iter()
        .map(|i| {
            let angle = 2.0 * PI * i as f64 / probe.seeds as f64;
            probe_seed(p, eq.state, angle, probe, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let attracted: Vec<bool> = seeds.iter().map(|s| seed_attracted(s, probe)).collect();
    let verdict = if attracted.iter().all(|&a| a) {
        Verdict::Attracting
    } else if seeds
        .iter()
        .zip(&attracted)
        .all(|(s, &a)| s.escape_time.is_some() && !a)
    {
        Verdict::Repelling
    } else {
        Verdict::Inconclusive
    };
    Ok(ProbeReport { verdict, seeds })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0) {
            return Err(Error::InvalidRange(format!(
                "portrait window must lie in x > 0, got x_min = {}",
                self.x_min
            )));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min)
            || !(self.x_max.is_finite() && self.y_min.is_finite() && self.y_max.is_finite())
        {
            return Err(Error::InvalidRange(format!(
                "empty portrait window {self:?}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, st: &State) -> bool {
        (self.x_min..=self.x_max).contains(&st.x) && (self.y_min..=self.y_max).contains(&st.y)
    }
}

/// `n` evenly spaced values covering `[lo, hi]`; the midpoint when `n == 1`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Positive-`y` branch of the prey nullcline over `x`, when it exists.
///
/// Solves `a x y^2 + lambda x y - g(x) = 0` with `g(x) = x(1-x)(x-m) + h`;
/// there is exactly one positive root when `g(x) > 0` and none otherwise.
pub fn prey_nullcline_y(p: &ScaledParams, x: f64) -> Option<f64> {
    let g = x * (1.0 - x) * (x - p.m) + p.h;
    if !(x > 0.0) || g <= 0.0 {
        return None;
    }
    let b = p.lambda * x;
    // cancellation-free form of the positive quadratic root
    Some(2.0 * g / (b + (b * b + 4.0 * p.a * x * g).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Portrait {
    pub window: Window,
    pub seeds: Vec<State>,
    pub trajectories: Vec<Trajectory>,
    /// Connected pieces of the prey nullcline inside the window.
    pub prey_nullcline: Vec<Vec<State>>,
    /// The predator nullcline `y = x` clipped to the window.
    pub predator_nullcline: Vec<State>,
    pub equilibria: Vec<Equilibrium>,
    /// Crossings of the two nullclines located by sign change and bisection.
    pub intersections: Vec<State>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortraitGrid {
    pub nx: usize,
    pub ny: usize,
    pub nullcline_samples: usize,
}

impl Default for PortraitGrid {
    fn default() -> Self {
        Self {
            nx: 5,
            ny: 5,
            nullcline_samples: 401,
        }
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
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

/// Crossings of the prey nullcline with `y = x` for `x` in `(x_min, x_max)`.
///
/// Only sign changes are seen, so tangential (double) crossings are missed;
/// near a triple crossing the located point is limited by the flatness of the
/// cubic to roughly the cube root of machine precision.
pub fn nullcline_intersections(
    p: &ScaledParams,
    x_min: f64,
    x_max: f64,
    samples: usize,
) -> Result<Vec<State>> {
    let cubic = equilibrium_cubic(p)?;
    let xs = linspace(x_min, x_max, samples.max(2));
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (f0, f1) = (cubic.eval(w[0]), cubic.eval(w[1]));
        if f0 == 0.0 {
            out.push(State::new(w[0], w[0]));
        } else if (f0 < 0.0) != (f1 < 0.0) && f1 != 0.0 {
            let x = bisect(|x| cubic.eval(x), w[0], w[1]);
            out.push(State::new(x, x));
        }
    }
    if cubic.eval(x_max) == 0.0 {
        out.push(State::new(x_max, x_max));
    }
    Ok(out)
}

/// Trajectory bundle from a grid of seeds plus both nullclines and the
/// interior equilibria. Trajectories are returned in seed order, row by row in
/// `y` with `x` varying fastest.
pub fn phase_portrait(
    p: &ScaledParams,
    window: &Window,
    grid: &PortraitGrid,
    cfg: &SolverConfig,
) -> Result<Portrait> {
    p.validate()?;
    window.validate()?;
    cfg.validate()?;
    if grid.nx == 0 || grid.ny == 0 || grid.nullcline_samples < 2 {
        return Err(Error::InvalidRange(format!(
            "portrait grid too small: {grid:?}"
        )));
    }
    let seeds: Vec<State> = linspace(window.y_min, window.y_max, grid.ny)
        .into_iter()
        .flat_map(|y| {
            linspace(window.x_min, window.x_max, grid.nx)
                .into_iter()
                .map(move |x| State::new(x, y))
        })
        .filter(|st| st.x > cfg.x_floor)
        .collect();
    let trajectories = seeds
        .par_iter()
        .map(|seed| integrate(p, *seed, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut prey_nullcline = Vec::new();
    let mut piece = Vec::new();
    for x in linspace(window.x_min, window.x_max, grid.nullcline_samples) {
        match prey_nullcline_y(p, x)
            .map(|y| State::new(x, y))
            .filter(|st| window.contains(st))
        {
            Some(st) => piece.push(st),
            None if !piece.is_empty() => prey_nullcline.push(std::mem::take(&mut piece)),
            None => {}
        }
    }
    if !piece.is_empty() {
        prey_nullcline.push(piece);
    }

    let lo = window.x_min.max(window.y_min);
    let hi = window.x_max.min(window.y_max);
    let predator_nullcline = if lo <= hi {
        vec![State::new(lo, lo), State::new(hi, hi)]
    } else {
        Vec::new()
    };
    let equilibria = interior_equilibria(p)?;
    let intersections = if lo < hi {
        nullcline_intersections(p, lo, hi, grid.nullcline_samples)?
    } else {
        Vec::new()
    };
    Ok(Portrait {
        window: *window,
        seeds,
        trajectories,
        prey_nullcline,
        predator_nullcline,
        equilibria,
        intersections,
    })
}
