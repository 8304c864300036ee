//! Command-line front end.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bifurcation::{fold_curves, sweep, Range};
use crate::classification::{classify_all, lemma21_region};
use crate::equilibria::{degenerate_point, interior_equilibria, DegeneratePoint, Equilibrium};
use crate::error::{Error, Result};
use crate::io::{
    classified_csv, equilibria_csv, folds_csv, portrait_files, resolve_output, sweep_csv,
    sweep_svg, to_toml, trajectory_csv, verdicts_csv, Outputs, ParamsDocument, PartialScaled,
    OUT_DIR_ENV,
};
use crate::model::{ScaledParams, State};
use crate::normal_form::normal_form_at;
use crate::simulation::{
    integrate, phase_portrait, probe_solver_config, stability_probe, PortraitGrid, ProbeConfig,
    SolverConfig, Window,
};
use crate::verify;

#[derive(Debug, Parser)]
#[command(
    name = "lgcusp",
    version,
    about = "Equilibria, degenerate nodes and cusp unfolding of a Leslie-Gower predator-prey model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interior equilibria as CSV; classified when `s` is known.
    Equilibria {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classify every interior equilibrium.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        /// Also run the empirical stability probe and add a verdict column.
        #[arg(long)]
        probe: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Triple-point parameters (a1, h1, x1, s1) for given m and lambda.
    Degenerate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Normal-form coefficients at a multiple equilibrium. Without `a` and `h`
    /// the triple point is used; without `s` the codimension-3 value `s1`.
    NormalForm {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Integrate one trajectory.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        y0: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Trajectory bundle, nullclines and equilibria as a directory of CSV files.
    Portrait {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 5)]
        nx: usize,
        #[arg(long, default_value_t = 5)]
        ny: usize,
        #[arg(long, default_value_t = 401)]
        nullcline_samples: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output directory; defaults to `portrait` inside `$LGCUSP_OUT_DIR`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Root counts and unfolding coordinates over an (a, h) grid.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        range: PlaneArgs,
        #[arg(long, default_value_t = 201)]
        na: usize,
        #[arg(long, default_value_t = 201)]
        nh: usize,
        /// Also render the plane with the fold curves as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Saddle-node (fold) curves in the (a, h) plane.
    Folds {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1.5)]
        a_min: f64,
        #[arg(long, default_value_t = 1.9)]
        a_max: f64,
        #[arg(long, default_value_t = 201)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the full check suite; exit status 0 iff every check passes.
    Verify {
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        /// Directory for the check artifacts; defaults to `$LGCUSP_OUT_DIR`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, Default, Args)]
pub struct ParamArgs {
    /// TOML parameter document (scaled keys m, lambda, a, h, s or the raw keys).
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Keep (a, h, s) as given even when they round to the triple point.
    #[arg(long)]
    pub no_snap: bool,
}

impl ParamArgs {
    /// Document values overridden by inline flags.
    pub fn resolve(&self) -> Result<PartialScaled> {
        let base = match &self.params {
            Some(path) => ParamsDocument::load(path)?.scaled()?,
            None => PartialScaled::default(),
        };
        let params = base.overridden_by(PartialScaled {
            m: self.m,
            lambda: self.lambda,
            a: self.a,
            h: self.h,
            s: self.s,
        });
        Ok(if self.no_snap {
            params
        } else {
            snap_to_triple(params)
        })
    }
}

/// Relative distance below which `(a, h)` and `s` are taken to be `(a1, h1)` and `s1`.
pub const SNAP_TOLERANCE: f64 = 1e-8;

/// Replaces `(a, h)` by the exact triple point, and `s` by `s1`, when they
/// agree to [`SNAP_TOLERANCE`]. Rounded decimal input otherwise splits the
/// triple root into roots about `(dh)^(1/3)` apart.
pub fn snap_to_triple(params: PartialScaled) -> PartialScaled {
    let (Some(m), Some(lambda), Some(a), Some(h)) = (params.m, params.lambda, params.a, params.h)
    else {
        return params;
    };
    let Ok(d) = degenerate_point(m, lambda) else {
        return params;
    };
    let close = |v: f64, target: f64| (v - target).abs() <= SNAP_TOLERANCE * target.abs();
    if !close(a, d.a1) || !close(h, d.h1) {
        return params;
    }
    let mut snapped = PartialScaled {
        a: Some(d.a1),
        h: Some(d.h1),
        ..params
    };
    if params.s.is_some_and(|s| close(s, d.s1())) {
        snapped.s = Some(d.s1());
    }
    if snapped != params {
        eprintln!("note: parameters snapped to the triple point of (m, lambda) = ({m}, {lambda})");
    }
    snapped
}

#[derive(Clone, Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long)]
    pub min_step: Option<f64>,
    #[arg(long)]
    pub x_floor: Option<f64>,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            max_step: self.max_step.unwrap_or(d.max_step),
            min_step: self.min_step.unwrap_or(d.min_step),
            t_end: self.t_end.unwrap_or(d.t_end),
            x_floor: self.x_floor.unwrap_or(d.x_floor),
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 0.01)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub y_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub y_max: f64,
}

#[derive(Clone, Debug, Args)]
pub struct PlaneArgs {
    #[arg(long, default_value_t = 1.5)]
    pub a_min: f64,
    #[arg(long, default_value_t = 1.9)]
    pub a_max: f64,
    #[arg(long, default_value_t = 0.002)]
    pub h_min: f64,
    #[arg(long, default_value_t = 0.006)]
    pub h_max: f64,
}

#[derive(Clone, Debug, Args)]
pub struct OutArgs {
    /// Output file; defaults to a fixed name inside `$LGCUSP_OUT_DIR`, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Single output: a file when one resolves, stdout otherwise.
fn emit(out: &OutArgs, default_name: &str, contents: String) -> Result<()> {
    match resolve_output(out.out.as_deref(), default_name) {
        Some(path) => {
            let mut outputs = Outputs::new();
            outputs.add(path, contents);
            outputs.commit()?;
        }
        None => std::io::stdout().write_all(contents.as_bytes())?,
    }
    Ok(())
}

fn out_dir(explicit: Option<&Path>, sub: Option<&str>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| {
                let d = PathBuf::from(d);
                match sub {
                    Some(s) => d.join(s),
                    None => d,
                }
            })
    })
}

fn triple_point(params: &PartialScaled) -> Result<DegeneratePoint> {
    degenerate_point(params.m()?, params.lambda()?)
}

/// Equilibria do not depend on `s`; a placeholder stands in when it is absent.
fn params_without_s(params: &PartialScaled) -> Result<ScaledParams> {
    PartialScaled {
        s: Some(params.s.unwrap_or(1.0)),
        ..*params
    }
    .complete()
}

fn multiple_equilibrium(p: &ScaledParams) -> Result<Equilibrium> {
    interior_equilibria(p)?
        .into_iter()
        .find(|eq| eq.multiplicity > 1)
        .ok_or_else(|| {
            Error::WrongBranch("no multiple interior equilibrium at these parameters".into())
        })
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Equilibria { params, out } => {
            let params = params.resolve()?;
            let p = params_without_s(&params)?;
            let rows: Vec<_> = match params.s {
                Some(_) => classify_all(&p)?
                    .into_iter()
                    .map(|c| (c.equilibrium, Some(c)))
                    .collect(),
                None => interior_equilibria(&p)?
                    .into_iter()
                    .map(|eq| (eq, None))
                    .collect(),
            };
            emit(&out, "equilibria.csv", equilibria_csv(&rows)?)?;
        }
        Command::Classify { params, probe, out } => {
            let p = params.resolve()?.complete()?;
            let classified = classify_all(&p)?;
            let csv = if probe {
                let probe_cfg = ProbeConfig::default();
                let solver = probe_solver_config();
                let rows = classified
                    .into_iter()
                    .map(|c| {
                        let report = stability_probe(&p, &c.equilibrium, &probe_cfg, &solver)?;
                        Ok((c, report.verdict))
                    })
                    .collect::<Result<Vec<_>>>()?;
                verdicts_csv(&rows)?
            } else {
                classified_csv(&classified)?
            };
            emit(&out, "classified.csv", csv)?;
        }
        Command::Degenerate { params, out } => {
            let params = params.resolve()?;
            let d = triple_point(&params)?;
            let (in_region, lambda_bound) = lemma21_region(d.m, d.lambda);
            #[derive(serde::Serialize)]
            struct Doc {
                #[serde(flatten)]
                point: DegeneratePoint,
                s1: f64,
                lemma_region: bool,
                lemma_lambda_bound: f64,
            }
            let doc = Doc {
                point: d,
                s1: d.s1(),
                lemma_region: in_region,
                lemma_lambda_bound: lambda_bound,
            };
            emit(&out, "degenerate.toml", to_toml(&doc)?)?;
        }
        Command::NormalForm { params, out } => {
            let params = params.resolve()?;
            let (p, eq) = match (params.a, params.h) {
                (None, None) => {
                    let d = triple_point(&params)?;
                    (
                        d.params(params.s.unwrap_or_else(|| d.s1()))?,
                        d.equilibrium(),
                    )
                }
                _ => {
                    let p = params.complete()?;
                    (p, multiple_equilibrium(&p)?.state)
                }
            };
            let report = normal_form_at(&p, &eq)?;
            emit(&out, "normal_form.toml", to_toml(&report)?)?;
        }
        Command::Simulate {
            params,
            x0,
            y0,
            solver,
            out,
        } => {
            let p = params.resolve()?.complete()?;
            let traj = integrate(&p, State::new(x0, y0), &solver.config())?;
            emit(&out, "trajectory.csv", trajectory_csv(&traj)?)?;
        }
        Command::Portrait {
            params,
            window,
            nx,
            ny,
            nullcline_samples,
            solver,
            out_dir: dir,
        } => {
            let p = params.resolve()?.complete()?;
            let window = Window {
                x_min: window.x_min,
                x_max: window.x_max,
                y_min: window.y_min,
                y_max: window.y_max,
            };
            let grid = PortraitGrid {
                nx,
                ny,
                nullcline_samples,
            };
            let dir = out_dir(dir.as_deref(), Some("portrait")).ok_or_else(|| {
                Error::InvalidParams(format!("portrait needs --out-dir or {OUT_DIR_ENV}"))
            })?;
            let portrait = phase_portrait(&p, &window, &grid, &solver.config())?;
            let mut outputs = Outputs::new();
            for (name, contents) in portrait_files(&portrait)? {
                outputs.add(dir.join(name), contents);
            }
            outputs.commit()?;
        }
        Command::Sweep {
            params,
            range,
            na,
            nh,
            svg,
            out,
        } => {
            let params = params.resolve()?;
            let base = params_without_s(&PartialScaled {
                a: Some(params.a.unwrap_or(range.a_min)),
                h: Some(params.h.unwrap_or(range.h_min)),
                ..params
            })?;
            let a_range = Range::new(range.a_min, range.a_max);
            let cells = sweep(
                &base,
                a_range,
                Range::new(range.h_min, range.h_max),
                (na, nh),
            )?;
            let csv = sweep_csv(&cells)?;
            match svg {
                Some(svg_path) => {
                    let folds = fold_curves(base.m, base.lambda, a_range, na).ok();
                    let mut outputs = Outputs::new();
                    match resolve_output(out.out.as_deref(), "sweep.csv") {
                        Some(path) => outputs.add(path, csv),
                        None => std::io::stdout().write_all(csv.as_bytes())?,
                    }
                    outputs.add(svg_path, sweep_svg(&cells, folds.as_ref()));
                    outputs.commit()?;
                }
                None => emit(&out, "sweep.csv", csv)?,
            }
        }
        Command::Folds {
            params,
            a_min,
            a_max,
            n,
            out,
        } => {
            let params = params.resolve()?;
            let curves = fold_curves(params.m()?, params.lambda()?, Range::new(a_min, a_max), n)?;
            emit(&out, "folds.csv", folds_csv(&curves)?)?;
        }
        Command::Verify { seed, out_dir: dir } => {
            let suite = verify::run(seed);
            if let Some(dir) = out_dir(dir.as_deref(), None) {
                let mut outputs = Outputs::new();
                for (name, contents) in &suite.artifacts {
                    outputs.add(dir.join(name), contents.clone());
                }
                outputs.commit()?;
            }
            print!("{}", suite.table());
            return Ok(if suite.all_passed() { 0 } else { 1 });
        }
    }
    Ok(0)
}
