//! Parameter documents and output formats.
//!
//! Floats are written as the shortest decimal that round-trips, so repeated
//! runs with the same inputs produce byte-identical files. Outputs are staged
//! in memory and committed through temporary files and renames; a failed
//! commit removes whatever it had already written.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bifurcation::{FoldBranch, FoldCurves, SweepCell};
use crate::classification::ClassifiedEquilibrium;
use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::model::{nondimensionalize, RawParams, ScaledParams, State};
use crate::simulation::{Portrait, Trajectory, Verdict};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LGCUSP_OUT_DIR";

/// Shortest round-trip decimal: plain notation for moderate magnitudes,
/// exponent notation otherwise.
pub fn fmt_f64(v: f64) -> String {
    let mag = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&mag) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Scaled parameters with every key optional, as read from a document or flags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialScaled {
    pub m: Option<f64>,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub h: Option<f64>,
    pub s: Option<f64>,
}

impl PartialScaled {
    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: PartialScaled) -> PartialScaled {
        PartialScaled {
            m: other.m.or(self.m),
            lambda: other.lambda.or(self.lambda),
            a: other.a.or(self.a),
            h: other.h.or(self.h),
            s: other.s.or(self.s),
        }
    }

    pub fn from_scaled(p: &ScaledParams) -> Self {
        Self {
            m: Some(p.m),
            lambda: Some(p.lambda),
            a: Some(p.a),
            h: Some(p.h),
            s: Some(p.s),
        }
    }

    fn require(value: Option<f64>, name: &str) -> Result<f64> {
        value.ok_or_else(|| Error::InvalidParams(format!("missing parameter --{name}")))
    }

    pub fn m(&self) -> Result<f64> {
        Self::require(self.m, "m")
    }

    pub fn lambda(&self) -> Result<f64> {
        Self::require(self.lambda, "lambda")
    }

    pub fn complete(&self) -> Result<ScaledParams> {
        ScaledParams::new(
            self.m()?,
            self.lambda()?,
            Self::require(self.a, "a")?,
            Self::require(self.h, "h")?,
            Self::require(self.s, "s")?,
        )
    }
}

/// Contents of a parameter document: scaled keys or the eight raw keys, never both.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamsDocument {
    Scaled(PartialScaled),
    Raw(RawParams),
}

const RAW_KEYS: [&str; 8] = [
    "r",
    "K",
    "m_raw",
    "lambda_raw",
    "a_raw",
    "h_raw",
    "s_raw",
    "c",
];

impl ParamsDocument {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |message: String| Error::ParamsDocument {
            path: path.to_path_buf(),
            message,
        };
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| err(e.to_string()))?;
        let raw = table.keys().any(|k| RAW_KEYS.contains(&k.as_str()));
        if raw {
            let p: RawParams = table
                .try_into()
                .map_err(|e: toml::de::Error| err(e.to_string()))?;
            Ok(ParamsDocument::Raw(p))
        } else {
            let p: PartialScaled = table
                .try_into()
                .map_err(|e: toml::de::Error| err(e.to_string()))?;
            Ok(ParamsDocument::Scaled(p))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::ParamsDocument {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text, path)
    }

    /// Scaled view; raw documents are nondimensionalized.
    pub fn scaled(&self) -> Result<PartialScaled> {
        match self {
            ParamsDocument::Scaled(p) => Ok(*p),
            ParamsDocument::Raw(raw) => Ok(PartialScaled::from_scaled(&nondimensionalize(raw)?)),
        }
    }
}

pub fn params_to_toml(p: &ScaledParams) -> String {
    let mut out = String::new();
    for (k, v) in [
        ("m", p.m),
        ("lambda", p.lambda),
        ("a", p.a),
        ("h", p.h),
        ("s", p.s),
    ] {
        let _ = writeln!(out, "{k} = {}", toml_float(v));
    }
    out
}

fn toml_float(v: f64) -> String {
    let s = fmt_f64(v);
    if v.is_finite() && !s.contains(['.', 'e', 'E']) {
        format!("{s}.0")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        s
    }
}

/// Serializes any flat record as `key = value` lines, nested tables allowed.
pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn csv_from_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are ASCII"))
}

pub fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    csv_from_rows(
        &["t", "x", "y"],
        traj.samples
            .iter()
            .map(|s| vec![fmt_f64(s.t), fmt_f64(s.x), fmt_f64(s.y)]),
    )
}

/// Equilibria with their classification; unclassified rows leave the last four
/// columns empty.
pub fn equilibria_csv(rows: &[(Equilibrium, Option<ClassifiedEquilibrium>)]) -> Result<String> {
    csv_from_rows(
        &["x", "y", "multiplicity", "kind", "trace", "det", "s1"],
        rows.iter().map(|(eq, classified)| {
            let mut row = vec![
                fmt_f64(eq.state.x),
                fmt_f64(eq.state.y),
                eq.multiplicity.to_string(),
            ];
            match classified {
                Some(c) => {
                    let c = &c.classification;
                    row.extend([
                        c.kind.as_str().to_string(),
                        fmt_f64(c.trace),
                        fmt_f64(c.det),
                        fmt_f64(c.s1),
                    ]);
                }
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            row
        }),
    )
}

pub fn classified_csv(rows: &[ClassifiedEquilibrium]) -> Result<String> {
    let pairs: Vec<_> = rows
        .iter()
        .map(|c| (c.equilibrium, Some(c.clone())))
        .collect();
    equilibria_csv(&pairs)
}

/// Classified equilibria followed by a `verdict` column from the stability probe.
pub fn verdicts_csv(rows: &[(ClassifiedEquilibrium, Verdict)]) -> Result<String> {
    csv_from_rows(
        &[
            "x",
            "y",
            "multiplicity",
            "kind",
            "trace",
            "det",
            "s1",
            "verdict",
        ],
        rows.iter().map(|(c, verdict)| {
            let k = &c.classification;
            vec![
                fmt_f64(c.equilibrium.state.x),
                fmt_f64(c.equilibrium.state.y),
                c.equilibrium.multiplicity.to_string(),
                k.kind.as_str().to_string(),
                fmt_f64(k.trace),
                fmt_f64(k.det),
                fmt_f64(k.s1),
                verdict.as_str().to_string(),
            ]
        }),
    )
}

pub fn sweep_csv(cells: &[SweepCell]) -> Result<String> {
    csv_from_rows(
        &["a", "h", "n_roots", "eta1", "eta2", "kinds"],
        cells.iter().map(|c| {
            vec![
                fmt_f64(c.a),
                fmt_f64(c.h),
                c.n_positive_roots.to_string(),
                fmt_f64(c.eta.eta1),
                fmt_f64(c.eta.eta2),
                c.kinds
                    .iter()
                    .map(|k| k.as_str())
                    .collect::<Vec<_>>()
                    .join(";"),
            ]
        }),
    )
}

pub fn folds_csv(curves: &FoldCurves) -> Result<String> {
    let rows = [FoldBranch::Upper, FoldBranch::Lower]
        .into_iter()
        .flat_map(|b| {
            curves
                .branch(b)
                .iter()
                .map(move |p| vec![b.as_str().to_string(), fmt_f64(p.a), fmt_f64(p.h)])
        });
    csv_from_rows(&["branch", "a", "h"], rows)
}

fn points_csv(
    header: &[&str],
    points: impl IntoIterator<Item = (Option<usize>, State)>,
) -> Result<String> {
    csv_from_rows(
        header,
        points.into_iter().map(|(piece, st)| {
            let mut row: Vec<String> = piece.map(|i| i.to_string()).into_iter().collect();
            row.extend([fmt_f64(st.x), fmt_f64(st.y)]);
            row
        }),
    )
}

/// Files describing a phase portrait, relative to the portrait directory:
/// one `trajectory_NNN.csv` per seed, `seeds.csv`, `prey_nullcline.csv`
/// (`piece,x,y`), `predator_nullcline.csv`, `equilibria.csv` and
/// `intersections.csv`.
pub fn portrait_files(portrait: &Portrait) -> Result<Vec<(PathBuf, String)>> {
    let width = portrait
        .trajectories
        .len()
        .saturating_sub(1)
        .to_string()
        .len()
        .max(3);
    let mut files = Vec::new();
    for (i, traj) in portrait.trajectories.iter().enumerate() {
        files.push((
            PathBuf::from(format!("trajectory_{i:0width$}.csv")),
            trajectory_csv(traj)?,
        ));
    }
    files.push((
        PathBuf::from("seeds.csv"),
        points_csv(&["x", "y"], portrait.seeds.iter().map(|s| (None, *s)))?,
    ));
    files.push((
        PathBuf::from("prey_nullcline.csv"),
        points_csv(
            &["piece", "x", "y"],
            portrait
                .prey_nullcline
                .iter()
                .enumerate()
                .flat_map(|(i, piece)| piece.iter().map(move |st| (Some(i), *st))),
        )?,
    ));
    files.push((
        PathBuf::from("predator_nullcline.csv"),
        points_csv(
            &["x", "y"],
            portrait.predator_nullcline.iter().map(|s| (None, *s)),
        )?,
    ));
    let eqs: Vec<_> = portrait.equilibria.iter().map(|e| (*e, None)).collect();
    files.push((PathBuf::from("equilibria.csv"), equilibria_csv(&eqs)?));
    files.push((
        PathBuf::from("intersections.csv"),
        points_csv(
            &["x", "y"],
            portrait.intersections.iter().map(|s| (None, *s)),
        )?,
    ));
    Ok(files)
}

/// Decorative SVG of a sweep: cells shaded by root count, fold branches on top.
pub fn sweep_svg(cells: &[SweepCell], folds: Option<&FoldCurves>) -> String {
    const SIZE: f64 = 600.0;
    const MARGIN: f64 = 40.0;
    let (mut a_lo, mut a_hi, mut h_lo, mut h_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for c in cells {
        a_lo = a_lo.min(c.a);
        a_hi = a_hi.max(c.a);
        h_lo = h_lo.min(c.h);
        h_hi = h_hi.max(c.h);
    }
    let na = cells.iter().filter(|c| c.h == cells[0].h).count().max(2);
    let nh = cells.len().checked_div(na).unwrap_or(1).max(2);
    let (da, dh) = (
        (a_hi - a_lo).max(f64::MIN_POSITIVE),
        (h_hi - h_lo).max(f64::MIN_POSITIVE),
    );
    let px = |a: f64| MARGIN + (a - a_lo) / da * SIZE;
    let py = |h: f64| MARGIN + SIZE - (h - h_lo) / dh * SIZE;
    let (cw, ch) = (SIZE / (na - 1) as f64, SIZE / (nh - 1) as f64);
    let mut out = String::new();
    let total = SIZE + 2.0 * MARGIN;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect width="100%" height="100%" fill="#ffffff"/>"##
    );
    for c in cells {
        let fill = match c.n_positive_roots {
            3 if c.multiplicities.len() == 3 => "#9ecae1",
            1 => "#f0f0f0",
            _ => "#fdae6b",
        };
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            px(c.a) - cw / 2.0,
            py(c.h) - ch / 2.0,
            cw,
            ch
        );
    }
    if let Some(folds) = folds {
        for branch in [FoldBranch::Upper, FoldBranch::Lower] {
            let pts: Vec<String> = folds
                .branch(branch)
                .iter()
                .filter(|p| (a_lo..=a_hi).contains(&p.a) && (h_lo..=h_hi).contains(&p.h))
                .map(|p| format!("{:.3},{:.3}", px(p.a), py(p.h)))
                .collect();
            if pts.len() > 1 {
                let _ = writeln!(
                    out,
                    r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2"/>"##,
                    pts.join(" ")
                );
            }
        }
    }
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="14" text-anchor="middle">a</text>"##,
        MARGIN + SIZE / 2.0,
        total - 10.0
    );
    let _ = writeln!(
        out,
        r##"<text x="12" y="{}" font-size="14" text-anchor="middle">h</text>"##,
        MARGIN + SIZE / 2.0
    );
    out.push_str("</svg>\n");
    out
}

/// Files to be written together; nothing touches disk before [`Outputs::commit`].
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, contents: String) {
        self.files.push((path.into(), contents));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes every file through a sibling temporary and a rename. On failure
    /// the files already committed by this call are removed again.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (path, contents) in &self.files {
            if let Err(e) = write_atomic(path, contents) {
                for done in &written {
                    let _ = fs::remove_file(done);
                }
                return Err(e);
            }
            written.push(path.clone());
        }
        Ok(written)
    }
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().ok_or_else(|| {
        Error::Io(std::io::Error::other(format!(
            "not a file path: {}",
            path.display()
        )))
    })?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Output location: the explicit path if given, else `name` inside the
/// directory named by [`OUT_DIR_ENV`], else `None` (write to stdout).
pub fn resolve_output(explicit: Option<&Path>, name: &str) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(name))
    })
}
