//! Writes a phase portrait near the triple point into a directory of CSV files.

use std::path::PathBuf;

use lgcusp::io::{portrait_files, Outputs};
use lgcusp::model::ScaledParams;
use lgcusp::simulation::{phase_portrait, PortraitGrid, SolverConfig, Window};

fn main() -> lgcusp::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lgcusp_portrait"));
    let p = ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 0.1)?;
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
        &SolverConfig::default().with_t_end(300.0),
    )?;
    for t in &portrait.trajectories {
        let (a, b) = (t.samples[0], t.last());
        println!(
            "({:.3}, {:.3}) -> ({:.4}, {:.4}) {}",
            a.x,
            a.y,
            b.x,
            b.y,
            t.terminated.as_str()
        );
    }
    let mut outputs = Outputs::new();
    for (name, text) in portrait_files(&portrait)? {
        outputs.add(out.join(name), text);
    }
    let written = outputs.commit()?;
    println!("{} files in {}", written.len(), out.display());
    Ok(())
}
