use lgcusp::equilibria::{degenerate_point, Equilibrium};
use lgcusp::simulation::{probe_solver_config, stability_probe, ProbeConfig};

fn main() -> lgcusp::Result<()> {
    let d = degenerate_point(0.1, 0.2)?;
    let eq = Equilibrium {
        state: d.equilibrium(),
        multiplicity: 3,
    };
    for s in [0.1, 0.03] {
        let p = d.params(s)?;
        let report = stability_probe(&p, &eq, &ProbeConfig::default(), &probe_solver_config())?;
        println!("s = {s}: {}", report.verdict.as_str());
        for seed in &report.seeds {
            println!(
                "  angle {:.3}: final {:.3e}, escape {:?}, checkpoints {:?}",
                seed.angle, seed.final_distance, seed.escape_time, seed.checkpoint_distances
            );
        }
    }
    Ok(())
}
