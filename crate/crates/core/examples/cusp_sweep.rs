//! Counts equilibria over the (a, h) plane around the cusp and prints a coarse map.

use lgcusp::bifurcation::{sweep, unfolding_coords, Range};
use lgcusp::model::ScaledParams;

fn main() -> lgcusp::Result<()> {
    let base = ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 0.1)?;
    let eta = unfolding_coords(&base)?;
    println!(
        "unfolding coordinates at the cusp: ({}, {})",
        eta.eta1, eta.eta2
    );
    let (na, nh) = (61, 25);
    let cells = sweep(
        &base,
        Range::new(1.5, 1.9),
        Range::new(0.0030, 0.0040),
        (na, nh),
    )?;
    // rows from high h to low h, columns increasing a
    for j in (0..nh).rev() {
        let row: String = (0..na)
            .map(|i| char::from(b'0' + cells[i * nh + j].n_positive_roots as u8))
            .collect();
        println!("h {:.5} {row}", cells[j].h);
    }
    Ok(())
}
