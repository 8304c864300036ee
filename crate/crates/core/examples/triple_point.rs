//! Locates the triple equilibrium for a few threshold / attack-rate pairs.

use lgcusp::classification::lemma21_region;
use lgcusp::equilibria::degenerate_point;

fn main() -> lgcusp::Result<()> {
    for (m, lambda) in [(0.1, 0.2), (0.05, 0.1), (0.3, 0.05)] {
        let d = degenerate_point(m, lambda)?;
        let (strong, _) = lemma21_region(m, lambda);
        println!(
            "m {m} lambda {lambda}: a1 {:.6} h1 {:.6e} x1 {:.6} s1 {:.6e} (lambda max {:.4}, a1 > 3/2 region: {strong})",
            d.a1,
            d.h1,
            d.x1,
            d.s1(),
            d.lambda_max
        );
    }
    match degenerate_point(0.1, 0.6) {
        Ok(_) => println!("unexpected triple point"),
        Err(e) => println!("m 0.1 lambda 0.6: {e}"),
    }
    Ok(())
}
