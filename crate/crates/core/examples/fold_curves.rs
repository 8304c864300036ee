use lgcusp::bifurcation::{fold_curves, Range};
use lgcusp::io::folds_csv;

fn main() -> lgcusp::Result<()> {
    let curves = fold_curves(0.1, 0.2, Range::new(1.5, 1.9), 21)?;
    print!("{}", folds_csv(&curves)?);
    let (u, l) = (curves.upper.last().unwrap(), curves.lower.last().unwrap());
    println!(
        "# branches end at ({:.6}, {:.6e}) and ({:.6}, {:.6e}); cusp (1.7, {:.6e})",
        u.a,
        u.h,
        l.a,
        l.h,
        1.0 / 270.0
    );
    Ok(())
}
