//! Normal-form coefficients at the triple point on both sides of s1 and at s1.

use lgcusp::equilibria::degenerate_point;
use lgcusp::normal_form::normal_form_at;

fn main() -> lgcusp::Result<()> {
    let d = degenerate_point(0.1, 0.2)?;
    let s1 = d.s1();
    for s in [0.5 * s1, 2.0 * s1] {
        let nf = normal_form_at(&d.params(s)?, &d.equilibrium())?;
        let closed = s * (d.a1 + 1.0) / (s1 - s).powi(2);
        println!(
            "s = {s:.5}: e30 {:.6e} (closed form {closed:.6e}), e11 f30 {:.4e}",
            nf.e30.unwrap(),
            nf.e11f30.unwrap()
        );
    }
    let nf = normal_form_at(&d.params(s1)?, &d.equilibrium())?;
    println!(
        "s = s1: j30 {:.6e} (closed form {:.6e}), j11 {:.6e}, j21 + 3 i30 {:.6e}, nondegenerate {}",
        nf.j30.unwrap(),
        -s1.powi(3) * (d.a1 + 1.0),
        nf.j11.unwrap(),
        nf.j21_plus_3i30.unwrap(),
        nf.nondegenerate()
    );
    Ok(())
}
