use lgcusp::classification::classify_all;
use lgcusp::io::classified_csv;
use lgcusp::model::ScaledParams;

fn main() -> lgcusp::Result<()> {
    let cases = [
        (
            "three hyperbolic",
            ScaledParams::new(0.1, 0.2, 1.6, 0.00355, 0.1)?,
        ),
        ("one focus", ScaledParams::new(0.1, 0.2, 1.5, 0.002, 0.1)?),
        (
            "triple, s > s1",
            ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 0.1)?,
        ),
        (
            "triple, s < s1",
            ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 0.03)?,
        ),
        (
            "triple, s = s1",
            ScaledParams::new(0.1, 0.2, 1.7, 1.0 / 270.0, 26.0 / 405.0)?,
        ),
    ];
    for (label, p) in cases {
        println!("# {label}");
        print!("{}", classified_csv(&classify_all(&p)?)?);
    }
    Ok(())
}
