//! Converts dimensional rates to the scaled model and checks the two fields agree.

use lgcusp::model::{nondimensionalize, raw_vector_field, vector_field, RawParams, State};

fn main() -> lgcusp::Result<()> {
    let raw = RawParams {
        r: 2.0,
        k: 50.0,
        c: 0.5,
        m_raw: 5.0,
        lambda_raw: 0.8,
        a_raw: 0.002,
        h_raw: 40.0,
        s_raw: 3.0,
    };
    let p = nondimensionalize(&raw)?;
    println!(
        "scaled: m {} lambda {} a {} h {} s {}",
        p.m, p.lambda, p.a, p.h, p.s
    );

    let st = State::new(20.0, 6.0);
    let scaled = raw.scale_state(st);
    let [dx, dy] = raw_vector_field(&st, &raw)?;
    let [sx, sy] = vector_field(&scaled, &p)?;
    let ts = raw.time_scale();
    println!("raw field at {st:?}: ({dx:.6}, {dy:.6})");
    println!(
        "rescaled: ({:.6}, {:.6}) vs scaled field ({sx:.6}, {sy:.6})",
        dx / raw.k / ts,
        dy / (raw.c * raw.k) / ts
    );
    Ok(())
}
