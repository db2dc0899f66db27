use num_complex::Complex64;
use std::f64::consts::TAU;

/// `exp(2 pi i turns)`, with the argument reduced to `[-1/2, 1/2]` first so
/// integer turns land exactly on 1.
#[inline]
pub(crate) fn cis_turns(turns: f64) -> Complex64 {
    let reduced = turns - turns.round();
    let (s, c) = (TAU * reduced).sin_cos();
    Complex64::new(c, s)
}
