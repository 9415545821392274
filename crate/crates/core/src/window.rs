//! Kaiser window evaluation shared by the FIR designs in this crate
//! (the Hilbert transformer and the fractional-delay interpolator).

/// Modified Bessel function of the first kind, order zero, by power
/// series. The series converges factorially; for the window shape
/// parameters used here (β ≤ 14) a few dozen terms reach full double
/// precision.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term <= sum * 1e-18 {
            return sum;
        }
        k += 1.0;
    }
}

/// Kaiser window of shape `beta` at normalized offset `frac` from the
/// window center, where `frac = ±1` marks the window edges. Zero outside
/// the support.
pub(crate) fn kaiser(frac: f64, beta: f64) -> f64 {
    let t = 1.0 - frac * frac;
    if t <= 0.0 {
        return 0.0;
    }
    bessel_i0(beta * t.sqrt()) / bessel_i0(beta)
}
