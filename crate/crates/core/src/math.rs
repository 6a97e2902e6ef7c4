//! Bessel functions for the sideband model and Kaiser window design.
//!
//! Power-series evaluation is exact to machine precision for the small
//! arguments used here (modulation indices below one, Kaiser betas below
//! a few tens); no asymptotic branches are needed.

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    j_series(0, x)
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> f64 {
    j_series(1, x)
}

/// J_n(x) = sum_k (-1)^k / (k! (k+n)!) (x/2)^(2k+n)
fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // leading term (x/2)^n / n!
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= -(half * half) / (k * (k + n as f64));
        let prev = sum;
        sum += term;
        if sum == prev || k > 60.0 {
            return sum;
        }
        k += 1.0;
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let base = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= base / (k * k);
        let prev = sum;
        sum += term;
        if sum == prev || !sum.is_finite() {
            return sum;
        }
        k += 1.0;
    }
}
