#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::MomentCurve;
use crate::special::integrate_half_line;
use crate::{Error, Result};

/// Generalized Hurst exponent with its relative fit dispersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub q: f64,
    pub h: f64,
    pub eps: f64,
}

/// Exponent of `m_q(t) ~ t^{q H_q}` from the mean of `ln m_q(t) / ln t` over
/// `t = 2..=window_max`.
pub fn hurst_fit(curve: &MomentCurve, window_max: usize) -> Result<ScalingFit> {
    if window_max < 2 {
        return Err(Error::InvalidParameter("window must contain t = 2"));
    }
    if curve.q <= 0.0 {
        return Err(Error::InvalidParameter("scaling fit needs q > 0"));
    }
    let mut slopes = alloc::vec::Vec::with_capacity(window_max - 1);
    for t in 2..=window_max {
        let m = curve.at(t).ok_or(Error::InvalidParameter("curve does not cover the window"))?;
        if !(m > 0.0) {
            return Err(Error::InvalidParameter("curve values must be positive"));
        }
        slopes.push(m.ln() / (t as f64).ln());
    }
    let n = slopes.len() as f64;
    let qh = slopes.iter().sum::<f64>() / n;
    let spread = (slopes.iter().map(|s| (s - qh) * (s - qh)).sum::<f64>() / n).sqrt();
    let eps = if qh != 0.0 { spread / qh.abs() } else { 0.0 };
    Ok(ScalingFit { q: curve.q, h: qh / curve.q, eps })
}

/// Limit of `m_q(t)` as the restart probability vanishes (`D < 1/2`).
pub fn small_nu_moment_limit(q: f64, t: usize, d: f64) -> Result<f64> {
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::InvalidParameter("the small-nu limit needs 0 < D < 1/2"));
    }
    if t == 0 || !(q >= 0.0) {
        return Err(Error::InvalidParameter("need t >= 1 and q >= 0"));
    }
    let tf = t as f64;
    if (0.5 - d) * q <= 1.0 {
        return Ok(tf.powf(0.5 * q));
    }
    let two_d = 2.0 * d;
    let half_q = 0.5 * q;
    // ((x + s)^{2D} - x^{2D})^{q/2}, summable because (1/2 - D) q > 1.
    let term = |x: f64, s: f64| (x.powf(two_d) * (two_d * (s / x).ln_1p()).exp_m1()).powf(half_q);
    let series = |s: f64| {
        const DIRECT: usize = 20_000;
        let mut sum = 0.0;
        for i in (1..=DIRECT).rev() {
            sum += term(i as f64, s);
        }
        let start = DIRECT as f64 + 0.5;
        sum + integrate_half_line(|y| term(start + y, s), 1e-13) - correction(start, s, &term)
    };
    let powers: f64 = (1..=t).map(|tau| (tau as f64).powf(d * q)).sum();
    Ok((series(tf) + powers) / (series(1.0) + 1.0))
}

// Midpoint correction: sum_{i > N} f(i) = int_{N+1/2} f - f'(N+1/2)/24 + ...
fn correction<F: Fn(f64, f64) -> f64>(start: f64, s: f64, f: &F) -> f64 {
    let h = 1e-2 * start;
    -(f(start + h, s) - f(start - h, s)) / (2.0 * h) / 24.0
}
