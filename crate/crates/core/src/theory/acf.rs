use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{AcfCurve, Provenance};
use crate::model::{
    a_power_envelope, endo_abs_moment, endo_cross_moment, power_envelope_truncation, rescale_factor_sq,
    validate_modulation, ModelParams, PmfIter, Theta, VolatilityMixture,
};
use crate::special::bisect;
use crate::{Error, Result};

/// `r^a_q(t)`: autocorrelation of `a^q_{I_t}` at separation `t - 1`.
pub fn acf_modulating(q: f64, t: usize, theta: &Theta, eps: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1"));
    }
    Ok(acf_modulating_curve(q, t, theta.d, theta.nu, eps)?[t - 1])
}

/// `r^a_q(t)` for `t = 1..=t_max`.
pub fn acf_modulating_curve(q: f64, t_max: usize, d: f64, nu: f64, eps: f64) -> Result<Vec<f64>> {
    validate_modulation(d, nu)?;
    if t_max == 0 || !(eps > 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter("need t_max >= 1, eps > 0 and finite q"));
    }
    if t_max == 1 {
        return Ok(vec![1.0]);
    }
    if nu >= 1.0 || d == 0.5 || q == 0.0 {
        return Err(Error::DegenerateModulation);
    }
    let half_q = 0.5 * q;
    let (scale, exponent) = a_power_envelope(q, d);
    // Products a_i^q a_{i+t-1}^q are bounded by scale^2 (t i)^{2 exponent}.
    let env_scale = scale * scale * (t_max as f64).powf(2.0 * exponent);
    let env_exp = 2.0 * exponent;

    let pass = |i_max: usize| -> (f64, f64, Vec<f64>) {
        let mean: f64 = PmfIter::new(nu).take(i_max).map(|(i, w)| w * rescale_factor_sq(i, d).powf(half_q)).sum();
        let mut var = 0.0;
        let mut cov = vec![0.0; t_max];
        let mut win: Vec<f64> = (1..=t_max as u64).map(|j| rescale_factor_sq(j, d).powf(half_q)).collect();
        let mut pos = 0;
        for (i, w) in PmfIter::new(nu).take(i_max) {
            let head = win[pos] - mean;
            var += w * head * head;
            for lag in 0..t_max {
                cov[lag] += w * head * win[(pos + lag) % t_max];
            }
            win[pos] = rescale_factor_sq(i + t_max as u64, d).powf(half_q);
            pos = (pos + 1) % t_max;
        }
        (mean, var, cov)
    };

    let (i0, _) = power_envelope_truncation(nu, eps, env_scale, env_exp)?;
    let (_, var0, _) = pass(i0);
    if !(var0 > 0.0) {
        return Err(Error::DegenerateModulation);
    }
    let (i_max, _) = power_envelope_truncation(nu, 0.25 * eps * var0.min(1.0), env_scale, env_exp)?;
    let (_, var, cov) = if i_max > i0 { pass(i_max) } else { pass(i0) };
    let log_q = (-nu).ln_1p();
    let mut out = Vec::with_capacity(t_max);
    out.push(1.0);
    for lag in 1..t_max {
        out.push((lag as f64 * log_q).exp() * cov[lag] / var);
    }
    Ok(out)
}

/// Coefficients of `r^X_q(t) = u_q + v_q r^a_q(t)`, valid for `2 <= t <= M + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnsAcfCoefficients {
    pub u: f64,
    pub v: f64,
}

impl ReturnsAcfCoefficients {
    pub fn new(q: f64, params: &ModelParams, eps: f64) -> Result<Self> {
        params.validate()?;
        let a1 = crate::model::a_power_moment(q, params.nu, params.d, eps)?.value;
        let a2 = crate::model::a_power_moment(2.0 * q, params.nu, params.d, eps)?.value;
        Self::from_moments(q, a1, a2, &params.mixture)
    }

    /// Builds the coefficients from `E[a^q]` and `E[a^{2q}]`.
    pub fn from_moments(q: f64, a1: f64, a2: f64, mixture: &VolatilityMixture) -> Result<Self> {
        let e1 = endo_abs_moment(q, mixture)?;
        let e2 = endo_abs_moment(2.0 * q, mixture)?;
        let cross = match mixture {
            VolatilityMixture::Point { .. } => e1 * e1,
            _ => endo_cross_moment(q, mixture)?,
        };
        let var_a = (a2 - a1 * a1).max(0.0);
        let den = var_a * e2 + a1 * a1 * (e2 - e1 * e1);
        Ok(ReturnsAcfCoefficients { u: a1 * a1 * (cross - e1 * e1) / den, v: var_a * cross / den })
    }
}

/// `r^X_q(t)` of `|X|^q` inside the exchangeable window `1 <= t <= M + 1`.
pub fn acf_returns(q: f64, t: usize, params: &ModelParams, eps: f64) -> Result<f64> {
    if t == 0 || t > params.window_limit() {
        return Err(Error::Precondition("acf_returns needs 1 <= t <= M + 1"));
    }
    Ok(acf_returns_curve(q, params, eps)?.values[t - 1])
}

/// `r^X_q(t)` for `t = 1..=M + 1`. When the modulation is degenerate
/// (`D = 1/2` or `nu = 1`) the curve is flat at `u_q` beyond `t = 1`.
pub fn acf_returns_curve(q: f64, params: &ModelParams, eps: f64) -> Result<AcfCurve> {
    params.validate()?;
    let t_max = params.window_limit();
    let coef = ReturnsAcfCoefficients::new(q, params, eps)?;
    let ra = match acf_modulating_curve(q, t_max, params.d, params.nu, eps) {
        Ok(c) => c,
        Err(Error::DegenerateModulation) => {
            let mut c = vec![0.0; t_max];
            c[0] = 1.0;
            c
        }
        Err(e) => return Err(e),
    };
    let values = ra.iter().enumerate().map(|(k, r)| if k == 0 { 1.0 } else { coef.u + coef.v * r }).collect();
    Ok(AcfCurve { q, ts: (1..=t_max).collect(), values, provenance: Provenance::Theoretical })
}

/// Autocorrelation of `Y^2` for the inverse-gamma endogenous process.
pub fn endo_acf2_curve(alpha: f64, memory: usize, t_max: usize) -> Result<AcfCurve> {
    if !(alpha > 4.0) {
        return Err(Error::MomentDiverges { order: 4.0, tail_index: alpha });
    }
    if memory == 0 || t_max == 0 {
        return Err(Error::InvalidParameter("memory and t_max must be at least 1"));
    }
    let plateau = 1.0 / (alpha - 1.0);
    let k = 1.0 / (alpha + memory as f64 - 2.0);
    let mut values = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let v = if t == 1 {
            1.0
        } else if t <= memory + 1 {
            plateau
        } else {
            k * values[t - 1 - memory..t - 1].iter().sum::<f64>()
        };
        values.push(v);
    }
    Ok(AcfCurve { q: 2.0, ts: (1..=t_max).collect(), values, provenance: Provenance::Theoretical })
}

/// Unique `lambda` in `(0, 1)` with `sum_{n=1}^{M} lambda^{-n} = alpha + M - 2`.
pub fn acf_decay_rate(alpha: f64, memory: usize) -> Result<f64> {
    if !(alpha > 2.0) || memory == 0 {
        return Err(Error::InvalidParameter("need alpha > 2 and M >= 1"));
    }
    let target = alpha + memory as f64 - 2.0;
    let f = |lam: f64| {
        let inv = 1.0 / lam;
        let mut s = 0.0;
        let mut pw = 1.0;
        for _ in 0..memory {
            pw *= inv;
            s += pw;
        }
        s / target - 1.0
    };
    Ok(bisect(f, 1e-6, 1.0 - 1e-12, 1e-15, 200))
}
