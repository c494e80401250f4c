use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::model::{
    a_power_envelope, a_power_moment, power_envelope_truncation, rescale_factor, ModelParams, PmfIter,
    VolatilityMixture,
};
use crate::special::{beta_inc, ln_beta, ln_gamma, normal_cdf, scaled_student_cdf, LN_SQRT_PI};
use crate::{Error, Result, DEFAULT_EPS};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Marginal law of one observed return: a geometric mixture over the
/// restart index of rescaled endogenous marginals.
#[derive(Debug, Clone)]
pub struct MarginalDensity {
    mixture: VolatilityMixture,
    // (pi_i, a_i)
    terms: Vec<(f64, f64)>,
    bound: f64,
}

impl MarginalDensity {
    pub fn new(params: &ModelParams, eps: f64) -> Result<Self> {
        params.validate()?;
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive"));
        }
        // Each component density is at most peak / a_i.
        let peak = endo_pdf(&params.mixture, 0.0);
        let (scale, exponent) = a_power_envelope(-1.0, params.d);
        let (k, bound) = power_envelope_truncation(params.nu, eps, peak * scale, exponent)?;
        let terms = PmfIter::new(params.nu).take(k).map(|(i, w)| (w, rescale_factor(i, params.d))).collect();
        Ok(MarginalDensity { mixture: params.mixture, terms, bound })
    }

    /// Certified bound on the neglected tail of the mixture.
    pub fn truncation_bound(&self) -> f64 {
        self.bound
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(w, a)| w * endo_pdf(&self.mixture, x / a) / a).sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let mass: f64 = self.terms.iter().map(|&(w, _)| w).sum();
        let below: f64 = self.terms.iter().map(|&(w, a)| w * endo_cdf(&self.mixture, x / a)).sum();
        // Neglected components are symmetric, so they add half their mass on average.
        below + 0.5 * (1.0 - mass)
    }

    /// Standard deviation of the marginal when it exists.
    pub fn std_dev(&self, params: &ModelParams) -> Result<f64> {
        let a2 = a_power_moment(2.0, params.nu, params.d, DEFAULT_EPS)?.value;
        Ok((a2 * crate::model::endo_abs_moment(2.0, &params.mixture)?).sqrt())
    }
}

fn endo_pdf(mixture: &VolatilityMixture, y: f64) -> f64 {
    match *mixture {
        VolatilityMixture::InverseGamma { alpha, beta } => {
            let z = y / beta;
            (ln_gamma(0.5 * (alpha + 1.0))
                - ln_gamma(0.5 * alpha)
                - LN_SQRT_PI
                - beta.ln()
                - 0.5 * (alpha + 1.0) * (z * z).ln_1p())
            .exp()
        }
        VolatilityMixture::Point { sigma0 } => {
            let z = y / sigma0;
            (-0.5 * z * z - LN_SQRT_2PI - sigma0.ln()).exp()
        }
    }
}

fn endo_cdf(mixture: &VolatilityMixture, y: f64) -> f64 {
    match *mixture {
        VolatilityMixture::InverseGamma { alpha, beta } => scaled_student_cdf(y / beta, alpha),
        VolatilityMixture::Point { sigma0 } => normal_cdf(y / sigma0),
    }
}

/// Density of a single observed return.
pub fn marginal_pdf(x: f64, params: &ModelParams, eps: f64) -> Result<f64> {
    Ok(MarginalDensity::new(params, eps)?.pdf(x))
}

/// Constant `c` in `f(x) ~ c |x|^{-(alpha+1)}` for large `|x|`.
pub fn tail_constant(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    match params.mixture {
        VolatilityMixture::InverseGamma { alpha, beta } => {
            let series = a_power_moment(alpha, params.nu, params.d, DEFAULT_EPS)?.value;
            let ln_front = alpha * beta.ln() + ln_gamma(0.5 * (alpha + 1.0)) - LN_SQRT_PI - ln_gamma(0.5 * alpha);
            Ok(ln_front.exp() * series)
        }
        VolatilityMixture::Point { .. } => Err(Error::UnsupportedMixture),
    }
}

/// Density `k_t(s)` of the long-memory volatility `S_t = sqrt(mean of t
/// consecutive Y^2)` inside one exchangeable window.
pub fn longmem_vol_pdf(s: f64, t: usize, alpha: f64, beta: f64) -> f64 {
    if s < 0.0 || t == 0 {
        return 0.0;
    }
    let tf = t as f64;
    if s == 0.0 && t > 1 {
        return 0.0;
    }
    let ln_s_term = if t == 1 { 0.0 } else { (tf - 1.0) * s.ln() };
    let ln_k = core::f64::consts::LN_2 + alpha * beta.ln() + ln_s_term + 0.5 * tf * tf.ln()
        - ln_beta(0.5 * alpha, 0.5 * tf)
        - 0.5 * (alpha + tf) * (beta * beta + s * s * tf).ln();
    ln_k.exp()
}

/// Distribution function of `k_t`: `t S^2 / beta^2` is `alpha F(t, alpha) / alpha`-type,
/// so the CDF is a regularized incomplete beta.
pub fn longmem_vol_cdf(s: f64, t: usize, alpha: f64, beta: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let x = t as f64 * s * s;
    beta_inc(0.5 * t as f64, 0.5 * alpha, x / (x + beta * beta))
}
