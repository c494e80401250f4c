//! Parameters, the modulating sequence, the restart chain and closed-form
//! scalar moments.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::special::{ln_gamma, LN_SQRT_PI};
use crate::{Error, Result};

/// Scale mixture of centered normals driving the endogenous process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolatilityMixture {
    /// `sigma^2` inverse-gamma: Student-type returns with tail index `alpha`.
    InverseGamma { alpha: f64, beta: f64 },
    /// Fixed volatility: the endogenous process is i.i.d. normal (null model).
    Point { sigma0: f64 },
}

impl VolatilityMixture {
    pub fn validate(&self) -> Result<()> {
        match *self {
            VolatilityMixture::InverseGamma { alpha, beta } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter("alpha must be positive and finite"));
                }
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidParameter("beta must be positive and finite"));
                }
            }
            VolatilityMixture::Point { sigma0 } => {
                if !(sigma0 > 0.0 && sigma0.is_finite()) {
                    return Err(Error::InvalidParameter("sigma0 must be positive and finite"));
                }
            }
        }
        Ok(())
    }

    /// The scale parameter (`beta` or `sigma0`).
    pub fn scale(&self) -> f64 {
        match *self {
            VolatilityMixture::InverseGamma { beta, .. } => beta,
            VolatilityMixture::Point { sigma0 } => sigma0,
        }
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        match *self {
            VolatilityMixture::InverseGamma { alpha, .. } => VolatilityMixture::InverseGamma { alpha, beta: scale },
            VolatilityMixture::Point { .. } => VolatilityMixture::Point { sigma0: scale },
        }
    }

    /// Tail index of the endogenous marginal; `None` for the point mixture.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            VolatilityMixture::InverseGamma { alpha, .. } => Some(alpha),
            VolatilityMixture::Point { .. } => None,
        }
    }

    /// `E[sigma^p]` under the mixing law.
    pub fn sigma_moment(&self, p: f64) -> Result<f64> {
        match *self {
            VolatilityMixture::InverseGamma { alpha, beta } => {
                if p >= alpha {
                    return Err(Error::MomentDiverges { order: p, tail_index: alpha });
                }
                Ok((p * beta.ln() - 0.5 * p * core::f64::consts::LN_2 + ln_gamma(0.5 * (alpha - p))
                    - ln_gamma(0.5 * alpha))
                .exp())
            }
            VolatilityMixture::Point { sigma0 } => Ok(sigma0.powf(p)),
        }
    }
}

/// Full parameter vector of a model instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Scaling exponent of the modulating sequence.
    pub d: f64,
    /// Restart probability per step.
    pub nu: f64,
    pub mixture: VolatilityMixture,
    /// Memory order of the endogenous process.
    pub memory: usize,
}

impl ModelParams {
    pub fn new(d: f64, nu: f64, mixture: VolatilityMixture, memory: usize) -> Result<Self> {
        let p = ModelParams { d, nu, mixture, memory };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        validate_modulation(self.d, self.nu)?;
        if self.memory == 0 {
            return Err(Error::InvalidParameter("memory order must be at least 1"));
        }
        self.mixture.validate()
    }

    /// Shape parameters without scale and memory. The point mixture has an
    /// infinite tail index.
    pub fn theta(&self) -> Theta {
        Theta { d: self.d, nu: self.nu, alpha: self.mixture.tail_index().unwrap_or(f64::INFINITY) }
    }

    /// Largest window length over which the endogenous block is exchangeable.
    pub fn window_limit(&self) -> usize {
        self.memory + 1
    }
}

/// Calibrated shape parameters `(D, nu, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    pub d: f64,
    pub nu: f64,
    pub alpha: f64,
}

impl Theta {
    pub fn new(d: f64, nu: f64, alpha: f64) -> Result<Self> {
        validate_modulation(d, nu)?;
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive"));
        }
        Ok(Theta { d, nu, alpha })
    }

    /// Shape of the null model, which has no finite tail index.
    pub fn null(d: f64, nu: f64) -> Result<Self> {
        Theta::new(d, nu, f64::INFINITY)
    }
}

pub(crate) fn validate_modulation(d: f64, nu: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter("D must be positive and finite"));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::InvalidParameter("nu must lie in (0, 1]"));
    }
    Ok(())
}

/// Squared modulating factor `a_i^2 = i^{2D} - (i-1)^{2D}`, free of
/// cancellation for large `i`.
pub fn rescale_factor_sq(i: u64, d: f64) -> f64 {
    if i <= 1 || d == 0.5 {
        return 1.0;
    }
    let x = i as f64;
    let two_d = 2.0 * d;
    -x.powf(two_d) * (two_d * (-1.0 / x).ln_1p()).exp_m1()
}

/// Modulating factor `a_i`.
pub fn rescale_factor(i: u64, d: f64) -> f64 {
    rescale_factor_sq(i, d).sqrt()
}

pub fn restart_stationary_pmf(i: u64, nu: f64) -> f64 {
    if i == 0 {
        return 0.0;
    }
    if nu >= 1.0 {
        return if i == 1 { 1.0 } else { 0.0 };
    }
    nu * ((i - 1) as f64 * (-nu).ln_1p()).exp()
}

/// One-step law `P(I_{t+1} = i | I_t = j)`.
pub fn restart_transition_prob(i: u64, j: u64, nu: f64) -> f64 {
    if i == 1 {
        nu
    } else if i == j + 1 {
        1.0 - nu
    } else {
        0.0
    }
}

/// Smallest `k >= 1` with `(1 - nu)^k < eps`.
pub fn geometric_truncation(nu: f64, eps: f64) -> usize {
    if nu >= 1.0 || eps >= 1.0 {
        return 1;
    }
    let log_q = (-nu).ln_1p();
    let below = |k: usize| (k as f64 * log_q).exp() < eps;
    let guess = (eps.ln() / log_q).floor();
    let mut k = if guess.is_finite() && guess >= 0.0 { guess as usize + 1 } else { 1 };
    while !below(k) {
        k += 1;
    }
    while k > 1 && below(k - 1) {
        k -= 1;
    }
    k
}

const MAX_TERMS: usize = 1 << 33;

/// Truncation for `sum_i pi(i) f(i)` when `|f(i)| <= scale * i^exponent`:
/// returns `(i_max, bound)` with the neglected tail at most `bound <= eps`.
pub fn power_envelope_truncation(nu: f64, eps: f64, scale: f64, exponent: f64) -> Result<(usize, f64)> {
    if nu >= 1.0 {
        return Ok((1, 0.0));
    }
    let log_q = (-nu).ln_1p();
    if exponent <= 0.0 {
        let k = geometric_truncation(nu, (eps / scale).min(0.5));
        return Ok((k, scale * (k as f64 * log_q).exp()));
    }
    let mut k = geometric_truncation(nu, (eps / scale).min(0.5));
    loop {
        if k > MAX_TERMS {
            return Err(Error::SeriesUnstable("truncation point exceeds the term limit"));
        }
        let kf = k as f64;
        let ratio = (log_q + exponent * ((kf + 2.0) / (kf + 1.0)).ln()).exp();
        if ratio < 1.0 {
            let first = (nu.ln() + kf * log_q + exponent * (kf + 1.0).ln()).exp() * scale;
            let bound = first / (1.0 - ratio);
            if bound <= eps {
                return Ok((k, bound));
            }
        }
        k += 1 + k / 64;
    }
}

/// Geometric weights `pi(1), pi(2), ...`, refreshed exactly at intervals so
/// that long runs do not accumulate multiplicative drift.
#[derive(Debug, Clone)]
pub struct PmfIter {
    nu: f64,
    log_q: f64,
    q: f64,
    i: u64,
    w: f64,
}

impl PmfIter {
    pub fn new(nu: f64) -> Self {
        PmfIter { nu, log_q: (-nu).ln_1p(), q: 1.0 - nu, i: 0, w: nu }
    }
}

impl Iterator for PmfIter {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        self.i += 1;
        if self.i > 1 {
            if self.i % 1024 == 0 {
                self.w = self.nu * ((self.i - 1) as f64 * self.log_q).exp();
            } else {
                self.w *= self.q;
            }
        }
        Some((self.i, self.w))
    }
}

/// A truncated series value together with its certified tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated {
    pub value: f64,
    pub bound: f64,
    pub terms: usize,
}

/// Envelope `|a_i^q| <= scale * i^exponent`.
pub(crate) fn a_power_envelope(q: f64, d: f64) -> (f64, f64) {
    if (q >= 0.0) == (d <= 0.5) {
        (1.0, 0.0)
    } else {
        ((2.0 * d).powf(0.5 * q).max(1.0), 0.5 * q * (2.0 * d - 1.0))
    }
}

/// `E[a_{I}^q]` under the stationary restart law.
pub fn a_power_moment(q: f64, nu: f64, d: f64, eps: f64) -> Result<Truncated> {
    validate_modulation(d, nu)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive"));
    }
    let (scale, exponent) = a_power_envelope(q, d);
    let (terms, bound) = power_envelope_truncation(nu, eps, scale, exponent)?;
    let half_q = 0.5 * q;
    let mut sum = Neumaier::default();
    for (i, w) in PmfIter::new(nu).take(terms) {
        sum.add(w * rescale_factor_sq(i, d).powf(half_q));
    }
    let value = sum.value();
    if !value.is_finite() {
        return Err(Error::SeriesUnstable("a-power moment overflowed"));
    }
    Ok(Truncated { value, bound, terms })
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `E|Z|^q` for `Z` with density proportional to `(1 + z^2)^{-(dof+1)/2}`.
pub fn student_abs_moment(q: f64, dof: f64) -> Result<f64> {
    if !(q >= 0.0) || !(dof > 0.0) {
        return Err(Error::InvalidParameter("need q >= 0 and dof > 0"));
    }
    if q >= dof {
        return Err(Error::MomentDiverges { order: q, tail_index: dof });
    }
    Ok((ln_gamma(0.5 * (q + 1.0)) + ln_gamma(0.5 * (dof - q)) - LN_SQRT_PI - ln_gamma(0.5 * dof)).exp())
}

// E|N|^q for a standard normal N.
fn normal_abs_moment(q: f64) -> f64 {
    (0.5 * q * core::f64::consts::LN_2 + ln_gamma(0.5 * (q + 1.0)) - LN_SQRT_PI).exp()
}

/// `E|Y_1|^q` of the endogenous process.
pub fn endo_abs_moment(q: f64, mixture: &VolatilityMixture) -> Result<f64> {
    if !(q > -1.0) {
        return Err(Error::InvalidParameter("order must exceed -1"));
    }
    Ok(normal_abs_moment(q) * mixture.sigma_moment(q)?)
}

/// `E[|Y_1|^q |Y_2|^q]`: both values share one draw of the mixing volatility.
pub fn endo_cross_moment(q: f64, mixture: &VolatilityMixture) -> Result<f64> {
    if !(q > -1.0) {
        return Err(Error::InvalidParameter("order must exceed -1"));
    }
    let n = normal_abs_moment(q);
    Ok(n * n * mixture.sigma_moment(2.0 * q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{integrate_de, integrate_half_line};
    use proptest::prelude::*;

    fn ig(alpha: f64, beta: f64) -> VolatilityMixture {
        VolatilityMixture::InverseGamma { alpha, beta }
    }

    #[test]
    fn modulating_factor_examples() {
        assert_eq!(rescale_factor(1, 0.17), 1.0);
        for i in 1..50 {
            assert!((rescale_factor(i, 0.5) - 1.0).abs() < 1e-15);
        }
        let want = (2f64.sqrt() - 1.0).sqrt();
        assert!((rescale_factor(2, 0.25) - want).abs() < 1e-15);
        assert!((rescale_factor(2, 0.25) - 0.643594).abs() < 5e-7);
    }

    #[test]
    fn modulating_factor_asymptotics() {
        for &d in &[0.1, 0.25, 0.4] {
            let i = 1_000_000u64;
            let scaled = (i as f64).powf(0.5 - d) * rescale_factor(i, d);
            assert!((scaled / (2.0 * d).sqrt() - 1.0).abs() < 1e-3);
            for j in 1..200 {
                assert!(rescale_factor(j + 1, d) < rescale_factor(j, d));
            }
        }
    }

    #[test]
    fn pmf_and_transition_examples() {
        assert_eq!(restart_stationary_pmf(1, 0.3), 0.3);
        assert!((restart_stationary_pmf(3, 0.5) - 0.125).abs() < 1e-16);
        assert_eq!(restart_stationary_pmf(1, 1.0), 1.0);
        assert_eq!(restart_stationary_pmf(4, 1.0), 0.0);
        assert_eq!(restart_transition_prob(1, 7, 0.2), 0.2);
        assert_eq!(restart_transition_prob(8, 7, 0.2), 0.8);
        assert_eq!(restart_transition_prob(5, 7, 0.2), 0.0);
    }

    #[test]
    fn stationarity_under_the_chain() {
        let nu = 0.07;
        let eps = 1e-12;
        let k = geometric_truncation(nu, eps);
        for i in 1..60u64 {
            let mut s = 0.0;
            for j in 1..=k as u64 {
                s += restart_transition_prob(i, j, nu) * restart_stationary_pmf(j, nu);
            }
            assert!((s - restart_stationary_pmf(i, nu)).abs() < eps);
        }
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(geometric_truncation(1.0, 1e-12), 1);
        assert_eq!(geometric_truncation(0.5, 0.1), 4);
        assert_eq!(geometric_truncation(0.01, 1e-12), 2750);
    }

    #[test]
    fn pmf_iterator_stays_exact() {
        let nu = 1e-4;
        for (i, w) in PmfIter::new(nu).take(100_000) {
            if i % 9973 == 0 {
                let exact = restart_stationary_pmf(i, nu);
                assert!((w / exact - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn student_moment_examples() {
        assert!((student_abs_moment(0.0, 3.3).unwrap() - 1.0).abs() < 1e-14);
        for &a in &[3.0, 4.5, 10.0] {
            assert!((student_abs_moment(2.0, a).unwrap() * (a - 2.0) - 1.0).abs() < 1e-12);
        }
        assert!(matches!(student_abs_moment(5.0, 4.0), Err(Error::MomentDiverges { .. })));
    }

    #[test]
    fn endogenous_moment_examples() {
        let m = ig(4.5, 0.07);
        let v = endo_abs_moment(2.0, &m).unwrap();
        assert!((v - 0.07f64.powi(2) / 2.5).abs() < 1e-15);
        let p = VolatilityMixture::Point { sigma0: 0.3 };
        assert!((endo_abs_moment(2.0, &p).unwrap() - 0.09).abs() < 1e-15);
        assert!(matches!(endo_abs_moment(6.0, &m), Err(Error::MomentDiverges { .. })));
        let e1 = endo_abs_moment(1.3, &p).unwrap();
        assert!((endo_cross_moment(1.3, &p).unwrap() - e1 * e1).abs() < 1e-15);
        assert!(matches!(endo_cross_moment(3.0, &m), Err(Error::MomentDiverges { .. })));
    }

    // Quadrature of the one-dimensional marginal density in the angle z = tan(theta).
    fn abs_moment_by_quadrature(q: f64, alpha: f64, beta: f64) -> f64 {
        let norm = (ln_gamma(0.5 * (alpha + 1.0)) - LN_SQRT_PI - ln_gamma(0.5 * alpha)).exp();
        let inner = integrate_de(
            |th: f64| th.sin().powf(q) * th.cos().powf(alpha - 1.0 - q),
            0.0,
            core::f64::consts::FRAC_PI_2,
            1e-15,
        );
        2.0 * norm * beta.powf(q) * inner
    }

    // Quadrature over the precision v = 1 / sigma^2, which is Gamma(alpha/2, rate beta^2/2):
    // E[sigma^{2q}] = E[v^{-q}].
    fn cross_moment_by_quadrature(q: f64, alpha: f64, beta: f64) -> f64 {
        let rate = 0.5 * beta * beta;
        let shape = 0.5 * alpha;
        let ln_norm = shape * rate.ln() - ln_gamma(shape);
        let n = (0.5 * q * core::f64::consts::LN_2 + ln_gamma(0.5 * (q + 1.0)) - LN_SQRT_PI).exp();
        // v = w^k with k = 1 / (shape - q) removes the power singularity at zero.
        let k = 1.0 / (shape - q);
        n * n * k * integrate_half_line(|w: f64| (ln_norm - rate * w.powf(k)).exp(), 1e-15)
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for &alpha in &[3.0, 4.5, 7.25] {
            for &beta in &[0.04, 1.0, 2.5] {
                for &q in &[0.5, 1.0, 1.4] {
                    let want = abs_moment_by_quadrature(q, alpha, beta);
                    let got = endo_abs_moment(q, &ig(alpha, beta)).unwrap();
                    assert!((got - want).abs() < 1e-8 * want.max(1.0), "{q} {alpha} {beta}");
                    let want = cross_moment_by_quadrature(q, alpha, beta);
                    let got = endo_cross_moment(q, &ig(alpha, beta)).unwrap();
                    assert!((got - want).abs() < 1e-8 * want.max(1.0), "{q} {alpha} {beta}");
                }
            }
        }
        let want = cross_moment_by_quadrature(1.0, 4.5, 1.0);
        assert!((endo_cross_moment(1.0, &ig(4.5, 1.0)).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn a_power_moment_examples() {
        assert_eq!(a_power_moment(1.7, 1.0, 0.3, 1e-12).unwrap().value, 1.0);
        assert!((a_power_moment(1.7, 0.2, 0.5, 1e-12).unwrap().value - 1.0).abs() < 1e-12);
        let got = a_power_moment(2.0, 0.03, 0.21, 1e-12).unwrap();
        let mut brute = Neumaier::default();
        for i in 1..=1_000_000u64 {
            brute.add(restart_stationary_pmf(i, 0.03) * rescale_factor_sq(i, 0.21));
        }
        assert!((got.value - brute.value()).abs() < 1e-10);
        assert!(got.bound <= 1e-12);
    }

    #[test]
    fn a_power_moment_with_growing_envelope() {
        let got = a_power_moment(1.0, 0.05, 0.8, 1e-12).unwrap();
        let mut brute = Neumaier::default();
        for i in 1..=200_000u64 {
            brute.add(restart_stationary_pmf(i, 0.05) * rescale_factor(i, 0.8));
        }
        assert!((got.value - brute.value()).abs() < 1e-11);
        let neg = a_power_moment(-1.0, 0.05, 0.2, 1e-12).unwrap();
        let mut brute = Neumaier::default();
        for i in 1..=200_000u64 {
            brute.add(restart_stationary_pmf(i, 0.05) / rescale_factor(i, 0.2));
        }
        assert!((neg.value - brute.value()).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn truncation_is_minimal(nu in 1e-3f64..0.99, e in 1e-14f64..0.5) {
            let k = geometric_truncation(nu, e);
            prop_assert!((1.0 - nu).powi(k as i32) < e * (1.0 + 1e-12));
            if k > 1 {
                prop_assert!((1.0 - nu).powi(k as i32 - 1) >= e * (1.0 - 1e-12));
            }
        }

        #[test]
        fn pmf_sums_to_one(nu in 1e-3f64..1.0) {
            let k = geometric_truncation(nu, 1e-13);
            let s: f64 = PmfIter::new(nu).take(k).map(|(_, w)| w).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn factor_is_at_most_one_below_half(d in 0.01f64..0.5, i in 1u64..10_000_000) {
            let a = rescale_factor(i, d);
            prop_assert!(a > 0.0 && a <= 1.0);
        }
    }
}
