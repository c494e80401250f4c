//! Restart posteriors over short windows, count-based restart selection and
//! reconstruction of the endogenous path.
//!
//! Inside a window of `w <= M + 1` consecutive returns the endogenous block
//! is a scale mixture of i.i.d. normals, so the window density given a path
//! of the restart chain is available in closed form. The posterior enumerates
//! the chain's index at the window start (stationary law) and the `2^{w-1}`
//! restart patterns inside the window.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::empirics::ReturnSeries;
use crate::model::{geometric_truncation, rescale_factor_sq, ModelParams, VolatilityMixture};
use crate::special::{ln_gamma, LN_SQRT_PI};
use crate::{Error, Result};

/// Default window half-width.
pub const DEFAULT_TAU: usize = 2;

const INDEX_EPS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct RestartDiagnostics {
    /// `P(I_t = 1 | window around t)` for `t = 1..=T` (stored 0-based).
    pub posterior: Vec<f64>,
    /// Selected restart times, 1-based and increasing.
    pub restart_times: Vec<usize>,
    pub i_path: Vec<u64>,
    pub y_path: Vec<f64>,
    /// Smallest posterior value among the selected times.
    pub threshold: f64,
}

/// Long-memory volatility samples `S_t` from sliding windows of length `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolSampleSet {
    pub t: usize,
    pub samples: Vec<f64>,
}

// Log window density of x given the modulating factors, constants included
// so that the enumerated mass is a true density.
#[derive(Debug, Clone, Copy)]
enum Kernel {
    Student { shape: f64, beta_sq: f64, ln_front: f64 },
    Normal { inv_two_var: f64, ln_front: f64 },
}

impl Kernel {
    fn new(mixture: &VolatilityMixture, w: usize) -> Self {
        let wf = w as f64;
        match *mixture {
            VolatilityMixture::InverseGamma { alpha, beta } => Kernel::Student {
                shape: 0.5 * (alpha + wf),
                beta_sq: beta * beta,
                ln_front: ln_gamma(0.5 * (alpha + wf)) - ln_gamma(0.5 * alpha) - wf * (LN_SQRT_PI + beta.ln()),
            },
            VolatilityMixture::Point { sigma0 } => Kernel::Normal {
                inv_two_var: 0.5 / (sigma0 * sigma0),
                ln_front: -wf * (0.5 * (2.0 * core::f64::consts::PI).ln() + sigma0.ln()),
            },
        }
    }

    // quad = sum (x / a)^2, ln_a = sum ln a.
    #[inline]
    fn ln_density(&self, quad: f64, ln_a: f64) -> f64 {
        match *self {
            Kernel::Student { shape, beta_sq, ln_front } => ln_front - shape * (quad / beta_sq).ln_1p() - ln_a,
            Kernel::Normal { inv_two_var, ln_front } => ln_front - quad * inv_two_var - ln_a,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    #[inline]
    fn add(&mut self, v: f64) {
        if v <= self.max {
            self.sum += (v - self.max).exp();
        } else if v > f64::NEG_INFINITY {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

// Precomputed per-parameter quantities shared by all windows.
struct Enumerator {
    mixture: VolatilityMixture,
    kernel: Kernel,
    w: usize,
    ln_pmf: Vec<f64>,
    inv_a_sq: Vec<f64>,
    ln_a: Vec<f64>,
    ln_nu: f64,
    ln_stay: f64,
}

impl Enumerator {
    fn new(params: &ModelParams, w: usize) -> Self {
        let i_max = geometric_truncation(params.nu, INDEX_EPS);
        let (ln_nu, ln_stay) = (params.nu.ln(), (-params.nu).ln_1p());
        let ln_pmf = (0..i_max).map(|k| if k == 0 { ln_nu } else { ln_nu + k as f64 * ln_stay }).collect();
        let a_sq: Vec<f64> = (1..=(i_max + w) as u64).map(|i| rescale_factor_sq(i, params.d)).collect();
        Enumerator {
            mixture: params.mixture,
            kernel: Kernel::new(&params.mixture, w),
            w,
            ln_pmf,
            inv_a_sq: a_sq.iter().map(|v| 1.0 / v).collect(),
            ln_a: a_sq.iter().map(|v| 0.5 * v.ln()).collect(),
            ln_nu,
            ln_stay,
        }
    }

    /// Log window density and log joint density with a restart at `target`.
    fn window(&self, xs: &[f64], target: usize) -> (f64, f64) {
        let w = xs.len();
        debug_assert!(w <= self.w && target < w);
        let kernel = if w == self.w { self.kernel } else { Kernel::new(&self.mixture, w) };
        let x_sq: Vec<f64> = xs.iter().map(|v| v * v).collect();
        // Patterns over positions 1..w: bit k-1 set means a restart at position k.
        let n_patterns = 1usize << (w - 1);
        struct Pattern {
            first: usize,
            quad: f64,
            ln_a: f64,
            ln_prob: f64,
            hits: bool,
        }
        let mut patterns = Vec::with_capacity(n_patterns);
        for bits in 0..n_patterns {
            let restarts = bits.count_ones() as usize;
            let stays = w - 1 - restarts;
            let ln_prob = restarts as f64 * self.ln_nu + if stays > 0 { stays as f64 * self.ln_stay } else { 0.0 };
            if ln_prob == f64::NEG_INFINITY {
                continue;
            }
            let first = if bits == 0 { w } else { bits.trailing_zeros() as usize + 1 };
            let (mut quad, mut ln_a, mut idx) = (0.0, 0.0, 0usize);
            for k in first..w {
                idx = if bits >> (k - 1) & 1 == 1 { 0 } else { idx + 1 };
                quad += x_sq[k] * self.inv_a_sq[idx];
                ln_a += self.ln_a[idx];
            }
            let hits = target > 0 && bits >> (target - 1) & 1 == 1;
            patterns.push(Pattern { first, quad, ln_a, ln_prob, hits });
        }
        let mut total = LogSum::new();
        let mut restart = LogSum::new();
        let mut pre_quad = vec![0.0; w + 1];
        let mut pre_ln_a = vec![0.0; w + 1];
        for (k0, &ln_pi) in self.ln_pmf.iter().enumerate() {
            for k in 0..w {
                pre_quad[k + 1] = pre_quad[k] + x_sq[k] * self.inv_a_sq[k0 + k];
                pre_ln_a[k + 1] = pre_ln_a[k] + self.ln_a[k0 + k];
            }
            for p in &patterns {
                let v = ln_pi + p.ln_prob + kernel.ln_density(pre_quad[p.first] + p.quad, pre_ln_a[p.first] + p.ln_a);
                total.add(v);
                if p.hits || (target == 0 && k0 == 0) {
                    restart.add(v);
                }
            }
        }
        (total.value(), restart.value())
    }
}

fn check_tau(tau: usize, params: &ModelParams) -> Result<usize> {
    params.validate()?;
    let width = 2 * tau + 1;
    if width > params.window_limit() {
        return Err(Error::WindowTooWide { width, limit: params.window_limit() });
    }
    Ok(width)
}

/// `P(I_t = 1 | x_{t-tau}, ..., x_{t+tau})` for a 1-based `t` whose window
/// lies inside the series.
pub fn restart_posterior(x: &ReturnSeries, t: usize, tau: usize, params: &ModelParams) -> Result<f64> {
    let width = check_tau(tau, params)?;
    if t <= tau || t + tau > x.len() {
        return Err(Error::Precondition("the window around t must lie inside the series"));
    }
    let e = Enumerator::new(params, width);
    let (total, restart) = e.window(&x.values()[t - 1 - tau..t + tau], tau);
    Ok((restart - total).exp().min(1.0))
}

/// Joint density of a window of consecutive returns (length at most `M + 1`)
/// under the stationary model.
pub fn window_density(xs: &[f64], params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if xs.is_empty() || xs.len() > params.window_limit() {
        return Err(Error::WindowTooWide { width: xs.len(), limit: params.window_limit() });
    }
    let e = Enumerator::new(params, xs.len());
    Ok(e.window(xs, 0).0.exp())
}

/// Posterior for every `t`; windows are clipped at the series borders.
pub fn posterior_path(x: &ReturnSeries, tau: usize, params: &ModelParams) -> Result<Vec<f64>> {
    let width = check_tau(tau, params)?;
    let e = Enumerator::new(params, width);
    let values = x.values();
    let len = values.len();
    let at = |t: usize| {
        let lo = t.saturating_sub(tau);
        let hi = (t + tau + 1).min(len);
        let (total, restart) = e.window(&values[lo..hi], t - lo);
        (restart - total).exp().min(1.0)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok((0..len).into_par_iter().map(at).collect())
    }
    #[cfg(not(feature = "parallel"))]
    Ok((0..len).map(at).collect())
}

/// Number of restarts to select in `len` steps: `ceil(nu len)`, robust to
/// products that land a rounding error above an integer, and zero when
/// `nu len < 1`.
pub fn expected_restart_count(nu: f64, len: usize) -> usize {
    let x = nu * len as f64;
    if x < 1.0 {
        return 0;
    }
    let n = (x * (1.0 - 8.0 * f64::EPSILON)).ceil() as usize;
    n.min(len)
}

/// Selects `count` times from a posterior path: highest local maxima
/// (`p[t-1] < p[t] >= p[t+1]`) first, ties toward earlier times; if there are
/// fewer peaks than `count`, the remaining times by descending posterior.
/// Returns 1-based sorted times and the smallest selected value.
pub fn select_restarts(posterior: &[f64], count: usize) -> (Vec<usize>, f64) {
    let n = posterior.len();
    let count = count.min(n);
    let is_peak = |k: usize| {
        let left = k == 0 || posterior[k - 1] < posterior[k];
        let right = k + 1 == n || posterior[k] >= posterior[k + 1];
        left && right
    };
    let by_value = |a: &usize, b: &usize| {
        posterior[*b].partial_cmp(&posterior[*a]).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(b))
    };
    let mut peaks: Vec<usize> = (0..n).filter(|&k| is_peak(k)).collect();
    peaks.sort_by(by_value);
    let mut chosen: Vec<usize> = peaks.into_iter().take(count).collect();
    if chosen.len() < count {
        let mut taken = vec![false; n];
        for &k in &chosen {
            taken[k] = true;
        }
        let mut rest: Vec<usize> = (0..n).filter(|&k| !taken[k]).collect();
        rest.sort_by(by_value);
        chosen.extend(rest.into_iter().take(count - chosen.len()));
    }
    let threshold = chosen.iter().map(|&k| posterior[k]).fold(f64::INFINITY, f64::min);
    let mut times: Vec<usize> = chosen.into_iter().map(|k| k + 1).collect();
    times.sort_unstable();
    let threshold = if times.is_empty() { f64::NAN } else { threshold };
    (times, threshold)
}

/// Posterior path, count-based restart selection and reconstruction.
pub fn detect_restarts(x: &ReturnSeries, params: &ModelParams, tau: usize) -> Result<RestartDiagnostics> {
    if x.is_empty() {
        return Err(Error::InvalidParameter("empty series"));
    }
    let posterior = posterior_path(x, tau, params)?;
    let (restart_times, threshold) = select_restarts(&posterior, expected_restart_count(params.nu, x.len()));
    let (i_path, y_path) = reconstruct_endogenous(x, &restart_times, params.d)?;
    Ok(RestartDiagnostics { posterior, restart_times, i_path, y_path, threshold })
}

/// Index path resetting to 1 at each restart time (and starting at 1) and
/// `y_t = x_t / a_{i_t}`.
pub fn reconstruct_endogenous(x: &ReturnSeries, restart_times: &[usize], d: f64) -> Result<(Vec<u64>, Vec<f64>)> {
    let len = x.len();
    if restart_times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("restart times must be strictly increasing"));
    }
    if restart_times.first().is_some_and(|&t| t == 0) || restart_times.last().is_some_and(|&t| t > len) {
        return Err(Error::InvalidParameter("restart times must lie in 1..=T"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter("D must be positive and finite"));
    }
    let mut i_path = Vec::with_capacity(len);
    let mut next = restart_times.iter().peekable();
    let mut idx = 0u64;
    for t in 1..=len {
        if next.peek() == Some(&&t) {
            next.next();
            idx = 1;
        } else {
            idx += 1;
        }
        i_path.push(idx);
    }
    let mut a: Vec<f64> = Vec::new();
    let y_path = i_path
        .iter()
        .zip(x.values())
        .map(|(&i, &v)| {
            let k = i as usize;
            if k <= 4096 {
                while a.len() < k {
                    a.push(rescale_factor_sq(a.len() as u64 + 1, d).sqrt());
                }
                v / a[k - 1]
            } else {
                v / rescale_factor_sq(i, d).sqrt()
            }
        })
        .collect();
    Ok((i_path, y_path))
}

/// `S = sqrt(mean of y^2)` over every window of length `t`. All windows are
/// used, including those that straddle a restart.
pub fn longmem_vol_samples(y_path: &[f64], restart_times: &[usize], t: usize) -> Result<VolSampleSet> {
    let _ = restart_times;
    if t == 0 || t > y_path.len() {
        return Err(Error::InvalidParameter("need 1 <= t <= length of the path"));
    }
    let samples = y_path.windows(t).map(|w| (w.iter().map(|v| v * v).sum::<f64>() / t as f64).sqrt()).collect();
    Ok(VolSampleSet { t, samples })
}
