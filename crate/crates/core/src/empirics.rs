//! Estimators over observed or simulated return series.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::special::erfc;
use crate::theory::{hurst_fit, AcfCurve, MomentCurve, Provenance, ScalingFit};
use crate::{Error, Result};

/// Return series, optionally with its sample mean removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    mean_removed: bool,
}

impl ReturnSeries {
    /// Series taken as is.
    pub fn new(values: Vec<f64>) -> Self {
        ReturnSeries { values, mean_removed: false }
    }

    /// Series with its sample mean subtracted.
    pub fn demeaned(mut values: Vec<f64>) -> Self {
        if !values.is_empty() {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            for v in values.iter_mut() {
                *v -= mean;
            }
        }
        ReturnSeries { values, mean_removed: true }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_mean_removed(&self) -> bool {
        self.mean_removed
    }

    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        ReturnSeries { values, mean_removed: self.mean_removed }
    }

    pub fn scaled(&self, c: f64) -> Self {
        ReturnSeries { values: self.values.iter().map(|v| c * v).collect(), mean_removed: self.mean_removed }
    }

    pub fn std_dev(&self) -> f64 {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        (self.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
    }
}

impl From<Vec<f64>> for ReturnSeries {
    fn from(values: Vec<f64>) -> Self {
        ReturnSeries::new(values)
    }
}

/// Zero-mean log returns of a price series.
pub fn log_returns(prices: &[f64]) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InvalidParameter("need at least two prices"));
    }
    for (index, &value) in prices.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositivePrice { index, value });
        }
    }
    let raw = prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    Ok(ReturnSeries::demeaned(raw))
}

#[inline]
fn abs_pow(v: f64, q: f64) -> f64 {
    if q == 1.0 {
        v.abs()
    } else if q == 2.0 {
        v * v
    } else {
        v.abs().powf(q)
    }
}

// Prefix sums in double-double so that window sums keep full relative precision.
struct PrefixSum {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PrefixSum {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let mut hi = vec![0.0];
        let mut lo = vec![0.0];
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for v in values {
            let t = s + v;
            let bp = t - s;
            c += (s - (t - bp)) + (v - bp);
            s = t;
            hi.push(s);
            lo.push(c);
        }
        PrefixSum { hi, lo }
    }

    #[inline]
    fn window(&self, start: usize, len: usize) -> f64 {
        (self.hi[start + len] - self.hi[start]) + (self.lo[start + len] - self.lo[start])
    }
}

/// `M_q(t) / M_q(1)` with `M_q(t)` the mean of `|x_{n+1} + ... + x_{n+t}|^q`
/// over all overlapping windows.
pub fn empirical_moment_ratio(x: &ReturnSeries, q: f64, t: usize) -> Result<f64> {
    Ok(empirical_moment_curve(x, q, t)?.values[t - 1])
}

/// Moment ratio curve `t = 1..=t_max`.
pub fn empirical_moment_curve(x: &ReturnSeries, q: f64, t_max: usize) -> Result<MomentCurve> {
    let len = x.len();
    if t_max == 0 || t_max > len {
        return Err(Error::InvalidParameter("need 1 <= t <= T"));
    }
    let prefix = PrefixSum::new(x.values().iter().copied());
    let mut raw = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let count = len + 1 - t;
        let mut s = 0.0;
        for n in 0..count {
            s += abs_pow(prefix.window(n, t), q);
        }
        raw.push(s / count as f64);
    }
    if !(raw[0] > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let values = raw.iter().map(|m| m / raw[0]).collect();
    Ok(MomentCurve { q, ts: (1..=t_max).collect(), values, provenance: Provenance::Empirical, error_bounds: None })
}

/// Sample autocorrelation of `|x|^q` at lag `t - 1`.
pub fn empirical_acf(x: &ReturnSeries, q: f64, t: usize) -> Result<f64> {
    if t == 0 || t > x.len() {
        return Err(Error::InvalidParameter("need 1 <= t <= T"));
    }
    let v: Vec<f64> = x.values().iter().map(|&s| abs_pow(s, q)).collect();
    let (mean, var) = mean_var(&v)?;
    Ok(lagged_cov(&v, mean, t - 1) / var)
}

/// Autocorrelation curve `t = 1..=t_max`.
pub fn empirical_acf_curve(x: &ReturnSeries, q: f64, t_max: usize) -> Result<AcfCurve> {
    if t_max == 0 || t_max > x.len() {
        return Err(Error::InvalidParameter("need 1 <= t <= T"));
    }
    let v: Vec<f64> = x.values().iter().map(|&s| abs_pow(s, q)).collect();
    let (mean, var) = mean_var(&v)?;
    let values = (0..t_max).map(|lag| if lag == 0 { 1.0 } else { lagged_cov(&v, mean, lag) / var }).collect();
    Ok(AcfCurve { q, ts: (1..=t_max).collect(), values, provenance: Provenance::Empirical })
}

fn mean_var(v: &[f64]) -> Result<(f64, f64)> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((mean, var))
}

fn lagged_cov(v: &[f64], mean: f64, lag: usize) -> f64 {
    let n = v.len() - lag;
    let mut s = 0.0;
    for k in 0..n {
        s += (v[k] - mean) * (v[k + lag] - mean);
    }
    s / n as f64
}

/// Hurst fit of the empirical moment curve over `t = 2..=window_max`.
pub fn empirical_hurst(x: &ReturnSeries, q: f64, window_max: usize) -> Result<ScalingFit> {
    if window_max < 2 || window_max * 10 > x.len() {
        return Err(Error::Precondition("empirical Hurst fit needs 2 <= W <= T/10"));
    }
    hurst_fit(&empirical_moment_curve(x, q, window_max)?, window_max)
}

/// Historical/realized volatility correlations over a grid of horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct MugShotGrid {
    pub t_h: Vec<usize>,
    pub t_r: Vec<usize>,
    /// Row-major over `t_h`; `None` where a window variance vanishes.
    pub values: Vec<Option<f64>>,
}

impl MugShotGrid {
    pub fn get(&self, t_h: usize, t_r: usize) -> Option<f64> {
        let a = self.t_h.iter().position(|&v| v == t_h)?;
        let b = self.t_r.iter().position(|&v| v == t_r)?;
        self.values[a * self.t_r.len() + b]
    }

    /// `max |chi(a, b) - chi(b, a)|` over pairs present in both orders.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &a in &self.t_h {
            for &b in &self.t_r {
                if let (Some(u), Some(v)) = (self.get(a, b), self.get(b, a)) {
                    worst = worst.max((u - v).abs());
                }
            }
        }
        worst
    }

    /// Mean of `chi(a, b) - chi(b, a)` over pairs with `a < b`: positive when
    /// short historical windows track long realized windows more closely than
    /// long historical windows track short realized ones.
    pub fn signed_asymmetry(&self) -> f64 {
        let mut s = 0.0;
        let mut n = 0usize;
        for &a in &self.t_h {
            for &b in &self.t_r {
                if a < b {
                    if let (Some(u), Some(v)) = (self.get(a, b), self.get(b, a)) {
                        s += u - v;
                        n += 1;
                    }
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    }
}

/// Root-mean-square of every window of length `t` (start index `0..=T-t`).
pub fn window_rms(values: &[f64], t: usize) -> Vec<f64> {
    let prefix = PrefixSum::new(values.iter().map(|v| v * v));
    (0..=values.len() - t).map(|n| (prefix.window(n, t) / t as f64).sqrt()).collect()
}

pub fn mug_shot(x: &ReturnSeries, t_h_grid: &[usize], t_r_grid: &[usize]) -> Result<MugShotGrid> {
    let len = x.len();
    let max_h = t_h_grid.iter().copied().max().unwrap_or(0);
    let max_r = t_r_grid.iter().copied().max().unwrap_or(0);
    if t_h_grid.contains(&0) || t_r_grid.contains(&0) || max_h + max_r > len {
        return Err(Error::InvalidParameter("mug-shot horizons must be positive with t_h + t_r <= T"));
    }
    let sq: Vec<f64> = x.values().iter().map(|v| v * v).collect();
    let prefix = PrefixSum::new(sq.iter().copied());
    let mut values = Vec::with_capacity(t_h_grid.len() * t_r_grid.len());
    for &th in t_h_grid {
        for &tr in t_r_grid {
            let count = len - th - tr + 1;
            let hist: Vec<f64> = (0..count).map(|n| (prefix.window(n, th) / th as f64).sqrt()).collect();
            let real: Vec<f64> = (0..count).map(|n| (prefix.window(n + th, tr) / tr as f64).sqrt()).collect();
            values.push(pearson(&hist, &real));
        }
    }
    Ok(MugShotGrid { t_h: t_h_grid.to_vec(), t_r: t_r_grid.to_vec(), values })
}

/// Pearson correlation; `None` if either sample is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa > 0.0 && sbb > 0.0 {
        Some(sab / (saa * sbb).sqrt())
    } else {
        None
    }
}

/// Cross-correlation between `sign(y_t)` and `|y_{t+lag}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaggedCorrelation {
    pub lag: usize,
    pub value: f64,
    pub p_value: f64,
}

/// Sign fairness, sign independence and sign/magnitude decoupling tests.
#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub positives: usize,
    pub nonzero: usize,
    pub binomial_p: f64,
    pub runs: usize,
    pub runs_p: f64,
    pub cross: Vec<LaggedCorrelation>,
}

impl SignReport {
    /// Every test accepts at `level`.
    pub fn passes(&self, level: f64) -> bool {
        self.binomial_p >= level && self.runs_p >= level && self.cross.iter().all(|c| c.p_value >= level)
    }
}

fn two_sided_normal_p(z: f64) -> f64 {
    erfc(z.abs() / core::f64::consts::SQRT_2)
}

pub fn sign_magnitude_diagnostics(y: &[f64]) -> Result<SignReport> {
    if y.len() < 100 {
        return Err(Error::Precondition("sign diagnostics need at least 100 values"));
    }
    let signs: Vec<f64> = y.iter().filter(|v| **v != 0.0).map(|v| v.signum()).collect();
    let nonzero = signs.len();
    let positives = signs.iter().filter(|s| **s > 0.0).count();
    let n = nonzero as f64;
    let binomial_p =
        if nonzero == 0 { 0.0 } else { two_sided_normal_p((positives as f64 - 0.5 * n) / (0.25 * n).sqrt()) };
    let runs = if nonzero == 0 { 0 } else { 1 + signs.windows(2).filter(|w| w[0] != w[1]).count() };
    let (n1, n2) = (positives as f64, (nonzero - positives) as f64);
    let runs_p = if n1 == 0.0 || n2 == 0.0 {
        0.0
    } else {
        let mu = 2.0 * n1 * n2 / n + 1.0;
        let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
        two_sided_normal_p((runs as f64 - mu) / var.sqrt())
    };
    let sgn: Vec<f64> = y.iter().map(|v| if *v == 0.0 { 0.0 } else { v.signum() }).collect();
    let mag: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let mut cross = Vec::with_capacity(6);
    for lag in 0..=5usize {
        let m = y.len() - lag;
        let value = pearson(&sgn[..m], &mag[lag..]).unwrap_or(0.0);
        cross.push(LaggedCorrelation { lag, value, p_value: two_sided_normal_p(value * (m as f64).sqrt()) });
    }
    Ok(SignReport { positives, nonzero, binomial_p, runs, runs_p, cross })
}

/// Histogram on a symmetric range `[-half_range, half_range]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Freedman–Diaconis bin width (widened if the bin count would exceed
    /// `max_bins`) over the symmetric range covering every value.
    pub fn freedman_diaconis(values: &[f64], max_bins: usize) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::InvalidParameter("histogram needs at least 4 values"));
        }
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        let q = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let k = pos.floor() as usize;
            let frac = pos - k as f64;
            sorted[k] + frac * (sorted[(k + 1).min(sorted.len() - 1)] - sorted[k])
        };
        let iqr = q(0.75) - q(0.25);
        let half = sorted[0].abs().max(sorted[sorted.len() - 1].abs());
        if !(iqr > 0.0 && half > 0.0) {
            return Err(Error::ZeroVariance);
        }
        let width = 2.0 * iqr / (values.len() as f64).cbrt();
        let per_side = ((half / width).ceil() as usize).clamp(1, (max_bins / 2).max(1));
        Ok(Self::symmetric(values, half * (1.0 + 1e-12), 2 * per_side))
    }

    /// `bins` equal bins on `[-half_range, half_range]`; values outside are
    /// counted in `total` only.
    pub fn symmetric(values: &[f64], half_range: f64, bins: usize) -> Self {
        let width = 2.0 * half_range / bins as f64;
        let edges = (0..=bins).map(|k| -half_range + k as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let k = ((v + half_range) / width).floor();
            if k >= 0.0 && (k as usize) < bins {
                counts[k as usize] += 1;
            }
        }
        Histogram { edges, counts, total: values.len() as u64 }
    }

    pub fn bin_width(&self, k: usize) -> f64 {
        self.edges[k + 1] - self.edges[k]
    }

    /// Empirical density per bin.
    pub fn density(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|k| self.counts[k] as f64 / (self.total as f64 * self.bin_width(k))).collect()
    }
}
