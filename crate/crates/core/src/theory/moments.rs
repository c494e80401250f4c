//! Aggregated moment ratio `m_q(t) = E[(a^2_{I_1} + ... + a^2_{I_t})^{q/2}] / E[a^q_{I_1}]`.
//!
//! Paths of the restart chain are split at their first restart inside the
//! window. Before it the chain runs deterministically from a stationary start
//! `i`, contributing `A(i, L) = sum_{s<L} a^2_{i+s}`; afterwards it is a
//! renewal process started at index 1, whose segment sums telescope to
//! `l^{2D}`. Integer powers of the total then follow from binomial
//! convolutions of the two parts. Fractional powers use
//!
//! `x^r = r / Gamma(1 - r) * int_0^inf (1 - exp(-lambda x)) lambda^{-r-1} dlambda`,
//!
//! with the Laplace transforms of both parts again combined by convolution.
//! The integral is split into a power series near zero, a Gauss–Legendre
//! rule in `ln(lambda)` and a closed-form tail that relies on the total being
//! at least one on paths with a restart.
//!
//! Start indices beyond a few thousand are not summed term by term: the
//! summand is smooth there, and blocks of Gauss–Legendre points with
//! Euler–Maclaurin end corrections replace the sum.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{MomentCurve, Provenance};
use crate::model::{
    a_power_envelope, geometric_truncation, power_envelope_truncation, rescale_factor_sq, validate_modulation, PmfIter,
    Theta,
};
use crate::special::{binomial_table, gauss_legendre, ln_gamma};
use crate::{Error, Result};

/// Default cap on the number of elementary updates spent on one curve.
pub const DEFAULT_BUDGET: f64 = 2.0e10;

const SERIES_TERMS: usize = 12;
const LAMBDA_HIGH: f64 = 36.0;
const NODES_PER_PANEL: usize = 10;
// Start indices below this are summed term by term.
const DISCRETE_LIMIT: usize = 2048;
const BLOCK_NODES: usize = 8;

/// Evaluator for theoretical moment-ratio curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEngine {
    pub budget: f64,
}

impl Default for MomentEngine {
    fn default() -> Self {
        MomentEngine { budget: DEFAULT_BUDGET }
    }
}

/// `m_q(t)` for a single horizon.
pub fn moment_ratio(q: f64, t: usize, theta: &Theta, eps: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1"));
    }
    let curve = MomentEngine::default().curve(q, t, theta.d, theta.nu, eps)?;
    Ok(curve.values[t - 1])
}

/// `m_q(t)` for `t = 1..=t_max`.
pub fn moment_ratio_curve(q: f64, t_max: usize, theta: &Theta, eps: f64) -> Result<MomentCurve> {
    MomentEngine::default().curve(q, t_max, theta.d, theta.nu, eps)
}

struct Accumulated {
    // [L][j]: sum_i pi_i A(i, L+1)^j
    ga: Vec<f64>,
    // [L]: sum_i pi_i A(i, L+1)^p
    gp: Vec<f64>,
    // [node][L][j]: sum_i pi_i A^j exp(-lambda A)
    gal: Vec<f64>,
}

impl MomentEngine {
    pub fn with_budget(budget: f64) -> Self {
        MomentEngine { budget }
    }

    /// Curve `m_q(t)`, `t = 1..=t_max`, with per-point truncation bounds.
    pub fn curve(&self, q: f64, t_max: usize, d: f64, nu: f64, eps: f64) -> Result<MomentCurve> {
        validate_modulation(d, nu)?;
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter("moment order must be finite and non-negative"));
        }
        if t_max == 0 {
            return Err(Error::InvalidParameter("t_max must be at least 1"));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive"));
        }
        let ts: Vec<usize> = (1..=t_max).collect();
        let p = 0.5 * q;
        if q == 0.0 || nu >= 1.0 || d == 0.5 || t_max == 1 {
            // Every path sums to t (or the curve is the single point t = 1).
            let values = ts.iter().map(|&t| (t as f64).powf(p)).collect();
            return Ok(MomentCurve {
                q,
                ts,
                values,
                provenance: Provenance::Theoretical,
                error_bounds: Some(vec![0.0; t_max]),
            });
        }

        let n = p.floor() as usize;
        let r = p - n as f64;
        let frac = r > 1e-13 && r < 1.0 - 1e-13;
        let (n, r) = if frac { (n, r) } else { (p.round() as usize, 0.0) };
        let k_max = if frac { n + SERIES_TERMS } else { n };

        let tf = t_max as f64;
        let half = geometric_truncation(nu, 0.5);
        let den_lb: f64 = PmfIter::new(nu).take(half).map(|(i, w)| w * rescale_factor_sq(i, d).powf(p)).sum();
        let (num_scale, num_exp) = if d <= 0.5 {
            (tf.powf(p), 0.0)
        } else {
            (((2.0 * d + 1.0) * tf.powf(2.0 * d)).powf(p), p * (2.0 * d - 1.0))
        };
        let (den_scale, den_exp) = a_power_envelope(q, d);

        let mut m_guess = tf.powf(p.max(1.0));
        for _ in 0..4 {
            let (i_num, tail_num) = power_envelope_truncation(nu, 0.5 * eps * den_lb, num_scale, num_exp)?;
            let (i_den, tail_den) = power_envelope_truncation(nu, 0.5 * eps * den_lb / m_guess, den_scale, den_exp)?;
            let i_max = i_num.max(i_den);
            let s_max =
                if d <= 0.5 { tf } else { (2.0 * d + 1.0) * tf.powf(2.0 * d) * (i_max as f64).powf(2.0 * d - 1.0) };
            let lambdas = if frac { mellin_nodes(s_max) } else { Vec::new() };
            let per_step = if frac { (k_max + 1 + lambdas.len() * (n + 2)) as f64 } else { (k_max + 1) as f64 };
            let points = if i_max >= discrete_limit(t_max) {
                quadrature_points(discrete_limit(t_max) as f64 - 0.5, i_max as f64 + 0.5, nu).len() + 4
            } else {
                0
            };
            let needed = (i_max.min(discrete_limit(t_max)) + points) as f64 * tf * per_step;
            if needed > self.budget {
                return Err(Error::BudgetExceeded { needed, budget: self.budget });
            }
            let acc = accumulate(d, nu, p, frac, n, k_max, i_max, t_max, &lambdas);
            let values = combine(&acc, nu, d, p, n, r, frac, k_max, t_max, s_max, &lambdas)?;
            let m_top = values.iter().cloned().fold(0.0, f64::max);
            if m_top <= m_guess {
                let bounds = values.iter().map(|m| (tail_num + m * tail_den) / den_lb).collect();
                return Ok(MomentCurve {
                    q,
                    ts,
                    values,
                    provenance: Provenance::Theoretical,
                    error_bounds: Some(bounds),
                });
            }
            m_guess = 2.0 * m_top;
        }
        Err(Error::SeriesUnstable("moment ratio exceeded its a-priori envelope"))
    }
}

// (lambda, weight) pairs for the middle range, integrating in u = ln(lambda).
fn mellin_nodes(s_max: f64) -> Vec<(f64, f64)> {
    let u_lo = (0.25 / s_max).ln();
    let u_hi = LAMBDA_HIGH.ln();
    let panels = (u_hi - u_lo).ceil().max(1.0) as usize;
    let h = (u_hi - u_lo) / panels as f64;
    let rule = gauss_legendre(NODES_PER_PANEL);
    let mut out = Vec::with_capacity(panels * NODES_PER_PANEL);
    for k in 0..panels {
        let mid = u_lo + (k as f64 + 0.5) * h;
        for &(x, w) in &rule {
            out.push(((mid + 0.5 * h * x).exp(), 0.5 * h * w));
        }
    }
    out
}

// Running sums over start indices, one term per (weighted) start.
struct Sums<'a> {
    t_max: usize,
    kw: usize,
    nw: usize,
    p: f64,
    frac: bool,
    lambdas: &'a [(f64, f64)],
    acum: Vec<f64>,
    acc: Accumulated,
}

impl Sums<'_> {
    // `window[s]` holds a^2 of the start index plus s; node k's damping
    // factors exp(-lambda a^2) sit at ewin[k * stride + off..].
    fn add(&mut self, w: f64, window: &[f64], ewin: &[f64], stride: usize, off: usize) {
        let (t_max, kw, nw) = (self.t_max, self.kw, self.nw);
        let l_restart = t_max.saturating_sub(1);
        let acc = &mut self.acc;
        let mut a = 0.0;
        for l in 0..t_max {
            a += window[l];
            self.acum[l] = a;
            let mut pw = w;
            for g in acc.ga[l * kw..(l + 1) * kw].iter_mut() {
                *g += pw;
                pw *= a;
            }
        }
        if !self.frac {
            return;
        }
        for l in 0..t_max {
            acc.gp[l] += w * self.acum[l].powf(self.p);
        }
        for k in 0..self.lambdas.len() {
            let ew = &ewin[k * stride + off..k * stride + off + t_max];
            let base = k * l_restart * nw;
            let mut prod = w;
            for l in 0..l_restart {
                prod *= ew[l];
                if prod.abs() < 1e-300 {
                    break;
                }
                let a = self.acum[l];
                let mut pw = prod;
                for g in acc.gal[base + l * nw..base + (l + 1) * nw].iter_mut() {
                    *g += pw;
                    pw *= a;
                }
            }
        }
    }

    // Term of a real start index x, from the smooth extensions of a^2 and pi.
    fn add_at(&mut self, x: f64, scale: f64, d: f64, nu: f64, buf: &mut [f64], ebuf: &mut [f64]) {
        let t_max = self.t_max;
        for (s, v) in buf.iter_mut().enumerate() {
            *v = smooth_factor_sq(x + s as f64, d);
        }
        for (k, &(lam, _)) in self.lambdas.iter().enumerate() {
            for s in 0..t_max {
                ebuf[k * t_max + s] = (-lam * buf[s]).exp();
            }
        }
        let w = scale * nu * ((x - 1.0) * (-nu).ln_1p()).exp();
        self.add(w, buf, ebuf, t_max, 0);
    }
}

// `a^2` at a real index `x > 1`.
fn smooth_factor_sq(x: f64, d: f64) -> f64 {
    let two_d = 2.0 * d;
    -x.powf(two_d) * (two_d * (-1.0 / x).ln_1p()).exp_m1()
}

// Gauss–Legendre points covering [start, end]. Blocks stay short against both
// the power-law scale x and the geometric scale 1/nu of the summand.
fn quadrature_points(start: f64, end: f64, nu: f64) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(BLOCK_NODES);
    let mut out = Vec::new();
    let mut a = start;
    while a < end {
        let b = (a + (a / 16.0).min(0.5 / nu).max(1.0)).min(end);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        out.extend(rule.iter().map(|&(x, w)| (mid + half * x, half * w)));
        a = b;
    }
    out
}

// Sums over the stationary start index i <= i_max: exactly below
// DISCRETE_LIMIT, beyond it as an integral over blocks with the
// Euler–Maclaurin end corrections.
#[allow(clippy::too_many_arguments)]
fn accumulate(
    d: f64,
    nu: f64,
    p: f64,
    frac: bool,
    n: usize,
    k_max: usize,
    i_max: usize,
    t_max: usize,
    lambdas: &[(f64, f64)],
) -> Accumulated {
    let kw = k_max + 1;
    let nw = n + 1;
    let nodes = lambdas.len();
    let l_restart = t_max.saturating_sub(1);
    let mut sums = Sums {
        t_max,
        kw,
        nw,
        p,
        frac,
        lambdas,
        acum: vec![0.0; t_max],
        acc: Accumulated {
            ga: vec![0.0; t_max * kw],
            gp: vec![0.0; if frac { t_max } else { 0 }],
            gal: vec![0.0; nodes * l_restart * nw],
        },
    };

    // Doubled ring buffers: the window for start index i is win[pos..pos + t_max].
    let mut win = vec![0.0; 2 * t_max];
    let mut ewin = vec![0.0; nodes * 2 * t_max];
    let push = |win: &mut [f64], ewin: &mut [f64], slot: usize, index: u64| {
        let a2 = rescale_factor_sq(index, d);
        win[slot] = a2;
        win[slot + t_max] = a2;
        for (k, &(lam, _)) in lambdas.iter().enumerate() {
            let e = (-lam * a2).exp();
            ewin[k * 2 * t_max + slot] = e;
            ewin[k * 2 * t_max + slot + t_max] = e;
        }
    };
    for s in 0..t_max {
        push(&mut win, &mut ewin, s, s as u64 + 1);
    }
    let mut pos = 0;
    let discrete = i_max.min(discrete_limit(t_max) - 1);
    for (i, w) in PmfIter::new(nu).take(discrete) {
        sums.add(w, &win[pos..pos + t_max], &ewin, 2 * t_max, pos);
        push(&mut win, &mut ewin, pos, i + t_max as u64);
        pos = (pos + 1) % t_max;
    }
    if i_max > discrete {
        let mut buf = vec![0.0; t_max];
        let mut ebuf = vec![0.0; nodes * t_max];
        let (start, end) = (discrete as f64 + 0.5, i_max as f64 + 0.5);
        for (x, wgt) in quadrature_points(start, end, nu) {
            sums.add_at(x, wgt, d, nu, &mut buf, &mut ebuf);
        }
        // f'(start) / 24 - f'(end) / 24 by central differences.
        for (x, c) in [(start + 0.5, 1.0), (start - 0.5, -1.0), (end + 0.5, -1.0), (end - 0.5, 1.0)] {
            sums.add_at(x, c / 24.0, d, nu, &mut buf, &mut ebuf);
        }
    }
    sums.acc
}

fn discrete_limit(t_max: usize) -> usize {
    DISCRETE_LIMIT.max(16 * t_max)
}

#[allow(clippy::too_many_arguments)]
fn combine(
    acc: &Accumulated,
    nu: f64,
    d: f64,
    p: f64,
    n: usize,
    r: f64,
    frac: bool,
    k_max: usize,
    t_max: usize,
    s_max: f64,
    lambdas: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let kw = k_max + 1;
    let nw = n + 1;
    let binom = binomial_table(k_max);
    let log_q = (-nu).ln_1p();
    // surv[l] = (1-nu)^{l-1}, first[l] = nu (1-nu)^{l-1}, seg[l] = l^{2D}.
    let surv: Vec<f64> = (0..=t_max).map(|l| if l == 0 { 0.0 } else { ((l - 1) as f64 * log_q).exp() }).collect();
    let first: Vec<f64> = surv.iter().map(|s| nu * s).collect();
    let seg: Vec<f64> = (0..=t_max).map(|l| (l as f64).powf(2.0 * d)).collect();
    let seg_pow: Vec<Vec<f64>> = seg
        .iter()
        .map(|&c| {
            let mut row = vec![1.0; kw];
            for k in 1..kw {
                row[k] = row[k - 1] * c;
            }
            row
        })
        .collect();

    // Integer moments of the renewal part: mb[R][k] = E[B_R^k].
    let mut mb = vec![0.0; (t_max + 1) * kw];
    mb[0] = 1.0;
    for big_r in 1..=t_max {
        for k in 0..kw {
            let mut s = surv[big_r] * seg_pow[big_r][k];
            for l in 1..big_r {
                let prev = &mb[(big_r - l) * kw..];
                let mut inner = 0.0;
                for m in 0..=k {
                    inner += binom[k][m] * seg_pow[l][k - m] * prev[m];
                }
                s += first[l] * inner;
            }
            mb[big_r * kw + k] = s;
        }
    }
    // Restart contributions mr[t][k] = E[S_t^k; a restart in (1, t]].
    let mut mr = vec![0.0; (t_max + 1) * kw];
    for t in 2..=t_max {
        for k in 0..kw {
            let mut s = 0.0;
            for l in 1..t {
                let ga = &acc.ga[(l - 1) * kw..l * kw];
                let b = &mb[(t - l) * kw..(t - l + 1) * kw];
                let mut inner = 0.0;
                for j in 0..=k {
                    inner += binom[k][j] * ga[j] * b[k - j];
                }
                s += first[l] * inner;
            }
            mr[t * kw + k] = s;
        }
    }

    let den = if frac { acc.gp[0] } else { acc.ga[n] };
    let mut values = Vec::with_capacity(t_max);
    if !frac {
        for t in 1..=t_max {
            let num = surv[t] * acc.ga[(t - 1) * kw + n] + mr[t * kw + n];
            values.push(num / den);
        }
    } else {
        let lam_lo = 0.25 / s_max;
        let c_r = r / ln_gamma(1.0 - r).exp();
        let mut mid = vec![0.0; t_max + 1];
        let l_restart = t_max - 1;
        let mut hb = vec![0.0; (t_max + 1) * nw];
        for (k, &(lam, wgt)) in lambdas.iter().enumerate() {
            for v in hb.iter_mut() {
                *v = 0.0;
            }
            hb[0] = 1.0;
            let damp: Vec<f64> = seg.iter().map(|&c| (-lam * c).exp()).collect();
            for big_r in 1..=t_max {
                for j in 0..nw {
                    let mut s = surv[big_r] * damp[big_r] * seg_pow[big_r][j];
                    for l in 1..big_r {
                        let prev = &hb[(big_r - l) * nw..];
                        let mut inner = 0.0;
                        for m in 0..=j {
                            inner += binom[j][m] * seg_pow[l][j - m] * prev[m];
                        }
                        s += first[l] * damp[l] * inner;
                    }
                    hb[big_r * nw + j] = s;
                }
            }
            let gal = &acc.gal[k * l_restart * nw..(k + 1) * l_restart * nw];
            let scale = wgt * lam.powf(-r);
            for t in 2..=t_max {
                let mut tr = 0.0;
                for l in 1..t {
                    let g = &gal[(l - 1) * nw..l * nw];
                    let b = &hb[(t - l) * nw..(t - l + 1) * nw];
                    let mut inner = 0.0;
                    for j in 0..=n {
                        inner += binom[n][j] * g[j] * b[n - j];
                    }
                    tr += first[l] * inner;
                }
                mid[t] += scale * (mr[t * kw + n] - tr);
            }
        }
        for t in 1..=t_max {
            let mut num = surv[t] * acc.gp[t - 1];
            if t >= 2 {
                let mut small = 0.0;
                let mut fact = 1.0;
                for m in 1..=SERIES_TERMS {
                    fact *= m as f64;
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    small += sign * mr[t * kw + n + m] * lam_lo.powf(m as f64 - r) / (fact * (m as f64 - r));
                }
                let large = mr[t * kw + n] * LAMBDA_HIGH.powf(-r) / r;
                num += c_r * (small + mid[t] + large);
            }
            values.push(num / den);
        }
        let _ = p;
    }
    if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::SeriesUnstable("moment ratio evaluation lost precision"));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::restart_stationary_pmf;

    // Exhaustive sum over start indices i <= i_max and all restart patterns.
    fn brute_force(q: f64, t: usize, d: f64, nu: f64, i_max: u64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..=i_max {
            let w0 = restart_stationary_pmf(i, nu);
            den += w0 * rescale_factor_sq(i, d).powf(0.5 * q);
            for pattern in 0u32..(1 << (t - 1)) {
                let mut idx = i;
                let mut s = rescale_factor_sq(idx, d);
                let mut w = w0;
                for step in 0..t - 1 {
                    if pattern >> step & 1 == 1 {
                        idx = 1;
                        w *= nu;
                    } else {
                        idx += 1;
                        w *= 1.0 - nu;
                    }
                    s += rescale_factor_sq(idx, d);
                }
                num += w * s.powf(0.5 * q);
            }
        }
        num / den
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        for &(d, nu) in &[(0.25, 0.6), (0.1, 0.75), (0.4, 0.5), (0.8, 0.7)] {
            let i_max = 50;
            for &q in &[0.5, 1.0, 2.0, 3.0, 3.7] {
                let curve = MomentEngine::default().curve(q, 10, d, nu, 1e-13).unwrap();
                for t in 1..=10 {
                    let want = brute_force(q, t, d, nu, i_max);
                    let got = curve.values[t - 1];
                    assert!((got - want).abs() < 1e-10, "q={q} d={d} nu={nu} t={t}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn far_start_indices_by_quadrature() {
        // i_max far above the term-by-term range.
        let (d, nu, i_max) = (0.2, 1e-3, 40_000);
        for &q in &[1.0, 3.0, 4.4] {
            let curve = MomentEngine::default().curve(q, 9, d, nu, 1e-13).unwrap();
            for t in [2, 5, 9] {
                let want = brute_force(q, t, d, nu, i_max);
                let got = curve.values[t - 1];
                assert!(((got - want) / want).abs() < 1e-10, "q={q} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn second_moment_ratio_is_linear() {
        for &(d, nu) in &[(0.21, 0.03), (0.19, 0.011), (0.16, 0.004)] {
            let curve = MomentEngine::default().curve(2.0, 64, d, nu, 1e-12).unwrap();
            for (t, v) in curve.values.iter().enumerate() {
                assert!((v - (t + 1) as f64).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn trivial_regimes() {
        let c = MomentEngine::default().curve(1.3, 5, 0.5, 0.1, 1e-12).unwrap();
        assert!((c.values[4] - 5f64.powf(0.65)).abs() < 1e-14);
        let c = MomentEngine::default().curve(1.0, 3, 0.2, 1.0, 1e-12).unwrap();
        assert!((c.values[2] - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(moment_ratio(1.0, 1, &Theta::null(0.3, 0.02).unwrap(), 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn budget_is_enforced() {
        let err = MomentEngine::with_budget(1e4).curve(1.0, 30, 0.25, 0.001, 1e-12).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
