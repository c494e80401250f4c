//! Moment-matching estimation of `(D, nu, alpha)` and of the scale.
//!
//! The objective compares theoretical and empirical moment-ratio and
//! autocorrelation curves through squared relative residuals. The search runs
//! on a coarse grid and then refines the best grid points with Nelder–Mead in
//! unconstrained coordinates that map onto the parameter box. The tail index
//! is minimized out at every `(D, nu)` (grid bracket plus golden section), so
//! the simplex only moves in `(D, nu)`.

mod nelder_mead;

pub use nelder_mead::{Minimum, NelderMead};

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::empirics::{empirical_acf_curve, empirical_moment_curve, ReturnSeries};
use crate::model::{a_power_moment, endo_abs_moment, Theta, VolatilityMixture};
use crate::theory::{acf_modulating_curve, AcfCurve, MomentCurve, MomentEngine, ReturnsAcfCoefficients};
use crate::{Error, Result};

/// Which endogenous mixture is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    /// Inverse-gamma mixture, three shape parameters.
    #[default]
    Complete,
    /// Point mixture (normal endogenous process), only `(D, nu)`.
    Null,
}

/// Box for the shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaBounds {
    pub d: (f64, f64),
    pub nu: (f64, f64),
    pub alpha: (f64, f64),
}

impl ThetaBounds {
    /// Default box for the given moment orders.
    pub fn for_orders(orders: &[f64]) -> Self {
        let max_q = orders.iter().copied().fold(0.0, f64::max);
        ThetaBounds { d: (0.05, 0.5), nu: (1e-4, 0.2), alpha: (2.0 * max_q + 0.5, 20.0) }
    }

    pub fn contains(&self, theta: &Theta, kind: ModelKind) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(theta.d, self.d)
            && inside(theta.nu, self.nu)
            && (kind == ModelKind::Null || inside(theta.alpha, self.alpha))
    }
}

/// Setup of the moment-matching objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    /// Largest horizon `M` entering the curves.
    pub memory: usize,
    pub orders: Vec<f64>,
    pub bounds: ThetaBounds,
    /// Truncation tolerance of the theoretical series.
    pub eps: f64,
    pub model: ModelKind,
}

impl ObjectiveSpec {
    /// Complete model with `Q = {1}` and the default box.
    pub fn new(memory: usize) -> Self {
        Self::with_orders(memory, vec![1.0])
    }

    pub fn with_orders(memory: usize, orders: Vec<f64>) -> Self {
        let bounds = ThetaBounds::for_orders(&orders);
        ObjectiveSpec { memory, orders, bounds, eps: 1e-8, model: ModelKind::Complete }
    }

    pub fn null(memory: usize) -> Self {
        ObjectiveSpec { model: ModelKind::Null, ..Self::new(memory) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(Error::InvalidParameter("memory must be at least 1"));
        }
        if self.orders.is_empty() {
            return Err(Error::InvalidParameter("at least one moment order is needed"));
        }
        if self.orders.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
            return Err(Error::InvalidParameter("moment orders must be positive and finite"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive"));
        }
        let b = &self.bounds;
        let ordered = |(lo, hi): (f64, f64)| lo > 0.0 && lo < hi && hi.is_finite();
        if !(ordered(b.d) && ordered(b.nu) && b.nu.1 <= 1.0) {
            return Err(Error::InvalidParameter("invalid D or nu bounds"));
        }
        if self.model == ModelKind::Complete {
            if !ordered(b.alpha) {
                return Err(Error::InvalidParameter("invalid alpha bounds"));
            }
            if b.alpha.0 <= 2.0 * self.max_order() {
                return Err(Error::InvalidParameter("alpha range must exceed twice the largest order"));
            }
        }
        Ok(())
    }

    fn max_order(&self) -> f64 {
        self.orders.iter().copied().fold(0.0, f64::max)
    }
}

/// Which curve a residual vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Moment,
    Acf,
}

/// Relative residuals `(theory - empirical) / theory` for `t = 1..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveResiduals {
    pub kind: CurveKind,
    pub q: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub theta_hat: Theta,
    /// Filled in by [`calibrate_beta`]; `None` after shape calibration alone.
    pub beta_hat: Option<f64>,
    pub objective_value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub residuals: Vec<CurveResiduals>,
}

/// Empirical curves entering the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCurves {
    pub moments: Vec<MomentCurve>,
    pub acfs: Vec<AcfCurve>,
}

impl EmpiricalCurves {
    pub fn from_series(x: &ReturnSeries, spec: &ObjectiveSpec) -> Result<Self> {
        spec.validate()?;
        let mut moments = Vec::with_capacity(spec.orders.len());
        let mut acfs = Vec::with_capacity(spec.orders.len());
        for &q in &spec.orders {
            moments.push(empirical_moment_curve(x, q, spec.memory)?);
            acfs.push(empirical_acf_curve(x, q, spec.memory)?);
        }
        Ok(EmpiricalCurves { moments, acfs })
    }

    fn check(&self, spec: &ObjectiveSpec) -> Result<()> {
        if self.moments.len() != spec.orders.len() || self.acfs.len() != spec.orders.len() {
            return Err(Error::Precondition("one empirical curve pair per moment order is needed"));
        }
        let covers = |ts: &[usize]| ts.len() >= spec.memory && ts.iter().take(spec.memory).copied().eq(1..=spec.memory);
        for ((m, r), &q) in self.moments.iter().zip(&self.acfs).zip(&spec.orders) {
            if m.q != q || r.q != q {
                return Err(Error::Precondition("empirical curves must follow the order list"));
            }
            if !covers(&m.ts) || !covers(&r.ts) {
                return Err(Error::Precondition("empirical curves must cover t = 1..=M"));
            }
        }
        Ok(())
    }
}

// Scale-free theory pieces for one (D, nu, q).
#[derive(Debug, Clone)]
struct ShapeCurves {
    moment: Vec<f64>,
    // r^a_q(t), t = 1..=M; None when the modulation is degenerate.
    modulating: Option<Vec<f64>>,
    a1: f64,
    a2: f64,
}

fn shape_curves(q: f64, d: f64, nu: f64, memory: usize, eps: f64, engine: &MomentEngine) -> Result<ShapeCurves> {
    let moment = engine.curve(q, memory, d, nu, eps)?.values;
    let modulating = match acf_modulating_curve(q, memory, d, nu, eps) {
        Ok(c) => Some(c),
        Err(Error::DegenerateModulation) => None,
        Err(e) => return Err(e),
    };
    let a1 = a_power_moment(q, nu, d, eps)?.value;
    let a2 = a_power_moment(2.0 * q, nu, d, eps)?.value;
    Ok(ShapeCurves { moment, modulating, a1, a2 })
}

fn unit_mixture(alpha: f64) -> VolatilityMixture {
    if alpha.is_finite() {
        VolatilityMixture::InverseGamma { alpha, beta: 1.0 }
    } else {
        VolatilityMixture::Point { sigma0: 1.0 }
    }
}

fn theory_acf(q: f64, alpha: f64, shape: &ShapeCurves) -> Result<Vec<f64>> {
    let coef = ReturnsAcfCoefficients::from_moments(q, shape.a1, shape.a2, &unit_mixture(alpha))?;
    let len = shape.moment.len();
    Ok((0..len)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                let ra = shape.modulating.as_ref().map_or(0.0, |c| c[k]);
                coef.u + coef.v * ra
            }
        })
        .collect())
}

fn relative(theory: &[f64], empirical: &[f64]) -> Vec<f64> {
    theory.iter().zip(empirical).map(|(&th, &em)| (th - em) / th).collect()
}

fn squared_sum(res: &[f64]) -> f64 {
    res.iter().map(|r| r * r).sum()
}

fn check_theta(theta: &Theta, spec: &ObjectiveSpec) -> Result<()> {
    crate::model::validate_modulation(theta.d, theta.nu)?;
    if theta.alpha.is_finite() {
        let top = 2.0 * spec.max_order();
        if theta.alpha <= top {
            return Err(Error::MomentDiverges { order: top, tail_index: theta.alpha });
        }
    } else if !(theta.alpha > 0.0) {
        return Err(Error::InvalidParameter("alpha must be positive"));
    }
    Ok(())
}

fn residuals_at(
    theta: &Theta,
    curves: &EmpiricalCurves,
    spec: &ObjectiveSpec,
    mut shape_for: impl FnMut(usize) -> Result<ShapeCurves>,
) -> Result<Vec<CurveResiduals>> {
    check_theta(theta, spec)?;
    let m = spec.memory;
    let mut out = Vec::with_capacity(2 * spec.orders.len());
    for (k, &q) in spec.orders.iter().enumerate() {
        let shape = shape_for(k)?;
        let acf = theory_acf(q, theta.alpha, &shape)?;
        out.push(CurveResiduals {
            kind: CurveKind::Moment,
            q,
            values: relative(&shape.moment[..m], &curves.moments[k].values[..m]),
        });
        out.push(CurveResiduals { kind: CurveKind::Acf, q, values: relative(&acf[..m], &curves.acfs[k].values[..m]) });
    }
    Ok(out)
}

fn total(res: &[CurveResiduals]) -> f64 {
    let v: f64 = res.iter().map(|r| squared_sum(&r.values)).sum();
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Sum over orders and `t = 1..=M` of squared relative residuals of both
/// curve families. An infinite `alpha` selects the point mixture.
pub fn gmm_objective(theta: &Theta, curves: &EmpiricalCurves, spec: &ObjectiveSpec) -> Result<f64> {
    spec.validate()?;
    curves.check(spec)?;
    let engine = MomentEngine::default();
    let res = residuals_at(theta, curves, spec, |k| {
        shape_curves(spec.orders[k], theta.d, theta.nu, spec.memory, spec.eps, &engine)
    })?;
    Ok(total(&res))
}

const GRID_POINTS: usize = 10;
const GRID_EDGE: f64 = 0.02;
const QUANTUM: f64 = 1e-6;
const STARTS: usize = 3;
const ALPHA_EDGE: f64 = 1e-4;
const ALPHA_TOL: f64 = 1e-7;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn logit(f: f64) -> f64 {
    (f / (1.0 - f)).ln()
}

fn quantize(z: f64) -> i64 {
    (z / QUANTUM).round() as i64
}

// Unconstrained coordinates: D linear, nu and alpha logarithmic in the box.
fn to_theta(key: &[i64], spec: &ObjectiveSpec) -> Theta {
    let b = &spec.bounds;
    let f = |k: i64| sigmoid(k as f64 * QUANTUM);
    let log_map = |(lo, hi): (f64, f64), s: f64| (lo.ln() + (hi.ln() - lo.ln()) * s).exp();
    let d = b.d.0 + (b.d.1 - b.d.0) * f(key[0]);
    let nu = log_map(b.nu, f(key[1]));
    let alpha = match spec.model {
        ModelKind::Complete => log_map(b.alpha, f(key[2])),
        ModelKind::Null => f64::INFINITY,
    };
    Theta { d, nu, alpha }
}

fn clamp_fraction(f: f64) -> f64 {
    f.clamp(GRID_EDGE, 1.0 - GRID_EDGE)
}

// (D, nu) grid; alpha is profiled separately on `alpha_grid`.
fn grid_fractions() -> Vec<Vec<f64>> {
    let n = GRID_POINTS;
    let uniform: Vec<f64> = (0..n).map(|k| clamp_fraction(k as f64 / (n - 1) as f64)).collect();
    let mut out = Vec::with_capacity(n * n);
    for &fd in &uniform {
        for &fn_ in &uniform {
            out.push(vec![fd, fn_]);
        }
    }
    out
}

// alpha spread linearly in value; returned as unconstrained coordinates.
fn alpha_grid(spec: &ObjectiveSpec) -> Vec<f64> {
    let n = GRID_POINTS;
    let (lo, hi) = spec.bounds.alpha;
    (0..n)
        .map(|k| {
            let v = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            logit(clamp_fraction((v.ln() - lo.ln()) / (hi.ln() - lo.ln())))
        })
        .collect()
}

type ShapeKey = (i64, i64, u64);

/// Reusable shape calibrator. Theory curves are cached on the quantized
/// `(D, nu)` coordinates, so repeated fits with the same spec share work.
#[derive(Debug, Clone)]
pub struct Calibrator {
    spec: ObjectiveSpec,
    engine: MomentEngine,
    cache: BTreeMap<ShapeKey, Result<ShapeCurves>>,
    nelder_mead: NelderMead,
}

impl Calibrator {
    pub fn new(spec: ObjectiveSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Calibrator {
            spec,
            engine: MomentEngine::default(),
            cache: BTreeMap::new(),
            nelder_mead: NelderMead { initial_step: 0.5, diameter_tol: 1e-4, max_evaluations: 400 },
        })
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    /// Number of cached `(D, nu, q)` entries.
    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    fn shape_key(key: &[i64], q: f64) -> ShapeKey {
        (key[0], key[1], q.to_bits())
    }

    fn compute(&self, key: &[i64], q: f64) -> Result<ShapeCurves> {
        let theta = to_theta(&[key[0], key[1], 0], &self.spec);
        shape_curves(q, theta.d, theta.nu, self.spec.memory, self.spec.eps, &self.engine)
    }

    fn fill(&mut self, keys: &[Vec<i64>]) {
        let mut todo: Vec<(Vec<i64>, f64)> = Vec::new();
        for key in keys {
            for &q in &self.spec.orders {
                let sk = Self::shape_key(key, q);
                if !self.cache.contains_key(&sk) && !todo.iter().any(|(k, p)| Self::shape_key(k, *p) == sk) {
                    todo.push((key.clone(), q));
                }
            }
        }
        #[cfg(feature = "parallel")]
        let computed: Vec<Result<ShapeCurves>> = {
            use rayon::prelude::*;
            todo.par_iter().map(|(k, q)| self.compute(k, *q)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let computed: Vec<Result<ShapeCurves>> = todo.iter().map(|(k, q)| self.compute(k, *q)).collect();
        for ((k, q), c) in todo.iter().zip(computed) {
            self.cache.insert(Self::shape_key(k, *q), c);
        }
    }

    fn residuals(&mut self, key: &[i64], curves: &EmpiricalCurves) -> Result<Vec<CurveResiduals>> {
        self.fill(&[key.to_vec()]);
        let theta = to_theta(key, &self.spec);
        let spec = self.spec.clone();
        let cache = &self.cache;
        residuals_at(&theta, curves, &spec, |k| cache[&Self::shape_key(key, spec.orders[k])].clone())
    }

    fn value(&mut self, key: &[i64], curves: &EmpiricalCurves) -> f64 {
        // Infeasible or unaffordable points count as infinitely bad.
        self.residuals(key, curves).map_or(f64::INFINITY, |r| total(&r))
    }

    // Objective minimized over the alpha coordinate at fixed (D, nu); alpha
    // only enters through closed-form coefficients, so this costs one set of
    // shape curves. Returns the value and the full key.
    fn profile(&mut self, dn: &[i64], curves: &EmpiricalCurves) -> (f64, Vec<i64>) {
        if self.spec.model == ModelKind::Null {
            return (self.value(dn, curves), dn.to_vec());
        }
        let mut key = vec![dn[0], dn[1], 0];
        let grid = alpha_grid(&self.spec);
        let mut at = |z: f64, this: &mut Self| {
            key[2] = quantize(z);
            this.value(&key, curves)
        };
        let scores: Vec<f64> = grid.iter().map(|&z| at(z, self)).collect();
        let mut best = 0;
        for (k, v) in scores.iter().enumerate() {
            if *v < scores[best] {
                best = k;
            }
        }
        if !scores[best].is_finite() {
            return (f64::INFINITY, vec![dn[0], dn[1], quantize(grid[best])]);
        }
        let lo = if best == 0 { logit(ALPHA_EDGE) } else { grid[best - 1] };
        let hi = if best + 1 == grid.len() { logit(1.0 - ALPHA_EDGE) } else { grid[best + 1] };
        let z = golden_section(|z| at(z, self), lo, hi, ALPHA_TOL);
        let (vz, vb) = (at(z, self), scores[best]);
        let z = if vz <= vb { z } else { grid[best] };
        (vz.min(vb), vec![dn[0], dn[1], quantize(z)])
    }

    /// Fits the shape parameters to a return series.
    pub fn calibrate(&mut self, x: &ReturnSeries) -> Result<CalibrationResult> {
        if x.len() < 50 * self.spec.memory {
            return Err(Error::Precondition("calibration needs T >= 50 M"));
        }
        let curves = EmpiricalCurves::from_series(x, &self.spec)?;
        self.calibrate_curves(&curves)
    }

    /// Fits the shape parameters to precomputed empirical curves.
    pub fn calibrate_curves(&mut self, curves: &EmpiricalCurves) -> Result<CalibrationResult> {
        curves.check(&self.spec)?;
        let keys: Vec<Vec<i64>> =
            grid_fractions().iter().map(|f| f.iter().map(|&v| quantize(logit(v))).collect()).collect();
        self.fill(&keys);
        let mut scored: Vec<(f64, usize)> =
            keys.iter().enumerate().map(|(k, key)| (self.profile(key, curves).0, k)).collect();
        let mut evaluations = scored.len();
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        if !scored[0].0.is_finite() {
            return Err(Error::NoFeasiblePoint);
        }
        let mut best: Option<(f64, Vec<i64>, bool)> = None;
        let nm = self.nelder_mead;
        for &(value, k) in scored.iter().take(STARTS) {
            if !value.is_finite() {
                break;
            }
            let mut start: Vec<f64> = keys[k].iter().map(|&v| v as f64 * QUANTUM).collect();
            // One restart from the first optimum guards against a collapsed simplex.
            let mut run = None;
            for _ in 0..2 {
                let r = nm.minimize(
                    |z| {
                        let dn: Vec<i64> = z.iter().map(|&v| quantize(v)).collect();
                        self.profile(&dn, curves).0
                    },
                    &start,
                );
                evaluations += r.evaluations;
                start = r.point.clone();
                run = Some(r);
            }
            let run = run.expect("at least one run");
            let dn: Vec<i64> = run.point.iter().map(|&v| quantize(v)).collect();
            let (value, key) = self.profile(&dn, curves);
            if best.as_ref().map_or(true, |b| value < b.0) {
                best = Some((value, key, run.converged));
            }
        }
        let (objective_value, key, converged) = best.ok_or(Error::NoFeasiblePoint)?;
        let residuals = self.residuals(&key, curves)?;
        Ok(CalibrationResult {
            theta_hat: to_theta(&key, &self.spec),
            beta_hat: None,
            objective_value,
            evaluations,
            converged,
            residuals,
        })
    }
}

/// Shape calibration of a single series.
pub fn calibrate_theta(x: &ReturnSeries, spec: &ObjectiveSpec) -> Result<CalibrationResult> {
    Calibrator::new(spec.clone())?.calibrate(x)
}

// e_q(1) = E[a^q] E|Y|^q at unit scale.
fn unit_abs_moment(q: f64, theta: &Theta) -> Result<f64> {
    let mixture = unit_mixture(theta.alpha);
    if let Some(alpha) = mixture.tail_index() {
        if q >= alpha {
            return Err(Error::MomentDiverges { order: q, tail_index: alpha });
        }
    }
    Ok(a_power_moment(q, theta.nu, theta.d, crate::DEFAULT_EPS)?.value * endo_abs_moment(q, &mixture)?)
}

/// Scale estimate matching `E|X|^q = e_q(1) beta^q` to the sample moments.
/// An infinite `alpha` in `theta_hat` returns the point-mixture `sigma0`.
pub fn calibrate_beta(x: &ReturnSeries, theta_hat: &Theta, orders: &[f64]) -> Result<f64> {
    if orders.is_empty() || orders.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
        return Err(Error::InvalidParameter("moment orders must be positive and finite"));
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("empty series"));
    }
    let n = x.len() as f64;
    let mut ratios = Vec::with_capacity(orders.len());
    for &q in orders {
        let sample = x.values().iter().map(|v| v.abs().powf(q)).sum::<f64>() / n;
        if !(sample > 0.0) {
            return Err(Error::ZeroVariance);
        }
        ratios.push((q, sample / unit_abs_moment(q, theta_hat)?));
    }
    let singles: Vec<f64> = ratios.iter().map(|&(q, r)| r.powf(1.0 / q)).collect();
    if singles.len() == 1 {
        return Ok(singles[0]);
    }
    // Each term (1 - r_q / beta^q)^2 is unimodal in ln(beta) with its
    // minimum at the single-order solution, so the optimum is bracketed.
    let loss = |ln_b: f64| ratios.iter().map(|&(q, r)| (1.0 - r * (-q * ln_b).exp()).powi(2)).sum::<f64>();
    let lo = singles.iter().copied().fold(f64::INFINITY, f64::min).ln();
    let hi = singles.iter().copied().fold(0.0, f64::max).ln();
    Ok(golden_section(loss, lo, hi, 1e-14).exp())
}

fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
