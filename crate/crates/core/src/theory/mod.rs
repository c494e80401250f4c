//! Theoretical statistics of the model.

mod acf;
mod density;
mod moments;
mod scaling;

pub use acf::{
    acf_decay_rate, acf_modulating, acf_modulating_curve, acf_returns, acf_returns_curve, endo_acf2_curve,
    ReturnsAcfCoefficients,
};
pub use density::{longmem_vol_cdf, longmem_vol_pdf, marginal_pdf, tail_constant, MarginalDensity};
pub use moments::{moment_ratio, moment_ratio_curve, MomentEngine, DEFAULT_BUDGET};
pub use scaling::{hurst_fit, small_nu_moment_limit, ScalingFit};

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Theoretical,
    Empirical,
}

/// `m_q(t)` over a grid of aggregation horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurve {
    pub q: f64,
    pub ts: Vec<usize>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    pub error_bounds: Option<Vec<f64>>,
}

impl MomentCurve {
    /// Value at horizon `t`, if the grid contains it.
    pub fn at(&self, t: usize) -> Option<f64> {
        self.ts.iter().position(|&s| s == t).map(|k| self.values[k])
    }
}

/// `r_q(t)` over a grid of separations (`t = 1` is zero lag).
#[derive(Debug, Clone, PartialEq)]
pub struct AcfCurve {
    pub q: f64,
    pub ts: Vec<usize>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl AcfCurve {
    pub fn at(&self, t: usize) -> Option<f64> {
        self.ts.iter().position(|&s| s == t).map(|k| self.values[k])
    }
}
