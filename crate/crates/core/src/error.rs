use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("moment of order {order} diverges for tail index {tail_index}")]
    MomentDiverges { order: f64, tail_index: f64 },
    #[error("series over the restart chain is numerically unstable: {0}")]
    SeriesUnstable(&'static str),
    #[error("evaluation budget exceeded: {needed} > {budget} state updates")]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("modulating factor has zero variance (D = 1/2 or nu = 1)")]
    DegenerateModulation,
    #[error("operation not supported for a point volatility mixture")]
    UnsupportedMixture,
    #[error("non-positive price {value} at index {index}")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("no feasible point in the parameter box")]
    NoFeasiblePoint,
    #[error("window of width {width} exceeds the exchangeable range M + 1 = {limit}")]
    WindowTooWide { width: usize, limit: usize },
}

impl Error {
    /// True for failures caused by the numbers rather than by the inputs'
    /// shape (divergent moments, unstable series, exhausted budgets).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::MomentDiverges { .. }
                | Error::SeriesUnstable(_)
                | Error::BudgetExceeded { .. }
                | Error::DegenerateModulation
                | Error::ZeroVariance
                | Error::NoFeasiblePoint
        )
    }
}
