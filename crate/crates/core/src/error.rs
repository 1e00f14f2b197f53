use thiserror::Error;

/// Failures raised by the engine.
///
/// `Consistency` marks an identity that should hold exactly but did not; callers
/// treat it as fatal and report the offending object.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("fixed-point index {0} out of range")]
    FixedPoint(usize),
    #[error("series operation needs {0}")]
    Series(&'static str),
    #[error("pole of order {order} at q-degree {degree} exceeds the bound")]
    PoleBound { degree: usize, order: usize },
    #[error("divergent limit at z = infinity in q-degree {0}")]
    DivergentLimit(usize),
    #[error("unstable moduli space (g = {g}, n = {n})")]
    Unstable { g: usize, n: usize },
    #[error("genus {0} is outside the supported Hodge-integral range")]
    GenusScope(usize),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
