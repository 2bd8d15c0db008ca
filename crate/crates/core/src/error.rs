use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Conditioning on `X > level` where `P(X > level) = 0`.
    #[error("tail probability at conditioning level {level} is zero")]
    UnreachableTail { level: f64 },

    #[error("parameter `{name}` = {value} is outside its admissible range")]
    Parameter { name: &'static str, value: f64 },

    #[error("mixing weights: expected {expected} entries, got {got}")]
    WeightCount { expected: usize, got: usize },

    #[error("walk length n = {n} is not supported here ({reason})")]
    WalkLength { n: usize, reason: &'static str },

    #[error("integral term {index} diverges")]
    Divergent { index: usize },

    #[error("estimator configuration: {0}")]
    Config(&'static str),
}

pub(crate) fn check_param(name: &'static str, value: f64, ok: bool) -> Result<f64> {
    if ok && !value.is_nan() {
        Ok(value)
    } else {
        Err(Error::Parameter { name, value })
    }
}
