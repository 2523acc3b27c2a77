use thiserror::Error;

/// Errors produced by the models, the simulator and the optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// `K²/Dp ≤ Rc`: no passive load can reach matched damping.
    #[error("no physical optimum load: K²/Dp = {matched_resistance} Ω does not exceed coil resistance {coil_resistance} Ω")]
    NonPhysicalOptimum {
        matched_resistance: f64,
        coil_resistance: f64,
    },

    #[error("simulation did not converge within {cycles} cycles (last relative change {last_change:e})")]
    NoConvergence { cycles: usize, last_change: f64 },

    #[error("cannot fit a line: all load currents coincide")]
    DegenerateFit,

    #[error("load grid is empty or malformed: {0}")]
    EmptyGrid(String),

    /// The coarse scan was monotone; the better endpoint is carried along.
    #[error("no interior optimum in [{lower}, {upper}] Ω; best endpoint {best_load} Ω")]
    NoInteriorOptimum {
        lower: f64,
        upper: f64,
        best_load: f64,
        best_power: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and >= 0, got {value}"),
        })
    }
}
