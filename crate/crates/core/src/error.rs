use thiserror::Error;

use crate::model::Regime;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cubic root polishing failed: residual {residual:.3e} exceeds bound (rescale units)")]
    DegenerateCubic { residual: f64 },

    #[error("steady state is singular: |Ω_c|²Γ₄ + γ₂₁Γ₃Γ₄ + |Ω₂₄|²Γ₃ = 0")]
    SingularSteadyState,

    #[error("system matrix is defective at λ = {re:.6e}{im:+.6e}i (no complete eigenbasis)")]
    DefectiveMatrix { re: f64, im: f64 },

    #[error("coupling Rabi frequency Ω_c is zero; dark-state initial condition undefined")]
    ZeroCoupling,

    #[error("mode matrix is ill-conditioned (condition number {cond:.3e})")]
    IllConditionedModes { cond: f64 },

    #[error("closed form requires the {required} regime but parameters are {actual} (use force to override)")]
    RegimeViolation { required: Regime, actual: Regime },

    #[error("probe Rabi frequency Ω_p is zero; susceptibility undefined")]
    ZeroProbe,

    #[error("strong-signal series diverges: ratio {ratio:.4} ≥ 1")]
    SeriesDivergent { ratio: f64 },

    #[error("integrator step too large: dt·(max rate + max |Ω|) = {product:.4} > {limit}")]
    StepTooLarge { product: f64, limit: f64 },

    #[error("eigenvalue refinement did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateCubic { .. }
                | Error::DefectiveMatrix { .. }
                | Error::IllConditionedModes { .. }
                | Error::NoConvergence { .. }
        )
    }
}
