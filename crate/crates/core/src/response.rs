//! Probe susceptibility from the |3⟩ amplitude, plus the closed-form steady,
//! nonlinear and series limits.
//!
//! The normalized susceptibility is chi_norm = a₃/Ω_p* (seconds), i.e. χ₃₁ in
//! units of 2N|μ₃₁|²/(ε₀ħ). Multiplying by Γ₃ gives a dimensionless number,
//! the default reporting unit.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::asymptotic::weak_solution;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{DecayRates, MediumConstants, RabiFields, I};
use crate::transient::{steady_denominator, validate_grid, ModeDecomposition};

/// Unit for reported susceptibility values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChiUnit {
    /// Γ₃·chi_norm
    #[default]
    Dimensionless,
    /// chi_norm in seconds
    Normalized,
    /// SI value, needs medium constants
    Absolute,
}

impl fmt::Display for ChiUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChiUnit::Dimensionless => "dimensionless",
            ChiUnit::Normalized => "normalized",
            ChiUnit::Absolute => "absolute",
        })
    }
}

impl FromStr for ChiUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimensionless" => Ok(ChiUnit::Dimensionless),
            "normalized" => Ok(ChiUnit::Normalized),
            "absolute" => Ok(ChiUnit::Absolute),
            other => Err(Error::InvalidParameter(format!(
                "unknown unit '{other}' (expected dimensionless, normalized or absolute)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilitySample {
    pub t: f64,
    /// a₃/Ω_p*, seconds
    pub chi_norm: Complex64,
    /// Γ₃·chi_norm
    pub chi_dimensionless: Complex64,
    /// SI susceptibility when medium constants were supplied
    pub chi_absolute: Option<Complex64>,
}

impl SusceptibilitySample {
    /// Value in `unit`; `None` for absolute units without medium constants.
    pub fn value(&self, unit: ChiUnit) -> Option<Complex64> {
        match unit {
            ChiUnit::Dimensionless => Some(self.chi_dimensionless),
            ChiUnit::Normalized => Some(self.chi_norm),
            ChiUnit::Absolute => self.chi_absolute,
        }
    }
}

/// Susceptibility sample at time `t` for the amplitude `a3`.
pub fn chi_from_a3(
    t: f64,
    a3: Complex64,
    decay: &DecayRates,
    fields: &RabiFields,
    constants: Option<&MediumConstants>,
) -> Result<SusceptibilitySample> {
    if fields.omega_p.norm() == 0.0 {
        return Err(Error::ZeroProbe);
    }
    let chi_norm = a3 / fields.omega_p.conj();
    Ok(SusceptibilitySample {
        t,
        chi_norm,
        chi_dimensionless: chi_norm * decay.gamma3,
        chi_absolute: constants.map(|k| chi_norm * k.chi_unit()),
    })
}

/// Susceptibility along the exact transient on `grid`.
pub fn exact_chi_trace(
    decay: &DecayRates,
    fields: &RabiFields,
    grid: &[f64],
    constants: Option<&MediumConstants>,
    exec: Execution,
) -> Result<Vec<SusceptibilitySample>> {
    if fields.omega_p.norm() == 0.0 {
        return Err(Error::ZeroProbe);
    }
    validate_grid(grid)?;
    let modes = ModeDecomposition::new(decay, fields)?;
    exec.try_map(grid, |&t| {
        chi_from_a3(t, modes.evolve(t).a3, decay, fields, constants)
    })
}

/// Susceptibility along the weak-signal closed form on `grid`.
pub fn weak_chi_trace(
    decay: &DecayRates,
    fields: &RabiFields,
    grid: &[f64],
    constants: Option<&MediumConstants>,
    force: bool,
) -> Result<Vec<SusceptibilitySample>> {
    if fields.omega_p.norm() == 0.0 {
        return Err(Error::ZeroProbe);
    }
    validate_grid(grid)?;
    let sol = weak_solution(decay, fields, force)?;
    grid.iter()
        .map(|&t| chi_from_a3(t, sol.a3(t), decay, fields, constants))
        .collect()
}

fn checked_denominator(decay: &DecayRates, fields: &RabiFields) -> Result<f64> {
    decay.check_finite()?;
    fields.check_finite()?;
    let d = steady_denominator(decay, fields);
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::SingularSteadyState)
    }
}

/// Steady chi_norm i(|Ω₂₄|² + γ₂₁Γ₄)/D, valid in every regime.
pub fn weak_steady_chi(decay: &DecayRates, fields: &RabiFields) -> Result<Complex64> {
    let d = checked_denominator(decay, fields)?;
    let num = fields.omega_24.norm_sqr() + decay.gamma21 * decay.gamma4;
    Ok(I * num / d)
}

/// Nonlinear part |Ω₂₄|²/(|Ω_c|²Γ₄ + |Ω₂₄|²Γ₃) of the steady absorption.
pub fn weak_nonlinear_chi3(decay: &DecayRates, fields: &RabiFields) -> f64 {
    let s = fields.omega_24.norm_sqr();
    if s == 0.0 {
        return 0.0;
    }
    s / (fields.omega_c.norm_sqr() * decay.gamma4 + s * decay.gamma3)
}

/// Leading weak-signal form (1/Γ₄)|Ω₂₄/Ω_c|².
pub fn weak_nonlinear_chi3_reduced(decay: &DecayRates, fields: &RabiFields) -> f64 {
    fields.omega_24.norm_sqr() / (fields.omega_c.norm_sqr() * decay.gamma4)
}

/// Two-level absorption 1/Γ in the same units; the driving field cancels.
pub fn two_level_chi1(gamma: f64) -> f64 {
    1.0 / gamma
}

/// Exact steady chi_norm together with the strong-signal geometric series
/// (i/Γ₃)Σ_{k<n}(−|Ω_c|²Γ₄/(|Ω₂₄|²Γ₃))^k.
pub fn strong_steady_chi(
    decay: &DecayRates,
    fields: &RabiFields,
    n_terms: usize,
) -> Result<(Complex64, Complex64)> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be at least 1".into()));
    }
    let exact = weak_steady_chi(decay, fields)?;
    let s = fields.omega_24.norm_sqr();
    let ratio = if s == 0.0 {
        f64::INFINITY
    } else {
        fields.omega_c.norm_sqr() * decay.gamma4 / (s * decay.gamma3)
    };
    if ratio >= 1.0 {
        return Err(Error::SeriesDivergent { ratio });
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..n_terms {
        sum += term;
        term *= -ratio;
    }
    Ok((exact, I * sum / decay.gamma3))
}
