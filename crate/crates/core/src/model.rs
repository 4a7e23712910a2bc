//! Level scheme parameters and the driven linear system for (a₂, a₃, a₄).
//!
//! Levels |1⟩, |2⟩ are ground states and |3⟩, |4⟩ excited states. The probe
//! drives |1⟩–|3⟩, the coupling beam |2⟩–|3⟩ and the signal |2⟩–|4⟩, all on
//! resonance. The ground amplitude a₁ is held at 1, which leaves a 3×3
//! inhomogeneous linear system
//!
//! ```text
//! d/dt (a₂, a₃, a₄)ᵀ = M (a₂, a₃, a₄)ᵀ + (0, iΩ_p*/2, 0)ᵀ
//! ```
//!
//! All rates and Rabi frequencies are angular rates in rad/s, time is in
//! seconds.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Default ratio used to decide whether a field is "much smaller" than another.
pub const DEFAULT_R_WEAK: f64 = 0.2;

/// Relaxation constants of the level scheme, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    /// Ground-state coherence dephasing |1⟩–|2⟩.
    pub gamma21: f64,
    /// Spontaneous decay of |3⟩.
    pub gamma3: f64,
    /// Spontaneous decay of |4⟩.
    pub gamma4: f64,
}

impl DecayRates {
    /// Sodium D-line values used for the published figures.
    pub const SODIUM: DecayRates = DecayRates {
        gamma21: 3e6,
        gamma3: 1.2e8,
        gamma4: 2.5e8,
    };

    pub fn new(gamma21: f64, gamma3: f64, gamma4: f64) -> Result<Self> {
        let rates = DecayRates {
            gamma21,
            gamma3,
            gamma4,
        };
        rates.validate()?;
        Ok(rates)
    }

    pub fn validate(&self) -> Result<()> {
        self.check_finite()?;
        if self.gamma21 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma21 must be ≥ 0, got {}",
                self.gamma21
            )));
        }
        if self.gamma3 <= 0.0 || self.gamma4 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "excited-state decay rates must be > 0, got Γ₃={} Γ₄={}",
                self.gamma3, self.gamma4
            )));
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if [self.gamma21, self.gamma3, self.gamma4]
            .iter()
            .all(|x| x.is_finite())
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter("decay rates must be finite".into()))
        }
    }

    pub fn max(&self) -> f64 {
        self.gamma21.max(self.gamma3).max(self.gamma4)
    }

    pub fn min(&self) -> f64 {
        self.gamma21.min(self.gamma3).min(self.gamma4)
    }

    /// Smallest strictly positive rate; sets the slowest possible relaxation.
    pub fn min_positive(&self) -> f64 {
        [self.gamma21, self.gamma3, self.gamma4]
            .into_iter()
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Complex Rabi frequencies of the coupling, probe and signal beams, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiFields {
    pub omega_c: Complex64,
    pub omega_p: Complex64,
    pub omega_24: Complex64,
}

impl RabiFields {
    pub fn new(omega_c: Complex64, omega_p: Complex64, omega_24: Complex64) -> Result<Self> {
        let f = RabiFields {
            omega_c,
            omega_p,
            omega_24,
        };
        f.check_finite()?;
        Ok(f)
    }

    /// All-real fields.
    pub fn real(omega_c: f64, omega_p: f64, omega_24: f64) -> Self {
        RabiFields {
            omega_c: omega_c.into(),
            omega_p: omega_p.into(),
            omega_24: omega_24.into(),
        }
    }

    /// Fields given as (magnitude, phase in radians) pairs.
    pub fn from_polar(c: (f64, f64), p: (f64, f64), s: (f64, f64)) -> Result<Self> {
        Self::new(
            Complex64::from_polar(c.0, c.1),
            Complex64::from_polar(p.0, p.1),
            Complex64::from_polar(s.0, s.1),
        )
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if [self.omega_c, self.omega_p, self.omega_24]
            .iter()
            .all(|z| z.is_finite())
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "Rabi frequencies must be finite".into(),
            ))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.omega_c
            .norm()
            .max(self.omega_p.norm())
            .max(self.omega_24.norm())
    }

    pub fn with_probe(self, omega_p: Complex64) -> Self {
        RabiFields { omega_p, ..self }
    }
}

/// Probability amplitudes of |2⟩, |3⟩, |4⟩ (a₁ ≡ 1).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Amplitudes {
    pub a2: Complex64,
    pub a3: Complex64,
    pub a4: Complex64,
}

impl Amplitudes {
    pub const ZERO: Amplitudes = Amplitudes {
        a2: Complex64::new(0.0, 0.0),
        a3: Complex64::new(0.0, 0.0),
        a4: Complex64::new(0.0, 0.0),
    };

    pub fn new(a2: Complex64, a3: Complex64, a4: Complex64) -> Self {
        Amplitudes { a2, a3, a4 }
    }

    pub fn from_array(v: [Complex64; 3]) -> Self {
        Amplitudes {
            a2: v[0],
            a3: v[1],
            a4: v[2],
        }
    }

    pub fn to_array(self) -> [Complex64; 3] {
        [self.a2, self.a3, self.a4]
    }

    /// Euclidean norm √(|a₂|² + |a₃|² + |a₄|²).
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a2.norm_sqr() + self.a3.norm_sqr() + self.a4.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.a2.is_finite() && self.a3.is_finite() && self.a4.is_finite()
    }
}

impl Add for Amplitudes {
    type Output = Amplitudes;
    fn add(self, rhs: Amplitudes) -> Amplitudes {
        Amplitudes::new(self.a2 + rhs.a2, self.a3 + rhs.a3, self.a4 + rhs.a4)
    }
}

impl Sub for Amplitudes {
    type Output = Amplitudes;
    fn sub(self, rhs: Amplitudes) -> Amplitudes {
        Amplitudes::new(self.a2 - rhs.a2, self.a3 - rhs.a3, self.a4 - rhs.a4)
    }
}

impl Mul<Complex64> for Amplitudes {
    type Output = Amplitudes;
    fn mul(self, k: Complex64) -> Amplitudes {
        Amplitudes::new(self.a2 * k, self.a3 * k, self.a4 * k)
    }
}

/// Coefficient matrix and constant forcing of the reduced amplitude equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemMatrix {
    pub m: [[Complex64; 3]; 3],
    pub forcing: [Complex64; 3],
}

impl SystemMatrix {
    /// m·a + forcing.
    pub fn derivative(&self, a: &[Complex64; 3]) -> [Complex64; 3] {
        let mut out = self.forcing;
        for (row, o) in self.m.iter().zip(out.iter_mut()) {
            *o += row[0] * a[0] + row[1] * a[1] + row[2] * a[2];
        }
        out
    }

    /// Frobenius norm of m.
    pub fn norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Build the coefficient matrix and forcing vector of the reduced system.
///
/// Only finiteness is checked, so a zero rate set yields the zero matrix.
pub fn build_system(decay: &DecayRates, fields: &RabiFields) -> Result<SystemMatrix> {
    decay.check_finite()?;
    fields.check_finite()?;
    let zero = Complex64::new(0.0, 0.0);
    let half_i = I * 0.5;
    let m = [
        [
            Complex64::from(-decay.gamma21 / 2.0),
            half_i * fields.omega_c,
            half_i * fields.omega_24,
        ],
        [
            half_i * fields.omega_c.conj(),
            Complex64::from(-decay.gamma3 / 2.0),
            zero,
        ],
        [
            half_i * fields.omega_24.conj(),
            zero,
            Complex64::from(-decay.gamma4 / 2.0),
        ],
    ];
    let forcing = [zero, half_i * fields.omega_p.conj(), zero];
    Ok(SystemMatrix { m, forcing })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    WeakSignal,
    StrongSignal,
    General,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::WeakSignal => "weak-signal",
            Regime::StrongSignal => "strong-signal",
            Regime::General => "general",
        })
    }
}

/// Classify parameters with the default threshold [`DEFAULT_R_WEAK`].
pub fn validate_regime(decay: &DecayRates, fields: &RabiFields) -> Regime {
    classify_regime(decay, fields, DEFAULT_R_WEAK)
}

/// Weak signal: |Ω₂₄| ≤ r|Ω_c|. Strong signal: |Ω_c| ≤ r|Ω₂₄|. Both also
/// need max(|Ω_p|, γ₂₁) ≤ r|Ω_c| (weak probe, slow ground dephasing).
///
/// Γ₃ and Γ₄ are not compared with the fields: the limiting closed forms are
/// exact in Ω₂₄ → 0 (resp. Ω_c → 0), γ₂₁ → 0 for any excited-state widths.
pub fn classify_regime(decay: &DecayRates, fields: &RabiFields, r_weak: f64) -> Regime {
    let c = fields.omega_c.norm();
    let s = fields.omega_24.norm();
    let small = fields.omega_p.norm().max(decay.gamma21) <= r_weak * c;
    if !small || c == 0.0 {
        return Regime::General;
    }
    if s <= r_weak * c {
        Regime::WeakSignal
    } else if c <= r_weak * s {
        Regime::StrongSignal
    } else {
        Regime::General
    }
}

/// Number density and dipole moment needed for susceptibility in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumConstants {
    /// Atoms per m³.
    pub atom_density: f64,
    /// |μ₃₁| in C·m.
    pub dipole_31: f64,
}

impl MediumConstants {
    pub fn new(atom_density: f64, dipole_31: f64) -> Result<Self> {
        if !(atom_density.is_finite() && atom_density > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "atom density must be > 0, got {atom_density}"
            )));
        }
        if !(dipole_31.is_finite() && dipole_31 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dipole moment must be > 0, got {dipole_31}"
            )));
        }
        Ok(MediumConstants {
            atom_density,
            dipole_31,
        })
    }

    /// 2N|μ₃₁|²/(ε₀ħ), the unit the normalized susceptibility is measured in.
    pub fn chi_unit(&self) -> f64 {
        2.0 * self.atom_density * self.dipole_31 * self.dipole_31 / (EPSILON_0 * HBAR)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_inputs_give_zero_system() {
        let decay = DecayRates {
            gamma21: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
        };
        let sys = build_system(&decay, &RabiFields::real(0.0, 0.0, 0.0)).unwrap();
        assert!(sys.m.iter().flatten().all(|z| *z == c(0.0, 0.0)));
        assert!(sys.forcing.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn reference_parameters_build_expected_entries() {
        let sys =
            build_system(&DecayRates::SODIUM, &RabiFields::real(4.8e8, 4.8e6, 4.8e7)).unwrap();
        assert_eq!(sys.m[0][0], c(-1.5e6, 0.0));
        assert_eq!(sys.m[1][1], c(-6e7, 0.0));
        assert_eq!(sys.m[2][2], c(-1.25e8, 0.0));
        assert_eq!(sys.m[0][1], c(0.0, 2.4e8));
        assert_eq!(sys.m[0][2], c(0.0, 2.4e7));
        assert_eq!(sys.forcing[1], c(0.0, 2.4e6));
        assert_eq!(sys.forcing[0], c(0.0, 0.0));
        assert_eq!(sys.forcing[2], c(0.0, 0.0));
    }

    #[test]
    fn off_diagonal_is_i_times_hermitian() {
        let fields = RabiFields::new(c(1.0e8, -3.0e7), c(2.0e6, 1.0e6), c(-4.0e7, 5.0e7)).unwrap();
        let sys = build_system(&DecayRates::SODIUM, &fields).unwrap();
        assert_eq!(sys.m[1][2], c(0.0, 0.0));
        assert_eq!(sys.m[2][1], c(0.0, 0.0));
        assert_eq!(sys.m[0][1], I * 0.5 * fields.omega_c);
        assert_eq!(sys.m[1][0], I * 0.5 * fields.omega_c.conj());
        // H = (m - D)/i must be Hermitian.
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(sys.m[i][i].im, 0.0);
                    continue;
                }
                let hij = sys.m[i][j] / I;
                let hji = sys.m[j][i] / I;
                assert!((hij - hji.conj()).norm() <= 1e-9 * hij.norm().max(1.0));
            }
        }
        assert_eq!(sys.forcing[1], I * 0.5 * fields.omega_p.conj());
    }

    #[test]
    fn rejects_non_finite() {
        let bad = RabiFields::real(f64::NAN, 0.0, 0.0);
        assert!(build_system(&DecayRates::SODIUM, &bad).is_err());
        let decay = DecayRates {
            gamma21: f64::INFINITY,
            ..DecayRates::SODIUM
        };
        assert!(build_system(&decay, &RabiFields::real(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn decay_rate_invariants() {
        assert!(DecayRates::new(0.0, 1.0, 1.0).is_ok());
        assert!(DecayRates::new(-1.0, 1.0, 1.0).is_err());
        assert!(DecayRates::new(0.0, 0.0, 1.0).is_err());
        assert!(DecayRates::new(0.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn regime_examples() {
        let g3 = DecayRates::SODIUM.gamma3;
        let oc = 4.0 * g3;
        let weak = RabiFields::real(oc, 0.01 * oc, 0.1 * oc);
        assert_eq!(
            validate_regime(&DecayRates::SODIUM, &weak),
            Regime::WeakSignal
        );

        let equal = RabiFields::real(oc, 0.01 * oc, oc);
        assert_eq!(
            validate_regime(&DecayRates::SODIUM, &equal),
            Regime::General
        );

        let s = 40.0 * g3;
        let strong = RabiFields::real(0.1 * s, 0.01 * s, s);
        assert_eq!(
            validate_regime(&DecayRates::SODIUM, &strong),
            Regime::StrongSignal
        );
    }

    #[test]
    fn regime_depends_on_magnitudes_only() {
        let a = RabiFields::real(1e8, 1e6, 1e7);
        let b = RabiFields::from_polar((1e8, 1.3), (1e6, -0.4), (1e7, 2.9)).unwrap();
        assert_eq!(
            validate_regime(&DecayRates::SODIUM, &a),
            validate_regime(&DecayRates::SODIUM, &b)
        );
    }

    #[test]
    fn chi_unit_positive() {
        let k = MediumConstants::new(1e17, 2.1e-29).unwrap();
        assert!(k.chi_unit() > 0.0);
        assert!(MediumConstants::new(0.0, 1.0).is_err());
    }
}
