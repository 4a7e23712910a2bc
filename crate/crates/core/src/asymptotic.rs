//! Closed-form limiting solutions for a weak (|Ω₂₄| ≪ |Ω_c|) and a strong
//! (|Ω₂₄| ≫ |Ω_c|) signal field.
//!
//! These keep the leading-order eigenvalues and mode coefficients only. They
//! are deliberately separate from [`crate::transient`], which is exact, so
//! their accuracy can be measured against it.
//!
//! Both forms stay finite below the oscillation threshold (4|Ω_c|² < Γ₃²,
//! resp. 4|Ω₂₄|² < Γ₄²), where the generalized Rabi frequency is imaginary and
//! the trigonometric factors continue into hyperbolic ones. Terms of the form
//! sin(Ωt/4)/Ω are evaluated through an entire function of Ω² so the Ω → 0
//! point is regular.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    classify_regime, Amplitudes, DecayRates, RabiFields, Regime, DEFAULT_R_WEAK, I,
};
use crate::transient::steady_state;

/// Below this |Ωt| the sinc-type factors switch to their Taylor series.
const SMALL_PHASE: f64 = 1e-4;

/// e^{-at}·cos(y) and e^{-at}·sin(y)/y for y² = `y_sq` (real, either sign).
///
/// For y² < 0 these are e^{-at}cosh|y| and e^{-at}sinh|y|/|y|, combined into
/// single exponentials so that large t cannot overflow.
fn damped_trig(at: f64, y_sq: f64) -> (f64, f64) {
    let small = y_sq.abs() < (SMALL_PHASE / 4.0).powi(2);
    if small {
        let e = (-at).exp();
        let cos = 1.0 - y_sq / 2.0 + y_sq * y_sq / 24.0;
        let sinc = 1.0 - y_sq / 6.0 + y_sq * y_sq / 120.0;
        return (e * cos, e * sinc);
    }
    if y_sq > 0.0 {
        let y = y_sq.sqrt();
        let e = (-at).exp();
        (e * y.cos(), e * y.sin() / y)
    } else {
        let s = (-y_sq).sqrt();
        let up = (s - at).exp();
        let down = (-s - at).exp();
        (0.5 * (up + down), 0.5 * (up - down) / s)
    }
}

/// (e^z − 1)/z
fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut acc = Complex64::new(1.0, 0.0);
        for k in (2..=18).rev() {
            acc = 1.0 + acc * z / k as f64;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Divided difference of e^{λt} at (x, y).
fn exp_divided(x: Complex64, y: Complex64, t: f64) -> Complex64 {
    (y * t).exp() * t * exprel((x - y) * t)
}

/// Divided difference of e^{λt}/(α + 2λ) at (x, y).
fn ratio_divided(alpha: f64, x: Complex64, y: Complex64, t: f64) -> Complex64 {
    let dx = alpha + 2.0 * x;
    let dy = alpha + 2.0 * y;
    (dy * exp_divided(x, y, t) - 2.0 * (y * t).exp()) / (dx * dy)
}

fn check_regime(
    decay: &DecayRates,
    fields: &RabiFields,
    required: Regime,
    force: bool,
) -> Result<()> {
    let actual = classify_regime(decay, fields, DEFAULT_R_WEAK);
    if force || actual == required {
        Ok(())
    } else {
        Err(Error::RegimeViolation { required, actual })
    }
}

/// Leading-order solution for |Ω₂₄| ≪ |Ω_c|, γ₂₁ ≪ Γ₃.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakSignalSolution {
    /// Ω² = 4|Ω_c|² − Γ₃²; negative below the oscillation threshold.
    pub omega_sq: f64,
    /// −Γ₄/2, (−Γ₃ + iΩ)/4, (−Γ₃ − iΩ)/4
    pub lambdas: [Complex64; 3],
    /// Exact steady amplitudes the transient relaxes to.
    pub steady: Amplitudes,
    gamma3: f64,
    gamma4: f64,
    omega_c: Complex64,
    omega_24: Complex64,
    // (Γ₄/2 − Γ₃/4)² + Ω²/16
    a4_den: f64,
}

impl WeakSignalSolution {
    /// Generalized Rabi frequency Ω (purely imaginary below threshold).
    pub fn omega(&self) -> Complex64 {
        Complex64::new(self.omega_sq, 0.0).sqrt()
    }

    /// Period 8π/Ω of the transient oscillation; `None` when Ω² ≤ 0.
    pub fn period(&self) -> Option<f64> {
        (self.omega_sq > 0.0).then(|| 8.0 * std::f64::consts::PI / self.omega_sq.sqrt())
    }

    /// Mode coefficients a₂⁽ⁿ⁾(0) = (0, −C, C) with C = 4a₃ₛλ₂λ₃/(Ω_c*Ω).
    /// Not finite at Ω = 0, where the closed-form amplitudes remain regular.
    pub fn coefficients(&self) -> [Complex64; 3] {
        let c3 = 4.0 * self.steady.a3 * self.lambdas[1] * self.lambdas[2]
            / (self.omega_c.conj() * self.omega());
        [Complex64::new(0.0, 0.0), -c3, c3]
    }

    fn trig(&self, t: f64) -> (f64, f64) {
        damped_trig(self.gamma3 * t / 4.0, self.omega_sq * t * t / 16.0)
    }

    pub fn a3(&self, t: f64) -> Complex64 {
        let (cos, sinc) = self.trig(t);
        // e^{-Γ₃t/4}[cos(Ωt/4) − (Γ₃/Ω) sin(Ωt/4)]
        let bracket = cos - self.gamma3 * (t / 4.0) * sinc;
        self.steady.a3 * (1.0 - bracket)
    }

    pub fn a2(&self, t: f64) -> Complex64 {
        let (_, sinc) = self.trig(t);
        -2.0 * I * self.steady.a3 * self.omega_c * (t / 4.0) * sinc + self.steady.a2
    }

    pub fn a4(&self, t: f64) -> Complex64 {
        let (cos, sinc) = self.trig(t);
        let k = self.gamma4 / 2.0 - self.gamma3 / 4.0;
        let e4 = (-self.gamma4 * t / 2.0).exp();
        let transient = k * (t / 4.0) * sinc - cos / 4.0 + e4 / 4.0;
        self.steady.a3 * self.omega_24.conj() * self.omega_c / self.a4_den * transient
            + self.steady.a2 * (I * self.omega_24.conj() / self.gamma4) * (1.0 - e4)
    }

    pub fn amplitudes(&self, t: f64) -> Amplitudes {
        Amplitudes::new(self.a2(t), self.a3(t), self.a4(t))
    }
}

/// Weak-signal closed form. Refuses outside the weak regime unless `force`.
pub fn weak_solution(
    decay: &DecayRates,
    fields: &RabiFields,
    force: bool,
) -> Result<WeakSignalSolution> {
    decay.check_finite()?;
    fields.check_finite()?;
    check_regime(decay, fields, Regime::WeakSignal, force)?;
    let steady = steady_state(decay, fields)?.amps;
    let g3 = decay.gamma3;
    let g4 = decay.gamma4;
    let omega_sq = 4.0 * fields.omega_c.norm_sqr() - g3 * g3;
    let omega = Complex64::new(omega_sq, 0.0).sqrt();
    let lambdas = [
        Complex64::new(-g4 / 2.0, 0.0),
        (-g3 + I * omega) / 4.0,
        (-g3 - I * omega) / 4.0,
    ];
    let k = g4 / 2.0 - g3 / 4.0;
    let a4_den = k * k + omega_sq / 16.0;
    let scale = g3.max(g4).max(fields.omega_c.norm());
    if fields.omega_24.norm() > 0.0 && a4_den.abs() <= 1e-14 * scale * scale {
        // −Γ₄/2 coincides with one of the pair: the a₄ integral is secular
        return Err(Error::DefectiveMatrix {
            re: -g4 / 2.0,
            im: 0.0,
        });
    }
    Ok(WeakSignalSolution {
        omega_sq,
        lambdas,
        steady,
        gamma3: g3,
        gamma4: g4,
        omega_c: fields.omega_c,
        omega_24: fields.omega_24,
        a4_den,
    })
}

/// Leading-order solution for |Ω₂₄| ≫ |Ω_c|.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongSignalSolution {
    /// Ω′² = 4|Ω₂₄|² − Γ₄²
    pub omega_prime_sq: f64,
    /// −Γ₃/2, (−Γ₄ + iΩ′)/4, (−Γ₄ − iΩ′)/4
    pub lambdas: [Complex64; 3],
    pub steady: Amplitudes,
    gamma3: f64,
    gamma4: f64,
    omega_c: Complex64,
    omega_p: Complex64,
    omega_24: Complex64,
    // Ω_p*/Ω_c* + a₂ₛ
    excess: Complex64,
    // 2a₄ₛΩ₂₄ − (iΓ₄ + Ω′)·excess
    mix: Complex64,
    // amplitude of the e^{-Γ₃t/2} term fixing a₃(0) = 0
    a3_homogeneous: Complex64,
}

impl StrongSignalSolution {
    pub fn omega_prime(&self) -> Complex64 {
        Complex64::new(self.omega_prime_sq, 0.0).sqrt()
    }

    /// Mode coefficients a₂⁽ⁿ⁾(0): 0 for the |3⟩ mode, then the pair.
    /// Not finite at Ω′ = 0.
    pub fn coefficients(&self) -> [Complex64; 3] {
        let op = self.omega_prime();
        let c3 = (2.0 * self.steady.a4 * self.omega_24 - I * (self.gamma4 - I * op) * self.excess)
            / (2.0 * op);
        let c2 = (-2.0 * self.steady.a4 * self.omega_24 - 2.0 * self.steady.a2 * op
            + I * (self.gamma4 - I * op) * self.excess)
            / (2.0 * op)
            - self.omega_p.conj() / self.omega_c.conj();
        [Complex64::new(0.0, 0.0), c2, c3]
    }

    /// Steady a₃ reached at long times, i(Ω_c*a₂ₛ + Ω_p*)/Γ₃.
    pub fn a3_steady(&self) -> Complex64 {
        I * (self.omega_c.conj() * self.steady.a2 + self.omega_p.conj()) / self.gamma3
    }

    // iΩ_c*·Σₙ cₙ e^{λₙt}/(2λₙ + Γ₃), written through divided differences
    fn a3_modes(&self, t: f64) -> Complex64 {
        let (l2, l3) = (self.lambdas[1], self.lambdas[2]);
        let single = (l2 * t).exp() / (2.0 * l2 + self.gamma3);
        let pair = ratio_divided(self.gamma3, l2, l3, t);
        I * self.omega_c.conj() * (-self.excess * single - 0.25 * I * self.mix * pair)
    }

    pub fn a3(&self, t: f64) -> Complex64 {
        self.a3_homogeneous * (-self.gamma3 * t / 2.0).exp() + self.a3_modes(t) + self.a3_steady()
    }

    pub fn a2(&self, t: f64) -> Complex64 {
        let (l2, l3) = (self.lambdas[1], self.lambdas[2]);
        -self.excess * (l2 * t).exp() - 0.25 * I * self.mix * exp_divided(l2, l3, t)
            + self.steady.a2
    }

    pub fn a4(&self, t: f64) -> Complex64 {
        let (l2, l3) = (self.lambdas[1], self.lambdas[2]);
        let single = (l2 * t).exp() / (self.gamma4 + 2.0 * l2);
        let pair = ratio_divided(self.gamma4, l2, l3, t);
        I * self.omega_24.conj() * (-self.excess * single - 0.25 * I * self.mix * pair)
            + self.steady.a4
    }

    pub fn amplitudes(&self, t: f64) -> Amplitudes {
        Amplitudes::new(self.a2(t), self.a3(t), self.a4(t))
    }
}

/// Strong-signal closed form. Refuses outside the strong regime unless `force`.
pub fn strong_solution(
    decay: &DecayRates,
    fields: &RabiFields,
    force: bool,
) -> Result<StrongSignalSolution> {
    decay.check_finite()?;
    fields.check_finite()?;
    check_regime(decay, fields, Regime::StrongSignal, force)?;
    if fields.omega_c.norm() == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if fields.omega_24.norm() == 0.0 {
        return Err(Error::InvalidParameter(
            "strong-signal form needs a nonzero signal field".into(),
        ));
    }
    let steady = steady_state(decay, fields)?.amps;
    let g3 = decay.gamma3;
    let g4 = decay.gamma4;
    let omega_prime_sq = 4.0 * fields.omega_24.norm_sqr() - g4 * g4;
    let op = Complex64::new(omega_prime_sq, 0.0).sqrt();
    let lambdas = [
        Complex64::new(-g3 / 2.0, 0.0),
        (-g4 + I * op) / 4.0,
        (-g4 - I * op) / 4.0,
    ];
    let excess = fields.omega_p.conj() / fields.omega_c.conj() + steady.a2;
    let mix = 2.0 * steady.a4 * fields.omega_24 - (I * g4 + op) * excess;
    let mut sol = StrongSignalSolution {
        omega_prime_sq,
        lambdas,
        steady,
        gamma3: g3,
        gamma4: g4,
        omega_c: fields.omega_c,
        omega_p: fields.omega_p,
        omega_24: fields.omega_24,
        excess,
        mix,
        a3_homogeneous: Complex64::new(0.0, 0.0),
    };
    sol.a3_homogeneous = -(sol.a3_modes(0.0) + sol.a3_steady());
    if !sol.a3_homogeneous.is_finite() {
        return Err(Error::DefectiveMatrix {
            re: -g3 / 2.0,
            im: 0.0,
        });
    }
    Ok(sol)
}

/// Exchange the roles of |3⟩ and |4⟩: (Ω_c, Γ₃) ↔ (Ω₂₄, Γ₄).
pub fn reciprocity_swap(decay: &DecayRates, fields: &RabiFields) -> (DecayRates, RabiFields) {
    (
        DecayRates {
            gamma21: decay.gamma21,
            gamma3: decay.gamma4,
            gamma4: decay.gamma3,
        },
        RabiFields {
            omega_c: fields.omega_24,
            omega_p: fields.omega_p,
            omega_24: fields.omega_c,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::{self, multiset_distance};
    use crate::transient::ModeDecomposition;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const G3: f64 = 1.2e8;

    fn weak_fields(oc: f64) -> RabiFields {
        RabiFields::real(oc, 0.01 * oc, 0.1 * oc)
    }

    #[test]
    fn weak_initial_values() {
        let sol = weak_solution(&DecayRates::SODIUM, &weak_fields(4.0 * G3), false).unwrap();
        assert_eq!(sol.a3(0.0), c(0.0, 0.0));
        assert!(sol.a4(0.0).norm() < 1e-18);
        assert_eq!(sol.a2(0.0), sol.steady.a2);
    }

    #[test]
    fn weak_long_time_limits() {
        let decay = DecayRates::SODIUM;
        let fields = weak_fields(4.0 * G3);
        let sol = weak_solution(&decay, &fields, false).unwrap();
        let t = 1e-5;
        assert!((sol.a3(t) - sol.steady.a3).norm() < 1e-15);
        let a4_inf = I * fields.omega_24.conj() / decay.gamma4 * sol.steady.a2;
        assert!((sol.a4(t) - a4_inf).norm() <= 1e-12 * a4_inf.norm());
        // and this agrees with the exact steady value
        assert!((sol.a4(t) - sol.steady.a4).norm() <= 1e-12 * a4_inf.norm());
    }

    #[test]
    fn weak_zero_omega_limit() {
        let decay = DecayRates::SODIUM;
        let fields = weak_fields(G3 / 2.0);
        let sol = weak_solution(&decay, &fields, false).unwrap();
        assert_eq!(sol.omega_sq, 0.0);
        assert!(sol.period().is_none());
        for t in [1e-10, 1e-9, 5e-9, 3e-8] {
            let x = G3 * t / 4.0;
            let expected = sol.steady.a3 * (1.0 - (-x).exp() * (1.0 - x));
            assert!((sol.a3(t) - expected).norm() <= 1e-13 * sol.steady.a3.norm());
        }
    }

    #[test]
    fn weak_continuous_across_threshold() {
        let decay = DecayRates::SODIUM;
        let t = 2e-8;
        let at = |oc: f64| weak_solution(&decay, &weak_fields(oc), true).unwrap().a3(t);
        let mid = at(G3 / 2.0);
        let eps = 1e-9 * G3;
        let below = at(G3 / 2.0 - eps);
        let above = at(G3 / 2.0 + eps);
        assert!((below - mid).norm() < 1e-6 * mid.norm());
        assert!((above - mid).norm() < 1e-6 * mid.norm());
        // deep below threshold everything is finite
        let deep = weak_solution(&decay, &weak_fields(0.05 * G3), true).unwrap();
        assert!(deep.amplitudes(1e-3).is_finite());
    }

    #[test]
    fn weak_pair_solves_three_level_subsystem() {
        // γ₂₁ = 0, Ω₂₄ = 0: (a₂, a₃) must satisfy the Λ-system equations exactly.
        let decay = DecayRates {
            gamma21: 0.0,
            ..DecayRates::SODIUM
        };
        let oc = 3.0 * G3;
        let fields = RabiFields::real(oc, 0.01 * oc, 0.0);
        let sol = weak_solution(&decay, &fields, true).unwrap();
        let h = 1e-13;
        for t in [2e-9, 7e-9, 2e-8] {
            let a2 = sol.a2(t);
            let a3 = sol.a3(t);
            let d2 = (sol.a2(t + h) - sol.a2(t - h)) / (2.0 * h);
            let d3 = (sol.a3(t + h) - sol.a3(t - h)) / (2.0 * h);
            let rhs2 = 0.5 * I * fields.omega_c * a3;
            let rhs3 = 0.5 * I * (fields.omega_c.conj() * a2 + fields.omega_p.conj())
                - decay.gamma3 / 2.0 * a3;
            let scale = 0.5 * oc * (a2.norm() + a3.norm());
            assert!((d2 - rhs2).norm() < 1e-6 * scale);
            assert!((d3 - rhs3).norm() < 1e-6 * scale);
        }
    }

    #[test]
    fn weak_coefficients_reproduce_trig_form() {
        let decay = DecayRates::SODIUM;
        let fields = weak_fields(4.0 * G3);
        let sol = weak_solution(&decay, &fields, false).unwrap();
        let [_, c2, c3] = sol.coefficients();
        assert_eq!(c2, -c3);
        let l = sol.lambdas;
        for t in [0.0, 3e-9, 1.1e-8] {
            let from_modes = I
                * fields.omega_c.conj()
                * (c2 * (l[1] * t).exp() / (decay.gamma3 + 2.0 * l[1])
                    + c3 * (l[2] * t).exp() / (decay.gamma3 + 2.0 * l[2]))
                + sol.steady.a3;
            assert!((from_modes - sol.a3(t)).norm() < 1e-12 * sol.steady.a3.norm());
        }
    }

    #[test]
    fn weak_period_is_eight_pi_over_omega() {
        let sol = weak_solution(&DecayRates::SODIUM, &weak_fields(4.0 * G3), false).unwrap();
        let period = sol.period().unwrap();
        // successive maxima of |a₃(t)| on a fine grid
        let n = 200_000;
        let dt = 5.0 * period / n as f64;
        let vals: Vec<f64> = (0..n).map(|k| sol.a3(k as f64 * dt).norm()).collect();
        let peaks: Vec<f64> = (1..n - 1)
            .filter(|&k| vals[k] > vals[k - 1] && vals[k] >= vals[k + 1])
            .map(|k| k as f64 * dt)
            .collect();
        assert!(peaks.len() >= 3);
        for w in peaks.windows(2) {
            assert!(((w[1] - w[0]) - period).abs() < 2.0 * dt);
        }
    }

    #[test]
    fn regime_is_enforced() {
        let fields = RabiFields::real(G3, 0.01 * G3, G3);
        assert!(matches!(
            weak_solution(&DecayRates::SODIUM, &fields, false),
            Err(Error::RegimeViolation { .. })
        ));
        assert!(weak_solution(&DecayRates::SODIUM, &fields, true).is_ok());
        assert!(matches!(
            strong_solution(&DecayRates::SODIUM, &fields, false),
            Err(Error::RegimeViolation { .. })
        ));
    }

    fn strong_fields() -> RabiFields {
        let s = 40.0 * G3;
        RabiFields::real(0.1 * s, 0.001 * s, s)
    }

    #[test]
    fn strong_initial_and_final_values() {
        let decay = DecayRates::SODIUM;
        let fields = strong_fields();
        let sol = strong_solution(&decay, &fields, false).unwrap();
        assert!(sol.a3(0.0).norm() < 1e-15 * sol.a3_steady().norm());
        let init = -fields.omega_p.conj() / fields.omega_c.conj();
        assert!((sol.a2(0.0) - init).norm() < 1e-13 * init.norm());
        assert!(sol.a4(0.0).norm() < 1e-13 * init.norm());
        let t = 1e-5;
        let expected =
            I * (fields.omega_c.conj() * sol.steady.a2 + fields.omega_p.conj()) / decay.gamma3;
        assert!((sol.a3(t) - expected).norm() < 1e-14 * expected.norm());
        // the long-time value is the exact steady a₃
        assert!((expected - sol.steady.a3).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn strong_coefficients_match_stable_evaluation() {
        let decay = DecayRates::SODIUM;
        let fields =
            RabiFields::from_polar((4.0 * G3, 0.2), (0.04 * G3, 0.0), (40.0 * G3, -0.7)).unwrap();
        let sol = strong_solution(&decay, &fields, false).unwrap();
        let [c1, c2, c3] = sol.coefficients();
        assert_eq!(c1, c(0.0, 0.0));
        let l = sol.lambdas;
        let init = -fields.omega_p.conj() / fields.omega_c.conj();
        assert!((c2 + c3 + sol.steady.a2 - init).norm() < 1e-12 * init.norm());
        for t in [0.0, 1e-10, 4e-9] {
            let a2 = c2 * (l[1] * t).exp() + c3 * (l[2] * t).exp() + sol.steady.a2;
            assert!((a2 - sol.a2(t)).norm() < 1e-10 * init.norm());
            let a4 = I
                * fields.omega_24.conj()
                * (c2 * (l[1] * t).exp() / (decay.gamma4 + 2.0 * l[1])
                    + c3 * (l[2] * t).exp() / (decay.gamma4 + 2.0 * l[2]))
                + sol.steady.a4;
            assert!((a4 - sol.a4(t)).norm() < 1e-10 * init.norm());
        }
    }

    #[test]
    fn strong_below_threshold_is_finite_and_continuous() {
        let decay = DecayRates::SODIUM;
        let s0 = decay.gamma4 / 2.0;
        let t = 1.5e-8;
        let at = |s: f64| {
            let fields = RabiFields::real(0.05 * s, 0.001 * s, s);
            strong_solution(&decay, &fields, true).unwrap().a3(t)
        };
        let mid = at(s0);
        assert!(mid.is_finite());
        assert!((at(s0 * (1.0 + 1e-9)) - mid).norm() < 1e-6 * mid.norm());
        assert!((at(s0 * (1.0 - 1e-9)) - mid).norm() < 1e-6 * mid.norm());
    }

    #[test]
    fn swap_is_an_involution() {
        let decay = DecayRates::new(1e6, 2e8, 3e8).unwrap();
        let fields = RabiFields::from_polar((1e8, 0.1), (1e6, 0.2), (4e8, 0.3)).unwrap();
        let (d1, f1) = reciprocity_swap(&decay, &fields);
        assert_eq!(d1.gamma3, 3e8);
        assert_eq!(f1.omega_c, fields.omega_24);
        assert_eq!(f1.omega_p, fields.omega_p);
        let (d2, f2) = reciprocity_swap(&d1, &f1);
        assert_eq!((d2, f2), (decay, fields));
    }

    #[test]
    fn swapped_spectrum_is_identical() {
        let decay = DecayRates::new(2e6, 1.2e8, 2.5e8).unwrap();
        let fields = RabiFields::from_polar((4.8e8, 0.4), (1e6, 0.0), (4.8e7, 1.9)).unwrap();
        let (d, f) = reciprocity_swap(&decay, &fields);
        let a = cubic::spectrum(&decay, &fields).unwrap();
        let b = cubic::spectrum(&d, &f).unwrap();
        assert!(multiset_distance(&a.lambdas, &b.lambdas) <= 1e-12 * a.max_abs());
    }

    #[test]
    fn weak_triple_maps_to_strong_triple_of_swapped_system() {
        let decay = DecayRates::SODIUM;
        let fields = weak_fields(4.0 * G3);
        let weak = weak_solution(&decay, &fields, false).unwrap();
        let (d, f) = reciprocity_swap(&decay, &fields);
        let strong = strong_solution(&d, &f, true).unwrap();
        assert!(
            multiset_distance(&weak.lambdas, &strong.lambdas) <= 1e-12 * weak.lambdas[1].norm()
        );
    }

    #[test]
    fn weak_form_error_shrinks_with_ratio() {
        let oc = 4.0 * G3;
        let sup_err = |ratio: f64| {
            let decay = DecayRates::new(0.025 * G3 * ratio / 0.1, G3, 2.5e8).unwrap();
            let fields = RabiFields::real(oc, 0.01 * oc, ratio * oc);
            let weak = weak_solution(&decay, &fields, false).unwrap();
            let exact = ModeDecomposition::new(&decay, &fields).unwrap();
            let grid: Vec<f64> = (0..4000).map(|k| k as f64 * 5e-11).collect();
            let max = grid
                .iter()
                .map(|&t| exact.evolve(t).a3.norm())
                .fold(0.0, f64::max);
            grid.iter()
                .map(|&t| (weak.a3(t) - exact.evolve(t).a3).norm())
                .fold(0.0, f64::max)
                / max
        };
        let errs: Vec<f64> = [0.1, 0.03, 0.01].iter().map(|&r| sup_err(r)).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        // independent expm evaluation of the same comparison
        assert!((errs[0] - 0.670759583836).abs() < 1e-9, "{errs:?}");
        assert!((errs[2] - 0.251395483278).abs() < 1e-9, "{errs:?}");
    }

    #[test]
    fn weak_eigenvalues_converge_to_exact() {
        let oc = 4.0 * G3;
        let err = |ratio: f64| {
            let decay = DecayRates::new(0.025 * G3 * ratio / 0.1, G3, 2.5e8).unwrap();
            let fields = RabiFields::real(oc, 0.01 * oc, ratio * oc);
            let weak = weak_solution(&decay, &fields, false).unwrap();
            let exact = cubic::spectrum(&decay, &fields).unwrap();
            multiset_distance(&weak.lambdas, &exact.lambdas) / exact.max_abs()
        };
        let e: Vec<f64> = [0.1, 0.03, 0.01].iter().map(|&r| err(r)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
        for (r, v) in [0.1, 0.03, 0.01].iter().zip(&e) {
            assert!(*v <= 0.1 * r, "{r} {v}");
        }
    }
}
