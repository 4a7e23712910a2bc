//! Exact solution of the driven reduced system.
//!
//! The amplitudes are a superposition of three exponential modes on top of
//! the steady (particular) solution:
//!
//! ```text
//! a(t) = Σₙ cₙ vₙ exp(λₙ t) + a_s
//! ```
//!
//! with λₙ from the characteristic cubic, vₙ the matching eigenvectors and
//! cₙ fitted so that a(0) equals the initial amplitudes. Nothing here steps
//! in time, so a trace has no accumulated error.

use num_complex::Complex64;

use crate::cubic::{self, Spectrum};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, Mat3, Vec3};
use crate::model::{build_system, Amplitudes, DecayRates, RabiFields, SystemMatrix, I};

/// Denominators Γ+2λ below this fraction of the largest rate use the
/// null-space eigenvector instead of the ratio form.
pub const EPS_DENOMINATOR: f64 = 1e-6;
/// Eigenvalues closer than this (relative) are treated as one cluster.
pub const EPS_CLUSTER: f64 = 1e-8;
/// ‖(M − λ)v‖ / (‖v‖‖M‖) bound for accepted eigenvectors.
pub const EIGVEC_RESIDUAL: f64 = 1e-9;
/// Largest acceptable condition number of the mode matrix.
pub const MAX_CONDITION: f64 = 1e12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Particular solution with all time derivatives zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub amps: Amplitudes,
}

/// |Ω_c|²Γ₄ + γ₂₁Γ₃Γ₄ + |Ω₂₄|²Γ₃
pub fn steady_denominator(decay: &DecayRates, fields: &RabiFields) -> f64 {
    fields.omega_c.norm_sqr() * decay.gamma4
        + decay.gamma21 * decay.gamma3 * decay.gamma4
        + fields.omega_24.norm_sqr() * decay.gamma3
}

/// Closed-form steady amplitudes.
pub fn steady_state(decay: &DecayRates, fields: &RabiFields) -> Result<SteadyState> {
    decay.check_finite()?;
    fields.check_finite()?;
    let den = steady_denominator(decay, fields);
    if !(den > 0.0) {
        return Err(Error::SingularSteadyState);
    }
    let p_conj = fields.omega_p.conj();
    let a2 = -p_conj * fields.omega_c * decay.gamma4 / den;
    let a3 = I * p_conj * (fields.omega_24.norm_sqr() + decay.gamma21 * decay.gamma4) / den;
    let a4 = -I * p_conj * fields.omega_c * fields.omega_24.conj() / den;
    Ok(SteadyState {
        amps: Amplitudes::new(a2, a3, a4),
    })
}

/// Steady state by direct elimination of m·a = −forcing.
pub fn steady_state_direct(system: &SystemMatrix) -> Result<SteadyState> {
    let rhs = system.forcing.map(|z| -z);
    linalg::solve(&system.m, &rhs)
        .map(|v| SteadyState {
            amps: Amplitudes::from_array(v),
        })
        .ok_or(Error::SingularSteadyState)
}

/// Dark-state amplitudes before the signal is switched on: (−Ω_p*/Ω_c*, 0, 0).
pub fn initial_amplitudes(fields: &RabiFields) -> Result<Amplitudes> {
    fields.check_finite()?;
    if fields.omega_c.norm() == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    Ok(Amplitudes::new(
        -fields.omega_p.conj() / fields.omega_c.conj(),
        ZERO,
        ZERO,
    ))
}

fn largest_cross(a: &Mat3) -> (Vec3, f64) {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    pairs
        .iter()
        .map(|&(i, j)| {
            let v = linalg::cross(&a[i], &a[j]);
            let n = linalg::norm(&v);
            (v, n)
        })
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("three pairs")
}

/// Basis of {x : r·x = 0} for a single nonzero row r.
fn row_null_basis(r: &Vec3) -> [Vec3; 2] {
    let k = (0..3)
        .max_by(|&i, &j| r[i].norm().total_cmp(&r[j].norm()))
        .expect("three entries");
    let mut out = [[ZERO; 3]; 2];
    for (slot, j) in (0..3).filter(|&j| j != k).enumerate() {
        let mut v = [ZERO; 3];
        v[j] = Complex64::new(1.0, 0.0);
        v[k] = -r[j] / r[k];
        out[slot] = normalized(&v);
    }
    out
}

fn normalized(v: &Vec3) -> Vec3 {
    let n = linalg::norm(v);
    let k = v
        .iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .copied()
        .unwrap_or(ZERO);
    if n == 0.0 || k.norm() == 0.0 {
        return *v;
    }
    // unit norm, largest component real positive
    let phase = k.conj() / k.norm();
    linalg::scale(v, phase / n)
}

fn unit(i: usize) -> Vec3 {
    let mut v = [ZERO; 3];
    v[i] = Complex64::new(1.0, 0.0);
    v
}

fn defective(lambda: Complex64) -> Error {
    Error::DefectiveMatrix {
        re: lambda.re,
        im: lambda.im,
    }
}

/// Eigenvectors matching each eigenvalue of `spectrum`.
///
/// Uses (1, iΩ_c*/(Γ₃+2λ), iΩ₂₄*/(Γ₄+2λ)) when both denominators are safely
/// nonzero, otherwise the null space of M − λI from row cross products.
pub fn mode_vectors(
    spectrum: &Spectrum,
    decay: &DecayRates,
    fields: &RabiFields,
) -> Result<[Vec3; 3]> {
    mode_basis(spectrum, decay, fields).map(|(_, v)| v)
}

/// Eigenvectors plus the eigenvalues they belong to, with each cluster of a
/// repeated root replaced by its mean.
fn mode_basis(
    spectrum: &Spectrum,
    decay: &DecayRates,
    fields: &RabiFields,
) -> Result<(Spectrum, [Vec3; 3])> {
    let system = build_system(decay, fields)?;
    let m_norm = system.norm();
    let max_rate = decay.max().max(fields.max_abs());
    let scale = m_norm.max(spectrum.max_abs());
    let lambdas = spectrum.lambdas;
    let mut vectors = [[ZERO; 3]; 3];
    let mut done = [false; 3];
    // clustered roots are checked against their mean: root splitting of a
    // repeated eigenvalue is a rounding artefact of the cubic solve
    let mut check = lambdas;

    for n in 0..3 {
        if done[n] {
            continue;
        }
        let cluster: Vec<usize> = (n..3)
            .filter(|&k| !done[k] && (lambdas[k] - lambdas[n]).norm() <= EPS_CLUSTER * scale)
            .collect();

        if cluster.len() == 1 {
            vectors[n] = single_vector(&system, lambdas[n], decay, fields, max_rate);
            done[n] = true;
            continue;
        }

        let mean = cluster.iter().map(|&k| lambdas[k]).sum::<Complex64>() / cluster.len() as f64;
        let a = linalg::shift(&system.m, mean);
        let (_, cross_norm) = largest_cross(&a);
        let row_scale = a.iter().map(linalg::norm).fold(0.0, f64::max);
        if cross_norm > 1e-7 * row_scale * row_scale {
            // rank 2: one eigenvector for a repeated eigenvalue
            return Err(defective(mean));
        }
        let basis: Vec<Vec3> = if row_scale <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            (0..3).map(unit).collect()
        } else {
            let r = *a
                .iter()
                .max_by(|x, y| linalg::norm(x).total_cmp(&linalg::norm(y)))
                .expect("three rows");
            row_null_basis(&r).to_vec()
        };
        if basis.len() < cluster.len() {
            return Err(defective(mean));
        }
        for (slot, &k) in cluster.iter().enumerate() {
            vectors[k] = basis[slot];
            check[k] = mean;
            done[k] = true;
        }
    }

    for (v, &lambda) in vectors.iter().zip(check.iter()) {
        if eigen_residual(&system.m, lambda, v) > EIGVEC_RESIDUAL * m_norm.max(f64::MIN_POSITIVE) {
            return Err(defective(lambda));
        }
    }
    Ok((Spectrum { lambdas: check }, vectors))
}

fn single_vector(
    system: &SystemMatrix,
    lambda: Complex64,
    decay: &DecayRates,
    fields: &RabiFields,
    max_rate: f64,
) -> Vec3 {
    let den3 = decay.gamma3 + 2.0 * lambda;
    let den4 = decay.gamma4 + 2.0 * lambda;
    let threshold = EPS_DENOMINATOR * max_rate;
    if den3.norm() > threshold && den4.norm() > threshold {
        let v = [
            Complex64::new(1.0, 0.0),
            I * fields.omega_c.conj() / den3,
            I * fields.omega_24.conj() / den4,
        ];
        if eigen_residual(&system.m, lambda, &v) <= EIGVEC_RESIDUAL * system.norm() {
            return v;
        }
    }
    let (v, _) = largest_cross(&linalg::shift(&system.m, lambda));
    let v = normalized(&v);
    // rescale to a₂ = 1 when the a₂ slot carries weight
    if v[0].norm() > 1e-3 {
        linalg::scale(&v, v[0].inv())
    } else {
        v
    }
}

/// ‖(M − λI)v‖ / ‖v‖
pub fn eigen_residual(m: &Mat3, lambda: Complex64, v: &Vec3) -> f64 {
    let r = linalg::matvec(&linalg::shift(m, lambda), v);
    linalg::norm(&r) / linalg::norm(v)
}

/// Mode coefficients and the condition number of the mode matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFit {
    pub coeffs: [Complex64; 3],
    pub condition: f64,
}

/// Solve V·c = init − steady where the columns of V are the mode vectors.
pub fn fit_coefficients(
    init: &Amplitudes,
    steady: &SteadyState,
    vectors: &[Vec3; 3],
) -> Result<ModeFit> {
    let condition = linalg::column_condition(vectors);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditionedModes { cond: condition });
    }
    let mut v = [[ZERO; 3]; 3];
    for (j, col) in vectors.iter().enumerate() {
        for i in 0..3 {
            v[i][j] = col[i];
        }
    }
    let rhs = (*init - steady.amps).to_array();
    let coeffs = linalg::solve(&v, &rhs).ok_or(Error::IllConditionedModes {
        cond: f64::INFINITY,
    })?;
    Ok(ModeFit { coeffs, condition })
}

/// Everything needed to evaluate a(t) in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub spectrum: Spectrum,
    pub vectors: [Vec3; 3],
    pub coeffs: [Complex64; 3],
    pub steady: SteadyState,
    pub init: Amplitudes,
    pub condition: f64,
    // cₙ·vₙ, cached for evaluation
    weighted: [Vec3; 3],
}

impl ModeDecomposition {
    /// Decomposition starting from the dark state of the Λ subsystem.
    pub fn new(decay: &DecayRates, fields: &RabiFields) -> Result<Self> {
        let init = initial_amplitudes(fields)?;
        Self::with_initial(decay, fields, init)
    }

    pub fn with_initial(decay: &DecayRates, fields: &RabiFields, init: Amplitudes) -> Result<Self> {
        if !init.is_finite() {
            return Err(Error::InvalidParameter(
                "initial amplitudes must be finite".into(),
            ));
        }
        let spectrum = cubic::spectrum(decay, fields)?;
        let steady = steady_state(decay, fields)?;
        let (spectrum, vectors) = mode_basis(&spectrum, decay, fields)?;
        let fit = fit_coefficients(&init, &steady, &vectors)?;
        let mut weighted = [[ZERO; 3]; 3];
        for n in 0..3 {
            weighted[n] = linalg::scale(&vectors[n], fit.coeffs[n]);
        }
        Ok(ModeDecomposition {
            spectrum,
            vectors,
            coeffs: fit.coeffs,
            steady,
            init,
            condition: fit.condition,
            weighted,
        })
    }

    /// a(t) = Σₙ cₙ vₙ e^{λₙ t} + a_s
    pub fn evolve(&self, t: f64) -> Amplitudes {
        if t == 0.0 {
            // the fit reproduces the start only to rounding; return it exactly
            return self.init;
        }
        let mut out = self.steady.amps.to_array();
        for (w, lambda) in self.weighted.iter().zip(self.spectrum.lambdas.iter()) {
            let e = (lambda * t).exp();
            for i in 0..3 {
                out[i] += w[i] * e;
            }
        }
        Amplitudes::from_array(out)
    }

    pub fn evolve_trace(&self, grid: &[f64]) -> Vec<(f64, Amplitudes)> {
        self.evolve_trace_with(grid, Execution::default())
    }

    pub fn evolve_trace_with(&self, grid: &[f64], exec: Execution) -> Vec<(f64, Amplitudes)> {
        exec.map(grid, |&t| (t, self.evolve(t)))
    }

    /// Time after which every mode has decayed by e^{-50} relative to its start.
    pub fn settle_time(&self) -> f64 {
        let slowest = self
            .spectrum
            .lambdas
            .iter()
            .map(|l| -l.re)
            .fold(f64::INFINITY, f64::min);
        50.0 / slowest
    }
}

/// n evenly spaced points on [0, t_end].
pub fn time_grid(t_end: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_end must be > 0, got {t_end}"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_points must be ≥ 2, got {n_points}"
        )));
    }
    let step = t_end / (n_points - 1) as f64;
    Ok((0..n_points)
        .map(|k| {
            if k + 1 == n_points {
                t_end
            } else {
                k as f64 * step
            }
        })
        .collect())
}

/// Check a user grid is nonnegative and nondecreasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidParameter(
            "time grid must be finite and ≥ 0".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be nondecreasing".into(),
        ));
    }
    Ok(())
}
