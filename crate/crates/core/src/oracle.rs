//! Independent numerical reference: fixed-step RK4 integration of the
//! reduced and full amplitude equations, and iterative eigenvalue
//! refinement.
//!
//! Nothing here calls into the cubic or mode-decomposition code; the matrix
//! is rebuilt from the rates and all arithmetic is local.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Amplitudes, DecayRates, RabiFields, SystemMatrix};

/// Upper bound on dt·(largest rate + largest |Ω|).
pub const STEP_GUARD: f64 = 0.05;
/// Eigen-refinement iteration cap.
pub const MAX_REFINE_ITERATIONS: usize = 50;
/// Relative eigen-residual accepted by the refinement.
pub const REFINE_TOL: f64 = 1e-12;

type V3 = [Complex64; 3];
type M3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HALF_I: Complex64 = Complex64::new(0.0, 0.5);

/// Step size, horizon and output stride for the fixed-step integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Requested step; the actual step divides `t_end` evenly and is ≤ dt.
    pub dt: f64,
    pub t_end: f64,
    /// Emit every `stride`-th step (the first and last are always emitted).
    pub stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let cfg = IntegratorConfig {
            dt,
            t_end,
            stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps and the step actually taken.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, 0.0);
        }
        let q = self.t_end / self.dt;
        // an exact multiple must not pick up an extra step from rounding
        let n = if (q - q.round()).abs() <= 1e-9 * q {
            q.round()
        } else {
            q.ceil()
        };
        let n = n.max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Largest step the guard allows for these parameters.
pub fn max_stable_dt(decay: &DecayRates, fields: &RabiFields) -> f64 {
    STEP_GUARD / guard_rate(decay, fields)
}

fn guard_rate(decay: &DecayRates, fields: &RabiFields) -> f64 {
    let rate = decay.gamma21.max(decay.gamma3).max(decay.gamma4);
    let rabi = fields
        .omega_c
        .norm()
        .max(fields.omega_p.norm())
        .max(fields.omega_24.norm());
    rate + rabi
}

fn check_step(dt: f64, decay: &DecayRates, fields: &RabiFields) -> Result<()> {
    decay.check_finite()?;
    fields.check_finite()?;
    let product = dt * guard_rate(decay, fields);
    if product > STEP_GUARD {
        Err(Error::StepTooLarge {
            product,
            limit: STEP_GUARD,
        })
    } else {
        Ok(())
    }
}

/// Reduced right-hand side ȧ = M a + F, built locally.
struct Reduced {
    m: M3,
    f: V3,
}

impl Reduced {
    fn new(decay: &DecayRates, fields: &RabiFields) -> Self {
        let (c, s) = (fields.omega_c, fields.omega_24);
        Reduced {
            m: [
                [
                    Complex64::from(-decay.gamma21 / 2.0),
                    HALF_I * c,
                    HALF_I * s,
                ],
                [
                    HALF_I * c.conj(),
                    Complex64::from(-decay.gamma3 / 2.0),
                    ZERO,
                ],
                [
                    HALF_I * s.conj(),
                    ZERO,
                    Complex64::from(-decay.gamma4 / 2.0),
                ],
            ],
            f: [ZERO, HALF_I * fields.omega_p.conj(), ZERO],
        }
    }

    fn rhs(&self, a: &V3) -> V3 {
        let mut out = self.f;
        for (o, row) in out.iter_mut().zip(&self.m) {
            *o += row[0] * a[0] + row[1] * a[1] + row[2] * a[2];
        }
        out
    }
}

/// Full four-amplitude right-hand side with a₁ dynamical.
struct Full {
    decay: DecayRates,
    fields: RabiFields,
}

impl Full {
    fn rhs(&self, a: &[Complex64; 4]) -> [Complex64; 4] {
        let RabiFields {
            omega_c: c,
            omega_p: p,
            omega_24: s,
        } = self.fields;
        let d = &self.decay;
        [
            HALF_I * p * a[2],
            -d.gamma21 / 2.0 * a[1] + HALF_I * (c * a[2] + s * a[3]),
            HALF_I * (p.conj() * a[0] + c.conj() * a[1]) - d.gamma3 / 2.0 * a[2],
            HALF_I * s.conj() * a[1] - d.gamma4 / 2.0 * a[3],
        ]
    }
}

fn axpy<const N: usize>(y: &[Complex64; N], h: f64, k: &[Complex64; N]) -> [Complex64; N] {
    std::array::from_fn(|i| y[i] + k[i] * h)
}

fn rk4_step<const N: usize, F>(rhs: &F, y: &[Complex64; N], h: f64) -> [Complex64; N]
where
    F: Fn(&[Complex64; N]) -> [Complex64; N],
{
    let k1 = rhs(y);
    let k2 = rhs(&axpy(y, h / 2.0, &k1));
    let k3 = rhs(&axpy(y, h / 2.0, &k2));
    let k4 = rhs(&axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
}

fn run<const N: usize, F>(
    rhs: F,
    init: [Complex64; N],
    cfg: &IntegratorConfig,
) -> Vec<(f64, [Complex64; N])>
where
    F: Fn(&[Complex64; N]) -> [Complex64; N],
{
    let (n, h) = cfg.steps();
    let mut out = Vec::with_capacity(n / cfg.stride + 2);
    let mut y = init;
    out.push((0.0, y));
    for k in 1..=n {
        y = rk4_step(&rhs, &y, h);
        if k % cfg.stride == 0 || k == n {
            out.push((k as f64 * h, y));
        }
    }
    out
}

/// RK4 on the reduced three-amplitude system.
pub fn integrate_reduced(
    decay: &DecayRates,
    fields: &RabiFields,
    init: Amplitudes,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, Amplitudes)>> {
    cfg.validate()?;
    check_step(cfg.dt, decay, fields)?;
    let sys = Reduced::new(decay, fields);
    Ok(run(|a| sys.rhs(a), init.to_array(), cfg)
        .into_iter()
        .map(|(t, a)| (t, Amplitudes::from_array(a)))
        .collect())
}

/// RK4 on the reduced system, sampled exactly at the points of `grid`
/// (non-decreasing, starting at or after 0) with steps no larger than `dt`.
pub fn sample_reduced(
    decay: &DecayRates,
    fields: &RabiFields,
    init: Amplitudes,
    grid: &[f64],
    dt: f64,
) -> Result<Vec<Amplitudes>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    check_step(dt, decay, fields)?;
    let sys = Reduced::new(decay, fields);
    let mut y = init.to_array();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        if !(target >= t && target.is_finite()) {
            return Err(Error::InvalidParameter(
                "sample times must be finite, non-negative and non-decreasing".into(),
            ));
        }
        let span = target - t;
        if span > 0.0 {
            let n = (span / dt).ceil() as usize;
            let h = span / n as f64;
            for _ in 0..n {
                y = rk4_step(&|a: &V3| sys.rhs(a), &y, h);
            }
        }
        t = target;
        out.push(Amplitudes::from_array(y));
    }
    Ok(out)
}

/// RK4 on the full system (a₁, a₂, a₃, a₄) without the a₁ = 1 approximation.
pub fn integrate_full(
    decay: &DecayRates,
    fields: &RabiFields,
    init: [Complex64; 4],
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, [Complex64; 4])>> {
    cfg.validate()?;
    check_step(cfg.dt, decay, fields)?;
    let sys = Full {
        decay: *decay,
        fields: *fields,
    };
    Ok(run(|a| sys.rhs(a), init, cfg))
}

fn norm(v: &V3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn frob(m: &M3) -> f64 {
    m.iter().map(|r| norm(r).powi(2)).sum::<f64>().sqrt()
}

fn apply(m: &M3, v: &V3) -> V3 {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

/// Solve (m − μI)x = b by partial pivoting; `None` on an exactly zero pivot.
fn shifted_solve(m: &M3, mu: Complex64, b: &V3) -> Option<V3> {
    let mut a = *m;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= mu;
    }
    let mut x = *b;
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[p][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, p);
        x.swap(col, p);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for k in col..3 {
                let v = a[col][k];
                a[r][k] -= f * v;
            }
            let v = x[col];
            x[r] -= f * v;
        }
    }
    for r in (0..3).rev() {
        let mut acc = x[r];
        for k in r + 1..3 {
            acc -= a[r][k] * x[k];
        }
        x[r] = acc / a[r][r];
    }
    x.iter().all(|z| z.is_finite()).then_some(x)
}

fn unit(v: &V3) -> V3 {
    let n = norm(v);
    std::array::from_fn(|i| v[i] / n)
}

fn rayleigh(m: &M3, v: &V3) -> Complex64 {
    let mv = apply(m, v);
    let num: Complex64 = v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum();
    num / v.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

fn refine_one(m: &M3, seed: Complex64, scale: f64) -> Result<Complex64> {
    let nudge = Complex64::new(1.0, 1.0) * (1e-13 * scale);
    let mut v: V3 = unit(&[
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 0.3),
        Complex64::new(-0.7, 0.2),
    ]);
    let iterate = |mu: Complex64, v: &V3| -> V3 {
        let x = shifted_solve(m, mu, v)
            .or_else(|| shifted_solve(m, mu + nudge, v))
            .unwrap_or(*v);
        unit(&x)
    };
    // fixed-shift inverse iteration locks onto the eigenvector nearest the seed
    for _ in 0..2 {
        v = iterate(seed, &v);
    }
    for _ in 0..MAX_REFINE_ITERATIONS {
        let mu = rayleigh(m, &v);
        let mv = apply(m, &v);
        let r: V3 = std::array::from_fn(|i| mv[i] - mu * v[i]);
        if norm(&r) < REFINE_TOL * scale {
            return Ok(mu);
        }
        v = iterate(mu, &v);
    }
    Err(Error::NoConvergence {
        iterations: MAX_REFINE_ITERATIONS,
    })
}

/// Refine approximate eigenvalues of `system.m`, returned in seed order.
pub fn refine_eigenvalues(system: &SystemMatrix, seeds: &[Complex64; 3]) -> Result<[Complex64; 3]> {
    let m = system.m;
    let scale = frob(&m);
    if scale == 0.0 {
        return Ok([ZERO; 3]);
    }
    if !scale.is_finite() || seeds.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter(
            "matrix and seeds must be finite".into(),
        ));
    }
    let mut out = [ZERO; 3];
    for (o, &s) in out.iter_mut().zip(seeds) {
        *o = refine_one(&m, s, scale)?;
    }
    Ok(out)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::model::{build_system, I};

    const PAPER_A3_1E8: f64 = 2.0039565596288847e-4;

    fn reference() -> (DecayRates, RabiFields) {
        (DecayRates::SODIUM, RabiFields::real(4.8e8, 4.8e6, 4.8e7))
    }

    fn dark(fields: &RabiFields) -> Amplitudes {
        Amplitudes::new(-fields.omega_p.conj() / fields.omega_c.conj(), ZERO, ZERO)
    }

    #[test]
    fn zero_forcing_zero_trace() {
        let d = DecayRates::SODIUM;
        let f = RabiFields::real(4.8e8, 0.0, 4.8e7);
        let cfg = IntegratorConfig::new(1e-11, 1e-8).unwrap();
        let trace = integrate_reduced(&d, &f, Amplitudes::ZERO, &cfg).unwrap();
        assert_eq!(trace.len(), 1001);
        assert!(trace.iter().all(|(_, a)| a.norm() == 0.0));
    }

    #[test]
    fn guard_rejects_large_steps() {
        let (d, f) = reference();
        let cfg = IntegratorConfig::new(1e-9, 1e-8).unwrap();
        assert!(matches!(
            integrate_reduced(&d, &f, dark(&f), &cfg),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(max_stable_dt(&d, &f) * (2.5e8 + 4.8e8) <= STEP_GUARD * (1.0 + 1e-15));
    }

    #[test]
    fn invalid_configs() {
        assert!(IntegratorConfig::new(0.0, 1.0).is_err());
        assert!(IntegratorConfig::new(1e-12, -1.0).is_err());
        assert!(IntegratorConfig::new(1e-12, 1.0)
            .unwrap()
            .with_stride(0)
            .is_err());
    }

    #[test]
    fn steps_divide_horizon() {
        let cfg = IntegratorConfig::new(3e-12, 1e-9).unwrap();
        let (n, h) = cfg.steps();
        assert_eq!(n, 334);
        assert!(h <= 3e-12 && (n as f64 * h - 1e-9).abs() < 1e-24);
    }

    #[test]
    fn matches_high_precision_reference() {
        // 40-digit matrix-exponential values at the paper parameters
        let (d, f) = reference();
        let out = sample_reduced(&d, &f, dark(&f), &[1e-9, 1e-8, 1e-7], 1e-12).unwrap();
        let refs = [
            (
                -0.0099824051440118841,
                1.9744695826690269e-6,
                -2.2541256371205857e-4,
            ),
            (-0.0098294533719675727, PAPER_A3_1E8, -1.3533910611215396e-3),
            (
                -0.0099415541809331077,
                2.5565611629666064e-4,
                -1.907723273510029e-3,
            ),
        ];
        for (a, (a2, a3, a4)) in out.iter().zip(refs) {
            let expected = Amplitudes::new(Complex64::from(a2), I * a3, I * a4);
            assert!((*a - expected).norm() < 1e-9 * expected.norm(), "{a:?}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let (d, f) = reference();
        let err = |dt: f64| {
            let a = sample_reduced(&d, &f, dark(&f), &[1e-8], dt).unwrap()[0];
            (a.a3 - I * PAPER_A3_1E8).norm()
        };
        let (e1, e2) = (err(4e-11), err(2e-11));
        let order = (e1 / e2).log2();
        assert!((3.7..=4.3).contains(&order), "order {order}");
    }

    #[test]
    fn stride_keeps_endpoints() {
        let (d, f) = reference();
        let cfg = IntegratorConfig::new(1e-11, 1e-9)
            .unwrap()
            .with_stride(30)
            .unwrap();
        let trace = integrate_reduced(&d, &f, dark(&f), &cfg).unwrap();
        assert_eq!(trace.first().unwrap().0, 0.0);
        assert!((trace.last().unwrap().0 - 1e-9).abs() < 1e-24);
        assert_eq!(trace.len(), 1 + 3 + 1);
    }

    #[test]
    fn full_system_without_probe_is_constant() {
        let d = DecayRates::SODIUM;
        let f = RabiFields::real(4.8e8, 0.0, 4.8e7);
        let cfg = IntegratorConfig::new(1e-11, 1e-8).unwrap();
        let init = [Complex64::new(1.0, 0.0), ZERO, ZERO, ZERO];
        for (_, a) in integrate_full(&d, &f, init, &cfg).unwrap() {
            assert_eq!(a, init);
        }
    }

    #[test]
    fn full_and_reduced_agree_for_weak_probe() {
        let (d, f) = reference();
        let cfg = IntegratorConfig::new(1e-11, 1e-7)
            .unwrap()
            .with_stride(100)
            .unwrap();
        let dk = dark(&f);
        let full =
            integrate_full(&d, &f, [Complex64::new(1.0, 0.0), dk.a2, ZERO, ZERO], &cfg).unwrap();
        let reduced = integrate_reduced(&d, &f, dk, &cfg).unwrap();
        let dev = full
            .iter()
            .map(|(_, a)| (a[0] - 1.0).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-3, "{dev}");
        let max_a3 = reduced.iter().map(|(_, a)| a.a3.norm()).fold(0.0, f64::max);
        for ((_, a), (_, r)) in full.iter().zip(&reduced) {
            // depletion of |1⟩ feeds back on a₃ at a few times its own size
            assert!((a[2] - r.a3).norm() <= 5.0 * dev * max_a3);
        }
    }

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let d = DecayRates::SODIUM;
        let system = build_system(&d, &RabiFields::real(0.0, 0.0, 0.0)).unwrap();
        let seeds = [
            Complex64::new(-1.4e6, 1e3),
            Complex64::new(-6.1e7, 0.0),
            Complex64::new(-1.2e8, -1e4),
        ];
        let out = refine_eigenvalues(&system, &seeds).unwrap();
        let expected = [-1.5e6, -6e7, -1.25e8];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).norm() < 1e-12 * 1.25e8, "{o} {e}");
        }
    }

    #[test]
    fn perturbed_seeds_converge_back() {
        let (d, f) = reference();
        let system = build_system(&d, &f).unwrap();
        let exact = [
            Complex64::new(-3.10332199e7, 2.39305853e8),
            Complex64::new(-3.10332199e7, -2.39305853e8),
            Complex64::new(-1.24433560e8, 0.0),
        ];
        let once = refine_eigenvalues(&system, &exact).unwrap();
        for (a, b) in once.iter().zip(&exact) {
            assert!((a - b).norm() < 1e-8 * b.norm());
        }
        let perturbed: [Complex64; 3] = std::array::from_fn(|k| once[k] * (1.0 + 1e-3));
        let again = refine_eigenvalues(&system, &perturbed).unwrap();
        let twice = refine_eigenvalues(&system, &once).unwrap();
        for k in 0..3 {
            assert!((again[k] - once[k]).norm() < 1e-12 * system.norm());
            assert!((twice[k] - once[k]).norm() < 1e-12 * system.norm());
        }
    }
}
