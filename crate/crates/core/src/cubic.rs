//! Characteristic cubic of the system matrix and its closed-form roots.
//!
//! det(M − λI) = 0 reduces to λ³ + 3bλ² + 3cλ + d = 0. The roots come from
//! Cardano's formula on the depressed cubic x³ + 3px + q = 0 (λ = x − b),
//! then each is polished by a few Newton steps on the original cubic.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DecayRates, RabiFields};

/// Primitive cube root of unity (−1 + i√3)/2.
pub const CUBE_ROOT_OF_UNITY: Complex64 = Complex64::new(-0.5, 0.866_025_403_784_438_6);

/// Relative residual every returned root must satisfy.
pub const RESIDUAL_TOL: f64 = 1e-10;

const MAX_NEWTON: usize = 5;

/// Coefficients of λ³ + 3bλ² + 3cλ + d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl CubicCoefficients {
    pub fn new(b: Complex64, c: Complex64, d: Complex64) -> Self {
        CubicCoefficients { b, c, d }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        ((x + 3.0 * self.b) * x + 3.0 * self.c) * x + self.d
    }

    pub fn derivative(&self, x: Complex64) -> Complex64 {
        (3.0 * x + 6.0 * self.b) * x + 3.0 * self.c
    }

    /// max(|b|, √|c|, ∛|d|): the natural magnitude of the roots.
    pub fn scale(&self) -> f64 {
        self.b
            .norm()
            .max(self.c.norm().sqrt())
            .max(self.d.norm().cbrt())
    }

    /// |f(λ)| / scale³ with scale also covering |λ|.
    pub fn relative_residual(&self, x: Complex64) -> f64 {
        let scale = self.scale().max(x.norm());
        if scale == 0.0 {
            return 0.0;
        }
        self.eval(x).norm() / (scale * scale * scale)
    }

    fn is_finite(&self) -> bool {
        self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

/// Coefficients of the characteristic cubic for the given level scheme.
pub fn characteristic_coefficients(
    decay: &DecayRates,
    fields: &RabiFields,
) -> Result<CubicCoefficients> {
    decay.check_finite()?;
    fields.check_finite()?;
    let DecayRates {
        gamma21: g21,
        gamma3: g3,
        gamma4: g4,
    } = *decay;
    let oc2 = fields.omega_c.norm_sqr();
    let os2 = fields.omega_24.norm_sqr();
    let b = (g21 + g3 + g4) / 6.0;
    let c = (g21 * g3 + g4 * (g21 + g3) + oc2 + os2) / 12.0;
    let d = (g4 * (g21 * g3 + oc2) + g3 * os2) / 8.0;
    Ok(CubicCoefficients::new(b.into(), c.into(), d.into()))
}

/// Intermediate quantities of Cardano's formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardanoWork {
    pub p: Complex64,
    pub q: Complex64,
    pub delta: Complex64,
    pub u: Complex64,
    pub v: Complex64,
    pub w: Complex64,
}

impl CardanoWork {
    pub fn new(coeffs: &CubicCoefficients) -> Self {
        let CubicCoefficients { b, c, d } = *coeffs;
        let p = c - b * b;
        let q = d - 3.0 * b * c + 2.0 * b * b * b;
        let delta = 4.0 * p * p * p + q * q;
        let sqrt_delta = delta.sqrt();
        // u³ and v³ are the two roots of z² + qz − p³; take the larger one
        // for u so that v = −p/u does not suffer cancellation.
        let plus = (-q + sqrt_delta) * 0.5;
        let minus = (-q - sqrt_delta) * 0.5;
        let u_cubed = if plus.norm() >= minus.norm() {
            plus
        } else {
            minus
        };
        let u = u_cubed.cbrt();
        let v = if u.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            -p / u
        };
        CardanoWork {
            p,
            q,
            delta,
            u,
            v,
            w: CUBE_ROOT_OF_UNITY,
        }
    }

    /// Unpolished roots u+v−b, uw+vw²−b, uw²+vw−b.
    pub fn roots(&self, b: Complex64) -> [Complex64; 3] {
        let (u, v, w) = (self.u, self.v, self.w);
        let w2 = w * w;
        [u + v - b, u * w + v * w2 - b, u * w2 + v * w - b]
    }
}

/// Eigenvalues ordered by descending real part, ties by ascending imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub lambdas: [Complex64; 3],
}

impl Spectrum {
    pub fn new(mut lambdas: [Complex64; 3]) -> Self {
        let scale = lambdas.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tie = 1e-12 * scale;
        lambdas.sort_by(|x, y| {
            if (x.re - y.re).abs() <= tie {
                x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal)
            } else {
                y.re.partial_cmp(&x.re).unwrap_or(Ordering::Equal)
            }
        });
        Spectrum { lambdas }
    }

    pub fn max_abs(&self) -> f64 {
        self.lambdas.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.lambdas.iter()
    }
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Smallest achievable max |aᵢ − b_π(i)| over permutations π.
pub fn multiset_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    PERMS
        .iter()
        .map(|perm| {
            (0..3)
                .map(|i| (a[i] - b[perm[i]]).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Permutation of `b` that best matches `a` element-wise.
pub fn match_to(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    let best = PERMS
        .iter()
        .min_by(|p, q| {
            let cost =
                |perm: &[usize; 3]| -> f64 { (0..3).map(|i| (a[i] - b[perm[i]]).norm()).sum() };
            cost(p).partial_cmp(&cost(q)).unwrap_or(Ordering::Equal)
        })
        .expect("non-empty");
    [b[best[0]], b[best[1]], b[best[2]]]
}

fn polish(coeffs: &CubicCoefficients, mut x: Complex64) -> Complex64 {
    let mut fx = coeffs.eval(x);
    for _ in 0..MAX_NEWTON {
        if fx.norm() == 0.0 {
            break;
        }
        let dfx = coeffs.derivative(x);
        if dfx.norm() == 0.0 {
            break;
        }
        let candidate = x - fx / dfx;
        let fc = coeffs.eval(candidate);
        if !(fc.norm() < fx.norm()) {
            break;
        }
        x = candidate;
        fx = fc;
    }
    x
}

/// Roots of λ³ + 3bλ² + 3cλ + d via Cardano, Newton-polished.
pub fn solve_characteristic(coeffs: &CubicCoefficients) -> Result<Spectrum> {
    if !coeffs.is_finite() {
        return Err(Error::InvalidParameter(
            "cubic coefficients must be finite".into(),
        ));
    }
    let work = CardanoWork::new(coeffs);
    let raw = work.roots(coeffs.b);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    for (slot, &r) in roots.iter_mut().zip(raw.iter()) {
        let x = polish(coeffs, r);
        let residual = coeffs.relative_residual(x);
        if !(residual <= RESIDUAL_TOL) {
            return Err(Error::DegenerateCubic { residual });
        }
        *slot = x;
    }
    Ok(Spectrum::new(roots))
}

/// Eigenvalues of the reduced system matrix.
pub fn spectrum(decay: &DecayRates, fields: &RabiFields) -> Result<Spectrum> {
    solve_characteristic(&characteristic_coefficients(decay, fields)?)
}
