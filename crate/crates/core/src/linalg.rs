//! Dense 3×3 complex helpers for the mode decomposition.

use num_complex::Complex64;

pub type Vec3 = [Complex64; 3];
pub type Mat3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn norm(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(a: &Mat3) -> f64 {
    a.iter().map(norm).map(|r| r * r).sum::<f64>().sqrt()
}

pub fn matvec(a: &Mat3, x: &Vec3) -> Vec3 {
    let mut out = [ZERO; 3];
    for (o, row) in out.iter_mut().zip(a) {
        *o = row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
    }
    out
}

pub fn scale(v: &Vec3, k: Complex64) -> Vec3 {
    [v[0] * k, v[1] * k, v[2] * k]
}

#[cfg(test)]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// a − λI
pub fn shift(a: &Mat3, lambda: Complex64) -> Mat3 {
    let mut out = *a;
    for (i, row) in out.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    out
}

/// Bilinear cross product: the result is annihilated by both rows.
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn det(a: &Mat3) -> Complex64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse by the adjugate; `None` when the determinant vanishes.
pub fn inverse(a: &Mat3) -> Option<Mat3> {
    let d = det(a);
    if d.norm() == 0.0 || !d.is_finite() {
        return None;
    }
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let mut inv = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = adj[i][j] / d;
        }
    }
    Some(inv)
}

/// Gaussian elimination with partial pivoting; `None` if a pivot is exactly zero.
pub fn solve(a: &Mat3, b: &Vec3) -> Option<Vec3> {
    let mut m = *a;
    let mut rhs = *b;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .expect("non-empty range");
        if m[pivot][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
            let v = rhs[col];
            rhs[row] -= f * v;
        }
    }
    let mut x = [ZERO; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x.iter().all(|z| z.is_finite()).then_some(x)
}

/// Condition number ‖A‖_F‖A⁻¹‖_F after scaling each column to unit norm.
pub fn column_condition(columns: &[Vec3; 3]) -> f64 {
    let mut a = [[ZERO; 3]; 3];
    for (j, col) in columns.iter().enumerate() {
        let n = norm(col);
        if n == 0.0 {
            return f64::INFINITY;
        }
        for i in 0..3 {
            a[i][j] = col[i] / n;
        }
    }
    match inverse(&a) {
        Some(inv) => frobenius(&a) * frobenius(&inv),
        None => f64::INFINITY,
    }
}
