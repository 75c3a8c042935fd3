//! Small dense complex linear-algebra helpers shared by the solver modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `x^H M y`.
pub fn sesquilinear(x: &CVector, m: &CMatrix, y: &CVector) -> Complex64 {
    x.dotc(&(m * y))
}

/// `x^H M x`.
pub fn quadratic(m: &CMatrix, x: &CVector) -> Complex64 {
    sesquilinear(x, m, x)
}

pub fn real_part(m: &CMatrix) -> CMatrix {
    m.map(|z| Complex64::new(z.re, 0.0))
}

pub fn imag_part(m: &CMatrix) -> CMatrix {
    m.map(|z| Complex64::new(z.im, 0.0))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest `|M - M^T|` entry relative to the largest entry of `M`.
pub fn symmetry_defect(m: &CMatrix) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    worst / scale
}

/// Overwrites the lower triangle with the upper one.
pub fn symmetrize_from_upper(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            m[(j, i)] = m[(i, j)];
        }
    }
}

/// Averages `M` and `M^T`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.transpose()) * Complex64::new(0.5, 0.0)
}

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number, infinite when the matrix cannot be inverted.
pub fn condition_estimate(m: &CMatrix) -> f64 {
    match m.clone().try_inverse() {
        Some(inv) => norm1(m) * norm1(&inv),
        None => f64::INFINITY,
    }
}

const SINGULAR_CONDITION: f64 = 1e14;

/// Solves `A X = B` by partially pivoted LU. `omega` only labels the error.
pub fn solve(a: &CMatrix, b: &CMatrix, omega: f64) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if b.nrows() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let lu = a.clone().lu();
    let singular = || Error::Singular {
        omega,
        condition: condition_estimate(a),
    };
    let x = lu.solve(b).ok_or_else(singular)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(singular());
    }
    let residual = (a * &x - b).norm();
    let scale = b.norm().max(f64::MIN_POSITIVE);
    if residual / scale > 1e-8 {
        let condition = condition_estimate(a);
        if condition > SINGULAR_CONDITION {
            return Err(Error::Singular { omega, condition });
        }
    }
    Ok(x)
}

pub fn solve_vec(a: &CMatrix, b: &CVector, omega: f64) -> Result<CVector> {
    let rhs = CMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = solve(a, &rhs, omega)?;
    Ok(CVector::from_column_slice(x.as_slice()))
}

pub fn inverse(a: &CMatrix, omega: f64) -> Result<CMatrix> {
    solve(a, &CMatrix::identity(a.nrows(), a.ncols()), omega)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature order must be positive");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton on P_n from the Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 4, 7, 16] {
            let (x, w) = gauss_legendre(n);
            for degree in 0..(2 * n) {
                let quad: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| w * x.powi(degree as i32))
                    .sum();
                let exact = if degree % 2 == 1 {
                    0.0
                } else {
                    2.0 / (degree as f64 + 1.0)
                };
                assert!((quad - exact).abs() < 1e-13, "n={n} degree={degree}");
            }
        }
    }

    #[test]
    fn solve_reports_singular_system() {
        let a = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        let b = CMatrix::identity(2, 2);
        assert!(matches!(solve(&a, &b, 1.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn quadratic_form_of_hermitian_is_real() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.5, 1.0),
                Complex64::new(0.5, -1.0),
                Complex64::new(3.0, 0.0),
            ],
        );
        let x = CVector::from_vec(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.3, 0.7)]);
        assert!(quadratic(&m, &x).im.abs() < 1e-14);
    }
}
