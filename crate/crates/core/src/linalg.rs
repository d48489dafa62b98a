//! Small dense helpers shared by the solvers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use crate::error::{BresseError, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(Complex64::from)
}

pub fn real_part(x: &CVector) -> DVector<f64> {
    x.map(|z| z.re)
}

pub fn imag_part(x: &CVector) -> DVector<f64> {
    x.map(|z| z.im)
}

pub fn from_parts(re: &DVector<f64>, im: &DVector<f64>) -> CVector {
    re.zip_map(im, Complex64::new)
}

/// Real matrix times complex vector.
pub fn mul_real(a: &DMatrix<f64>, x: &CVector) -> CVector {
    from_parts(&(a * real_part(x)), &(a * imag_part(x)))
}

/// `x* A x` for real symmetric `A`.
pub fn quad_form(a: &DMatrix<f64>, x: &CVector) -> f64 {
    let (re, im) = (real_part(x), imag_part(x));
    re.dot(&(a * &re)) + im.dot(&(a * &im))
}

/// `y* A x` for real `A`.
pub fn sesq_form(a: &DMatrix<f64>, x: &CVector, y: &CVector) -> Complex64 {
    y.dotc(&mul_real(a, x))
}

pub fn chol_solve_complex(chol: &Cholesky<f64, Dyn>, b: &CVector) -> CVector {
    from_parts(&chol.solve(&real_part(b)), &chol.solve(&imag_part(b)))
}

/// `s² M + s C + K`.
pub fn pencil_at(
    mass: &DMatrix<f64>,
    damping: &DMatrix<f64>,
    stiffness: &DMatrix<f64>,
    s: Complex64,
) -> CMatrix {
    let s2 = s * s;
    DMatrix::from_fn(mass.nrows(), mass.ncols(), |i, j| {
        s2 * mass[(i, j)] + s * damping[(i, j)] + stiffness[(i, j)]
    })
}

/// LU factorization that refuses numerically singular matrices.
pub struct ComplexLu {
    lu: LU<Complex64, Dyn, Dyn>,
}

impl ComplexLu {
    /// Returns `None` when the smallest pivot falls below `n·ε` times the
    /// largest one.
    pub fn new(a: CMatrix) -> Option<Self> {
        let n = a.nrows();
        let lu = a.lu();
        let u = lu.u();
        let pivots = u.diagonal().map(|z| z.norm());
        let max = pivots.max();
        let min = pivots.min();
        if !(min.is_finite() && max > 0.0) || min <= n as f64 * f64::EPSILON * max {
            return None;
        }
        Some(Self { lu })
    }

    pub fn solve(&self, b: &CVector) -> Result<CVector> {
        let x = self
            .lu
            .solve(b)
            .ok_or_else(|| BresseError::FactorizationFailed("singular LU solve".into()))?;
        if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(x)
        } else {
            Err(BresseError::FactorizationFailed(
                "non-finite LU solution".into(),
            ))
        }
    }

    /// Solves with the entrywise conjugate of the factored matrix.
    pub fn solve_conj(&self, b: &CVector) -> Result<CVector> {
        Ok(self.solve(&b.map(|z| z.conj()))?.map(|z| z.conj()))
    }
}

/// Maximum absolute row sum.
pub fn norm_inf(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Ordinary least-squares line `y = slope·x + intercept` with its R².
pub fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}
