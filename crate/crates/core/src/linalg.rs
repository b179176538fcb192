//! Dense small-matrix kernels: matrix exponential, LU solve, and the
//! exponential integral needed by the closed-form backend.
//!
//! The exponential uses scaling-and-squaring with a Padé(13,13) kernel
//! (Higham 2005). Problem sizes here are 2n x 2n for n agents, so nothing
//! is tuned beyond a few hundred rows.

use ndarray::{s, Array2};

use crate::error::{Error, Result};

/// Dense row-major matrix of finite numbers.
pub type Matrix = Array2<f64>;

/// Padé(13,13) coefficients normalized to b0 = 1 (Higham 2005, eq. 10.33).
const PADE13: [f64; 14] = [
    1.0,
    0.5,
    0.12,
    1.833_333_333_333_333_4e-2,
    1.992_753_623_188_405_8e-3,
    1.630_434_782_608_696e-4,
    1.035_196_687_370_6e-5,
    5.175_983_436_853_03e-7,
    2.043_151_356_652_5e-8,
    6.306_022_705_717_595e-10,
    1.483_770_048_404_14e-11,
    2.529_153_491_597_966e-13,
    2.810_170_546_219_962e-15,
    1.544_049_750_670_309e-17,
];

/// Scaling threshold for Padé(13) in double precision.
const THETA13: f64 = 5.371_920_351_148_152;

/// Pivot floor relative to the matrix scale below which a system is
/// declared singular to working precision.
pub const PIVOT_FLOOR: f64 = 1e-14;

fn require_square(a: &Matrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(a.nrows())
}

/// Max column sum of absolute values.
fn norm_1(a: &Matrix) -> f64 {
    let mut max = 0.0f64;
    for j in 0..a.ncols() {
        let sum: f64 = a.column(j).iter().map(|x| x.abs()).sum();
        max = max.max(sum);
    }
    max
}

/// exp(scale * A) for square A with finite entries.
pub fn mat_exp(a: &Matrix, scale: f64) -> Result<Matrix> {
    let n = require_square(a)?;
    if !scale.is_finite() {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let b = a * scale;
    let norm = norm_1(&b);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let b_scaled = &b / (1u64 << squarings) as f64;
    let mut result = pade13(&b_scaled)?;
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    Ok(result)
}

fn pade13(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let eye: Matrix = Array2::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let w1 = &a6 * PADE13[13] + &a4 * PADE13[11] + &a2 * PADE13[9];
    let w2 = w1.dot(&a6) + &a6 * PADE13[7] + &a4 * PADE13[5] + &a2 * PADE13[3] + &eye * PADE13[1];
    let u = a.dot(&w2);

    let v1 = &a6 * PADE13[12] + &a4 * PADE13[10] + &a2 * PADE13[8];
    let v = v1.dot(&a6) + &a6 * PADE13[6] + &a4 * PADE13[4] + &a2 * PADE13[2] + &eye * PADE13[0];

    // exp(A) ~= (V - U)^{-1} (V + U)
    let numerator = &v + &u;
    let denominator = &v - &u;
    let lu = Lu::factor(&denominator)?;
    Ok(lu.solve(&numerator))
}

/// Solution of a linear system together with a 1-norm condition estimate.
#[derive(Debug, Clone)]
pub struct LinearSolve {
    pub x: Matrix,
    /// Estimate of kappa_1(A) = ||A||_1 ||A^{-1}||_1.
    pub cond: f64,
}

/// Solves A X = rhs by LU with partial pivoting.
///
/// A pivot below `PIVOT_FLOOR * ||A||_1` aborts with `IllConditioned`
/// carrying the condition estimate.
pub fn solve_linear(a: &Matrix, rhs: &Matrix) -> Result<LinearSolve> {
    let n = require_square(a)?;
    if rhs.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "rhs has {} rows, matrix is {n}x{n}",
            rhs.nrows()
        )));
    }
    let lu = Lu::factor(a)?;
    let x = lu.solve(rhs);
    let cond = lu.cond_estimate();
    Ok(LinearSolve { x, cond })
}

/// int_0^t exp(s A) c ds via the augmented exponential
///
/// ```text
/// exp(t [A c; 0 0]) = [exp(tA)  int_0^t exp(sA) c ds; 0  I]
/// ```
///
/// which stays valid when A is singular. Agrees with
/// `(exp(tA) - I) A^{-1} c` whenever A is invertible.
pub fn exp_integral(a: &Matrix, c: &Matrix, t: f64) -> Result<Matrix> {
    let m = require_square(a)?;
    if c.nrows() != m {
        return Err(Error::ShapeMismatch(format!(
            "c has {} rows, matrix is {m}x{m}",
            c.nrows()
        )));
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let k = c.ncols();
    let mut aug = Array2::zeros((m + k, m + k));
    aug.slice_mut(s![..m, ..m]).assign(a);
    aug.slice_mut(s![..m, m..]).assign(c);
    let big = mat_exp(&aug, t)?;
    Ok(big.slice(s![..m, m..]).to_owned())
}

/// LU factorization with partial pivoting, reusable across solves.
pub(crate) struct Lu {
    lu: Array2<f64>,
    perm: Vec<usize>,
    norm_a: f64,
}

impl Lu {
    pub(crate) fn factor(a: &Matrix) -> Result<Self> {
        let n = require_square(a)?;
        let norm_a = norm_1(a);
        let floor = PIVOT_FLOOR * norm_a.max(f64::MIN_POSITIVE);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for col in 0..n {
            let mut max_val = lu[[col, col]].abs();
            let mut max_row = col;
            for row in col + 1..n {
                let v = lu[[row, col]].abs();
                if v > max_val {
                    max_val = v;
                    max_row = row;
                }
            }
            if max_val < floor {
                // Singular to working precision; report a pessimistic
                // condition estimate from the pivot ratio.
                let cond = if max_val > 0.0 {
                    norm_a / max_val
                } else {
                    f64::INFINITY
                };
                return Err(Error::IllConditioned { cond });
            }
            if max_row != col {
                perm.swap(col, max_row);
                for j in 0..n {
                    lu.swap([col, j], [max_row, j]);
                }
            }
            let pivot = lu[[col, col]];
            for row in col + 1..n {
                let factor = lu[[row, col]] / pivot;
                lu[[row, col]] = factor;
                for j in col + 1..n {
                    let v = lu[[col, j]];
                    lu[[row, j]] -= factor * v;
                }
            }
        }
        Ok(Lu { lu, perm, norm_a })
    }

    pub(crate) fn solve(&self, rhs: &Matrix) -> Matrix {
        let n = self.lu.nrows();
        let m = rhs.ncols();
        let mut x = Array2::zeros((n, m));
        for j in 0..m {
            // Forward substitution on the permuted right-hand side.
            for i in 0..n {
                let mut sum = rhs[[self.perm[i], j]];
                for k in 0..i {
                    sum -= self.lu[[i, k]] * x[[k, j]];
                }
                x[[i, j]] = sum;
            }
            // Back substitution.
            for i in (0..n).rev() {
                let mut sum = x[[i, j]];
                for k in i + 1..n {
                    sum -= self.lu[[i, k]] * x[[k, j]];
                }
                x[[i, j]] = sum / self.lu[[i, i]];
            }
        }
        x
    }

    /// kappa_1 estimate via the explicit inverse; cheap at these sizes.
    pub(crate) fn cond_estimate(&self) -> f64 {
        let n = self.lu.nrows();
        if n == 0 {
            return 1.0;
        }
        let eye: Matrix = Array2::eye(n);
        let inv = self.solve(&eye);
        self.norm_a * norm_1(&inv)
    }
}
