//! Exponentially weighted orthonormal polynomial bases.
//!
//! A basis of degree `B` is the set of polynomials `psi_k(m) = sum_j alpha[k][j] m^j`,
//! `k = 0..=B`, orthonormal under the (unnormalized) weight `w(m) = p^|m|`. In the
//! causal case the sum runs over `m >= 0` and the polynomials are the discrete
//! Laguerre polynomials; in the two-sided case it runs over all integers.
//!
//! Weighted moments `sum_m m^k w(m)` are evaluated in closed form from the
//! Eulerian-polynomial expansion of the repeatedly differentiated geometric series.

use serde::{Deserialize, Serialize};

use crate::error::{check_pole, Error, Result};

/// Largest degree accepted by [`gram_schmidt`].
pub const MAX_DEGREE: usize = 6;
/// Largest pole radius accepted by [`gram_schmidt`].
pub const MAX_POLE: f64 = 0.999;

/// Support of the regression weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    /// `w(m) = p^m` for `m >= 0`; zero for `m < 0`.
    Causal,
    /// `w(m) = p^|m|` for all integer `m`.
    TwoSided,
}

impl Sidedness {
    /// Weight at integer offset `m`.
    pub fn weight(self, p: f64, m: i64) -> f64 {
        match self {
            Sidedness::Causal if m < 0 => 0.0,
            _ => p.powi(m.unsigned_abs() as i32),
        }
    }

    /// `sum_m m^k w(m)` for this support.
    pub fn moment(self, k: usize, p: f64) -> Result<f64> {
        match self {
            Sidedness::Causal => one_sided_moment(k, p),
            Sidedness::TwoSided => two_sided_moment(k, p),
        }
    }
}

/// Degree, pole radius and support of a basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub degree: usize,
    pub pole: f64,
    pub sidedness: Sidedness,
}

impl BasisSpec {
    pub fn new(degree: usize, pole: f64, sidedness: Sidedness) -> Self {
        Self {
            degree,
            pole,
            sidedness,
        }
    }

    /// Builds a spec from the forgetting factor `sigma < 0`, with `p = e^sigma`.
    pub fn from_sigma(degree: usize, sigma: f64, sidedness: Sidedness) -> Self {
        Self::new(degree, sigma.exp(), sidedness)
    }

    pub fn validate(&self) -> Result<()> {
        check_pole("p", self.pole)
    }
}

/// Coefficients of the Eulerian polynomial `A_n(x)`, lowest power first.
///
/// `sum_{m>=0} m^n x^m = x A_n(x) / (1 - x)^(n+1)` for `n >= 1`, and `A_0 = 1`.
pub fn eulerian(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![1.0];
    }
    // E(n, j) = (j + 1) E(n-1, j) + (n - j) E(n-1, j-1)
    let mut row = vec![1.0];
    for order in 2..=n {
        let mut next = vec![0.0; order];
        for (j, slot) in next.iter_mut().enumerate() {
            let keep = if j < row.len() { (j + 1) as f64 * row[j] } else { 0.0 };
            let carry = if j >= 1 && j - 1 < row.len() {
                (order - j) as f64 * row[j - 1]
            } else {
                0.0
            };
            *slot = keep + carry;
        }
        row = next;
    }
    row
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `sum_{m=0}^inf m^k p^m`, evaluated in closed form.
pub fn one_sided_moment(k: usize, p: f64) -> Result<f64> {
    check_pole("p", p)?;
    let q = 1.0 - p;
    if k == 0 {
        return Ok(1.0 / q);
    }
    Ok(p * horner(&eulerian(k), p) / q.powi(k as i32 + 1))
}

/// `sum_{m=-inf}^inf m^k p^|m|`: zero for odd `k`, otherwise both one-sided sums
/// less the doubly counted `m = 0` term.
pub fn two_sided_moment(k: usize, p: f64) -> Result<f64> {
    check_pole("p", p)?;
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let origin = if k == 0 { 1.0 } else { 0.0 };
    Ok(2.0 * one_sided_moment(k, p)? - origin)
}

/// Lower-triangular matrix of orthonormal polynomial coefficients.
///
/// Row `k` holds `alpha[k][0..=k]`; entries above the diagonal are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMatrix {
    spec: BasisSpec,
    // row-major, (degree + 1)^2
    data: Vec<f64>,
}

impl AlphaMatrix {
    fn zeros(spec: BasisSpec) -> Self {
        let n = spec.degree + 1;
        Self {
            spec,
            data: vec![0.0; n * n],
        }
    }

    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    pub fn pole(&self) -> f64 {
        self.spec.pole
    }

    pub fn sidedness(&self) -> Sidedness {
        self.spec.sidedness
    }

    fn dim(&self) -> usize {
        self.spec.degree + 1
    }

    /// `alpha[k][j]`.
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[k * self.dim() + j]
    }

    fn set(&mut self, k: usize, j: usize, value: f64) {
        let n = self.dim();
        self.data[k * n + j] = value;
    }

    /// Coefficients of `psi_k`, lowest power first, length `B + 1`.
    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.data[k * n..(k + 1) * n]
    }

    /// `psi_k(m)`. The offset need not be an integer.
    pub fn eval(&self, k: usize, m: f64) -> f64 {
        horner(&self.row(k)[..=k], m)
    }

    /// `[psi_0(m), .., psi_B(m)]`.
    pub fn eval_all(&self, m: f64) -> Vec<f64> {
        (0..self.dim()).map(|k| self.eval(k, m)).collect()
    }

    /// `A^T A`, the inverse of the weighted moment (Gram) matrix.
    pub fn gram_inverse(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..n).map(|k| self.get(k, i) * self.get(k, j)).sum();
            }
        }
        out
    }
}

/// Orthonormalizes the monomials `1, m, .., m^B` under the spec's weight.
///
/// Classical Gram-Schmidt in ascending degree with one re-orthogonalization
/// pass. Each row is normalized to unit weighted norm with a positive leading
/// coefficient, which reproduces the printed signs of the closed-form table
/// (`alpha_10 < 0 < alpha_11` in the causal case).
pub fn gram_schmidt(spec: BasisSpec) -> Result<AlphaMatrix> {
    spec.validate()?;
    if spec.degree > MAX_DEGREE {
        return Err(Error::Conditioning {
            degree: spec.degree,
            pole: spec.pole,
            detail: format!("degree exceeds {MAX_DEGREE}"),
        });
    }
    if spec.pole > MAX_POLE {
        return Err(Error::Conditioning {
            degree: spec.degree,
            pole: spec.pole,
            detail: format!("pole radius exceeds {MAX_POLE}"),
        });
    }

    let n = spec.degree + 1;
    let moments = (0..2 * n - 1)
        .map(|k| spec.sidedness.moment(k, spec.pole))
        .collect::<Result<Vec<_>>>()?;
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate() {
                acc += ui * vj * moments[i + j];
            }
        }
        acc
    };

    let mut alpha = AlphaMatrix::zeros(spec);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        let raw_norm = moments[2 * k];
        for _ in 0..2 {
            for prev in &rows {
                let c = inner(&v, prev);
                for (vi, pi) in v.iter_mut().zip(prev) {
                    *vi -= c * pi;
                }
            }
        }
        let norm2 = inner(&v, &v);
        if !(norm2 > 1e-13 * raw_norm) {
            return Err(Error::Conditioning {
                degree: spec.degree,
                pole: spec.pole,
                detail: format!("residual norm^2 {norm2:e} of m^{k} is negligible against {raw_norm:e}"),
            });
        }
        let scale = norm2.sqrt().recip() * v[k].signum();
        for vi in v.iter_mut() {
            *vi *= scale;
        }
        // exact zeros above the diagonal and on parity-forbidden entries
        for j in k + 1..n {
            v[j] = 0.0;
        }
        if spec.sidedness == Sidedness::TwoSided {
            for j in 0..=k {
                if (k + j) % 2 == 1 {
                    v[j] = 0.0;
                }
            }
        }
        for (j, &vj) in v.iter().enumerate() {
            alpha.set(k, j, vj);
        }
        rows.push(v);
    }
    Ok(alpha)
}

/// Closed-form discrete Laguerre coefficients for `B = 2`, causal weight.
pub fn alpha_closed_form(p: f64) -> Result<AlphaMatrix> {
    check_pole("p", p)?;
    let q = 1.0 - p;
    let q5 = q.powi(5).sqrt();
    let mut alpha = AlphaMatrix::zeros(BasisSpec::new(2, p, Sidedness::Causal));
    alpha.set(0, 0, q.sqrt());
    alpha.set(1, 0, -(p * q).sqrt());
    alpha.set(1, 1, (q.powi(3) / p).sqrt());
    alpha.set(2, 0, p * q5 / (q * q));
    alpha.set(2, 1, -(3.0 * p + 1.0) * q5 / (2.0 * p * q));
    alpha.set(2, 2, q5 / (2.0 * p));
    Ok(alpha)
}
