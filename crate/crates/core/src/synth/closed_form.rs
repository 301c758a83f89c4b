//! Closed-form quadratic (`B = 2`) coefficient expressions.
//!
//! These are an independent route to the same coefficients produced by
//! [`super::realize`]; the two are cross-checked in the test suite.

use crate::error::{check_pole, Error, Result};

use super::{Direction, LdeCoeffs};

fn triple_pole(p: f64) -> Vec<f64> {
    vec![1.0, -3.0 * p, 3.0 * p * p, -p * p * p]
}

/// Causal low-pass (analysis and synthesis) at offset `q`.
pub fn causal_lowpass(p: f64, q: f64) -> Result<LdeCoeffs> {
    check_pole("p", p)?;
    let c = (1.0 - p) / 2.0;
    let (p2, q2) = (p * p, q * q);
    let b0 = c * (q2 * p2 + 3.0 * q * p2 + 2.0 * p2 - 2.0 * q2 * p + 2.0 * p + q2 - 3.0 * q + 2.0);
    let b1 = -c * (2.0 * q2 * p2 + 8.0 * q * p2 + 6.0 * p2 - 4.0 * q2 * p - 4.0 * q * p + 6.0 * p + 2.0 * q2 - 4.0 * q);
    let b2 = c * (q2 * p2 + 5.0 * q * p2 + 6.0 * p2 - 2.0 * q2 * p - 4.0 * q * p + q2 - q);
    LdeCoeffs::new(vec![b0, b1, b2, 0.0], triple_pole(p), Direction::Causal)
}

/// Non-causal low-pass; the same coefficients drive both passes.
pub fn noncausal_lowpass(p: f64) -> Result<LdeCoeffs> {
    check_pole("p", p)?;
    let c = 2.0 * (p * p + 8.0 * p + 1.0);
    let outer = (p * p + 10.0 * p + 1.0) * (1.0 - p) / (1.0 + p) / c;
    let b0 = outer;
    let b1 = 3.0 / c * p * (p * p - 1.0);
    let b2 = 3.0 / c * p * p * (p * p - 1.0);
    let b3 = p.powi(3) * outer;
    LdeCoeffs::new(vec![b0, b1, b2, b3], triple_pole(p), Direction::FwdAndBwd)
}

/// Causal analysis filter for basis function `k <= 2`.
pub fn causal_analysis(k: usize, p: f64) -> Result<LdeCoeffs> {
    check_pole("p", p)?;
    let q = 1.0 - p;
    let (b, a) = match k {
        0 => (vec![q.sqrt(), 0.0, 0.0, 0.0], vec![1.0, -p, 0.0, 0.0]),
        1 => {
            let c = -(p * q.powi(3)).sqrt() / q;
            (vec![c, -c, 0.0, 0.0], vec![1.0, -2.0 * p, p * p, 0.0])
        }
        2 => {
            let c = p * q.powi(5).sqrt() / (q * q);
            (vec![c, -2.0 * c, c, 0.0], triple_pole(p))
        }
        _ => return Err(Error::Unsupported(format!("closed forms cover k <= 2, got {k}"))),
    };
    LdeCoeffs::new(b, a, Direction::Causal)
}

/// Forward half of the non-causal analysis filter for `k <= 2`. For `k = 1` the
/// backward half negates the numerator.
pub fn noncausal_analysis(k: usize, p: f64) -> Result<LdeCoeffs> {
    check_pole("p", p)?;
    let q = 1.0 - p;
    let (b, a, dir) = match k {
        0 => {
            let c = 0.5 * (q / (1.0 + p)).sqrt();
            (vec![c, c * p, 0.0, 0.0], vec![1.0, -p, 0.0, 0.0], Direction::FwdAndBwd)
        }
        1 => {
            let b1 = 0.5 * (2.0 * p * q.powi(3) / (1.0 + p)).sqrt();
            (
                vec![0.0, b1, 0.0, 0.0],
                vec![1.0, -2.0 * p, p * p, 0.0],
                Direction::FwdBwdAntisymmetric,
            )
        }
        2 => {
            let c = 2f64.sqrt() * q * q * (p.powi(3) + 9.0 * p * p + 9.0 * p + 1.0).sqrt();
            let q5 = q.powi(5);
            let mid = p * p - p + 1.0;
            (
                vec![
                    -(p * q5).sqrt() / c,
                    (p * q5).sqrt() * mid / c,
                    (p.powi(3) * q5).sqrt() * mid / c,
                    -(p.powi(7) * q5).sqrt() / c,
                ],
                triple_pole(p),
                Direction::FwdAndBwd,
            )
        }
        _ => return Err(Error::Unsupported(format!("closed forms cover k <= 2, got {k}"))),
    };
    LdeCoeffs::new(b, a, dir)
}
