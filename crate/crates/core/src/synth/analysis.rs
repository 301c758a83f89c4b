use crate::basis::{one_sided_moment, two_sided_moment};
use crate::error::{check_pole, Result};

/// Variance reduction factor of the causal quadratic low-pass at offset `q`:
/// the output noise variance per unit white input variance.
pub fn vrf(p: f64, q: f64) -> Result<f64> {
    check_pole("p", p)?;
    let f = [
        1.0,
        p - q + p * q,
        2.0 * p * q * (p - 1.0) + 0.5 * q * (p - 1.0).powi(2) * (q - 1.0) + p * p,
    ];
    let s = 1.0 + p;
    let a = [
        [1.0 / s, 1.0 / s.powi(2), 1.0 / s.powi(3)],
        [1.0 / s.powi(2), 2.0 / s.powi(3), 3.0 / s.powi(4)],
        [1.0 / s.powi(3), 3.0 / s.powi(4), 6.0 / s.powi(5)],
    ];
    let mut total = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            total += f[i] * a[i][j] * f[j];
        }
    }
    Ok((1.0 - p) * total)
}

/// Real-valued offset minimizing [`vrf`] for a given pole.
pub fn q_opt(p: f64) -> Result<f64> {
    check_pole("p", p)?;
    Ok((4.0 * p - (2.0 * (p * p + 4.0 * p + 1.0)).sqrt() + 2.0) / (2.0 * (1.0 - p)))
}

/// Factor converting accumulated power into average power for a 3-D weight
/// that is two-sided in x and y and causal in z.
pub fn power_norm(px: f64, py: f64, pz: f64) -> Result<f64> {
    check_pole("p_x", px)?;
    check_pole("p_y", py)?;
    check_pole("p_z", pz)?;
    Ok(1.0 / ((2.0 / (1.0 - px) - 1.0) * (2.0 / (1.0 - py) - 1.0) * (1.0 / (1.0 - pz))))
}

/// The same factor via the zeroth weighted moments.
pub fn power_norm_from_moments(px: f64, py: f64, pz: f64) -> Result<f64> {
    Ok(1.0 / (two_sided_moment(0, px)? * two_sided_moment(0, py)? * one_sided_moment(0, pz)?))
}
