//! Linear-difference-equation coefficients for every filter role, and the
//! design-analysis math around them.
//!
//! A filter whose impulse response is `sum_j c_j m^j p^m` is a linear
//! combination of the weighted component transfer functions
//! `F_j(z) = Z{m^j p^m}`, all sharing a repeated real pole at `z = p`.
//! [`realize`] turns such a monomial weight vector `c` into coefficients:
//!
//! * analysis of basis function `k`: `c = alpha_k` (row `k` of the alpha matrix)
//! * analysis and synthesis at offset `q`: `c = A^T A phi(q)`
//! * derivative of the fit at offset `q`: `c = A^T A D^T phi(q)`
//!
//! Two-sided designs are realized as a forward and a backward pass whose
//! outputs are summed; each pass carries half of the `m = 0` tap.

mod analysis;
pub mod closed_form;
mod tf;

pub use analysis::{power_norm, power_norm_from_moments, q_opt, vrf};
pub use tf::{
    exp_average_hpf, flatness, flatness_orders, freq_response, highpass_from_lowpass, weighted_component_tf,
    FlatnessReport, Ratio, RationalTf,
};

use serde::{Deserialize, Serialize};

use crate::basis::{gram_schmidt, AlphaMatrix, BasisSpec, Sidedness};
use crate::error::{check_pole, Error, Result};
use crate::poly;

/// How a coefficient set is applied along its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Single causal pass.
    Causal,
    /// Forward half of a non-causal pair.
    Fwd,
    /// Backward half of a non-causal pair (applied to the reversed sequence).
    Bwd,
    /// Both halves share these coefficients.
    FwdAndBwd,
    /// The backward half negates every numerator coefficient of the forward half.
    FwdBwdAntisymmetric,
}

/// Numerator `b` and denominator `a` of `sum a_m y(n-m) = sum b_m x(n-m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdeCoeffs {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub direction: Direction,
}

impl LdeCoeffs {
    /// Normalizes so that `a[0] = 1`.
    pub fn new(b: Vec<f64>, a: Vec<f64>, direction: Direction) -> Result<Self> {
        let a0 = *a
            .first()
            .ok_or_else(|| Error::Unsupported("empty denominator".into()))?;
        if a0 == 0.0 || !a0.is_finite() {
            return Err(Error::Unsupported(format!("leading denominator coefficient {a0}")));
        }
        if b.is_empty() {
            return Err(Error::Unsupported("empty numerator".into()));
        }
        let (b, a) = if a0 == 1.0 {
            (b, a)
        } else {
            (b.iter().map(|v| v / a0).collect(), a.iter().map(|v| v / a0).collect())
        };
        Ok(Self { b, a, direction })
    }

    pub fn identity() -> Self {
        Self {
            b: vec![1.0],
            a: vec![1.0],
            direction: Direction::Causal,
        }
    }

    /// `H(1) = sum b / sum a`.
    pub fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Numerator order `M_b`, ignoring trailing zeros.
    pub fn numerator_order(&self) -> usize {
        poly::trim(&self.b).len() - 1
    }

    /// Denominator order `M_a`, ignoring trailing zeros.
    pub fn denominator_order(&self) -> usize {
        poly::trim(&self.a).len() - 1
    }

    /// Copy with every numerator coefficient negated.
    pub fn negated(&self, direction: Direction) -> Self {
        Self {
            b: self.b.iter().map(|v| -v).collect(),
            a: self.a.clone(),
            direction,
        }
    }
}

/// A designed filter: one causal pass, or a forward/backward pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Realization {
    Causal(LdeCoeffs),
    NonCausal { fwd: LdeCoeffs, bwd: LdeCoeffs },
}

impl Realization {
    /// Gain at zero frequency of the complete filter (both passes summed).
    pub fn dc_gain(&self) -> f64 {
        match self {
            Realization::Causal(c) => c.dc_gain(),
            Realization::NonCausal { fwd, bwd } => fwd.dc_gain() + bwd.dc_gain(),
        }
    }

    pub fn sidedness(&self) -> Sidedness {
        match self {
            Realization::Causal(_) => Sidedness::Causal,
            Realization::NonCausal { .. } => Sidedness::TwoSided,
        }
    }

    /// The forward (or only) coefficient set.
    pub fn forward(&self) -> &LdeCoeffs {
        match self {
            Realization::Causal(c) => c,
            Realization::NonCausal { fwd, .. } => fwd,
        }
    }

    pub fn to_tf(&self) -> RationalTf {
        RationalTf::from(self)
    }

    /// Kernel `h(m)` for `m = -extent..=extent` (index `m + extent`). Causal
    /// kernels are zero for `m < 0`.
    pub fn kernel(&self, extent: usize) -> Vec<f64> {
        let mut out = vec![0.0; 2 * extent + 1];
        match self {
            Realization::Causal(c) => {
                for (m, h) in impulse_response(c, extent + 1).into_iter().enumerate() {
                    out[extent + m] = h;
                }
            }
            Realization::NonCausal { fwd, bwd } => {
                let hf = impulse_response(fwd, extent + 1);
                let hb = impulse_response(bwd, extent + 1);
                for m in 0..=extent {
                    out[extent + m] += hf[m];
                    out[extent - m] += hb[m];
                }
            }
        }
        out
    }
}

/// What a designed filter estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// Regression coefficient of basis function `k`.
    AnalysisOnly(usize),
    /// The fitted polynomial evaluated at the synthesis offset.
    AnalysisSynthesis,
    /// Slope of the fitted polynomial at the synthesis offset.
    Derivative,
}

/// Design parameters of one filter along one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Pole radius `p = e^sigma`.
    pub pole: f64,
    /// Synthesis offset `q`; may be fractional unless a residual is formed.
    pub offset: f64,
    pub degree: usize,
    pub sidedness: Sidedness,
    pub role: Role,
}

impl FilterSpec {
    pub fn sigma(&self) -> f64 {
        self.pole.ln()
    }

    pub fn validate(&self) -> Result<()> {
        check_pole("p", self.pole)?;
        if !self.offset.is_finite() {
            return Err(Error::Domain {
                name: "q",
                value: self.offset,
                range: "finite",
            });
        }
        if let Role::AnalysisOnly(k) = self.role {
            if k > self.degree {
                return Err(Error::Unsupported(format!(
                    "analysis index {k} exceeds degree {}",
                    self.degree
                )));
            }
        }
        Ok(())
    }

    pub fn design(&self) -> Result<Realization> {
        self.validate()?;
        match self.role {
            Role::AnalysisOnly(k) => analysis_filter(k, self.pole, self.sidedness),
            Role::AnalysisSynthesis => {
                synthesis_filter_with_degree(self.pole, self.offset, self.degree, self.sidedness)
            }
            Role::Derivative => {
                if self.sidedness != Sidedness::Causal {
                    return Err(Error::Unsupported("derivative filters are causal only".into()));
                }
                derivative_filter_with_degree(self.pole, self.offset, self.degree)
            }
        }
    }
}

/// Realizes the filter whose kernel is `sum_j c[j] m^j w(m)`.
///
/// Coefficient vectors are padded with trailing zeros to `len` entries.
pub fn realize(c: &[f64], p: f64, sidedness: Sidedness, len: usize) -> Result<Realization> {
    check_pole("p", p)?;
    let fwd = realize_half(c, p, sidedness == Sidedness::TwoSided, len);
    match sidedness {
        Sidedness::Causal => Ok(Realization::Causal(LdeCoeffs::new(fwd.0, fwd.1, Direction::Causal)?)),
        Sidedness::TwoSided => {
            let mirrored: Vec<f64> = c
                .iter()
                .enumerate()
                .map(|(j, &v)| if j % 2 == 1 { -v } else { v })
                .collect();
            let bwd = realize_half(&mirrored, p, true, len);
            let (tag_f, tag_b) = if fwd.0 == bwd.0 {
                (Direction::FwdAndBwd, Direction::FwdAndBwd)
            } else if fwd.0.iter().zip(&bwd.0).all(|(f, b)| *f == -*b) {
                (Direction::FwdBwdAntisymmetric, Direction::FwdBwdAntisymmetric)
            } else {
                (Direction::Fwd, Direction::Bwd)
            };
            Ok(Realization::NonCausal {
                fwd: LdeCoeffs::new(fwd.0, fwd.1, tag_f)?,
                bwd: LdeCoeffs::new(bwd.0, bwd.1, tag_b)?,
            })
        }
    }
}

fn realize_half(c: &[f64], p: f64, split_origin: bool, len: usize) -> (Vec<f64>, Vec<f64>) {
    let order = c.iter().rposition(|&v| v != 0.0).map_or(1, |j| j + 1);
    let mut num = vec![0.0];
    for (j, &cj) in c.iter().enumerate().take(order) {
        if cj == 0.0 {
            continue;
        }
        let component = component_numerator(j, p);
        let lifted = poly::mul(&component, &poly::pole_power(p, order - j - 1));
        poly::add_scaled(&mut num, &lifted, cj);
    }
    if split_origin {
        let c0 = c.first().copied().unwrap_or(0.0);
        poly::add_scaled(&mut num, &poly::pole_power(p, order), -0.5 * c0);
    }
    let den = poly::pole_power(p, order);
    (poly::pad(num, len), poly::pad(den, len))
}

/// Numerator of `F_j(z) = Z{m^j p^m}` over `(1 - p z^-1)^(j+1)`.
pub(crate) fn component_numerator(j: usize, p: f64) -> Vec<f64> {
    if j == 0 {
        return vec![1.0];
    }
    let mut out = vec![0.0];
    let mut pk = p;
    for e in crate::basis::eulerian(j) {
        out.push(e * pk);
        pk *= p;
    }
    out
}

fn padded_len(degree: usize) -> usize {
    degree.max(2) + 2
}

/// Analysis filter for basis function `k`; pole multiplicity `k + 1`.
pub fn analysis_filter(k: usize, p: f64, sidedness: Sidedness) -> Result<Realization> {
    let alpha = gram_schmidt(BasisSpec::new(k, p, sidedness))?;
    realize(alpha.row(k), p, sidedness, padded_len(k))
}

/// Analysis filters for all `k <= alpha.degree()` sharing one basis.
pub fn analysis_bank(alpha: &AlphaMatrix) -> Result<Vec<Realization>> {
    let len = padded_len(alpha.degree());
    (0..=alpha.degree())
        .map(|k| realize(&alpha.row(k)[..=k], alpha.pole(), alpha.sidedness(), len))
        .collect()
}

/// Quadratic analysis-and-synthesis (low-pass) filter evaluated at offset `q`.
pub fn synthesis_filter(p: f64, q: f64, sidedness: Sidedness) -> Result<Realization> {
    synthesis_filter_with_degree(p, q, 2, sidedness)
}

/// Analysis-and-synthesis filter of any degree; pole multiplicity `degree + 1`.
pub fn synthesis_filter_with_degree(p: f64, q: f64, degree: usize, sidedness: Sidedness) -> Result<Realization> {
    if sidedness == Sidedness::TwoSided && q != 0.0 {
        return Err(Error::Unsupported(format!(
            "two-sided synthesis requires q = 0, got {q}"
        )));
    }
    let alpha = gram_schmidt(BasisSpec::new(degree, p, sidedness))?;
    let phi: Vec<f64> = (0..=degree).map(|j| q.powi(j as i32)).collect();
    let c = mat_vec(&alpha.gram_inverse(), &phi);
    realize(&c, p, sidedness, padded_len(degree))
}

/// Quadratic derivative filter: the slope of the fit at offset `q`, per sample of `n`.
pub fn derivative_filter(p: f64, q: f64) -> Result<Realization> {
    derivative_filter_with_degree(p, q, 2)
}

pub fn derivative_filter_with_degree(p: f64, q: f64, degree: usize) -> Result<Realization> {
    let alpha = gram_schmidt(BasisSpec::new(degree, p, Sidedness::Causal))?;
    // phi(q)^T D with D[j][j+1] = -(j+1): offsets m grow opposite to n
    let d: Vec<f64> = (0..=degree)
        .map(|l| {
            if l == 0 {
                0.0
            } else {
                -(l as f64) * q.powi(l as i32 - 1)
            }
        })
        .collect();
    let c = mat_vec(&alpha.gram_inverse(), &d);
    realize(&c, p, Sidedness::Causal, padded_len(degree))
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// First `n` impulse-response samples by direct recursion.
pub fn impulse_response(coeffs: &LdeCoeffs, n: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = coeffs.b.get(i).copied().unwrap_or(0.0);
        for (m, &am) in coeffs.a.iter().enumerate().skip(1) {
            if m > i {
                break;
            }
            acc -= am * y[i - m];
        }
        y[i] = acc;
    }
    y
}
