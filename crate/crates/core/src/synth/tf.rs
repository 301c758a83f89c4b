use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_pole, Error, Result};
use crate::poly;

use super::{component_numerator, LdeCoeffs, Realization};

/// A ratio of polynomials in a delay variable, `a[0] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl Ratio {
    fn eval(&self, x: Complex64) -> Complex64 {
        let horner = |c: &[f64]| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * x + v);
        horner(&self.num) / horner(&self.den)
    }

    fn negated(&self) -> Self {
        Self {
            num: self.num.iter().map(|v| -v).collect(),
            den: self.den.clone(),
        }
    }
}

impl From<&LdeCoeffs> for Ratio {
    fn from(c: &LdeCoeffs) -> Self {
        Self {
            num: c.b.clone(),
            den: c.a.clone(),
        }
    }
}

/// `H(z) = C(z^-1) + A(z) + sum_k d_k z^-k`.
///
/// `causal` is a ratio in `z^-1`; the optional `anticausal` ratio is in `z`
/// (the backward pass of a non-causal filter); `direct` is an FIR term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTf {
    pub causal: Ratio,
    pub anticausal: Option<Ratio>,
    pub direct: Vec<f64>,
}

impl RationalTf {
    pub fn causal(num: Vec<f64>, den: Vec<f64>) -> Self {
        Self {
            causal: Ratio { num, den },
            anticausal: None,
            direct: Vec::new(),
        }
    }

    /// Complex gain at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zinv = z.inv();
        let mut h = self.causal.eval(zinv);
        if let Some(anti) = &self.anticausal {
            h += anti.eval(z);
        }
        let mut zk = Complex64::new(1.0, 0.0);
        for &d in &self.direct {
            h += zk * d;
            zk *= zinv;
        }
        h
    }

    pub fn dc_gain(&self) -> f64 {
        let sum = |c: &[f64]| c.iter().sum::<f64>();
        let ratio = |r: &Ratio| sum(&r.num) / sum(&r.den);
        ratio(&self.causal) + self.anticausal.as_ref().map_or(0.0, ratio) + sum(&self.direct)
    }

    pub fn is_causal(&self) -> bool {
        self.anticausal.is_none()
    }
}

impl From<&Realization> for RationalTf {
    fn from(r: &Realization) -> Self {
        match r {
            Realization::Causal(c) => Self {
                causal: c.into(),
                anticausal: None,
                direct: Vec::new(),
            },
            Realization::NonCausal { fwd, bwd } => Self {
                causal: fwd.into(),
                anticausal: Some(bwd.into()),
                direct: Vec::new(),
            },
        }
    }
}

/// `F_j(z) = Z{m^j p^m}` as a ratio in `z^-1`.
pub fn weighted_component_tf(j: usize, p: f64) -> Result<RationalTf> {
    check_pole("p", p)?;
    Ok(RationalTf::causal(
        component_numerator(j, p),
        poly::pole_power(p, j + 1),
    ))
}

/// Residual path `z^-q - H_lpf(z)`.
///
/// Causal inputs are folded into a single ratio with numerator
/// `z^-q a(z^-1) - b(z^-1)`.
pub fn highpass_from_lowpass(lpf: &RationalTf, q: usize) -> RationalTf {
    if lpf.is_causal() && lpf.direct.is_empty() {
        let mut num = vec![0.0; q];
        num.extend_from_slice(&lpf.causal.den);
        poly::add_scaled(&mut num, &lpf.causal.num, -1.0);
        return RationalTf::causal(num, lpf.causal.den.clone());
    }
    let mut direct: Vec<f64> = lpf.direct.iter().map(|v| -v).collect();
    if direct.len() <= q {
        direct.resize(q + 1, 0.0);
    }
    direct[q] += 1.0;
    RationalTf {
        causal: lpf.causal.negated(),
        anticausal: lpf.anticausal.as_ref().map(Ratio::negated),
        direct,
    }
}

/// Two-sided exponential-average subtraction filter,
/// `1 - (1-p)/(1+p) (1/(1 - p/z) + 1/(1 - p z) - 1)`.
pub fn exp_average_hpf(p: f64) -> Result<RationalTf> {
    check_pole("p", p)?;
    let g = (1.0 - p) / (1.0 + p);
    let half = Ratio {
        num: vec![-g],
        den: vec![1.0, -p],
    };
    Ok(RationalTf {
        causal: half.clone(),
        anticausal: Some(half),
        direct: vec![1.0 + g],
    })
}

/// Complex gain at normalized frequency `f` (cycles/sample), `|f| <= 0.5`.
pub fn freq_response(tf: &RationalTf, f: f64) -> Result<Complex64> {
    if !(f.abs() <= 0.5) {
        return Err(Error::Domain {
            name: "f",
            value: f,
            range: "[-0.5, 0.5]",
        });
    }
    Ok(tf.eval(Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f)))
}

/// Coarsest finite-difference step in radians/sample.
const FLATNESS_STEP: f64 = 1e-3;
/// Normalized derivative magnitude treated as zero.
const FLATNESS_THRESHOLD: f64 = 1e-6;
/// Orders examined.
const FLATNESS_MAX_ORDER: usize = 4;

/// Derivatives of `|H(w)|^2` at `w = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    /// Orders `1..=4`, each divided by `|H(0)|^2`.
    pub derivatives: Vec<f64>,
    /// Number of leading orders that vanish.
    pub orders: usize,
    /// Number of leading even orders (2, 4, ..) that vanish. Odd orders of a
    /// real filter vanish by symmetry, so this is the informative count.
    pub even_orders: usize,
}

/// `P(x)` re-expanded as `sum_k d_k (x - 1)^k`.
fn taylor_shift(c: &[f64]) -> Vec<f64> {
    let mut d = c.to_vec();
    // repeated synthetic division by (x - 1)
    for k in 0..d.len() {
        for i in (k..d.len() - 1).rev() {
            d[i] += d[i + 1];
        }
    }
    d
}

fn horner(c: &[f64], v: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * v + x)
}

/// The transfer function expanded about `z = 1`, so that evaluation near DC
/// does not cancel catastrophically.
struct NearDc {
    causal: (Vec<f64>, Vec<f64>),
    anticausal: Option<(Vec<f64>, Vec<f64>)>,
    direct: Vec<f64>,
}

impl NearDc {
    fn new(tf: &RationalTf) -> Self {
        let shift = |r: &Ratio| (taylor_shift(&r.num), taylor_shift(&r.den));
        Self {
            causal: shift(&tf.causal),
            anticausal: tf.anticausal.as_ref().map(shift),
            direct: taylor_shift(&tf.direct),
        }
    }

    /// `|H(e^{jw})|^2`, computed from `e^{-jw} - 1 = -2 sin^2(w/2) - j sin w`.
    /// Evaluated at `|w|` since the power response of a real filter is even.
    fn power_gain(&self, w: f64) -> f64 {
        let w = w.abs();
        let half = (w / 2.0).sin();
        let v = Complex64::new(-2.0 * half * half, -w.sin());
        let ratio = |(n, d): &(Vec<f64>, Vec<f64>), v| horner(n, v) / horner(d, v);
        let mut h = ratio(&self.causal, v) + horner(&self.direct, v);
        if let Some(anti) = &self.anticausal {
            h += ratio(anti, v.conj());
        }
        h.norm_sqr()
    }
}

fn central_difference(tf: &NearDc, order: usize, h: f64) -> f64 {
    // sum_i (-1)^i C(n, i) G((n/2 - i) h) / h^n, with the terms at +-x paired
    let mut binom = 1.0;
    let mut acc = 0.0;
    for i in 0..=order / 2 {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x = (order as f64 / 2.0 - i as f64) * h;
        let pair = if 2 * i == order {
            tf.power_gain(x)
        } else if order % 2 == 0 {
            tf.power_gain(x) + tf.power_gain(-x)
        } else {
            tf.power_gain(x) - tf.power_gain(-x)
        };
        acc += sign * binom * pair;
        binom = binom * (order - i) as f64 / (i + 1) as f64;
    }
    acc / h.powi(order as i32)
}

/// Central-difference derivatives of `|H(w)|^2` at zero, refined by two
/// Richardson steps (steps `h`, `h/2`, `h/4`).
pub fn flatness(tf: &RationalTf) -> FlatnessReport {
    let tf = &NearDc::new(tf);
    let g0 = tf.power_gain(0.0);
    let scale = if g0 > 0.0 { g0 } else { 1.0 };
    let derivatives: Vec<f64> = (1..=FLATNESS_MAX_ORDER)
        .map(|n| {
            let d: [f64; 3] = std::array::from_fn(|i| central_difference(tf, n, FLATNESS_STEP / (1 << i) as f64));
            let r1 = (4.0 * d[1] - d[0]) / 3.0;
            let r2 = (4.0 * d[2] - d[1]) / 3.0;
            (16.0 * r2 - r1) / 15.0 / scale
        })
        .collect();
    let orders = derivatives.iter().take_while(|d| d.abs() < FLATNESS_THRESHOLD).count();
    let even_orders = derivatives
        .iter()
        .skip(1)
        .step_by(2)
        .take_while(|d| d.abs() < FLATNESS_THRESHOLD)
        .count();
    FlatnessReport {
        derivatives,
        orders,
        even_orders,
    }
}

/// Number of leading derivatives of `|H(w)|^2` vanishing at `w = 0`.
pub fn flatness_orders(tf: &RationalTf) -> usize {
    flatness(tf).orders
}
