//! Small helpers for polynomials in `z^-1`, lowest power first.

pub(crate) fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub(crate) fn add_scaled(acc: &mut Vec<f64>, term: &[f64], scale: f64) {
    if acc.len() < term.len() {
        acc.resize(term.len(), 0.0);
    }
    for (a, &t) in acc.iter_mut().zip(term) {
        *a += scale * t;
    }
}

/// `(1 - p z^-1)^n`.
pub(crate) fn pole_power(p: f64, n: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..n {
        out = mul(&out, &[1.0, -p]);
    }
    out
}

pub(crate) fn pad(mut v: Vec<f64>, len: usize) -> Vec<f64> {
    if v.len() < len {
        v.resize(len, 0.0);
    }
    v
}

pub(crate) fn trim(v: &[f64]) -> &[f64] {
    let end = v.iter().rposition(|&c| c != 0.0).map_or(1, |i| i + 1);
    &v[..end.min(v.len())]
}
