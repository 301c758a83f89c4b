//! Synthetic clutter + moving point-target scenes, SNR metric and a
//! matched-filter baseline.
//!
//! Random draws use `ChaCha8Rng::seed_from_u64(seed)` in this order:
//!
//! 1. clutter velocity `v_clt` (x then y), uniform on `clutter_velocity`;
//! 2. target velocity `v_tgt` (x then y), uniform on `target_velocity`;
//! 3. sub-pixel offset `dp_tgt` (x then y), uniform on `[0, max_offset)`;
//! 4. per clutter component: `f_x`, `f_y` uniform on `[-f_max, f_max)`, then
//!    phase uniform on `[0, 2 pi)`;
//! 5. sensor noise, frame by frame in row-major order, standard normal scaled
//!    by `noise_std`.
//!
//! Draws 1 to 4 happen even when the corresponding term is disabled so that
//! the noise sequence depends only on the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Frame, FrameRole};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub n_components: usize,
    /// Largest clutter spatial frequency per axis, cycles/pixel.
    pub f_max: f64,
    pub clutter_amplitude: f64,
    pub dc_offset: f64,
    /// Scales the drawn clutter velocity.
    pub clutter_speed_factor: f64,
    /// Scales the drawn clutter frequencies.
    pub clutter_frequency_factor: f64,
    pub clutter_velocity: [f64; 2],
    pub i_max: f64,
    pub psf_std: f64,
    pub target_velocity: [f64; 2],
    /// Target centre in the final frame, before the sub-pixel offset.
    pub final_position: [f64; 2],
    pub max_offset: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frames: 64,
            width: 128,
            height: 128,
            n_components: 10,
            f_max: 1.0 / 33.0,
            clutter_amplitude: 0.1,
            dc_offset: 1.0,
            clutter_speed_factor: 1.0,
            clutter_frequency_factor: 1.0,
            clutter_velocity: [0.0, 1.0],
            i_max: 1.0,
            psf_std: 2.0,
            target_velocity: [-1.0, 0.0],
            final_position: [64.0, 64.0],
            max_offset: 1.0,
            noise_std: 0.5,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// No clutter and no DC, target and noise only.
    pub fn without_background(mut self) -> Self {
        self.n_components = 0;
        self.clutter_amplitude = 0.0;
        self.dc_offset = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.frames == 0 || self.width == 0 || self.height == 0 {
            return bad("frames, width and height must be positive");
        }
        let finite = [
            self.f_max,
            self.clutter_amplitude,
            self.dc_offset,
            self.clutter_speed_factor,
            self.clutter_frequency_factor,
            self.i_max,
            self.psf_std,
            self.max_offset,
            self.noise_std,
            self.clutter_velocity[0],
            self.clutter_velocity[1],
            self.target_velocity[0],
            self.target_velocity[1],
            self.final_position[0],
            self.final_position[1],
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("scenario parameters must be finite");
        }
        if !(0.0..=0.5).contains(&self.f_max) {
            return bad("f_max must lie in [0, 0.5]");
        }
        if self.psf_std <= 0.0 {
            return bad("psf_std must be positive");
        }
        if self.noise_std < 0.0 || self.max_offset < 0.0 {
            return bad("noise_std and max_offset must be non-negative");
        }
        if self.clutter_velocity[0] > self.clutter_velocity[1] || self.target_velocity[0] > self.target_velocity[1] {
            return bad("velocity ranges must be ordered [lo, hi]");
        }
        Ok(())
    }
}

/// One translating clutter sinusoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterComponent {
    pub fx: f64,
    pub fy: f64,
    /// Temporal frequency implied by the clutter motion.
    pub fz: f64,
    pub phase: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Target centre `(x, y)` in every frame.
    pub centers: Vec<[f64; 2]>,
    pub v_tgt: [f64; 2],
    pub v_clt: [f64; 2],
    pub offset: [f64; 2],
    pub psf_std: f64,
    pub components: Vec<ClutterComponent>,
}

impl GroundTruth {
    pub fn center(&self, index: usize) -> Option<[f64; 2]> {
        self.centers.get(index).copied()
    }
}

/// Temporal frequency of a spatial component translating at `(v_x, v_y)`.
pub fn clutter_tilt(vx: f64, vy: f64, fx: f64, fy: f64) -> f64 {
    -vx * fx - vy * fy
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Renders the scene described by `cfg`.
pub fn generate(cfg: &ScenarioConfig) -> Result<(Vec<Frame>, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let [clo, chi] = cfg.clutter_velocity;
    let [tlo, thi] = cfg.target_velocity;
    let v_clt = [uniform(&mut rng, clo, chi), uniform(&mut rng, clo, chi)];
    let v_clt = v_clt.map(|v| v * cfg.clutter_speed_factor);
    let v_tgt = [uniform(&mut rng, tlo, thi), uniform(&mut rng, tlo, thi)];
    let offset = [
        uniform(&mut rng, 0.0, cfg.max_offset),
        uniform(&mut rng, 0.0, cfg.max_offset),
    ];
    let components: Vec<ClutterComponent> = (0..cfg.n_components)
        .map(|_| {
            let fx = uniform(&mut rng, -cfg.f_max, cfg.f_max) * cfg.clutter_frequency_factor;
            let fy = uniform(&mut rng, -cfg.f_max, cfg.f_max) * cfg.clutter_frequency_factor;
            let phase = uniform(&mut rng, 0.0, std::f64::consts::TAU);
            ClutterComponent {
                fx,
                fy,
                fz: clutter_tilt(v_clt[0], v_clt[1], fx, fy),
                phase,
                amplitude: cfg.clutter_amplitude,
            }
        })
        .collect();
    let last = (cfg.frames - 1) as f64;
    let centers: Vec<[f64; 2]> = (0..cfg.frames)
        .map(|n| {
            let dt = n as f64 - last;
            [
                cfg.final_position[0] + offset[0] + v_tgt[0] * dt,
                cfg.final_position[1] + offset[1] + v_tgt[1] * dt,
            ]
        })
        .collect();
    let two_var = 2.0 * cfg.psf_std * cfg.psf_std;
    let mut frames = Vec::with_capacity(cfg.frames);
    for (n, c) in centers.iter().enumerate() {
        let t = n as f64;
        let mut frame = Frame::from_fn(cfg.width, cfg.height, n, FrameRole::Raw, |x, y| {
            let (x, y) = (x as f64, y as f64);
            let mut v = cfg.dc_offset;
            for k in &components {
                let arg = k.fx * (x - v_clt[0] * t) + k.fy * (y - v_clt[1] * t);
                v += k.amplitude * (std::f64::consts::TAU * arg + k.phase).cos();
            }
            let r2 = (x - c[0]).powi(2) + (y - c[1]).powi(2);
            v + cfg.i_max * (-r2 / two_var).exp()
        });
        if cfg.noise_std > 0.0 {
            for v in frame.data.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                *v += cfg.noise_std * e;
            }
        }
        frames.push(frame);
    }
    let truth = GroundTruth {
        centers,
        v_tgt,
        v_clt,
        offset,
        psf_std: cfg.psf_std,
        components,
    };
    Ok((frames, truth))
}

/// SNR values are clamped to `[-SNR_CAP_DB, SNR_CAP_DB]`.
pub const SNR_CAP_DB: f64 = 99.0;
/// Radius of the target exclusion zone, in PSF standard deviations.
pub const EXCLUSION_RADIUS: f64 = 5.0;
/// Scales a median absolute deviation to a Gaussian standard deviation.
const MAD_SCALE: f64 = 1.4826;

fn median(v: &mut [f64]) -> f64 {
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *m;
    if v.len() % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// `20 log10((value at the target cell - median) / (1.4826 MAD))`.
///
/// Statistics use the frame inside a border of `margin` pixels, excluding a
/// disc of radius `5 psf_std` around `center`. Returns `None` when the target
/// cell falls in the border.
pub fn measure_snr(frame: &Frame, center: [f64; 2], psf_std: f64, margin: usize) -> Option<f64> {
    let cx = center[0].round();
    let cy = center[1].round();
    let (w, h) = (frame.width as f64, frame.height as f64);
    let m = margin as f64;
    if !(cx >= m && cy >= m && cx < w - m && cy < h - m) {
        return None;
    }
    let radius2 = (EXCLUSION_RADIUS * psf_std).powi(2);
    let mut background = Vec::new();
    for y in margin..frame.height - margin {
        for x in margin..frame.width - margin {
            let d2 = (x as f64 - center[0]).powi(2) + (y as f64 - center[1]).powi(2);
            if d2 > radius2 {
                background.push(frame.get(x, y));
            }
        }
    }
    if background.is_empty() {
        return None;
    }
    let med = median(&mut background);
    let mut dev: Vec<f64> = background.iter().map(|v| (v - med).abs()).collect();
    let spread = MAD_SCALE * median(&mut dev);
    let peak = frame.get(cx as usize, cy as usize) - med;
    let db = if spread > 0.0 {
        20.0 * (peak / spread).log10()
    } else if peak > 0.0 {
        SNR_CAP_DB
    } else {
        -SNR_CAP_DB
    };
    Some(if db.is_nan() {
        -SNR_CAP_DB
    } else {
        db.clamp(-SNR_CAP_DB, SNR_CAP_DB)
    })
}

/// Kernel extent of the matched filter in every dimension.
pub const MF_SUPPORT: usize = 9;
const MF_HALF: isize = (MF_SUPPORT / 2) as isize;

/// Output of a bank of 3-D matched filters.
#[derive(Debug, Clone)]
pub struct MatchedFilterOutput {
    /// Per-pixel maximum of the squared correlation over the bank, one frame per
    /// centre frame. Frame `index` is the kernel's middle frame.
    pub power: Vec<Frame>,
    /// Index into the velocity list of the winning hypothesis, per pixel.
    pub best: Vec<Vec<usize>>,
}

impl MatchedFilterOutput {
    pub fn best_velocity(&self, velocities: &[(f64, f64)], frame: usize, x: usize, y: usize) -> (f64, f64) {
        let f = &self.power[frame];
        velocities[self.best[frame][y * f.width + x]]
    }
}

fn gaussian_taps(shift: f64, std: f64) -> [f64; MF_SUPPORT] {
    let mut t = [0.0; MF_SUPPORT];
    for (i, v) in t.iter_mut().enumerate() {
        let d = i as f64 - MF_HALF as f64 - shift;
        *v = (-d * d / (2.0 * std * std)).exp();
    }
    t
}

fn correlate_rows(src: &[f64], width: usize, taps: &[f64; MF_SUPPORT], dst: &mut [f64]) {
    dst.par_chunks_mut(width)
        .zip(src.par_chunks(width))
        .for_each(|(out, row)| {
            for (x, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, &t) in taps.iter().enumerate() {
                    let xi = x as isize + i as isize - MF_HALF;
                    if xi >= 0 && (xi as usize) < width {
                        acc += t * row[xi as usize];
                    }
                }
                *o = acc;
            }
        });
}

fn correlate_columns(src: &[f64], width: usize, height: usize, taps: &[f64; MF_SUPPORT], dst: &mut [f64]) {
    dst.par_chunks_mut(width).enumerate().for_each(|(y, out)| {
        out.fill(0.0);
        for (i, &t) in taps.iter().enumerate() {
            let yi = y as isize + i as isize - MF_HALF;
            if yi >= 0 && (yi as usize) < height {
                let row = &src[yi as usize * width..(yi as usize + 1) * width];
                for (o, &v) in out.iter_mut().zip(row) {
                    *o += t * v;
                }
            }
        }
    });
}

/// Direct 9x9x9 correlation of `frames` with unit-energy translated Gaussians.
///
/// The kernel for velocity `v` at frame offset `dz` in `-4..=4` is a Gaussian of
/// std `psf_std` centred at `v dz`. Outputs exist for centre frames with four
/// frames on either side.
pub fn matched_filter_bank(frames: &[Frame], velocities: &[(f64, f64)], psf_std: f64) -> Result<MatchedFilterOutput> {
    if velocities.is_empty() {
        return Err(Error::Config("empty velocity bank".into()));
    }
    if velocities.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) || !(psf_std > 0.0) {
        return Err(Error::Config(
            "matched filter parameters must be finite and positive".into(),
        ));
    }
    let Some(first) = frames.first() else {
        return Ok(MatchedFilterOutput {
            power: Vec::new(),
            best: Vec::new(),
        });
    };
    let (w, h) = (first.width, first.height);
    for f in frames {
        f.check_shape(w, h)?;
    }
    let half = MF_HALF as usize;
    let mut power = Vec::new();
    let mut best = Vec::new();
    let mut rows = vec![0.0; w * h];
    let mut cols = vec![0.0; w * h];
    for c in half..frames.len().saturating_sub(half) {
        let mut out = Frame::zeros(w, h, frames[c].index, FrameRole::Power);
        let mut winner = vec![0usize; w * h];
        for (vi, &(vx, vy)) in velocities.iter().enumerate() {
            let taps: Vec<_> = (-MF_HALF..=MF_HALF)
                .map(|dz| {
                    (
                        gaussian_taps(vx * dz as f64, psf_std),
                        gaussian_taps(vy * dz as f64, psf_std),
                    )
                })
                .collect();
            let energy: f64 = taps
                .iter()
                .map(|(tx, ty)| tx.iter().map(|v| v * v).sum::<f64>() * ty.iter().map(|v| v * v).sum::<f64>())
                .sum();
            let norm = energy.sqrt().recip();
            let mut acc = vec![0.0; w * h];
            for (i, (tx, ty)) in taps.iter().enumerate() {
                let src = &frames[c + i - half];
                correlate_rows(&src.data, w, tx, &mut rows);
                correlate_columns(&rows, w, h, ty, &mut cols);
                for (a, v) in acc.iter_mut().zip(&cols) {
                    *a += v;
                }
            }
            for ((o, b), a) in out.data.iter_mut().zip(winner.iter_mut()).zip(&acc) {
                let p = (a * norm).powi(2);
                if vi == 0 || p > *o {
                    *o = p;
                    *b = vi;
                }
            }
        }
        power.push(out);
        best.push(winner);
    }
    Ok(MatchedFilterOutput { power, best })
}

/// `{-1, 0, 1}^2`, the coarse velocity grid.
pub fn velocity_grid(values: &[f64]) -> Vec<(f64, f64)> {
    values
        .iter()
        .flat_map(|&vx| values.iter().map(move |&vy| (vx, vy)))
        .collect()
}
