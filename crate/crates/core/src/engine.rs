//! Streaming recursive evaluation.
//!
//! All recursions are Direct Form I with zero initial conditions. Spatial
//! passes treat samples beyond a row or column as zero; no edge reflection is
//! applied, so the first few samples along each edge carry start-up
//! transients (see [`crop_margin`]).
//!
//! Rows and columns are independent, so frame-level passes are split across
//! threads by line. Every line is computed by the same sequential loop
//! regardless of the split, so results do not depend on the thread count.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::synth::{LdeCoeffs, Realization};

/// What a frame holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameRole {
    /// Raw sensor input `J`.
    Raw,
    /// Estimated background `I_hat`.
    Background,
    /// Background-subtracted residual `I_eps`.
    Residual,
    /// Accumulated foreground power `P_hat`.
    Power,
    Other,
}

impl FrameRole {
    pub fn tag(self) -> &'static str {
        match self {
            FrameRole::Raw => "raw",
            FrameRole::Background => "background",
            FrameRole::Residual => "residual",
            FrameRole::Power => "power",
            FrameRole::Other => "other",
        }
    }
}

/// One frame of a 3-D sample grid: `width x height` pixels at frame `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub index: usize,
    pub role: FrameRole,
    /// Row-major, `data[y * width + x]`.
    pub data: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, index: usize, role: FrameRole, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} samples", width * height),
                found: format!("{} samples", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            index,
            role,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, index: usize, role: FrameRole) -> Self {
        Self {
            width,
            height,
            index,
            role,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        index: usize,
        role: FrameRole,
        f: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            index,
            role,
            data,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn with_role(mut self, role: FrameRole) -> Self {
        self.role = role;
        self
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::NonFinite {
                value: self.data[i],
                location: format!("frame {} pixel ({}, {})", self.index, i % self.width, i / self.width),
            }),
        }
    }

    pub fn check_shape(&self, width: usize, height: usize) -> Result<()> {
        if self.width == width && self.height == height {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: format!("{width}x{height}"),
                found: format!("{}x{}", self.width, self.height),
            })
        }
    }

    /// Swaps rows and columns.
    pub fn transposed(&self) -> Frame {
        let mut out = Frame::zeros(self.height, self.width, self.index, self.role);
        for y in 0..self.height {
            for x in 0..self.width {
                out.data[x * self.height + y] = self.data[y * self.width + x];
            }
        }
        out
    }

    /// `(x, y, value)` of the largest sample inside a border of `margin` pixels.
    pub fn argmax(&self, margin: usize) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for y in margin..self.height.saturating_sub(margin) {
            for x in margin..self.width.saturating_sub(margin) {
                let v = self.get(x, y);
                if best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((x, y, v));
                }
            }
        }
        best
    }
}

/// Spatial crop margin `ceil(6 / -sigma)` excluding edge transients.
pub fn crop_margin(sigma: f64) -> usize {
    (6.0 / -sigma).ceil() as usize
}

/// Frames flagged as temporal warm-up: `max(q, ceil(6 / -sigma_z))`.
pub fn warmup_frames(delay: usize, sigma_z: f64) -> usize {
    delay.max(crop_margin(sigma_z))
}

/// Coefficients with trailing zeros removed, ready for recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct Recursion {
    b: Vec<f64>,
    a: Vec<f64>,
}

impl Recursion {
    pub fn new(coeffs: &LdeCoeffs) -> Self {
        Self {
            b: poly::trim(&coeffs.b).to_vec(),
            a: poly::trim(&coeffs.a).to_vec(),
        }
    }

    fn input_order(&self) -> usize {
        self.b.len() - 1
    }

    fn output_order(&self) -> usize {
        self.a.len() - 1
    }

    /// One step of `y(n) = sum b_m x(n-m) - sum a_m y(n-m)`. `xh` and `yh`
    /// hold the most recent inputs and outputs, newest first.
    #[inline]
    fn step(&self, x: f64, xh: &mut [f64], yh: &mut [f64]) -> f64 {
        let mut acc = self.b[0] * x;
        for (bm, xm) in self.b[1..].iter().zip(xh.iter()) {
            acc += bm * xm;
        }
        for (am, ym) in self.a[1..].iter().zip(yh.iter()) {
            acc -= am * ym;
        }
        if !xh.is_empty() {
            xh.copy_within(..xh.len() - 1, 1);
            xh[0] = x;
        }
        if !yh.is_empty() {
            yh.copy_within(..yh.len() - 1, 1);
            yh[0] = acc;
        }
        acc
    }

    /// Zero-state pass over a strided line, accumulating into `out` when
    /// `accumulate` is set. `reverse` walks the line from its far end.
    fn run_line(&self, input: &[f64], out: &mut [f64], reverse: bool, accumulate: bool) {
        let mut xh = vec![0.0; self.input_order()];
        let mut yh = vec![0.0; self.output_order()];
        let n = input.len();
        for i in 0..n {
            let j = if reverse { n - 1 - i } else { i };
            let y = self.step(input[j], &mut xh, &mut yh);
            if accumulate {
                out[j] += y;
            } else {
                out[j] = y;
            }
        }
    }
}

/// Recursion state carried between chunks of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionState {
    x_hist: Vec<f64>,
    y_hist: Vec<f64>,
}

impl RecursionState {
    /// Zero initial conditions sized for `coeffs`.
    pub fn new(coeffs: &LdeCoeffs) -> Self {
        let r = Recursion::new(coeffs);
        Self {
            x_hist: vec![0.0; r.input_order()],
            y_hist: vec![0.0; r.output_order()],
        }
    }
}

/// Causal recursion over `x`, continuing from and updating `state`.
pub fn filter_1d(coeffs: &LdeCoeffs, x: &[f64], state: &mut RecursionState) -> Result<Vec<f64>> {
    let r = Recursion::new(coeffs);
    if state.x_hist.len() != r.input_order() || state.y_hist.len() != r.output_order() {
        return Err(Error::DimensionMismatch {
            expected: format!("state of order ({}, {})", r.input_order(), r.output_order()),
            found: format!("({}, {})", state.x_hist.len(), state.y_hist.len()),
        });
    }
    let mut y = Vec::with_capacity(x.len());
    for (i, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                location: format!("sample {i}"),
            });
        }
        y.push(r.step(v, &mut state.x_hist, &mut state.y_hist));
    }
    Ok(y)
}

/// `fwd(x) + reverse(bwd(reverse(x)))` with zero state at both ends.
pub fn filter_1d_noncausal(fwd: &LdeCoeffs, bwd: &LdeCoeffs, x: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            value: x[i],
            location: format!("sample {i}"),
        });
    }
    let mut y = vec![0.0; x.len()];
    Recursion::new(fwd).run_line(x, &mut y, false, false);
    Recursion::new(bwd).run_line(x, &mut y, true, true);
    Ok(y)
}

/// Applies either realization to a finite sequence with zero initial state.
pub fn apply_1d(filter: &Realization, x: &[f64]) -> Result<Vec<f64>> {
    match filter {
        Realization::Causal(c) => filter_1d(c, x, &mut RecursionState::new(c)),
        Realization::NonCausal { fwd, bwd } => filter_1d_noncausal(fwd, bwd, x),
    }
}

/// A realization compiled for line passes.
#[derive(Debug, Clone)]
pub struct LineFilter {
    fwd: Recursion,
    bwd: Option<Recursion>,
}

impl LineFilter {
    pub fn new(filter: &Realization) -> Self {
        match filter {
            Realization::Causal(c) => Self {
                fwd: Recursion::new(c),
                bwd: None,
            },
            Realization::NonCausal { fwd, bwd } => Self {
                fwd: Recursion::new(fwd),
                bwd: Some(Recursion::new(bwd)),
            },
        }
    }

    fn run(&self, input: &[f64], out: &mut [f64]) {
        self.fwd.run_line(input, out, false, false);
        if let Some(bwd) = &self.bwd {
            bwd.run_line(input, out, true, true);
        }
    }
}

/// Filters every row (the x dimension) of a frame.
pub fn filter_rows(frame: &Frame, filter: &LineFilter) -> Frame {
    let mut out = Frame::zeros(frame.width, frame.height, frame.index, frame.role);
    if frame.width == 0 {
        return out;
    }
    out.data
        .par_chunks_mut(frame.width)
        .zip(frame.data.par_chunks(frame.width))
        .for_each(|(dst, src)| filter.run(src, dst));
    out
}

/// Filters every column (the y dimension) of a frame.
pub fn filter_columns(frame: &Frame, filter: &LineFilter) -> Frame {
    filter_rows(&frame.transposed(), filter).transposed()
}

/// Separable spatial pass: all rows with `x_filter`, then all columns with `y_filter`.
pub fn filter_frame_spatial(frame: &Frame, x_filter: &Realization, y_filter: &Realization) -> Result<Frame> {
    frame.check_finite()?;
    let rows = filter_rows(frame, &LineFilter::new(x_filter));
    Ok(filter_columns(&rows, &LineFilter::new(y_filter)))
}

/// Per-pixel causal recursion across frames.
#[derive(Debug, Clone)]
pub struct TemporalFilter {
    recursion: Recursion,
    width: usize,
    height: usize,
    // per-pixel histories, newest first, padded to at least one slot per pixel
    x_hist: Vec<f64>,
    y_hist: Vec<f64>,
}

impl TemporalFilter {
    pub fn new(coeffs: &LdeCoeffs, width: usize, height: usize) -> Self {
        let recursion = Recursion::new(coeffs);
        let n = width * height;
        Self {
            x_hist: vec![0.0; n * recursion.input_order().max(1)],
            y_hist: vec![0.0; n * recursion.output_order().max(1)],
            recursion,
            width,
            height,
        }
    }

    /// Advances every pixel by one frame and returns the filtered frame.
    pub fn advance(&mut self, frame: &Frame) -> Result<Frame> {
        frame.check_shape(self.width, self.height)?;
        let mut out = Frame::zeros(frame.width, frame.height, frame.index, frame.role);
        let (nb, na) = (self.recursion.input_order(), self.recursion.output_order());
        let (sb, sa) = (nb.max(1), na.max(1));
        let rec = &self.recursion;
        const CHUNK: usize = 1024;
        out.data
            .par_chunks_mut(CHUNK)
            .zip(frame.data.par_chunks(CHUNK))
            .zip(self.x_hist.par_chunks_mut(CHUNK * sb))
            .zip(self.y_hist.par_chunks_mut(CHUNK * sa))
            .for_each(|(((dst, src), xh), yh)| {
                for (i, (d, &s)) in dst.iter_mut().zip(src).enumerate() {
                    *d = rec.step(s, &mut xh[i * sb..i * sb + nb], &mut yh[i * sa..i * sa + na]);
                }
            });
        Ok(out)
    }
}

/// Fixed-length delay line of whole frames.
#[derive(Debug, Clone, Default)]
pub struct DelayLine {
    depth: usize,
    frames: VecDeque<Frame>,
}

impl DelayLine {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            frames: VecDeque::with_capacity(depth + 1),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Pushes a frame and returns the one `depth` frames older, once available.
    pub fn push(&mut self, frame: Frame) -> Option<Frame> {
        self.frames.push_back(frame);
        if self.frames.len() > self.depth {
            self.frames.pop_front()
        } else {
            None
        }
    }
}

/// Temporal filter plus the raw-frame delay used to align residuals.
#[derive(Debug, Clone)]
pub struct TemporalState {
    pub filter: TemporalFilter,
    pub delay: DelayLine,
}

/// Result of one temporal step.
#[derive(Debug, Clone)]
pub struct TemporalOutput {
    pub filtered: Frame,
    /// The raw input from `delay` frames earlier; `None` during warm-up.
    pub delayed: Option<Frame>,
}

impl TemporalState {
    pub fn new(coeffs: &LdeCoeffs, width: usize, height: usize, delay: usize) -> Self {
        Self {
            filter: TemporalFilter::new(coeffs, width, height),
            delay: DelayLine::new(delay),
        }
    }
}

/// One temporal step: filters `filtered_input` per pixel and pushes `raw` into
/// the delay line.
pub fn advance_temporal(state: &mut TemporalState, filtered_input: &Frame, raw: Frame) -> Result<TemporalOutput> {
    let filtered = state.filter.advance(filtered_input)?;
    let delayed = state.delay.push(raw);
    Ok(TemporalOutput { filtered, delayed })
}
