//! Two-stage enhance-before-detect cascade.
//!
//! Stage 1 estimates the background with a separable low-pass (two-sided in
//! x and y, causal with synthesis offset `q_z` in time) and subtracts it from
//! the raw frame delayed by `q_z`. Stage 2 projects the residual onto a
//! separable 3-D Laguerre basis and accumulates the squared coefficients over
//! a bin subset `Omega`. The coefficients at the strongest pixel also yield a
//! point-target velocity estimate.

use serde::{Deserialize, Serialize};

use crate::basis::{gram_schmidt, AlphaMatrix, BasisSpec, Sidedness};
use crate::engine::{
    advance_temporal, crop_margin, filter_rows, warmup_frames, Frame, FrameRole, LineFilter, TemporalFilter,
    TemporalState,
};
use crate::error::{Error, Result};
use crate::synth::{analysis_bank, power_norm, realize, synthesis_filter_with_degree, Realization};

/// Basis-function indices `(k_x, k_y, k_z)`.
pub type Bin = [usize; 3];

/// The seven bins sufficient for a moving quadratic point-target model.
pub const SUBSET7: [Bin; 7] = [
    [0, 0, 0],
    [0, 1, 0],
    [0, 2, 0],
    [1, 0, 0],
    [2, 0, 0],
    [0, 1, 1],
    [1, 0, 1],
];

/// Bin subset over which power is accumulated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Omega {
    /// The seven point-target bins, restricted to the configured degree.
    Subset7,
    /// Every bin in `{0..=B}^3`.
    Full,
    Custom(Vec<Bin>),
}

impl Omega {
    pub fn bins(&self, degree: usize) -> Result<Vec<Bin>> {
        match self {
            Omega::Subset7 => Ok(SUBSET7
                .iter()
                .copied()
                .filter(|b| b.iter().all(|&k| k <= degree))
                .collect()),
            Omega::Full => {
                let mut out = Vec::new();
                for kz in 0..=degree {
                    for ky in 0..=degree {
                        for kx in 0..=degree {
                            out.push([kx, ky, kz]);
                        }
                    }
                }
                Ok(out)
            }
            Omega::Custom(bins) => {
                if bins.is_empty() {
                    return Err(Error::Config("empty bin subset".into()));
                }
                if let Some(b) = bins.iter().find(|b| b.iter().any(|&k| k > degree)) {
                    return Err(Error::Config(format!("bin {b:?} exceeds degree {degree}")));
                }
                let mut out = bins.clone();
                out.sort_by_key(|b| (b[2], b[1], b[0]));
                out.dedup();
                Ok(out)
            }
        }
    }
}

/// Background-subtraction settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageOneConfig {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
    /// Temporal synthesis offset `q_z`, in frames.
    pub delay: usize,
    pub degree: usize,
}

impl Default for StageOneConfig {
    fn default() -> Self {
        Self {
            sigma_x: -0.5,
            sigma_y: -0.5,
            sigma_z: -0.25,
            delay: 4,
            degree: 2,
        }
    }
}

/// Foreground-accumulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageTwoConfig {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
    pub degree: usize,
    pub omega: Omega,
    /// Replace the Laguerre bank by a single exponential average (`B = 0`).
    pub exponential_fallback: bool,
}

impl Default for StageTwoConfig {
    fn default() -> Self {
        Self {
            sigma_x: -0.5,
            sigma_y: -0.5,
            sigma_z: -0.5,
            degree: 2,
            omega: Omega::Subset7,
            exponential_fallback: false,
        }
    }
}

impl StageTwoConfig {
    pub fn effective_degree(&self) -> usize {
        if self.exponential_fallback {
            0
        } else {
            self.degree
        }
    }

    pub fn bins(&self) -> Result<Vec<Bin>> {
        self.omega.bins(self.effective_degree())
    }
}

/// Where velocity is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VelocityMode {
    Off,
    /// Only at the per-frame maximum of the accumulated power.
    Argmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub stage1: StageOneConfig,
    pub stage2: StageTwoConfig,
    /// Feed raw frames straight to stage 2.
    pub bypass_stage1: bool,
    pub velocity: VelocityMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stage1: StageOneConfig::default(),
            stage2: StageTwoConfig::default(),
            bypass_stage1: false,
            velocity: VelocityMode::Argmax,
        }
    }
}

fn pole(name: &'static str, sigma: f64) -> Result<f64> {
    if sigma.is_finite() && sigma < 0.0 {
        Ok(sigma.exp())
    } else {
        Err(Error::Domain {
            name,
            value: sigma,
            range: "(-inf, 0)",
        })
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        pole("stage1.sigma_x", self.stage1.sigma_x)?;
        pole("stage1.sigma_y", self.stage1.sigma_y)?;
        pole("stage1.sigma_z", self.stage1.sigma_z)?;
        pole("stage2.sigma_x", self.stage2.sigma_x)?;
        pole("stage2.sigma_y", self.stage2.sigma_y)?;
        pole("stage2.sigma_z", self.stage2.sigma_z)?;
        self.stage2.bins()?;
        Ok(())
    }

    /// Residual delay introduced by stage 1.
    pub fn delay(&self) -> usize {
        if self.bypass_stage1 {
            0
        } else {
            self.stage1.delay
        }
    }

    /// Spatial border excluded from metrics and argmax searches.
    pub fn crop_margin(&self) -> usize {
        let mut m = crop_margin(self.stage2.sigma_x).max(crop_margin(self.stage2.sigma_y));
        if !self.bypass_stage1 {
            m = m
                .max(crop_margin(self.stage1.sigma_x))
                .max(crop_margin(self.stage1.sigma_y));
        }
        m
    }

    /// Input frames, counted from the first, whose outputs are flagged warm-up.
    pub fn warmup_input_frames(&self) -> usize {
        let stage2 = crop_margin(self.stage2.sigma_z);
        if self.bypass_stage1 {
            stage2
        } else {
            warmup_frames(self.stage1.delay, self.stage1.sigma_z) + stage2
        }
    }
}

/// Output of stage 1 for one frame.
#[derive(Debug, Clone)]
pub struct StageOneOutput {
    /// The raw frame matching the residual, `J(n - q)`.
    pub raw: Frame,
    /// `I_hat(n - q)`.
    pub background: Frame,
    /// `I_eps(n - q) = J(n - q) - I_hat(n - q)`.
    pub residual: Frame,
}

/// Stage 1: background estimation and subtraction.
#[derive(Debug, Clone)]
pub struct BackgroundSubtractor {
    x: LineFilter,
    y: LineFilter,
    temporal: TemporalState,
    width: usize,
    height: usize,
}

impl BackgroundSubtractor {
    pub fn new(cfg: &StageOneConfig, width: usize, height: usize) -> Result<Self> {
        let px = pole("sigma_x", cfg.sigma_x)?;
        let py = pole("sigma_y", cfg.sigma_y)?;
        let pz = pole("sigma_z", cfg.sigma_z)?;
        let x = synthesis_filter_with_degree(px, 0.0, cfg.degree, Sidedness::TwoSided)?;
        let y = synthesis_filter_with_degree(py, 0.0, cfg.degree, Sidedness::TwoSided)?;
        let z = synthesis_filter_with_degree(pz, cfg.delay as f64, cfg.degree, Sidedness::Causal)?;
        Ok(Self {
            x: LineFilter::new(&x),
            y: LineFilter::new(&y),
            temporal: TemporalState::new(z.forward(), width, height, cfg.delay),
            width,
            height,
        })
    }

    /// Consumes `J(n)`; yields the residual for frame `n - q` once available.
    pub fn push(&mut self, frame: &Frame) -> Result<Option<StageOneOutput>> {
        frame.check_shape(self.width, self.height)?;
        frame.check_finite()?;
        let spatial = filter_columns_t(&filter_rows(frame, &self.x), &self.y);
        let step = advance_temporal(&mut self.temporal, &spatial, frame.clone().with_role(FrameRole::Raw))?;
        let Some(raw) = step.delayed else {
            return Ok(None);
        };
        let mut background = step.filtered;
        background.index = raw.index;
        background.role = FrameRole::Background;
        let data = raw.data.iter().zip(&background.data).map(|(j, b)| j - b).collect();
        let residual = Frame::new(self.width, self.height, raw.index, FrameRole::Residual, data)?;
        Ok(Some(StageOneOutput {
            raw,
            background,
            residual,
        }))
    }
}

fn filter_columns_t(frame: &Frame, filter: &LineFilter) -> Frame {
    filter_rows(&frame.transposed(), filter).transposed()
}

/// Per-pixel Laguerre coefficients over a bin subset, for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreSpectrum {
    pub width: usize,
    pub height: usize,
    pub index: usize,
    pub degree: usize,
    pub bins: Vec<Bin>,
    /// One row-major plane per entry of `bins`.
    pub planes: Vec<Vec<f64>>,
}

impl LaguerreSpectrum {
    pub fn plane(&self, bin: Bin) -> Option<&[f64]> {
        self.bins
            .iter()
            .position(|&b| b == bin)
            .map(|i| self.planes[i].as_slice())
    }

    /// `beta_k(x, y)`, or `None` when `k` is not populated.
    pub fn get(&self, bin: Bin, x: usize, y: usize) -> Option<f64> {
        self.plane(bin).map(|p| p[y * self.width + x])
    }

    /// All populated coefficients at one pixel.
    pub fn at(&self, x: usize, y: usize) -> Vec<(Bin, f64)> {
        let i = y * self.width + x;
        self.bins.iter().zip(&self.planes).map(|(&b, p)| (b, p[i])).collect()
    }
}

/// `sum_{k in bins} beta_k^2`, scaled by `c_norm` when given.
pub fn accumulate_power(spectrum: &LaguerreSpectrum, bins: &[Bin], c_norm: Option<f64>) -> Result<Frame> {
    let mut out = Frame::zeros(spectrum.width, spectrum.height, spectrum.index, FrameRole::Power);
    for &bin in bins {
        let plane = spectrum
            .plane(bin)
            .ok_or_else(|| Error::Config(format!("bin {bin:?} is not populated in the spectrum")))?;
        for (o, b) in out.data.iter_mut().zip(plane) {
            *o += b * b;
        }
    }
    if let Some(c) = c_norm {
        for v in out.data.iter_mut() {
            *v *= c;
        }
    }
    Ok(out)
}

/// Stage 2: separable Laguerre analysis bank.
#[derive(Debug, Clone)]
pub struct LaguerreAnalyzer {
    bins: Vec<Bin>,
    degree: usize,
    x_bank: Vec<LineFilter>,
    y_bank: Vec<LineFilter>,
    // operate on transposed frames
    temporal: Vec<TemporalFilter>,
    alphas: [AlphaMatrix; 3],
    c_norm: f64,
    width: usize,
    height: usize,
}

impl LaguerreAnalyzer {
    pub fn new(cfg: &StageTwoConfig, width: usize, height: usize) -> Result<Self> {
        let degree = cfg.effective_degree();
        let bins = cfg.bins()?;
        let px = pole("sigma_x", cfg.sigma_x)?;
        let py = pole("sigma_y", cfg.sigma_y)?;
        let pz = pole("sigma_z", cfg.sigma_z)?;
        let ax = gram_schmidt(BasisSpec::new(degree, px, Sidedness::TwoSided))?;
        let ay = gram_schmidt(BasisSpec::new(degree, py, Sidedness::TwoSided))?;
        let az = gram_schmidt(BasisSpec::new(degree, pz, Sidedness::Causal))?;
        let x_bank = analysis_bank(&ax)?.iter().map(LineFilter::new).collect();
        let y_bank = analysis_bank(&ay)?.iter().map(LineFilter::new).collect();
        let z_bank = analysis_bank(&az)?;
        let temporal = bins
            .iter()
            .map(|b| TemporalFilter::new(z_bank[b[2]].forward(), height, width))
            .collect();
        Ok(Self {
            bins,
            degree,
            x_bank,
            y_bank,
            temporal,
            alphas: [ax, ay, az],
            c_norm: power_norm(px, py, pz)?,
            width,
            height,
        })
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn alphas(&self) -> &[AlphaMatrix; 3] {
        &self.alphas
    }

    /// Average-power normalizer for this weight.
    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }

    /// Consumes one frame and returns its Laguerre spectrum.
    pub fn push(&mut self, frame: &Frame) -> Result<LaguerreSpectrum> {
        frame.check_shape(self.width, self.height)?;
        frame.check_finite()?;
        let n = self.degree + 1;
        // x pass per k_x, kept transposed so the y pass runs along rows
        let mut rows_t: Vec<Option<Frame>> = vec![None; n];
        let mut xy_t: Vec<Option<Frame>> = vec![None; n * n];
        for b in &self.bins {
            if rows_t[b[0]].is_none() {
                rows_t[b[0]] = Some(filter_rows(frame, &self.x_bank[b[0]]).transposed());
            }
        }
        for b in &self.bins {
            let slot = b[0] * n + b[1];
            if xy_t[slot].is_none() {
                let src = rows_t[b[0]].as_ref().expect("x pass computed above");
                xy_t[slot] = Some(filter_rows(src, &self.y_bank[b[1]]));
            }
        }
        let mut planes = Vec::with_capacity(self.bins.len());
        for (b, temporal) in self.bins.iter().zip(self.temporal.iter_mut()) {
            let src = xy_t[b[0] * n + b[1]].as_ref().expect("xy pass computed above");
            let beta_t = temporal.advance(src)?;
            planes.push(beta_t.transposed().data);
        }
        Ok(LaguerreSpectrum {
            width: self.width,
            height: self.height,
            index: frame.index,
            degree: self.degree,
            bins: self.bins.clone(),
            planes,
        })
    }
}

/// Monomial-basis coefficients `gamma[j_x][j_y][j_z]` at one pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCoeffs {
    pub degree: usize,
    data: Vec<f64>,
}

impl ComponentCoeffs {
    pub fn get(&self, j: Bin) -> f64 {
        let n = self.degree + 1;
        self.data[(j[2] * n + j[1]) * n + j[0]]
    }

    /// `sum_j gamma_j m_x^jx m_y^jy m_z^jz`.
    pub fn eval(&self, m: [f64; 3]) -> f64 {
        let n = self.degree + 1;
        let mut acc = 0.0;
        for jz in 0..n {
            for jy in 0..n {
                for jx in 0..n {
                    acc += self.get([jx, jy, jz]) * m[0].powi(jx as i32) * m[1].powi(jy as i32) * m[2].powi(jz as i32);
                }
            }
        }
        acc
    }
}

/// Maps Laguerre coefficients to monomial coefficients:
/// `gamma = sum_k beta_k (A_x^T u_kx) (x) (A_y^T u_ky) (x) (A_z^T u_kz)`.
pub fn beta_to_gamma(betas: &[(Bin, f64)], alphas: &[AlphaMatrix; 3]) -> Result<ComponentCoeffs> {
    let degree = alphas[0].degree();
    if alphas.iter().any(|a| a.degree() != degree) {
        return Err(Error::DimensionMismatch {
            expected: format!("degree {degree} in every dimension"),
            found: format!(
                "degrees {}, {}, {}",
                alphas[0].degree(),
                alphas[1].degree(),
                alphas[2].degree()
            ),
        });
    }
    let n = degree + 1;
    let mut data = vec![0.0; n * n * n];
    for &(k, beta) in betas {
        if k.iter().any(|&v| v > degree) {
            return Err(Error::Config(format!("bin {k:?} exceeds degree {degree}")));
        }
        for jz in 0..=k[2] {
            let az = alphas[2].get(k[2], jz);
            for jy in 0..=k[1] {
                let ayz = az * alphas[1].get(k[1], jy);
                for jx in 0..=k[0] {
                    data[(jz * n + jy) * n + jx] += beta * ayz * alphas[0].get(k[0], jx);
                }
            }
        }
    }
    Ok(ComponentCoeffs { degree, data })
}

/// Quadratic point-target parameters: peak, PSF curvatures and velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetModel {
    pub i_max: f64,
    pub rho_x: f64,
    pub rho_y: f64,
    pub vx: f64,
    pub vy: f64,
    /// False when a curvature is too small for the velocity ratio to be trusted.
    pub reliable: bool,
}

/// Curvatures below this fraction of the peak flag the estimate unreliable.
pub const CURVATURE_THRESHOLD: f64 = 1e-6;

/// Velocity from `v_x = -gamma_101 / (2 gamma_200)`, `v_y = -gamma_011 / (2 gamma_020)`.
pub fn estimate_velocity(gamma: &ComponentCoeffs) -> TargetModel {
    let i_max = gamma.get([0, 0, 0]);
    if gamma.degree < 2 {
        return TargetModel {
            i_max,
            rho_x: 0.0,
            rho_y: 0.0,
            vx: f64::NAN,
            vy: f64::NAN,
            reliable: false,
        };
    }
    let rho_x = gamma.get([2, 0, 0]);
    let rho_y = gamma.get([0, 2, 0]);
    let vx = -gamma.get([1, 0, 1]) / (2.0 * rho_x);
    let vy = -gamma.get([0, 1, 1]) / (2.0 * rho_y);
    let floor = CURVATURE_THRESHOLD * i_max.abs();
    let reliable = rho_x.abs() > floor && rho_y.abs() > floor && vx.is_finite() && vy.is_finite();
    TargetModel {
        i_max,
        rho_x,
        rho_y,
        vx,
        vy,
        reliable,
    }
}

/// Everything produced for one output frame.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Frame index the outputs refer to (the input index less the stage-1 delay).
    pub index: usize,
    pub warmup: bool,
    pub raw: Frame,
    pub background: Option<Frame>,
    pub residual: Frame,
    /// Unnormalized accumulated power over `Omega`.
    pub power: Frame,
    pub spectrum: LaguerreSpectrum,
    pub argmax: Option<(usize, usize, f64)>,
    pub target: Option<TargetModel>,
}

/// Stage 1 followed by stage 2, one frame at a time.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: PipelineConfig,
    stage1: Option<BackgroundSubtractor>,
    stage2: LaguerreAnalyzer,
    velocity_sum: [f64; 2],
    velocity_count: usize,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, width: usize, height: usize) -> Result<Self> {
        cfg.validate()?;
        let stage1 = if cfg.bypass_stage1 {
            None
        } else {
            Some(BackgroundSubtractor::new(&cfg.stage1, width, height)?)
        };
        let stage2 = LaguerreAnalyzer::new(&cfg.stage2, width, height)?;
        Ok(Self {
            cfg,
            stage1,
            stage2,
            velocity_sum: [0.0; 2],
            velocity_count: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn analyzer(&self) -> &LaguerreAnalyzer {
        &self.stage2
    }

    pub fn push(&mut self, frame: &Frame) -> Result<Option<PipelineOutput>> {
        let (raw, background, residual) = match &mut self.stage1 {
            Some(s1) => match s1.push(frame)? {
                Some(out) => (out.raw, Some(out.background), out.residual),
                None => return Ok(None),
            },
            None => {
                frame.check_finite()?;
                let raw = frame.clone().with_role(FrameRole::Raw);
                (raw, None, frame.clone().with_role(FrameRole::Residual))
            }
        };
        let spectrum = self.stage2.push(&residual)?;
        let power = accumulate_power(&spectrum, self.stage2.bins(), None)?;
        let warmup = residual.index + self.cfg.delay() < self.cfg.warmup_input_frames();
        let argmax = power.argmax(self.cfg.crop_margin());
        let target = match (self.cfg.velocity, argmax) {
            (VelocityMode::Argmax, Some((x, y, _))) => {
                let gamma = beta_to_gamma(&spectrum.at(x, y), self.stage2.alphas())?;
                let model = estimate_velocity(&gamma);
                if model.reliable && !warmup {
                    self.velocity_sum[0] += model.vx;
                    self.velocity_sum[1] += model.vy;
                    self.velocity_count += 1;
                }
                Some(model)
            }
            _ => None,
        };
        Ok(Some(PipelineOutput {
            index: residual.index,
            warmup,
            raw,
            background,
            residual,
            power,
            spectrum,
            argmax,
            target,
        }))
    }

    /// Mean of the reliable post-warm-up argmax velocity estimates so far.
    pub fn mean_velocity(&self) -> Option<[f64; 2]> {
        (self.velocity_count > 0).then(|| {
            let n = self.velocity_count as f64;
            [self.velocity_sum[0] / n, self.velocity_sum[1] / n]
        })
    }
}

/// Per-pixel velocity field for one spectrum: `(v_x, v_y, reliable)` planes.
pub fn velocity_field(spectrum: &LaguerreSpectrum, alphas: &[AlphaMatrix; 3]) -> Result<(Frame, Frame, Vec<bool>)> {
    let (w, h) = (spectrum.width, spectrum.height);
    let mut vx = Frame::zeros(w, h, spectrum.index, FrameRole::Other);
    let mut vy = vx.clone();
    let mut ok = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let m = estimate_velocity(&beta_to_gamma(&spectrum.at(x, y), alphas)?);
            vx.set(x, y, m.vx);
            vy.set(x, y, m.vy);
            ok[y * w + x] = m.reliable;
        }
    }
    Ok((vx, vy, ok))
}

/// Weighted sum of squared fit errors at every pixel:
/// `sum J w J - 2 sum J w I_hat + sum I_hat w I_hat`, which reduces to
/// `sum J w J - sum_k beta_k^2` over the full bin set.
pub fn sse_map(frames: &[Frame], cfg: &StageTwoConfig) -> Result<Vec<Frame>> {
    let Some(first) = frames.first() else {
        return Ok(Vec::new());
    };
    let (w, h) = (first.width, first.height);
    let full = StageTwoConfig {
        omega: Omega::Full,
        ..cfg.clone()
    };
    let mut analyzer = LaguerreAnalyzer::new(&full, w, h)?;
    let px = pole("sigma_x", cfg.sigma_x)?;
    let py = pole("sigma_y", cfg.sigma_y)?;
    let pz = pole("sigma_z", cfg.sigma_z)?;
    let weight_x = LineFilter::new(&realize(&[1.0], px, Sidedness::TwoSided, 2)?);
    let weight_y = LineFilter::new(&realize(&[1.0], py, Sidedness::TwoSided, 2)?);
    let weight_z = match realize(&[1.0], pz, Sidedness::Causal, 2)? {
        Realization::Causal(c) => c,
        Realization::NonCausal { .. } => unreachable!("causal realization"),
    };
    let mut energy = TemporalFilter::new(&weight_z, w, h);
    let bins = analyzer.bins().to_vec();
    let mut out = Vec::with_capacity(frames.len());
    for frame in frames {
        let spectrum = analyzer.push(frame)?;
        let fitted = accumulate_power(&spectrum, &bins, None)?;
        let squared = Frame {
            data: frame.data.iter().map(|v| v * v).collect(),
            ..frame.clone()
        };
        let spatial = filter_columns_t(&filter_rows(&squared, &weight_x), &weight_y);
        let total = energy.advance(&spatial)?;
        let data = total.data.iter().zip(&fitted.data).map(|(t, f)| t - f).collect();
        out.push(Frame::new(w, h, frame.index, FrameRole::Other, data)?);
    }
    Ok(out)
}
