//! Scenario runs: generate, process, score.

use serde::{Deserialize, Serialize};

use crate::engine::Frame;
use crate::error::Result;
use crate::pipeline::{Pipeline, PipelineConfig, TargetModel};
use crate::scenario::{generate, matched_filter_bank, measure_snr, velocity_grid, GroundTruth, ScenarioConfig};

/// A matched-filter velocity bank to compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BankSpec {
    /// A single filter at the true target velocity.
    Clairvoyant,
    /// Every `(v_x, v_y)` pair from the listed values.
    Grid(Vec<f64>),
}

impl BankSpec {
    pub fn name(&self) -> String {
        match self {
            BankSpec::Clairvoyant => "clairvoyant".into(),
            BankSpec::Grid(v) => format!("grid{}x{}", v.len(), v.len()),
        }
    }

    fn velocities(&self, truth: &GroundTruth) -> Vec<(f64, f64)> {
        match self {
            BankSpec::Clairvoyant => vec![(truth.v_tgt[0], truth.v_tgt[1])],
            BankSpec::Grid(v) => velocity_grid(v),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub banks: Vec<BankSpec>,
    /// Keep every per-stage frame in the result.
    pub keep_frames: bool,
}

/// Per-output-frame metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameRecord {
    pub index: usize,
    pub warmup: bool,
    pub center: [f64; 2],
    pub argmax: Option<(usize, usize, f64)>,
    pub snr_db: Option<f64>,
    pub target: Option<TargetModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BankResult {
    pub name: String,
    pub mean_snr_db: Option<f64>,
    /// Mean winning velocity at the per-frame power maximum.
    pub mean_velocity: Option<[f64; 2]>,
}

/// Per-stage frames of one run.
#[derive(Debug, Clone, Default)]
pub struct StageFrames {
    pub raw: Vec<Frame>,
    pub background: Vec<Frame>,
    pub residual: Vec<Frame>,
    pub power: Vec<Frame>,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub truth: GroundTruth,
    pub records: Vec<FrameRecord>,
    /// Mean SNR over post-warm-up frames with the target inside the metric region.
    pub mean_snr_db: Option<f64>,
    pub mean_velocity: Option<[f64; 2]>,
    pub banks: Vec<BankResult>,
    pub input: Vec<Frame>,
    pub stages: Option<StageFrames>,
}

/// Square root of a power frame, in input amplitude units.
pub fn amplitude(power: &Frame) -> Frame {
    Frame {
        data: power.data.iter().map(|v| v.max(0.0).sqrt()).collect(),
        ..power.clone()
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Generates the scenario and runs the pipeline and any matched-filter banks.
pub fn run_scenario(scn: &ScenarioConfig, pipe: &PipelineConfig, opts: &RunOptions) -> Result<ScenarioRun> {
    let (input, truth) = generate(scn)?;
    run_frames(input, truth, pipe, opts)
}

/// Runs the pipeline on pre-generated frames.
pub fn run_frames(
    input: Vec<Frame>,
    truth: GroundTruth,
    pipe: &PipelineConfig,
    opts: &RunOptions,
) -> Result<ScenarioRun> {
    let (w, h) = input.first().map_or((0, 0), |f| (f.width, f.height));
    let mut pipeline = Pipeline::new(pipe.clone(), w, h)?;
    let margin = pipe.crop_margin();
    let mut records = Vec::new();
    let mut residuals = Vec::new();
    let mut stages = StageFrames::default();
    for frame in &input {
        let Some(out) = pipeline.push(frame)? else {
            continue;
        };
        let center = truth.center(out.index).unwrap_or([f64::NAN; 2]);
        let snr_db = if out.warmup {
            None
        } else {
            measure_snr(&amplitude(&out.power), center, truth.psf_std, margin)
        };
        records.push(FrameRecord {
            index: out.index,
            warmup: out.warmup,
            center,
            argmax: out.argmax,
            snr_db,
            target: out.target,
        });
        if opts.keep_frames {
            stages.raw.push(out.raw);
            if let Some(b) = out.background {
                stages.background.push(b);
            }
            stages.power.push(out.power);
            stages.residual.push(out.residual.clone());
        }
        residuals.push(out.residual);
    }
    let mean_snr_db = mean(records.iter().filter_map(|r| r.snr_db));
    let banks = opts
        .banks
        .iter()
        .map(|bank| score_bank(bank, &residuals, &records, &truth, margin))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioRun {
        truth,
        mean_snr_db,
        mean_velocity: pipeline.mean_velocity(),
        records,
        banks,
        input,
        stages: opts.keep_frames.then_some(stages),
    })
}

/// Scores a bank on the frames where the pipeline itself was scored.
fn score_bank(
    bank: &BankSpec,
    residuals: &[Frame],
    records: &[FrameRecord],
    truth: &GroundTruth,
    margin: usize,
) -> Result<BankResult> {
    let velocities = bank.velocities(truth);
    let out = matched_filter_bank(residuals, &velocities, truth.psf_std)?;
    let mut snrs = Vec::new();
    let mut vs = Vec::new();
    for (i, power) in out.power.iter().enumerate() {
        let Some(rec) = records.iter().find(|r| r.index == power.index) else {
            continue;
        };
        if rec.snr_db.is_none() {
            continue;
        }
        if let Some(db) = measure_snr(&amplitude(power), rec.center, truth.psf_std, margin) {
            snrs.push(db);
        }
        if let Some((x, y, _)) = power.argmax(margin) {
            let (vx, vy) = out.best_velocity(&velocities, i, x, y);
            vs.push([vx, vy]);
        }
    }
    Ok(BankResult {
        name: bank.name(),
        mean_snr_db: mean(snrs),
        mean_velocity: mean(vs.iter().map(|v| v[0]))
            .zip(mean(vs.iter().map(|v| v[1])))
            .map(|(a, b)| [a, b]),
    })
}

/// Summary of runs over several seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub seeds: Vec<u64>,
    pub mean_snr_db: Option<f64>,
    pub bank_mean_snr_db: Vec<(String, Option<f64>)>,
    /// Mean over seeds of `|v_hat - v_tgt|` (Euclidean).
    pub mean_velocity_error: Option<f64>,
    /// Mean over seeds of `|v_hat| - |v_tgt|`; negative means biased toward zero.
    pub mean_speed_bias: Option<f64>,
}

pub fn run_ensemble(
    scn: &ScenarioConfig,
    pipe: &PipelineConfig,
    opts: &RunOptions,
    seeds: &[u64],
) -> Result<(EnsembleSummary, Vec<ScenarioRun>)> {
    let runs = seeds
        .iter()
        .map(|&seed| run_scenario(&ScenarioConfig { seed, ..scn.clone() }, pipe, opts))
        .collect::<Result<Vec<_>>>()?;
    let bank_mean_snr_db = opts
        .banks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.name(), mean(runs.iter().filter_map(|r| r.banks[i].mean_snr_db))))
        .collect();
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let with_v: Vec<_> = runs
        .iter()
        .filter_map(|r| r.mean_velocity.map(|v| (v, r.truth.v_tgt)))
        .collect();
    let summary = EnsembleSummary {
        seeds: seeds.to_vec(),
        mean_snr_db: mean(runs.iter().filter_map(|r| r.mean_snr_db)),
        bank_mean_snr_db,
        mean_velocity_error: mean(with_v.iter().map(|(v, t)| norm([v[0] - t[0], v[1] - t[1]]))),
        mean_speed_bias: mean(with_v.iter().map(|(v, t)| norm(*v) - norm(*t))),
    };
    Ok((summary, runs))
}
