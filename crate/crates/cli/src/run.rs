//! `simulate`, `run` and `sweep` subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use laguerre_core::engine::Frame;
use laguerre_core::experiment::{run_ensemble, run_frames, BankSpec, RunOptions, ScenarioRun};
use laguerre_core::io::{load_frames, save_frames, save_pgm};
use laguerre_core::scenario::{generate, GroundTruth};
use laguerre_core::{FrameRole, Omega};

use crate::config::{parse_sweep, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{prepare_dir, Manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OmegaArg {
    Full,
    Subset7,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Config file (TOML); a manifest from an earlier run also works.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sets a config field, e.g. `--set pipeline.stage1.delay=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long = "bypass-stage1")]
    pub bypass_stage1: bool,
    #[arg(long, value_enum)]
    pub omega: Option<OmegaArg>,
}

impl CommonArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set `{item}` is not KEY=VALUE")))?;
            cfg = cfg.set(k.trim(), v.trim())?;
        }
        if let Some(seed) = self.seed {
            cfg.scenario.seed = seed;
        }
        if self.bypass_stage1 {
            cfg.pipeline.bypass_stage1 = true;
        }
        if let Some(o) = self.omega {
            cfg.pipeline.stage2.omega = match o {
                OmegaArg::Full => Omega::Full,
                OmegaArg::Subset7 => Omega::Subset7,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Process this frame file instead of generating the scenario; SNR and
    /// truth columns are then left empty.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also score the clairvoyant and 3x3 matched-filter banks.
    #[arg(long)]
    pub matched: bool,
    /// Export graymaps of the four stage outputs at this output frame.
    #[arg(long)]
    pub pgm: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `KEY=V1,V2,...`, e.g. `qz=0,2,4,6`.
    #[arg(long)]
    pub sweep: String,
    /// Seeds per value, starting at the configured seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long)]
    pub matched: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn write_truth(path: &Path, truth: &GroundTruth) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["frame", "x", "y", "vx", "vy"])?;
    for (i, c) in truth.centers.iter().enumerate() {
        w.write_record([
            i.to_string(),
            format!("{:.9}", c[0]),
            format!("{:.9}", c[1]),
            format!("{:.9}", truth.v_tgt[0]),
            format!("{:.9}", truth.v_tgt[1]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_components(path: &Path, truth: &GroundTruth) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["fx", "fy", "fz", "phase", "amplitude", "vx", "vy"])?;
    for c in &truth.components {
        w.write_record(
            [c.fx, c.fy, c.fz, c.phase, c.amplitude, truth.v_clt[0], truth.v_clt[1]].map(|v| format!("{v:.9}")),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = args.common.resolve()?;
    prepare_dir(&args.out)?;
    let (frames, truth) = generate(&cfg.scenario)?;
    let outputs = vec![
        args.out.join("input.lgfr"),
        args.out.join("truth.csv"),
        args.out.join("clutter.csv"),
    ];
    save_frames(&outputs[0], &frames)?;
    write_truth(&outputs[1], &truth)?;
    write_components(&outputs[2], &truth)?;
    Manifest {
        command: "simulate",
        config_path: args.common.config.as_deref(),
        out_dir: &args.out,
        config: &cfg,
        outputs,
    }
    .write()?;
    println!("wrote {} frames to {}", frames.len(), args.out.display());
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn write_metrics(path: &Path, run: &ScenarioRun) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "frame",
        "warmup",
        "argmax_x",
        "argmax_y",
        "power_max",
        "snr_db",
        "vx",
        "vy",
        "reliable",
        "true_x",
        "true_y",
    ])?;
    for r in &run.records {
        let (ax, ay, pmax) = match r.argmax {
            Some((x, y, v)) => (x.to_string(), y.to_string(), format!("{v:.6e}")),
            None => Default::default(),
        };
        let (vx, vy, ok) = match &r.target {
            Some(t) => (opt(Some(t.vx)), opt(Some(t.vy)), t.reliable.to_string()),
            None => Default::default(),
        };
        let c = |v: f64| {
            if v.is_finite() {
                format!("{v:.6}")
            } else {
                String::new()
            }
        };
        w.write_record([
            r.index.to_string(),
            r.warmup.to_string(),
            ax,
            ay,
            pmax,
            opt(r.snr_db),
            vx,
            vy,
            ok,
            c(r.center[0]),
            c(r.center[1]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn summary_table(run: &ScenarioRun) -> toml::Table {
    let mut t = toml::Table::new();
    let arr = |v: [f64; 2]| toml::Value::Array(vec![v[0].into(), v[1].into()]);
    if let Some(s) = run.mean_snr_db {
        t.insert("mean_snr_db".into(), s.into());
    }
    if let Some(v) = run.mean_velocity {
        t.insert("mean_velocity".into(), arr(v));
    }
    if run.truth.v_tgt.iter().all(|v| v.is_finite()) {
        t.insert("true_velocity".into(), arr(run.truth.v_tgt));
        t.insert("clutter_velocity".into(), arr(run.truth.v_clt));
        t.insert("target_offset".into(), arr(run.truth.offset));
    }
    for b in &run.banks {
        let mut bt = toml::Table::new();
        if let Some(s) = b.mean_snr_db {
            bt.insert("mean_snr_db".into(), s.into());
        }
        if let Some(v) = b.mean_velocity {
            bt.insert("mean_velocity".into(), arr(v));
        }
        t.insert(b.name.clone(), toml::Value::Table(bt));
    }
    t
}

fn banks(matched: bool) -> Vec<BankSpec> {
    if matched {
        vec![BankSpec::Clairvoyant, BankSpec::Grid(vec![-1.0, 0.0, 1.0])]
    } else {
        Vec::new()
    }
}

pub fn run(args: &RunArgs) -> CliResult<()> {
    let cfg = args.common.resolve()?;
    prepare_dir(&args.out)?;
    let (frames, truth) = match &args.input {
        Some(path) => {
            let frames = load_frames(path, FrameRole::Raw)?;
            let truth = GroundTruth {
                centers: vec![[f64::NAN; 2]; frames.len()],
                v_tgt: [f64::NAN; 2],
                v_clt: [f64::NAN; 2],
                offset: [f64::NAN; 2],
                psf_std: cfg.scenario.psf_std,
                components: Vec::new(),
            };
            if args.matched {
                return Err(CliError::Usage("--matched needs a generated scenario".into()));
            }
            (frames, truth)
        }
        None => generate(&cfg.scenario)?,
    };
    if frames.is_empty() {
        return Err(CliError::Usage("no input frames".into()));
    }
    let opts = RunOptions {
        banks: banks(args.matched),
        keep_frames: true,
    };
    let result = run_frames(frames, truth, &cfg.pipeline, &opts)?;
    let stages = result.stages.as_ref().expect("frames kept");
    let mut outputs = Vec::new();
    let mut save = |name: &str, frames: &[Frame]| -> CliResult<()> {
        let path = args.out.join(name);
        save_frames(&path, frames)?;
        outputs.push(path);
        Ok(())
    };
    save("input.lgfr", &result.input)?;
    save("raw.lgfr", &stages.raw)?;
    if !stages.background.is_empty() {
        save("background.lgfr", &stages.background)?;
    }
    save("residual.lgfr", &stages.residual)?;
    save("power.lgfr", &stages.power)?;
    let metrics = args.out.join("metrics.csv");
    write_metrics(&metrics, &result)?;
    outputs.push(metrics);
    if args.input.is_none() {
        let truth = args.out.join("truth.csv");
        write_truth(&truth, &result.truth)?;
        outputs.push(truth);
    }
    let summary = args.out.join("summary.toml");
    std::fs::write(&summary, toml::to_string(&summary_table(&result))?)?;
    outputs.push(summary);
    if let Some(i) = args.pgm {
        let pos = stages
            .power
            .iter()
            .position(|f| f.index == i)
            .ok_or_else(|| CliError::Usage(format!("no output frame {i}")))?;
        let mut quartet = vec![
            ("raw", &stages.raw[pos]),
            ("residual", &stages.residual[pos]),
            ("power", &stages.power[pos]),
        ];
        if let Some(b) = stages.background.get(pos) {
            quartet.push(("background", b));
        }
        for (name, f) in quartet {
            let path = args.out.join(format!("{name}_{i:03}.pgm"));
            save_pgm(&path, f)?;
            outputs.push(path);
        }
    }
    Manifest {
        command: "run",
        config_path: args.common.config.as_deref(),
        out_dir: &args.out,
        config: &cfg,
        outputs,
    }
    .write()?;
    match result.mean_snr_db {
        Some(s) => println!(
            "mean output SNR {s:.2} dB over {} scored frames",
            result.records.iter().filter(|r| r.snr_db.is_some()).count()
        ),
        None => println!("processed {} output frames", result.records.len()),
    }
    if let Some(v) = result.mean_velocity {
        println!("mean velocity estimate ({:.3}, {:.3})", v[0], v[1]);
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let base = args.common.resolve()?;
    let (key, values) = parse_sweep(&args.sweep)?;
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be positive".into()));
    }
    prepare_dir(&args.out)?;
    let seeds: Vec<u64> = (0..args.seeds).map(|i| base.scenario.seed.wrapping_add(i)).collect();
    let opts = RunOptions {
        banks: banks(args.matched),
        keep_frames: false,
    };
    let path = args.out.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec![
        "key".to_string(),
        "value".into(),
        "seeds".into(),
        "mean_snr_db".into(),
        "velocity_error".into(),
        "speed_bias".into(),
    ];
    header.extend(opts.banks.iter().map(|b| format!("{}_snr_db", b.name())));
    w.write_record(&header)?;
    for value in &values {
        let cfg = base.set(&key, value)?;
        let (summary, _) = run_ensemble(&cfg.scenario, &cfg.pipeline, &opts, &seeds)?;
        let mut row = vec![
            key.clone(),
            value.clone(),
            seeds.len().to_string(),
            opt(summary.mean_snr_db),
            opt(summary.mean_velocity_error),
            opt(summary.mean_speed_bias),
        ];
        row.extend(summary.bank_mean_snr_db.iter().map(|(_, s)| opt(*s)));
        println!("{key}={value}: mean output SNR {} dB", opt(summary.mean_snr_db));
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);
    Manifest {
        command: "sweep",
        config_path: args.common.config.as_deref(),
        out_dir: &args.out,
        config: &base,
        outputs: vec![path],
    }
    .write()?;
    Ok(())
}
