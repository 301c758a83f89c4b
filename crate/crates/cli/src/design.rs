//! `design` and `response` subcommands.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use laguerre_core::synth::{exp_average_hpf, flatness, freq_response, highpass_from_lowpass, q_opt, vrf, Direction};
use laguerre_core::{FilterSpec, LdeCoeffs, RationalTf, Realization, Role, Sidedness};

use crate::error::{CliError, CliResult};
use crate::output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Analysis,
    Synthesis,
    Derivative,
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    /// Forgetting factor; the pole radius is e^sigma.
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "p",
        required_unless_present = "p"
    )]
    pub sigma: Option<f64>,
    /// Pole radius, instead of --sigma.
    #[arg(long)]
    pub p: Option<f64>,
    /// Synthesis offset.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub q: f64,
    /// Use the variance-minimizing offset instead of --q (causal, degree 2).
    #[arg(long, conflicts_with = "q")]
    pub qopt: bool,
    /// Polynomial degree.
    #[arg(long = "B", default_value_t = 2)]
    pub degree: usize,
    #[arg(long, conflicts_with = "noncausal")]
    pub causal: bool,
    #[arg(long)]
    pub noncausal: bool,
    #[arg(long, value_enum, default_value_t = RoleArg::Synthesis)]
    pub role: RoleArg,
    /// Basis index for --role analysis.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
}

impl FilterArgs {
    pub fn pole(&self) -> CliResult<f64> {
        let p = match (self.sigma, self.p) {
            (Some(s), _) => s.exp(),
            (None, Some(p)) => p,
            (None, None) => return Err(CliError::Usage("one of --sigma or --p is required".into())),
        };
        Ok(p)
    }

    fn sidedness(&self) -> Sidedness {
        if self.noncausal {
            Sidedness::TwoSided
        } else {
            Sidedness::Causal
        }
    }

    pub fn spec(&self) -> CliResult<FilterSpec> {
        let pole = self.pole()?;
        let offset = if self.qopt {
            if self.degree != 2 || self.noncausal {
                return Err(CliError::Usage("--qopt applies to causal degree-2 filters".into()));
            }
            q_opt(pole)?
        } else {
            self.q
        };
        let role = match self.role {
            RoleArg::Analysis => Role::AnalysisOnly(self.k),
            RoleArg::Synthesis => Role::AnalysisSynthesis,
            RoleArg::Derivative => Role::Derivative,
        };
        let spec = FilterSpec {
            pole,
            offset,
            degree: self.degree,
            sidedness: self.sidedness(),
            role,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn direction_label(d: Direction) -> &'static str {
    match d {
        Direction::Causal => "causal",
        Direction::Fwd => "forward",
        Direction::Bwd => "backward",
        Direction::FwdAndBwd => "forward and backward",
        Direction::FwdBwdAntisymmetric => "forward; backward negates b",
    }
}

fn passes(r: &Realization) -> Vec<(&'static str, &LdeCoeffs)> {
    match r {
        Realization::Causal(c) => vec![("causal", c)],
        Realization::NonCausal { fwd, bwd } => vec![("forward", fwd), ("backward", bwd)],
    }
}

fn role_label(role: Role) -> String {
    match role {
        Role::AnalysisOnly(k) => format!("analysis k={k}"),
        Role::AnalysisSynthesis => "synthesis".into(),
        Role::Derivative => "derivative".into(),
    }
}

pub fn design(args: &DesignArgs) -> CliResult<()> {
    let spec = args.filter.spec()?;
    let filter = spec.design()?;
    let tf = filter.to_tf();
    let report = flatness(&tf);
    let p = spec.pole;
    let side = match spec.sidedness {
        Sidedness::Causal => "causal",
        Sidedness::TwoSided => "non-causal",
    };
    let degree2_causal_lpf =
        spec.degree == 2 && spec.sidedness == Sidedness::Causal && spec.role == Role::AnalysisSynthesis;
    let text = match args.format {
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "filter      {side} {}, B = {}", role_label(spec.role), spec.degree);
            let _ = writeln!(s, "sigma       {:.6}", p.ln());
            let _ = writeln!(
                s,
                "pole radius {p:.6} (multiplicity {})",
                filter.forward().denominator_order()
            );
            if spec.sidedness == Sidedness::Causal {
                let _ = writeln!(s, "q           {:.6}", spec.offset);
            }
            for (name, c) in passes(&filter) {
                let _ = writeln!(s, "{name} pass ({})", direction_label(c.direction));
                let _ = writeln!(s, "  b = [{}]", join(&c.b));
                let _ = writeln!(s, "  a = [{}]", join(&c.a));
            }
            let _ = writeln!(s, "dc gain     {:.6}", filter.dc_gain());
            if degree2_causal_lpf {
                let _ = writeln!(s, "vrf         {:.6}", vrf(p, spec.offset)?);
            }
            if spec.degree == 2 && spec.sidedness == Sidedness::Causal {
                let _ = writeln!(s, "q_opt       {:.6}", q_opt(p)?);
            }
            let _ = writeln!(
                s,
                "flatness    {} leading derivatives vanish ({} even)",
                report.orders, report.even_orders
            );
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["pass", "index", "b", "a"])?;
            for (name, c) in passes(&filter) {
                for i in 0..c.b.len().max(c.a.len()) {
                    let cell = |v: &[f64]| v.get(i).map(|x| format!("{x:.12e}")).unwrap_or_default();
                    w.write_record([name.to_string(), i.to_string(), cell(&c.b), cell(&c.a)])?;
                }
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("csv output is utf-8")
        }
    };
    output::emit(args.out.as_deref(), text.as_bytes())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResponseMode {
    /// The designed filter.
    Lpf,
    /// Delayed input minus the designed filter.
    Hpf,
    /// Two-sided exponential-average subtraction (degree 0 baseline).
    ExpAverage,
}

#[derive(Debug, Clone, Args)]
pub struct ResponseArgs {
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long, value_enum, default_value_t = ResponseMode::Lpf)]
    pub mode: ResponseMode,
    /// Frequency samples on [0, 0.5] cycles/sample.
    #[arg(long, default_value_t = 501)]
    pub points: usize,
    /// Impulse-response half-length.
    #[arg(long, default_value_t = 64)]
    pub impulse: usize,
    /// Directory for response.csv and impulse.csv; the response goes to
    /// standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn response(args: &ResponseArgs) -> CliResult<()> {
    if args.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let (tf, kernel): (RationalTf, Option<Vec<f64>>) = match args.mode {
        ResponseMode::ExpAverage => (exp_average_hpf(args.filter.pole()?)?, None),
        ResponseMode::Lpf | ResponseMode::Hpf => {
            let spec = args.filter.spec()?;
            let filter = spec.design()?;
            let lpf = filter.to_tf();
            if args.mode == ResponseMode::Lpf {
                (lpf, Some(filter.kernel(args.impulse)))
            } else {
                let q = spec.offset;
                if q < 0.0 || q.fract() != 0.0 {
                    return Err(CliError::Usage(
                        "high-pass mode needs a non-negative integer --q".into(),
                    ));
                }
                let mut k: Vec<f64> = filter.kernel(args.impulse).iter().map(|v| -v).collect();
                if (q as usize) <= args.impulse {
                    k[args.impulse + q as usize] += 1.0;
                }
                (highpass_from_lowpass(&lpf, q as usize), Some(k))
            }
        }
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["f", "magnitude", "magnitude_db", "phase_rad"])?;
    for i in 0..args.points {
        let f = 0.5 * i as f64 / (args.points - 1) as f64;
        let h = freq_response(&tf, f)?;
        let mag = h.norm();
        w.write_record([
            format!("{f:.6}"),
            format!("{mag:.12e}"),
            format!("{:.6}", 20.0 * mag.log10()),
            format!("{:.12e}", h.arg()),
        ])?;
    }
    let table = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let Some(dir) = &args.out else {
        std::io::stdout().write_all(&table)?;
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    output::emit(Some(&dir.join("response.csv")), &table)?;
    if let Some(k) = kernel {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["m", "h"])?;
        let e = args.impulse as i64;
        for (i, v) in k.iter().enumerate() {
            w.write_record([(i as i64 - e).to_string(), format!("{v:.12e}")])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        output::emit(Some(&dir.join("impulse.csv")), &bytes)?;
    }
    Ok(())
}
