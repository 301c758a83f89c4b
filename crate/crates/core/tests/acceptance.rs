//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any hard criterion fails. Throughput is reported as WARN.

use std::process::ExitCode;
use std::time::Instant;

use laguerre_core::basis::{alpha_closed_form, gram_schmidt};
use laguerre_core::engine::apply_1d;
use laguerre_core::experiment::{run_ensemble, run_scenario, BankSpec, RunOptions};
use laguerre_core::io::write_frames;
use laguerre_core::pipeline::{
    accumulate_power, beta_to_gamma, estimate_velocity, LaguerreAnalyzer, Pipeline, StageTwoConfig,
};
use laguerre_core::scenario::generate;
use laguerre_core::synth::{
    analysis_filter, derivative_filter, flatness, freq_response, highpass_from_lowpass, q_opt, synthesis_filter, vrf,
    LdeCoeffs,
};
use laguerre_core::{BasisSpec, Frame, FrameRole, Omega, PipelineConfig, Realization, ScenarioConfig, Sidedness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SEEDS: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn e(s: f64) -> f64 {
    s.exp()
}

/// Largest deviation between printed entries and computed ones; absent
/// computed entries count as zero.
fn table_error(computed: &[f64], printed: &[f64]) -> f64 {
    printed
        .iter()
        .enumerate()
        .map(|(i, p)| (computed.get(i).copied().unwrap_or(0.0) - p).abs())
        .fold(0.0, f64::max)
}

fn fwd_bwd(r: &Realization) -> (&LdeCoeffs, &LdeCoeffs) {
    match r {
        Realization::NonCausal { fwd, bwd } => (fwd, bwd),
        Realization::Causal(c) => (c, c),
    }
}

fn tables() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut check = |c: &[f64], p: &[f64]| worst = worst.max(table_error(c, p));
    let ia = [1.0, -2.3364, 1.8196, -0.4724];
    let ib_a = [1.0, -1.8196, 1.1036, -0.2231];

    let lp = synthesis_filter(e(-0.25), 4.0, Sidedness::Causal).unwrap();
    check(&lp.forward().b, &[0.0920, -0.0913, 0.0102, 0.0]);
    check(&lp.forward().a, &ia);

    let lp = synthesis_filter(e(-0.5), 0.0, Sidedness::TwoSided).unwrap();
    let (f, b) = fwd_bwd(&lp);
    for c in [f, b] {
        check(&c.b, &[0.1463, -0.0925, -0.0561, 0.0327]);
        check(&c.a, &ib_a);
    }

    let p = e(-0.25);
    let iia: [(&[f64], &[f64]); 3] = [
        (&[0.4703, 0.0, 0.0, 0.0], &[1.0, -0.7788, 0.0, 0.0]),
        (&[-0.4151, 0.4151, 0.0, 0.0], &[1.0, -1.5576, 0.6065, 0.0]),
        (&[0.3663, -0.7326, 0.3663, 0.0], &ia),
    ];
    for (k, (pb, pa)) in iia.iter().enumerate() {
        let r = analysis_filter(k, p, Sidedness::Causal).unwrap();
        check(&r.forward().b, pb);
        check(&r.forward().a, pa);
    }

    let p = e(-0.5);
    let iib: [(&[f64], &[f64]); 3] = [
        (&[0.2474, 0.1501, 0.0, 0.0], &[1.0, -0.6065, 0.0, 0.0]),
        (&[0.0, 0.1072, 0.0, 0.0], &[1.0, -1.2131, 0.3679]),
        (&[-0.1093, 0.0832, 0.0505, -0.0244], &[1.0, -1.8196, 1.1036]),
    ];
    let mut signs_ok = true;
    for (k, (pb, pa)) in iib.iter().enumerate() {
        let r = analysis_filter(k, p, Sidedness::TwoSided).unwrap();
        let (f, b) = fwd_bwd(&r);
        for c in [f, b] {
            // the k = 1 numerator is printed as +/-; signs are checked separately
            let mags: Vec<f64> = if k == 1 {
                c.b.iter().map(|v| v.abs()).collect()
            } else {
                c.b.clone()
            };
            check(&mags, pb);
            check(&c.a, pa);
        }
        if k == 1 {
            signs_ok &= f.b[1] == -b.b[1];
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 5e-5 && signs_ok && elapsed < 1.0,
        format!("max |err| {worst:.2e}, k=1 antisymmetric {signs_ok}, {elapsed:.3}s"),
    )
}

fn alpha_table() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.3, e(-0.5), e(-0.25), 0.9] {
        let gs = gram_schmidt(BasisSpec::new(2, p, Sidedness::Causal)).unwrap();
        let q = 1.0 - p;
        let expected = [
            [q.sqrt(), 0.0, 0.0],
            [-(p * q).sqrt(), (q.powi(3) / p).sqrt(), 0.0],
            [
                p * q.powi(5).sqrt() / q.powi(2),
                -(3.0 * p + 1.0) * q.powi(5).sqrt() / (2.0 * p * q),
                q.powi(5).sqrt() / (2.0 * p),
            ],
        ];
        let lib = alpha_closed_form(p).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                worst = worst.max((gs.get(k, j) - expected[k][j]).abs());
                worst = worst.max((lib.get(k, j) - expected[k][j]).abs());
            }
        }
    }
    outcome(worst < 1e-12, format!("max |err| {worst:.2e}"))
}

fn orthonormality() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.3, 0.5, e(-0.5), e(-0.25), 0.9] {
        for side in [Sidedness::Causal, Sidedness::TwoSided] {
            let alpha = gram_schmidt(BasisSpec::new(2, p, side)).unwrap();
            let lo = if side == Sidedness::Causal { 0 } else { -2000 };
            let mut gram = [[0.0; 3]; 3];
            for m in lo..=2000i64 {
                let w = side.weight(p, m);
                if w == 0.0 {
                    continue;
                }
                let psi = alpha.eval_all(m as f64);
                for a in 0..3 {
                    for b in 0..3 {
                        gram[a][b] += psi[a] * w * psi[b];
                    }
                }
            }
            for (a, row) in gram.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((v - delta).abs());
                }
            }
        }
    }
    outcome(worst < 1e-9, format!("max |G - I| {worst:.2e}"))
}

fn flatness_check() -> Outcome {
    let ia = synthesis_filter(e(-0.25), 4.0, Sidedness::Causal).unwrap().to_tf();
    let ib = synthesis_filter(e(-0.5), 0.0, Sidedness::TwoSided).unwrap().to_tf();
    let (ra, rb) = (flatness(&ia), flatness(&ib));
    let worst = ra.derivatives[..3]
        .iter()
        .chain(&rb.derivatives[..3])
        .fold(0.0f64, |m, d| m.max(d.abs()));
    outcome(
        worst < 1e-6,
        format!("max |d1..d3| {worst:.2e}, orders IA {} IB {}", ra.orders, rb.orders),
    )
}

fn polynomial_reproduction() -> Outcome {
    let p = e(-0.25);
    let n = 400usize;
    let mut worst: f64 = 0.0;
    for q in [0.0, 2.0, 4.0] {
        let lp = synthesis_filter(p, q, Sidedness::Causal).unwrap();
        for d in 0..=2 {
            let x: Vec<f64> = (0..n).map(|i| (i as f64).powi(d)).collect();
            let y = apply_1d(&lp, &x).unwrap();
            for i in 300..n {
                let want = (i as f64 - q).powi(d);
                worst = worst.max((y[i] - want).abs() / want.abs().max(1.0));
            }
        }
    }
    // derivative of the fit to a + b n + c n^2 at n - q
    let (a, b, c) = (0.7, -1.3, 0.02);
    let x: Vec<f64> = (0..n).map(|i| a + b * i as f64 + c * (i * i) as f64).collect();
    let mut worst_d: f64 = 0.0;
    for q in [0.0, 4.0] {
        let y = apply_1d(&derivative_filter(p, q).unwrap(), &x).unwrap();
        for i in 300..n {
            let want = b + 2.0 * c * (i as f64 - q);
            worst_d = worst_d.max((y[i] - want).abs() / want.abs().max(1.0));
        }
    }
    outcome(
        worst < 1e-8 && worst_d < 1e-8,
        format!("reproduction rel err {worst:.2e}, derivative rel err {worst_d:.2e}"),
    )
}

fn vrf_check() -> Outcome {
    let nominal = vrf(e(-0.25), 4.0).unwrap();
    let pairs = [
        (e(-0.25), 4.0),
        (e(-0.25), 0.0),
        (e(-0.25), 2.0),
        (e(-0.5), 0.0),
        (e(-0.5), 2.0),
        (0.6, 1.0),
        (0.9, 5.0),
        (0.9, 10.0),
    ];
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for (p, q) in pairs {
        let x: Vec<f64> = (0..1_000_000).map(|_| rng.sample(StandardNormal)).collect();
        let y = apply_1d(&synthesis_filter(p, q, Sidedness::Causal).unwrap(), &x).unwrap();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|s| (s - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        let skip = 2000;
        let ratio = var(&y[skip..]) / var(&x[skip..]);
        let theory = vrf(p, q).unwrap();
        worst = worst.max((ratio / theory - 1.0).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        (0.095..=0.105).contains(&nominal) && worst < 0.02 && elapsed < 30.0,
        format!(
            "VRF {nominal:.6}, worst Monte-Carlo deviation {:.2}%, {elapsed:.1}s",
            worst * 100.0
        ),
    )
}

fn q_opt_check() -> Outcome {
    let p = e(-0.25);
    let q = q_opt(p).unwrap();
    let lp = synthesis_filter(p, q, Sidedness::Causal).unwrap();
    let at_nyquist: f64 = lp
        .forward()
        .b
        .iter()
        .enumerate()
        .map(|(k, b)| if k % 2 == 0 { *b } else { -*b })
        .sum();
    outcome(
        (4.55..=4.65).contains(&q) && at_nyquist.abs() < 1e-9,
        format!("q_opt {q:.6}, numerator at z=-1 {at_nyquist:.2e}"),
    )
}

fn highpass_notch() -> Outcome {
    let lp = synthesis_filter(e(-0.25), 4.0, Sidedness::Causal).unwrap();
    let hpf = highpass_from_lowpass(&lp.to_tf(), 4);
    let atten = |f: f64| -20.0 * freq_response(&hpf, f).unwrap().norm().log10();
    let (a3, a6) = (atten(0.03), atten(0.06));
    outcome(
        (a3 - 20.0).abs() <= 1.5 && (a6 - 6.0).abs() <= 1.5,
        format!("attenuation {a3:.2} dB at f=0.03 (want 20 +/- 1.5), {a6:.2} dB at f=0.06 (want 6 +/- 1.5)"),
    )
}

fn parseval() -> Outcome {
    let (w, h, frames) = (21usize, 19usize, 30usize);
    let cfg = StageTwoConfig {
        omega: Omega::Full,
        ..StageTwoConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let input: Vec<Frame> = (0..frames)
        .map(|n| {
            let data = (0..w * h).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            Frame::new(w, h, n, FrameRole::Residual, data).unwrap()
        })
        .collect();
    let mut an = LaguerreAnalyzer::new(&cfg, w, h).unwrap();
    let mut power = None;
    for f in &input {
        let spec = an.push(f).unwrap();
        power = Some(accumulate_power(&spec, an.bins(), None).unwrap());
    }
    let power = power.unwrap();

    let px = cfg.sigma_x.exp();
    let py = cfg.sigma_y.exp();
    let pz = cfg.sigma_z.exp();
    let ax = gram_schmidt(BasisSpec::new(2, px, Sidedness::TwoSided)).unwrap();
    let ay = gram_schmidt(BasisSpec::new(2, py, Sidedness::TwoSided)).unwrap();
    let az = gram_schmidt(BasisSpec::new(2, pz, Sidedness::Causal)).unwrap();
    let last = frames - 1;
    let mut worst: f64 = 0.0;
    for &(cx, cy) in &[(10usize, 9usize), (0, 0), (20, 5), (3, 18)] {
        // direct weighted inner products over the data support (zero outside)
        let mut beta = [[[0.0; 3]; 3]; 3];
        for (t, f) in input.iter().enumerate() {
            let mz = (last - t) as f64;
            let wz = pz.powf(mz);
            let pz_psi = az.eval_all(mz);
            for y in 0..h {
                let my = cy as f64 - y as f64;
                let wy = py.powf(my.abs());
                let py_psi = ay.eval_all(my);
                for x in 0..w {
                    let mx = cx as f64 - x as f64;
                    let wgt = px.powf(mx.abs()) * wy * wz * f.get(x, y);
                    let px_psi = ax.eval_all(mx);
                    for i in 0..3 {
                        for j in 0..3 {
                            for k in 0..3 {
                                beta[i][j][k] += px_psi[i] * py_psi[j] * pz_psi[k] * wgt;
                            }
                        }
                    }
                }
            }
        }
        // fitted polynomial summed with the weight over a wide truncated window
        let fit = |psi_x: &[f64], psi_y: &[f64], psi_z: &[f64]| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        s += beta[i][j][k] * psi_x[i] * psi_y[j] * psi_z[k];
                    }
                }
            }
            s
        };
        let (span, depth) = (80i64, 160i64);
        let xs: Vec<(f64, Vec<f64>)> = (-span..=span)
            .map(|m| (px.powf(m.abs() as f64), ax.eval_all(m as f64)))
            .collect();
        let ys: Vec<(f64, Vec<f64>)> = (-span..=span)
            .map(|m| (py.powf(m.abs() as f64), ay.eval_all(m as f64)))
            .collect();
        let mut direct = 0.0;
        for mz in 0..=depth {
            let wz = pz.powf(mz as f64);
            let psi_z = az.eval_all(mz as f64);
            for (wy, psi_y) in &ys {
                for (wx, psi_x) in &xs {
                    let i_hat = fit(psi_x, psi_y, &psi_z);
                    direct += i_hat * wx * wy * wz * i_hat;
                }
            }
        }
        let got = power.get(cx, cy);
        worst = worst.max((got - direct).abs() / direct.abs());
    }
    outcome(worst < 1e-6, format!("max relative deviation {worst:.2e}"))
}

struct EnsembleFacts {
    pipeline: f64,
    clairvoyant: f64,
    grid: f64,
    velocity_error: f64,
    speed_bias: f64,
    elapsed: f64,
}

fn default_ensemble() -> EnsembleFacts {
    let start = Instant::now();
    let opts = RunOptions {
        banks: vec![BankSpec::Clairvoyant, BankSpec::Grid(vec![-1.0, 0.0, 1.0])],
        keep_frames: false,
    };
    let seeds: Vec<u64> = (0..SEEDS).collect();
    let (summary, _) = run_ensemble(&ScenarioConfig::default(), &PipelineConfig::default(), &opts, &seeds).unwrap();
    let bank = |i: usize| summary.bank_mean_snr_db[i].1.unwrap_or(f64::NAN);
    EnsembleFacts {
        pipeline: summary.mean_snr_db.unwrap_or(f64::NAN),
        clairvoyant: bank(0),
        grid: bank(1),
        velocity_error: summary.mean_velocity_error.unwrap_or(f64::NAN),
        speed_bias: summary.mean_speed_bias.unwrap_or(f64::NAN),
        elapsed: start.elapsed().as_secs_f64(),
    }
}

fn end_to_end(f: &EnsembleFacts) -> Outcome {
    let band = (10.0..=14.0).contains(&f.pipeline);
    let order = f.clairvoyant > f.pipeline && f.pipeline > f.grid;
    outcome(
        band && order && f.elapsed < 600.0,
        format!(
            "{SEEDS} seeds: pipeline {:.2} dB (want [10, 14]), clairvoyant {:.2} dB, grid3x3 {:.2} dB, ordering {}, {:.0}s",
            f.pipeline,
            f.clairvoyant,
            f.grid,
            if order { "holds" } else { "violated" },
            f.elapsed
        ),
    )
}

fn velocity(f: &EnsembleFacts) -> Outcome {
    let (n, c) = (64usize, 32usize);
    let frames = 80usize;
    let rho = -0.05;
    let steps = [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75];
    let mut worst: f64 = 0.0;
    for &vx in &steps {
        for &vy in &steps {
            let mut an = LaguerreAnalyzer::new(&StageTwoConfig::default(), n, n).unwrap();
            let mut last = None;
            for t in 0..frames {
                let dt = t as f64 - (frames - 1) as f64;
                let frame = Frame::from_fn(n, n, t, FrameRole::Residual, |x, y| {
                    let dx = x as f64 - c as f64 - vx * dt;
                    let dy = y as f64 - c as f64 - vy * dt;
                    1.0 + rho * dx * dx + rho * dy * dy
                });
                last = Some(an.push(&frame).unwrap());
            }
            let g = beta_to_gamma(&last.unwrap().at(c, c), an.alphas()).unwrap();
            let m = estimate_velocity(&g);
            if !m.reliable {
                worst = f64::INFINITY;
            }
            worst = worst.max((m.vx - vx).abs()).max((m.vy - vy).abs());
        }
    }
    let ok = worst <= 0.15 && f.velocity_error < 0.25 && f.speed_bias < 0.0;
    outcome(
        ok,
        format!(
            "synthetic fields max axis error {worst:.2e}; ensemble mean |v_hat - v| {:.3}, speed bias {:+.3}",
            f.velocity_error, f.speed_bias
        ),
    )
}

fn psf_trend() -> Outcome {
    let paper = [6.9, 13.0, 19.5, 21.6];
    let pipe = PipelineConfig {
        bypass_stage1: true,
        ..PipelineConfig::default()
    };
    let seeds: Vec<u64> = (0..SEEDS).collect();
    let mut means = Vec::new();
    for psf in [0.5, 1.0, 2.0, 4.0] {
        let scn = ScenarioConfig {
            psf_std: psf,
            ..ScenarioConfig::default()
        }
        .without_background();
        let (summary, _) = run_ensemble(&scn, &pipe, &RunOptions::default(), &seeds).unwrap();
        means.push(summary.mean_snr_db.unwrap_or(f64::NAN));
    }
    let increasing = means.windows(2).all(|w| w[1] > w[0]);
    let close = means.iter().zip(&paper).all(|(m, p)| (m - p).abs() <= 2.0);
    let list: Vec<String> = means.iter().map(|m| format!("{m:.2}")).collect();
    outcome(
        increasing && close,
        format!(
            "SNR [{}] dB vs [6.9, 13.0, 19.5, 21.6]; increasing {increasing}, within 2 dB {close}",
            list.join(", ")
        ),
    )
}

fn determinism() -> Outcome {
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let opts = RunOptions {
                banks: vec![BankSpec::Grid(vec![-1.0, 0.0, 1.0])],
                keep_frames: true,
            };
            let run = run_scenario(
                &ScenarioConfig {
                    seed: 3,
                    ..ScenarioConfig::default()
                },
                &PipelineConfig::default(),
                &opts,
            )
            .unwrap();
            let stages = run.stages.as_ref().unwrap();
            let mut bytes = Vec::new();
            for set in [
                &run.input,
                &stages.raw,
                &stages.background,
                &stages.residual,
                &stages.power,
            ] {
                write_frames(&mut bytes, set).unwrap();
            }
            let metrics = format!(
                "{:?} {:?} {:?} {:?}",
                run.records, run.mean_snr_db, run.mean_velocity, run.banks
            );
            (bytes, metrics)
        })
    };
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get()).max(2);
    let (b1, m1) = run_with(1);
    let (bn, mn) = run_with(threads);
    outcome(
        b1 == bn && m1 == mn,
        format!(
            "1 vs {threads} threads: frame bytes equal {}, metrics equal {}",
            b1 == bn,
            m1 == mn
        ),
    )
}

fn throughput() -> Outcome {
    let (input, _) = generate(&ScenarioConfig::default()).unwrap();
    let mut pipeline = Pipeline::new(PipelineConfig::default(), 128, 128).unwrap();
    let start = Instant::now();
    for f in &input {
        pipeline.push(f).unwrap();
    }
    let fps = input.len() as f64 / start.elapsed().as_secs_f64();
    outcome(fps >= 88.0, format!("{fps:.0} frames/s on 128x128 (want >= 88)"))
}

fn main() -> ExitCode {
    let mut hard_failures = 0;
    let mut report = |id: u32, name: &str, soft: bool, o: Outcome| {
        let tag = match (o.pass, soft) {
            (true, _) => "PASS",
            (false, true) => "WARN",
            (false, false) => {
                hard_failures += 1;
                "FAIL"
            }
        };
        println!("{tag} {id:>2} {name}: {}", o.detail);
    };
    report(1, "coefficient tables", false, tables());
    report(2, "basis coefficient table", false, alpha_table());
    report(3, "orthonormality", false, orthonormality());
    report(4, "magnitude flatness", false, flatness_check());
    report(5, "polynomial reproduction", false, polynomial_reproduction());
    report(6, "variance reduction factor", false, vrf_check());
    report(7, "optimal delay", false, q_opt_check());
    report(8, "high-pass notch", false, highpass_notch());
    report(9, "power identity", false, parseval());
    let facts = default_ensemble();
    report(10, "end-to-end SNR", false, end_to_end(&facts));
    report(11, "velocity estimation", false, velocity(&facts));
    report(12, "PSF width trend", false, psf_trend());
    report(13, "thread determinism", false, determinism());
    report(14, "throughput", true, throughput());
    if hard_failures == 0 {
        println!("acceptance: all hard criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {hard_failures} hard criteria failed");
        ExitCode::FAILURE
    }
}
