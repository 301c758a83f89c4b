use laguerre_core::scenario::{clutter_tilt, generate};
use laguerre_core::ScenarioConfig;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

fn clutter_only(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        frames: 64,
        width: 64,
        height: 64,
        i_max: 0.0,
        noise_std: 0.0,
        dc_offset: 0.0,
        seed,
        ..ScenarioConfig::default()
    }
}

/// In-place FFT of a cube along one axis.
fn fft_axis(data: &mut [Complex64], n: usize, stride: usize, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_forward(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let outer = data.len() / n;
    for o in 0..outer {
        let base = (o / stride) * stride * n + o % stride;
        for i in 0..n {
            line[i] = data[base + i * stride];
        }
        fft.process(&mut line);
        for i in 0..n {
            data[base + i * stride] = line[i];
        }
    }
}

#[test]
fn clutter_spectrum_sits_on_tilted_frequencies() {
    let n = 64usize;
    let cfg = clutter_only(3);
    let (frames, truth) = generate(&cfg).unwrap();
    let hann = |i: usize| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos();
    let mut cube = vec![Complex64::new(0.0, 0.0); n * n * n];
    for (t, f) in frames.iter().enumerate() {
        for y in 0..n {
            for x in 0..n {
                cube[(t * n + y) * n + x] = Complex64::new(f.get(x, y) * hann(x) * hann(y) * hann(t), 0.0);
            }
        }
    }
    let mut planner = FftPlanner::new();
    fft_axis(&mut cube, n, 1, &mut planner);
    fft_axis(&mut cube, n, n, &mut planner);
    fft_axis(&mut cube, n, n * n, &mut planner);

    let near = |bin: usize, f: f64| {
        let d = (bin as f64 - f * n as f64).rem_euclid(n as f64);
        d.min(n as f64 - d) <= 1.5
    };
    let (mut total, mut inside) = (0.0, 0.0);
    for kz in 0..n {
        for ky in 0..n {
            for kx in 0..n {
                let e = cube[(kz * n + ky) * n + kx].norm_sqr();
                total += e;
                let hit = truth.components.iter().any(|c| {
                    let fz = clutter_tilt(truth.v_clt[0], truth.v_clt[1], c.fx, c.fy);
                    assert!((fz - c.fz).abs() < 1e-15);
                    [1.0, -1.0]
                        .iter()
                        .any(|s| near(kx, s * c.fx) && near(ky, s * c.fy) && near(kz, s * c.fz))
                });
                if hit {
                    inside += e;
                }
            }
        }
    }
    assert!(inside / total > 0.99, "fraction {}", inside / total);
}

#[test]
fn integer_clutter_velocity_translates_frames() {
    let cfg = ScenarioConfig {
        clutter_velocity: [1.0, 1.0],
        ..clutter_only(8)
    };
    let (frames, truth) = generate(&cfg).unwrap();
    assert_eq!(truth.v_clt, [1.0, 1.0]);
    for pair in frames.windows(2) {
        for y in 0..63 {
            for x in 0..63 {
                assert!((pair[1].get(x + 1, y + 1) - pair[0].get(x, y)).abs() < 1e-12);
            }
        }
    }
}
