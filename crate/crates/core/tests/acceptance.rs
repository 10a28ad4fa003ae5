//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p dirloud --test acceptance`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dirloud::analysis::{analyze, compare, AnalysisConfig};
use dirloud::distortion::{dld, map_difference, pearson};
use dirloud::export::{read_map_csv, read_pgm, write_pgm};
use dirloud::loudness::{band_loudness, DirectionalLoudnessMap, MapParams};
use dirloud::panning::{gaussian_window, panning_index};
use dirloud::peripheral::{hann, peripheral_model, stft_analyze, stft_channel, StftConfig};
use dirloud::signal_io::{load_stereo_wav, StereoBuffer};
use dirloud::synth::{crosstalk, pan_collapse, panned_source, MonoSource, PanLaw};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATE: u32 = 48_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn noise(seed: u64) -> MonoSource {
    MonoSource::WhiteNoise {
        seed,
        amplitude: 0.5,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Largest element-wise deviation relative to the larger map's maximum.
fn max_rel_deviation(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = a
        .iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        dev
    } else {
        dev / scale
    }
}

// 1. Panning index closed form on amplitude-panned white noise.
fn panning_closed_form() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for (gl, gr) in [(1.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 1.0)] {
        let law = PanLaw::new(gl, gr).unwrap();
        let buf = panned_source(noise(11), law, 1.0, RATE).unwrap();
        let spec = peripheral_model(&buf, &StftConfig::new(RATE), 20, 0.0).unwrap();
        let field = panning_index(&spec);
        let energy = (&spec.left.mapv(|x| x.norm_sqr())) + &spec.right.mapv(|x| x.norm_sqr());
        let max_energy = energy.iter().copied().fold(0.0, f64::max);
        let psis: Vec<f64> = field
            .values()
            .iter()
            .zip(energy.iter())
            .filter(|(_, e)| **e > 1e-10 * max_energy)
            .map(|(p, _)| *p)
            .collect();
        let expected = law.panning_index();
        let got = median(psis);
        let err = (got - expected).abs();
        ok &= err <= 1e-6;
        details.push(format!("{gl}:{gr} median {got:.9} vs {expected:.9}"));
    }
    let elapsed = start.elapsed();
    details.push(format!("{:.2}s", elapsed.as_secs_f64()));
    check(ok && elapsed < Duration::from_secs(5), details.join("; "))
}

// 2. Gaussian window spot values.
fn window_spot_values() -> Outcome {
    let peak = gaussian_window(0.37, 0.37, 0.006);
    let tenth = gaussian_window(0.1, 0.0, 0.006);
    let expected = (-0.01f64 / (2.0 * 0.006)).exp();
    check(
        peak == 1.0 && (tenth - expected).abs() <= 1e-9 && (tenth - 0.43460).abs() < 1e-5,
        format!("peak {peak}, distance 0.1 -> {tenth:.12}"),
    )
}

// 3. STFT against a direct DFT, and the frame-count formula.
fn stft_oracle() -> Outcome {
    let block = 1024;
    let cfg = StftConfig::new(RATE);
    let twiddle: Vec<Complex64> = (0..block)
        .map(|t| Complex64::from_polar(1.0, -2.0 * PI * t as f64 / block as f64))
        .collect();
    let window = hann(block);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let frame: Vec<f64> = (0..block).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = stft_channel(&frame, &cfg).unwrap();
        let windowed: Vec<f64> = frame.iter().zip(&window).map(|(x, w)| x * w).collect();
        let direct: Vec<Complex64> = (0..=block / 2)
            .map(|k| {
                windowed
                    .iter()
                    .enumerate()
                    .map(|(t, x)| twiddle[(k * t) % block] * x)
                    .sum()
            })
            .collect();
        let scale = direct.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let dev = fast
            .row(0)
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(dev / scale);
    }
    let mut counts = Vec::new();
    let mut counts_ok = true;
    for n in [1024usize, 1025, 48_000] {
        let buf = StereoBuffer::new(vec![0.1; n], vec![0.2; n], RATE).unwrap();
        let frames = stft_analyze(&buf, &cfg).unwrap().frames();
        let formula = (n - 1024) / 512 + 1;
        counts_ok &= frames == formula && cfg.frame_count(n) == formula;
        counts.push(format!("N={n}:F={frames}"));
    }
    counts_ok &= counts == ["N=1024:F=1", "N=1025:F=1", "N=48000:F=92"];
    check(
        worst <= 1e-9 && counts_ok,
        format!("worst relative deviation {worst:.2e}; {}", counts.join(" ")),
    )
}

// 4. Loudness exponent and amplitude scaling law.
fn loudness_exponent() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for p in [1e-8f64, 1.0, 1e4] {
        let band = Array2::from_shape_fn((2, 8), |(m, k)| {
            Complex64::from_polar(p.sqrt(), (m * 8 + k) as f64 * 0.7)
        });
        let l = band_loudness(band.view(), 0..8);
        let err = l
            .iter()
            .map(|v| (v - p.powf(0.25)).abs())
            .fold(0.0, f64::max);
        ok &= err <= 1e-12;
        details.push(format!("P={p:e}: err {err:.1e}"));
    }
    let a = panned_source(noise(5), PanLaw::new(1.0, 0.3).unwrap(), 1.0, RATE).unwrap();
    let b = panned_source(noise(6), PanLaw::new(0.2, 1.0).unwrap(), 1.0, RATE).unwrap();
    let mix = StereoBuffer::new(
        a.left().iter().zip(b.left()).map(|(x, y)| x + y).collect(),
        a.right()
            .iter()
            .zip(b.right())
            .map(|(x, y)| x + y)
            .collect(),
        RATE,
    )
    .unwrap();
    let cfg = AnalysisConfig::default();
    let base = analyze(&mix, &cfg, false).unwrap();
    for c in [0.25f64, 4.0] {
        let scaled = analyze(&mix.scaled(c), &cfg, false).unwrap();
        let dev = max_rel_deviation(scaled.values(), &(base.values() * c.sqrt()));
        ok &= dev <= 1e-9;
        details.push(format!("c={c}: rel dev {dev:.1e}"));
    }
    check(ok, details.join("; "))
}

fn params(directions: usize) -> MapParams {
    MapParams {
        xi: 0.006,
        directions,
        bands: Default::default(),
        band_count: 20,
        f_min: 0.0,
        block: 1024,
        hop: 512,
        sample_rate: RATE,
    }
}

fn random_map(rng: &mut ChaCha8Rng) -> DirectionalLoudnessMap {
    let values = Array2::from_shape_fn((40, 22), |_| rng.gen_range(0.0..3.0));
    let dirs = (0..22).map(|j| (2.0 * j as f64 - 21.0) / 21.0).collect();
    DirectionalLoudnessMap::new(values, dirs, params(22)).unwrap()
}

// 5. Metric identities.
fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut ok = true;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..50 {
        let (a, b, c) = (
            random_map(&mut rng),
            random_map(&mut rng),
            random_map(&mut rng),
        );
        ok &= dld(&a, &a).unwrap().dld == 0.0;
        let ab = dld(&a, &b).unwrap().dld;
        ok &= ab == dld(&b, &a).unwrap().dld;
        let slack = ab + dld(&b, &c).unwrap().dld - dld(&a, &c).unwrap().dld;
        ok &= slack >= -1e-12;
        worst_slack = worst_slack.min(slack);
    }
    let a = random_map(&mut rng);
    let delta = 0.125;
    let shifted =
        DirectionalLoudnessMap::new(a.values() + delta, a.directions().to_vec(), *a.params())
            .unwrap();
    let offset = dld(&a, &shifted).unwrap().dld;
    ok &= (offset - delta).abs() <= 1e-12;
    check(
        ok,
        format!("min triangle slack {worst_slack:.3e}; offset dld {offset} for delta {delta}"),
    )
}

fn two_source_mix(duration: f64) -> StereoBuffer {
    let a = panned_source(
        noise(21),
        PanLaw::constant_power(2.0, 1.0).unwrap(),
        duration,
        RATE,
    )
    .unwrap();
    let b = panned_source(
        noise(22),
        PanLaw::constant_power(1.0, 3.0).unwrap(),
        duration,
        RATE,
    )
    .unwrap();
    StereoBuffer::new(
        a.left()
            .iter()
            .zip(b.left())
            .map(|(x, y)| x + 0.5 * y)
            .collect(),
        a.right()
            .iter()
            .zip(b.right())
            .map(|(x, y)| x + 0.5 * y)
            .collect(),
        RATE,
    )
    .unwrap()
}

// 6. Mirror symmetry under channel swap.
fn mirror_symmetry() -> Outcome {
    let cfg = AnalysisConfig::default();
    let reference = two_source_mix(1.0);
    let map = analyze(&reference, &cfg, false).unwrap();
    let swapped = analyze(&reference.swapped(), &cfg, false).unwrap();
    let j = map.direction_count();
    let mirrored = Array2::from_shape_fn(map.values().dim(), |(m, d)| {
        swapped.values()[[m, j - 1 - d]]
    });
    let dev = max_rel_deviation(map.values(), &mirrored);

    let test = crosstalk(&pan_collapse(&reference, 0.6, (0.2, 0.7)).unwrap(), 0.2).unwrap();
    let plain = compare(reference.clone(), test.clone(), &cfg, false)
        .unwrap()
        .report
        .dld;
    let both_swapped = compare(reference.swapped(), test.swapped(), &cfg, false)
        .unwrap()
        .report
        .dld;
    let dld_dev = (plain - both_swapped).abs() / plain;
    check(
        dev <= 1e-9 && dld_dev <= 1e-9 && plain > 0.0,
        format!("map rel dev {dev:.1e}; dld {plain:.9} vs swapped {both_swapped:.9}"),
    )
}

fn target_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

// 7. Temporal collapse of a hard-left source, DIFF map structure.
fn collapse_reproduction() -> Outcome {
    let start = Instant::now();
    let intervals = [(2.0, 2.5), (3.0, 3.5)];
    let reference = panned_source(noise(7), PanLaw::HARD_LEFT, 5.0, RATE).unwrap();
    let mut test = reference.clone();
    for iv in intervals {
        test = pan_collapse(&test, 1.0, iv).unwrap();
    }
    let cmp = compare(reference, test, &AnalysisConfig::default(), false).unwrap();
    let diff = map_difference(&cmp.reference, &cmp.test).unwrap();

    let block = 1024.0;
    let hop = 512.0;
    let frame_span = |m: usize| {
        (
            m as f64 * hop / RATE as f64,
            (m as f64 * hop + block) / RATE as f64,
        )
    };
    let inside = |m: usize| {
        let (s, e) = frame_span(m);
        intervals.iter().any(|(t0, t1)| s >= *t0 && e <= *t1)
    };
    let outside = |m: usize| {
        let (s, e) = frame_span(m);
        intervals.iter().all(|(t0, t1)| e <= *t0 || s >= *t1)
    };
    let energy: Vec<f64> = diff
        .values()
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v * v).sum())
        .collect();
    let inside_e: Vec<f64> = (0..energy.len())
        .filter(|m| inside(*m))
        .map(|m| energy[m])
        .collect();
    let outside_e: Vec<f64> = (0..energy.len())
        .filter(|m| outside(*m))
        .map(|m| energy[m])
        .collect();
    let min_in = inside_e.iter().copied().fold(f64::INFINITY, f64::min);
    let max_out = outside_e.iter().copied().fold(0.0, f64::max);
    let mean_in = inside_e.iter().sum::<f64>() / inside_e.len() as f64;
    let mean_out = outside_e.iter().sum::<f64>() / outside_e.len() as f64;
    let energy_ok = !inside_e.is_empty() && min_in > 10.0 * max_out && mean_in > 10.0 * mean_out;

    // PGM structure: bright pixels only in frames touching an interval, and
    // in collapsed frames the brightest rows are hard left or next to center.
    let dir = target_dir();
    std::fs::create_dir_all(&dir).unwrap();
    let pgm_path = dir.join("collapse_diff.pgm");
    let mut bytes = Vec::new();
    write_pgm(&mut bytes, &diff).unwrap();
    std::fs::write(&pgm_path, &bytes).unwrap();
    let (width, height, pixels) = read_pgm(&bytes).unwrap();
    let directions = diff.directions();
    let center_rows: Vec<usize> = {
        let mut idx: Vec<usize> = (0..directions.len()).collect();
        idx.sort_by(|a, b| directions[*a].abs().total_cmp(&directions[*b].abs()));
        idx[..2].to_vec()
    };
    let mut structure_ok = width == diff.frames() && height == directions.len();
    for m in 0..width {
        let column: Vec<u8> = (0..height).map(|row| pixels[row * width + m]).collect();
        let brightest = column.iter().copied().max().unwrap();
        if outside(m) {
            structure_ok &= brightest == 0;
        }
        if inside(m) {
            // Row 0 is direction +1, the last row is -1.
            let row = column.iter().position(|p| *p == brightest).unwrap();
            let j = height - 1 - row;
            structure_ok &= brightest > 100 && (j == 0 || center_rows.contains(&j));
        }
    }
    let elapsed = start.elapsed();
    check(
        energy_ok && structure_ok && elapsed < Duration::from_secs(10),
        format!(
            "inside min {min_in:.3e} / outside max {max_out:.3e} ({} in, {} out frames); pgm {} structure {}; {:.2}s",
            inside_e.len(),
            outside_e.len(),
            pgm_path.display(),
            if structure_ok { "ok" } else { "BAD" },
            elapsed.as_secs_f64()
        ),
    )
}

// 8. DLD grows with degradation severity.
fn monotonicity() -> Outcome {
    let cfg = AnalysisConfig::default();
    let reference = panned_source(
        noise(3),
        PanLaw::constant_power(2.0, 1.0).unwrap(),
        2.0,
        RATE,
    )
    .unwrap();
    let duration = reference.duration_secs();
    let severities = [0.0, 0.25, 0.5, 0.75, 1.0];
    let series = |degrade: &dyn Fn(f64) -> StereoBuffer| -> Vec<f64> {
        severities
            .iter()
            .map(|s| {
                compare(reference.clone(), degrade(*s), &cfg, false)
                    .unwrap()
                    .report
                    .dld
            })
            .collect()
    };
    let collapse = series(&|a| pan_collapse(&reference, a, (0.0, duration)).unwrap());
    let leak = series(&|b| crosstalk(&reference, b).unwrap());
    let monotone = |v: &[f64]| v[0] == 0.0 && v.windows(2).all(|w| w[1] >= w[0]);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    check(
        monotone(&collapse) && monotone(&leak),
        format!("collapse [{}]; crosstalk [{}]", fmt(&collapse), fmt(&leak)),
    )
}

fn dirloud(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dirloud"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

// 9. CLI determinism, CSV round trip and batch correlation.
fn cli_determinism() -> Outcome {
    let dir = target_dir().join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let reference = dir.join("ref.wav");
    let synth = dirloud(&[
        "synth",
        "-o",
        path_str(&reference),
        "--gains",
        "1,0",
        "--duration",
        "2",
        "--seed",
        "4",
    ]);
    if !synth.status.success() {
        return Err(format!(
            "synth failed: {}",
            String::from_utf8_lossy(&synth.stderr)
        ));
    }
    let mut suts = Vec::new();
    for (i, alpha) in ["0.25", "0.5", "1"].iter().enumerate() {
        let sut = dir.join(format!("sut{i}.wav"));
        let collapse = format!("{alpha}@0.5-1.5");
        let out = dirloud(&[
            "synth",
            "-o",
            path_str(&sut),
            "--gains",
            "1,0",
            "--duration",
            "2",
            "--seed",
            "4",
            "--collapse",
            &collapse,
        ]);
        if !out.status.success() {
            return Err(format!(
                "synth failed: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        suts.push(sut);
    }

    // Byte-identical artifacts across runs.
    let mut identical = true;
    let mut csvs = Vec::new();
    for run in 0..2 {
        let csv = dir.join(format!("map{run}.csv"));
        let pgm = dir.join(format!("map{run}.pgm"));
        let out = dirloud(&[
            "map",
            path_str(&suts[1]),
            "-o",
            path_str(&csv),
            "--pgm",
            path_str(&pgm),
        ]);
        identical &= out.status.success();
        csvs.push((std::fs::read(&csv).unwrap(), std::fs::read(&pgm).unwrap()));
    }
    identical &= csvs[0] == csvs[1];
    let compare_runs: Vec<Vec<u8>> = (0..2)
        .map(|_| dirloud(&["compare", path_str(&reference), path_str(&suts[1])]).stdout)
        .collect();
    identical &= compare_runs[0] == compare_runs[1] && !compare_runs[0].is_empty();

    // CSV re-import against the in-memory map.
    let buf = load_stereo_wav(&suts[1], false).unwrap();
    let map = analyze(&buf, &AnalysisConfig::default(), false).unwrap();
    let (dirs, values) = read_map_csv(csvs[0].0.as_slice()).unwrap();
    let mut worst = 0.0f64;
    for (a, b) in map.values().iter().zip(values.iter()) {
        if *a != 0.0 {
            worst = worst.max((a - b).abs() / a.abs());
        } else if *b != 0.0 {
            worst = f64::INFINITY;
        }
    }
    let round_trip =
        dirs.len() == map.direction_count() && values.dim() == map.values().dim() && worst <= 5e-12;

    // Batch with score column equal to DLD.
    let mut manifest = String::from("item_id,ref_path,sut_path,score\n");
    for (i, sut) in suts.iter().enumerate() {
        let out = dirloud(&["compare", path_str(&reference), path_str(sut)]);
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let d = report["dld"].as_f64().unwrap();
        manifest.push_str(&format!(
            "item{i},ref.wav,{},{d}\n",
            sut.file_name().unwrap().to_str().unwrap()
        ));
    }
    let manifest_path = dir.join("manifest.csv");
    std::fs::write(&manifest_path, manifest).unwrap();
    let report_path = dir.join("batch.csv");
    let batch = dirloud(&[
        "batch",
        path_str(&manifest_path),
        "-o",
        path_str(&report_path),
        "--jobs",
        "3",
    ]);
    let summary: serde_json::Value = serde_json::from_slice(&batch.stdout).unwrap_or_default();
    let r = summary["pearson_r"].as_f64().unwrap_or(f64::NAN);
    let batch_ok = batch.status.success() && (r - 1.0).abs() <= 1e-9;

    check(
        identical && round_trip && batch_ok,
        format!("byte-identical {identical}; csv round-trip worst rel {worst:.1e}; batch R = {r}"),
    )
}

// 10. Pearson correlation examples.
fn pearson_oracle() -> Outcome {
    let a = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
    let b = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
    let c = pearson(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0]).unwrap();
    // Hand-computed: cov 1/2, var 1 and 1/3 -> sqrt(3)/2.
    check(
        (a - 1.0).abs() <= 1e-9
            && (b + 1.0).abs() <= 1e-9
            && (c - 0.75f64.sqrt()).abs() <= 1e-9
            && (c - 0.866).abs() < 1e-3,
        format!("{a}, {b}, {c:.12}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1 panning index closed form", panning_closed_form),
        ("AC2 gaussian window spot values", window_spot_values),
        ("AC3 STFT vs direct DFT, frame count", stft_oracle),
        ("AC4 loudness exponent and scaling law", loudness_exponent),
        ("AC5 DLD metric identities", metric_identities),
        ("AC6 channel-swap mirror symmetry", mirror_symmetry),
        ("AC7 temporal pan collapse DIFF map", collapse_reproduction),
        ("AC8 DLD monotone in severity", monotonicity),
        ("AC9 CLI determinism and round trip", cli_determinism),
        ("AC10 Pearson oracle", pearson_oracle),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let outcome =
            std::panic::catch_unwind(criterion).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
