//! Acceptance criteria. Each one prints a single PASS/FAIL line; the process
//! fails if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lasernet::config::load_scene;
use lasernet_core::beam::{default_vcsel_modes, lens_transform, BeamSpec, LensSpec};
use lasernet_core::channel::captured_fraction;
use lasernet_core::linalg::{right_pseudo_inverse, Matrix};
use lasernet_core::link::noise_variance;
use lasernet_core::precoding::{residual_interference, zf_precoder_with_caps};
use lasernet_core::safety::{d86_distance, max_safe_power, pupil_fraction, SafetySpec};
use lasernet_core::scene::{default_lens, ElectricalSpec};
use lasernet_core::sweep::{run_sweep, LensMode, SweepRow, SweepSpec};
use lasernet_core::Error;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const W0: f64 = 5e-6;
const LAMBDA: f64 = 850e-9;
const EXAMPLE_CONFIG: &str = include_str!("../../../configs/reference.toml");

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);
type Metric = (&'static str, fn(&SweepRow) -> f64);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_rel(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let detail = f()?;
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(format!("{detail} ({took:.2?})"))
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn oracle_radius(w0: f64, z: f64) -> f64 {
    let zr = PI * w0 * w0 / LAMBDA;
    w0 * (1.0 + (z / zr).powi(2)).sqrt()
}

fn mode_normalization() -> Verdict {
    timed(Duration::from_secs(5), || {
        let beam = BeamSpec::vcsel(W0, LAMBDA).unwrap();
        let mut worst: f64 = 0.0;
        for z in [0.0, beam.rayleigh_range(), 2.0] {
            let w = oracle_radius(W0, z);
            for m in default_vcsel_modes() {
                let power = simpson(
                    |r| 2.0 * PI * r * beam.mode_intensity(m.p, m.l, r, z).unwrap(),
                    0.0,
                    10.0 * w,
                    4000,
                );
                worst = worst.max((power - 1.0).abs());
                ensure(
                    (power - 1.0).abs() <= 1e-6,
                    format!("mode ({},{}) at z={z}: {power}", m.p, m.l),
                )?;
            }
            let total = simpson(|r| 2.0 * PI * r * beam.intensity(r, z), 0.0, 10.0 * w, 4000);
            ensure(
                (total - 1.0).abs() <= 1e-6,
                format!("mixture at z={z}: {total}"),
            )?;
        }
        Ok(format!("8 modes x 3 planes, max |P-1| = {worst:.1e}"))
    })
}

fn rayleigh_far_field() -> Verdict {
    let beam = BeamSpec::fundamental(W0, LAMBDA).unwrap();
    let zr = beam.rayleigh_range();
    ensure((zr - 9.2400e-5).abs() <= 1e-9, format!("z_r = {zr:e}"))?;
    let w2 = beam.radius_at(2.0);
    ensure(within_rel(w2, 0.10823, 1e-3), format!("w(2) = {w2}"))?;
    let mut worst: f64 = 0.0;
    for k in 0..=60 {
        let z = 100.0 * zr * 10f64.powf(k as f64 / 10.0);
        let err = (beam.far_field_radius(z) / beam.radius_at(z) - 1.0).abs();
        worst = worst.max(err);
    }
    ensure(worst <= 1e-3, format!("far-field error {worst:e}"))?;
    Ok(format!(
        "z_r = {zr:.5e} m, w(2 m) = {w2:.5} m, far-field err <= {worst:.1e}"
    ))
}

#[derive(Clone, Copy)]
struct C(f64, f64);

impl C {
    fn inv(self) -> C {
        let d = self.0 * self.0 + self.1 * self.1;
        C(self.0 / d, -self.1 / d)
    }
}

/// Complex beam parameter through free space `d1` then a thin lens `f`.
/// Returns the distance to the new waist and its radius.
fn abcd_oracle(w0: f64, d1: f64, f: f64) -> (f64, f64) {
    let zr = PI * w0 * w0 / LAMBDA;
    let q1 = C(d1, zr);
    let inv = q1.inv();
    let q2 = C(inv.0 - 1.0 / f, inv.1).inv();
    // q2 + d2 is purely imaginary at the new waist
    let d2 = -q2.0;
    let w = (LAMBDA * q2.1 / PI).sqrt();
    (d2, w)
}

fn lens_oracle() -> Verdict {
    let f = default_lens().focal_length();
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let w0 = 1e-6 + 7e-6 * i as f64 / 9.0;
        let beam = BeamSpec::fundamental(w0, LAMBDA).unwrap();
        for j in 0..10 {
            let d1 = f * (0.5 + 1.5 * j as f64 / 9.0);
            let lens = LensSpec::new(f, d1, 1.5).unwrap();
            let t = lens_transform(&beam, &lens);
            let (d2, wl) = abcd_oracle(w0, d1, f);
            let theta = beam.far_field_divergence();
            ensure(
                (t.divergence * t.magnification - theta).abs() <= 1e-12 * theta,
                format!("theta2 != theta/k at w0={w0:e}, d1={d1:e}"),
            )?;
            for (name, got, want) in [
                ("d2", t.waist_distance, d2),
                ("w_l", t.waist, wl),
                ("k", t.magnification, wl / w0),
            ] {
                let err = (got / want - 1.0).abs();
                worst = worst.max(err);
                ensure(
                    err <= 1e-3,
                    format!("{name} at w0={w0:e}, d1={d1:e}: {got:e} vs {want:e}"),
                )?;
            }
        }
        let at_focus = lens_transform(&beam, &LensSpec::new(f, f, 1.5).unwrap());
        ensure(
            at_focus.waist_distance == f,
            format!("d2 = {:e} at d1 = f", at_focus.waist_distance),
        )?;
    }
    Ok(format!(
        "100-point grid, max rel err {worst:.1e}; theta2 = theta/k; d2 == f at d1 == f"
    ))
}

fn eye_safety_closure() -> Verdict {
    let safety = SafetySpec::with_mpe(10.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..8 {
        let beam = BeamSpec::fundamental(1e-6 * (i + 1) as f64, LAMBDA).unwrap();
        let eta = pupil_fraction(&beam, d86_distance(&beam, &safety), &safety);
        worst = worst.max((eta - 0.86).abs());
    }
    ensure(worst <= 5e-3, format!("|eta(d86) - 0.86| = {worst}"))?;
    let beam = BeamSpec::fundamental(W0, LAMBDA).unwrap();
    let d86 = d86_distance(&beam, &safety);
    ensure(within_rel(d86, 0.06524, 1e-3), format!("d86 = {d86}"))?;
    let r = max_safe_power(&beam, &safety, None).unwrap();
    ensure(r.mhp == 0.1, format!("MHP = {}", r.mhp))?;
    Ok(format!(
        "|eta(d86)-0.86| <= {worst:.1e}, d86 = {d86:.5} m, MHP = {} m",
        r.mhp
    ))
}

fn channel_oracle() -> Verdict {
    let beam = BeamSpec::fundamental(W0, LAMBDA).unwrap();
    let a = (2e-4 / PI).sqrt();
    let h = captured_fraction(&beam, None, 2.0, 0.0, a).unwrap();
    let w = oracle_radius(W0, 2.0);
    let closed = 1.0 - (-2.0 * a * a / (w * w)).exp();
    ensure(
        (h - closed).abs() <= 1e-9 * closed,
        format!("{h} vs {closed}"),
    )?;
    ensure((h - 0.01086).abs() <= 1e-4, format!("h = {h}"))?;
    Ok(format!("h = {h:.6}, closed form {closed:.6}"))
}

fn condition_number(h: &Matrix) -> f64 {
    let m = DMatrix::from_fn(h.rows(), h.cols(), |i, j| h[(i, j)]);
    let sv = m.singular_values();
    sv.max() / sv.min()
}

/// Random `users × aps` matrix `U·diag(s)·Vᵀ` with orthogonal factors and
/// singular values log-spaced over up to six decades.
fn random_channel(rng: &mut ChaCha8Rng) -> Matrix {
    let aps = rng.gen_range(1..=8);
    let users = rng.gen_range(1..=aps);
    let decades: f64 = rng.gen_range(0.0..6.0);
    let orthogonal = |n: usize, rng: &mut ChaCha8Rng| {
        DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
            .qr()
            .q()
    };
    let u = orthogonal(users, rng);
    let v = orthogonal(aps, rng);
    let s = DMatrix::from_fn(users, aps, |i, j| {
        if i == j {
            let t = if users > 1 {
                i as f64 / (users - 1) as f64
            } else {
                0.0
            };
            10f64.powf(-decades * t)
        } else {
            0.0
        }
    });
    let h = u * s * v.transpose();
    Matrix::from_fn(users, aps, |i, j| h[(i, j)])
}

fn zf_suite() -> Verdict {
    timed(Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (mut tested, mut worst_id, mut worst_leak, mut max_cond) = (0, 0.0f64, 0.0f64, 0.0f64);
        while tested < 1000 {
            let h = random_channel(&mut rng);
            let (users, aps) = (h.rows(), h.cols());
            let cond = condition_number(&h);
            if cond > 1e6 {
                continue;
            }
            tested += 1;
            max_cond = max_cond.max(cond);
            let p = zf_precoder_with_caps(&h, &vec![1e-3; aps]).map_err(|e| e.to_string())?;
            let hg0 = h.mul(&p.unscaled);
            for i in 0..users {
                for j in 0..users {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst_id = worst_id.max((hg0[(i, j)] - want).abs());
                }
            }
            let hg = h.mul(&p.weights);
            let diag = (0..users).fold(0.0f64, |m, i| m.max(hg[(i, i)].abs()));
            worst_leak = worst_leak.max(residual_interference(&h, &p.weights).max_abs() / diag);
        }
        ensure(worst_id <= 1e-10, format!("|H G0 - I| = {worst_id:e}"))?;
        ensure(worst_leak <= 1e-9, format!("leakage ratio {worst_leak:e}"))?;

        let dup = Matrix::from_rows(&[vec![0.5, 0.1, 0.2], vec![0.5, 0.1, 0.2]]);
        ensure(
            matches!(
                right_pseudo_inverse(&dup),
                Err(Error::SingularChannel {
                    partner: Some(_),
                    ..
                })
            ),
            "duplicated rows not reported",
        )?;
        let zero = Matrix::from_rows(&[vec![0.5, 0.1], vec![0.0, 0.0]]);
        ensure(
            right_pseudo_inverse(&zero)
                == Err(Error::SingularChannel {
                    user: 1,
                    partner: None,
                }),
            "zero row not reported",
        )?;
        Ok(format!(
            "1000 matrices (cond <= {max_cond:.1e}): |HG0-I| <= {worst_id:.1e}, leakage <= {worst_leak:.1e}"
        ))
    })
}

fn noise_arithmetic() -> Verdict {
    let n = noise_variance(1e-3, &ElectricalSpec::default());
    for (name, got, want) in [
        ("thermal", n.thermal, 1.834e-12),
        ("shot", n.shot, 5.607e-13),
        ("preamp", n.preamp, 3.497e-14),
    ] {
        ensure(within_rel(got, want, 1e-3), format!("{name} = {got:e}"))?;
    }
    Ok(format!(
        "thermal {:.4e}, shot {:.4e}, preamp {:.4e} A^2",
        n.thermal, n.shot, n.preamp
    ))
}

fn series(rows: &[SweepRow], lens: LensMode, y: fn(&SweepRow) -> f64) -> Vec<f64> {
    rows.iter().filter(|r| r.lens == lens).map(y).collect()
}

fn trend_reproduction() -> Verdict {
    timed(Duration::from_secs(60), || {
        let scene = load_scene(EXAMPLE_CONFIG).map_err(|e| e.to_string())?.scene;
        let rows = run_sweep(&scene, &SweepSpec::standard()).map_err(|e| e.to_string())?;
        let waists: Vec<f64> = rows.iter().step_by(2).map(|r| r.waist * 1e6).collect();
        let mut problems = Vec::new();
        let metrics: [Metric; 2] = [
            ("sum rate", |r| r.sum_rate),
            ("EE", |r| r.energy_efficiency),
        ];
        for (name, y) in metrics {
            for lens in [LensMode::On, LensMode::Off] {
                let s = series(&rows, lens, y);
                for (i, pair) in s.windows(2).enumerate() {
                    if pair[1] < pair[0] {
                        problems.push(format!(
                            "{name} lens-{lens} falls {:.0}->{:.0} um",
                            waists[i],
                            waists[i + 1]
                        ));
                    }
                }
            }
            let on = series(&rows, LensMode::On, y);
            let off = series(&rows, LensMode::Off, y);
            for (i, (a, b)) in on.iter().zip(&off).enumerate() {
                if a < b {
                    problems.push(format!("{name} lens-on < lens-off at {:.0} um", waists[i]));
                }
            }
        }
        let on = series(&rows, LensMode::On, |r| r.sum_rate / 1e9);
        let off = series(&rows, LensMode::Off, |r| r.sum_rate / 1e9);
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.1}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let table = format!("sum rate Gb/s on [{}] off [{}]", fmt(&on), fmt(&off));
        if problems.is_empty() {
            Ok(table)
        } else {
            Err(format!(
                "{} violations: {}; {table}",
                problems.len(),
                problems.join(", ")
            ))
        }
    })
}

fn run_cli(config: &Path, out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_lasernet-sweep"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--seeds", "0,1", "--dump-channel", "--dump-precoder"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        o.status.success(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(csv_files(&path));
        } else if path.extension().is_some_and(|e| e == "csv") {
            let name = path
                .strip_prefix(dir)
                .unwrap()
                .to_string_lossy()
                .into_owned();
            out.push((name, fs::read(&path).unwrap()));
        }
    }
    out.sort();
    out
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("scene.toml");
    fs::write(&config, EXAMPLE_CONFIG).map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_cli(&config, &a)?;
    run_cli(&config, &b)?;
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    ensure(!fa.is_empty(), "no CSV written")?;
    ensure(fa == fb, "outputs differ between runs")?;
    let bytes: usize = fa.iter().map(|f| f.1.len()).sum();
    Ok(format!("{} CSV files, {bytes} bytes, identical", fa.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("mode normalization", mode_normalization),
        ("rayleigh range and far field", rayleigh_far_field),
        ("lens vs ABCD oracle", lens_oracle),
        ("eye safety loop closure", eye_safety_closure),
        ("channel capture oracle", channel_oracle),
        ("zero-forcing property suite", zf_suite),
        ("noise arithmetic", noise_arithmetic),
        ("trend reproduction", trend_reproduction),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let verdict =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        match verdict {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
