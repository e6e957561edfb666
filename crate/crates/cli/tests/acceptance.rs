//! End-to-end acceptance run. Criteria run one after another so that the
//! runtime limits are measured without competing tests.

use std::io::Write;
use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use virasoro_cli::{run, Command, Config};
use virasoro_core::diffeo::Diffeo;
use virasoro_core::grid::Grid;
use virasoro_core::shortpath::{
    connect, corner_sweep, fit_power, i_integral, leg_bounds, measure_loop, predicted_drift,
    tune_center, ConnectConfig, CornerPathParams, FFamily, LoopParams, TuneConfig,
};
use virasoro_core::virasoro::{run_identity_suite, SuiteConfig, VirElement};

struct Verdict {
    id: usize,
    title: &'static str,
    failures: Vec<String>,
    elapsed: Duration,
}

/// Written to the raw stderr handle so the lines show up without `--nocapture`.
fn report(v: &Verdict) {
    let status = if v.failures.is_empty() { "PASS" } else { "FAIL" };
    let mut line = format!(
        "acceptance {} {status}: {} ({:.1} s)",
        v.id,
        v.title,
        v.elapsed.as_secs_f64()
    );
    for f in &v.failures {
        line.push_str(&format!("\n    {f}"));
    }
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

fn criterion(
    id: usize,
    title: &'static str,
    limit: Duration,
    body: impl FnOnce(&mut Vec<String>),
) -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    body(&mut failures);
    let elapsed = start.elapsed();
    if elapsed > limit {
        failures.push(format!("runtime {:.1} s over {} s", elapsed.as_secs_f64(), limit.as_secs()));
    }
    let v = Verdict {
        id,
        title,
        failures,
        elapsed,
    };
    report(&v);
    v
}

fn expect(failures: &mut Vec<String>, ok: bool, what: String) {
    if !ok {
        failures.push(what);
    }
}

fn identities(f: &mut Vec<String>) {
    let checks = run_identity_suite(&SuiteConfig::default()).expect("suite runs");
    for c in checks {
        expect(f, c.passed(), format!("{} residual {:.3e}", c.name, c.max_residual));
    }
}

/// `u_t + 3uu_x + a u_xxx` for `u = c sech²(k(x − ct))`, `c = 4ak²`, with
/// closed-form derivatives.
fn soliton_residual(a: f64, k: f64) -> f64 {
    let c = 4.0 * a * k * k;
    (0..=2000)
        .map(|i| {
            let x = -25.0 + 0.025 * i as f64;
            let th = (k * x).tanh();
            let s2 = 1.0 - th * th;
            let u = c * s2;
            let ux = -2.0 * c * k * s2 * th;
            let uxxx = c * k.powi(3) * s2 * th * (16.0 - 24.0 * th * th);
            (-c * ux + 3.0 * u * ux + a * uxxx).abs()
        })
        .fold(0.0, f64::max)
}

fn kdv(f: &mut Vec<String>, out: &Path) {
    let r = soliton_residual(1.0, 0.4);
    expect(f, r < 1e-4, format!("soliton residual {r:.3e}"));
    let mut cfg = Config::load(None, &[]).unwrap();
    cfg.out = out.to_path_buf();
    assert_eq!((cfg.kdv.a, cfg.kdv.k, cfg.kdv.n, cfg.kdv.t_final), (1.0, 0.4, 2048, 1.0));
    let o = run(Command::Kdv, &cfg).expect("kdv runs");
    for c in o.checks {
        expect(f, c.passed, format!("{}: {}", c.name, c.detail));
    }
}

fn corner_energies(f: &mut Vec<String>) {
    let cfg = Config::load(None, &[]).unwrap();
    let s = &cfg.shortpath;
    let eps = [0.2, 0.1, 0.05, 0.025];
    let g = s.g.sample(Grid::symmetric(s.half_width, s.n).unwrap()).unwrap();
    let base = CornerPathParams::new(g, eps[0]);
    let rows = corner_sweep(&base, &eps).expect("sweep runs");
    let e: Vec<f64> = rows.iter().map(|r| r.energy).collect();
    expect(f, e.windows(2).all(|w| w[1] < w[0]), format!("energies not decreasing: {e:?}"));
    let p = fit_power(&eps, &e);
    expect(f, p >= 0.8, format!("fitted exponent {p:.4} < 0.8"));
    for r in &rows {
        let cs = r.length * r.length / (std::f64::consts::PI * r.energy);
        expect(f, cs <= 1.0, format!("L²/(πE) = {cs:.4} at ε = {}", r.epsilon));
    }
    let c = rows[0].endpoint_err / rows[0].epsilon;
    for r in &rows {
        expect(
            f,
            r.endpoint_err <= c * r.epsilon * (1.0 + 1e-12),
            format!("endpoint error {:.3e} above {c:.3e}·ε at ε = {}", r.endpoint_err, r.epsilon),
        );
    }
}

fn edge_bound(f: &mut Vec<String>) {
    for e0 in [0.04, 0.02, 0.01, 0.005] {
        let p = LoopParams {
            eps0: e0,
            eps1: 0.5,
            lambda: 1.0 - e0,
            ..LoopParams::default()
        };
        let b = leg_bounds(&p).expect("bounds computed");
        expect(
            f,
            b.edge < b.edge_limit,
            format!("ε₀ = {e0}: {:.4e} ≥ 4T‖ε‖∞ = {:.4e}", b.edge, b.edge_limit),
        );
    }
}

fn loop_machinery(f: &mut Vec<String>) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let unit = FFamily::new(1.0).unwrap();
    let worst = (0..50)
        .map(|_| {
            let e = rng.random_range(0.005..0.2);
            let z = rng.random_range(-2.0 * e..1.5);
            let a = rng.random_range(-2.0 * e..1.5);
            (FFamily::new(e).unwrap().f_eval(z, a) - e * unit.f_eval(z / e, a / e)).abs()
        })
        .fold(0.0, f64::max);
    expect(f, worst < 1e-8, format!("scaling residual {worst:.3e}"));

    let i1 = i_integral(0.9, 0.01).unwrap();
    let i2 = i_integral(0.9, 0.005).unwrap();
    expect(f, (i1 - i2).abs() < 1e-6, format!("I moved by {:.3e}", (i1 - i2).abs()));

    for e1 in [1.0, -1.0] {
        let p = LoopParams {
            eps1: e1,
            ..LoopParams::default()
        };
        let m = measure_loop(&p).expect("loop measured");
        expect(f, m.a1_drift().abs() < 1e-6, format!("A₁ drift {:.3e}", m.a1_drift()));
        let want = predicted_drift(&p, i1);
        let rel = (m.drift() - want).abs() / want.abs();
        expect(f, rel < 0.02, format!("ε₁ = {e1}: drift {} vs {want} ({rel:.3e})", m.drift()));
    }

    let cfg = TuneConfig::default();
    for a in [-1.0, 0.5, 1.0] {
        match tune_center(a, &LoopParams::default(), &cfg) {
            Ok(t) => {
                let rel = (t.achieved_a - a).abs() / a.abs();
                expect(f, rel < 1e-2, format!("target {a}: relative error {rel:.3e}"));
                expect(
                    f,
                    t.report.energy <= 0.05,
                    format!("target {a}: energy {:.4e}", t.report.energy),
                );
            }
            Err(e) => f.push(format!("target {a}: {e}")),
        }
    }
}

fn short_paths(f: &mut Vec<String>) {
    let cfg = Config::load(None, &[]).unwrap();
    let d = &cfg.distance;
    let grid = Grid::symmetric(d.half_width, d.n).unwrap();
    let g = d.g.sample(grid).unwrap();
    let target = VirElement::new(Diffeo::from_displacement(g).unwrap(), 0.5);
    let mut lengths = Vec::new();
    for delta in [0.2, 0.1, 0.05] {
        let c = connect(&target, delta, &ConnectConfig::default()).expect("connects");
        lengths.push(c.report.length);
        expect(
            f,
            c.endpoint_base_error < 1e-2,
            format!("δ = {delta}: base error {:.3e}", c.endpoint_base_error),
        );
        expect(
            f,
            c.center_error(0.5) < 1e-2,
            format!("δ = {delta}: center error {:.3e}", c.center_error(0.5)),
        );
    }
    expect(
        f,
        lengths.windows(2).all(|w| w[1] < w[0]),
        format!("lengths not decreasing: {lengths:?}"),
    );
    expect(f, lengths[2] < 0.1, format!("final length {}", lengths[2]));
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn determinism(f: &mut Vec<String>, root: &Path) {
    let bin = env!("CARGO_BIN_EXE_vbott");
    for cmd in ["check-identities", "kdv", "shortpath", "center", "distance"] {
        let runs: Vec<_> = (0..2)
            .map(|k| {
                let dir = root.join(format!("{cmd}-{k}"));
                let status = Process::new(bin)
                    .args([cmd, "--seed", "17", "--out"])
                    .arg(&dir)
                    .output()
                    .expect("binary runs");
                (status.status.success(), csv_files(&dir))
            })
            .collect();
        expect(f, runs[0].0 && runs[1].0, format!("{cmd}: nonzero exit"));
        expect(f, !runs[0].1.is_empty(), format!("{cmd}: no CSV written"));
        expect(f, runs[0].1 == runs[1].1, format!("{cmd}: CSV differs between runs"));
        for (name, bytes) in &runs[0].1 {
            expect(
                f,
                bytes.starts_with(b"# schema=1\n"),
                format!("{cmd}: {name} lacks the schema line"),
            );
        }
    }
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let min = |m: u64| Duration::from_secs(60 * m);
    let verdicts = [
        criterion(1, "identity suite", min(1), identities),
        criterion(2, "KdV soliton", min(2), |f| kdv(f, tmp.path())),
        criterion(3, "corner path energies", min(5), corner_energies),
        criterion(4, "edge-term bound", min(5), edge_bound),
        criterion(5, "loop machinery", min(5), loop_machinery),
        criterion(6, "short paths to (Id+g, 0.5)", min(10), short_paths),
        criterion(7, "CLI determinism", min(30), |f| determinism(f, tmp.path())),
    ];
    let failed: Vec<usize> = verdicts
        .iter()
        .filter(|v| !v.failures.is_empty())
        .map(|v| v.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
