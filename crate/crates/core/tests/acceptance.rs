//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qzzb::bounds::{crossover_kappa, qzzb, zzb_cs_loss_closed_form, zzb_pair, BoundForm, BoundPair, CrossoverOptions};
use qzzb::fidelity::{
    fq_diffusion, ideal_fidelity, maximize_lambda, ConstantFidelity, DiffusionKernel, FnProfile,
};
use qzzb::oracle::{kraus_loss, z_operator};
use qzzb::states::{ChannelKind, NoiseChannel, PriorWindow, ProbeState, StateKind};
use qzzb::sweep::{emit_curve, linspace, run_sweep, trapezoid, BoundSelection, CurveSpec, OutputFormat, SweepConfig};
use qzzb::verify::{lower_bound_scan, VerifyOptions};
use qzzb::LossKernel;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn window() -> PriorWindow<f64> {
    PriorWindow::default()
}

fn bounds(kind: StateKind, n: f64, channel: NoiseChannel<f64>) -> Result<BoundPair<f64>, String> {
    let probe = ProbeState::new(kind, n).map_err(|e| e.to_string())?;
    qzzb(&probe, &channel, &window()).map_err(|e| e.to_string())
}

fn ideal_bounds(kind: StateKind, n: f64) -> Result<BoundPair<f64>, String> {
    let probe = ProbeState::new(kind, n).map_err(|e| e.to_string())?;
    zzb_pair(&FnProfile(move |b: f64| ideal_fidelity(&probe, b)), &window()).map_err(|e| e.to_string())
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn closed_form_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0);
    for &n in &[0.5, 1.0, 2.0, 5.0, 10.0] {
        for k in 1..=10 {
            let eta = k as f64 / 10.0;
            let cf = zzb_cs_loss_closed_form(n, eta).map_err(|e| e.to_string())?;
            let q = bounds(StateKind::Coherent, n, NoiseChannel::photon_loss(eta).unwrap())?;
            let rel = (q.sine_relaxed.value - cf).abs() / cf;
            if rel > worst {
                worst = rel;
                at = (n, eta);
            }
        }
    }
    ensure(
        worst <= 1e-7,
        format!("max relative deviation {worst:.3e} (N={}, eta={}) over 50 points, tol 1e-7", at.0, at.1),
    )
}

fn ideal_limit_reduction() -> Outcome {
    let mut loss_worst: f64 = 0.0;
    let mut diff_worst: f64 = 0.0;
    for kind in StateKind::ALL {
        let ideal = ideal_bounds(kind, 5.0)?;
        let lossless = bounds(kind, 5.0, NoiseChannel::photon_loss(1.0).unwrap())?;
        for (a, b) in [
            (lossless.tight.value, ideal.tight.value),
            (lossless.sine_relaxed.value, ideal.sine_relaxed.value),
        ] {
            loss_worst = loss_worst.max((a - b).abs() / b);
        }
        let weak = bounds(kind, 5.0, NoiseChannel::phase_diffusion(1e-3).unwrap())?;
        for (a, b) in [
            (weak.tight.value, ideal.tight.value),
            (weak.sine_relaxed.value, ideal.sine_relaxed.value),
        ] {
            diff_worst = diff_worst.max((a - b).abs() / b);
        }
    }
    ensure(
        loss_worst <= 1e-12 && diff_worst <= 0.01,
        format!("eta=1 vs ideal rel {loss_worst:.3e} (tol 1e-12); kappa=1e-3 vs ideal rel {diff_worst:.3e} (tol 1e-2)"),
    )
}

fn crossover_reproduction() -> Outcome {
    let relaxed = crossover_kappa(
        StateKind::Coherent,
        StateKind::TwoModeSqueezed,
        5.0,
        (0.2, 0.6),
        &window(),
        &CrossoverOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let tight = crossover_kappa(
        StateKind::Coherent,
        StateKind::TwoModeSqueezed,
        5.0,
        (0.2, 0.6),
        &window(),
        &CrossoverOptions {
            form: BoundForm::Tight,
            ..Default::default()
        },
    )
    .map(|k| format!("{k:.5}"))
    .unwrap_or_else(|e| e.to_string());
    ensure(
        (0.39..=0.43).contains(&relaxed),
        format!("kappa* = {relaxed:.5} (sine-relaxed), target [0.39, 0.43]; tight form gives {tight}"),
    )
}

fn ordering_reproduction() -> Outcome {
    let cases: [(&str, Option<NoiseChannel<f64>>); 3] = [
        ("loss eta=0.5", Some(NoiseChannel::photon_loss(0.5).unwrap())),
        ("ideal", None),
        ("diffusion kappa=0.2", Some(NoiseChannel::phase_diffusion(0.2).unwrap())),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, ch) in cases {
        let get = |k| match ch {
            Some(c) => bounds(k, 5.0, c),
            None => ideal_bounds(k, 5.0),
        };
        let (cs, sm, tm) = (get(StateKind::Coherent)?, get(StateKind::SingleModeSqueezed)?, get(StateKind::TwoModeSqueezed)?);
        let relaxed = sm.sine_relaxed.value > tm.sine_relaxed.value && tm.sine_relaxed.value > cs.sine_relaxed.value;
        let tight = sm.tight.value > tm.tight.value && tm.tight.value > cs.tight.value;
        ok &= relaxed && tight;
        lines.push(format!(
            "{label}: smsvs {:.4} > tmsvs {:.4} > cs {:.4}",
            sm.sine_relaxed.value, tm.sine_relaxed.value, cs.sine_relaxed.value
        ));
    }
    ensure(ok, lines.join("; "))
}

fn monotonicity() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (channel, grid, increasing) in [
        (ChannelKind::PhotonLoss, linspace(0.05, 1.0, 20), false),
        (ChannelKind::PhaseDiffusion, linspace(0.05, 1.0, 20), true),
    ] {
        let cfg = SweepConfig {
            states: StateKind::ALL.to_vec(),
            channel,
            strength_grid: grid,
            n_grid: vec![1.0, 5.0],
            beta_samples: 64,
            bound_form: BoundSelection::Both,
            ..Default::default()
        };
        let rows = run_sweep(&cfg).map_err(|e| e.to_string())?;
        if let Some(bad) = rows.iter().find(|r| !r.is_ok()) {
            return Err(format!("row failed: {:?}", bad.error));
        }
        for w in rows.windows(2) {
            if w[0].state != w[1].state || w[0].n != w[1].n {
                continue;
            }
            for (a, b) in [(w[0].tight, w[1].tight), (w[0].sine_relaxed, w[1].sine_relaxed)] {
                let (a, b) = (a.unwrap(), b.unwrap());
                let slack = w[0].quadrature_error.unwrap() + w[1].quadrature_error.unwrap();
                let good = if increasing { b >= a - slack } else { b <= a + slack };
                checked += 1;
                if !good {
                    failures.push(format!("{} N={} {}: {a} -> {b}", w[0].state, w[0].n, w[1].strength));
                }
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!("{checked} consecutive pairs checked (eta nonincreasing, kappa nondecreasing); violations: {failures:?}"),
    )
}

fn oracle_lower_bound() -> Outcome {
    let opts = VerifyOptions::default();
    let mut worst = f64::NEG_INFINITY;
    let mut saturation = f64::NAN;
    let mut cases = 0;
    for state in StateKind::ALL {
        for channel in [ChannelKind::PhotonLoss, ChannelKind::PhaseDiffusion] {
            let (excess, _gap, sat, n) = lower_bound_scan(state, channel, &opts).map_err(|e| e.to_string())?;
            worst = worst.max(excess);
            cases += n;
            if state == StateKind::Coherent && channel == ChannelKind::PhotonLoss {
                saturation = sat;
            }
        }
    }
    ensure(
        worst <= 1e-8 && saturation <= 1e-8,
        format!("max(F_closed - F_uhlmann) = {worst:.3e} over {cases} cases (tol 1e-8); cs loss |F_closed - F_uhlmann| = {saturation:.3e} (tol 1e-8)"),
    )
}

fn operator_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = 30;
    let mut z_worst: f64 = 0.0;
    for _ in 0..10 {
        let eta = rng.gen_range(0.0..1.0);
        let beta = rng.gen_range(0.0..TAU);
        let lambda1 = rng.gen_range(-2.0..2.0);
        let z = z_operator(eta, beta, lambda1, c).map_err(|e| e.to_string())?;
        let u = LossKernel::new(eta, beta, lambda1).unwrap().upsilon();
        for i in 0..=c {
            for j in 0..=c {
                let want = if i == j { u.powu(i as u32) } else { 0.0.into() };
                z_worst = z_worst.max((z.matrix[(i, j)] - want).norm());
            }
        }
    }
    let mut trace_worst: f64 = 0.0;
    for &eta in &[0.1, 0.5, 0.9] {
        let mut sum = nalgebra::DMatrix::<num_complex::Complex64>::zeros(c + 1, c + 1);
        for l in 0..=c {
            let k = kraus_loss(l, eta, 0.0, 0.0, c).map_err(|e| e.to_string())?.matrix;
            sum += k.adjoint() * k;
        }
        for i in 0..=c {
            for j in 0..=c {
                let want = if i == j { 1.0 } else { 0.0 };
                trace_worst = trace_worst.max((sum[(i, j)] - want).norm());
            }
        }
    }
    ensure(
        z_worst <= 1e-10 && trace_worst <= 1e-10,
        format!("Z vs diag(Y^n) max entry error {z_worst:.3e} (10 draws, tol 1e-10); sum Pi^dag Pi - I {trace_worst:.3e}"),
    )
}

fn variational_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cs = ProbeState::coherent(5.0).unwrap();
    let mut phi_worst: f64 = 0.0;
    for _ in 0..50 {
        let eta = rng.gen_range(0.01..0.99);
        let beta = rng.gen_range(0.01..TAU);
        let opt = maximize_lambda(&cs, &NoiseChannel::photon_loss(eta).unwrap(), beta).map_err(|e| e.to_string())?;
        phi_worst = phi_worst.max(opt.phase.abs());
    }

    // dense lambda2 scan against the maximizer
    let grid = linspace(-2.0, 3.0, 50_001);
    let unit = linspace(0.0, 1.0, 10_001);
    let mut beat: f64 = f64::NEG_INFINITY;
    let mut unit_shortfall: f64 = 0.0;
    let mut cases = 0;
    for kind in StateKind::ALL {
        let probe = ProbeState::new(kind, 5.0).unwrap();
        for &kappa in &[0.05, 0.2, 0.5, 1.0] {
            for k in 1..=12 {
                let beta = TAU * k as f64 / 12.0;
                let opt = maximize_lambda(&probe, &NoiseChannel::phase_diffusion(kappa).unwrap(), beta)
                    .map_err(|e| e.to_string())?;
                let scan = |xs: &[f64]| {
                    xs.iter()
                        .map(|&l| fq_diffusion(&probe, &DiffusionKernel::new(kappa, beta, l).unwrap()).unwrap())
                        .fold(f64::NEG_INFINITY, f64::max)
                };
                let best = scan(&grid);
                beat = beat.max(best - opt.fidelity);
                unit_shortfall = unit_shortfall.max(best - scan(&unit));
                cases += 1;
            }
        }
    }
    let flag = if unit_shortfall > 1e-9 {
        format!("; FLAG: a lambda2 search confined to [0,1] would fall short by up to {unit_shortfall:.3e}, so the search runs over beta*lambda2 in [-pi, pi]")
    } else {
        String::new()
    };
    ensure(
        phi_worst <= 1e-6 && beat <= 1e-9,
        format!("cs loss |phi_opt| max {phi_worst:.3e} (50 draws, tol 1e-6); lambda2 grid on [-2,3] beats maximizer by {beat:.3e} ({cases} cases, tol 1e-9){flag}"),
    )
}

fn inequality_chain() -> Outcome {
    let mut rows_checked = 0;
    for (channel, grid) in [
        (ChannelKind::PhotonLoss, linspace(0.05, 1.0, 20)),
        (ChannelKind::PhaseDiffusion, linspace(0.01, 1.0, 20)),
    ] {
        let cfg = SweepConfig {
            states: StateKind::ALL.to_vec(),
            channel,
            strength_grid: grid,
            n_grid: vec![0.5, 5.0],
            beta_samples: 64,
            bound_form: BoundSelection::Both,
            ..Default::default()
        };
        for r in run_sweep(&cfg).map_err(|e| e.to_string())? {
            let (t, s) = (r.tight.ok_or("missing tight")?, r.sine_relaxed.ok_or("missing relaxed")?);
            if !(t >= s) {
                return Err(format!("{} N={} {}={}: tight {t} < relaxed {s}", r.state, r.n, r.channel, r.strength));
            }
            rows_checked += 1;
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut curves = 0;
    let mut corrected_worst: f64 = 0.0;
    let mut fine_worst: f64 = 0.0;
    let mut raw_worst: f64 = 0.0;
    for kind in StateKind::ALL {
        for (channel, strength) in [(ChannelKind::PhotonLoss, 0.5), (ChannelKind::PhaseDiffusion, 0.2)] {
            let bound = bounds(kind, 5.0, NoiseChannel::new(channel, strength).unwrap())?.sine_relaxed.value;
            for samples in [1024, 2048] {
                let spec = CurveSpec {
                    state: kind,
                    n: 5.0,
                    channel,
                    strength,
                    window: window(),
                    beta_samples: samples,
                };
                let path = dir.path().join(format!("{kind}_{channel}_{samples}.csv"));
                emit_curve(&spec, &path, OutputFormat::Csv).map_err(|e| e.to_string())?;
                let (xs, ys) = read_curve(&path)?;
                if ys[0] != 0.0 || *ys.last().unwrap() != 0.0 || ys.iter().any(|&y| y < 0.0) {
                    return Err(format!("{kind} {channel}: curve has a negative value or nonzero endpoint"));
                }
                let raw = (trapezoid(&xs, &ys) - bound).abs();
                if samples == 1024 {
                    raw_worst = raw_worst.max(raw);
                    corrected_worst = corrected_worst.max((corrected_trapezoid(&xs, &ys) - bound).abs());
                } else {
                    fine_worst = fine_worst.max(raw);
                }
                curves += 1;
            }
        }
    }
    ensure(
        corrected_worst <= 1e-6 && fine_worst <= 1e-6,
        format!(
            "tight >= relaxed on {rows_checked} sweep rows; {curves} emitted curves nonnegative with zero endpoints; \
             re-integration vs bound: endpoint-corrected trapezoid (1024) {corrected_worst:.3e}, trapezoid (2048) {fine_worst:.3e} (tol 1e-6); \
             info: plain trapezoid (1024) {raw_worst:.3e}, dominated by the h^2/12 endpoint-slope term"
        ),
    )
}

fn read_curve(path: &std::path::Path) -> Result<(Vec<f64>, Vec<f64>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let mut it = line.split(',').map(|v| v.parse::<f64>().map_err(|e| e.to_string()));
        xs.push(it.next().ok_or("short row")??);
        ys.push(it.next().ok_or("short row")??);
    }
    Ok((xs, ys))
}

/// Trapezoid with the leading Euler-Maclaurin correction, slopes from one-sided differences.
fn corrected_trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let h = xs[1] - xs[0];
    let d0 = (-3.0 * ys[0] + 4.0 * ys[1] - ys[2]) / (2.0 * h);
    let d1 = (3.0 * ys[n - 1] - 4.0 * ys[n - 2] + ys[n - 3]) / (2.0 * h);
    trapezoid(xs, ys) - h * h / 12.0 * (d1 - d0)
}

fn analytic_anchors() -> Outcome {
    let p = zzb_pair(&ConstantFidelity(1.0), &window()).map_err(|e| e.to_string())?;
    let t = (p.tight.value - TAU * TAU / 12.0).abs();
    let s = (p.sine_relaxed.value - PI / 2.0).abs();
    ensure(
        t <= 1e-10 && s <= 1e-10,
        format!("tight - W^2/12 = {t:.3e}, relaxed - pi/2 = {s:.3e} (tol 1e-10)"),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "closed-form consistency", budget: Some(Duration::from_secs(10)), run: closed_form_consistency },
        Criterion { id: 2, name: "ideal-limit reduction", budget: Some(Duration::from_secs(30)), run: ideal_limit_reduction },
        Criterion { id: 3, name: "crossover reproduction", budget: Some(Duration::from_secs(120)), run: crossover_reproduction },
        Criterion { id: 4, name: "ordering reproduction", budget: Some(Duration::from_secs(60)), run: ordering_reproduction },
        Criterion { id: 5, name: "monotonicity", budget: Some(Duration::from_secs(120)), run: monotonicity },
        Criterion { id: 6, name: "oracle lower-bound property", budget: Some(Duration::from_secs(300)), run: oracle_lower_bound },
        Criterion { id: 7, name: "operator identities", budget: Some(Duration::from_secs(30)), run: operator_identities },
        Criterion { id: 8, name: "variational sanity", budget: Some(Duration::from_secs(60)), run: variational_sanity },
        Criterion { id: 9, name: "inequality chain", budget: None, run: inequality_chain },
        Criterion { id: 10, name: "analytic anchors", budget: None, run: analytic_anchors },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let over = c.budget.is_some_and(|b| elapsed > b);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; exceeded time budget {:?}", c.budget.unwrap())),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} [{status}] {} ({:.2}s): {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
