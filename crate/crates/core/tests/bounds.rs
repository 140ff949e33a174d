//! Bound values pinned by independent high-precision oracles, plus property checks.

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qzzb::bounds::{crossover_kappa, qzzb, zzb_cs_loss_closed_form, zzb_pair, CrossoverOptions};
use qzzb::fidelity::{fidelity_curve, fq_diffusion, fq_loss, maximize_lambda, maximize_lambda_with, ConstantFidelity};
use qzzb::optimize::MaximizeOptions;
use qzzb::states::{NoiseChannel, PriorWindow, ProbeState, StateKind};
use qzzb::{dawson, DiffusionKernel, LossKernel};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// Reference values from 50-digit series and adaptive quadrature run outside this crate.
const DAWSON_1: f64 = 0.538_079_506_912_768_42;
const CS_LOSS_HALF_RELAXED: f64 = 0.083_311_237_405_736_730;
const CS_LOSS_HALF_TIGHT: f64 = 0.119_866_564_568_565_38;
const TMSVS_DIFFUSION_TIGHT: f64 = 0.185_409_027_467_814_43;
const TMSVS_DIFFUSION_RELAXED: f64 = 0.142_833_032_621_993_37;

#[test]
fn dawson_at_one() {
    assert!(rel(dawson(1.0_f64), DAWSON_1) < 1e-14);
}

#[test]
fn coherent_loss_pinned_values() {
    let probe = ProbeState::coherent(5.0).unwrap();
    let b = qzzb(&probe, &NoiseChannel::photon_loss(0.5).unwrap(), &PriorWindow::default()).unwrap();
    assert!(rel(b.tight.value, CS_LOSS_HALF_TIGHT) < 1e-9, "{}", b.tight.value);
    assert!(rel(b.sine_relaxed.value, CS_LOSS_HALF_RELAXED) < 1e-9, "{}", b.sine_relaxed.value);
    assert!(rel(zzb_cs_loss_closed_form(5.0, 0.5).unwrap(), CS_LOSS_HALF_RELAXED) < 1e-13);
}

#[test]
fn two_mode_diffusion_pinned_values() {
    let probe = ProbeState::two_mode_squeezed(5.0).unwrap();
    let b = qzzb(&probe, &NoiseChannel::phase_diffusion(0.2).unwrap(), &PriorWindow::default()).unwrap();
    assert!(rel(b.tight.value, TMSVS_DIFFUSION_TIGHT) < 1e-8, "{}", b.tight.value);
    assert!(rel(b.sine_relaxed.value, TMSVS_DIFFUSION_RELAXED) < 1e-8, "{}", b.sine_relaxed.value);
}

#[test]
fn closed_form_small_photon_limit() {
    assert_eq!(zzb_cs_loss_closed_form(5.0, 0.0).unwrap(), PI / 2.0);
    assert!((zzb_cs_loss_closed_form(1e-12, 1.0).unwrap() - PI / 2.0).abs() < 1e-10);
    assert!(zzb_cs_loss_closed_form(-1.0, 0.5).is_err());
}

#[test]
fn closed_form_matches_ideal_relaxed_bound_at_unit_transmission() {
    let probe = ProbeState::coherent(5.0).unwrap();
    let b = qzzb(&probe, &NoiseChannel::ideal(), &PriorWindow::default()).unwrap();
    assert!(rel(b.sine_relaxed.value, zzb_cs_loss_closed_form(5.0, 1.0).unwrap()) < 1e-8);
}

#[test]
fn two_mode_diffusion_maximum_matches_brute_force_scan() {
    let probe = ProbeState::two_mode_squeezed(5.0).unwrap();
    let (kappa, beta) = (0.2, 1.5);
    let opt = maximize_lambda(&probe, &NoiseChannel::phase_diffusion(kappa).unwrap(), beta).unwrap();
    let scan = (0..=100_000)
        .map(|i| -PI + TAU * i as f64 / 100_000.0)
        .map(|u| fq_diffusion(&probe, &DiffusionKernel::new(kappa, beta, u / beta).unwrap()).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(opt.fidelity >= scan - 1e-12);
    assert!(opt.fidelity - scan < 1e-9, "{} vs {}", opt.fidelity, scan);
}

#[test]
fn curve_matches_independent_maximization() {
    let probe = ProbeState::single_mode_squeezed(5.0).unwrap();
    let channel = NoiseChannel::phase_diffusion(0.2).unwrap();
    let betas: Vec<f64> = (0..=64).map(|i| TAU * i as f64 / 64.0).collect();
    let curve = fidelity_curve(&probe, &channel, &betas).unwrap();
    let dense = MaximizeOptions {
        grid_points: 4097,
        x_tol: 1e-12,
        candidates: 5,
    };
    for (b, f) in betas.iter().zip(&curve.values) {
        let alt = maximize_lambda_with(&probe, &channel, *b, &dense).unwrap().fidelity;
        assert!((f - alt).abs() < 1e-10, "beta={b}: {f} vs {alt}");
    }
}

#[test]
fn coherent_and_single_mode_never_cross_under_diffusion() {
    let cs = ProbeState::coherent(5.0).unwrap();
    let sm = ProbeState::single_mode_squeezed(5.0).unwrap();
    let w = PriorWindow::default();
    for i in 0..=40 {
        let kappa = 0.01 + 0.99 * i as f64 / 40.0;
        let ch = NoiseChannel::phase_diffusion(kappa).unwrap();
        let a = qzzb(&cs, &ch, &w).unwrap().sine_relaxed.value;
        let b = qzzb(&sm, &ch, &w).unwrap().sine_relaxed.value;
        assert!(b > a, "kappa={kappa}: smsvs {b} <= cs {a}");
    }
    let none = crossover_kappa(
        StateKind::Coherent,
        StateKind::SingleModeSqueezed,
        5.0,
        (0.01, 1.0),
        &w,
        &CrossoverOptions::default(),
    );
    assert!(none.is_err());
    let same = crossover_kappa(StateKind::Coherent, StateKind::Coherent, 5.0, (0.2, 0.6), &w, &CrossoverOptions::default());
    assert!(same.is_err());
}

#[test]
fn constant_profile_anchors() {
    let w = PriorWindow::default();
    let zero = zzb_pair(&ConstantFidelity(0.0), &w).unwrap();
    assert_eq!(zero.tight.value, 0.0);
    assert_eq!(zero.sine_relaxed.value, 0.0);
}

fn any_state() -> impl Strategy<Value = StateKind> {
    prop_oneof![
        Just(StateKind::Coherent),
        Just(StateKind::SingleModeSqueezed),
        Just(StateKind::TwoModeSqueezed)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_profile_orders_and_scales(f in 0.0..=1.0_f64, width in 0.5..10.0_f64) {
        let w = PriorWindow::with_width(width).unwrap();
        let b = zzb_pair(&ConstantFidelity(f), &w).unwrap();
        prop_assert!(b.tight.value >= b.sine_relaxed.value - 1e-15);
        prop_assert!(b.tight.value <= width * width / 12.0 * (1.0 + 1e-12));
        let relaxed = width * width / (8.0 * PI) * f;
        prop_assert!((b.sine_relaxed.value - relaxed).abs() <= 1e-12 * relaxed.max(1.0));
    }

    #[test]
    fn bounds_ordered_and_below_ceiling(kind in any_state(), n in 0.1..10.0_f64, loss in any::<bool>(), s in 0.01..1.0_f64) {
        let probe = ProbeState::new(kind, n).unwrap();
        let ch = if loss { NoiseChannel::photon_loss(s) } else { NoiseChannel::phase_diffusion(s) }.unwrap();
        let b = qzzb(&probe, &ch, &PriorWindow::default()).unwrap();
        prop_assert!(b.tight.value >= b.sine_relaxed.value);
        prop_assert!(b.sine_relaxed.value > 0.0);
        prop_assert!(b.tight.value <= TAU * TAU / 12.0 + 1e-12);
    }

    #[test]
    fn loss_objective_is_periodic_in_lambda(kind in any_state(), n in 0.1..10.0_f64, eta in 0.0..1.0_f64, beta in 0.1..TAU, l in -3.0..3.0_f64) {
        let probe = ProbeState::new(kind, n).unwrap();
        let a = fq_loss(&probe, &LossKernel::new(eta, beta, l).unwrap());
        let b = fq_loss(&probe, &LossKernel::new(eta, beta, l + TAU / beta).unwrap());
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn maximum_dominates_random_lambda(kind in any_state(), n in 0.1..10.0_f64, kappa in 0.01..1.0_f64, beta in 0.01..TAU, l in -3.0..3.0_f64) {
        let probe = ProbeState::new(kind, n).unwrap();
        let opt = maximize_lambda(&probe, &NoiseChannel::phase_diffusion(kappa).unwrap(), beta).unwrap();
        let f = fq_diffusion(&probe, &DiffusionKernel::new(kappa, beta, l).unwrap()).unwrap();
        prop_assert!(opt.fidelity >= f - 1e-12);
        prop_assert!((0.0..=1.0).contains(&opt.fidelity));
    }
}
