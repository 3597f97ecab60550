use std::f64::consts::PI;

use cgoscatter::fieldops::{Field, Grid};
use cgoscatter::geometry::{Poly, RationalFunction, SurfaceModel};
use cgoscatter::identify::{
    loglog_slope, pointwise_difference, saddle_constant, stationary_phase_constant, stationary_phase_pairing,
    uniqueness_chain, write_probe_csv, ChainBudget, IdentifyOptions,
};
use cgoscatter::phase::{construct_amplitude, construct_phase};
use cgoscatter::potentials::Potential;
use num_complex::Complex64;

const H: [f64; 4] = [0.16, 0.08, 0.04, 0.02];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> RationalFunction {
    RationalFunction::constant(c(1.0, 0.0))
}

fn bump() -> Potential {
    Potential::gaussian(c(0.1, -0.1), 0.6, 0.9)
}

fn quiet() -> IdentifyOptions {
    IdentifyOptions { cross_terms: false, ..IdentifyOptions::default() }
}

#[test]
fn quadratic_phase_constant_is_half_pi() {
    let model = SurfaceModel::plane();
    let phase = construct_phase(c(0.0, 0.0), &model, 2, 0).unwrap();
    let k = stationary_phase_constant(&phase, &one(), &model).unwrap();
    assert!((k.saddle - PI / 2.0).abs() < 1e-14);
    assert!(k.agrees, "{k:?}");
    assert!(k.relative_difference < 1e-4, "{k:?}");
}

#[test]
fn constant_scales_with_amplitude_squared() {
    let model = SurfaceModel::plane();
    let phase = construct_phase(c(0.4, 0.3), &model, 2, 0).unwrap();
    let c1 = saddle_constant(&phase, &one(), &model).unwrap();
    let c2 = saddle_constant(&phase, &RationalFunction::constant(c(2.0, 0.0)), &model).unwrap();
    assert!((c2 / c1 - 4.0).abs() < 1e-14);
}

#[test]
fn rational_phase_with_a_pole_matches_saddle_formula() {
    let model = SurfaceModel::new(vec![c(1.0, 0.0)]).unwrap();
    let phase = construct_phase(c(0.0, 0.0), &model, 1, 0).unwrap();
    let others = phase.other_critical_points();
    assert_eq!(others.len(), 1);
    assert!((others[0] - c(2.0, 0.0)).norm() < 1e-9);
    let a = construct_amplitude(c(0.0, 0.0), &others, 3).unwrap();
    let k = stationary_phase_constant(&phase, &a, &model).unwrap();
    // |a(0)|² = 2⁶, |Φ″(0)| = 2.
    assert!((k.saddle - 32.0 * PI).abs() < 1e-9, "{}", k.saddle);
    assert!(k.agrees, "{k:?}");
}

#[test]
fn recovers_gaussian_at_its_center() {
    let model = SurfaceModel::plane();
    let r = pointwise_difference(&bump(), &Potential::Zero, c(0.1, -0.1), &model, 2, &H, &IdentifyOptions::default()).unwrap();
    assert!(r.relative_error < 0.05, "{r:?}");
    assert!((r.truth.re - 0.9).abs() < 1e-12);
    assert!(r.cross_slope() - r.main_slope() >= 0.5, "main {} cross {}", r.main_slope(), r.cross_slope());
}

#[test]
fn recovers_gaussian_off_center() {
    let model = SurfaceModel::plane();
    let r = pointwise_difference(&bump(), &Potential::Zero, c(0.45, 0.25), &model, 2, &H, &quiet()).unwrap();
    assert!(r.relative_error < 0.05, "{r:?}");
}

#[test]
fn equal_potentials_give_zero() {
    let model = SurfaceModel::plane();
    let r = pointwise_difference(&bump(), &bump(), c(0.2, 0.0), &model, 2, &H, &quiet()).unwrap();
    assert_eq!(r.estimate, c(0.0, 0.0));
    assert_eq!(r.relative_error, 0.0);
}

#[test]
fn estimate_does_not_depend_on_amplitude() {
    let model = SurfaceModel::plane();
    let p = c(0.1, -0.1);
    let tilted = RationalFunction::polynomial(Poly::new(vec![c(1.0, 0.0) - 0.5 * p, c(0.5, 0.0)]));
    assert!((tilted.eval(p).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    let base = pointwise_difference(&bump(), &Potential::Zero, p, &model, 2, &H, &quiet()).unwrap();
    let opts = IdentifyOptions { amplitude: Some(tilted), ..quiet() };
    let other = pointwise_difference(&bump(), &Potential::Zero, p, &model, 2, &H, &opts).unwrap();
    let shift = (base.estimate - other.estimate).norm() / base.estimate.norm();
    assert!(shift < 0.01, "{shift}");
}

fn pairing_grid() -> Grid {
    Grid::new(512, 3.0).unwrap()
}

#[test]
fn pairing_is_linear_in_the_potential_difference() {
    let model = SurfaceModel::plane();
    let phase = construct_phase(c(0.2, 0.1), &model, 2, 0).unwrap();
    let g = pairing_grid();
    let w1 = Field::from_real_fn(g, |z| (-(z - 0.3).norm_sqr() / 0.3).exp());
    let w2 = Field::from_real_fn(g, |z| (-(z + c(0.0, 0.4)).norm_sqr() / 0.2).exp());
    let alpha = c(0.7, -1.3);
    let combo = &w1.scale(alpha) + &w2;
    for h in [0.2, 0.05] {
        let i1 = stationary_phase_pairing(&w1, &phase, &one(), h, &model);
        let i2 = stationary_phase_pairing(&w2, &phase, &one(), h, &model);
        let i3 = stationary_phase_pairing(&combo, &phase, &one(), h, &model);
        assert!((i3 - (alpha * i1 + i2)).norm() <= 1e-12 * i3.norm().max(1e-3));
    }
    assert_eq!(stationary_phase_pairing(&Field::zeros(g), &phase, &one(), 0.1, &model), c(0.0, 0.0));
}

#[test]
fn amplitude_vanishing_at_p_loses_the_leading_term() {
    let model = SurfaceModel::plane();
    let p = c(0.2, 0.1);
    let phase = construct_phase(p, &model, 2, 0).unwrap();
    let g = pairing_grid();
    let w = Field::from_real_fn(g, |z| (-(z - p).norm_sqr() / 0.25).exp());
    let vanishing = construct_amplitude(c(0.0, 0.0), &[p], 1).unwrap();
    let hs = [0.2, 0.1, 0.05];
    let full: Vec<f64> = hs.iter().map(|&h| stationary_phase_pairing(&w, &phase, &one(), h, &model).norm()).collect();
    let lost: Vec<f64> = hs.iter().map(|&h| stationary_phase_pairing(&w, &phase, &vanishing, h, &model).norm()).collect();
    assert!((loglog_slope(&hs, &full) - 1.0).abs() < 0.1);
    assert!(loglog_slope(&hs, &lost) > 1.5, "{lost:?}");
}

#[test]
fn uniqueness_chain_reads_off_the_potential() {
    let budget = ChainBudget {
        scattering_grid: Grid::new(192, 10.0).unwrap(),
        m_max: 3,
        match_radius: 6.0,
        probe_h: H.to_vec(),
        cgo_h: vec![0.1, 0.05],
    };
    let probes = [c(0.1, -0.1), c(0.5, 0.0), c(-0.3, 0.3)];
    let rep = uniqueness_chain(&bump(), &Potential::Zero, 1.0, &probes, &budget).unwrap();
    assert!(rep.s_difference > 1e-3);
    assert!(rep.unitarity_defects.0 < 1e-2 && rep.unitarity_defects.1 < 1e-2);
    let (lhs, rhs) = rep.identity;
    assert!((lhs - rhs).norm() <= 5e-2 * (lhs.norm() + rhs.norm()), "{lhs} {rhs}");
    assert!(rep.max_probe_error() < 0.05);
    // The assembled CGO pairing approaches C h W(p).
    let rel: Vec<f64> = rep.cgo_pairings.iter().map(|c| (c.pairing - c.prediction).norm() / c.prediction.norm()).collect();
    assert!(rel[1] < rel[0] && rel[1] < 0.2, "{rel:?}");

    let mut buf = Vec::new();
    write_probe_csv(&rep.probes, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("px,py,re_est,im_est,truth,rel_err\n"));
    assert_eq!(text.lines().count(), 1 + probes.len());
}

#[test]
fn uniqueness_chain_with_equal_potentials() {
    let budget = ChainBudget {
        scattering_grid: Grid::new(128, 8.0).unwrap(),
        m_max: 2,
        match_radius: 5.0,
        probe_h: vec![0.16, 0.08],
        cgo_h: vec![],
    };
    let rep = uniqueness_chain(&bump(), &bump(), 1.0, &[c(0.0, 0.0)], &budget).unwrap();
    assert!(rep.s_difference < 1e-12);
    assert!(rep.identity.0.norm() < 1e-12 && rep.identity.1.norm() < 1e-9);
    assert_eq!(rep.probes[0].estimate, c(0.0, 0.0));
}
