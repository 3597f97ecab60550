use cgoscatter::cgo::{
    apply_conjugated, assemble_cgo, assemble_with_phase, build_b, build_r11, build_r12, conjugated_residual,
    cutoff_radii, radial_cutoff, CgoConfig,
};
use cgoscatter::fieldops::{ddz, ddzbar, Field, Grid};
use cgoscatter::geometry::SurfaceModel;
use cgoscatter::phase::{construct_amplitude, construct_phase};
use cgoscatter::potentials::Potential;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bump() -> Potential {
    Potential::gaussian(c(0.2, 0.1), 0.6, 0.8)
}

fn slope(hs: &[f64], ys: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn max_rel(a: &Field, b: &Field, keep: impl Fn(Complex64) -> bool) -> f64 {
    let g = a.grid();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..g.len() {
        if keep(g.point_at(i)) {
            err = err.max((a.values()[i] - b.values()[i]).norm());
            scale = scale.max(b.values()[i].norm());
        }
    }
    err / scale
}

struct Setup {
    grid: Grid,
    v: Field,
    phase: cgoscatter::phase::MorsePhase,
    a: cgoscatter::geometry::RationalFunction,
}

fn setup(n: usize) -> Setup {
    let model = SurfaceModel::plane();
    let phase = construct_phase(c(0.3, -0.2), &model, 2, 0).unwrap();
    let grid = Grid::new(n, 4.5).unwrap();
    let v = bump().sample(grid, &model);
    let a = construct_amplitude(phase.base_point(), &phase.other_critical_points(), 3).unwrap();
    Setup { grid, v, phase, a }
}

#[test]
fn b_solves_dbar_equation_and_vanishes_at_critical_points() {
    let s = setup(384);
    let lambda = 1.0;
    let (b, _) = build_b(&s.a, &s.v, lambda, &s.phase).unwrap();
    let target = Field::from_fn(s.grid, |z| 0.25 * s.a.eval(z).unwrap() * (bump().eval(z) - lambda * lambda));
    let err = max_rel(&ddzbar(&b), &target, |z| z.norm() < 1.8);
    assert!(err < 1e-5, "dbar b error {err}");

    let p = s.phase.base_point();
    let scale = b.max_abs();
    assert!(b.interpolate(p).norm() < 1e-8 * scale, "b(p) = {}", b.interpolate(p));
    let db = ddz(&b);
    let ddb = ddz(&db);
    for q in s.phase.other_critical_points() {
        if q.re.abs().max(q.im.abs()) < 1.8 {
            for (k, f) in [&b, &db, &ddb].into_iter().enumerate() {
                assert!(f.interpolate(q).norm() < 1e-6 * scale, "order {k} at {q}: {}", f.interpolate(q));
            }
        }
    }
}

#[test]
fn r11_inverts_the_twisted_derivative() {
    let s = setup(480);
    let h = 0.1;
    let (b, _) = build_b(&s.a, &s.v, 1.0, &s.phase).unwrap();
    let model = SurfaceModel::plane();
    let [i1, o1, i0, o0] = cutoff_radii(&s.phase, &model);
    let p = s.phase.base_point();
    let chi1 = radial_cutoff(s.grid, p, i1, o1);
    let chi = radial_cutoff(s.grid, p, i0, o0);
    let (r11, eta) = build_r11(&b, &s.phase, h, &chi, &chi1).unwrap();
    let dphi = Field::from_fn(s.grid, |z| s.phase.derivative(z).unwrap());
    let lhs = &ddz(&r11) + &(&dphi * &r11).scale(c(1.0 / h, 0.0));
    let rhs = &(&chi1 * &b) + &eta;
    let err = max_rel(&lhs, &rhs, |z| z.norm() < 2.2);
    assert!(err < 1e-4, "twisted derivative error {err}");
}

#[test]
fn r12_is_a_quotient_by_the_phase_derivative() {
    let s = setup(384);
    let (b, _) = build_b(&s.a, &s.v, 1.0, &s.phase).unwrap();
    let p = s.phase.base_point();
    let chi1 = radial_cutoff(s.grid, p, 0.5, 1.0);
    let r12 = build_r12(&b, &s.phase, &chi1).unwrap();
    let dphi = Field::from_fn(s.grid, |z| s.phase.derivative(z).unwrap());
    let back = &r12 * &dphi;
    let expect = chi1.zip_map(&b, |_, x, y| (1.0 - x) * y).unwrap();
    let err = max_rel(&back, &expect, |z| z.norm() < 2.2);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn forcing_matches_direct_conjugation() {
    let model = SurfaceModel::plane();
    // b decays like 1/z, so its spectral derivatives carry ~1e-6 taper aliasing, amplified by 1/h here.
    for lambda in [0.0, 1.0] {
        let mut cfg = CgoConfig::new(c(0.3, -0.2), lambda, 0.1);
        cfg.grid = Some(Grid::new(480, 4.5).unwrap());
        let sol = assemble_cgo(&model, &bump(), &cfg).unwrap();
        let v = bump().sample(sol.grid(), &model);
        let r1 = sol.r1();
        let forcing = conjugated_residual(&sol.r12, &sol.eta, &r1, &v, lambda, 0.1).unwrap();
        let la = v.map(|z, vv| (vv - lambda * lambda) * sol.a.eval(z).unwrap());
        let direct = &la + &apply_conjugated(&r1, &v, lambda, &sol.phase, 0.1).unwrap();
        let err = max_rel(&direct, &forcing, |z| z.norm() < 1.8);
        assert!(err < 1e-3, "lambda {lambda}: {err}");
    }
}

#[test]
fn free_zero_energy_has_no_correction() {
    let model = SurfaceModel::plane();
    let cfg = CgoConfig::new(c(0.3, -0.2), 0.0, 0.1);
    let sol = assemble_cgo(&model, &Potential::Zero, &cfg).unwrap();
    assert!(sol.b.max_abs() < 1e-12);
    assert!(sol.r1().max_abs() < 1e-12);
    assert!(sol.r2.max_abs() < 1e-12);
    assert!(sol.norm("pde_residual_relative") < 1e-6, "{:?}", sol.norms);
}

#[test]
fn solution_satisfies_equation_inside_domain() {
    let model = SurfaceModel::plane();
    let cfg = CgoConfig::new(c(0.3, -0.2), 1.0, 0.05);
    let sol = assemble_cgo(&model, &bump(), &cfg).unwrap();
    assert!(sol.norm("pde_residual_relative") < 1e-3, "{:?}", sol.norms);
    assert!(sol.norm("r2_solver_residual") < 1e-9);
    let u = sol.solution_in_domain();
    assert!(u.is_finite());
}

#[test]
fn remainder_norms_scale_with_h() {
    let model = SurfaceModel::plane();
    let hs = [0.1, 0.05, 0.025];
    let sols: Vec<_> = hs
        .iter()
        .map(|&h| assemble_cgo(&model, &bump(), &CgoConfig::new(c(0.3, -0.2), 1.0, h)).unwrap())
        .collect();
    let get = |k: &str| sols.iter().map(|s| s.norm(k)).collect::<Vec<_>>();
    let resid: Vec<f64> = get("conjugated_residual").iter().zip(&hs).map(|(r, h)| r / h.ln().abs()).collect();
    let s_res = slope(&hs, &resid);
    let s_r1 = slope(&hs, &get("xJ_r1"));
    let s_r2 = slope(&hs, &get("weighted_r2"));
    assert!(s_res >= 0.85, "residual slope {s_res}");
    assert!(s_r1 >= 0.9, "r1 slope {s_r1}");
    assert!(s_r2 >= 1.4, "r2 slope {s_r2}");
    let s_diff = slope(&hs, &get("xJ_r1_minus_h_r12tilde"));
    assert!(s_diff > 1.0, "r1 - h r12~ slope {s_diff}");
    let dr12 = get("xJ_dr12");
    assert!(dr12.iter().all(|&d| d < 2.0 * dr12[0]), "{dr12:?}");
}

#[test]
fn negated_phase_gives_a_second_solution() {
    let model = SurfaceModel::plane();
    let cfg = CgoConfig::new(c(0.3, -0.2), 1.0, 0.1);
    let phase = construct_phase(cfg.p, &model, 2, 0).unwrap().negated();
    let sol = assemble_with_phase(&model, &bump(), &phase, &cfg).unwrap();
    assert!(sol.norm("pde_residual_relative") < 1e-2, "{:?}", sol.norms);
}

#[test]
fn rejects_punctured_models() {
    let model = SurfaceModel::new(vec![c(3.0, 0.0)]).unwrap();
    let cfg = CgoConfig::new(c(0.3, -0.2), 1.0, 0.1);
    assert!(assemble_cgo(&model, &bump(), &cfg).is_err());
}

