use cgoscatter::geometry::*;
use cgoscatter::phase::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn r(re: f64) -> Complex64 {
    c(re, 0.0)
}

fn points(cps: &[CriticalPoint]) -> Vec<(Complex64, usize)> {
    let mut v: Vec<_> = cps.iter().map(|c| (c.point, c.multiplicity)).collect();
    v.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
    v
}

/// Order of vanishing of `f` at `p`, read off the Taylor coefficients.
fn vanishing_order(f: &RationalFunction, p: Complex64) -> usize {
    assert_eq!(f.denominator().degree(), Some(0));
    let t = f.numerator().taylor_at(p);
    let scale = f.numerator().eval_magnitude(p).max(1.0);
    t.iter().take_while(|c| c.norm() < 1e-10 * scale).count()
}

/// Poles of `Φ` sit at punctures with order at most `j`.
fn in_growth_space(phi: &RationalFunction, punctures: &[Point], j: u8) -> bool {
    principal_divisor(phi).unwrap().entries().iter().all(|&(q, k)| {
        k >= 0
            || (-k <= j as i64
                && punctures.iter().any(|&e| match (e, q) {
                    (Point::Finite(a), Point::Finite(b)) => (a - b).norm() < 1e-8,
                    (Point::Infinity, Point::Infinity) => true,
                    _ => false,
                }))
    })
}

#[test]
fn critical_point_examples() {
    let p = c(0.3, -0.2);
    let square = RationalFunction::polynomial(Poly::root_power(p, 2));
    let cps = critical_points(&square).unwrap();
    assert_eq!(cps.len(), 1);
    assert!((cps[0].0 - p).norm() < 1e-14 && cps[0].1 == 1);

    let remark = RationalFunction::new(Poly::monomial(2), Poly::from_roots(&[r(1.0)])).unwrap();
    let mut cps = critical_points(&remark).unwrap();
    cps.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
    assert_eq!(cps.len(), 2);
    assert!((cps[0].0 - r(0.0)).norm() < 1e-12 && cps[0].1 == 1);
    assert!((cps[1].0 - r(2.0)).norm() < 1e-12 && cps[1].1 == 1);

    let cubic = RationalFunction::polynomial(Poly::monomial(3));
    assert_eq!(critical_points(&cubic).unwrap(), vec![(r(0.0), 2)]);
    assert!(matches!(MorsePhase::from_function(cubic, r(0.0), 2), Err(cgoscatter::Error::PhaseConstruction(_))));
    assert!(critical_points(&RationalFunction::constant(r(2.0))).is_err());
}

#[test]
fn higher_order_critical_points_keep_their_multiplicity() {
    let p = c(0.25, -0.75);
    for m in 2..=5 {
        let f = RationalFunction::polynomial(Poly::root_power(p, m + 1).mul(&Poly::from_roots(&[c(-1.0, 2.0)])));
        let cps = critical_points(&f).unwrap();
        let at_p: Vec<_> = cps.iter().filter(|(z, _)| (z - p).norm() < 1e-6).collect();
        assert_eq!(at_p.len(), 1, "m={m}: {cps:?}");
        assert_eq!(at_p[0].1, m, "m={m}");
    }
}

#[test]
fn construct_phase_examples() {
    let plane = construct_phase(r(0.0), &SurfaceModel::plane(), 2, 7).unwrap();
    assert_eq!(points(plane.critical_points()), vec![(r(0.0), 1)]);
    assert!((plane.hessian_at_base() - r(2.0)).norm() < 1e-14);
    assert!((plane.value(c(0.4, 0.7)).unwrap() - c(0.4, 0.7).powi(2)).norm() < 1e-14);

    let model = SurfaceModel::new(vec![r(1.0)]).unwrap();
    let phase = construct_phase(r(0.0), &model, 1, 7).unwrap();
    let cps = points(phase.critical_points());
    assert_eq!(cps.len(), 2);
    assert!((cps[0].0 - r(0.0)).norm() < 1e-14 && (cps[1].0 - r(2.0)).norm() < 1e-12);
    assert!(phase.critical_points().iter().all(|c| c.hessian.norm() > MORSE_TOL));
    let z = c(-0.6, 1.1);
    assert!((phase.value(z).unwrap() - z * z / (z - 1.0)).norm() < 1e-13);
}

#[test]
fn degenerate_candidate_is_perturbed_to_morse() {
    let model = SurfaceModel::new(vec![r(2.0)]).unwrap();
    let (phase, retries) = construct_phase_from(RationalFunction::constant(r(1.0)), r(0.0), &model, 1, 11).unwrap();
    assert!((1..=10).contains(&retries), "{retries}");
    assert!(phase.derivative(r(0.0)).unwrap().norm() < 1e-12);
    assert!(phase.critical_points().iter().all(|c| c.multiplicity == 1 && c.hessian.norm() > MORSE_TOL));
    assert!(in_growth_space(phase.function(), &model.punctures(), 1));
    let again = construct_phase_from(RationalFunction::constant(r(1.0)), r(0.0), &model, 1, 11).unwrap();
    assert_eq!(again.0, phase);
}

#[test]
fn construct_phase_rejects_bad_requests() {
    let model = SurfaceModel::new(vec![r(1.0)]).unwrap();
    assert!(construct_phase(r(1.0), &model, 1, 0).is_err());
    assert!(construct_phase(r(0.0), &SurfaceModel::plane(), 1, 0).is_err());
}

#[test]
fn amplitude_examples() {
    let a = construct_amplitude(r(0.0), &[r(2.0)], 3).unwrap();
    assert_eq!(a.numerator(), &Poly::root_power(r(2.0), 3));
    assert_eq!(a.eval(r(0.0)).unwrap(), r(-8.0));
    assert_eq!(construct_amplitude(r(0.0), &[], 4).unwrap(), RationalFunction::constant(r(1.0)));
    let b = construct_amplitude(r(0.0), &[r(2.0), r(-1.0)], 2).unwrap();
    assert_eq!(b.numerator(), &Poly::root_power(r(2.0), 2).mul(&Poly::root_power(r(-1.0), 2)));
    assert_eq!(vanishing_order(&b, r(2.0)), 2);
    assert_eq!(vanishing_order(&b, r(-1.0)), 2);
    assert!(construct_amplitude(r(2.0), &[r(2.0)], 1).is_err());
}

#[test]
fn taylor_match_examples() {
    let five = taylor_match(&[r(5.0)], r(0.0), &[], 0).unwrap();
    assert!((five.eval(c(3.0, -4.0)).unwrap() - r(5.0)).norm() < 1e-14);
    assert_eq!(five.numerator().degree(), Some(0));

    let f = taylor_match(&[r(0.0), r(1.0)], r(0.0), &[r(3.0)], 1).unwrap();
    assert!(f.eval(r(0.0)).unwrap().norm() < 1e-15);
    assert!((f.derivative().eval(r(0.0)).unwrap() - r(1.0)).norm() < 1e-14);
    assert!(f.eval(r(3.0)).unwrap().norm() < 1e-13);
    assert!(taylor_match(&[r(1.0)], r(3.0), &[r(3.0)], 1).is_err());
}

#[test]
fn real_part_of_phase_is_harmonic() {
    let model = SurfaceModel::new(vec![c(1.0, 0.5)]).unwrap();
    let phase = construct_phase(c(-0.4, 0.2), &model, 1, 3).unwrap();
    let lap = |d: f64| {
        let re = |x: f64, y: f64| phase.value(c(x, y)).unwrap().re;
        let mut worst: f64 = 0.0;
        for i in 0..9 {
            for k in 0..9 {
                let (x, y) = (-2.0 + 0.25 * i as f64, -2.0 + 0.25 * k as f64);
                if (c(x, y) - c(1.0, 0.5)).norm() < 0.5 {
                    continue;
                }
                let l = re(x + d, y) + re(x - d, y) + re(x, y + d) + re(x, y - d) - 4.0 * re(x, y);
                worst = worst.max((l / (d * d)).abs());
            }
        }
        worst
    };
    let (coarse, fine) = (lap(0.02), lap(0.01));
    assert!(coarse < 0.05, "{coarse}");
    assert!(fine < coarse / 3.5, "{coarse} {fine}");
}

#[test]
fn phase_growth_is_bounded_by_its_class() {
    let cases = [
        (SurfaceModel::plane(), 2u8, c(0.3, 0.1)),
        (SurfaceModel::new(vec![r(1.0)]).unwrap(), 1, c(-0.2, 0.4)),
        (SurfaceModel::new(vec![r(1.0), c(-1.0, 1.0)]).unwrap(), 1, c(0.1, -0.3)),
    ];
    for (model, j, p) in cases {
        let phase = construct_phase(p, &model, j, 5).unwrap();
        let max_on = |rad: f64| (0..64).map(|k| phase.value(Complex64::from_polar(rad, 0.1 * k as f64)).unwrap().norm()).fold(0.0, f64::max);
        let ratios: Vec<f64> = [10.0, 20.0, 40.0, 80.0, 160.0].iter().map(|&rad| max_on(rad) / rad.powi(j as i32)).collect();
        assert!(ratios.windows(2).all(|w| w[1] <= 1.1 * w[0]), "j={j}: {ratios:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn constructed_phases_are_morse(x in -2.0f64..2.0, y in -2.0f64..2.0, seed in 0u64..1000, linear in any::<bool>()) {
        let p = c(x, y);
        let (model, j) = if linear {
            (SurfaceModel::new(vec![c(2.5, 0.0), c(-1.0, 2.5)]).unwrap(), 1u8)
        } else {
            (SurfaceModel::plane(), 2u8)
        };
        let phase = construct_phase(p, &model, j, seed).unwrap();
        let dphi = phase.derivative_function();
        prop_assert!(dphi.eval(p).unwrap().norm() <= 1e-9 * dphi.numerator().eval_magnitude(p).max(1.0));
        prop_assert!(phase.hessian_at_base().norm() > MORSE_TOL);
        for cp in phase.critical_points() {
            prop_assert_eq!(cp.multiplicity, 1);
            prop_assert!(cp.hessian.norm() > MORSE_TOL);
            prop_assert!(model.finite_punctures().iter().all(|&e| (e - cp.point).norm() > 1e-8));
        }
        prop_assert!(in_growth_space(phase.function(), &model.punctures(), j));
        let neg = phase.negated();
        prop_assert_eq!(neg.value(c(0.1, 0.2)).unwrap(), -phase.value(c(0.1, 0.2)).unwrap());
    }

    #[test]
    fn amplitudes_vanish_to_the_requested_order(
        others in prop::collection::vec((-3i32..=3, -3i32..=3), 0..3),
        order in 1usize..4,
    ) {
        let mut pts: Vec<Complex64> = others.iter().map(|&(a, b)| c(a as f64 * 0.5, b as f64 * 0.5 + 0.25)).collect();
        pts.dedup();
        let a = construct_amplitude(r(0.0), &pts, order).unwrap();
        prop_assert!(a.eval(r(0.0)).unwrap().norm() > 0.0);
        for &q in &pts {
            prop_assert!(vanishing_order(&a, q) >= order);
        }
    }

    #[test]
    fn taylor_match_reproduces_the_jet(
        jet in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..4),
        zx in -3.0f64..-1.0,
        order in 1usize..3,
    ) {
        let jet: Vec<Complex64> = jet.into_iter().map(|(a, b)| c(a, b)).collect();
        let p0 = c(0.2, 0.1);
        let zeros = [c(zx, 0.5), c(1.5, -zx)];
        let f = taylor_match(&jet, p0, &zeros, order).unwrap();
        let t = f.numerator().taylor_at(p0);
        for (k, want) in jet.iter().enumerate() {
            prop_assert!((t[k] - want).norm() < 1e-8, "k={} {} {}", k, t[k], want);
        }
        for &q in &zeros {
            prop_assert!(vanishing_order(&f, q) >= order);
        }
    }
}
