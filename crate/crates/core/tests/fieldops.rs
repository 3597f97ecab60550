use cgoscatter::fieldops::{
    cauchy_transform, conj_cauchy_transform, ddz, ddzbar, green_laplace, helmholtz_resolvent,
    positive_laplacian, Radiation,
};
use cgoscatter::special::hankel1;
use cgoscatter::{Complex64, Field, Grid};

fn interior_rel_error(a: &Field, b: &Field) -> f64 {
    let g = a.grid();
    let lim = 0.9 * 0.8 * g.half_width();
    let keep = |z: Complex64| z.re.abs() < lim && z.im.abs() < lim;
    (a - b).norm_l2_where(keep) / b.norm_l2_where(keep)
}

fn bump(grid: Grid, c: Complex64, w: f64) -> Field {
    Field::from_fn(grid, |z| {
        let r2 = (z - c).norm_sqr() / (w * w);
        Complex64::new((-r2).exp(), 0.5 * (-(r2 * 1.3)).exp() * (z - c).re)
    })
}

#[test]
fn cauchy_inverts_dz() {
    let g = Grid::new(512, 2.0).unwrap();
    let f = bump(g, Complex64::new(0.2, -0.1), 0.3);
    let rf = cauchy_transform(&f).unwrap();
    assert!(interior_rel_error(&ddz(&rf), &f) < 1e-5);
    let rbf = conj_cauchy_transform(&f).unwrap();
    assert!(interior_rel_error(&ddzbar(&rbf), &f) < 1e-5);
}

#[test]
fn green_inverts_laplacian() {
    let g = Grid::new(512, 2.0).unwrap();
    let f = bump(g, Complex64::new(-0.3, 0.2), 0.25);
    let u = green_laplace(&f).unwrap();
    assert!(interior_rel_error(&positive_laplacian(&u), &f) < 1e-5);
}

#[test]
fn disk_transforms() {
    let g = Grid::new(512, 2.0).unwrap();
    let disk = Field::from_real_fn(g, |z| if z.norm() <= 1.0 { 1.0 } else { 0.0 });
    let r = cauchy_transform(&disk).unwrap();
    let u = green_laplace(&disk).unwrap();
    for &z in &[Complex64::new(0.3, 0.2), Complex64::new(-0.5, 0.4)] {
        let i = ((z.re + 2.0) / g.spacing()).round() as usize;
        let k = ((z.im + 2.0) / g.spacing()).round() as usize;
        let zz = g.point(i, k);
        assert!((r.get(i, k).norm() - zz.norm()).abs() < 2e-2, "{} vs {}", r.get(i, k), zz);
    }
    let probe = |x: f64| {
        let i = ((x + 2.0) / g.spacing()).round() as usize;
        let k = ((0.0 + 2.0) / g.spacing()).round() as usize;
        (u.get(i, k).re, g.point(i, k).norm())
    };
    let (u1, r1) = probe(1.2);
    let (u2, r2) = probe(1.5);
    assert!(((u1 - u2) - (-0.5 * r1.ln() + 0.5 * r2.ln())).abs() < 1e-2);
}

#[test]
fn helmholtz_point_source() {
    let g = Grid::new(256, 4.0).unwrap();
    let w: f64 = 0.08;
    let f = Field::from_real_fn(g, |z| (-z.norm_sqr() / (w * w)).exp() / (std::f64::consts::PI * w * w));
    let u = helmholtz_resolvent(&f, 1.0, Radiation::Outgoing).unwrap();
    let mut worst: f64 = 0.0;
    for idx in 0..g.len() {
        let z = g.point_at(idx);
        let r = z.norm();
        if (1.0..2.5).contains(&r) {
            // A unit-mass Gaussian source of width w damps the outgoing wave by e^{-λ²w²/4}.
            let exact = Complex64::new(0.0, 0.25 * (-w * w / 4.0).exp()) * hankel1(0, r);
            worst = worst.max((u.values()[idx] - exact).norm() / exact.norm());
        }
    }
    assert!(worst < 1e-6, "{worst}");
    // Resolvent property in the interior.
    let lap = positive_laplacian(&u);
    let res = lap.zip_map(&u, |_, a, b| a - b).unwrap();
    assert!(interior_rel_error(&res, &f) < 1e-4);
}
