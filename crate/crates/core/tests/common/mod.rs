//! Oracles shared by the integration tests.

use cgoscatter::special::{bessel_j, bessel_y};
use num_complex::Complex64;

/// Radial ODE `u'' + u'/r + (λ² − V(r) − m²/r²) u = 0` by RK4, matched to `aJ_m + bY_m`.
pub fn radial_phase_oracle(v: impl Fn(f64) -> f64, lambda: f64, m: i64, r_out: f64) -> Complex64 {
    let mu = m.unsigned_abs() as f64;
    let r0 = 1e-3;
    let steps = 40_000;
    let h = (r_out - r0) / steps as f64;
    let rhs = |r: f64, y: [f64; 2]| -> [f64; 2] {
        [y[1], -y[1] / r - (lambda * lambda - v(r) - mu * mu / (r * r)) * y[0]]
    };
    let mut y = [r0.powf(mu), mu * r0.powf(mu - 1.0)];
    let mut r = r0;
    for _ in 0..steps {
        let k1 = rhs(r, y);
        let k2 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
    }
    let n = m.abs();
    let x = lambda * r;
    let (j, yv) = (bessel_j(n, x), bessel_y(n, x));
    let jp = lambda * 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
    let yp = lambda * 0.5 * (bessel_y(n - 1, x) - bessel_y(n + 1, x));
    let det = j * yp - yv * jp;
    let a = (y[0] * yp - yv * y[1]) / det;
    let b = (j * y[1] - jp * y[0]) / det;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, sign) * Complex64::new(a, b) / Complex64::new(a, -b)
}
