//! Numerical checks of the Carleman inequalities with convexified harmonic weights.
//!
//! With `φ_ε = φ − (h/ε)φ₀` and the positive Laplacian `Δ`, the conjugated operator is
//! `e^{φ_ε/h}(Δ + V − λ²)e^{−φ_ε/h} = h^{-2} P_h` where
//! `P_h = h²Δ − |dφ_ε|² + 2h∇φ_ε·∇ − hΔφ_ε + h²(V − λ²)`.
//! The right-hand side reported here is `‖h^{-2} P_h u‖²` and the fitted constant
//! of a pair is `lhs / (ε · rhs)`.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fieldops::{gradient, phi0_radial_derivative, positive_laplacian, x_function, Field, Grid};
use crate::geometry::SurfaceModel;
use crate::phase::MorsePhase;
use crate::potentials::Potential;

fn weight_power(j: u8, delta: Option<f64>) -> Result<f64> {
    match j {
        2 => Ok(0.0),
        1 => {
            let d = delta.ok_or_else(|| Error::invalid("δ required for linear growth"))?;
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::invalid(format!("δ must lie in (0, 1), got {d}")));
            }
            Ok(2.0 - d)
        }
        _ => Err(Error::invalid(format!("growth class must be 1 or 2, got {j}"))),
    }
}

/// Left side: `(1/h)‖wu‖² + (1/h²)‖wu|dφ|‖² + ‖w du‖²` with `w = x^{1−δ/2}` for
/// `j = 1` and `w = 1` for `j = 2`. Derivatives are spectral.
pub fn carleman_lhs(u: &Field, phi: &Field, h: f64, delta: Option<f64>, j: u8) -> Result<f64> {
    u.grid().same_as(&phi.grid())?;
    let power = weight_power(j, delta)?;
    let (px, py) = gradient(phi);
    let grid = u.grid();
    let w2 = |i: usize| if power == 0.0 { 1.0 } else { x_function(grid.point_at(i)).powf(power) };
    Ok(weighted_lhs(u, |i| [px.values()[i].re, py.values()[i].re], h, w2))
}

/// Pointwise data of a convexified weight at one grid point.
#[derive(Debug, Clone, Copy)]
struct WeightPoint {
    grad_eps: [f64; 2],
    lap_eps: f64,
    potential: f64,
}

fn conjugated(u: &Field, h: f64, lambda: f64, at: impl Fn(usize) -> WeightPoint + Sync) -> Vec<Complex64> {
    let (ux, uy) = gradient(u);
    let lap = positive_laplacian(u);
    (0..u.grid().len())
        .into_par_iter()
        .map(|idx| {
            let w = at(idx);
            let g = w.grad_eps;
            let v = u.values()[idx];
            let ph = lap.values()[idx] * (h * h) - v * (g[0] * g[0] + g[1] * g[1])
                + (ux.values()[idx] * g[0] + uy.values()[idx] * g[1]) * (2.0 * h)
                - v * (h * w.lap_eps)
                + v * (h * h * (w.potential - lambda * lambda));
            ph / (h * h)
        })
        .collect()
}

fn squared_norm(grid: Grid, values: &[Complex64]) -> f64 {
    values.iter().enumerate().map(|(i, v)| v.norm_sqr() * grid.quadrature_weight(i)).sum()
}

/// Right side `‖e^{φ_ε/h}(Δ + V − λ²)e^{−φ_ε/h}u‖²` via the expanded `P_h`, with
/// `∇φ_ε` and `Δφ_ε` computed spectrally from the sampled weight.
pub fn carleman_rhs(u: &Field, v: &Field, phi_eps: &Field, h: f64, lambda: f64) -> Result<f64> {
    let grid = u.grid();
    grid.same_as(&v.grid())?;
    grid.same_as(&phi_eps.grid())?;
    if !(h > 0.0) {
        return Err(Error::invalid("h must be positive"));
    }
    let (px, py) = gradient(phi_eps);
    let lp = positive_laplacian(phi_eps);
    let out = conjugated(u, h, lambda, |i| WeightPoint {
        grad_eps: [px.values()[i].re, py.values()[i].re],
        lap_eps: lp.values()[i].re,
        potential: v.values()[i].re,
    });
    Ok(squared_norm(grid, &out))
}

/// Right side computed literally as `e^{φ_ε/h}(Δ + V − λ²)(e^{−φ_ε/h}u)`.
/// Only usable when `e^{±φ_ε/h}` stays in floating-point range.
pub fn carleman_rhs_direct(u: &Field, v: &Field, phi_eps: &Field, h: f64, lambda: f64) -> Result<f64> {
    let grid = u.grid();
    grid.same_as(&v.grid())?;
    grid.same_as(&phi_eps.grid())?;
    let w = phi_eps.zip_map(u, |_, p, a| a * (-p.re / h).exp())?;
    let lap = positive_laplacian(&w);
    let mut out = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let back = (phi_eps.values()[idx].re / h).exp();
        let val = (lap.values()[idx] + w.values()[idx] * (v.values()[idx].re - lambda * lambda)) * back;
        if !val.is_finite() {
            return Err(Error::invalid("weight e^{φ/h} overflows; use the expanded form"));
        }
        out.push(val);
    }
    Ok(squared_norm(grid, &out))
}

/// One seeded test function `A(z) e^{iκ·z} e^{−i Im Φ(z)/h}` with Gaussian envelope `A`.
///
/// The phase factor makes the family a quasimode of the unconvexified conjugated
/// Laplacian, which is where the inequality is tight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub id: usize,
    pub center: Complex64,
    pub width: f64,
    pub kappa: [f64; 2],
    pub in_end: bool,
}

impl TestFunction {
    fn envelope(&self, z: Complex64, model: &SurfaceModel) -> f64 {
        let r2 = (z - self.center).norm_sqr() / (self.width * self.width);
        if r2 > 40.0 {
            return 0.0;
        }
        model.puncture_mask(z) * (-r2).exp()
    }

    fn reach(&self) -> f64 {
        4.5 * self.width
    }
}

/// Seeded family: a bump at the critical point, bumps near it and, for `j = 1`, bumps in `|z| ∈ [5, 8]`.
pub fn test_family(phase: &MorsePhase, model: &SurfaceModel, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = phase.base_point();
    let linear = phase.growth_class() == 1;
    let mut out = Vec::with_capacity(count);
    let mut id = 0;
    while out.len() < count {
        let in_end = linear && out.len() % 2 == 1;
        let (center, width) = if out.is_empty() {
            let room = (model.distance_to_punctures(p) - 1.0) / 4.5;
            (p, room.min(if linear { 0.35 } else { 0.2 }))
        } else if in_end {
            let r = rng.gen_range(5.0..8.0);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            (Complex64::from_polar(r, t), rng.gen_range(0.3..0.6))
        } else {
            let r = rng.gen_range(0.0..0.6);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            (p + Complex64::from_polar(r, t), rng.gen_range(0.12..0.3))
        };
        let kappa = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let candidate = TestFunction { id, center, width, kappa, in_end };
        id += 1;
        if !out.is_empty() && model.distance_to_punctures(center) < 1.5 + candidate.reach() {
            continue;
        }
        out.push(candidate);
    }
    for (k, t) in out.iter_mut().enumerate() {
        t.id = k;
    }
    out
}

/// Inputs of a Carleman sweep.
#[derive(Debug, Clone)]
pub struct CarlemanConfig {
    pub j: u8,
    pub delta: Option<f64>,
    pub lambda: f64,
    pub eps: f64,
    pub h_values: Vec<f64>,
    pub tests: usize,
    pub seed: u64,
    pub stability_factor: f64,
    /// Grid points per shortest local wavelength.
    pub points_per_wavelength: f64,
}

impl CarlemanConfig {
    pub fn new(j: u8, delta: Option<f64>, lambda: f64, eps: f64, h_values: Vec<f64>, seed: u64) -> Self {
        Self {
            j,
            delta,
            lambda,
            eps,
            h_values,
            tests: 10,
            seed,
            stability_factor: 2.0,
            points_per_wavelength: 3.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanRow {
    pub h: f64,
    pub test_id: usize,
    pub grid_n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub fitted_c: f64,
    /// Fitted constant of this test function stable across `h`.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanReport {
    pub j: u8,
    pub delta: Option<f64>,
    pub lambda: f64,
    pub eps: f64,
    pub h_values: Vec<f64>,
    pub rows: Vec<CarlemanRow>,
    /// Largest fitted constant at each `h`.
    pub worst_c: Vec<f64>,
    /// `max / min` of `worst_c`.
    pub stability: f64,
    /// Whether `ε ≥ 10 h` for every `h`; reported, not part of `pass`.
    pub hypothesis_ok: bool,
    pub pass: bool,
}

impl CarlemanReport {
    pub fn constant(&self) -> f64 {
        self.worst_c.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "delta", "lambda", "eps", "h", "testId", "lhs", "rhs", "fittedC", "pass"])?;
        let delta = self.delta.map(|d| format!("{d:.15e}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                self.j.to_string(),
                delta.clone(),
                format!("{:.15e}", self.lambda),
                format!("{:.15e}", self.eps),
                format!("{:.15e}", r.h),
                r.test_id.to_string(),
                format!("{:.15e}", r.lhs),
                format!("{:.15e}", r.rhs),
                format!("{:.15e}", r.fitted_c),
                r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn phi0_gradient(z: Complex64, j: u8, delta: f64) -> ([f64; 2], f64) {
    if j == 2 {
        return ([-0.5 * z.re, -0.5 * z.im], 1.0);
    }
    let r = z.norm();
    let lap = x_function(z).powf(2.0 - delta);
    if r == 0.0 {
        return ([0.0, 0.0], lap);
    }
    let d = phi0_radial_derivative(r, delta);
    ([d * z.re / r, d * z.im / r], lap)
}

/// Evaluate one test function at one `h` on a local window around its centre,
/// with analytic weight derivatives.
pub fn evaluate_test(
    test: &TestFunction,
    phase: &MorsePhase,
    model: &SurfaceModel,
    potential: &Potential,
    cfg: &CarlemanConfig,
    h: f64,
) -> Result<CarlemanRow> {
    let power = weight_power(cfg.j, cfg.delta)?;
    let delta = cfg.delta.unwrap_or(0.5);
    let reach = test.reach();
    let half = reach / crate::fieldops::TAPER_FLAT_FRACTION * 1.05;
    let kmax = local_frequency(test, phase, h);
    let spacing = 2.0 * std::f64::consts::PI / (cfg.points_per_wavelength * kmax);
    let n = (((2.0 * half / spacing).ceil() as usize + 1).div_ceil(16) * 16).max(64);
    if n > 8192 {
        return Err(Error::precondition(format!("test function {} needs n = {n} at h = {h}", test.id)));
    }
    let grid = Grid::new(n, half)?;
    let c = test.center;
    let u = Field::from_fn(grid, |z| {
        let w = z + c;
        let a = test.envelope(w, model);
        if a == 0.0 {
            return Complex64::default();
        }
        let psi = phase.value(w).map(|v| v.im).unwrap_or(0.0);
        let lin = test.kappa[0] * w.re + test.kappa[1] * w.im;
        Complex64::from_polar(a, lin - psi / h)
    });
    let weight_at = |idx: usize| -> ([f64; 2], WeightPoint) {
        let w = grid.point_at(idx) + c;
        let d = phase.derivative(w).unwrap_or_default();
        let grad = [d.re, -d.im];
        let (g0, l0) = phi0_gradient(w, cfg.j, delta);
        let s = h / cfg.eps;
        let point = WeightPoint {
            grad_eps: [grad[0] - s * g0[0], grad[1] - s * g0[1]],
            lap_eps: -s * l0,
            potential: model.puncture_mask(w) * potential.eval(w),
        };
        (grad, point)
    };
    let lhs = weighted_lhs(&u, |i| weight_at(i).0, h, |i| {
        if power == 0.0 {
            1.0
        } else {
            x_function(grid.point_at(i) + c).powf(power)
        }
    });
    let rhs = squared_norm(grid, &conjugated(&u, h, cfg.lambda, |i| weight_at(i).1));
    let fitted_c = lhs / (cfg.eps * rhs);
    Ok(CarlemanRow { h, test_id: test.id, grid_n: n, lhs, rhs, fitted_c, pass: true })
}

fn weighted_lhs(u: &Field, grad_phi: impl Fn(usize) -> [f64; 2], h: f64, w2: impl Fn(usize) -> f64) -> f64 {
    let grid = u.grid();
    let (ux, uy) = gradient(u);
    (0..grid.len())
        .map(|idx| {
            let a = u.values()[idx].norm_sqr();
            let g = grad_phi(idx);
            let dphi2 = g[0] * g[0] + g[1] * g[1];
            let du2 = ux.values()[idx].norm_sqr() + uy.values()[idx].norm_sqr();
            w2(idx) * (a / h + a * dphi2 / (h * h) + du2) * grid.quadrature_weight(idx)
        })
        .sum()
}

fn local_frequency(test: &TestFunction, phase: &MorsePhase, h: f64) -> f64 {
    let r = test.reach();
    let mut dmax = 0.0_f64;
    for ring in 0..=6 {
        let rho = r * ring as f64 / 6.0;
        for k in 0..24 {
            let z = test.center + Complex64::from_polar(rho, std::f64::consts::TAU * k as f64 / 24.0);
            if let Some(d) = phase.derivative(z) {
                dmax = dmax.max(d.norm());
            }
        }
    }
    dmax / h + test.kappa[0].hypot(test.kappa[1]) + 4.0 / test.width
}

/// Sweep `h` over a seeded test family and fit the Carleman constant.
pub fn carleman_sweep(
    model: &SurfaceModel,
    phase: &MorsePhase,
    potential: &Potential,
    cfg: &CarlemanConfig,
) -> Result<CarlemanReport> {
    if cfg.h_values.is_empty() || cfg.h_values.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::invalid("h values must be positive"));
    }
    if !(cfg.eps > 0.0) {
        return Err(Error::invalid("ε must be positive"));
    }
    if phase.growth_class() != cfg.j {
        return Err(Error::invalid("phase growth class differs from the sweep's"));
    }
    weight_power(cfg.j, cfg.delta)?;
    let tests = test_family(phase, model, cfg.tests, cfg.seed);
    let mut h_values = cfg.h_values.clone();
    h_values.sort_by(|a, b| b.total_cmp(a));
    let jobs: Vec<(f64, &TestFunction)> = h_values.iter().flat_map(|&h| tests.iter().map(move |t| (h, t))).collect();
    let rows: Vec<Result<CarlemanRow>> =
        jobs.par_iter().map(|&(h, t)| evaluate_test(t, phase, model, potential, cfg, h)).collect();
    let mut rows: Vec<CarlemanRow> = rows.into_iter().collect::<Result<_>>()?;
    for t in &tests {
        let cs: Vec<f64> = rows.iter().filter(|r| r.test_id == t.id).map(|r| r.fitted_c).collect();
        let ok = ratio(&cs) <= cfg.stability_factor;
        for r in rows.iter_mut().filter(|r| r.test_id == t.id) {
            r.pass = ok;
        }
    }
    let worst_c: Vec<f64> = h_values
        .iter()
        .map(|&h| rows.iter().filter(|r| r.h == h).map(|r| r.fitted_c).fold(0.0, f64::max))
        .collect();
    let stability = ratio(&worst_c);
    let hypothesis_ok = h_values.iter().all(|&h| cfg.eps >= 10.0 * h);
    let finite = rows.iter().all(|r| r.lhs.is_finite() && r.rhs.is_finite() && r.rhs > 0.0);
    Ok(CarlemanReport {
        j: cfg.j,
        delta: cfg.delta,
        lambda: cfg.lambda,
        eps: cfg.eps,
        h_values,
        rows,
        worst_c,
        stability,
        hypothesis_ok,
        pass: finite && stability <= cfg.stability_factor,
    })
}

fn ratio(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_zero() {
        let g = Grid::new(32, 2.0).unwrap();
        let z = Field::zeros(g);
        let phi = Field::from_real_fn(g, |z| z.re * z.re - z.im * z.im);
        assert_eq!(carleman_lhs(&z, &phi, 0.1, None, 2).unwrap(), 0.0);
        assert_eq!(carleman_rhs(&z, &z, &phi, 0.1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_growth() {
        let g = Grid::new(32, 2.0).unwrap();
        let z = Field::zeros(g);
        assert!(carleman_lhs(&z, &z, 0.1, None, 3).is_err());
        assert!(carleman_lhs(&z, &z, 0.1, None, 1).is_err());
    }
}
