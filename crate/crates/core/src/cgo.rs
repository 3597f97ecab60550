//! Complex geometrical optics solutions `u = e^{Φ/h}(a + r₁ + r₂)` on the plane chart.
//!
//! With `Φ = φ + iψ` holomorphic, the conjugated operator is
//! `L_h w = e^{−Φ/h}(Δ + V − λ²)e^{Φ/h} w = −4∂̄(∂w + Φ′w/h) + (V − λ²)w`
//! and `∂w + Φ′w/h = e^{−2iψ/h}∂(e^{2iψ/h}w)`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fieldops::{
    cauchy_transform, conj_cauchy_transform, ddz, ddzbar, gradient, positive_laplacian, x_function, Field, Grid,
    TAPER_FLAT_FRACTION,
};
use crate::geometry::{smooth_step, RationalFunction, SurfaceModel};
use crate::krylov::{gmres, GmresOptions};
use crate::phase::{construct_amplitude, construct_phase, taylor_match, MorsePhase};
use crate::potentials::Potential;

/// Default vanishing order of `a` at the other critical points.
pub const DEFAULT_VANISHING_ORDER: usize = 3;
const QUOTIENT_LIMIT: f64 = 1e8;

/// Radial cutoff equal to 1 for `r ≤ inner` and 0 for `r ≥ outer`.
pub fn radial_cutoff(grid: Grid, center: Complex64, inner: f64, outer: f64) -> Field {
    Field::from_real_fn(grid, |z| 1.0 - smooth_step(((z - center).norm() - inner) / (outer - inner)))
}

/// Cutoff radii `(χ₁ inner, χ₁ outer, χ inner, χ outer)` around `p`, shrunk when
/// another critical point or puncture is within 4 units.
pub fn cutoff_radii(phase: &MorsePhase, model: &SurfaceModel) -> [f64; 4] {
    let p = phase.base_point();
    let nearest = phase
        .other_critical_points()
        .iter()
        .map(|q| (q - p).norm())
        .fold(model.distance_to_punctures(p), f64::min);
    let s = (nearest / 4.0).min(1.0);
    [0.5 * s, s, 1.5 * s, 2.0 * s]
}

fn oscillation(grid: Grid, phase: &MorsePhase, h: f64, sign: f64) -> Vec<Complex64> {
    (0..grid.len())
        .map(|i| match phase.value(grid.point_at(i)) {
            Some(v) => Complex64::from_polar(1.0, sign * 2.0 * v.im / h),
            None => Complex64::default(),
        })
        .collect()
}

fn times(f: &Field, w: &[Complex64]) -> Field {
    let mut out = f.clone();
    out.values_mut().iter_mut().zip(w).for_each(|(a, b)| *a *= b);
    out
}

/// Holomorphic Taylor coefficients `∂^k F(q)/k!`, `k < count`, from spectral derivatives.
fn holomorphic_jet(f: &Field, q: Complex64, count: usize) -> Vec<Complex64> {
    let mut jet = Vec::with_capacity(count);
    let mut d = f.clone();
    let mut fact = 1.0;
    for k in 0..count {
        if k > 0 {
            d = ddz(&d);
            fact *= k as f64;
        }
        jet.push(d.interpolate(q) / fact);
    }
    jet
}

/// `b = −∂G(a(V − λ²)) + ω` as `¼(R̄(aV) − λ² z̄ a) + ω`, where the polynomial `ω`
/// cancels `b(p)` and the 2-jets of `b` at the other critical points.
///
/// Returns `(b, ω)`.
pub fn build_b(a: &RationalFunction, v: &Field, lambda: f64, phase: &MorsePhase) -> Result<(Field, RationalFunction)> {
    build_b_with(a, v, lambda, phase, DEFAULT_VANISHING_ORDER)
}

pub fn build_b_with(
    a: &RationalFunction,
    v: &Field,
    lambda: f64,
    phase: &MorsePhase,
    order: usize,
) -> Result<(Field, RationalFunction)> {
    let grid = v.grid();
    let a_field = Field::from_fn(grid, |z| a.eval(z).unwrap_or_default());
    let av = &a_field * v;
    let smooth = conj_cauchy_transform(&av)?.scale(Complex64::new(0.25, 0.0));
    let l2 = lambda * lambda;
    let b0 = Field::from_fn(grid, |z| -0.25 * l2 * z.conj() * a.eval(z).unwrap_or_default());
    let b0 = &smooth + &b0;

    let p = phase.base_point();
    let others = phase.other_critical_points();
    let a_derivs: Vec<RationalFunction> =
        std::iter::successors(Some(a.clone()), |f| Some(f.derivative())).take(3).collect();
    // ∂^k(z̄ a) = z̄ a^{(k)}.
    let jet_at = |q: Complex64, count: usize| -> Vec<Complex64> {
        let spec = holomorphic_jet(&smooth, q, count);
        let mut fact = 1.0;
        spec.iter()
            .enumerate()
            .map(|(k, s)| {
                if k > 0 {
                    fact *= k as f64;
                }
                s - 0.25 * l2 * q.conj() * a_derivs[k].eval(q).unwrap_or_default() / fact
            })
            .collect()
    };
    let mut points = vec![(p, jet_at(p, 1))];
    points.extend(others.iter().map(|&q| (q, jet_at(q, 3))));
    let mut omega = RationalFunction::constant(Complex64::default());
    for (i, (q, jet)) in points.iter().enumerate() {
        let zeros: Vec<Complex64> = points.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, (z, _))| *z).collect();
        let neg: Vec<Complex64> = jet.iter().map(|c| -c).collect();
        let piece = taylor_match(&neg, *q, &zeros, order.max(3))?;
        omega = omega.add(&piece);
    }
    let b = Field::from_fn(grid, |z| omega.eval(z).unwrap_or_default());
    Ok((&b0 + &b, omega))
}

/// `r₁₁ = χ e^{−2iψ/h} R(e^{2iψ/h} χ₁ b)` and `η = e^{−2iψ/h} R(e^{2iψ/h} χ₁ b) ∂χ`.
pub fn build_r11(b: &Field, phase: &MorsePhase, h: f64, chi: &Field, chi1: &Field) -> Result<(Field, Field)> {
    let grid = b.grid();
    grid.same_as(&chi.grid())?;
    grid.same_as(&chi1.grid())?;
    let plus = oscillation(grid, phase, h, 1.0);
    let minus = oscillation(grid, phase, h, -1.0);
    let inner = times(&(chi1 * b), &plus);
    let core = times(&cauchy_transform(&inner)?, &minus);
    let r11 = chi * &core;
    let eta = &core * &ddz(chi);
    Ok((r11, eta))
}

/// `r₁₂ = (1 − χ₁) b / (2i∂ψ) = (1 − χ₁) b / Φ′`, filled by its limit at the other critical points.
pub fn build_r12(b: &Field, phase: &MorsePhase, chi1: &Field) -> Result<Field> {
    let weights = chi1.map(|_, c| Complex64::new(1.0, 0.0) - c);
    quotient(&(&weights * b), phase)
}

/// Global quotient `r̃₁₂ = b / Φ′`.
pub fn build_r12_global(b: &Field, phase: &MorsePhase) -> Result<Field> {
    quotient(b, phase)
}

fn quotient(num: &Field, phase: &MorsePhase) -> Result<Field> {
    let grid = num.grid();
    let scale = num.max_abs().max(f64::MIN_POSITIVE);
    let crit: Vec<(Complex64, Complex64)> = phase
        .critical_points()
        .iter()
        .map(|c| (c.point, c.hessian))
        .collect();
    let dnum = ddz(num);
    let fill_radius = 0.5 * grid.spacing();
    let mut out = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let z = grid.point_at(idx);
        let near = crit.iter().find(|(q, _)| (z - q).norm() < fill_radius);
        let value = match (near, phase.derivative(z)) {
            (Some(&(_, hess)), _) => dnum.values()[idx] / hess,
            (None, Some(d)) if d.norm() > 0.0 => num.values()[idx] / d,
            _ => Complex64::default(),
        };
        out.push(value);
    }
    let f = Field::from_values(grid, out)?;
    let peak = f.max_abs();
    if !(peak.is_finite() && peak <= QUOTIENT_LIMIT * scale.max(1.0)) {
        return Err(Error::QuotientBlowUp(format!("quotient peak {peak:.3e} against numerator scale {scale:.3e}")));
    }
    Ok(f)
}

/// Conjugated residual `L_h(a + r₁) = hΔr₁₂ − 4∂̄η + (V − λ²) r₁`.
pub fn conjugated_residual(r12: &Field, eta: &Field, r1: &Field, v: &Field, lambda: f64, h: f64) -> Result<Field> {
    let l2 = lambda * lambda;
    let lap = positive_laplacian(r12).scale(Complex64::new(h, 0.0));
    let deta = ddzbar(eta).scale(Complex64::new(-4.0, 0.0));
    let m = v.zip_map(r1, |_, vv, r| (vv - l2) * r)?;
    Ok(&(&lap + &deta) + &m)
}

/// `L_h w` applied directly with spectral derivatives.
pub fn apply_conjugated(w: &Field, v: &Field, lambda: f64, phase: &MorsePhase, h: f64) -> Result<Field> {
    let grid = w.grid();
    let dphi = Field::from_fn(grid, |z| phase.derivative(z).unwrap_or_default());
    let inner = &ddz(w) + &(&dphi * w).scale(Complex64::new(1.0 / h, 0.0));
    let l2 = lambda * lambda;
    let m = v.zip_map(w, |_, vv, x| (vv - l2) * x)?;
    Ok(&ddzbar(&inner).scale(Complex64::new(-4.0, 0.0)) + &m)
}

/// Solution of `(I + S χ_Ω M) r₂ = −S(χ_Ω F)` with
/// `S g = −¼ e^{−2iψ/h} R(e^{2iψ/h} χ_B R̄ g)` and `M = V − λ²`, so that
/// `L_h r₂ = −F` on `{χ_Ω = 1}`.
#[derive(Debug, Clone)]
pub struct RemainderSolve {
    pub r2: Field,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub fn build_r2(
    v: &Field,
    lambda: f64,
    phase: &MorsePhase,
    h: f64,
    forcing: &Field,
    domain: &Field,
    buffer: &Field,
) -> Result<RemainderSolve> {
    let grid = v.grid();
    let plus = oscillation(grid, phase, h, 1.0);
    let minus = oscillation(grid, phase, h, -1.0);
    let l2 = lambda * lambda;
    let apply_s = |g: &Field| -> Result<Field> {
        let inner = buffer * &conj_cauchy_transform(g)?;
        let out = times(&cauchy_transform(&times(&inner, &plus))?, &minus);
        Ok(out.scale(Complex64::new(-0.25, 0.0)))
    };
    let mask: Vec<Complex64> = v.values().iter().zip(domain.values()).map(|(vv, d)| (vv - l2) * d).collect();
    let rhs = apply_s(&(domain * forcing))?.scale(Complex64::new(-1.0, 0.0));
    if rhs.max_abs() == 0.0 {
        return Ok(RemainderSolve { r2: Field::zeros(grid), iterations: 0, relative_residual: 0.0 });
    }
    let op = |x: &[Complex64]| -> Vec<Complex64> {
        let mx: Vec<Complex64> = x.iter().zip(&mask).map(|(a, m)| a * m).collect();
        let s = apply_s(&Field::from_raw(grid, mx)).expect("support checked on the right-hand side");
        x.iter().zip(s.values()).map(|(a, b)| a + b).collect()
    };
    let opts = GmresOptions { tol: 1e-10, restart: 40, max_iterations: 400 };
    let out = gmres(op, rhs.values(), opts);
    if !out.converged {
        return Err(Error::NonConvergence { what: "remainder r₂ solve".into(), residual: out.relative_residual });
    }
    Ok(RemainderSolve {
        r2: Field::from_raw(grid, out.solution),
        iterations: out.iterations,
        relative_residual: out.relative_residual,
    })
}

/// Inputs of a CGO construction on the plane with quadratic-growth phase.
#[derive(Debug, Clone)]
pub struct CgoConfig {
    pub p: Complex64,
    pub lambda: f64,
    pub h: f64,
    /// Convexification parameter used in the `e^{φ₀/ε}` weight on `r₂`.
    pub eps: f64,
    pub vanishing_order: usize,
    pub seed: u64,
    /// Radius of the disk `Ω` on which `u` solves the equation exactly.
    pub domain_radius: f64,
    /// Points per shortest wavelength of `e^{2iψ/h}` when the grid is chosen automatically.
    pub points_per_wavelength: f64,
    /// Explicit grid; chosen from `h` when absent.
    pub grid: Option<Grid>,
}

impl CgoConfig {
    pub fn new(p: Complex64, lambda: f64, h: f64) -> Self {
        Self {
            p,
            lambda,
            h,
            eps: 0.1,
            vanishing_order: DEFAULT_VANISHING_ORDER,
            seed: 0,
            domain_radius: 1.0,
            points_per_wavelength: 2.6,
            grid: None,
        }
    }
}

/// Grid covering the outer cutoff around `p` and resolving `e^{2iψ/h}` there.
pub fn cgo_grid(phase: &MorsePhase, outer: f64, h: f64, points_per_wavelength: f64) -> Result<Grid> {
    let p = phase.base_point();
    let half = (p.re.abs().max(p.im.abs()) + outer) / TAPER_FLAT_FRACTION * 1.04;
    let mut dmax = 0.0_f64;
    for k in 0..64 {
        let z = p + Complex64::from_polar(outer, std::f64::consts::TAU * k as f64 / 64.0);
        if let Some(d) = phase.derivative(z) {
            dmax = dmax.max(d.norm());
        }
    }
    let k = 2.0 * dmax / h;
    let spacing = 2.0 * std::f64::consts::PI / (points_per_wavelength * k);
    let n = (((2.0 * half / spacing).ceil() as usize + 1).div_ceil(32) * 32).max(128);
    if n > 4096 {
        return Err(Error::precondition(format!("h = {h} needs n = {n} samples per axis")));
    }
    Grid::new(n, half)
}

/// A constructed CGO solution with its remainder norms.
#[derive(Debug, Clone)]
pub struct CgoSolution {
    pub h: f64,
    pub lambda: f64,
    pub phase: MorsePhase,
    pub a: RationalFunction,
    pub omega: RationalFunction,
    pub b: Field,
    pub r11: Field,
    pub r12: Field,
    pub eta: Field,
    pub r2: Field,
    pub chi: Field,
    pub chi1: Field,
    /// Disk on which `u` solves the equation.
    pub domain: Field,
    /// Weight order `J` of the `x^J` norms.
    pub weight_order: f64,
    pub norms: BTreeMap<String, f64>,
    pub r2_iterations: usize,
}

impl CgoSolution {
    pub fn grid(&self) -> Grid {
        self.b.grid()
    }

    pub fn r1(&self) -> Field {
        &self.r11 + &self.r12.scale(Complex64::new(self.h, 0.0))
    }

    /// `a + r₁ + r₂` on the grid.
    pub fn amplitude_total(&self) -> Field {
        let a = Field::from_fn(self.grid(), |z| self.a.eval(z).unwrap_or_default());
        &(&a + &self.r1()) + &self.r2
    }

    /// `u = e^{Φ/h}(a + r₁ + r₂)` at grid points inside `Ω`; zero elsewhere.
    pub fn solution_in_domain(&self) -> Field {
        let total = self.amplitude_total();
        let mut out = total.clone();
        for (i, w) in out.values_mut().iter_mut().enumerate() {
            let z = self.grid().point_at(i);
            *w = match (self.domain.values()[i].re > 0.0, self.phase.value(z)) {
                (true, Some(v)) => *w * (v / self.h).exp(),
                _ => Complex64::default(),
            };
        }
        out
    }

    /// `u(z)` with the amplitude interpolated from the grid and the exponential exact.
    pub fn value_at(&self, z: Complex64) -> Option<Complex64> {
        let v = self.phase.value(z)?;
        Some(self.amplitude_total().interpolate(z) * (v / self.h).exp())
    }

    pub fn norm(&self, key: &str) -> f64 {
        self.norms.get(key).copied().unwrap_or(f64::NAN)
    }
}

fn weighted_l2(f: &Field, weight: impl Fn(Complex64) -> f64, region: Option<&Field>) -> f64 {
    let grid = f.grid();
    f.values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let z = grid.point_at(i);
            let m = region.map(|r| r.values()[i].re).unwrap_or(1.0);
            let w = weight(z);
            m * w * w * v.norm_sqr() * grid.quadrature_weight(i)
        })
        .sum::<f64>()
        .sqrt()
}

fn h1_norm(f: &Field) -> f64 {
    let (fx, fy) = gradient(f);
    let grid = f.grid();
    (0..grid.len())
        .map(|i| (f.values()[i].norm_sqr() + fx.values()[i].norm_sqr() + fy.values()[i].norm_sqr()) * grid.quadrature_weight(i))
        .sum::<f64>()
        .sqrt()
}

/// Build `u = e^{Φ/h}(a + r₁ + r₂)` for `V` on the plane with the quadratic phase through `p`.
pub fn assemble_cgo(model: &SurfaceModel, potential: &Potential, cfg: &CgoConfig) -> Result<CgoSolution> {
    if !model.is_plane() {
        return Err(Error::UnsupportedModel("CGO assembly is implemented on the plane model".into()));
    }
    if !(cfg.h > 0.0 && cfg.h < 1.0) {
        return Err(Error::invalid(format!("h must lie in (0, 1), got {}", cfg.h)));
    }
    let phase = construct_phase(cfg.p, model, 2, cfg.seed)?;
    assemble_with_phase(model, potential, &phase, cfg)
}

/// As [`assemble_cgo`] with a given phase (negate it for the second solution of a pairing).
pub fn assemble_with_phase(
    model: &SurfaceModel,
    potential: &Potential,
    phase: &MorsePhase,
    cfg: &CgoConfig,
) -> Result<CgoSolution> {
    let h = cfg.h;
    let [i1, o1, i0, o0] = cutoff_radii(phase, model);
    let grid = match cfg.grid {
        Some(g) => g,
        None => cgo_grid(phase, o0, h, cfg.points_per_wavelength)?,
    };
    let p = phase.base_point();
    if p.re.abs().max(p.im.abs()) + o0 > TAPER_FLAT_FRACTION * grid.half_width() {
        return Err(Error::precondition("cutoffs leave the flat part of the window"));
    }
    let v = potential.sample(grid, model);
    let a = construct_amplitude(p, &phase.other_critical_points(), cfg.vanishing_order)?;
    let (b, omega) = build_b_with(&a, &v, cfg.lambda, phase, cfg.vanishing_order)?;
    let chi1 = radial_cutoff(grid, p, i1, o1);
    let chi = radial_cutoff(grid, p, i0, o0);
    let (r11, eta) = build_r11(&b, phase, h, &chi, &chi1)?;
    let r12 = build_r12(&b, phase, &chi1)?;
    let r1 = &r11 + &r12.scale(Complex64::new(h, 0.0));
    let forcing = conjugated_residual(&r12, &eta, &r1, &v, cfg.lambda, h)?;

    let rho = cfg.domain_radius.min(o0);
    let domain = radial_cutoff(grid, p, rho, rho + 0.25 * (o0 - rho).max(0.2));
    let buffer_outer = (rho + 0.6 * (o0 - rho).max(0.3)).min(TAPER_FLAT_FRACTION * grid.half_width() - p.norm());
    let buffer = radial_cutoff(grid, p, rho + 0.3 * (o0 - rho).max(0.25), buffer_outer);
    let solve = build_r2(&v, cfg.lambda, phase, h, &forcing, &domain, &buffer)?;
    let r2 = solve.r2;

    let degree = a.numerator().degree().unwrap_or(0) as f64;
    let j_weight = degree + 1.5;
    let xj = |z: Complex64| x_function(z).powf(j_weight);
    let inside = Field::from_real_fn(grid, |z| if (z - p).norm() <= rho { 1.0 } else { 0.0 });
    let interior_radius = 0.75 * grid.half_width();
    let interior = Field::from_real_fn(grid, |z| if z.norm() <= interior_radius { 1.0 } else { 0.0 });
    let r12_global = build_r12_global(&b, phase)?;
    let diff = &r1 - &r12_global.scale(Complex64::new(h, 0.0));
    // `a` is holomorphic, so `L_h a = (V − λ²)a` exactly.
    let l2 = cfg.lambda * cfg.lambda;
    let la = v.map(|z, vv| (vv - l2) * a.eval(z).unwrap_or_default());
    let pde = &la + &apply_conjugated(&(&r1 + &r2), &v, cfg.lambda, phase, h)?;
    let a_scale = weighted_l2(&Field::from_fn(grid, |z| a.eval(z).unwrap_or_default()), |_| 1.0, Some(&inside));
    let eps = cfg.eps;

    let mut norms = BTreeMap::new();
    norms.insert("xJ_r1".to_string(), weighted_l2(&r1, xj, None));
    norms.insert("xJ_r1_minus_h_r12tilde".to_string(), weighted_l2(&diff, xj, None));
    norms.insert("eta_H1".to_string(), h1_norm(&eta));
    norms.insert("xJ_dr12".to_string(), weighted_l2(&ddz(&r12), xj, Some(&interior)));
    norms.insert("conjugated_residual".to_string(), weighted_l2(&forcing, xj, Some(&interior)));
    norms.insert("weighted_r2".to_string(), weighted_l2(&r2, |z| (-0.25 * z.norm_sqr() / eps).exp(), Some(&inside)));
    norms.insert("pde_residual_relative".to_string(), weighted_l2(&pde, |_| 1.0, Some(&inside)) / a_scale);
    norms.insert("r2_solver_residual".to_string(), solve.relative_residual);

    Ok(CgoSolution {
        h,
        lambda: cfg.lambda,
        phase: phase.clone(),
        a,
        omega,
        b,
        r11,
        r12,
        eta,
        r2,
        chi,
        chi1,
        domain: inside,
        weight_order: j_weight,
        norms,
        r2_iterations: solve.iterations,
    })
}
