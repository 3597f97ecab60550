//! Fixed-frequency scattering on the plane.
//!
//! Conventions. For signed `λ` the scattering data `f₊` (resp. `f₋`) is the
//! coefficient of `r^{-1/2} e^{iλr}` (resp. `e^{−iλr}`) per angular mode
//! `e^{imθ}`. Writing a field outside the support of `V` as
//! `Σ (α_m H_m^(1)(|λ|r) + β_m H_m^(2)(|λ|r)) e^{imθ}` and
//! `θ_m = mπ/2 + π/4`, the large-argument asymptotics give, for `λ > 0`,
//!
//! `f₊,m = α_m √(2/πλ) e^{−iθ_m}`,  `f₋,m = β_m √(2/πλ) e^{iθ_m}`,
//!
//! and the roles of `α` and `β` swap for `λ < 0`. `P_V(λ)` keeps the
//! `e^{iλr}` part fixed, so for `λ > 0` the scattered field is built with
//! the incoming resolvent and for `λ < 0` with the outgoing one. For `V = 0`
//! this yields `S = diag(i(−1)^m)`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fieldops::{helmholtz_resolvent, positive_laplacian, Field, Radiation};
use crate::krylov::{gmres, GmresOptions};
use crate::special::{bessel_j, hankel1, hankel2};

/// Angular-mode coefficients `m = −M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector {
    m_max: usize,
    coeffs: Vec<Complex64>,
}

impl ModeVector {
    pub fn zeros(m_max: usize) -> Self {
        Self { m_max, coeffs: vec![Complex64::default(); 2 * m_max + 1] }
    }

    pub fn unit(m_max: usize, m: i64) -> Self {
        let mut v = Self::zeros(m_max);
        v.set(m, Complex64::new(1.0, 0.0));
        v
    }

    pub fn from_coeffs(m_max: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * m_max + 1 {
            return Err(Error::invalid("mode vector length must be 2M+1"));
        }
        Ok(Self { m_max, coeffs })
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn get(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.m_max {
            return Complex64::default();
        }
        self.coeffs[(m + self.m_max as i64) as usize]
    }

    pub fn set(&mut self, m: i64, v: Complex64) {
        assert!(m.unsigned_abs() as usize <= self.m_max, "mode {m} outside ±{}", self.m_max);
        self.coeffs[(m + self.m_max as i64) as usize] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &c)| (i as i64 - self.m_max as i64, c))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Pairing on the boundary circle with measure `dθ`: `2π Σ a_m conj(b_m)`.
    pub fn inner(&self, other: &ModeVector) -> Complex64 {
        let m = self.m_max.max(other.m_max) as i64;
        (-m..=m).map(|k| self.get(k) * other.get(k).conj()).sum::<Complex64>() * (2.0 * PI)
    }

    pub fn sub(&self, other: &ModeVector) -> ModeVector {
        let m = self.m_max.max(other.m_max);
        let coeffs = (-(m as i64)..=m as i64).map(|k| self.get(k) - other.get(k)).collect();
        ModeVector { m_max: m, coeffs }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn theta_m(m: i64) -> f64 {
    m as f64 * PI / 2.0 + PI / 4.0
}

/// Free resolvent `(Δ − λ²)^{-1}` with outgoing kernel `(i/4)H_0^(1)(λ|z|)`.
pub fn free_resolvent_apply(f: &Field, lambda: f64) -> Result<Field> {
    helmholtz_resolvent(f, lambda, Radiation::Outgoing)
}

/// Free generalised eigenfunction with data `f₊` at signed frequency `λ`.
pub fn free_field(grid: crate::fieldops::Grid, lambda: f64, f_plus: &ModeVector) -> Field {
    Field::from_fn(grid, |z| free_value(z, lambda, f_plus))
}

fn free_value(z: Complex64, lambda: f64, f_plus: &ModeVector) -> Complex64 {
    let k = lambda.abs();
    let sign = lambda.signum();
    let (r, th) = (z.norm(), z.arg());
    f_plus
        .iter()
        .filter(|(_, c)| *c != Complex64::default())
        .map(|(m, c)| {
            let cm = Complex64::from_polar((2.0 * PI * k).sqrt(), sign * theta_m(m));
            c * cm * bessel_j(m, k * r) * Complex64::from_polar(1.0, m as f64 * th)
        })
        .sum()
}

fn radiation_for(lambda: f64) -> Radiation {
    if lambda > 0.0 {
        Radiation::Incoming
    } else {
        Radiation::Outgoing
    }
}

fn kernel_value(lambda: f64, r: f64) -> Complex64 {
    let k = lambda.abs();
    if lambda > 0.0 {
        Complex64::new(0.0, -0.25) * hankel2(0, k * r)
    } else {
        Complex64::new(0.0, 0.25) * hankel1(0, k * r)
    }
}

/// Options for the Lippmann–Schwinger solves.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringOptions {
    pub gmres: GmresOptions,
    /// Width of the annulus `[R_m, R_m + Δr]` used for mode matching.
    pub radial_width: f64,
    /// Number of circles in the annulus.
    pub circles: usize,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        Self {
            gmres: GmresOptions { tol: 1e-11, restart: 60, max_iterations: 600 },
            radial_width: 1.0,
            circles: 4,
        }
    }
}

/// Total field `P_V(λ) f₊` on the grid plus the source `V u` that generates its scattered part.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    lambda: f64,
    f_plus: ModeVector,
    total: Field,
    sources: Vec<(Complex64, Complex64)>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solve `(I + R(λ)V) u = u₀` for the Poisson operator at signed frequency `λ`.
pub fn poisson_operator(v: &Field, lambda: f64, f_plus: &ModeVector) -> Result<PoissonSolution> {
    poisson_operator_with(v, lambda, f_plus, ScatteringOptions::default())
}

pub fn poisson_operator_with(
    v: &Field,
    lambda: f64,
    f_plus: &ModeVector,
    opts: ScatteringOptions,
) -> Result<PoissonSolution> {
    if !(lambda.is_finite() && lambda != 0.0) {
        return Err(Error::invalid(format!("scattering needs real λ ≠ 0, got {lambda}")));
    }
    let grid = v.grid();
    let radiation = radiation_for(lambda);
    let k = lambda.abs();
    let u0 = free_field(grid, lambda, f_plus);
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        let vx: Vec<Complex64> = x.iter().zip(v.values()).map(|(a, b)| a * b).collect();
        let r = helmholtz_resolvent(&Field::from_raw(grid, vx), k, radiation)
            .expect("source support checked before the solve");
        x.iter().zip(r.values()).map(|(a, b)| a + b).collect()
    };
    let support_check = v.zip_map(&u0, |_, a, b| a * b)?;
    let fraction = crate::fieldops::tail_fraction(&support_check);
    if fraction > crate::fieldops::DEFAULT_TAIL_THRESHOLD {
        return Err(Error::TailMass { fraction, threshold: crate::fieldops::DEFAULT_TAIL_THRESHOLD });
    }
    let out = gmres(apply, u0.values(), opts.gmres);
    if !out.converged {
        return Err(Error::NonConvergence {
            what: "Lippmann–Schwinger solve (possible near-resonance)".into(),
            residual: out.relative_residual,
        });
    }
    let total = Field::from_raw(grid, out.solution);
    let sources = collect_sources(v, &total);
    Ok(PoissonSolution {
        lambda,
        f_plus: f_plus.clone(),
        total,
        sources,
        iterations: out.iterations,
        relative_residual: out.relative_residual,
    })
}

fn collect_sources(v: &Field, u: &Field) -> Vec<(Complex64, Complex64)> {
    let grid = v.grid();
    let s: Vec<Complex64> = v.values().iter().zip(u.values()).map(|(a, b)| a * b).collect();
    let cutoff = 1e-16 * s.iter().fold(0.0, |m: f64, x| m.max(x.norm()));
    s.iter()
        .enumerate()
        .filter(|(_, x)| x.norm() > cutoff)
        .map(|(idx, &x)| (grid.point_at(idx), x * grid.quadrature_weight(idx)))
        .collect()
}

/// Born approximation `u₀ − R(λ)(V u₀)`.
pub fn born_approximation(v: &Field, lambda: f64, f_plus: &ModeVector) -> Result<Field> {
    let u0 = free_field(v.grid(), lambda, f_plus);
    let vu = v.zip_map(&u0, |_, a, b| a * b)?;
    let r = helmholtz_resolvent(&vu, lambda.abs(), radiation_for(lambda))?;
    Ok(&u0 - &r)
}

impl PoissonSolution {
    pub fn total(&self) -> &Field {
        &self.total
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Field value anywhere in the plane: free part plus direct quadrature of the scattered part.
    pub fn value_at(&self, z: Complex64) -> Complex64 {
        let scattered: Complex64 = self
            .sources
            .iter()
            .map(|&(xi, s)| kernel_value(self.lambda, (z - xi).norm()) * s)
            .sum();
        free_value(z, self.lambda, &self.f_plus) - scattered
    }

    /// Radius outside which the source is below `1e-12` of its peak.
    pub fn source_radius(&self) -> f64 {
        let cutoff = 1e-12 * self.sources.iter().fold(0.0, |m: f64, (_, s)| m.max(s.norm()));
        self.sources.iter().filter(|(_, s)| s.norm() > cutoff).fold(0.0, |m, (z, _)| m.max(z.norm()))
    }

    pub fn far_field(&self, match_radius: f64, m_max: usize) -> Result<FarFieldDecomposition> {
        self.far_field_with(match_radius, m_max, ScatteringOptions::default())
    }

    pub fn far_field_with(&self, match_radius: f64, m_max: usize, opts: ScatteringOptions) -> Result<FarFieldDecomposition> {
        if match_radius <= self.source_radius() {
            return Err(Error::precondition(format!(
                "match radius {match_radius} inside source radius {:.3}",
                self.source_radius()
            )));
        }
        FarFieldDecomposition::fit(self.lambda, match_radius, m_max, opts, |z| self.value_at(z))
    }
}

/// Hankel-pair coefficients fitted on circles `r ∈ [R_m, R_m + Δr]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldDecomposition {
    pub lambda: f64,
    pub match_radius: f64,
    pub radial_width: f64,
    pub alpha: ModeVector,
    pub beta: ModeVector,
    /// Per-mode least-squares residual, relative to the largest mode amplitude.
    pub fit_residual: Vec<f64>,
}

impl FarFieldDecomposition {
    fn fit<F>(lambda: f64, match_radius: f64, m_max: usize, opts: ScatteringOptions, eval: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let k = lambda.abs();
        let n_theta = (4 * (m_max + 1)).next_power_of_two().max(64);
        let circles = opts.circles.max(2);
        let radii: Vec<f64> = (0..circles)
            .map(|j| match_radius + opts.radial_width * j as f64 / (circles - 1) as f64)
            .collect();
        let samples: Vec<Vec<Complex64>> = radii
            .iter()
            .map(|&r| {
                (0..n_theta)
                    .into_par_iter()
                    .map(|l| eval(Complex64::from_polar(r, 2.0 * PI * l as f64 / n_theta as f64)))
                    .collect()
            })
            .collect();
        let mut alpha = ModeVector::zeros(m_max);
        let mut beta = ModeVector::zeros(m_max);
        let mut residual = Vec::with_capacity(2 * m_max + 1);
        let mut raw = Vec::with_capacity(2 * m_max + 1);
        for m in -(m_max as i64)..=m_max as i64 {
            let b: Vec<Complex64> = samples
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(l, u)| u * Complex64::from_polar(1.0, -(m as f64) * 2.0 * PI * l as f64 / n_theta as f64))
                        .sum::<Complex64>()
                        / n_theta as f64
                })
                .collect();
            let a = DMatrix::from_fn(circles, 2, |j, c| {
                if c == 0 {
                    hankel1(m, k * radii[j])
                } else {
                    hankel2(m, k * radii[j])
                }
            });
            let rhs = DVector::from_vec(b.clone());
            let svd = a.clone().svd(true, true);
            let x = svd.solve(&rhs, 1e-14).map_err(|e| Error::invalid(e.to_string()))?;
            alpha.set(m, x[0]);
            beta.set(m, x[1]);
            let res = (&a * &x - &rhs).norm();
            raw.push((res, rhs.norm()));
        }
        let scale = raw.iter().fold(0.0, |m: f64, (_, b)| m.max(*b)).max(f64::MIN_POSITIVE);
        residual.extend(raw.iter().map(|(r, _)| r / scale));
        Ok(Self { lambda, match_radius, radial_width: opts.radial_width, alpha, beta, fit_residual: residual })
    }

    /// Decompose a grid field by interpolating it on the matching circles.
    pub fn from_field(field: &Field, lambda: f64, match_radius: f64, m_max: usize) -> Result<Self> {
        let opts = ScatteringOptions::default();
        let grid = field.grid();
        let reach = match_radius + opts.radial_width;
        if reach > grid.half_width() - 3.0 * grid.spacing() {
            return Err(Error::precondition("matching circles leave the window"));
        }
        Self::fit(lambda, match_radius, m_max, opts, |z| field.interpolate(z))
    }

    fn conversion(&self) -> f64 {
        (2.0 / (PI * self.lambda.abs())).sqrt()
    }

    /// Coefficients of `r^{-1/2} e^{iλr}`, the data `f₊`.
    pub fn f_plus(&self) -> ModeVector {
        self.asymptotic(true)
    }

    /// Coefficients of `r^{-1/2} e^{−iλr}`, the data `f₋`.
    pub fn f_minus(&self) -> ModeVector {
        self.asymptotic(false)
    }

    fn asymptotic(&self, plus: bool) -> ModeVector {
        let c = self.conversion();
        let m_max = self.alpha.m_max();
        let mut out = ModeVector::zeros(m_max);
        // e^{i|λ|r} comes from H^(1); for λ < 0 that is the e^{−iλr} part.
        let use_h1 = plus == (self.lambda > 0.0);
        for m in -(m_max as i64)..=m_max as i64 {
            let v = if use_h1 {
                self.alpha.get(m) * Complex64::from_polar(c, -theta_m(m))
            } else {
                self.beta.get(m) * Complex64::from_polar(c, theta_m(m))
            };
            out.set(m, v);
        }
        out
    }

    pub fn max_fit_residual(&self) -> f64 {
        self.fit_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Scattering matrix on the modes `|m| ≤ M`; `entries[(m' + M)(2M+1) + m + M] = S_{m'm}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    pub lambda: f64,
    pub m_max: usize,
    pub match_radius: f64,
    pub grid_n: usize,
    pub grid_half_width: f64,
    entries: Vec<Complex64>,
    /// Largest outgoing amplitude leaking into `M < |m'| ≤ M + 4`.
    pub tail_norm: f64,
    pub max_fit_residual: f64,
    /// Largest deviation of the reconstructed `f₊` from the prescribed unit mode.
    pub incoming_defect: f64,
}

impl ScatteringMatrix {
    pub fn dim(&self) -> usize {
        2 * self.m_max + 1
    }

    pub fn entry(&self, m_out: i64, m_in: i64) -> Complex64 {
        let d = self.dim();
        let o = (m_out + self.m_max as i64) as usize;
        let i = (m_in + self.m_max as i64) as usize;
        self.entries[o * d + i]
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| self.entries[r * d + c])
    }

    pub fn apply(&self, f: &ModeVector) -> ModeVector {
        let m = self.m_max as i64;
        let mut out = ModeVector::zeros(self.m_max);
        for mo in -m..=m {
            out.set(mo, (-m..=m).map(|mi| self.entry(mo, mi) * f.get(mi)).sum());
        }
        out
    }

    /// Spectral norm of `S*S − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let s = self.to_matrix();
        let d = self.dim();
        let g = s.adjoint() * &s - DMatrix::<Complex64>::identity(d, d);
        g.singular_values().iter().copied().fold(0.0, f64::max)
    }

    /// CSV with `#`-prefixed metadata lines and columns `m,m_prime,re,im`
    /// where `m` is the incident mode and `m_prime` the outgoing mode.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# lambda={}", self.lambda)?;
        writeln!(out, "# m_max={}", self.m_max)?;
        writeln!(out, "# match_radius={}", self.match_radius)?;
        writeln!(out, "# grid_n={}", self.grid_n)?;
        writeln!(out, "# grid_half_width={}", self.grid_half_width)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "m_prime", "re", "im"])?;
        let m = self.m_max as i64;
        for mi in -m..=m {
            for mo in -m..=m {
                let v = self.entry(mo, mi);
                w.write_record([mi.to_string(), mo.to_string(), format!("{:.15e}", v.re), format!("{:.15e}", v.im)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest radius at which `|V| > 1e-12 max|V|` on the grid.
pub fn support_radius(v: &Field) -> f64 {
    let cutoff = 1e-12 * v.max_abs();
    let grid = v.grid();
    v.values()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.norm() > cutoff)
        .fold(0.0, |m, (idx, _)| m.max(grid.point_at(idx).norm()))
}

/// Columns `S e_m` read from the far field of `P_V(λ) e_m`.
pub fn extract_s_matrix(v: &Field, lambda: f64, m_max: usize, match_radius: f64) -> Result<ScatteringMatrix> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("scattering matrix needs λ > 0"));
    }
    let support = support_radius(v);
    if match_radius <= support {
        return Err(Error::precondition(format!("match radius {match_radius} inside support radius {support:.3}")));
    }
    const EXTRA: usize = 4;
    let m = m_max as i64;
    let columns: Vec<Result<(ModeVector, ModeVector, f64)>> = (-m..=m)
        .into_par_iter()
        .map(|mi| {
            let sol = poisson_operator(v, lambda, &ModeVector::unit(m_max, mi))?;
            let ff = sol.far_field(match_radius, m_max + EXTRA)?;
            Ok((ff.f_minus(), ff.f_plus(), ff.max_fit_residual()))
        })
        .collect();
    let d = 2 * m_max + 1;
    let mut entries = vec![Complex64::default(); d * d];
    let (mut tail, mut fit, mut defect) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (col, res) in columns.into_iter().enumerate() {
        let (fm, fp, r) = res?;
        let mi = col as i64 - m;
        for mo in -m..=m {
            entries[(mo + m) as usize * d + col] = fm.get(mo);
        }
        let leak = (m + 1..=m + EXTRA as i64).map(|k| fm.get(k).norm_sqr() + fm.get(-k).norm_sqr()).sum::<f64>();
        tail = tail.max(leak.sqrt());
        fit = fit.max(r);
        let want = ModeVector::unit(m_max + EXTRA, mi);
        defect = defect.max(fp.sub(&want).norm());
    }
    const FIT_TOL: f64 = 1e-6;
    if fit > FIT_TOL {
        return Err(Error::NonConvergence { what: "far-field mode fit".into(), residual: fit });
    }
    let grid = v.grid();
    Ok(ScatteringMatrix {
        lambda,
        m_max,
        match_radius,
        grid_n: grid.n(),
        grid_half_width: grid.half_width(),
        entries,
        tail_norm: tail,
        max_fit_residual: fit,
        incoming_defect: defect,
    })
}

/// Interior pairing and its boundary expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPairing {
    /// `⟨u₊, P u₋⟩ − ⟨P u₊, u₋⟩` over `|z| < R`.
    pub volume: Complex64,
    /// `2iλ ∮ (f₊₊ conj f₋₊ − f₊₋ conj f₋₋) dθ`.
    pub circle: Complex64,
}

/// Green's identity for `P = Δ + V − λ²` on the disk of radius `r`.
pub fn boundary_pairing(u_plus: &Field, u_minus: &Field, v: &Field, lambda: f64, r: f64) -> Result<BoundaryPairing> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("boundary pairing needs λ > 0"));
    }
    let grid = u_plus.grid();
    grid.same_as(&u_minus.grid())?;
    grid.same_as(&v.grid())?;
    if r > crate::fieldops::TAPER_FLAT_FRACTION * grid.half_width() {
        return Err(Error::precondition("pairing disk reaches the window taper"));
    }
    let l2 = lambda * lambda;
    let pu = |u: &Field| -> Result<Field> {
        let lap = positive_laplacian(u);
        let vu = v.zip_map(u, |_, a, b| (a - l2) * b)?;
        Ok(&lap + &vu)
    };
    let pp = pu(u_plus)?;
    let pm = pu(u_minus)?;
    let mut volume = Complex64::default();
    for idx in 0..grid.len() {
        if grid.point_at(idx).norm() < r {
            let w = grid.quadrature_weight(idx);
            volume += (u_plus.values()[idx] * pm.values()[idx].conj() - pp.values()[idx] * u_minus.values()[idx].conj()) * w;
        }
    }
    let m_max = ((lambda * (r + 1.0)).ceil() as usize + 12).min(60);
    let dp = FarFieldDecomposition::from_field(u_plus, lambda, r, m_max)?;
    let dm = FarFieldDecomposition::from_field(u_minus, lambda, r, m_max)?;
    let circle = Complex64::new(0.0, 2.0 * lambda)
        * (dp.f_plus().inner(&dm.f_plus()) - dp.f_minus().inner(&dm.f_minus()));
    Ok(BoundaryPairing { volume, circle })
}

/// Both sides of `∫(V₁ − V₂) u₁ ū₂ = −2iλ ⟨(S₁ − S₂) f₁, f₂⟩`,
/// with `u₁ = P_{V₁}(λ) f₁` and `u₂ = P_{V₂}(−λ) f₂`.
pub fn scattering_difference_identity(
    v1: &Field,
    v2: &Field,
    lambda: f64,
    f1: &ModeVector,
    f2: &ModeVector,
) -> Result<(Complex64, Complex64)> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("identity needs λ > 0"));
    }
    v1.grid().same_as(&v2.grid())?;
    let u1 = poisson_operator(v1, lambda, f1)?;
    let u2 = poisson_operator(v2, -lambda, f2)?;
    let w = v1 - v2;
    let lhs = w.zip_map(u1.total(), |_, a, b| a * b)?.inner(u2.total())?;

    let u1b = poisson_operator(v2, lambda, f1)?;
    let radius = support_radius(v1).max(support_radius(v2)) + 1.0;
    let m_out = f1.m_max().max(f2.m_max()) + 8;
    let s1f = u1.far_field(radius, m_out)?.f_minus();
    let s2f = u1b.far_field(radius, m_out)?.f_minus();
    let rhs = Complex64::new(0.0, -2.0 * lambda) * s1f.sub(&s2f).inner(f2);
    Ok((lhs, rhs))
}

/// Least-squares fit residuals of a target by `span{P_V(λ)e_m : |m| ≤ M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFit {
    pub m_values: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Whether singular values were truncated at a given `M`.
    pub regularized: Vec<bool>,
}

/// Fit `u_target` on the disk `|z − center| < radius` for every `M = 0..=m_max`.
pub fn density_proxy_fit(
    u_target: &Field,
    v: &Field,
    lambda: f64,
    m_max: usize,
    center: Complex64,
    radius: f64,
) -> Result<DensityFit> {
    u_target.grid().same_as(&v.grid())?;
    let grid = v.grid();
    let idx: Vec<usize> = (0..grid.len()).filter(|&i| (grid.point_at(i) - center).norm() < radius).collect();
    if idx.is_empty() {
        return Err(Error::invalid("empty fitting disk"));
    }
    let m = m_max as i64;
    let columns: Vec<Result<Vec<Complex64>>> = (-m..=m)
        .into_par_iter()
        .map(|mi| {
            let sol = poisson_operator(v, lambda, &ModeVector::unit(m_max, mi))?;
            Ok(idx.iter().map(|&i| sol.total().values()[i]).collect())
        })
        .collect();
    let columns: Vec<Vec<Complex64>> = columns.into_iter().collect::<Result<_>>()?;
    let b = DVector::from_iterator(idx.len(), idx.iter().map(|&i| u_target.values()[i]));
    let bnorm = b.norm();
    let mut fit = DensityFit { m_values: Vec::new(), residuals: Vec::new(), regularized: Vec::new() };
    for mm in 0..=m_max {
        let cols: Vec<&Vec<Complex64>> = (-(mm as i64)..=mm as i64).map(|k| &columns[(k + m) as usize]).collect();
        // Unit columns: high modes are tiny on a small disk but not dependent.
        let scales: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE)).collect();
        let a = DMatrix::from_fn(idx.len(), cols.len(), |r, c| cols[c][r] / scales[c]);
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let eps = 1e-12 * smax;
        let regularized = svd.singular_values.iter().any(|&s| s < eps);
        let x = svd.solve(&b, eps).map_err(|e| Error::invalid(e.to_string()))?;
        let res = (&a * &x - &b).norm() / bnorm.max(f64::MIN_POSITIVE);
        fit.m_values.push(mm);
        fit.residuals.push(res);
        fit.regularized.push(regularized);
    }
    Ok(fit)
}
