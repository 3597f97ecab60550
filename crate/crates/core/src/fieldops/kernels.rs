//! Aperiodic convolution with truncated free-space kernels.
//!
//! For a kernel `k` truncated at radius `D` (larger than the window
//! diameter) the Fourier transform is an entire function known in closed
//! form. Sampling it on a grid three times finer in frequency than the
//! window and transforming back yields exact kernel values at every sample
//! offset, which are then used in a zero-padded `2n` circular convolution.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::{fft2, Direction};
use super::grid::{Field, Grid};
use super::spectral::{spectral_frequencies, taper_1d};
use crate::error::{Error, Result};
use crate::special::{bessel_j, hankel1};

/// Largest tolerated `‖(1 − taper)F‖ / ‖F‖` before a transform refuses input.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-6;

/// Radiation condition of the Helmholtz resolvent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Radiation {
    /// Kernel `(i/4) H_0^(1)(λ|z|)`.
    Outgoing,
    /// Kernel `−(i/4) H_0^(2)(λ|z|)`.
    Incoming,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    /// `1/(π z̄)`, right inverse of `∂_z`.
    Cauchy,
    /// `1/(π z)`, right inverse of `∂_z̄`.
    ConjCauchy,
    /// `−(1/2π) log|z|`, right inverse of the positive Laplacian.
    Log,
    Helmholtz(f64, Radiation),
}

type Key = (u8, usize, u64, u64);

impl Kernel {
    fn key(&self, grid: Grid) -> Key {
        let (tag, extra) = match *self {
            Kernel::Cauchy => (0, 0),
            Kernel::ConjCauchy => (1, 0),
            Kernel::Log => (2, 0),
            Kernel::Helmholtz(l, Radiation::Outgoing) => (3, l.to_bits()),
            Kernel::Helmholtz(l, Radiation::Incoming) => (4, l.to_bits()),
        };
        (tag, grid.n(), grid.half_width().to_bits(), extra)
    }

    fn transform(&self, xi1: f64, xi2: f64, d: f64) -> Complex64 {
        let rho = xi1.hypot(xi2);
        match *self {
            Kernel::Cauchy | Kernel::ConjCauchy => {
                if rho == 0.0 {
                    return Complex64::default();
                }
                let s = if matches!(self, Kernel::Cauchy) { 1.0 } else { -1.0 };
                let radial = (1.0 - bessel_j(0, rho * d)) / (rho * rho);
                Complex64::new(0.0, -2.0) * Complex64::new(xi1, s * xi2) * radial
            }
            Kernel::Log => {
                if rho == 0.0 {
                    return Complex64::new(d * d / 4.0 - d * d * d.ln() / 2.0, 0.0);
                }
                let v = (1.0 - bessel_j(0, rho * d)) / (rho * rho)
                    - d * d.ln() * bessel_j(1, rho * d) / rho;
                Complex64::new(v, 0.0)
            }
            Kernel::Helmholtz(lambda, radiation) => {
                let v = helmholtz_transform(rho, lambda, d);
                match radiation {
                    Radiation::Outgoing => v,
                    Radiation::Incoming => v.conj(),
                }
            }
        }
    }
}

fn helmholtz_direct(rho: f64, lambda: f64, d: f64) -> Complex64 {
    let h0 = hankel1(0, lambda * d);
    let h1 = hankel1(1, lambda * d);
    let inner = lambda * h1 * bessel_j(0, rho * d) - rho * h0 * bessel_j(1, rho * d);
    let num = Complex64::new(1.0, 0.0) - Complex64::new(0.0, PI * d / 2.0) * inner;
    num / (rho * rho - lambda * lambda)
}

fn helmholtz_transform(rho: f64, lambda: f64, d: f64) -> Complex64 {
    const SHELL: f64 = 1e-3;
    if (rho - lambda).abs() >= SHELL {
        return helmholtz_direct(rho, lambda, d);
    }
    // Removable singularity on the sphere: Richardson-corrected central average.
    let step = 4.0 * SHELL;
    let avg = |h: f64| 0.5 * (helmholtz_direct(rho + h, lambda, d) + helmholtz_direct(rho - h, lambda, d));
    (4.0 * avg(0.5 * step) - avg(step)) / 3.0
}

fn build_spectrum(grid: Grid, kernel: Kernel) -> Vec<Complex64> {
    let n = grid.n();
    let d = grid.spacing();
    let truncation = 2.0 * SQRT_2 * grid.half_width() + 2.0 * d;
    let m = 3 * n;
    let xi = spectral_frequencies(m, d);

    let mut fine: Vec<Complex64> = vec![Complex64::default(); m * m];
    fine.par_chunks_mut(m).enumerate().for_each(|(a, row)| {
        for (b, v) in row.iter_mut().enumerate() {
            *v = kernel.transform(xi[a], xi[b], truncation);
        }
    });
    fft2(&mut fine, m, Direction::Inverse);
    let norm = 1.0 / ((m * m) as f64 * d * d);

    let p = 2 * n;
    let mut padded = vec![Complex64::default(); p * p];
    let wrap = |o: isize, len: usize| o.rem_euclid(len as isize) as usize;
    for oi in -(n as isize - 1)..=(n as isize - 1) {
        for ok in -(n as isize - 1)..=(n as isize - 1) {
            padded[wrap(oi, p) * p + wrap(ok, p)] = fine[wrap(oi, m) * m + wrap(ok, m)] * norm;
        }
    }
    fft2(&mut padded, p, Direction::Forward);
    let scale = d * d / (p * p) as f64;
    padded.par_iter_mut().for_each(|v| *v *= scale);
    padded
}

fn spectrum(grid: Grid, kernel: Kernel) -> Arc<Vec<Complex64>> {
    const CACHE_CAPACITY: usize = 12;
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<Complex64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = kernel.key(grid);
    if let Some(s) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Arc::clone(s);
    }
    let built = Arc::new(build_spectrum(grid, kernel));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if guard.len() >= CACHE_CAPACITY {
        guard.clear();
    }
    Arc::clone(guard.entry(key).or_insert(built))
}

/// `‖(1 − taper)F‖ / ‖F‖`, zero for the zero field.
pub fn tail_fraction(f: &Field) -> f64 {
    let grid = f.grid();
    let r = grid.half_width();
    let (mut outside, mut total) = (0.0, 0.0);
    for (idx, v) in f.values().iter().enumerate() {
        let z = grid.point_at(idx);
        let t = taper_1d(z.re, r) * taper_1d(z.im, r);
        total += v.norm_sqr();
        outside += ((1.0 - t) * v.norm()).powi(2);
    }
    if total == 0.0 {
        0.0
    } else {
        (outside / total).sqrt()
    }
}

fn convolve(f: &Field, kernel: Kernel) -> Result<Field> {
    let fraction = tail_fraction(f);
    if fraction > DEFAULT_TAIL_THRESHOLD {
        return Err(Error::TailMass { fraction, threshold: DEFAULT_TAIL_THRESHOLD });
    }
    let grid = f.grid();
    let n = grid.n();
    let p = 2 * n;
    let spec = spectrum(grid, kernel);
    let mut buf = vec![Complex64::default(); p * p];
    for i in 0..n {
        buf[i * p..i * p + n].copy_from_slice(&f.values()[i * n..(i + 1) * n]);
    }
    fft2(&mut buf, p, Direction::Forward);
    buf.par_iter_mut().zip(spec.par_iter()).for_each(|(v, s)| *v *= s);
    fft2(&mut buf, p, Direction::Inverse);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.extend_from_slice(&buf[i * p..i * p + n]);
    }
    Ok(Field::from_raw(grid, out))
}

/// Cauchy transform `R F = (1/π) ∫ F(ξ)/(z̄ − ξ̄) dA(ξ)`, with `∂_z R = Id`.
pub fn cauchy_transform(f: &Field) -> Result<Field> {
    convolve(f, Kernel::Cauchy)
}

/// Conjugate Cauchy transform `(1/π) ∫ F(ξ)/(z − ξ) dA(ξ)`, with `∂_z̄ R̄ = Id`.
pub fn conj_cauchy_transform(f: &Field) -> Result<Field> {
    convolve(f, Kernel::ConjCauchy)
}

/// Logarithmic potential `−(1/2π) ∫ log|z − ξ| F(ξ) dA(ξ)`, with `Δ G = Id`.
pub fn green_laplace(f: &Field) -> Result<Field> {
    convolve(f, Kernel::Log)
}

/// Free resolvent `(Δ − λ²)^{-1}` with the given radiation condition.
pub fn helmholtz_resolvent(f: &Field, lambda: f64, radiation: Radiation) -> Result<Field> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("resolvent needs λ > 0, got {lambda}")));
    }
    convolve(f, Kernel::Helmholtz(lambda, radiation))
}
