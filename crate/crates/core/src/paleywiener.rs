//! Fourier transforms of Gaussian-class functions at complex frequencies, and
//! division by the symbol `|ξ|² − λ²` of functions whose transform vanishes on
//! the sphere `|ξ| = λ`.
//!
//! Convention: `f̂(ξ) = ∫ e^{−ix·ξ} f(x) dx`, so `f̂(ξ + iη)` is the transform of
//! `e^{η·x} f` and `e^{−|x|²}` maps to `π e^{−|ξ|²/4}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fieldops::{
    fft2, positive_laplacian, spectral_frequencies, tail_fraction, weighted_norm, Direction, Field, Grid, NormOrder,
    WeightSpec, DEFAULT_TAIL_THRESHOLD, TAPER_FLAT_FRACTION,
};

/// `f̂(ξ + iη)` on the DFT frequency lattice of the source grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFrequencySlice {
    pub eta: [f64; 2],
    pub gamma: f64,
    /// Frequencies along each axis, in DFT order.
    pub frequencies: Vec<f64>,
    /// Row-major samples, `values[a * n + b] = f̂(ξ_a + iη₁, ξ_b + iη₂)`.
    pub values: Vec<Complex64>,
    /// `‖e^{γ|z|²} f‖_{L²}`.
    pub weighted_l2: f64,
    /// `‖e^{γ|z|²} f‖_{L¹}`.
    pub weighted_l1: f64,
}

impl ComplexFrequencySlice {
    pub fn n(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequency_spacing(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }

    pub fn value(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.n() + b]
    }

    pub fn l2_norm(&self) -> f64 {
        let d = self.frequency_spacing();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * d * d).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    fn growth(&self) -> f64 {
        ((self.eta[0].powi(2) + self.eta[1].powi(2)) / (4.0 * self.gamma)).exp()
    }

    /// `‖f̂(·+iη)‖₂ / (2π e^{|η|²/4γ} ‖e^{γ|z|²}f‖₂)`; at most 1.
    pub fn bound_ratio(&self) -> f64 {
        if self.weighted_l2 == 0.0 {
            return 0.0;
        }
        self.l2_norm() / (TAU * self.growth() * self.weighted_l2)
    }

    /// `sup|f̂(·+iη)| / (e^{|η|²/4γ} ‖e^{γ|z|²}f‖₁)`; at most 1.
    pub fn sup_ratio(&self) -> f64 {
        if self.weighted_l1 == 0.0 {
            return 0.0;
        }
        self.sup_norm() / (self.growth() * self.weighted_l1)
    }
}

/// Samples of `f̂` on a lattice refined by zero padding, with the padded length.
fn padded_transform(f: &Field, pad: usize) -> (Vec<Complex64>, usize, Vec<f64>) {
    let grid = f.grid();
    let n = grid.n();
    let big = n * pad;
    let d = grid.spacing();
    let r = grid.half_width();
    let mut data = vec![Complex64::default(); big * big];
    for i in 0..n {
        data[i * big..i * big + n].copy_from_slice(&f.values()[i * n..(i + 1) * n]);
    }
    fft2(&mut data, big, Direction::Forward);
    let xi = spectral_frequencies(big, d);
    data.par_chunks_mut(big).enumerate().for_each(|(a, row)| {
        for (b, v) in row.iter_mut().enumerate() {
            *v *= Complex64::from_polar(d * d, r * (xi[a] + xi[b]));
        }
    });
    (data, big, xi)
}

/// `f̂(ξ + iη)` on the DFT lattice, from the FFT of `e^{η·z} f`.
pub fn complex_fourier(f: &Field, eta: [f64; 2], gamma: f64) -> Result<ComplexFrequencySlice> {
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("Gaussian rate must be positive, got {gamma}")));
    }
    let shifted = f.map(|z, v| v * (eta[0] * z.re + eta[1] * z.im).exp());
    let fraction = tail_fraction(&shifted);
    if fraction > DEFAULT_TAIL_THRESHOLD {
        return Err(Error::TailMass { fraction, threshold: DEFAULT_TAIL_THRESHOLD });
    }
    let weighted_l2 = weighted_norm(f, WeightSpec::Gaussian(gamma), NormOrder::L2)?;
    let weighted_l1 = weighted_norm(f, WeightSpec::Gaussian(gamma), NormOrder::L1)?;
    let (values, _, frequencies) = padded_transform(&shifted, 1);
    Ok(ComplexFrequencySlice { eta, gamma, frequencies, values, weighted_l2, weighted_l1 })
}

/// Direct quadrature `∫ e^{−ix·ζ} f(x) dx` at a complex frequency `ζ ∈ ℂ²`.
pub fn fourier_at(f: &Field, zeta: [Complex64; 2]) -> Complex64 {
    let grid = f.grid();
    let n = grid.n();
    let ex: Vec<Complex64> = (0..n).map(|i| (Complex64::new(0.0, -1.0) * zeta[0] * grid.coord(i)).exp()).collect();
    let ey: Vec<Complex64> = (0..n).map(|k| (Complex64::new(0.0, -1.0) * zeta[1] * grid.coord(k)).exp()).collect();
    let d = grid.spacing();
    let total: Complex64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = &f.values()[i * n..(i + 1) * n];
            ex[i] * row.iter().zip(&ey).map(|(v, e)| v * e).sum::<Complex64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    total * d * d
}

/// `(Δ − λ²) g` with the positive Laplacian, i.e. the Fourier multiplier `|ξ|² − λ²`.
pub fn apply_symbol(g: &Field, lambda: f64) -> Field {
    &positive_laplacian(g) - &g.scale(Complex64::new(lambda * lambda, 0.0))
}

/// Output of [`sphere_division`].
#[derive(Debug, Clone)]
pub struct SphereDivision {
    /// Inverse transform of `f̂ / (|ξ|² − λ²)`.
    pub g: Field,
    /// `max_{|ξ| = λ} |f̂| / max |f̂|`.
    pub sphere_residual: f64,
    /// Number of lattice frequencies filled by radial interpolation.
    pub band_points: usize,
    /// Fitted Gaussian rate of `g`.
    pub decay_rate: f64,
}

/// Largest tolerated `max_{|ξ|=λ}|f̂| / max|f̂|`.
pub const SPHERE_TOLERANCE: f64 = 1e-7;
/// Half-width of the interpolated band around the sphere, in lattice cells.
pub const BAND_CELLS: f64 = 3.0;
/// Relative floor below which samples of the quotient are ignored by the decay fit;
/// above the interpolation noise of the band.
pub const DECAY_FLOOR: f64 = 1e-7;

/// `g = 𝔉⁻¹[f̂ / (|ξ|² − λ²)]` for `f` whose transform vanishes on `|ξ| = λ`.
///
/// The lattice is refined by zero padding until the spacing is at most `λ/12`.
/// Lattice points within [`BAND_CELLS`] cells of the sphere take the value of the
/// degree-7 radial interpolant through exact quotients at `λ ± (3..=6)` cells.
pub fn sphere_division(f: &Field, lambda: f64, gamma: f64) -> Result<SphereDivision> {
    if !(lambda > 0.0 && gamma > 0.0) {
        return Err(Error::invalid("sphere division needs λ > 0 and γ > 0"));
    }
    let fraction = tail_fraction(f);
    if fraction > DEFAULT_TAIL_THRESHOLD {
        return Err(Error::TailMass { fraction, threshold: DEFAULT_TAIL_THRESHOLD });
    }
    let grid = f.grid();
    let base_step = TAU / (grid.n() as f64 * grid.spacing());
    let pad = ((12.0 * base_step / lambda).ceil() as usize).clamp(1, 16);
    let (mut data, big, xi) = padded_transform(f, pad);
    let dxi = TAU / (big as f64 * grid.spacing());
    if lambda - 6.0 * dxi <= 0.0 {
        return Err(Error::precondition("frequency lattice too coarse for the sphere"));
    }

    let peak = data.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    if peak == 0.0 {
        return Ok(SphereDivision { g: Field::zeros(grid), sphere_residual: 0.0, band_points: 0, decay_rate: f64::INFINITY });
    }
    let on_sphere = (0..64)
        .map(|k| {
            let t = TAU * k as f64 / 64.0;
            fourier_at(f, [Complex64::new(lambda * t.cos(), 0.0), Complex64::new(lambda * t.sin(), 0.0)]).norm()
        })
        .fold(0.0, f64::max);
    let sphere_residual = on_sphere / peak;
    if sphere_residual > SPHERE_TOLERANCE {
        return Err(Error::precondition(format!(
            "transform does not vanish on |ξ| = {lambda}: relative size {sphere_residual:.3e}"
        )));
    }

    let band = BAND_CELLS * dxi;
    let offsets: Vec<f64> = (3..=6).rev().map(|j| -(j as f64) * dxi).chain((3..=6).map(|j| j as f64 * dxi)).collect();
    let mut band_indices = Vec::new();
    for a in 0..big {
        for b in 0..big {
            let r = xi[a].hypot(xi[b]);
            if (r - lambda).abs() < band {
                band_indices.push(a * big + b);
            } else {
                data[a * big + b] /= r * r - lambda * lambda;
            }
        }
    }
    let filled: Vec<(usize, Complex64)> = band_indices
        .par_iter()
        .map(|&idx| {
            let (x, y) = (xi[idx / big], xi[idx % big]);
            let r = x.hypot(y);
            let (c, s) = (x / r, y / r);
            let nodes: Vec<(f64, Complex64)> = offsets
                .iter()
                .map(|o| {
                    let rr = lambda + o;
                    let fv = fourier_at(f, [Complex64::new(rr * c, 0.0), Complex64::new(rr * s, 0.0)]);
                    (rr, fv / (rr * rr - lambda * lambda))
                })
                .collect();
            (idx, lagrange(&nodes, r))
        })
        .collect();
    for (idx, v) in &filled {
        data[*idx] = *v;
    }

    let d = grid.spacing();
    let hw = grid.half_width();
    let norm = 1.0 / ((big * big) as f64 * d * d);
    data.par_chunks_mut(big).enumerate().for_each(|(a, row)| {
        for (b, v) in row.iter_mut().enumerate() {
            *v *= Complex64::from_polar(norm, -hw * (xi[a] + xi[b]));
        }
    });
    fft2(&mut data, big, Direction::Inverse);
    let n = grid.n();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.extend_from_slice(&data[i * big..i * big + n]);
    }
    let g = Field::from_values(grid, out)?;
    let decay_rate = gaussian_decay_rate(&g, DECAY_FLOOR);
    Ok(SphereDivision { g, sphere_residual, band_points: band_indices.len(), decay_rate })
}

/// Gaussian rate `β` of `g` from the shell maxima `M(r) = max_{|z|≈r} |g|`:
/// least-squares fit `log M ≈ a + b r − β r²` over the annulus between the radius
/// of the peak plus one and the radius where `M` drops below `floor · max|g|`.
/// The linear term absorbs an off-centre peak.
pub fn gaussian_decay_rate(g: &Field, floor: f64) -> f64 {
    let grid = g.grid();
    let (peak_idx, peak) = g
        .values()
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bi, bv), (i, v)| if v.norm() > bv { (i, v.norm()) } else { (bi, bv) });
    if peak == 0.0 {
        return f64::INFINITY;
    }
    let width = grid.spacing();
    let limit = TAPER_FLAT_FRACTION * grid.half_width();
    let shells = (limit / width).floor() as usize;
    let mut shell_max = vec![0.0_f64; shells + 1];
    for (i, v) in g.values().iter().enumerate() {
        let r = grid.point_at(i).norm();
        if r <= limit {
            let s = (r / width).round() as usize;
            shell_max[s] = shell_max[s].max(v.norm());
        }
    }
    let inner = grid.point_at(peak_idx).norm() + 1.0;
    let samples: Vec<(f64, f64)> = shell_max
        .iter()
        .enumerate()
        .map(|(s, &m)| (s as f64 * width, m))
        .skip_while(|&(r, _)| r < inner)
        .take_while(|&(_, m)| m > floor * peak)
        .map(|(r, m)| (r, m.ln()))
        .collect();
    if samples.len() < 4 {
        return f64::NAN;
    }
    let a = nalgebra::DMatrix::from_fn(samples.len(), 3, |i, j| samples[i].0.powi(j as i32));
    let b = nalgebra::DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    match a.svd(true, true).solve(&b, 1e-12) {
        Ok(coef) => -coef[2],
        Err(_) => f64::NAN,
    }
}

/// Lagrange interpolant through `nodes` evaluated at `t`.
fn lagrange(nodes: &[(f64, Complex64)], t: f64) -> Complex64 {
    let mut value = Complex64::default();
    for (i, &(ti, gi)) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (j, &(tj, _)) in nodes.iter().enumerate() {
            if i != j {
                w *= (t - tj) / (ti - tj);
            }
        }
        value += gi * w;
    }
    value
}

/// `g(z)` for `ĝ = f̂ / (|ξ|² − λ²)` by the shifted contour
/// `(2π)⁻² ∫ f̂(ζ) / (ζ·ζ − λ²) e^{iζ·z} dξ`, `ζ = ξ + iη`.
///
/// For `η ≠ 0` the denominator vanishes only at `ξ = ±√(λ² + |η|²) η̂⊥`; lattice
/// points within [`BAND_CELLS`] cells of those take the interpolant along `η̂⊥`
/// through exact quotients at 3 to 6 cells on either side.
pub fn contour_shift_value(f: &Field, lambda: f64, eta: [f64; 2], z: Complex64) -> Result<Complex64> {
    let eta_norm = eta[0].hypot(eta[1]);
    if !(lambda > 0.0 && eta_norm > 0.0) {
        return Err(Error::invalid("contour shift needs λ > 0 and η ≠ 0"));
    }
    let shifted = f.map(|x, v| v * (eta[0] * x.re + eta[1] * x.im).exp());
    let fraction = tail_fraction(&shifted);
    if fraction > DEFAULT_TAIL_THRESHOLD {
        return Err(Error::TailMass { fraction, threshold: DEFAULT_TAIL_THRESHOLD });
    }
    let grid = f.grid();
    let t_star = (lambda * lambda + eta_norm * eta_norm).sqrt();
    let base_step = TAU / (grid.n() as f64 * grid.spacing());
    let pad = ((12.0 * base_step / t_star).ceil() as usize).clamp(1, 16);
    let (mut data, big, xi) = padded_transform(&shifted, pad);
    let dxi = TAU / (big as f64 * grid.spacing());
    let along = [eta[0] / eta_norm, eta[1] / eta_norm];
    let across = [-along[1], along[0]];
    let quotient = |x: f64, y: f64, fhat: Complex64| -> Complex64 {
        let zeta = [Complex64::new(x, eta[0]), Complex64::new(y, eta[1])];
        fhat / (zeta[0] * zeta[0] + zeta[1] * zeta[1] - lambda * lambda)
    };
    let band = BAND_CELLS * dxi;
    let mut near = Vec::new();
    for a in 0..big {
        for b in 0..big {
            let (x, y) = (xi[a], xi[b]);
            let s = x * along[0] + y * along[1];
            let t = x * across[0] + y * across[1];
            if s.hypot(t.abs() - t_star) < band {
                near.push((a * big + b, s, t));
            } else {
                data[a * big + b] = quotient(x, y, data[a * big + b]);
            }
        }
    }
    let filled: Vec<(usize, Complex64)> = near
        .par_iter()
        .map(|&(idx, s, t)| {
            let centre = t_star * t.signum();
            let nodes: Vec<(f64, Complex64)> = (3..=6)
                .rev()
                .map(|j| -(j as f64))
                .chain((3..=6).map(|j| j as f64))
                .map(|o| {
                    let tn = centre + o * dxi;
                    let (x, y) = (s * along[0] + tn * across[0], s * along[1] + tn * across[1]);
                    let zeta = [Complex64::new(x, eta[0]), Complex64::new(y, eta[1])];
                    (tn, quotient(x, y, fourier_at(f, zeta)))
                })
                .collect();
            (idx, lagrange(&nodes, t))
        })
        .collect();
    for (idx, v) in filled {
        data[idx] = v;
    }
    let total: Complex64 = data
        .par_chunks(big)
        .enumerate()
        .map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(|(b, v)| v * Complex64::from_polar(1.0, xi[a] * z.re + xi[b] * z.im))
                .sum::<Complex64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let damp = (-(eta[0] * z.re + eta[1] * z.im)).exp();
    Ok(total * dxi * dxi * damp / (4.0 * PI * PI))
}

/// Seeded Gaussian-class sample `Σ A_k e^{−β_k|z − c_k|²}` with `β_k ∈ [2γ, 4γ]`,
/// `|c_k| ≤ 1` and complex amplitudes.
pub fn random_gaussian_class(grid: Grid, gamma: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = rng.gen_range(1..=3);
    let params: Vec<(Complex64, f64, Complex64)> = (0..terms)
        .map(|_| {
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let beta = gamma * rng.gen_range(2.0..4.0);
            let center = Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU));
            (amp, beta, center)
        })
        .collect();
    Field::from_fn(grid, |z| params.iter().map(|(a, b, c)| a * (-b * (z - c).norm_sqr()).exp()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function() {
        let g = Grid::new(64, 4.0).unwrap();
        let s = complex_fourier(&Field::zeros(g), [1.0, 0.0], 1.0).unwrap();
        assert_eq!(s.sup_norm(), 0.0);
        assert_eq!(s.bound_ratio(), 0.0);
    }

    #[test]
    fn rejects_bad_rate() {
        let g = Grid::new(64, 4.0).unwrap();
        assert!(complex_fourier(&Field::zeros(g), [0.0, 0.0], 0.0).is_err());
    }
}
