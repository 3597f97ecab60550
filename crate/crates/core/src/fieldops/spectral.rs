use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::{fft2, Direction};
use super::grid::{Field, Grid};

/// Fraction of the half-width on which the window taper equals one.
pub const TAPER_FLAT_FRACTION: f64 = 0.8;

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// One-dimensional C^∞ window profile: 1 on `|t| <= 0.8R`, 0 at `|t| >= R`.
pub fn taper_1d(t: f64, half_width: f64) -> f64 {
    let inner = TAPER_FLAT_FRACTION * half_width;
    let s = (t.abs() - inner) / (half_width - inner);
    1.0 - smooth_step(s)
}

/// Separable window taper sampled on `grid`.
pub fn taper(grid: Grid) -> Field {
    let r = grid.half_width();
    Field::from_real_fn(grid, |z| taper_1d(z.re, r) * taper_1d(z.im, r))
}

/// Angular frequencies matching the DFT ordering of an `n`-point axis.
pub fn spectral_frequencies(n: usize, spacing: f64) -> Vec<f64> {
    let scale = 2.0 * PI / (n as f64 * spacing);
    (0..n)
        .map(|k| {
            let f = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            f * scale
        })
        .collect()
}

fn tapered_spectrum(f: &Field) -> Vec<Complex64> {
    let grid = f.grid();
    let r = grid.half_width();
    let mut data: Vec<Complex64> = f
        .values()
        .par_iter()
        .enumerate()
        .map(|(idx, &v)| {
            let z = grid.point_at(idx);
            v * (taper_1d(z.re, r) * taper_1d(z.im, r))
        })
        .collect();
    fft2(&mut data, grid.n(), Direction::Forward);
    data
}

fn apply_symbol<S>(f: &Field, symbol: S) -> Field
where
    S: Fn(f64, f64, bool) -> Complex64 + Sync,
{
    let grid = f.grid();
    let n = grid.n();
    let xi = spectral_frequencies(n, grid.spacing());
    let nyquist = if n.is_multiple_of(2) { Some(n / 2) } else { None };
    let mut data = tapered_spectrum(f);
    let norm = 1.0 / (n * n) as f64;
    data.par_chunks_mut(n).enumerate().for_each(|(a, row)| {
        for (b, v) in row.iter_mut().enumerate() {
            let edge = Some(a) == nyquist || Some(b) == nyquist;
            *v *= symbol(xi[a], xi[b], edge) * norm;
        }
    });
    fft2(&mut data, n, Direction::Inverse);
    Field::from_raw(grid, data)
}

/// `∂_z = ½(∂_x − i∂_y)`, spectral on the tapered field.
pub fn ddz(f: &Field) -> Field {
    apply_symbol(f, |x, y, edge| {
        if edge {
            Complex64::default()
        } else {
            Complex64::new(0.5 * y, 0.5 * x)
        }
    })
}

/// `∂_z̄ = ½(∂_x + i∂_y)`, spectral on the tapered field.
pub fn ddzbar(f: &Field) -> Field {
    apply_symbol(f, |x, y, edge| {
        if edge {
            Complex64::default()
        } else {
            Complex64::new(-0.5 * y, 0.5 * x)
        }
    })
}

/// `(∂_x f, ∂_y f)`.
pub fn gradient(f: &Field) -> (Field, Field) {
    let dx = apply_symbol(f, |x, _, edge| if edge { Complex64::default() } else { Complex64::new(0.0, x) });
    let dy = apply_symbol(f, |_, y, edge| if edge { Complex64::default() } else { Complex64::new(0.0, y) });
    (dx, dy)
}

/// Positive Laplacian `Δ = −(∂_x² + ∂_y²) = −4∂_z∂_z̄`.
pub fn positive_laplacian(f: &Field) -> Field {
    apply_symbol(f, |x, y, _| Complex64::new(x * x + y * y, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior(g: Grid) -> impl Fn(Complex64) -> bool {
        let lim = 0.8 * g.half_width();
        move |z: Complex64| z.re.abs() < lim && z.im.abs() < lim
    }

    #[test]
    fn taper_profile() {
        assert_eq!(taper_1d(0.79, 1.0), 1.0);
        assert_eq!(taper_1d(1.0, 1.0), 0.0);
        let mid = taper_1d(0.9, 1.0);
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn derivatives_of_polynomials() {
        let g = Grid::new(512, 2.0).unwrap();
        let z2 = Field::from_fn(g, |z| z * z);
        let d = ddz(&z2);
        let db = ddzbar(&z2);
        let keep = interior(g);
        let err = (0..g.len())
            .filter(|&i| keep(g.point_at(i)))
            .map(|i| (d.values()[i] - 2.0 * g.point_at(i)).norm().max(db.values()[i].norm()))
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "err {err}");

        let modsq = Field::from_fn(g, |z| Complex64::new(z.norm_sqr(), 0.0));
        let d = ddz(&modsq);
        let err = (0..g.len())
            .filter(|&i| keep(g.point_at(i)))
            .map(|i| (d.values()[i] - g.point_at(i).conj()).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn gaussian_laplacian_closed_form() {
        let g = Grid::new(192, 7.0).unwrap();
        let f = Field::from_real_fn(g, |z| (-z.norm_sqr()).exp());
        let lap = positive_laplacian(&f);
        let comp = ddz(&ddzbar(&f)).scale(Complex64::new(-4.0, 0.0));
        for idx in (0..g.len()).filter(|&i| g.point_at(i).norm() < 3.5) {
            let z = g.point_at(idx);
            let r2 = z.norm_sqr();
            let exact = (4.0 - 4.0 * r2) * (-r2).exp();
            assert!((lap.values()[idx].re - exact).abs() < 1e-10, "{} vs {exact} at {z}", lap.values()[idx]);
            let e = (comp.values()[idx] - lap.values()[idx]).norm();
            assert!(e < 1e-8, "{e} at {z}");
        }
    }
}
