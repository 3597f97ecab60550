use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Uniform square sampling of `[-R, R]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    half_width: f64,
}

impl Grid {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < Self::MIN_SAMPLES {
            return Err(Error::invalid(format!("grid needs n >= 16, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(format!("bad window half-width {half_width}")));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn point(&self, i: usize, k: usize) -> Complex64 {
        Complex64::new(self.coord(i), self.coord(k))
    }

    pub fn point_at(&self, idx: usize) -> Complex64 {
        self.point(idx / self.n, idx % self.n)
    }

    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n + k
    }

    /// Trapezoid weight of sample `idx` (cell area, halved on edges).
    pub fn quadrature_weight(&self, idx: usize) -> f64 {
        let (i, k) = (idx / self.n, idx % self.n);
        let edge = |j: usize| if j == 0 || j == self.n - 1 { 0.5 } else { 1.0 };
        let d = self.spacing();
        edge(i) * edge(k) * d * d
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self.n == other.n && self.half_width == other.half_width {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.n, self.half_width, other.n, other.half_width))
        }
    }
}

/// Complex samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("field samples must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|idx| f(grid.point_at(idx))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        Self::from_fn(grid, |z| Complex64::new(f(z), 0.0))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.values[self.grid.index(i, k)]
    }

    pub fn map<F>(&self, f: F) -> Field
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Sync,
    {
        let grid = self.grid;
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(idx, &v)| f(grid.point_at(idx), v))
            .collect();
        Field { grid, values }
    }

    pub fn zip_map<F>(&self, other: &Field, f: F) -> Result<Field>
    where
        F: Fn(Complex64, Complex64, Complex64) -> Complex64 + Sync,
    {
        self.grid.same_as(&other.grid)?;
        let grid = self.grid;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .enumerate()
            .map(|(idx, (&a, &b))| f(grid.point_at(idx), a, b))
            .collect();
        Ok(Field { grid, values })
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|_, v| c * v)
    }

    pub fn conj(&self) -> Field {
        self.map(|_, v| v.conj())
    }

    pub fn re(&self) -> Field {
        self.map(|_, v| Complex64::new(v.re, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Trapezoid-rule integral over the window.
    pub fn integrate(&self) -> Complex64 {
        self.values
            .iter()
            .enumerate()
            .fold(Complex64::default(), |acc, (idx, v)| acc + v * self.grid.quadrature_weight(idx))
    }

    /// `∫ self · conj(other)`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.grid.same_as(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .fold(Complex64::default(), |acc, (idx, (a, b))| {
                acc + a * b.conj() * self.grid.quadrature_weight(idx)
            }))
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_where(|_| true)
    }

    /// L² norm restricted to samples whose coordinate satisfies `keep`.
    pub fn norm_l2_where<P: Fn(Complex64) -> bool>(&self, keep: P) -> f64 {
        let mut acc = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let z = self.grid.point_at(idx);
            if keep(z) {
                acc += v.norm_sqr() * self.grid.quadrature_weight(idx);
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Bicubic Lagrange interpolation from the 4×4 surrounding samples.
    pub fn interpolate(&self, z: Complex64) -> Complex64 {
        let g = self.grid;
        let n = g.n;
        let fx = (z.re + g.half_width) / g.spacing();
        let fy = (z.im + g.half_width) / g.spacing();
        let i0 = (fx.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let k0 = (fy.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let weights = |t: f64, base: usize| -> [f64; 4] {
            let mut w = [1.0; 4];
            for (a, wa) in w.iter_mut().enumerate() {
                for b in 0..4 {
                    if a != b {
                        *wa *= (t - (base + b) as f64) / (a as f64 - b as f64);
                    }
                }
            }
            w
        };
        let wx = weights(fx, i0);
        let wy = weights(fy, k0);
        let mut acc = Complex64::default();
        for (a, wa) in wx.iter().enumerate() {
            for (b, wb) in wy.iter().enumerate() {
                acc += self.values[(i0 + a) * n + k0 + b] * (wa * wb);
            }
        }
        acc
    }
}

fn combine(a: &Field, b: &Field, f: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> Field {
    assert_eq!(a.grid, b.grid, "binary field operation on different grids");
    let values = a.values.par_iter().zip(b.values.par_iter()).map(|(&x, &y)| f(x, y)).collect();
    Field { grid: a.grid, values }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        combine(self, rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        combine(self, rhs, |a, b| a - b)
    }
}

impl Mul for &Field {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        combine(self, rhs, |a, b| a * b)
    }
}
