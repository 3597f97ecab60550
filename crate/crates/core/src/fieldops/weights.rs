use num_complex::Complex64;

use super::grid::{Field, Grid};
use crate::error::{Error, Result};
use crate::geometry::SurfaceModel;

/// Boundary defining function of the plane chart, `(1 + |z|²)^{-1/2}`.
pub fn x_function(z: Complex64) -> f64 {
    (1.0 + z.norm_sqr()).sqrt().recip()
}

/// Weights used by the weighted norms, normalised to 1 at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    Unit,
    /// `x^J`.
    Polynomial(f64),
    /// `e^{γ(1/x − 1)}`.
    Exponential(f64),
    /// `e^{γ(1/x² − 1)} = e^{γ|z|²}`.
    Gaussian(f64),
}

impl WeightSpec {
    pub fn value(&self, z: Complex64) -> f64 {
        match *self {
            WeightSpec::Unit => 1.0,
            WeightSpec::Polynomial(j) => x_function(z).powf(j),
            WeightSpec::Exponential(g) => (g * (x_function(z).recip() - 1.0)).exp(),
            WeightSpec::Gaussian(g) => (g * z.norm_sqr()).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormOrder {
    L1,
    L2,
    Inf,
}

/// Quadrature of `|w F|^p` on the window (trapezoid rule; max for `p = ∞`).
pub fn weighted_norm(f: &Field, w: WeightSpec, p: NormOrder) -> Result<f64> {
    let grid = f.grid();
    let mut acc = 0.0_f64;
    for (idx, v) in f.values().iter().enumerate() {
        let z = grid.point_at(idx);
        let wv = w.value(z);
        if !wv.is_finite() {
            return Err(Error::invalid(format!("weight overflow at z = {z}")));
        }
        let a = wv * v.norm();
        match p {
            NormOrder::L1 => acc += a * grid.quadrature_weight(idx),
            NormOrder::L2 => acc += a * a * grid.quadrature_weight(idx),
            NormOrder::Inf => acc = acc.max(a),
        }
    }
    let out = if p == NormOrder::L2 { acc.sqrt() } else { acc };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::invalid("weighted norm overflowed"))
    }
}

/// Radial derivative of the linear-growth `φ₀`, solving `Δφ₀ = x^{2−δ}`.
pub fn phi0_radial_derivative(r: f64, delta: f64) -> f64 {
    if r < 1e-4 {
        // Series of −((1+r²)^{δ/2} − 1)/(δ r).
        return -0.5 * r * (1.0 + 0.25 * (delta - 2.0) * r * r);
    }
    -((1.0 + r * r).powf(0.5 * delta) - 1.0) / (delta * r)
}

fn segment_integral(a: f64, b: f64, delta: f64) -> f64 {
    const NODES: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const WEIGHTS: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    NODES
        .iter()
        .zip(WEIGHTS)
        .map(|(t, w)| w * half * phi0_radial_derivative(mid + half * t, delta))
        .sum()
}

/// Linear-growth `φ₀(r)` with `φ₀(0) = 0`, by composite Gauss–Legendre.
pub fn phi0_radial(r: f64, delta: f64) -> f64 {
    let panels = (r / 0.05).ceil().max(1.0) as usize;
    let width = r / panels as f64;
    (0..panels).map(|p| segment_integral(p as f64 * width, (p + 1) as f64 * width, delta)).sum()
}

struct RadialTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl RadialTable {
    fn new(r_max: f64, delta: f64) -> Self {
        let step = 2e-3;
        let count = (r_max / step).ceil() as usize + 2;
        let mut values = Vec::with_capacity(count);
        let mut slopes = Vec::with_capacity(count);
        let mut acc = 0.0;
        values.push(0.0);
        slopes.push(0.0);
        for j in 1..count {
            acc += segment_integral((j - 1) as f64 * step, j as f64 * step, delta);
            values.push(acc);
            slopes.push(phi0_radial_derivative(j as f64 * step, delta));
        }
        Self { step, values, slopes }
    }

    fn eval(&self, r: f64) -> f64 {
        let s = r / self.step;
        let j = (s.floor() as usize).min(self.values.len() - 2);
        let t = s - j as f64;
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        let (m0, m1) = (self.slopes[j] * self.step, self.slopes[j + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }
}

/// Harmonic-convexification weight `φ₀` in the plane chart.
///
/// `j = 2`: `−|z|²/4`, so that `Δφ₀ = 1`. `j = 1`: the radial solution of
/// `Δφ₀ = x^{2−δ}`, behaving like `−|z|^δ/δ² + (1/δ) log|z|` at infinity.
pub fn phi0(model: &SurfaceModel, grid: Grid, j: u8, delta: Option<f64>) -> Result<Field> {
    match j {
        2 => Ok(Field::from_real_fn(grid, |z| -0.25 * z.norm_sqr())),
        1 => {
            let delta = delta.ok_or_else(|| Error::invalid("δ required for linear growth"))?;
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::invalid(format!("δ must lie in (0, 1), got {delta}")));
            }
            if model.end_count() < 2 {
                return Err(Error::precondition("linear growth needs at least two ends"));
            }
            let table = RadialTable::new(grid.half_width() * 1.5, delta);
            Ok(Field::from_real_fn(grid, |z| table.eval(z.norm())))
        }
        _ => Err(Error::invalid(format!("growth class must be 1 or 2, got {j}"))),
    }
}

/// Convexified weight `φ − (h/ε) φ₀`.
pub fn convexified_weight(phi: &Field, phi0: &Field, h: f64, eps: f64) -> Result<Field> {
    if !(h >= 0.0 && eps > 0.0) {
        return Err(Error::invalid("convexification needs h >= 0 and ε > 0"));
    }
    let c = h / eps;
    phi.zip_map(phi0, |_, a, b| a - c * b)
}
