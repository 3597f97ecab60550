use num_complex::Complex64;

use super::divisor::Point;
use crate::error::{Error, Result};

/// Genus-zero surface: the Riemann sphere minus finitely many punctures,
/// always including `∞`, with a metric that is exactly Euclidean in each end.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel {
    finite: Vec<Complex64>,
}

impl SurfaceModel {
    /// The flat plane (only `∞` removed).
    pub fn plane() -> Self {
        Self { finite: Vec::new() }
    }

    pub fn new(finite: Vec<Complex64>) -> Result<Self> {
        for (i, a) in finite.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::invalid("puncture must be finite"));
            }
            if finite[..i].iter().any(|b| b == a) {
                return Err(Error::invalid(format!("duplicate puncture {a}")));
            }
        }
        Ok(Self { finite })
    }

    pub fn finite_punctures(&self) -> &[Complex64] {
        &self.finite
    }

    pub fn punctures(&self) -> Vec<Point> {
        self.finite.iter().map(|&e| Point::Finite(e)).chain([Point::Infinity]).collect()
    }

    pub fn end_count(&self) -> usize {
        self.finite.len() + 1
    }

    pub fn genus(&self) -> u32 {
        0
    }

    pub fn is_plane(&self) -> bool {
        self.finite.is_empty()
    }

    /// Growth-class hypothesis: `N ≥ 2` for linear, `N ≥ 1` for quadratic phases.
    pub fn supports_growth(&self, j: u8) -> bool {
        match j {
            1 => self.end_count() >= 2,
            2 => true,
            _ => false,
        }
    }

    /// Radii `(inner, outer)` of the end cutoff around a finite puncture:
    /// the metric is `|z−e|^{-4}|dz|²` inside `inner`, flat outside `outer`.
    pub fn end_radii(&self, e: Complex64) -> (f64, f64) {
        let nearest = self
            .finite
            .iter()
            .filter(|&&f| f != e)
            .map(|f| (f - e).norm())
            .fold(f64::INFINITY, f64::min);
        let s = (nearest / 4.0).min(1.0);
        (s, 2.0 * s)
    }

    fn blend(&self, z: Complex64, e: Complex64) -> f64 {
        let (inner, outer) = self.end_radii(e);
        let r = (z - e).norm();
        1.0 - smooth_step((r - inner) / (outer - inner))
    }

    /// Conformal factor `σ`, metric `e^{2σ}|dz|²`.
    pub fn sigma(&self, z: Complex64) -> f64 {
        self.finite
            .iter()
            .map(|&e| {
                let k = self.blend(z, e);
                if k == 0.0 {
                    0.0
                } else {
                    -2.0 * (z - e).norm().ln() * k
                }
            })
            .sum()
    }

    /// Smallest distance from `z` to a finite puncture.
    pub fn distance_to_punctures(&self, z: Complex64) -> f64 {
        self.finite.iter().map(|e| (z - e).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Smooth mask, 0 within `inner/2` of a finite puncture and 1 beyond `inner`.
    pub fn puncture_mask(&self, z: Complex64) -> f64 {
        self.finite
            .iter()
            .map(|&e| {
                let (inner, _) = self.end_radii(e);
                smooth_step(((z - e).norm() - 0.5 * inner) / (0.5 * inner))
            })
            .product()
    }
}

pub(crate) fn smooth_step(t: f64) -> f64 {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ends_are_euclidean() {
        let m = SurfaceModel::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        // Inside the unit end disk: metric |z−1|^{-4}|dz|².
        let z = Complex64::new(1.3, 0.4);
        assert!((m.sigma(z) + 2.0 * (z - 1.0).norm().ln()).abs() < 1e-14);
        assert_eq!(m.sigma(Complex64::new(4.0, 0.0)), 0.0);
        assert_eq!(SurfaceModel::plane().sigma(z), 0.0);
        assert!(SurfaceModel::new(vec![Complex64::new(1.0, 0.0); 2]).is_err());
    }
}
