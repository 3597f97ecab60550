//! Built-in potential families.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fieldops::{Field, Grid};
use crate::geometry::SurfaceModel;

/// Decay class tag: `e^{−γ|z|}` (linear), `e^{−γ|z|²}` (quadratic) or compact support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayClass {
    Linear,
    Quadratic,
    Compact,
}

impl DecayClass {
    /// Whether a potential of this class is admissible for growth class `j`.
    pub fn admits(&self, j: u8) -> bool {
        match self {
            DecayClass::Compact => true,
            DecayClass::Quadratic => j == 1 || j == 2,
            DecayClass::Linear => j == 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    fn eval(&self, z: Complex64) -> f64 {
        let c = Complex64::new(self.center[0], self.center[1]);
        self.amplitude * (-(z - c).norm_sqr() / (self.width * self.width)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "camelCase")]
pub enum Potential {
    Zero,
    /// `A e^{−|z−c|²/w²}`.
    GaussianBump(Bump),
    GaussianMixture { bumps: Vec<Bump> },
    /// `A (1 − |z−c|²/ρ²)_+^{1+α}`: `C^{1,α}` but not `C²` across `|z−c| = ρ`.
    #[serde(rename = "compactBumpC1Alpha")]
    CompactBumpC1Alpha { center: [f64; 2], radius: f64, amplitude: f64, alpha: f64 },
    /// `−D exp(1 − 1/(1 − r²/ρ²))` for `r < ρ`, zero outside.
    RadialWell { depth: f64, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInfo {
    pub name: &'static str,
    pub parameters: &'static str,
    pub decay: DecayClass,
}

pub fn list_potential_families() -> Vec<FamilyInfo> {
    vec![
        FamilyInfo { name: "gaussianBump", parameters: "center, width, amplitude", decay: DecayClass::Quadratic },
        FamilyInfo { name: "gaussianMixture", parameters: "bumps[]", decay: DecayClass::Quadratic },
        FamilyInfo { name: "compactBumpC1Alpha", parameters: "center, radius, amplitude, alpha", decay: DecayClass::Compact },
        FamilyInfo { name: "radialWell", parameters: "depth, radius", decay: DecayClass::Compact },
    ]
}

impl Potential {
    pub fn gaussian(center: Complex64, width: f64, amplitude: f64) -> Self {
        Potential::GaussianBump(Bump { center: [center.re, center.im], width, amplitude })
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::GaussianBump(b) => b.eval(z),
            Potential::GaussianMixture { bumps } => bumps.iter().map(|b| b.eval(z)).sum(),
            Potential::CompactBumpC1Alpha { center, radius, amplitude, alpha } => {
                let c = Complex64::new(center[0], center[1]);
                let s = 1.0 - (z - c).norm_sqr() / (radius * radius);
                if s <= 0.0 {
                    0.0
                } else {
                    amplitude * s.powf(1.0 + alpha)
                }
            }
            Potential::RadialWell { depth, radius } => {
                let t = z.norm_sqr() / (radius * radius);
                if t >= 1.0 {
                    0.0
                } else {
                    -depth * (1.0 - 1.0 / (1.0 - t)).exp()
                }
            }
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match self {
            Potential::Zero | Potential::CompactBumpC1Alpha { .. } | Potential::RadialWell { .. } => DecayClass::Compact,
            Potential::GaussianBump(_) | Potential::GaussianMixture { .. } => DecayClass::Quadratic,
        }
    }

    /// A Gaussian rate `γ` with `V ∈ e^{−γ|z|²}L^∞`, if any.
    pub fn gaussian_rate(&self) -> Option<f64> {
        match self {
            Potential::GaussianBump(b) => Some(0.99 / (b.width * b.width)),
            Potential::GaussianMixture { bumps } => {
                bumps.iter().map(|b| 0.99 / (b.width * b.width)).reduce(f64::min)
            }
            _ => None,
        }
    }

    /// Nominal Hölder exponent of the first derivative, for the `C^{1,α}` family.
    pub fn holder_alpha(&self) -> Option<f64> {
        match self {
            Potential::CompactBumpC1Alpha { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// Radius beyond which `|V| < 1e-14 max|V|`.
    pub fn effective_radius(&self) -> f64 {
        let bump_radius = |b: &Bump| Complex64::new(b.center[0], b.center[1]).norm() + b.width * (14.0 * 10f64.ln()).sqrt();
        match self {
            Potential::Zero => 0.0,
            Potential::GaussianBump(b) => bump_radius(b),
            Potential::GaussianMixture { bumps } => bumps.iter().map(bump_radius).fold(0.0, f64::max),
            Potential::CompactBumpC1Alpha { center, radius, .. } => Complex64::new(center[0], center[1]).norm() + radius,
            Potential::RadialWell { radius, .. } => *radius,
        }
    }

    /// Samples on `grid`, masked away from finite punctures of `model`.
    pub fn sample(&self, grid: Grid, model: &SurfaceModel) -> Field {
        Field::from_real_fn(grid, |z| {
            let m = model.puncture_mask(z);
            if m == 0.0 {
                0.0
            } else {
                m * self.eval(z)
            }
        })
    }
}

/// Finite-difference Hölder exponent of `d/dr V(c + r)` at the edge of support `ρ`:
/// slope of `log|V'(ρ − t)|` against `log t`.
pub fn estimate_holder_exponent(v: &Potential) -> Option<f64> {
    let Potential::CompactBumpC1Alpha { center, radius, .. } = v else {
        return None;
    };
    let c = Complex64::new(center[0], center[1]);
    let deriv = |r: f64| {
        let h = 1e-7 * radius;
        (v.eval(c + r + h) - v.eval(c + r - h)) / (2.0 * h)
    };
    let (t1, t2) = (1e-3 * radius, 1e-2 * radius);
    let (g1, g2) = (deriv(radius - t1).abs(), deriv(radius - t2).abs());
    Some((g2.ln() - g1.ln()) / (t2.ln() - t1.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holder_estimate() {
        let v = Potential::CompactBumpC1Alpha { center: [0.0, 0.0], radius: 1.0, amplitude: 1.0, alpha: 0.5 };
        let a = estimate_holder_exponent(&v).unwrap();
        assert!((a - 0.5).abs() < 0.01, "{a}");
    }

    #[test]
    fn catalog_tags() {
        let cat = list_potential_families();
        assert_eq!(cat.len(), 4);
        assert!(cat.iter().filter(|f| f.decay == DecayClass::Compact).all(|f| f.decay.admits(1) && f.decay.admits(2)));
    }

    #[test]
    fn gaussian_rate_bound() {
        let v = Potential::gaussian(Complex64::new(0.0, 0.0), 0.5, 1.0);
        let g = v.gaussian_rate().unwrap();
        assert!(g < 4.0);
        for r in [1.0, 3.0, 6.0] {
            assert!(v.eval(Complex64::new(r, 0.0)) * (g * r * r).exp() <= 1.0);
        }
    }
}
