//! Holomorphic Morse phases, amplitudes and Taylor matching.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{basis_of_space, Poly, RationalFunction, SurfaceModel, ROOT_CLUSTER_TOL};

/// Relative size below which a Hessian counts as degenerate.
pub const MORSE_TOL: f64 = 1e-6;

const MAX_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub point: Complex64,
    pub multiplicity: usize,
    pub hessian: Complex64,
}

/// Holomorphic phase `Φ = φ + iψ` with all critical points enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct MorsePhase {
    phi: RationalFunction,
    dphi: RationalFunction,
    d2phi: RationalFunction,
    base: Complex64,
    critical: Vec<CriticalPoint>,
    growth: u8,
}

/// Roots of the numerator of `Φ′` with multiplicity.
pub fn critical_points(phi: &RationalFunction) -> Result<Vec<(Complex64, usize)>> {
    let d = phi.derivative();
    if d.is_zero() {
        return Err(Error::invalid("constant phase has no isolated critical points"));
    }
    d.numerator().distinct_roots(ROOT_CLUSTER_TOL)
}

impl MorsePhase {
    /// Validate `phi` as a Morse phase with a critical point at `base`.
    pub fn from_function(phi: RationalFunction, base: Complex64, growth: u8) -> Result<Self> {
        let dphi = phi.derivative();
        let d2phi = dphi.derivative();
        let roots = critical_points(&phi)?;
        let scale = phi.coefficient_scale() / phi.denominator().scale().max(f64::MIN_POSITIVE);
        let critical: Vec<CriticalPoint> = roots
            .into_iter()
            .map(|(point, multiplicity)| CriticalPoint {
                point,
                multiplicity,
                hessian: d2phi.eval(point).unwrap_or_default(),
            })
            .collect();
        let degenerate = critical
            .iter()
            .find(|c| c.multiplicity > 1 || c.hessian.norm() < MORSE_TOL * scale.max(1.0));
        if let Some(c) = degenerate {
            return Err(Error::PhaseConstruction(format!(
                "degenerate critical point at {} (multiplicity {}, |Φ''| = {:.3e})",
                c.point,
                c.multiplicity,
                c.hessian.norm()
            )));
        }
        let slope = dphi.eval(base).ok_or_else(|| Error::invalid("base point is a pole"))?;
        let tol = 1e-9 * dphi.numerator().eval_magnitude(base).max(1.0);
        if slope.norm() > tol {
            return Err(Error::PhaseConstruction(format!("|Φ'(p)| = {:.3e} is not zero", slope.norm())));
        }
        let mut critical = critical;
        // Snap the enumerated copy of the base point to its exact location.
        if let Some(c) = critical.iter_mut().min_by(|a, b| {
            (a.point - base).norm().total_cmp(&(b.point - base).norm())
        }) {
            c.point = base;
            c.hessian = d2phi.eval(base).unwrap_or_default();
        }
        Ok(Self { phi, dphi, d2phi, base, critical, growth })
    }

    pub fn function(&self) -> &RationalFunction {
        &self.phi
    }

    pub fn base_point(&self) -> Complex64 {
        self.base
    }

    pub fn growth_class(&self) -> u8 {
        self.growth
    }

    pub fn critical_points(&self) -> &[CriticalPoint] {
        &self.critical
    }

    /// Critical points other than the base point.
    pub fn other_critical_points(&self) -> Vec<Complex64> {
        self.critical.iter().map(|c| c.point).filter(|&z| z != self.base).collect()
    }

    pub fn hessian_at_base(&self) -> Complex64 {
        self.d2phi.eval(self.base).unwrap_or_default()
    }

    pub fn value(&self, z: Complex64) -> Option<Complex64> {
        self.phi.eval(z)
    }

    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        self.dphi.eval(z)
    }

    pub fn second_derivative(&self, z: Complex64) -> Option<Complex64> {
        self.d2phi.eval(z)
    }

    pub fn derivative_function(&self) -> &RationalFunction {
        &self.dphi
    }

    /// The same phase with reversed sign, `−Φ`.
    pub fn negated(&self) -> Self {
        let neg = |f: &RationalFunction| f.scaled(Complex64::new(-1.0, 0.0));
        Self {
            phi: neg(&self.phi),
            dphi: neg(&self.dphi),
            d2phi: neg(&self.d2phi),
            base: self.base,
            critical: self.critical.iter().map(|c| CriticalPoint { hessian: -c.hessian, ..*c }).collect(),
            growth: self.growth,
        }
    }
}

fn closed_form_candidate(p: Complex64, model: &SurfaceModel, j: u8) -> RationalFunction {
    let square = Poly::root_power(p, 2);
    match (j, model.finite_punctures().first()) {
        (1, Some(&e)) => RationalFunction::new(square, Poly::root_power(e, 1)).expect("monic denominator"),
        _ => RationalFunction::polynomial(square),
    }
}

/// Build a Morse phase in `ℋ` with a critical point at `p`.
pub fn construct_phase(p: Complex64, model: &SurfaceModel, j: u8, seed: u64) -> Result<MorsePhase> {
    construct_phase_from(closed_form_candidate(p, model, j), p, model, j, seed).map(|(phase, _)| phase)
}

/// Like [`construct_phase`] from an explicit candidate; also returns the number of retries used.
pub fn construct_phase_from(
    candidate: RationalFunction,
    p: Complex64,
    model: &SurfaceModel,
    j: u8,
    seed: u64,
) -> Result<(MorsePhase, usize)> {
    if !model.supports_growth(j) {
        return Err(Error::precondition(format!("growth class {j} needs more ends than {}", model.end_count())));
    }
    if model.finite_punctures().contains(&p) {
        return Err(Error::precondition("critical point requested at a puncture"));
    }
    let basis = basis_of_space(&model.punctures(), j)?;
    let pivot = basis
        .iter()
        .max_by(|a, b| {
            let da = a.derivative().eval(p).unwrap_or_default().norm();
            let db = b.derivative().eval(p).unwrap_or_default().norm();
            da.total_cmp(&db)
        })
        .cloned()
        .ok_or_else(|| Error::PhaseConstruction("empty function space".into()))?;
    let pivot_slope = pivot.derivative().eval(p).unwrap_or_default();
    let project = |f: RationalFunction| {
        let s = f.derivative().eval(p).unwrap_or_default();
        f.add(&pivot.scaled(-s / pivot_slope))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = project(candidate.clone());
    let mut eps = 0.5;
    let mut last_error = None;
    for attempt in 0..=MAX_RETRIES {
        match MorsePhase::from_function(current.clone(), p, j) {
            Ok(phase) => return Ok((phase, attempt)),
            Err(e) => last_error = Some(e),
        }
        let perturbation = basis.iter().fold(RationalFunction::constant(Complex64::default()), |acc, f| {
            let c = Complex64::new(rng.gen_range(-eps..eps), rng.gen_range(-eps..eps));
            acc.add(&f.scaled(c))
        });
        current = project(candidate.add(&perturbation));
        eps *= 0.7;
    }
    Err(Error::PhaseConstruction(format!(
        "no Morse phase after {MAX_RETRIES} retries: {}",
        last_error.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// `a = ∏ (z − p_j)^L`, nonvanishing at `p`.
pub fn construct_amplitude(p: Complex64, others: &[Complex64], order: usize) -> Result<RationalFunction> {
    if others.contains(&p) {
        return Err(Error::precondition("amplitude cannot vanish at its own critical point"));
    }
    let poly = others.iter().fold(Poly::one(), |acc, &q| acc.mul(&Poly::root_power(q, order)));
    Ok(RationalFunction::polynomial(poly))
}

/// Polynomial `f = q · ∏ (z − p_j)^L` whose Taylor coefficients at `p0`
/// (`f^{(k)}(p0)/k!`, `k = 0..=K`) equal `jet`.
pub fn taylor_match(jet: &[Complex64], p0: Complex64, zero_points: &[Complex64], order: usize) -> Result<RationalFunction> {
    if zero_points.contains(&p0) {
        return Err(Error::precondition("matching point coincides with a zero point"));
    }
    let vanishing = zero_points.iter().fold(Poly::one(), |acc, &q| acc.mul(&Poly::root_power(q, order)));
    let mut z = vanishing.taylor_at(p0);
    z.resize(jet.len().max(1), Complex64::default());
    let mut q = Vec::with_capacity(jet.len());
    for k in 0..jet.len() {
        let mut acc = jet[k];
        for i in 1..=k {
            acc -= z[i] * q[k - i];
        }
        q.push(acc / z[0]);
    }
    Ok(RationalFunction::polynomial(Poly::from_taylor(&q, p0).mul(&vanishing)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn plane_quadratic() {
        let phase = construct_phase(c(0.0), &SurfaceModel::plane(), 2, 1).unwrap();
        assert_eq!(phase.critical_points().len(), 1);
        assert!((phase.hessian_at_base() - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn linear_growth_has_second_critical_point() {
        let model = SurfaceModel::new(vec![c(1.0)]).unwrap();
        let phase = construct_phase(c(0.0), &model, 1, 1).unwrap();
        let others = phase.other_critical_points();
        assert_eq!(others.len(), 1);
        assert!((others[0] - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn cubic_is_not_morse() {
        let cubic = RationalFunction::polynomial(Poly::monomial(3));
        assert_eq!(critical_points(&cubic).unwrap(), vec![(c(0.0), 2)]);
        assert!(MorsePhase::from_function(cubic, c(0.0), 2).is_err());
    }

    #[test]
    fn taylor_match_small_case() {
        let f = taylor_match(&[c(0.0), c(1.0)], c(0.0), &[c(3.0)], 1).unwrap();
        assert!(f.eval(c(0.0)).unwrap().norm() < 1e-15);
        assert!((f.derivative().eval(c(0.0)).unwrap() - c(1.0)).norm() < 1e-14);
        assert!(f.eval(c(3.0)).unwrap().norm() < 1e-13);
    }
}
