use num_complex::Complex64;

use super::divisor::{Divisor, Point};
use super::poly::Poly;
use crate::error::{Error, Result};

/// Relative tolerance used to merge numerically coincident roots.
pub const ROOT_CLUSTER_TOL: f64 = 1e-6;

/// `num / den` with `den` monic and, after [`RationalFunction::reduced`], coprime to `num`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid("zero denominator"));
        }
        let lead = den.leading();
        let inv = lead.inv();
        Ok(Self { num: num.scaled(inv), den: den.scaled(inv) }.reduced())
    }

    pub fn polynomial(p: Poly) -> Self {
        Self { num: p, den: Poly::one() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::polynomial(Poly::constant(c))
    }

    /// `1 / (z − e)^k`.
    pub fn inverse_power(e: Complex64, k: usize) -> Self {
        Self { num: Poly::one(), den: Poly::root_power(e, k) }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Value at `z`, `None` at a pole.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        let d = self.den.eval(z);
        if d == Complex64::default() {
            None
        } else {
            Some(self.num.eval(z) / d)
        }
    }

    /// Cancel common roots of numerator and denominator.
    pub fn reduced(mut self) -> Self {
        if self.num.is_zero() {
            self.den = Poly::one();
            return self;
        }
        loop {
            let Ok(roots) = self.den.roots() else { return self };
            let common = roots.into_iter().find(|&r| {
                self.num.eval(r).norm() <= 1e-10 * self.num.eval_magnitude(r).max(f64::MIN_POSITIVE)
            });
            match common {
                Some(r) => {
                    self.num = self.num.deflate(r);
                    self.den = self.den.deflate(r);
                }
                None => return self,
            }
        }
    }

    pub fn derivative(&self) -> Self {
        let num = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        Self { num, den: self.den.mul(&self.den) }.reduced()
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Self { num: self.num.add(&other.num), den: self.den.clone() }.reduced();
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Self { num, den: self.den.mul(&other.den) }.reduced()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { num: self.num.mul(&other.num), den: self.den.mul(&other.den) }.reduced()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { num: self.num.scaled(c), den: self.den.clone() }.reduced()
    }

    /// Largest numerator coefficient modulus.
    pub fn coefficient_scale(&self) -> f64 {
        self.num.scale().max(f64::MIN_POSITIVE)
    }

    /// Order at infinity: `deg den − deg num` (negative for a pole).
    pub fn order_at_infinity(&self) -> i64 {
        self.den.degree().unwrap_or(0) as i64 - self.num.degree().unwrap_or(0) as i64
    }

    /// Finite poles with multiplicity.
    pub fn poles(&self) -> Result<Vec<(Complex64, usize)>> {
        self.den.distinct_roots(ROOT_CLUSTER_TOL)
    }
}

/// `(f)`: zeros and poles with multiplicity, including the point at infinity.
pub fn principal_divisor(f: &RationalFunction) -> Result<Divisor> {
    if f.is_zero() {
        return Err(Error::invalid("principal divisor of the zero function"));
    }
    let mut d = Divisor::new();
    for (z, m) in f.numerator().distinct_roots(ROOT_CLUSTER_TOL)? {
        d.add(Point::Finite(z), m as i64);
    }
    for (z, m) in f.poles()? {
        d.add(Point::Finite(z), -(m as i64));
    }
    d.add(Point::Infinity, f.order_at_infinity());
    Ok(d)
}

/// `r(D^{-1}) = deg D − g + 1` on the sphere; requires `deg D > −2`.
pub fn riemann_roch_dim(d: &Divisor) -> Result<i64> {
    let deg = d.degree();
    if deg <= -2 {
        return Err(Error::precondition(format!("Riemann–Roch needs deg D > -2, got {deg}")));
    }
    Ok(deg + 1)
}

/// Basis of `{f : (f) ≥ D^{-1}}`: poles of order at most `n_p` where `D` has
/// exponent `n_p > 0`, zeros of order at least `|n_p|` where `n_p < 0`.
pub fn basis_of_divisor(d: &Divisor) -> Result<Vec<RationalFunction>> {
    let dim = riemann_roch_dim(d)?;
    let mut poles = Poly::one();
    let mut zeros = Poly::one();
    for &(p, k) in d.entries() {
        if let Point::Finite(z) = p {
            let factor = Poly::root_power(z, k.unsigned_abs() as usize);
            if k > 0 {
                poles = poles.mul(&factor);
            } else {
                zeros = zeros.mul(&factor);
            }
        }
    }
    (0..dim.max(0) as usize)
        .map(|k| RationalFunction::new(zeros.mul(&Poly::monomial(k)), poles.clone()))
        .collect()
}

/// Basis of `ℋ = {f : (f) ≥ ∏ e_i^{-j}}` for the given punctures.
pub fn basis_of_space(punctures: &[Point], j: u8) -> Result<Vec<RationalFunction>> {
    if !(j == 1 || j == 2) {
        return Err(Error::invalid(format!("pole order must be 1 or 2, got {j}")));
    }
    if punctures.is_empty() {
        return Err(Error::invalid("at least one puncture required"));
    }
    if j == 1 && punctures.len() < 2 {
        return Err(Error::precondition("linear growth needs at least two punctures"));
    }
    let mut basis = vec![RationalFunction::constant(Complex64::new(1.0, 0.0))];
    for &p in punctures {
        for k in 1..=j as usize {
            basis.push(match p {
                Point::Infinity => RationalFunction::polynomial(Poly::monomial(k)),
                Point::Finite(e) => RationalFunction::inverse_power(e, k),
            });
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn divisor_of_mobius() {
        let f = RationalFunction::new(Poly::new(vec![c(-1.0), c(1.0)]), Poly::new(vec![c(1.0), c(1.0)])).unwrap();
        let d = principal_divisor(&f).unwrap();
        assert_eq!(d.degree(), 0);
        assert_eq!(d.exponent_at(Point::Finite(c(1.0))), 1);
        assert_eq!(d.exponent_at(Point::Finite(c(-1.0))), -1);
        assert_eq!(d.exponent_at(Point::Infinity), 0);
    }

    #[test]
    fn cancellation() {
        let num = Poly::from_roots(&[c(1.0), c(2.0)]);
        let den = Poly::from_roots(&[c(1.0), c(3.0)]);
        let f = RationalFunction::new(num, den).unwrap();
        assert_eq!(f.denominator().degree(), Some(1));
        assert!((f.eval(c(0.0)).unwrap() - c(-2.0 / -3.0)).norm() < 1e-14);
    }

    #[test]
    fn derivative_of_quotient() {
        // (z²)/(z − 1) has derivative z(z − 2)/(z − 1)².
        let f = RationalFunction::new(Poly::monomial(2), Poly::new(vec![c(-1.0), c(1.0)])).unwrap();
        let df = f.derivative();
        let z = Complex64::new(0.3, 0.7);
        let want = z * (z - 2.0) / ((z - 1.0) * (z - 1.0));
        assert!((df.eval(z).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn divisor_basis_spans_expected_functions() {
        let d = Divisor::from_entries([(Point::Infinity, 2)]);
        let b = basis_of_divisor(&d).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b[2].numerator(), &Poly::monomial(2));
        assert!(riemann_roch_dim(&Divisor::from_entries([(Point::Infinity, -2)])).is_err());
    }
}
