use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest distance, relative to `1 + |r|`, at which clusters are tested for a common multiple root.
const MERGE_RADIUS: f64 = 1e-2;
/// Relative size of `p^{(j)}(r)`, `j < m`, accepted at a root of multiplicity `m`.
const MULTIPLE_ROOT_TOL: f64 = 1e-9;

/// Dense complex polynomial, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::default()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Complex64::default(); k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self { coeffs: c }
    }

    /// `∏ (z − r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| acc.mul(&Self::new(vec![-r, Complex64::new(1.0, 0.0)])))
    }

    /// `(z − r)^k`.
    pub fn root_power(r: Complex64, k: usize) -> Self {
        Self::from_roots(&vec![r; k])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::default(), |acc, &c| acc * z + c)
    }

    /// `Σ |c_k| |z|^k`, the natural scale for the rounding error of `eval`.
    pub fn eval_magnitude(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..len)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_default()
                        + other.coeffs.get(k).copied().unwrap_or_default()
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::default(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Euclidean division; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Complex64::default(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Taylor coefficients at `p0`: `P(p0 + t) = Σ c_k t^k`.
    pub fn taylor_at(&self, p0: Complex64) -> Vec<Complex64> {
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for len in (1..=n).rev() {
            // Synthetic division by (z − p0); the remainder is the next coefficient.
            for j in (0..len - 1).rev() {
                let carry = work[j + 1] * p0;
                work[j] += carry;
            }
            out.push(work[0]);
            work.remove(0);
        }
        out
    }

    /// Polynomial `Σ c_k (z − p0)^k`.
    pub fn from_taylor(coeffs: &[Complex64], p0: Complex64) -> Self {
        let shift = Self::new(vec![-p0, Complex64::new(1.0, 0.0)]);
        coeffs.iter().rev().fold(Self::zero(), |acc, &c| acc.mul(&shift).add(&Self::constant(c)))
    }

    /// Distinct roots with multiplicity; clusters are polished by Newton
    /// steps on the derivative of order `multiplicity − 1`.
    ///
    /// A root of multiplicity `m` is found spread over a radius of order `ε^{1/m}`;
    /// nearby clusters are merged when their weighted centre is a numerical root of
    /// `p, p′, …, p^{(m−1)}`.
    pub fn distinct_roots(&self, tol: f64) -> Result<Vec<(Complex64, usize)>> {
        let mut groups = cluster_roots(&self.roots()?, tol);
        'merge: loop {
            for a in 0..groups.len() {
                for b in a + 1..groups.len() {
                    let ((ra, ma), (rb, mb)) = (groups[a], groups[b]);
                    if (ra - rb).norm() > MERGE_RADIUS * (1.0 + ra.norm()) {
                        continue;
                    }
                    let m = ma + mb;
                    let r = self.polish((ra * ma as f64 + rb * mb as f64) / m as f64, m);
                    if self.is_multiple_root(r, m) {
                        groups[a] = (r, m);
                        groups.remove(b);
                        continue 'merge;
                    }
                }
            }
            break;
        }
        Ok(groups.into_iter().map(|(r, m)| (self.polish(r, m), m)).collect())
    }

    /// Newton steps on `p^{(m−1)}`, whose root at a root of multiplicity `m` is simple.
    fn polish(&self, mut r: Complex64, m: usize) -> Complex64 {
        if m < 2 {
            return r;
        }
        let q = (1..m).fold(self.clone(), |acc, _| acc.derivative());
        let dq = q.derivative();
        for _ in 0..4 {
            let d = dq.eval(r);
            if d == Complex64::default() {
                break;
            }
            r -= q.eval(r) / d;
        }
        r
    }

    fn is_multiple_root(&self, r: Complex64, m: usize) -> bool {
        let mut q = self.clone();
        for _ in 0..m {
            if q.eval(r).norm() > MULTIPLE_ROOT_TOL * q.eval_magnitude(r) {
                return false;
            }
            q = q.derivative();
        }
        true
    }

    /// Divide by `(z − r)` assuming `r` is (numerically) a root; the remainder is dropped.
    pub fn deflate(&self, r: Complex64) -> Self {
        let (q, _) = self.div_rem(&Self::new(vec![-r, Complex64::new(1.0, 0.0)]));
        q
    }

    /// All complex roots (with repetition) by the Aberth–Ehrlich iteration.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let Some(deg) = self.degree() else {
            return Err(Error::invalid("roots of the zero polynomial"));
        };
        if deg == 0 {
            return Ok(Vec::new());
        }
        // Exact roots at the origin first.
        let zeros_at_origin = self.coeffs.iter().take_while(|c| **c == Complex64::default()).count();
        let reduced = Self::new(self.coeffs[zeros_at_origin..].to_vec());
        let mut roots = vec![Complex64::default(); zeros_at_origin];
        roots.extend(aberth(&reduced)?);
        Ok(roots)
    }
}

fn aberth(p: &Poly) -> Result<Vec<Complex64>> {
    let deg = p.degree().unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let dp = p.derivative();
    let lead = p.leading().norm();
    // Initial radius: geometric mean of the root moduli bound.
    let radius = p.coeffs().iter().take(deg).map(|c| (c.norm() / lead).powf(1.0 / deg as f64)).fold(0.0, f64::max).max(1e-3);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4))
        .collect();
    let mut converged = vec![false; deg];
    for _ in 0..2000 {
        let mut all = true;
        for k in 0..deg {
            if converged[k] {
                continue;
            }
            let pv = p.eval(z[k]);
            if pv == Complex64::default() {
                converged[k] = true;
                continue;
            }
            let ratio = pv / dp.eval(z[k]);
            let repulsion: Complex64 = (0..deg).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                all = false;
                let nudge = Complex64::new(1e-8, 1e-8) * (1.0 + z[k].norm());
                z[k] += nudge;
                continue;
            }
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z[k].norm())
                || p.eval(z[k]).norm() <= 8.0 * f64::EPSILON * p.eval_magnitude(z[k])
            {
                converged[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            return Ok(z);
        }
    }
    // Accept slow (multiple-root) convergence if backward error is small.
    let worst = z
        .iter()
        .map(|&r| p.eval(r).norm() / p.eval_magnitude(r).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if worst < 1e-10 {
        Ok(z)
    } else {
        Err(Error::NonConvergence { what: "Aberth root finder".into(), residual: worst })
    }
}

/// Group numerically coincident roots; returns `(mean, multiplicity)` pairs.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &r in roots {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|&s| (s - r).norm() <= tol * (1.0 + r.norm())))
        {
            Some(group) => group.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| (g.iter().sum::<Complex64>() / g.len() as f64, g.len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn division_round_trip() {
        let a = Poly::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)]);
        let b = Poly::new(vec![c(0.5, 0.0), c(1.0, -1.0)]);
        let (q, r) = a.div_rem(&b);
        let back = q.mul(&b).add(&r);
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn taylor_shift_round_trip() {
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, -1.0), c(0.0, 3.0), c(-1.0, 0.5)]);
        let p0 = c(0.7, -0.2);
        let t = p.taylor_at(p0);
        assert!((t[0] - p.eval(p0)).norm() < 1e-14);
        assert!((t[1] - p.derivative().eval(p0)).norm() < 1e-13);
        let back = Poly::from_taylor(&t, p0);
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn roots_of_known_polynomial() {
        let want = [c(1.0, 0.0), c(-2.0, 0.5), c(0.0, 3.0), c(0.25, -0.25)];
        let p = Poly::from_roots(&want);
        let got = p.roots().unwrap();
        for w in want {
            assert!(got.iter().any(|g| (g - w).norm() < 1e-12));
        }
    }

    #[test]
    fn double_root_clusters() {
        let p = Poly::from_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let groups = cluster_roots(&p.roots().unwrap(), 1e-5);
        assert_eq!(groups.len(), 2);
        assert!(groups.iter().any(|(r, m)| *m == 3 && r.norm() < 1e-10));
        let p = Poly::from_roots(&[c(1.0, 1.0), c(1.0, 1.0), c(-1.0, 0.0)]);
        let groups = p.distinct_roots(1e-5).unwrap();
        assert!(groups.iter().any(|(r, m)| *m == 2 && (r - c(1.0, 1.0)).norm() < 1e-9));
    }
}
