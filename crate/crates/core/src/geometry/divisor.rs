use std::fmt;

use num_complex::Complex64;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            Point::Infinity => write!(f, "∞"),
        }
    }
}

/// Finite formal product of points with nonzero integer exponents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Divisor {
    entries: Vec<(Point, i64)>,
}

impl Divisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (Point, i64)>>(entries: I) -> Self {
        let mut d = Self::new();
        for (p, k) in entries {
            d.add(p, k);
        }
        d
    }

    /// Multiply by `p^k`.
    pub fn add(&mut self, p: Point, k: i64) {
        if let Some(pos) = self.entries.iter().position(|(q, _)| *q == p) {
            self.entries[pos].1 += k;
            if self.entries[pos].1 == 0 {
                self.entries.remove(pos);
            }
        } else if k != 0 {
            self.entries.push((p, k));
        }
    }

    pub fn entries(&self) -> &[(Point, i64)] {
        &self.entries
    }

    pub fn exponent_at(&self, p: Point) -> i64 {
        self.entries.iter().find(|(q, _)| *q == p).map_or(0, |(_, k)| *k)
    }

    pub fn degree(&self) -> i64 {
        self.entries.iter().map(|(_, k)| k).sum()
    }

    pub fn inverse(&self) -> Self {
        Self { entries: self.entries.iter().map(|&(p, k)| (p, -k)).collect() }
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut d = self.clone();
        for &(p, k) in &other.entries {
            d.add(p, k);
        }
        d
    }

    /// `self ≥ other` in the divisor order.
    pub fn dominates(&self, other: &Self) -> bool {
        let points = self.entries.iter().chain(&other.entries).map(|(p, _)| *p);
        points.into_iter().all(|p| self.exponent_at(p) >= other.exponent_at(p))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bookkeeping() {
        let e1 = Point::Finite(Complex64::new(1.0, 0.0));
        let e2 = Point::Finite(Complex64::new(-1.0, 0.0));
        let d = Divisor::from_entries([(e1, -1), (e2, -1)]);
        assert_eq!(d.degree(), -2);
        assert_eq!(d.inverse().degree(), 2);
        assert!(d.product(&d.inverse()).is_empty());
        assert!(d.inverse().dominates(&d));
        let canonical = Divisor::from_entries([(Point::Infinity, -2)]);
        assert_eq!(canonical.degree(), -2);
    }
}
