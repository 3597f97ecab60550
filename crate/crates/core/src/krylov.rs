//! Restarted GMRES for complex linear operators given as closures.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-10, restart: 60, max_iterations: 600 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve `A x = b` starting from zero.
pub fn gmres<F>(mut apply: F, rhs: &[Complex64], opts: GmresOptions) -> GmresOutcome
where
    F: FnMut(&[Complex64]) -> Vec<Complex64>,
{
    let n = rhs.len();
    let bnorm = norm(rhs);
    let mut x = vec![Complex64::default(); n];
    if bnorm == 0.0 {
        return GmresOutcome { solution: x, iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < opts.max_iterations {
        let ax = apply(&x);
        let r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= opts.tol {
            return GmresOutcome { solution: x, iterations, relative_residual: rel, converged: true };
        }
        let m = opts.restart;
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess = vec![vec![Complex64::default(); m]; m + 1];
        let mut cs = vec![Complex64::default(); m];
        let mut sn = vec![Complex64::default(); m];
        let mut g = vec![Complex64::default(); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            iterations += 1;
            k_used = k + 1;
            let mut w = apply(&basis[k]);
            for (j, v) in basis.iter().enumerate() {
                let h = dot(v, &w);
                hess[j][k] = h;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= h * vi;
                }
            }
            let hn = norm(&w);
            hess[k + 1][k] = Complex64::new(hn, 0.0);
            for j in 0..k {
                let t = cs[j].conj() * hess[j][k] + sn[j].conj() * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let (a, b) = (hess[k][k], hess[k + 1][k]);
            let denom = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if denom == 0.0 {
                break;
            }
            cs[k] = a / denom;
            sn[k] = b / denom;
            hess[k][k] = Complex64::new(denom, 0.0);
            hess[k + 1][k] = Complex64::default();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            rel = g[k + 1].norm() / bnorm;
            if rel <= opts.tol || hn == 0.0 || iterations >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![Complex64::default(); k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= hess[i][j] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
        if rel <= opts.tol {
            let ax = apply(&x);
            let true_rel = norm(&rhs.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>()) / bnorm;
            if true_rel <= 10.0 * opts.tol {
                return GmresOutcome { solution: x, iterations, relative_residual: true_rel, converged: true };
            }
            rel = true_rel;
        }
    }
    GmresOutcome { solution: x, iterations, relative_residual: rel, converged: rel <= opts.tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let n = 30;
        let a = |i: usize, j: usize| {
            if i == j {
                Complex64::new(3.0, 0.5)
            } else {
                Complex64::new(((i * 7 + j * 3) % 5) as f64 * 0.05, ((i + 2 * j) % 3) as f64 * 0.04)
            }
        };
        let truth: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let apply = |x: &[Complex64]| (0..n).map(|i| (0..n).map(|j| a(i, j) * x[j]).sum()).collect::<Vec<_>>();
        let b = apply(&truth);
        let out = gmres(apply, &b, GmresOptions { tol: 1e-12, restart: 10, max_iterations: 200 });
        assert!(out.converged);
        for (x, t) in out.solution.iter().zip(&truth) {
            assert!((x - t).norm() < 1e-9);
        }
    }
}
