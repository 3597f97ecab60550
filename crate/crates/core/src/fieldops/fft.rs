use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

fn plan(len: usize, direction: Direction) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    let mut guard = planner.lock().unwrap_or_else(|e| e.into_inner());
    match direction {
        Direction::Forward => guard.plan_fft_forward(len),
        Direction::Inverse => guard.plan_fft_inverse(len),
    }
}

fn rows(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    const ROWS_PER_TASK: usize = 8;
    data.par_chunks_mut(n * ROWS_PER_TASK).for_each(|chunk| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = data[i * n + j];
        }
    });
    out
}

/// Unnormalised 2-D DFT of an `n × n` row-major array, in place.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, direction: Direction) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, direction);
    rows(data, n, &fft);
    let mut t = transpose(data, n);
    rows(&mut t, n, &fft);
    let back = transpose(&t, n);
    data.copy_from_slice(&back);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_dft() {
        let n = 6;
        let data: Vec<Complex64> = (0..n * n)
            .map(|j| Complex64::new((j as f64).sin(), (0.3 * j as f64).cos()))
            .collect();
        let mut fast = data.clone();
        fft2(&mut fast, n, Direction::Forward);
        for a in 0..n {
            for b in 0..n {
                let mut acc = Complex64::default();
                for i in 0..n {
                    for k in 0..n {
                        let ang = -2.0 * std::f64::consts::PI * ((a * i + b * k) as f64) / n as f64;
                        acc += data[i * n + k] * Complex64::from_polar(1.0, ang);
                    }
                }
                assert!((acc - fast[a * n + b]).norm() < 1e-12);
            }
        }
        fft2(&mut fast, n, Direction::Inverse);
        for (x, y) in fast.iter().zip(&data) {
            assert!((x / (n * n) as f64 - y).norm() < 1e-13);
        }
    }
}
