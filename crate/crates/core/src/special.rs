//! Bessel and Hankel functions of integer order on the real axis.

use num_complex::Complex64;

/// `J_m(x)` for any integer order, `x >= 0`.
pub fn bessel_j(m: i64, x: f64) -> f64 {
    let v = puruspe::Jn(m.unsigned_abs() as u32, x);
    if m < 0 && m % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `Y_m(x)` for any integer order, `x > 0`.
pub fn bessel_y(m: i64, x: f64) -> f64 {
    let v = puruspe::Yn(m.unsigned_abs() as u32, x);
    if m < 0 && m % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Outgoing Hankel function `H_m^(1)(x) = J_m + i Y_m`.
pub fn hankel1(m: i64, x: f64) -> Complex64 {
    Complex64::new(bessel_j(m, x), bessel_y(m, x))
}

/// Incoming Hankel function `H_m^(2)(x) = J_m - i Y_m`.
pub fn hankel2(m: i64, x: f64) -> Complex64 {
    Complex64::new(bessel_j(m, x), -bessel_y(m, x))
}
