//! Complex scalar helpers: roots of unity and guarded integer rounding.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub type Cx = Complex64;

pub const ONE: Cx = Cx::new(1.0, 0.0);
pub const ZERO: Cx = Cx::new(0.0, 0.0);

/// Tolerance used everywhere an inner product is asserted to be an integer.
pub const INT_TOL: f64 = 1e-6;

/// exp(2*pi*i*k/n).
pub fn unit_root(n: u64, k: i64) -> Cx {
    let n = n as i64;
    let k = k.rem_euclid(n);
    let t = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
    Cx::new(t.cos(), t.sin())
}

/// Table of exp(2*pi*i*k/n) for k in 0..n.
pub fn unit_root_table(n: u64) -> Vec<Cx> {
    (0..n as i64).map(|k| unit_root(n, k)).collect()
}

/// Round a complex value to the nearest integer, failing if the residual
/// exceeds `INT_TOL`.
pub fn round_int(z: Cx) -> Result<i64> {
    let r = z.re.round();
    let residual = ((z.re - r).powi(2) + z.im.powi(2)).sqrt();
    if residual >= INT_TOL {
        return Err(Error::Rounding { value: z.re, residual, tol: INT_TOL });
    }
    Ok(r as i64)
}

pub fn approx_eq(a: Cx, b: Cx, tol: f64) -> bool {
    (a - b).norm() < tol
}

pub fn max_abs_diff(a: &[Cx], b: &[Cx]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_unity_sum_to_zero() {
        for n in [2u64, 3, 5, 8] {
            let s: Cx = (0..n as i64).map(|k| unit_root(n, k)).sum();
            assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn rounding_guard_rejects_non_integers() {
        assert_eq!(round_int(Cx::new(3.0 + 1e-9, -1e-9)).unwrap(), 3);
        assert!(round_int(Cx::new(2.5, 0.0)).is_err());
        assert!(round_int(Cx::new(1.0, 1e-3)).is_err());
    }
}
