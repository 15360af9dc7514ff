//! Principal-branch complex log-Gamma via the Lanczos approximation.
//!
//! Only a narrow strip of arguments is ever needed here (z = 1/2 ± i chi
//! in the critical-level quantization rule), but the implementation is
//! valid on the whole right half plane with reflection for Re z < 1/2.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{Error, Result};

const G: f64 = 7.0;
const COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// log Gamma(z), principal branch.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Domain(format!("log-gamma pole at z = {z}")));
    }
    if z.re < 0.5 {
        // reflection: log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
        let sin_piz = (PI * z).sin();
        if sin_piz.norm() == 0.0 {
            return Err(Error::Domain(format!("log-gamma pole at z = {z}")));
        }
        let lg = ln_gamma(Complex64::new(1.0, 0.0) - z)?;
        return Ok(Complex64::new(PI, 0.0).ln() - sin_piz.ln() - lg);
    }
    let zm1 = z - 1.0;
    let mut series = Complex64::new(COEFFS[0], 0.0);
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        series += c / (zm1 + i as f64);
    }
    let t = zm1 + G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (zm1 + 0.5) * t.ln() - t + series.ln())
}

/// Gamma(z) itself; overflows for large |z| like the real function.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(z)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gamma_half_is_sqrt_pi() {
        let g = gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(g.re, PI.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(g.im, 0.0, epsilon = 1e-14);
        // arg Gamma(1/2) = 0
        assert_abs_diff_eq!(g.arg(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn integer_values() {
        for (n, expect) in [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0), (5.0, 24.0), (8.0, 5040.0)] {
            let g = gamma(Complex64::new(n, 0.0)).unwrap();
            assert_abs_diff_eq!(g.re, expect, epsilon = 1e-10 * expect);
        }
    }

    #[test]
    fn reflection_identity_on_critical_line() {
        // |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
        for &y in &[0.1, 1.0, 3.0, 10.0, 25.0, 50.0] {
            let lg = ln_gamma(Complex64::new(0.5, y)).unwrap();
            let norm2 = (2.0 * lg.re).exp();
            let expect = PI / (PI * y).cosh();
            assert_abs_diff_eq!(norm2 / expect, 1.0, epsilon = 1e-12);
        }
        // spec anchor at y = 1
        let lg = ln_gamma(Complex64::new(0.5, 1.0)).unwrap();
        assert_abs_diff_eq!((2.0 * lg.re).exp(), PI / PI.cosh(), epsilon = 1e-13);
    }

    #[test]
    fn conjugation_symmetry() {
        for &y in &[0.3, 2.0, 17.0] {
            let a = ln_gamma(Complex64::new(0.5, y)).unwrap();
            let b = ln_gamma(Complex64::new(0.5, -y)).unwrap();
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12 * a.re.abs().max(1.0));
            assert_abs_diff_eq!(a.im, -b.im, epsilon = 1e-12 * a.im.abs().max(1.0));
        }
    }

    #[test]
    fn recurrence_in_strip() {
        // Gamma(z+1) = z Gamma(z) on the use strip Re = 0.4..0.6
        for &re in &[0.4, 0.5, 0.6] {
            for &im in &[0.0, 0.5, 5.0, 40.0] {
                let z = Complex64::new(re, im);
                let lhs = ln_gamma(z + 1.0).unwrap();
                let rhs = ln_gamma(z).unwrap() + z.ln();
                let diff = (lhs - rhs).norm();
                assert!(diff < 1e-12 * lhs.norm().max(1.0), "z={z}, diff={diff}");
            }
        }
    }

    #[test]
    fn pole_rejected() {
        assert!(ln_gamma(Complex64::new(0.0, 0.0)).is_err());
        assert!(ln_gamma(Complex64::new(-3.0, 0.0)).is_err());
    }
}
