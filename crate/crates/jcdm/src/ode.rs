//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)) for
//! the classical trajectory work. Fixed-size state vectors, an accepted-
//! step observer for section detection and time averaging, and support
//! for integrating backward in time.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 50_000_000 }
    }
}

/// One accepted step, with derivatives at both ends for Hermite
/// interpolation by observers.
pub struct StepRecord<'a, const D: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [f64; D],
    pub y1: &'a [f64; D],
    pub f0: &'a [f64; D],
    pub f1: &'a [f64; D],
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate dy/dt = f(t, y) from t0 to t1 (either direction). The
/// observer sees every accepted step; returning `false` stops the run
/// early with the current state.
pub fn integrate_observed<const D: usize, F, O>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: [f64; D],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<[f64; D]>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    O: FnMut(&StepRecord<'_, D>) -> bool,
{
    if t0 == t1 {
        return Ok(y0);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = dir * (span / 1e4).min(1e-3 * span).max(span * 1e-12);

    for _ in 0..opts.max_steps {
        if (t - t1) * dir >= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }

        let k2 = f(t + 0.2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + 0.3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + 0.8 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + 8.0 / 9.0 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err = 0.0f64;
        for i in 0..D {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / scale) * (e / scale);
        }
        err = (err / D as f64).sqrt();

        if err <= 1.0 {
            let rec = StepRecord { t0: t, t1: t + h, y0: &y, y1: &y_new, f0: &k1, f1: &k7 };
            let keep_going = observer(&rec);
            t += h;
            y = y_new;
            k1 = k7; // FSAL
            if !keep_going {
                return Ok(y);
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < span * 1e-15 {
            return Err(Error::Numerical(format!("step size underflow at t = {t}")));
        }
    }
    Err(Error::Numerical(format!(
        "step budget exhausted at t = {t} (of {t1})"
    )))
}

/// [`integrate_observed`] without early stopping.
pub fn integrate<const D: usize, F, O>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: [f64; D],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<[f64; D]>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    O: FnMut(&StepRecord<'_, D>),
{
    integrate_observed(f, t0, t1, y0, opts, |rec| {
        observer(rec);
        true
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_oscillator_accuracy() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = integrate(&f, 0.0, 10.0 * PI, [1.0, 0.0], &OdeOptions::default(), |_| {}).unwrap();
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn backward_integration() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let y = integrate(&f, 0.0, -1.0, [1.0], &OdeOptions::default(), |_| {}).unwrap();
        assert_abs_diff_eq!(y[0], (-1.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn observer_sees_contiguous_steps() {
        let f = |t: f64, _y: &[f64; 1]| [t.cos()];
        let mut last_end = 0.0;
        let mut count = 0;
        integrate(&f, 0.0, 5.0, [0.0], &OdeOptions::default(), |rec| {
            assert_abs_diff_eq!(rec.t0, last_end, epsilon = 1e-14);
            last_end = rec.t1;
            count += 1;
        })
        .unwrap();
        assert!(count > 0);
        assert_abs_diff_eq!(last_end, 5.0, epsilon = 1e-12);
    }
}
