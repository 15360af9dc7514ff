//! Husimi-Kano Q distributions of eigenstates in the lower-lower band
//! phase space (x, theta), with classical energy contours to overlay.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::BandId;
use crate::eigen::EigenSolution;
use crate::params::ModelParams;
use crate::{Error, Result};

use std::f64::consts::{FRAC_PI_2, PI};

/// Q values on a rectangular (x, theta) grid. theta is periodic with
/// period pi, so the grid wraps at ±pi/2.
#[derive(Debug, Clone)]
pub struct HusimiGrid {
    pub xs: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Row-major: q[i_theta][i_x].
    pub q: Vec<Vec<f64>>,
    pub kappa: f64,
}

/// Base squeezing `kappa_0 = (N^3 g^2 / (8 J^2))^(1/8)` from the
/// harmonic approximation near the band-4 minimum.
pub fn kappa0(params: &ModelParams) -> f64 {
    let n = params.n as f64;
    (n.powi(3) * params.g * params.g / (8.0 * params.j * params.j)).powf(0.125)
}

/// Gaussian widths (sigma_x, sigma_theta) of the harmonic ground state
/// with effective hbar = 1/N. The quadratic expansion of H4 around its
/// minimum is `2J theta^2 + (g'/4 + J/2) x^2`; for a Hamiltonian
/// `a theta^2 + b x^2` the ground widths are `sigma_x^2 = (h/2) sqrt(a/b)`
/// and `sigma_theta^2 = (h/2) sqrt(b/a)`.
pub fn harmonic_widths(params: &ModelParams) -> (f64, f64) {
    let h = params.h();
    let a = 2.0 * params.j;
    let b = params.gprime() / 4.0 + params.j / 2.0;
    let sigma_x2 = 0.5 * h * (a / b).sqrt();
    let sigma_t2 = 0.5 * h * (b / a).sqrt();
    (sigma_x2.sqrt(), sigma_t2.sqrt())
}

/// Squeezing tuner: s = 1 for the ground state, rising linearly to 2 at
/// the top of the band-4 window.
pub fn squeeze_for_energy(params: &ModelParams, eps: f64) -> f64 {
    let gp = params.gprime();
    let bottom = -2.0 * gp - params.j;
    let top = -std::f64::consts::SQRT_2 * gp;
    let frac = ((eps - bottom) / (top - bottom)).clamp(0.0, 1.0);
    1.0 + frac
}

/// Q(x, theta) from band-4 amplitudes C4(Z):
/// `|(kappa^2/pi)^{1/4} sum_Z C4(Z) exp(i Z theta - kappa^2 (Z/N - x)^2 / 2)|^2`.
pub fn husimi_q(
    amplitudes: &[(i64, f64)],
    params: &ModelParams,
    nx: usize,
    ntheta: usize,
    s: f64,
) -> HusimiGrid {
    let n = params.n as f64;
    let kappa = s * kappa0(params);
    let k2 = kappa * kappa;
    let pref = (k2 / PI).powf(0.25);
    let xs: Vec<f64> = (0..nx).map(|i| -1.0 + 2.0 * i as f64 / (nx - 1) as f64).collect();
    let thetas: Vec<f64> =
        (0..ntheta).map(|i| -FRAC_PI_2 + PI * i as f64 / (ntheta - 1) as f64).collect();
    let q: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&theta| {
            xs.iter()
                .map(|&x| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(z, c) in amplitudes {
                        if c == 0.0 {
                            continue;
                        }
                        let dx = z as f64 / n - x;
                        let gauss = (-0.5 * k2 * dx * dx).exp();
                        if gauss > 1e-300 {
                            let phase = z as f64 * theta;
                            acc += c * gauss * Complex64::new(phase.cos(), phase.sin());
                        }
                    }
                    (pref * acc.norm()).powi(2)
                })
                .collect()
        })
        .collect();
    HusimiGrid { xs, thetas, q, kappa }
}

/// Q distribution of one eigenstate. Rejects states that are not
/// dominated by the lower-lower band, reporting the leakage.
pub fn husimi_q_of_state(
    sol: &EigenSolution,
    state: usize,
    nx: usize,
    ntheta: usize,
    s: Option<f64>,
) -> Result<HusimiGrid> {
    let amps = sol.band_amplitudes(state, BandId::LowerLower);
    let weight: f64 = amps.iter().map(|(_, c)| c * c).sum();
    if weight < 0.5 {
        return Err(Error::Domain(format!(
            "state {state} is not band-4 dominated (leakage {:.3})",
            1.0 - weight
        )));
    }
    let s = s.unwrap_or_else(|| squeeze_for_energy(&sol.params, sol.eps[state]));
    Ok(husimi_q(&amps, &sol.params, nx, ntheta, s))
}

impl HusimiGrid {
    pub fn max(&self) -> f64 {
        self.q.iter().flatten().fold(0.0f64, |m, &v| m.max(v))
    }

    /// Value at the grid point nearest (x, theta).
    pub fn value_near(&self, x: f64, theta: f64) -> f64 {
        let ix = self
            .xs
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let it = self
            .thetas
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - theta).abs().total_cmp(&(b.1 - theta).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.q[it][ix]
    }

    /// Centroid-removed second moments (sigma_x, sigma_theta) of Q.
    pub fn second_moments(&self) -> (f64, f64) {
        let mut w = 0.0;
        let mut mx = 0.0;
        let mut mt = 0.0;
        for (it, row) in self.q.iter().enumerate() {
            for (ix, &v) in row.iter().enumerate() {
                w += v;
                mx += v * self.xs[ix];
                mt += v * self.thetas[it];
            }
        }
        mx /= w;
        mt /= w;
        let mut vx = 0.0;
        let mut vt = 0.0;
        for (it, row) in self.q.iter().enumerate() {
            for (ix, &v) in row.iter().enumerate() {
                vx += v * (self.xs[ix] - mx).powi(2);
                vt += v * (self.thetas[it] - mt).powi(2);
            }
        }
        ((vx / w).sqrt(), (vt / w).sqrt())
    }

    /// Number of connected components of {Q >= frac * max(Q)} with theta
    /// periodic, plus whether the phase-space origin lies below the cut
    /// (distinguishing rings from filled blobs).
    pub fn components_at(&self, frac: f64) -> (usize, bool) {
        let cut = frac * self.max();
        let nt = self.thetas.len();
        let nx = self.xs.len();
        let mut mask: Vec<Vec<bool>> =
            self.q.iter().map(|row| row.iter().map(|&v| v >= cut).collect()).collect();
        let mut count = 0;
        let mut stack = Vec::new();
        for it0 in 0..nt {
            for ix0 in 0..nx {
                if !mask[it0][ix0] {
                    continue;
                }
                count += 1;
                stack.push((it0, ix0));
                mask[it0][ix0] = false;
                while let Some((it, ix)) = stack.pop() {
                    let mut push = |jt: usize, jx: usize| {
                        if mask[jt][jx] {
                            mask[jt][jx] = false;
                            stack.push((jt, jx));
                        }
                    };
                    if ix > 0 {
                        push(it, ix - 1);
                    }
                    if ix + 1 < nx {
                        push(it, ix + 1);
                    }
                    // theta wraps: rows 0 and nt-1 are the same cut line
                    push(if it == 0 { nt - 1 } else { it - 1 }, ix);
                    push(if it + 1 == nt { 0 } else { it + 1 }, ix);
                }
            }
        }
        (count, self.value_near(0.0, 0.0) < cut)
    }
}

/// Classical band-4 Hamiltonian on phase space:
/// `H4(x, theta) = -g'(sqrt(1-x) + sqrt(1+x)) - J sqrt(1-x^2) cos(2 theta)`.
pub fn h4(params: &ModelParams, x: f64, theta: f64) -> f64 {
    let gp = params.gprime();
    -gp * ((1.0 - x).max(0.0).sqrt() + (1.0 + x).max(0.0).sqrt())
        - params.j * (1.0 - x * x).max(0.0).sqrt() * (2.0 * theta).cos()
}

/// One iso-energy polyline segment set of H4.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourLevel {
    pub eps: f64,
    /// Line segments ((x0, t0), (x1, t1)) from marching squares.
    pub segments: Vec<((f64, f64), (f64, f64))>,
}

/// Marching-squares level sets of H4 on a uniform grid.
pub fn classical_contours(
    params: &ModelParams,
    energies: &[f64],
    nx: usize,
    ntheta: usize,
) -> Vec<ContourLevel> {
    let xs: Vec<f64> = (0..nx).map(|i| -1.0 + 2.0 * i as f64 / (nx - 1) as f64).collect();
    let ts: Vec<f64> =
        (0..ntheta).map(|i| -FRAC_PI_2 + PI * i as f64 / (ntheta - 1) as f64).collect();
    let grid: Vec<Vec<f64>> =
        ts.iter().map(|&t| xs.iter().map(|&x| h4(params, x, t)).collect()).collect();

    energies
        .iter()
        .map(|&eps| {
            let mut segments = Vec::new();
            for it in 0..ntheta - 1 {
                for ix in 0..nx - 1 {
                    // corner values, counterclockwise from (ix, it)
                    let v = [
                        grid[it][ix] - eps,
                        grid[it][ix + 1] - eps,
                        grid[it + 1][ix + 1] - eps,
                        grid[it + 1][ix] - eps,
                    ];
                    let p = [
                        (xs[ix], ts[it]),
                        (xs[ix + 1], ts[it]),
                        (xs[ix + 1], ts[it + 1]),
                        (xs[ix], ts[it + 1]),
                    ];
                    let mut crossings = Vec::new();
                    for e in 0..4 {
                        let (a, b) = (v[e], v[(e + 1) % 4]);
                        if (a < 0.0) != (b < 0.0) {
                            let t = a / (a - b);
                            let (pa, pb) = (p[e], p[(e + 1) % 4]);
                            crossings.push((
                                pa.0 + t * (pb.0 - pa.0),
                                pa.1 + t * (pb.1 - pa.1),
                            ));
                        }
                    }
                    // pair crossings; ambiguous saddles just get both pairs
                    if crossings.len() == 2 {
                        segments.push((crossings[0], crossings[1]));
                    } else if crossings.len() == 4 {
                        segments.push((crossings[0], crossings[1]));
                        segments.push((crossings[2], crossings[3]));
                    }
                }
            }
            ContourLevel { eps, segments }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::diagonalize;
    use crate::hamiltonian::build;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kappa0_closed_form() {
        // N = 100, g = 1, J = 0.1: (1e6 / 0.08)^(1/8)
        let p = ModelParams::new(100, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(kappa0(&p), (1.25e7f64).powf(0.125), epsilon = 1e-12);
        assert_abs_diff_eq!(kappa0(&p), 7.711, epsilon = 1e-3);
    }

    #[test]
    fn harmonic_widths_scale_with_n() {
        let p1 = ModelParams::from_j_over_gprime(100, 1.0 / 3.0, 1.0).unwrap();
        let p2 = ModelParams::from_j_over_gprime(400, 1.0 / 3.0, 1.0).unwrap();
        let (sx1, st1) = harmonic_widths(&p1);
        let (sx2, st2) = harmonic_widths(&p2);
        assert_abs_diff_eq!(sx1 / sx2, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(st1 / st2, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ground_state_is_a_single_peak_at_origin() {
        let params = ModelParams::from_j_over_gprime(100, 1.0 / 3.0, 1.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        let q = husimi_q_of_state(&sol, 0, 101, 101, Some(1.0)).unwrap();
        // nonnegative everywhere; peak at the band minimum (0, 0)
        assert!(q.q.iter().flatten().all(|&v| v >= 0.0));
        let peak = q.max();
        assert!(q.value_near(0.0, 0.0) > 0.95 * peak);
        let (count, ring) = q.components_at(0.5);
        assert_eq!(count, 1);
        assert!(!ring);
        // Q is the state convolved with the coherent envelope; removing
        // the known envelope variances (1/(2 kappa^2) in x, h^2 kappa^2 / 2
        // in theta) leaves the harmonic ground-state widths
        let (qx, qt) = q.second_moments();
        let (sx, st) = harmonic_widths(&params);
        let h = params.h();
        let sx_meas = (qx * qx - 0.5 / (q.kappa * q.kappa)).max(0.0).sqrt();
        let st_meas = (qt * qt - 0.5 * h * h * q.kappa * q.kappa).max(0.0).sqrt();
        assert_abs_diff_eq!(sx_meas, sx, epsilon = 0.1 * sx);
        assert_abs_diff_eq!(st_meas, st, epsilon = 0.1 * st);
    }

    #[test]
    fn q_is_parity_symmetric() {
        let params = ModelParams::from_j_over_gprime(60, 1.0 / 3.0, 1.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        let q = husimi_q_of_state(&sol, 4, 61, 61, None).unwrap();
        let nt = q.thetas.len();
        let nx = q.xs.len();
        let peak = q.max();
        for it in 0..nt {
            for ix in 0..nx {
                let v = q.q[it][ix];
                let w = q.q[nt - 1 - it][nx - 1 - ix];
                assert!((v - w).abs() < 1e-8 * peak, "Q(x,t) != Q(-x,-t)");
            }
        }
    }

    #[test]
    fn rejects_non_band4_states() {
        let params = ModelParams::from_j_over_gprime(60, 1.0 / 3.0, 1.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        // topmost state lives in the upper-upper band
        let top = sol.len() - 1;
        assert!(husimi_q_of_state(&sol, top, 31, 31, None).is_err());
    }

    #[test]
    fn contours_contain_minimum_and_respect_parity() {
        let params = ModelParams::from_j_over_gprime(100, 1.0 / 3.0, 1.0).unwrap();
        let gp = params.gprime();
        let bottom = -2.0 * gp - params.j;
        // near-bottom contour encircles the origin tightly
        let lv = classical_contours(&params, &[bottom + 0.02 * gp], 201, 201);
        assert!(!lv[0].segments.is_empty());
        for &((x0, t0), (x1, t1)) in &lv[0].segments {
            for (x, t) in [(x0, t0), (x1, t1)] {
                assert!(x.abs() < 0.4 && t.abs() < 0.8, "contour point ({x}, {t})");
            }
        }
        // symmetry of the level set under (x, t) -> (-x, -t): for every
        // segment midpoint the reflected H4 value is identical
        for &((x0, t0), (x1, t1)) in lv[0].segments.iter().take(50) {
            let (mx, mt) = (0.5 * (x0 + x1), 0.5 * (t0 + t1));
            assert_abs_diff_eq!(
                h4(&params, mx, mt),
                h4(&params, -mx, -mt),
                epsilon = 1e-12
            );
        }
    }
}
