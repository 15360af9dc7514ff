//! Coherent-state classical dynamics of the dimer: full 8D flow, the
//! restricted 4D flow, the dynamical localization threshold, and
//! Poincaré sections.
//!
//! Everything is integrated in Cartesian spin coordinates `n = B x n`
//! (regular at the poles); the Bloch-angle form of the equations is
//! exposed for direct checks and converted at the boundary. The angle
//! convention is `n = (sin th cos ph, sin th sin ph, -cos th)`, so
//! `th = 0` is a fully de-excited qubit.

use serde::{Deserialize, Serialize};

use crate::ode::{integrate, integrate_observed, OdeOptions, StepRecord};
use crate::params::ModelParams;
use crate::{Error, Result};

/// Spin length; qubits are S = 1/2.
pub const SPIN: f64 = 0.5;

/// Bloch angles and cavity quadratures for both sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub theta_l: f64,
    pub phi_l: f64,
    pub theta_r: f64,
    pub phi_r: f64,
    pub r_l: f64,
    pub i_l: f64,
    pub r_r: f64,
    pub i_r: f64,
}

/// Cartesian representation used internally by the integrator:
/// [nx_L, ny_L, nz_L, R_L, I_L, nx_R, ny_R, nz_R, R_R, I_R].
pub type CartesianState = [f64; 10];

impl ClassicalState {
    pub fn to_cartesian(&self) -> CartesianState {
        let site = |th: f64, ph: f64| (th.sin() * ph.cos(), th.sin() * ph.sin(), -th.cos());
        let (xl, yl, zl) = site(self.theta_l, self.phi_l);
        let (xr, yr, zr) = site(self.theta_r, self.phi_r);
        [xl, yl, zl, self.r_l, self.i_l, xr, yr, zr, self.r_r, self.i_r]
    }

    pub fn from_cartesian(y: &CartesianState) -> Self {
        let angles = |x: f64, yy: f64, z: f64| {
            let s = (x * x + yy * yy).sqrt();
            ((-z).acos().max(0.0), if s > 0.0 { yy.atan2(x) } else { 0.0 })
        };
        let (theta_l, phi_l) = angles(y[0], y[1], y[2]);
        let (theta_r, phi_r) = angles(y[5], y[6], y[7]);
        ClassicalState {
            theta_l,
            phi_l,
            theta_r,
            phi_r,
            r_l: y[3],
            i_l: y[4],
            r_r: y[8],
            i_r: y[9],
        }
    }
}

/// Conserved classical energy (rotating frame, resonance):
/// `E = 2gS sum_s sin th_s (R_s cos ph_s - I_s sin ph_s) - 2J (R_L R_R + I_L I_R)`.
pub fn energy(params: &ModelParams, y: &CartesianState) -> f64 {
    let g = params.g;
    let spin = 2.0 * g * SPIN * (y[3] * y[0] - y[4] * y[1] + y[8] * y[5] - y[9] * y[6]);
    spin - 2.0 * params.j * (y[3] * y[8] + y[4] * y[9])
}

/// Conserved classical polariton number
/// `N = sum_s [R_s^2 + I_s^2 + S (n_z,s + 1)]`.
pub fn polariton_number(y: &CartesianState) -> f64 {
    y[3] * y[3] + y[4] * y[4] + SPIN * (y[2] + 1.0) + y[8] * y[8] + y[9] * y[9] + SPIN * (y[7] + 1.0)
}

/// Normalized imbalance `(n_L - n_R) / N_tot`.
pub fn imbalance(y: &CartesianState) -> f64 {
    let nl = y[3] * y[3] + y[4] * y[4] + SPIN * (y[2] + 1.0);
    let nr = y[8] * y[8] + y[9] * y[9] + SPIN * (y[7] + 1.0);
    (nl - nr) / (nl + nr)
}

/// Cartesian vector field: `n_s' = B_s x n_s` with `B_s = (2g R_s, -2g I_s, 0)`,
/// `R_s' = -gS n_y,s - J I_sbar`, `I_s' = -gS n_x,s + J R_sbar`.
pub fn eom_cartesian(params: &ModelParams, y: &CartesianState) -> CartesianState {
    let g = params.g;
    let j = params.j;
    let site = |n: &[f64], r: f64, i: f64, r_o: f64, i_o: f64| {
        let bx = 2.0 * g * r;
        let by = -2.0 * g * i;
        [
            by * n[2],
            -bx * n[2],
            bx * n[1] - by * n[0],
            -g * SPIN * n[1] - j * i_o,
            -g * SPIN * n[0] + j * r_o,
        ]
    };
    let l = site(&y[0..3], y[3], y[4], y[8], y[9]);
    let r = site(&y[5..8], y[8], y[9], y[3], y[4]);
    [l[0], l[1], l[2], l[3], l[4], r[0], r[1], r[2], r[3], r[4]]
}

/// Bloch-angle form of the full equations of motion (rotating frame).
/// Singular at the spin poles, where the Cartesian flow stays regular;
/// the integrator never uses this form directly.
pub fn eom_full(state: &ClassicalState, params: &ModelParams) -> Result<ClassicalState> {
    let g = params.g;
    let j = params.j;
    let pole = |th: f64| th.sin().abs() < 1e-10;
    if pole(state.theta_l) || pole(state.theta_r) {
        return Err(Error::Domain(
            "cot(theta) pole: use the Cartesian flow near spin poles".into(),
        ));
    }
    let site = |th: f64, ph: f64, r: f64, i: f64, r_o: f64, i_o: f64| {
        let a = r * ph.cos() - i * ph.sin();
        let b = r * ph.sin() + i * ph.cos();
        (
            2.0 * g * a * th.tan().recip(),
            2.0 * g * b,
            -g * SPIN * th.sin() * ph.sin() - j * i_o,
            -g * SPIN * th.sin() * ph.cos() + j * r_o,
        )
    };
    let (dphi_l, dth_l, dr_l, di_l) =
        site(state.theta_l, state.phi_l, state.r_l, state.i_l, state.r_r, state.i_r);
    let (dphi_r, dth_r, dr_r, di_r) =
        site(state.theta_r, state.phi_r, state.r_r, state.i_r, state.r_l, state.i_l);
    Ok(ClassicalState {
        theta_l: dth_l,
        phi_l: dphi_l,
        theta_r: dth_r,
        phi_r: dphi_r,
        r_l: dr_l,
        i_l: di_l,
        r_r: dr_r,
        i_r: di_r,
    })
}

/// Restricted 4D flow on the invariant submanifold
/// `I_L = R_R = 0, ph_L = pi/2, ph_R = 0`; state is (th_L, th_R, R_L, I_R).
pub fn eom_restricted(state: &[f64; 4], params: &ModelParams) -> [f64; 4] {
    let g = params.g;
    let j = params.j;
    let (th_l, th_r, r_l, i_r) = (state[0], state[1], state[2], state[3]);
    [
        2.0 * g * r_l,
        2.0 * g * i_r,
        -g * SPIN * th_l.sin() - j * i_r,
        -g * SPIN * th_r.sin() + j * r_l,
    ]
}

/// Trajectory summary attached to every integration.
#[derive(Debug, Clone, Copy)]
pub struct DriftCertificate {
    pub energy_initial: f64,
    pub energy_final: f64,
    pub max_relative_drift: f64,
    pub polariton_relative_drift: f64,
}

/// Integrate the full Cartesian flow with an energy-drift certificate.
pub fn integrate_full(
    y0: CartesianState,
    params: &ModelParams,
    t_max: f64,
    opts: &OdeOptions,
) -> Result<(CartesianState, DriftCertificate)> {
    let f = |_t: f64, y: &CartesianState| eom_cartesian(params, y);
    let e0 = energy(params, &y0);
    let n0 = polariton_number(&y0);
    let scale = e0.abs().max(params.j * n0).max(1e-300);
    let mut max_drift = 0.0f64;
    let y1 = integrate(&f, 0.0, t_max, y0, opts, |rec: &StepRecord<'_, 10>| {
        let e = energy(params, rec.y1);
        max_drift = max_drift.max((e - e0).abs() / scale);
    })?;
    let cert = DriftCertificate {
        energy_initial: e0,
        energy_final: energy(params, &y1),
        max_relative_drift: max_drift,
        polariton_relative_drift: (polariton_number(&y1) - n0).abs() / n0.max(1e-300),
    };
    Ok((y1, cert))
}

/// Initial condition of the localization-threshold protocol: all N
/// polaritons as photons in the left cavity, left qubit de-excited,
/// right qubit tipped to `theta_r0` at `phi_R = 0`.
pub fn scan_initial_state(n: u32, theta_r0: f64) -> CartesianState {
    let state = ClassicalState {
        theta_l: 0.0,
        phi_l: 0.0,
        theta_r: theta_r0,
        phi_r: 0.0,
        r_l: (n as f64).sqrt(),
        i_l: 0.0,
        r_r: 0.0,
        i_r: 0.0,
    };
    state.to_cartesian()
}

/// Long-time average of the normalized imbalance after a transient.
/// Trapezoid accumulation over accepted steps; also returns the split-
/// window sensitivity used to flag unconverged averages.
pub fn average_imbalance(
    params: &ModelParams,
    y0: CartesianState,
    t_transient: f64,
    t_average: f64,
    opts: &OdeOptions,
) -> Result<(f64, f64)> {
    let f = |_t: f64, y: &CartesianState| eom_cartesian(params, y);
    let t_end = t_transient + t_average;
    let t_half = t_transient + 0.5 * t_average;
    let mut acc_first = 0.0;
    let mut acc_second = 0.0;
    integrate(&f, 0.0, t_end, y0, opts, |rec: &StepRecord<'_, 10>| {
        // clip the step to the averaging window(s)
        let add = |w0: f64, w1: f64, acc: &mut f64| {
            let a = rec.t0.max(w0);
            let b = rec.t1.min(w1);
            if b > a {
                let xa = imbalance(rec.y0);
                let xb = imbalance(rec.y1);
                // linear in t within the step is plenty for an average
                let fa = (a - rec.t0) / (rec.t1 - rec.t0);
                let fb = (b - rec.t0) / (rec.t1 - rec.t0);
                let xa_c = xa + (xb - xa) * fa;
                let xb_c = xa + (xb - xa) * fb;
                *acc += 0.5 * (xa_c + xb_c) * (b - a);
            }
        };
        add(t_transient, t_half, &mut acc_first);
        add(t_half, t_end, &mut acc_second);
    })?;
    let mean_first = acc_first / (0.5 * t_average);
    let mean_second = acc_second / (0.5 * t_average);
    let mean = 0.5 * (mean_first + mean_second);
    Ok((mean, (mean_first - mean_second).abs()))
}

/// One grid point of the threshold scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanPoint {
    pub theta_r0: f64,
    /// Coupling in g/(2 J sqrt(N)) units.
    pub coupling: f64,
    pub avg_imbalance: f64,
    /// Difference between the two half-window averages.
    pub sensitivity: f64,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    /// (theta_r0, threshold coupling) where the average crosses 1/2.
    pub threshold: Vec<(f64, f64)>,
}

/// Map the long-time-averaged imbalance over (theta_R(0), coupling) and
/// extract the localization threshold. Couplings are g/(2 J sqrt(N)).
pub fn threshold_scan(
    n: u32,
    j: f64,
    theta_grid: &[f64],
    coupling_grid: &[f64],
    t_transient_over_j: f64,
    t_average_over_j: f64,
) -> Result<ScanResult> {
    use rayon::prelude::*;
    let opts = OdeOptions { rtol: 1e-9, atol: 1e-9, ..Default::default() };
    let jobs: Vec<(f64, f64)> = theta_grid
        .iter()
        .flat_map(|&th| coupling_grid.iter().map(move |&c| (th, c)))
        .collect();
    let points: Vec<ScanPoint> = jobs
        .par_iter()
        .map(|&(theta_r0, coupling)| {
            let g = coupling * 2.0 * j * (n as f64).sqrt();
            let params = ModelParams::new(n, g, j)?;
            let y0 = scan_initial_state(n, theta_r0);
            let (avg, sens) = average_imbalance(
                &params,
                y0,
                t_transient_over_j / j,
                t_average_over_j / j,
                &opts,
            )?;
            Ok(ScanPoint { theta_r0, coupling, avg_imbalance: avg, sensitivity: sens })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut threshold = Vec::new();
    for &th in theta_grid {
        let mut row: Vec<&ScanPoint> =
            points.iter().filter(|p| p.theta_r0 == th).collect();
        row.sort_by(|a, b| a.coupling.total_cmp(&b.coupling));
        for w in row.windows(2) {
            if w[0].avg_imbalance < 0.5 && w[1].avg_imbalance >= 0.5 {
                let frac = (0.5 - w[0].avg_imbalance)
                    / (w[1].avg_imbalance - w[0].avg_imbalance);
                threshold.push((th, w[0].coupling + frac * (w[1].coupling - w[0].coupling)));
                break;
            }
        }
    }
    Ok(ScanResult { points, threshold })
}

/// Critical coupling from the driven-pendulum reduction, in
/// `g/(2 J sqrt(N))` units: `1/sin(theta_0)` with `theta_0` the nonzero
/// root of `sin t + (cos t - cos theta_r0)/(t - theta_r0) = 0`; for
/// `theta_r0 >= pi/2` this reduces to `1/sin(theta_r0)`.
pub fn pendulum_critical(theta_r0: f64) -> Result<f64> {
    use std::f64::consts::PI;
    if !(theta_r0 > 0.0 && theta_r0 < PI) {
        return Err(Error::Domain(format!("theta_R(0) = {theta_r0} outside (0, pi)")));
    }
    if theta_r0 >= PI / 2.0 {
        return Ok(1.0 / theta_r0.sin());
    }
    let f = |t: f64| t.sin() + (t.cos() - theta_r0.cos()) / (t - theta_r0);
    let mut lo = theta_r0 + 1e-6 * (1.0 + theta_r0);
    let mut hi = PI - 1e-12;
    let mut flo = f(lo);
    if flo.signum() == f(hi).signum() {
        return Err(Error::Numerical("no bracketing root for the pendulum condition".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(1.0 / mid.sin());
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(1.0 / (0.5 * (lo + hi)).sin())
}

/// One Poincaré section point of the restricted flow.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SectionPoint {
    pub crossing: usize,
    pub r_l: f64,
    pub i_r: f64,
    /// sqrt((R_L^2 + I_R^2)/N)
    pub radius: f64,
    /// atan2(I_R, R_L)
    pub alpha: f64,
    /// Right spin angle at the crossing, wrapped to [0, 2pi).
    pub theta_r: f64,
}

/// Record (R_L, I_R) whenever `theta_L` crosses its initial value mod 2pi
/// in the positive direction. Crossings are refined by bisection inside
/// the accepted step followed by one Runge-Kutta step in the section
/// variable (Hénon's trick), leaving |theta_L - section| below 1e-9.
/// Errors if fewer than `n_crossings` happen within `t_max`.
pub fn poincare_section(
    state0: &[f64; 4],
    params: &ModelParams,
    n_crossings: usize,
    t_max: f64,
) -> Result<Vec<SectionPoint>> {
    let points = poincare_section_until(state0, params, n_crossings, t_max)?;
    if points.len() < n_crossings {
        return Err(Error::Numerical(format!(
            "only {} of {} requested crossings within t_max = {t_max}",
            points.len(),
            n_crossings
        )));
    }
    Ok(points)
}

/// Crossings found until `t_max` or `max_crossings`, however many occur.
pub fn poincare_section_until(
    state0: &[f64; 4],
    params: &ModelParams,
    max_crossings: usize,
    t_max: f64,
) -> Result<Vec<SectionPoint>> {
    let n_crossings = max_crossings;
    let f = |_t: f64, y: &[f64; 4]| eom_restricted(y, params);
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-10, ..Default::default() };
    let section = state0[0];
    let n = params.n as f64;
    let mut points: Vec<SectionPoint> = Vec::with_capacity(n_crossings);

    integrate_observed(&f, 0.0, t_max, *state0, &opts, |rec: &StepRecord<'_, 4>| {
        if points.len() >= n_crossings {
            return false;
        }
        let th0 = rec.y0[0];
        let th1 = rec.y1[0];
        if th1 <= th0 {
            return true; // not a positive-direction advance
        }
        // section levels passed during this step
        let k0 = ((th0 - section) / std::f64::consts::TAU).floor();
        let k1 = ((th1 - section) / std::f64::consts::TAU).floor();
        let mut k = k0 + 1.0;
        while k <= k1 && points.len() < n_crossings {
            let target = section + std::f64::consts::TAU * k;
            if let Some(y) = refine_crossing(&f, rec, target) {
                // positive crossing requires theta_L' = 2 g R_L > 0
                if y[2] > 0.0 {
                    points.push(SectionPoint {
                        crossing: points.len(),
                        r_l: y[2],
                        i_r: y[3],
                        radius: ((y[2] * y[2] + y[3] * y[3]) / n).sqrt(),
                        alpha: y[3].atan2(y[2]),
                        theta_r: y[1].rem_euclid(std::f64::consts::TAU),
                    });
                }
            }
            k += 1.0;
        }
        points.len() < n_crossings
    })?;
    Ok(points)
}

/// Bisection in time inside one accepted step (cubic Hermite evaluation),
/// then a single RK4 step using theta_L as the independent variable.
fn refine_crossing<F>(f: &F, rec: &StepRecord<'_, 4>, target: f64) -> Option<[f64; 4]>
where
    F: Fn(f64, &[f64; 4]) -> [f64; 4],
{
    let h = rec.t1 - rec.t0;
    let hermite = |s: f64| -> [f64; 4] {
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut y = [0.0; 4];
        for i in 0..4 {
            y[i] = h00 * rec.y0[i] + h10 * h * rec.f0[i] + h01 * rec.y1[i] + h11 * h * rec.f1[i];
        }
        y
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let glo = rec.y0[0] - target;
    if glo > 0.0 {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if hermite(mid)[0] - target <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut y = hermite(0.5 * (lo + hi));
    // Hénon step: advance the remaining gap in theta_L exactly, using
    // theta as the independent variable (dy/dtheta = f / theta')
    for _ in 0..3 {
        let dtheta = target - y[0];
        if dtheta.abs() < 1e-14 {
            break;
        }
        let g = |state: &[f64; 4]| -> Option<[f64; 4]> {
            let d = f(0.0, state);
            if d[0].abs() < 1e-12 {
                return None;
            }
            Some([1.0, d[1] / d[0], d[2] / d[0], d[3] / d[0]])
        };
        let k1 = g(&y)?;
        let half = |a: &[f64; 4], k: &[f64; 4], c: f64| {
            let mut out = *a;
            for i in 0..4 {
                out[i] += c * dtheta * k[i];
            }
            out
        };
        let k2 = g(&half(&y, &k1, 0.5))?;
        let k3 = g(&half(&y, &k2, 0.5))?;
        let k4 = g(&half(&y, &k3, 1.0))?;
        for i in 0..4 {
            y[i] += dtheta / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    ((y[0] - target).abs() < 1e-9).then_some(y)
}
