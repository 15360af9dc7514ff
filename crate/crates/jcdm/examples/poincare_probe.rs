use jcdm::classical::{poincare_section_until, SPIN};
use jcdm::params::ModelParams;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

fn tdist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dt = (a.0 - b.0).rem_euclid(TAU);
    let dt = dt.min(TAU - dt);
    let da = (a.1 - b.1).rem_euclid(TAU);
    let da = da.min(TAU - da);
    (dt * dt + da * da).sqrt()
}

fn mean_nn(pts: &[(f64, f64)]) -> f64 {
    let mut acc = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, q) in pts.iter().enumerate() {
            if i != j {
                best = best.min(tdist(*p, *q));
            }
        }
        acc += best;
    }
    acc / pts.len() as f64
}

fn main() {
    let n = 100u32;
    let j = 1.0;
    let rootn = (n as f64).sqrt();
    for t_final in [4.0, 8.0, 16.0] {
        println!("T = {t_final}");
        for coupling in [0.088, 0.311, 0.442, 1.41] {
            let g = coupling * 2.0 * j * rootn;
            let params = ModelParams::new(n, g, j).unwrap();
            let m = 40;
            let mut cloud = Vec::new();
            for i in 0..m {
                // tiny blob around a sea-adjacent point
                let frac = i as f64 / m as f64;
                let dth = 1e-5 * (TAU * frac).cos();
                let dal = 1e-5 * (TAU * frac).sin();
                let theta_r0 = FRAC_PI_2 + dth;
                let alpha = FRAC_PI_4 + dal;
                let amp = (n as f64 - SPIN * (1.0 - theta_r0.cos())).sqrt();
                let y0 = [0.0, theta_r0, amp * alpha.cos(), amp * alpha.sin()];
                if let Ok(pts) = poincare_section_until(&y0, &params, 100_000, t_final) {
                    if let Some(p) = pts.last() {
                        cloud.push((p.theta_r, p.alpha));
                    }
                }
            }
            println!("  c={coupling:6}: m={} nn={:.6}", cloud.len(), mean_nn(&cloud));
        }
    }
}
