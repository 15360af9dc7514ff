use jcdm::classical::{pendulum_critical, threshold_scan};
use std::f64::consts::PI;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    // fine coupling grid around the expected threshold at theta = pi/2
    let thetas: Vec<f64> = vec![0.3 * PI, 0.5 * PI, 0.75 * PI, 0.9 * PI];
    let couplings: Vec<f64> = (0..26).map(|i| 0.5 + 1.7 * i as f64 / 25.0).collect();
    let scan = threshold_scan(100, 1.0, &thetas, &couplings, 20.0, 200.0).unwrap();
    println!("scan took {:?}", t0.elapsed());
    for &(th, c) in &scan.threshold {
        let pend = pendulum_critical(th).unwrap();
        println!(
            "theta/pi={:.3} scan={:.4} pendulum={:.4} rel={:+.2}%",
            th / PI,
            c,
            pend,
            (c - pend) / pend * 100.0
        );
    }
    // show the imbalance profile along coupling at theta = pi/2
    for p in scan.points.iter().filter(|p| (p.theta_r0 - 0.5 * PI).abs() < 1e-9) {
        println!("  c={:.3} avg={:+.4} sens={:.4}", p.coupling, p.avg_imbalance, p.sensitivity);
    }
}
