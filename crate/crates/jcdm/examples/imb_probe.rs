use jcdm::bands::barrier_position;
use jcdm::eigen::diagonalize_full;
use jcdm::hamiltonian::build;
use jcdm::params::ModelParams;
use jcdm::spectra::imbalance_map;
use std::time::Instant;

fn main() {
    let n = 400u32;
    let mut total = 0usize;
    let mut localized_side = 0usize;
    let mut polarized = 0usize;
    for rho in [0.3, 0.45, 0.6] {
        let t0 = Instant::now();
        let params = ModelParams::from_j_over_gprime(n, rho, 1.0)
            .unwrap()
            .with_eps_imb(1e-8);
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize_full(&h, &basis, &params).unwrap();
        let map = imbalance_map(&sol).unwrap();
        let xm = if rho > 0.5 { barrier_position(rho).unwrap() } else { 0.0 };
        let mut loc = 0;
        let mut pol = 0;
        for p in &map.points {
            total += 1;
            if p.x0 > xm {
                loc += 1;
                localized_side += 1;
                if p.mean_x.abs() > 0.5 {
                    pol += 1;
                    polarized += 1;
                } else {
                    println!("  FAIL state={} eps={:+.4} x0={:.4} mean_x={:+.4}", p.state, p.eps, p.x0, p.mean_x);
                }
            }
        }
        println!(
            "rho={rho}: xm={xm:.3} points={} localized_side={loc} polarized={pol} ({:?})",
            map.points.len(),
            t0.elapsed()
        );
    }
    println!(
        "total: {total} states, {localized_side} on localized side, {polarized} polarized -> {:.1}%",
        100.0 * polarized as f64 / localized_side as f64
    );
}
