use jcdm::eigen::eigenvalues_only;
use jcdm::hamiltonian::build;
use jcdm::params::ModelParams;
use jcdm::spectra::dos;
use std::f64::consts::SQRT_2;

fn main() {
    // (a) J/g' = 100: uniform within Poisson
    let params = ModelParams::from_j_over_gprime(400, 100.0, 1.0).unwrap();
    let (_, h) = build(&params).unwrap();
    let eps = eigenvalues_only(&h, &params);
    let hist = dos(&eps, 101).unwrap();
    let mean = hist.total() as f64 / hist.counts.len() as f64;
    let interior = &hist.counts[2..99];
    let imean = interior.iter().sum::<usize>() as f64 / interior.len() as f64;
    let worst = interior.iter().map(|&c| (c as f64 - imean).abs()).fold(0.0f64, f64::max);
    println!("J/g'=100: mean={mean:.1} interior_mean={imean:.1} worst_dev={worst:.1} 3sigma={:.1}", 3.0*imean.sqrt());
    let n_bad = interior.iter().filter(|&&c| (c as f64 - imean).abs() > 3.0*imean.sqrt()).count();
    println!("  interior bins beyond 3sigma: {n_bad}/{}", interior.len());

    // (d) J/g' = 0.25: gap near ±g' sqrt2
    let params = ModelParams::from_j_over_gprime(400, 0.25, 1.0).unwrap();
    let (_, h) = build(&params).unwrap();
    let eps = eigenvalues_only(&h, &params);
    let hist = dos(&eps, 101).unwrap();
    let centers = hist.centers();
    let mean = hist.total() as f64 / hist.counts.len() as f64;
    let gp = params.gprime();
    for target in [gp * SQRT_2, -gp * SQRT_2] {
        let idx = centers.iter().enumerate().min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs())).map(|(i, _)| i).unwrap();
        let local: Vec<usize> = hist.counts[idx.saturating_sub(1)..=(idx + 1).min(100)].to_vec();
        println!("J/g'=0.25: bins near eps={target:+.3}: {local:?} (mean count {mean:.1})");
    }
    // (b,c) J/g' in {0.5, 1}: maxima at ±(2g'-J)
    for ratio in [0.5, 1.0] {
        let params = ModelParams::from_j_over_gprime(400, ratio, 1.0).unwrap();
        let (_, h) = build(&params).unwrap();
        let eps = eigenvalues_only(&h, &params);
        let hist = dos(&eps, 101).unwrap();
        let centers = hist.centers();
        let ec = params.eps_c1();
        for target in [ec, -ec] {
            let idx = centers.iter().enumerate().min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs())).map(|(i, _)| i).unwrap();
            let lo = idx.saturating_sub(5);
            let hi = (idx + 5).min(100);
            let peak_count = (idx.saturating_sub(1)..=(idx+1).min(100)).map(|i| hist.counts[i]).max().unwrap();
            let window_max = (lo..=hi).map(|i| hist.counts[i]).max().unwrap();
            println!("J/g'={ratio}: eps_c={target:+.3} bin={} peak(idx±1)={peak_count} windowmax={window_max} counts={:?}",
                idx, &hist.counts[lo..=hi]);
        }
    }
}
