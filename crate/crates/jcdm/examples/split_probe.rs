use jcdm::bands::BandId;
use jcdm::eigen::eigenvalues_by_parity;
use jcdm::hamiltonian::build;
use jcdm::params::ModelParams;
use jcdm::spectra::splittings_from_sectors;
use jcdm::wkb;
use std::f64::consts::SQRT_2;

fn main() {
    for n in [100u32, 200, 400] {
        let params = ModelParams::from_j_over_gprime(n, 0.25, 1.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let (even, odd) = eigenvalues_by_parity(&h, &basis, &params);
        let gp = params.gprime();
        let window = (params.eps_c4() + 1e-4, -SQRT_2 * gp - 1e-3);
        let pairs = splittings_from_sectors(&even, &odd, window);
        println!("N={n}: {} pairs in localized window", pairs.len());
        for p in &pairs {
            if p.delta_eps < 1e-13 || p.delta_eps > 1e-2 {
                continue;
            }
            let pred = wkb::predicted_splitting(&params, p.mean_eps).unwrap_or(f64::NAN);
            let dq = wkb::action_q(&params, BandId::LowerLower, p.mean_eps).unwrap();
            println!(
                "  eps={:+.4} d_exact={:10.3e} d_wkb={:10.3e} ratio={:6.3} ln_err={:+.3}% NdQ={:6.2}",
                p.mean_eps,
                p.delta_eps,
                pred,
                pred / p.delta_eps,
                (pred.ln() - p.delta_eps.ln()) / p.delta_eps.ln() * 100.0,
                dq * n as f64
            );
        }
    }
}
