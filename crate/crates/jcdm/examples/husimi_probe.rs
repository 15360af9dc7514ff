use jcdm::eigen::diagonalize;
use jcdm::hamiltonian::build;
use jcdm::husimi::{harmonic_widths, husimi_q_of_state};
use jcdm::params::ModelParams;
use jcdm::bands::BandId;
use std::f64::consts::SQRT_2;

fn main() {
    for n in [100u32, 20, 10, 6] {
        let params = ModelParams::from_j_over_gprime(n, 1.0 / 3.0, 1.0).unwrap();
        let (basis, h) = build(&params).unwrap();
        let sol = diagonalize(&h, &basis, &params).unwrap();
        let gp = params.gprime();
        let bottom = -2.0 * gp - params.j;
        let top = -SQRT_2 * gp;
        let ec = params.eps_c4();
        println!("N={n}: band-4 window=({bottom:.3},{top:.3}) ec={ec:.3}");
        for (kind, target) in [
            ("ground", bottom),
            ("oscillatory", bottom + 0.5 * (ec - bottom)),
            ("critical", ec),
            ("localized", ec + 0.6 * (top - ec)),
        ] {
            // nearest band-4-dominated state
            let mut order: Vec<usize> = (0..sol.len()).collect();
            order.sort_by(|&a, &b| (sol.eps[a] - target).abs().total_cmp(&(sol.eps[b] - target).abs()));
            let state = order.iter().copied().take(12)
                .find(|&k| sol.band_weight(k, BandId::LowerLower) >= 0.5);
            let Some(state) = state else {
                println!("  {kind}: NO band-4 state near target {target:.3}");
                continue;
            };
            let w = sol.band_weight(state, BandId::LowerLower);
            match husimi_q_of_state(&sol, state, 121, 121, None) {
                Ok(q) => {
                    let (count, ring) = q.components_at(0.5);
                    let (sx, st) = q.second_moments();
                    println!(
                        "  {kind:12}: state={state:3} eps={:+.3} w4={w:.3} components={count} center_below_half={ring} moments=({sx:.4},{st:.4})",
                        sol.eps[state]
                    );
                    if kind == "ground" && n == 100 {
                        let (hx, ht) = harmonic_widths(&params);
                        let h_ = params.h();
                        let sxm = (sx * sx - 0.5 / (q.kappa * q.kappa)).max(0.0).sqrt();
                        let stm = (st * st - 0.5 * h_ * h_ * q.kappa * q.kappa).max(0.0).sqrt();
                        println!("      deconvolved=({sxm:.5},{stm:.5}) harmonic=({hx:.5},{ht:.5})");
                    }
                }
                Err(e) => println!("  {kind}: ERROR {e}"),
            }
        }
    }
}
