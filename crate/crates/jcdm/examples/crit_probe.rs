use jcdm::bands::{BandId, Regime};
use jcdm::eigen::eigenvalues_only;
use jcdm::gamma::ln_gamma;
use jcdm::hamiltonian::build;
use jcdm::params::ModelParams;
use num_complex::Complex64;
use std::f64::consts::PI;

fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(PI);
    r.min(PI - r)
}

fn main() {
    let params = ModelParams::from_j_over_gprime(400, 0.25, 1.0).unwrap();
    let (_, h) = build(&params).unwrap();
    let eps = eigenvalues_only(&h, &params);
    let ec4 = params.eps_c4();
    let n = params.n as f64;
    let mu = 1.0f64; // g'/2J - 1 = 1 at J/g' = 1/4
    for &e in eps.iter().filter(|e| (**e - ec4).abs() < 0.02 && **e < 0.0) {
        let lambda = (e - ec4) * n;
        let chi = lambda / (2.0 * mu);
        let f = jcdm::wkb::functional_in_regime(&params, BandId::LowerLower, Regime::Critical, e)
            .unwrap();
        let lg = ln_gamma(Complex64::new(0.5, chi)).unwrap();
        let arg_gamma = lg.im; // arg Gamma(1/2 + i chi)
        let stirling = if chi.abs() > 1e-12 { chi * chi.abs().ln() - chi } else { 0.0 };
        let phi_gamma = arg_gamma - stirling;
        let modulus = (0.5 * (2.0 * PI).ln() - lg.re).exp();
        let mut line = format!("chi={chi:+8.3} phi_g={phi_gamma:+8.4}");
        for (tag, corr) in [
            ("plain", 0.0),
            ("+phi", phi_gamma),
            ("-phi", -phi_gamma),
            ("+phi/2", 0.5 * phi_gamma),
            ("-phi/2", -0.5 * phi_gamma),
        ] {
            let term1 = Complex64::from_polar(modulus, -2.0 * f + corr);
            let term2 = Complex64::new((PI * chi / 2.0).exp(), 0.0);
            let g = term1 - term2;
            let defect = wrap(g.arg() - PI / 2.0);
            line.push_str(&format!("  {tag}={defect:7.4}"));
        }
        println!("{line}");
    }
}
