//! Command-line front end: every engine behind one binary with
//! reproducible run manifests and figure-ready CSV exports.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bands::{self, BandId, Regime};
use crate::classical::{self, SPIN};
use crate::eigen;
use crate::hamiltonian::build;
use crate::husimi;
use crate::output::{write_csv, write_manifest, Field};
use crate::params::ModelParams;
use crate::spectra;
use crate::wavefunction::wkb_wavefunction;
use crate::wkb;
use crate::{Error, Result};

use std::f64::consts::{PI, SQRT_2};

#[derive(Parser)]
#[command(name = "jcdm", version, about = "Jaynes-Cummings dimer laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Option<CommandLine>,
    /// Output directory for CSV artifacts and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Re-run the command recorded in a manifest.
    #[arg(long, value_name = "FILE")]
    from_manifest: Option<PathBuf>,
    /// Worker threads (also via JCDM_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

/// Shared model flags. The three coupling specs are mutually exclusive.
#[derive(Args, Debug)]
struct ModelArgs {
    /// Total polariton number.
    #[arg(long = "N", value_name = "N")]
    n: u32,
    /// Cavity-qubit coupling g.
    #[arg(long, conflicts_with_all = ["g_over_jsqrt2n", "j_over_gprime"])]
    g: Option<f64>,
    /// Photon hopping J (the energy unit of most presets).
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    /// Coupling as g / (J sqrt(2N)).
    #[arg(long = "g-over-Jsqrt2N", conflicts_with = "j_over_gprime")]
    g_over_jsqrt2n: Option<f64>,
    /// Coupling as J / g'.
    #[arg(long = "J-over-gprime")]
    j_over_gprime: Option<f64>,
    /// Parity-breaking probe strength.
    #[arg(long, default_value_t = 0.0)]
    eps_imb: f64,
}

impl ModelArgs {
    fn resolve(&self) -> Result<ModelParams> {
        let params = match (self.g, self.g_over_jsqrt2n, self.j_over_gprime) {
            (Some(g), None, None) => ModelParams::new(self.n, g, self.j)?,
            (None, Some(r), None) => ModelParams::from_g_over_jsqrt2n(self.n, r, self.j)?,
            (None, None, Some(r)) => ModelParams::from_j_over_gprime(self.n, r, self.j)?,
            (None, None, None) => {
                return Err(Error::InvalidParams(
                    "specify a coupling: --g, --g-over-Jsqrt2N or --J-over-gprime".into(),
                ));
            }
            _ => {
                return Err(Error::InvalidParams("coupling specs are mutually exclusive".into()));
            }
        };
        Ok(params.with_eps_imb(self.eps_imb))
    }
}

#[derive(Subcommand)]
enum CommandLine {
    /// Full exact spectrum.
    Spectrum(ModelArgs),
    /// Spin-traced eigenstate probability map over x = Z/N.
    SpectralMap(ModelArgs),
    /// Density of states histogram.
    Dos {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 101)]
        bins: usize,
    },
    /// Tunneling splittings of parity partners in a window.
    Splittings {
        #[command(flatten)]
        model: ModelArgs,
        /// Window edges in eps; defaults to the band-4 localized window.
        #[arg(long)]
        window_lo: Option<f64>,
        #[arg(long)]
        window_hi: Option<f64>,
    },
    /// Per-eigenstate classical position and quantum imbalance.
    ImbalanceMap(ModelArgs),
    /// Semiclassical levels of one band from the quantization rules.
    WkbLevels {
        #[command(flatten)]
        model: ModelArgs,
        /// Band index 1..=4.
        #[arg(long, default_value_t = 4)]
        band: usize,
    },
    /// Quantization defects of every exact eigenvalue.
    WkbDefects(ModelArgs),
    /// WKB wavefunction profile at one energy.
    WkbWavefunction {
        #[command(flatten)]
        model: ModelArgs,
        /// Band index (1 or 4).
        #[arg(long, default_value_t = 4)]
        band: usize,
        /// Energy eps = E/N; defaults to the middle of the band-4
        /// delocalized window.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 801)]
        grid: usize,
    },
    /// Classical localization boundary g_c(x0).
    PhaseBoundary {
        #[arg(long, default_value_t = 199)]
        points: usize,
    },
    /// Long-time-averaged imbalance over (theta_R(0), coupling).
    ClassicalScan {
        #[arg(long = "N", default_value_t = 100)]
        n: u32,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 0.15)]
        theta_min_pi: f64,
        #[arg(long, default_value_t = 0.95)]
        theta_max_pi: f64,
        #[arg(long, default_value_t = 20)]
        theta_points: usize,
        /// Couplings in g/(2 J sqrt(N)) units.
        #[arg(long, default_value_t = 0.5)]
        coupling_min: f64,
        #[arg(long, default_value_t = 2.2)]
        coupling_max: f64,
        #[arg(long, default_value_t = 30)]
        coupling_points: usize,
        #[arg(long, default_value_t = 20.0)]
        t_transient: f64,
        #[arg(long, default_value_t = 200.0)]
        t_average: f64,
        /// Reserved for initial-condition jitter; all presets are
        /// deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Poincaré section of the restricted flow.
    Poincare {
        #[arg(long = "N", default_value_t = 100)]
        n: u32,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
        /// Coupling in g/(2 J sqrt(N)) units.
        #[arg(long)]
        coupling: f64,
        #[arg(long, default_value_t = 0.5)]
        theta_r0_pi: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha0: f64,
        #[arg(long, default_value_t = 400)]
        crossings: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Husimi Q distribution of one eigenstate plus classical contours.
    Husimi {
        #[command(flatten)]
        model: ModelArgs,
        /// Eigenstate index (energy ordered); default ground state.
        #[arg(long)]
        state: Option<usize>,
        /// Or select by position in the band-4 window (0 = bottom).
        #[arg(long, conflicts_with = "state")]
        band_frac: Option<f64>,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// Squeezing tuner s (kappa = s kappa0); default from energy.
        #[arg(long)]
        squeeze: Option<f64>,
    },
    /// Named figure presets (fig1a, fig1b, fig3, fig4, fig5a..fig5d,
    /// fig6, fig7, fig8, figG1, figG2).
    Figure { name: String },
}

/// Fully resolved, serializable run description; the manifest stores this
/// and `--from-manifest` replays it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Spectrum { params: ModelParams },
    SpectralMap { params: ModelParams },
    Dos { params: ModelParams, bins: usize },
    Splittings { params: ModelParams, window: (f64, f64) },
    ImbalanceMap { params: ModelParams },
    WkbLevels { params: ModelParams, band: usize },
    WkbDefects { params: ModelParams },
    WkbWavefunction { params: ModelParams, band: usize, eps: f64, grid: usize },
    PhaseBoundary { points: usize },
    ClassicalScan {
        n: u32,
        j: f64,
        theta_grid: Vec<f64>,
        coupling_grid: Vec<f64>,
        t_transient: f64,
        t_average: f64,
        seed: u64,
    },
    Poincare {
        n: u32,
        j: f64,
        coupling: f64,
        theta_r0: f64,
        alpha0: f64,
        crossings: usize,
        seed: u64,
    },
    Husimi {
        params: ModelParams,
        state: Option<usize>,
        band_frac: Option<f64>,
        grid: usize,
        squeeze: Option<f64>,
    },
    Figure { name: String },
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl CommandLine {
    fn into_config(self) -> Result<RunConfig> {
        Ok(match self {
            CommandLine::Spectrum(m) => RunConfig::Spectrum { params: m.resolve()? },
            CommandLine::SpectralMap(m) => RunConfig::SpectralMap { params: m.resolve()? },
            CommandLine::Dos { model, bins } => RunConfig::Dos { params: model.resolve()?, bins },
            CommandLine::Splittings { model, window_lo, window_hi } => {
                let params = model.resolve()?;
                let gp = params.gprime();
                let lo = window_lo.unwrap_or(params.eps_c4() + 1e-3 * gp);
                let hi = window_hi.unwrap_or(-SQRT_2 * gp - 1e-3 * gp);
                RunConfig::Splittings { params, window: (lo, hi) }
            }
            CommandLine::ImbalanceMap(m) => {
                let mut params = m.resolve()?;
                if params.eps_imb == 0.0 {
                    params.eps_imb = 1e-8 * params.j;
                }
                RunConfig::ImbalanceMap { params }
            }
            CommandLine::WkbLevels { model, band } => {
                RunConfig::WkbLevels { params: model.resolve()?, band }
            }
            CommandLine::WkbDefects(m) => RunConfig::WkbDefects { params: m.resolve()? },
            CommandLine::WkbWavefunction { model, band, eps, grid } => {
                let params = model.resolve()?;
                let eps = eps.unwrap_or_else(|| {
                    let bottom = -2.0 * params.gprime() - params.j;
                    let sign = if band == 1 { -1.0 } else { 1.0 };
                    sign * 0.5 * (bottom + params.eps_c4())
                });
                RunConfig::WkbWavefunction { params, band, eps, grid }
            }
            CommandLine::PhaseBoundary { points } => RunConfig::PhaseBoundary { points },
            CommandLine::ClassicalScan {
                n,
                j,
                theta_min_pi,
                theta_max_pi,
                theta_points,
                coupling_min,
                coupling_max,
                coupling_points,
                t_transient,
                t_average,
                seed,
            } => RunConfig::ClassicalScan {
                n,
                j,
                theta_grid: linspace(theta_min_pi * PI, theta_max_pi * PI, theta_points),
                coupling_grid: linspace(coupling_min, coupling_max, coupling_points),
                t_transient,
                t_average,
                seed,
            },
            CommandLine::Poincare { n, j, coupling, theta_r0_pi, alpha0, crossings, seed } => {
                RunConfig::Poincare {
                    n,
                    j,
                    coupling,
                    theta_r0: theta_r0_pi * PI,
                    alpha0,
                    crossings,
                    seed,
                }
            }
            CommandLine::Husimi { model, state, band_frac, grid, squeeze } => RunConfig::Husimi {
                params: model.resolve()?,
                state,
                band_frac,
                grid,
                squeeze,
            },
            CommandLine::Figure { name } => RunConfig::Figure { name },
        })
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var("JCDM_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    let config = if let Some(manifest) = &cli.from_manifest {
        crate::output::read_manifest_config::<RunConfig>(manifest)
    } else if let Some(cmd) = cli.command {
        cmd.into_config()
    } else {
        Err(Error::InvalidParams(
            "nothing to do: pass a subcommand or --from-manifest".into(),
        ))
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    match execute(&config, &cli.out) {
        Ok(()) => 0,
        Err(e @ (Error::InvalidParams(_) | Error::Domain(_))) => {
            eprintln!("error[config]: {e}");
            2
        }
        Err(e) => {
            eprintln!("error[numerical]: {e}");
            3
        }
    }
}

/// Execute one run and write its artifacts plus manifest.json.
pub fn execute(config: &RunConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let t0 = Instant::now();
    match config {
        RunConfig::Spectrum { params } => cmd_spectrum(params, out)?,
        RunConfig::SpectralMap { params } => cmd_spectral_map(params, out)?,
        RunConfig::Dos { params, bins } => cmd_dos(params, *bins, out)?,
        RunConfig::Splittings { params, window } => cmd_splittings(params, *window, out)?,
        RunConfig::ImbalanceMap { params } => {
            cmd_imbalance_map(params, out, "imbalance_map.csv")?;
        }
        RunConfig::WkbLevels { params, band } => cmd_wkb_levels(params, *band, out)?,
        RunConfig::WkbDefects { params } => cmd_wkb_defects(params, out)?,
        RunConfig::WkbWavefunction { params, band, eps, grid } => {
            cmd_wavefunction(params, *band, *eps, *grid, out, "wkb_wavefunction.csv")?;
        }
        RunConfig::PhaseBoundary { points } => cmd_phase_boundary(*points, out)?,
        RunConfig::ClassicalScan { n, j, theta_grid, coupling_grid, t_transient, t_average, .. } => {
            cmd_classical_scan(*n, *j, theta_grid, coupling_grid, *t_transient, *t_average, out)?;
        }
        RunConfig::Poincare { n, j, coupling, theta_r0, alpha0, crossings, .. } => {
            cmd_poincare(*n, *j, *coupling, *theta_r0, *alpha0, *crossings, out, "poincare.csv")?;
        }
        RunConfig::Husimi { params, state, band_frac, grid, squeeze } => {
            cmd_husimi(params, *state, *band_frac, *grid, *squeeze, out)?;
        }
        RunConfig::Figure { name } => cmd_figure(name, out)?,
    }
    write_manifest(&out.join("manifest.json"), config, t0.elapsed().as_secs_f64())?;
    Ok(())
}

fn solve(params: &ModelParams) -> Result<eigen::EigenSolution> {
    let (basis, h) = build(params)?;
    eigen::diagonalize(&h, &basis, params)
}

fn cmd_spectrum(params: &ModelParams, out: &Path) -> Result<()> {
    let sol = solve(params)?;
    let n = params.n as f64;
    write_csv(
        &out.join("spectrum.csv"),
        &["n", "E", "eps"],
        sol.eps.iter().enumerate().map(|(k, &e)| {
            vec![Field::U(k), Field::F(e * n), Field::F(e)]
        }),
    )
}

fn cmd_spectral_map(params: &ModelParams, out: &Path) -> Result<()> {
    let sol = solve(params)?;
    let n = params.n as f64;
    let rows = spectra::spectral_map(&sol);
    write_csv(
        &out.join("spectral_map.csv"),
        &["x", "E", "eps", "weight"],
        rows.iter().map(|r| {
            vec![Field::F(r.x), Field::F(r.eps * n), Field::F(r.eps), Field::F(r.weight)]
        }),
    )
}

fn cmd_dos(params: &ModelParams, bins: usize, out: &Path) -> Result<()> {
    let (_, h) = build(params)?;
    let eps = eigen::eigenvalues_only(&h, params);
    let hist = spectra::dos(&eps, bins)?;
    let n = params.n as f64;
    write_csv(
        &out.join("dos.csv"),
        &["bin_center_E", "bin_center_eps", "count"],
        hist.centers().iter().zip(hist.counts.iter()).map(|(&c, &k)| {
            vec![Field::F(c * n), Field::F(c), Field::U(k)]
        }),
    )
}

fn cmd_splittings(params: &ModelParams, window: (f64, f64), out: &Path) -> Result<()> {
    let sol = solve(params)?;
    let report = spectra::splittings(&sol, window)?;
    let n = params.n as f64;
    write_csv(
        &out.join("splittings.csv"),
        &["pair_index", "mean_E", "mean_eps", "delta_E", "delta_eps", "delta_eps_wkb"],
        report.pairs.iter().map(|p| {
            let wkb_pred = wkb::predicted_splitting(params, p.mean_eps).unwrap_or(f64::NAN);
            vec![
                Field::U(p.pair_index),
                Field::F(p.mean_eps * n),
                Field::F(p.mean_eps),
                Field::F(p.delta_eps * n),
                Field::F(p.delta_eps),
                Field::F(wkb_pred),
            ]
        }),
    )
}

fn cmd_imbalance_map(params: &ModelParams, out: &Path, filename: &str) -> Result<()> {
    let (basis, h) = build(params)?;
    let sol = eigen::diagonalize_full(&h, &basis, params)?;
    let map = spectra::imbalance_map(&sol)?;
    let n = params.n as f64;
    write_csv(
        &out.join(filename),
        &["state", "E", "eps", "x0", "mean_x"],
        map.points.iter().map(|p| {
            vec![
                Field::U(p.state),
                Field::F(p.eps * n),
                Field::F(p.eps),
                Field::F(p.x0),
                Field::F(p.mean_x),
            ]
        }),
    )
}

fn band_windows(params: &ModelParams, band: BandId) -> Vec<(Regime, (f64, f64))> {
    let gp = params.gprime();
    let margin = 1e-6 * gp;
    let w = bands::critical_window(params);
    match band {
        BandId::LowerLower => {
            let bottom = -2.0 * gp - params.j;
            let ec = params.eps_c4();
            let top = -SQRT_2 * gp;
            vec![
                (Regime::Delocalized, (bottom + margin, ec - w)),
                (Regime::Critical, (ec - w, ec + w)),
                (Regime::Localized, (ec + w, top - margin)),
            ]
        }
        BandId::UpperUpper => {
            let ec = params.eps_c1();
            let top = 2.0 * gp + params.j;
            vec![
                (Regime::Localized, (SQRT_2 * gp + margin, ec - w)),
                (Regime::Critical, (ec - w, ec + w)),
                (Regime::Delocalized, (ec + w, top - margin)),
            ]
        }
        _ => vec![(Regime::Middle, (margin, SQRT_2 * gp - margin))],
    }
}

fn cmd_wkb_levels(params: &ModelParams, band_idx: usize, out: &Path) -> Result<()> {
    let band = BandId::from_index(band_idx)?;
    let n = params.n as f64;
    let mut rows = Vec::new();
    for (regime, window) in band_windows(params, band) {
        if window.1 <= window.0 {
            continue;
        }
        let grid = (params.n as usize * 4).clamp(400, 6000);
        let levels = wkb::solve_levels(params, band, regime, window, grid)?;
        for (k, e) in levels {
            rows.push((regime, k, e));
        }
    }
    rows.sort_by(|a, b| a.2.total_cmp(&b.2));
    write_csv(
        &out.join("wkb_levels.csv"),
        &["band", "regime", "n", "E", "eps"],
        rows.iter().map(|(regime, k, e)| {
            vec![
                Field::U(band_idx),
                Field::S(regime.to_string()),
                Field::I(*k),
                Field::F(e * n),
                Field::F(*e),
            ]
        }),
    )
}

fn cmd_wkb_defects(params: &ModelParams, out: &Path) -> Result<()> {
    use rayon::prelude::*;
    let (_, h) = build(params)?;
    let eps = eigen::eigenvalues_only(&h, params);
    let n = params.n as f64;
    let rows: Vec<(f64, BandId, Regime, f64, f64)> = eps
        .par_iter()
        .filter_map(|&e| {
            let (band, regime, defect) = wkb::defect_for_energy(params, e).ok()?;
            let standard = if regime == Regime::Critical {
                wkb::standard_defect_in_window(params, e).unwrap_or(f64::NAN)
            } else {
                defect
            };
            Some((e, band, regime, defect, standard))
        })
        .collect();
    write_csv(
        &out.join("defects.csv"),
        &["E", "eps", "band", "regime", "defect", "defect_standard_rule"],
        rows.iter().map(|(e, band, regime, d, ds)| {
            vec![
                Field::F(e * n),
                Field::F(*e),
                Field::U(band.index()),
                Field::S(regime.to_string()),
                Field::F(*d),
                Field::F(*ds),
            ]
        }),
    )
}

fn cmd_wavefunction(
    params: &ModelParams,
    band_idx: usize,
    eps: f64,
    grid: usize,
    out: &Path,
    filename: &str,
) -> Result<()> {
    let band = BandId::from_index(band_idx)?;
    let m = grid.max(3) as i64;
    let xs: Vec<f64> = (0..m).map(|k| -1.0 + 2.0 * k as f64 / (m - 1) as f64).collect();
    let psi = wkb_wavefunction(params, band, eps, &xs)?;
    write_csv(
        &out.join(filename),
        &["x", "amplitude"],
        xs.iter().zip(psi.iter()).map(|(&x, &a)| vec![Field::F(x), Field::F(a)]),
    )
}

fn cmd_phase_boundary(points: usize, out: &Path) -> Result<()> {
    let xs = linspace(1.0 / points as f64, 1.0, points);
    write_csv(
        &out.join("phase_boundary.csv"),
        &["x0", "g_over_Jsqrt2N"],
        xs.iter().map(|&x0| {
            let g = bands::phase_boundary(x0).unwrap_or(f64::NAN);
            vec![Field::F(x0), Field::F(g)]
        }),
    )
}

fn cmd_classical_scan(
    n: u32,
    j: f64,
    theta_grid: &[f64],
    coupling_grid: &[f64],
    t_transient: f64,
    t_average: f64,
    out: &Path,
) -> Result<()> {
    let scan = classical::threshold_scan(n, j, theta_grid, coupling_grid, t_transient, t_average)?;
    write_csv(
        &out.join("scan.csv"),
        &["theta_R0", "g_over_2JsqrtN", "g_over_JsqrtN", "avg_imbalance", "sensitivity"],
        scan.points.iter().map(|p| {
            vec![
                Field::F(p.theta_r0),
                Field::F(p.coupling),
                Field::F(2.0 * p.coupling),
                Field::F(p.avg_imbalance),
                Field::F(p.sensitivity),
            ]
        }),
    )?;
    write_csv(
        &out.join("threshold.csv"),
        &[
            "theta_R0",
            "scan_g_over_2JsqrtN",
            "scan_g_over_JsqrtN",
            "pendulum_g_over_2JsqrtN",
            "pendulum_g_over_JsqrtN",
        ],
        scan.threshold.iter().map(|&(th, c)| {
            let pend = classical::pendulum_critical(th).unwrap_or(f64::NAN);
            vec![
                Field::F(th),
                Field::F(c),
                Field::F(2.0 * c),
                Field::F(pend),
                Field::F(2.0 * pend),
            ]
        }),
    )
}

fn cmd_poincare(
    n: u32,
    j: f64,
    coupling: f64,
    theta_r0: f64,
    alpha0: f64,
    crossings: usize,
    out: &Path,
    filename: &str,
) -> Result<()> {
    let g = coupling * 2.0 * j * (n as f64).sqrt();
    let params = ModelParams::new(n, g, j)?;
    let amp2 = n as f64 - SPIN * (1.0 - theta_r0.cos());
    if amp2 <= 0.0 {
        return Err(Error::InvalidParams("no photon amplitude left for this theta_R0".into()));
    }
    let amp = amp2.sqrt();
    let y0 = [0.0, theta_r0, amp * alpha0.cos(), amp * alpha0.sin()];
    // generous horizon: theta_L advances at ~2 g R_L per unit time
    let t_max = 1e4 * crossings as f64 / (g * amp).max(1e-9) + 1e3 / j;
    let pts = classical::poincare_section(&y0, &params, crossings, t_max)?;
    write_csv(
        &out.join(filename),
        &["crossing_index", "R_L", "I_R", "r", "alpha"],
        pts.iter().map(|p| {
            vec![
                Field::U(p.crossing),
                Field::F(p.r_l),
                Field::F(p.i_r),
                Field::F(p.radius),
                Field::F(p.alpha),
            ]
        }),
    )
}

/// Pick the band-4-dominated eigenstate nearest a target energy.
fn pick_band4_state(sol: &eigen::EigenSolution, target: f64) -> Option<usize> {
    let mut order: Vec<usize> = (0..sol.len()).collect();
    order.sort_by(|&a, &b| {
        (sol.eps[a] - target).abs().total_cmp(&(sol.eps[b] - target).abs())
    });
    order
        .into_iter()
        .take(12)
        .find(|&k| sol.band_weight(k, BandId::LowerLower) >= 0.5)
}

fn cmd_husimi(
    params: &ModelParams,
    state: Option<usize>,
    band_frac: Option<f64>,
    grid: usize,
    squeeze: Option<f64>,
    out: &Path,
) -> Result<()> {
    let sol = solve(params)?;
    let gp = params.gprime();
    let state = match (state, band_frac) {
        (Some(k), _) => k,
        (None, Some(frac)) => {
            let bottom = -2.0 * gp - params.j;
            let top = -SQRT_2 * gp;
            let target = bottom + frac.clamp(0.0, 1.0) * (top - bottom);
            pick_band4_state(&sol, target)
                .ok_or_else(|| Error::Numerical("no band-4 state near the target".into()))?
        }
        (None, None) => 0,
    };
    let q = husimi::husimi_q_of_state(&sol, state, grid, grid, squeeze)?;
    write_husimi_grid(&q, &out.join("husimi.csv"))?;

    // contours: a handful of levels spanning the band plus the separatrix
    let bottom = -2.0 * gp - params.j;
    let mut levels: Vec<f64> = (1..=6)
        .map(|k| bottom + k as f64 / 7.0 * (-SQRT_2 * gp - bottom))
        .collect();
    levels.push(params.eps_c4());
    levels.sort_by(|a, b| a.total_cmp(b));
    let contours = husimi::classical_contours(params, &levels, 301, 301);
    write_contours(&contours, &out.join("contours.csv"))
}

fn write_husimi_grid(q: &husimi::HusimiGrid, path: &Path) -> Result<()> {
    let mut rows = Vec::with_capacity(q.xs.len() * q.thetas.len());
    for (it, &theta) in q.thetas.iter().enumerate() {
        for (ix, &x) in q.xs.iter().enumerate() {
            rows.push(vec![Field::F(x), Field::F(theta), Field::F(q.q[it][ix])]);
        }
    }
    write_csv(path, &["x", "theta", "Q"], rows)
}

fn write_contours(levels: &[husimi::ContourLevel], path: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for level in levels {
        for (seg, &((x0, t0), (x1, t1))) in level.segments.iter().enumerate() {
            rows.push(vec![Field::F(level.eps), Field::U(seg), Field::F(x0), Field::F(t0)]);
            rows.push(vec![Field::F(level.eps), Field::U(seg), Field::F(x1), Field::F(t1)]);
        }
    }
    write_csv(path, &["eps", "segment", "x", "theta"], rows)
}

/// Figure presets: exact parameters of the reference plots.
fn cmd_figure(name: &str, out: &Path) -> Result<()> {
    match name {
        "fig1a" => {
            let params = ModelParams::from_g_over_jsqrt2n(400, 1.0, 1.0)?;
            cmd_spectral_map(&params, out)
        }
        "fig1b" => {
            let params = ModelParams::from_g_over_jsqrt2n(400, 2.0, 1.0)?;
            cmd_spectral_map(&params, out)
        }
        "fig3" => {
            let params = ModelParams::from_j_over_gprime(100, 0.25, 1.0)?;
            let gp = params.gprime();
            let bottom = -2.0 * gp - params.j;
            let deloc = 0.5 * (bottom + params.eps_c4());
            let loc = params.eps_c4() + 0.5 * (-SQRT_2 * gp - params.eps_c4());
            cmd_wavefunction(&params, 4, deloc, 801, out, "wkb_wavefunction_delocalized.csv")?;
            cmd_wavefunction(&params, 4, loc, 801, out, "wkb_wavefunction_localized.csv")
        }
        "fig4" => {
            let params = ModelParams::from_j_over_gprime(400, 0.25, 1.0)?;
            cmd_wkb_defects(&params, out)
        }
        "fig5a" | "fig5b" | "fig5c" | "fig5d" => {
            let ratio = match name {
                "fig5a" => 100.0,
                "fig5b" => 1.0,
                "fig5c" => 0.5,
                _ => 0.25,
            };
            let params = ModelParams::from_j_over_gprime(400, ratio, 1.0)?;
            cmd_dos(&params, 101, out)
        }
        "fig6" => cmd_fig6(out),
        "fig7" => cmd_classical_scan(
            100,
            1.0,
            &linspace(0.15 * PI, 0.95 * PI, 20),
            &linspace(0.5, 2.2, 30),
            20.0,
            200.0,
            out,
        ),
        "fig8" => {
            for (tag, coupling) in
                [("a", 0.088), ("b", 0.311), ("c", 0.442), ("d", 1.41)]
            {
                cmd_poincare(
                    100,
                    1.0,
                    coupling,
                    PI / 2.0,
                    0.0,
                    400,
                    out,
                    &format!("poincare_{tag}.csv"),
                )?;
            }
            Ok(())
        }
        "figG1" => cmd_fig_husimi(100, 201, out, ""),
        "figG2" => {
            for n in [20u32, 10, 6] {
                cmd_fig_husimi(n, 121, out, &format!("N{n}_"))?;
            }
            Ok(())
        }
        other => Err(Error::InvalidParams(format!("unknown figure preset '{other}'"))),
    }
}

fn cmd_fig6(out: &Path) -> Result<()> {
    use rayon::prelude::*;
    let n = 400u32;
    let ratios = linspace(0.26, 0.70, 12);
    // quantum map, one block per J/g'
    let mut rows = Vec::new();
    for &rho in &ratios {
        let params =
            ModelParams::from_j_over_gprime(n, rho, 1.0)?.with_eps_imb(1e-8);
        let (basis, h) = build(&params)?;
        let sol = eigen::diagonalize_full(&h, &basis, &params)?;
        let map = spectra::imbalance_map(&sol)?;
        for p in map.points {
            rows.push((rho, p));
        }
    }
    write_csv(
        &out.join("imbalance_map.csv"),
        &["J_over_gprime", "state", "eps", "x0", "mean_x"],
        rows.iter().map(|(rho, p)| {
            vec![
                Field::F(*rho),
                Field::U(p.state),
                Field::F(p.eps),
                Field::F(p.x0),
                Field::F(p.mean_x),
            ]
        }),
    )?;

    // classical map over the same ratios
    let x0s = linspace(0.02, 0.98, 49);
    let jobs: Vec<(f64, f64)> = ratios
        .iter()
        .flat_map(|&rho| x0s.iter().map(move |&x| (rho, x)))
        .collect();
    let classical_rows: Vec<(f64, f64, f64, f64)> = jobs
        .par_iter()
        .filter_map(|&(rho, x0)| {
            let params = ModelParams::from_j_over_gprime(n, rho, 1.0).ok()?;
            let (t, mean_x) = bands::classical_orbit(&params, x0).ok()?;
            Some((rho, x0, t, mean_x))
        })
        .collect();
    write_csv(
        &out.join("classical_imbalance.csv"),
        &["J_over_gprime", "x0", "period", "mean_x"],
        classical_rows.iter().map(|(rho, x0, t, mx)| {
            vec![Field::F(*rho), Field::F(*x0), Field::F(*t), Field::F(*mx)]
        }),
    )?;
    cmd_phase_boundary(199, out)
}

fn cmd_fig_husimi(n: u32, grid: usize, out: &Path, prefix: &str) -> Result<()> {
    let params = ModelParams::from_j_over_gprime(n, 1.0 / 3.0, 1.0)?;
    let sol = solve(&params)?;
    let gp = params.gprime();
    let bottom = -2.0 * gp - params.j;
    let top = -SQRT_2 * gp;
    let ec = params.eps_c4();
    let kinds: [(&str, f64); 4] = [
        ("ground", bottom),
        ("oscillatory", bottom + 0.5 * (ec - bottom)),
        ("critical", ec),
        ("localized", ec + 0.6 * (top - ec)),
    ];
    for (kind, target) in kinds {
        let state = pick_band4_state(&sol, target)
            .ok_or_else(|| Error::Numerical(format!("no band-4 state for '{kind}'")))?;
        let q = husimi::husimi_q_of_state(&sol, state, grid, grid, None)?;
        write_husimi_grid(&q, &out.join(format!("husimi_{prefix}{kind}.csv")))?;
    }
    let mut levels: Vec<f64> =
        (1..=6).map(|k| bottom + k as f64 / 7.0 * (top - bottom)).collect();
    levels.push(ec);
    levels.sort_by(|a, b| a.total_cmp(b));
    let contours = husimi::classical_contours(&params, &levels, 301, 301);
    write_contours(&contours, &out.join(format!("contours_{prefix}h4.csv")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_specs_are_mutually_exclusive() {
        // clap-level conflict
        let r = Cli::try_parse_from([
            "jcdm",
            "spectrum",
            "--N",
            "4",
            "--g",
            "1.0",
            "--g-over-Jsqrt2N",
            "2.0",
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn spectrum_n1_matches_closed_form() {
        let dir = tempfile::tempdir().unwrap();
        let code = run([
            "jcdm",
            "spectrum",
            "--N",
            "1",
            "--g",
            "1",
            "--J",
            "1",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
        let values: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        let s5 = 5.0f64.sqrt();
        let expect = [-(1.0 + s5) / 2.0, -(s5 - 1.0) / 2.0, (s5 - 1.0) / 2.0, (1.0 + s5) / 2.0];
        for (v, e) in values.iter().zip(expect.iter()) {
            assert!((v - e).abs() < 1e-10, "{v} vs {e}");
        }
    }

    #[test]
    fn manifest_roundtrip_is_byte_identical() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let code = run([
            "jcdm",
            "dos",
            "--N",
            "30",
            "--J-over-gprime",
            "0.5",
            "--bins",
            "21",
            "--out",
            dir1.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let code = run([
            "jcdm",
            "--from-manifest",
            dir1.path().join("manifest.json").to_str().unwrap(),
            "--out",
            dir2.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let a = std::fs::read(dir1.path().join("dos.csv")).unwrap();
        let b = std::fs::read(dir2.path().join("dos.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_errors_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let code = run([
            "jcdm",
            "figure",
            "nosuchfigure",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
    }
}
