//! Adaptive Gauss-Kronrod quadrature with substitutions that remove
//! inverse-square-root endpoint singularities.
//!
//! Turning-point integrands behave like `sqrt(x - z)` or `1/sqrt(x - z)`
//! near an endpoint z; the substitution `x = z ± s^2` maps either kind to
//! an analytic integrand, after which the adaptive rule converges fast.

/// 15-point Kronrod nodes (positive half) and weights, with the embedded
/// 7-point Gauss weights. Standard QUADPACK values.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One GK15 panel: returns (kronrod value, |kronrod - gauss| error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive bisection of GK15 panels down to an absolute tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }
    let (value, err) = gk15(f, a, b);
    let mut panels = vec![Panel { a, b, value, err }];
    let mut total_err: f64 = err;
    let max_panels = 4096;
    while total_err > abs_tol && panels.len() < max_panels {
        // split the worst panel
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, err, .. } = panels[worst];
        let width = b - a;
        if width.abs() < 1e-15 * (a.abs() + b.abs() + 1.0) || err == 0.0 {
            break;
        }
        let mid = 0.5 * (a + b);
        let (v1, e1) = gk15(f, a, mid);
        let (v2, e2) = gk15(f, mid, b);
        total_err += e1 + e2 - err;
        panels[worst] = Panel { a, b: mid, value: v1, err: e1 };
        panels.push(Panel { a: mid, b, value: v2, err: e2 });
    }
    panels.iter().map(|p| p.value).sum()
}

/// Which endpoints carry a square-root-type singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoints {
    pub left: bool,
    pub right: bool,
}

impl Endpoints {
    pub const NONE: Endpoints = Endpoints { left: false, right: false };
    pub const LEFT: Endpoints = Endpoints { left: true, right: false };
    pub const RIGHT: Endpoints = Endpoints { left: false, right: true };
    pub const BOTH: Endpoints = Endpoints { left: true, right: true };
}

/// Integrate f over [a, b] with square-root behavior (either `sqrt` or
/// `1/sqrt`) at the flagged endpoints. Interior evaluation only: f is
/// never called exactly at a singular endpoint.
pub fn integrate_sqrt_endpoints<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    singular: Endpoints,
    abs_tol: f64,
) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    match (singular.left, singular.right) {
        (false, false) => adaptive(f, a, b, abs_tol),
        (true, false) => {
            // x = a + s^2
            let smax = (b - a).sqrt();
            adaptive(&|s: f64| 2.0 * s * f(a + s * s), 0.0, smax, abs_tol)
        }
        (false, true) => {
            // x = b - s^2
            let smax = (b - a).sqrt();
            adaptive(&|s: f64| 2.0 * s * f(b - s * s), 0.0, smax, abs_tol)
        }
        (true, true) => {
            let mid = 0.5 * (a + b);
            integrate_sqrt_endpoints(f, a, mid, Endpoints::LEFT, 0.5 * abs_tol)
                + integrate_sqrt_endpoints(f, mid, b, Endpoints::RIGHT, 0.5 * abs_tol)
        }
    }
}
