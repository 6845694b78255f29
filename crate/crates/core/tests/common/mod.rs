#![allow(dead_code)]

use gpsrh_core::{Complex64 as C, Kernel, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CANONICAL: [f64; 7] = [0.3, 0.4, 1.0, 1.0, 1.0, 0.7, 0.6];
/// `phi1 < rho1` with `1/y3` almost equal to `rho2/phi2`.
pub const CASE_D: [f64; 7] = [0.35, 0.2, 1.0, 1.0, 1.0, 0.45, 0.9];
/// `phi1 < rho1` with the pole well separated from the branch point.
pub const CASE_D_SEPARATED: [f64; 7] = [0.5, 0.2, 1.0, 1.0, 1.0, 0.5, 0.9];
pub const CASE_C: [f64; 7] = [0.1, 0.05, 1.0, 2.0, 1.0, 0.8, 0.5];

pub fn params(p: [f64; 7]) -> ModelParams {
    ModelParams::new(p[0], p[1], p[2], p[3], p[4], p[5], p[6]).unwrap()
}

/// Scale the arrival direction `(a1, a2)` so that the larger stability
/// left-hand side equals `load`.
pub fn with_load(nu: (f64, f64), phi: (f64, f64), dir: (f64, f64), load: f64) -> ModelParams {
    let unit = ModelParams::new(dir.0, dir.1, nu.0, nu.1, 1.0, phi.0, phi.1).unwrap();
    let v = unit.stability().unwrap();
    let s = load / v.lhs1.max(v.lhs2);
    ModelParams::new(dir.0 * s, dir.1 * s, nu.0, nu.1, 1.0, phi.0, phi.1).unwrap()
}

/// Reproducible stable sets away from the degenerate boundaries
/// `phi1 + phi2 = 1`, `phi_i = rho_i`.
pub fn random_stable_sets(seed: u64, count: usize, load: (f64, f64)) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let phi1: f64 = rng.random_range(0.3..0.95);
        let phi2 = rng.random_range((1.05 - phi1).max(0.1)..0.95);
        let nu = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
        let dir = (rng.random_range(0.05..1.0), rng.random_range(0.05..1.0));
        let p = with_load(nu, (phi1, phi2), dir, rng.random_range(load.0..load.1));
        let d = p.derive_rates().unwrap();
        if (phi1 - d.rho1).abs() < 0.02 || (phi2 - d.rho2).abs() < 0.02 {
            continue;
        }
        out.push(p);
    }
    out
}

/// `lambda2` for which `Q_Y(sqrt(phi1/rho1)) = 0`, all other inputs of `base` fixed.
pub fn case_b_params(base: [f64; 7]) -> ModelParams {
    let p = params(base);
    let k = Kernel::new(&p).unwrap();
    let (l1, f1, f2, m1, m2) = (k.lambda1, k.phi1, k.phi2, k.mu1, k.mu2);
    let s = (f1 / k.rho1).sqrt();
    let a = l1 * (1.0 - f2) * (f1 * m1 - (1.0 - f2) * m2);
    let c = (f1 * m1).powi(2);
    let b = -(a * s * s + c) / s;
    let lambda2 = ((-b / (f1 * m1)) + m2 * (1.0 - f2) - m1 * f1) / (1.0 - f2) - l1;
    ModelParams { lambda2, ..p }
}

/// Determinant of the Sylvester matrix of `a2 t^2 + a1 t + a0` and `b1 t + b0`.
pub fn sylvester_2_1(a: [C; 3], b: [C; 2]) -> C {
    let [a2, a1, a0] = a;
    let [b1, b0] = b;
    a2 * b0 * b0 - a1 * b1 * b0 + a0 * b1 * b1
}

/// Coefficients of `h1` as a polynomial in `x`, highest first.
pub fn h1_in_x(k: &Kernel, y: C) -> [C; 3] {
    let s = k.total_rate;
    [
        -k.lambda1 * y,
        -k.lambda2 * y * y + s * y - k.phi2 * k.mu2,
        -k.phi1 * k.mu1 * y,
    ]
}

pub fn h1_in_y(k: &Kernel, x: C) -> [C; 3] {
    let s = k.total_rate;
    [
        -k.lambda2 * x,
        -k.lambda1 * x * x + s * x - k.phi1 * k.mu1,
        -k.phi2 * k.mu2 * x,
    ]
}

pub fn h2_in_x(k: &Kernel, y: C) -> [C; 2] {
    let (f1, f2, m1, m2) = (k.phi1, k.phi2, k.mu1, k.mu2);
    [f2 * m2 * (y - 1.0) - (1.0 - f1) * m1 * y, (1.0 - f1) * m1 * y]
}

pub fn h3_in_x(k: &Kernel, y: C) -> [C; 2] {
    let (f1, f2, m1, m2) = (k.phi1, k.phi2, k.mu1, k.mu2);
    [f1 * m1 * y - (1.0 - f2) * m2 * (y - 1.0), -f1 * m1 * y]
}

pub fn h2_in_y(k: &Kernel, x: C) -> [C; 2] {
    let (f1, f2, m1, m2) = (k.phi1, k.phi2, k.mu1, k.mu2);
    [f2 * m2 * x - (1.0 - f1) * m1 * (x - 1.0), -f2 * m2 * x]
}

pub fn h3_in_y(k: &Kernel, x: C) -> [C; 2] {
    let (f1, f2, m1, m2) = (k.phi1, k.phi2, k.mu1, k.mu2);
    [f1 * m1 * (x - 1.0) - (1.0 - f2) * m2 * x, (1.0 - f2) * m2 * x]
}

/// Right-hand side of the identity defining `R_Y`:
/// `phi2 mu2 beta2 beta3 x + (1-phi2) mu2 x (lambda2 phi2 mu2 x^2 - alpha2 beta2)`.
pub fn r_y_identity_rhs(k: &Kernel, x: f64) -> f64 {
    let (l1, l2, f1, f2, m1, m2) = (k.lambda1, k.lambda2, k.phi1, k.phi2, k.mu1, k.mu2);
    let alpha2 = -(l1 * x * x - (l1 + l2 + f1 * m1 + f2 * m2) * x + f1 * m1);
    let beta2 = f2 * m2 * x + (1.0 - f1) * m1 * (1.0 - x);
    let beta3 = (1.0 - f2) * m2 * x + f1 * m1 * (1.0 - x);
    f2 * m2 * beta2 * beta3 * x + (1.0 - f2) * m2 * x * (l2 * f2 * m2 * x * x - alpha2 * beta2)
}

/// Points of the open disk `|y| < radius` off the real segment `[lo, hi]`.
pub fn disk_points(rng: &mut ChaCha8Rng, radius: f64, count: usize, lo: f64, hi: f64) -> Vec<C> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = radius * rng.random_range(0.0f64..0.999).sqrt();
        let y = C::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU));
        if y.im.abs() < 1e-6 && y.re >= lo - 1e-6 && y.re <= hi + 1e-6 {
            continue;
        }
        out.push(y);
    }
    out
}
