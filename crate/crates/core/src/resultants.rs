//! Resultant quadratics of the kernel against `h2` / `h3` and the pole location of `P(0, y)`.
//!
//! With `x` eliminated:
//! `Res_x(h1, h2)(y) = mu1 y (y - 1) P_X(y)` and `Res_x(h1, h3)(y) = -phi1 mu1 y (y - 1) Q_X(y)`.
//! With `y` eliminated:
//! `Res_y(h1, h2)(x) = -phi2 mu2 x (x - 1) P_Y(x)` and `Res_y(h1, h3)(x) = mu2 x (x - 1) Q_Y(x)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::kernel::Kernel;

/// `a t^2 + b t + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticPoly {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadRoots {
    /// Ascending.
    Real { low: f64, high: f64 },
    ComplexPair { re: f64, im: f64 },
    Single { root: f64 },
    None,
}

impl QuadRoots {
    pub fn real(&self) -> Vec<f64> {
        match *self {
            QuadRoots::Real { low, high } => vec![low, high],
            QuadRoots::Single { root } => vec![root],
            _ => Vec::new(),
        }
    }
}

impl QuadraticPoly {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        QuadraticPoly { a, b, c }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        (self.a * t + self.b) * t + self.c
    }

    pub fn derivative(&self, t: f64) -> f64 {
        2.0 * self.a * t + self.b
    }

    pub fn norm(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    pub fn roots(&self) -> QuadRoots {
        let (a, b, c) = (self.a, self.b, self.c);
        if a == 0.0 {
            return if b == 0.0 {
                QuadRoots::None
            } else {
                QuadRoots::Single { root: -c / b }
            };
        }
        let disc = self.discriminant();
        if disc < 0.0 {
            let re = -b / (2.0 * a);
            let im = (-disc).sqrt() / (2.0 * a.abs());
            return QuadRoots::ComplexPair { re, im };
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return QuadRoots::Real { low: 0.0, high: 0.0 };
        }
        let (r1, r2) = (q / a, c / q);
        QuadRoots::Real {
            low: r1.min(r2),
            high: r1.max(r2),
        }
    }

    /// Positive real root of smallest magnitude, ties within 1e-12 resolved to the first.
    pub fn smallest_positive_root(&self) -> Option<f64> {
        self.roots()
            .real()
            .into_iter()
            .filter(|&r| r > 0.0)
            .fold(None, |best: Option<f64>, r| match best {
                Some(b) if b <= r + 1e-12 * r => Some(b),
                _ => Some(r),
            })
    }
}

/// The resultant quadratics of one orientation of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resultants {
    /// Coefficient polynomial appearing in the boundary ratio of the `y`-problem.
    pub r_y: QuadraticPoly,
    pub p_x: QuadraticPoly,
    pub q_x: QuadraticPoly,
    pub p_y: QuadraticPoly,
    pub q_y: QuadraticPoly,
}

impl Resultants {
    pub fn new(k: &Kernel) -> Self {
        let (l1, l2, f1, f2, m1, m2) = (k.lambda1, k.lambda2, k.phi1, k.phi2, k.mu1, k.mu2);
        let kq = f1 * m1 - (1.0 - f2) * m2;
        let kp = f2 * m2 - (1.0 - f1) * m1;
        let lam = l1 + l2;
        Resultants {
            r_y: QuadraticPoly::new(
                (1.0 - f2) * l1 * kp,
                ((1.0 - f1) * (1.0 - f2) * lam - f1 * kp) * m1,
                -f1 * (1.0 - f1) * m1 * m1,
            ),
            p_x: QuadraticPoly::new(
                l2 * (1.0 - f1) * kp,
                -f2 * m2 * ((1.0 - f1) * lam - m1 * (1.0 - f1) + m2 * f2),
                f2 * f2 * m2 * m2,
            ),
            q_x: QuadraticPoly::new(l2 * kq, ((1.0 - f2) * lam - kq) * m2, -(1.0 - f2) * m2 * m2),
            p_y: QuadraticPoly::new(l1 * kp, ((1.0 - f1) * lam - kp) * m1, -(1.0 - f1) * m1 * m1),
            q_y: QuadraticPoly::new(
                l1 * (1.0 - f2) * kq,
                -f1 * m1 * ((1.0 - f2) * lam - m2 * (1.0 - f2) + m1 * f1),
                f1 * f1 * m1 * m1,
            ),
        }
    }
}

/// Singularity structure of `P(0, y)` beyond the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleReport {
    /// Smallest positive root of `Q_X`.
    pub xi_plus: Option<f64>,
    /// The other root of `Q_X`, when real.
    pub xi_minus: Option<f64>,
    pub p_x_roots: QuadRoots,
    pub has_pole_in_annulus: bool,
    /// Radius of convergence of the power series of `P(0, y)`.
    pub radius_of_convergence: f64,
    /// Whether a direct scan of `h3(x_star(y), y)` over `(sqrt(phi2/rho2), y3)` changes sign.
    pub scan_found_zero: bool,
    /// Set when the scan and the polynomial test disagree.
    pub diagnostic: Option<String>,
}

const SCAN_POINTS: usize = 4000;

/// Decide whether `P(0, y)` has a pole between the circle `|y| = sqrt(phi2/rho2)`
/// and the branch point `y3`, and report the radius of convergence.
pub fn locate_poles(k: &Kernel, res: &Resultants) -> PoleReport {
    let xi_plus = res.q_x.smallest_positive_root();
    let xi_minus = xi_plus.and_then(|xp| {
        res.q_x
            .roots()
            .real()
            .into_iter()
            .find(|&r| (r - xp).abs() > 1e-12 * xp.abs())
    });
    let y3 = k.branch_points().y[2];
    let test = k.phi1 > k.rho1 && res.q_y.eval(k.x_circle_radius()) < 0.0;
    let scan = scan_h3_zero(k);
    let has_pole = test && xi_plus.is_some();
    let diagnostic = (scan.is_some() != has_pole).then(|| {
        format!(
            "polynomial test says pole = {has_pole}, scan of h3(x_star(y), y) found {:?}",
            scan
        )
    });
    PoleReport {
        xi_plus,
        xi_minus,
        p_x_roots: res.p_x.roots(),
        has_pole_in_annulus: has_pole,
        radius_of_convergence: if has_pole { xi_plus.unwrap_or(y3) } else { y3 },
        scan_found_zero: scan.is_some(),
        diagnostic,
    }
}

/// First sign change of `h3(x_star(y), y)` on the open interval `(sqrt(phi2/rho2), y3)`.
pub fn scan_h3_zero(k: &Kernel) -> Option<f64> {
    let lo = k.y_circle_radius();
    let hi = k.branch_points().y[2];
    let f = |y: f64| -> Option<f64> {
        let y = Complex64::new(y, 0.0);
        Some(k.h3(k.x_star(y).ok()?, y).re)
    };
    let mut prev: Option<(f64, f64)> = None;
    for j in 1..SCAN_POINTS {
        let y = lo + (hi - lo) * j as f64 / SCAN_POINTS as f64;
        let Some(v) = f(y) else { continue };
        if let Some((py, pv)) = prev {
            if pv.signum() != v.signum() {
                return Some(0.5 * (py + y));
            }
        }
        prev = Some((y, v));
    }
    None
}
