//! Functional-equation polynomials, kernel roots and their branch structure.
//!
//! The kernel `h1(x, y)` is quadratic in each variable. Solving it for `x`
//! gives two algebraic functions of `y` (`x_star`, `x_substar`) whose
//! branch points are the four real roots of the discriminant in `y`;
//! solving for `y` gives the mirror pair (`y_star`, `y_substar`).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result, Side};
use crate::model::ModelParams;

type C = Complex64;

/// Relative width of the band around a cut treated as lying on it.
pub const CUT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPoly {
    H1,
    H2,
    H3,
    H4,
}

/// Ordered branch points. `y` are the roots of the discriminant in `y`
/// (cuts `[y[0], y[1]]` and `[y[2], y[3]]`), `x` the mirror roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoints {
    pub y: [f64; 4],
    pub x: [f64; 4],
}

/// One of the two algebraic root pairs of the kernel.
///
/// The kernel is written as `-a u^2 v - b u v^2 + s u v - c v - d u`, where `u`
/// is the solved-for variable and `v` the argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RootPair {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    s: f64,
    cuts: [f64; 4],
}

impl RootPair {
    fn new(a: f64, b: f64, c: f64, d: f64, s: f64) -> Result<Self> {
        let c0 = 2.0 * (a * c).sqrt();
        let small = |p: f64| 2.0 * d / (p + (p * p - 4.0 * b * d).max(0.0).sqrt());
        let large = |p: f64| (p + (p * p - 4.0 * b * d).max(0.0).sqrt()) / (2.0 * b);
        let cuts = [small(s + c0), small(s - c0), large(s - c0), large(s + c0)];
        let slack = 1e-12;
        let ok = 0.0 < cuts[0]
            && cuts[0] < cuts[1]
            && cuts[1] <= 1.0 + slack
            && 1.0 - slack <= cuts[2]
            && cuts[2] < cuts[3]
            && cuts.iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::OrderingViolation(format!("{cuts:?}")));
        }
        Ok(RootPair { a, b, c, d, s, cuts })
    }

    fn quad_part(&self, v: C) -> C {
        self.b * v * v - self.s * v + self.d
    }

    pub(crate) fn disc(&self, v: C) -> C {
        let q = self.quad_part(v);
        q * q - 4.0 * self.a * self.c * v * v
    }

    fn on_cut(&self, v: C) -> Option<(f64, f64)> {
        let tol = CUT_TOLERANCE * v.norm().max(1.0);
        if v.im.abs() > tol {
            return None;
        }
        [(self.cuts[0], self.cuts[1]), (self.cuts[2], self.cuts[3])]
            .into_iter()
            .find(|&(lo, hi)| v.re >= lo - tol && v.re <= hi + tol)
    }

    fn sqrt_disc_raw(&self, v: C) -> C {
        // force a +0 imaginary part so that signed zeros cannot flip a factor
        let v = if v.im == 0.0 { C::new(v.re, 0.0) } else { v };
        self.cuts
            .iter()
            .fold(C::new(self.b, 0.0), |acc, &vi| acc * (v - vi).sqrt())
    }

    pub(crate) fn sqrt_disc(&self, v: C) -> Result<C> {
        if let Some((from, to)) = self.on_cut(v) {
            return Err(Error::OnCut { point: v.re, from, to });
        }
        Ok(self.sqrt_disc_raw(v))
    }

    pub(crate) fn sqrt_disc_onesided(&self, t: f64, side: Side) -> Result<C> {
        let [v1, v2, v3, v4] = self.cuts;
        let inner = (v1..=v2).contains(&t);
        let outer = (v3..=v4).contains(&t);
        if !inner && !outer {
            return Err(Error::NotOnCut(t));
        }
        let mag = self.b * self.cuts.iter().map(|vi| (t - vi).abs()).product::<f64>().sqrt();
        let sign = match (outer, side) {
            (true, Side::Above) | (false, Side::Below) => 1.0,
            _ => -1.0,
        };
        Ok(C::new(0.0, sign * mag))
    }

    fn star_with(&self, v: C, rho: C) -> C {
        let q = self.quad_part(v);
        let (plus, minus) = (-q + rho, -q - rho);
        if plus.norm() >= minus.norm() {
            plus / (2.0 * self.a * v)
        } else {
            2.0 * self.c * v / minus
        }
    }

    fn substar_with(&self, v: C, rho: C) -> Result<C> {
        if v.norm() == 0.0 {
            return Err(Error::PoleAtZero);
        }
        let q = self.quad_part(v);
        let (plus, minus) = (-q + rho, -q - rho);
        Ok(if minus.norm() >= plus.norm() {
            minus / (2.0 * self.a * v)
        } else {
            2.0 * self.c * v / plus
        })
    }

    pub(crate) fn star(&self, v: C) -> Result<C> {
        Ok(self.star_with(v, self.sqrt_disc(v)?))
    }

    pub(crate) fn substar(&self, v: C) -> Result<C> {
        self.substar_with(v, self.sqrt_disc(v)?)
    }

    pub(crate) fn star_onesided(&self, t: f64, side: Side) -> Result<C> {
        let rho = self.sqrt_disc_onesided(t, side)?;
        Ok(self.star_with(C::new(t, 0.0), rho))
    }

    pub(crate) fn substar_onesided(&self, t: f64, side: Side) -> Result<C> {
        let rho = self.sqrt_disc_onesided(t, side)?;
        self.substar_with(C::new(t, 0.0), rho)
    }

    /// Kernel and its partial derivatives in `(u, v)` ordering.
    fn kernel(&self, u: C, v: C) -> C {
        -self.a * u * u * v - self.b * u * v * v + self.s * u * v - self.c * v - self.d * u
    }

    fn kernel_du(&self, u: C, v: C) -> C {
        -2.0 * self.a * u * v - self.b * v * v + self.s * v - self.d
    }

    fn kernel_dv(&self, u: C, v: C) -> C {
        -self.a * u * u - 2.0 * self.b * u * v + self.s * u - self.c
    }
}

/// Coefficients of the functional equation
/// `h1 P(x,y) = h2 P(x,0) + h3 P(0,y) + h4 P(0,0)` and the kernel root functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    params: ModelParams,
    pub lambda1: f64,
    pub lambda2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// `lambda1 + lambda2 + phi1 mu1 + phi2 mu2`.
    pub total_rate: f64,
    /// Roots in `x` as functions of `y`.
    xs: RootPair,
    /// Roots in `y` as functions of `x`.
    ys: RootPair,
}

impl Kernel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let d = params.derive_rates()?;
        let (l1, l2) = (params.lambda1, params.lambda2);
        let (f1m1, f2m2) = (params.phi1 * d.mu1, params.phi2 * d.mu2);
        let s = l1 + l2 + f1m1 + f2m2;
        let xs = RootPair::new(l1, l2, f1m1, f2m2, s)?;
        let ys = RootPair::new(l2, l1, f2m2, f1m1, s)?;
        Ok(Kernel {
            params: *params,
            lambda1: l1,
            lambda2: l2,
            phi1: params.phi1,
            phi2: params.phi2,
            mu1: d.mu1,
            mu2: d.mu2,
            rho1: d.rho1,
            rho2: d.rho2,
            total_rate: s,
            xs,
            ys,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Kernel of the model with the two queues exchanged.
    pub fn swapped(&self) -> Kernel {
        Kernel::new(&self.params.swapped()).expect("swap preserves validity")
    }

    pub fn branch_points(&self) -> BranchPoints {
        BranchPoints {
            y: self.xs.cuts,
            x: self.ys.cuts,
        }
    }

    /// Radius `sqrt(phi2 / rho2)` of the circle on which the boundary problem for `P(0, y)` lives.
    pub fn y_circle_radius(&self) -> f64 {
        (self.phi2 / self.rho2).sqrt()
    }

    /// Radius `sqrt(phi1 / rho1)`.
    pub fn x_circle_radius(&self) -> f64 {
        (self.phi1 / self.rho1).sqrt()
    }

    pub fn eval(&self, which: KernelPoly, x: C, y: C) -> C {
        match which {
            KernelPoly::H1 => self.h1(x, y),
            KernelPoly::H2 => self.h2(x, y),
            KernelPoly::H3 => self.h3(x, y),
            KernelPoly::H4 => self.h4(x, y),
        }
    }

    pub fn h1(&self, x: C, y: C) -> C {
        self.xs.kernel(x, y)
    }

    pub fn h2(&self, x: C, y: C) -> C {
        self.phi2 * self.mu2 * x * (y - 1.0) - (1.0 - self.phi1) * self.mu1 * y * (x - 1.0)
    }

    pub fn h3(&self, x: C, y: C) -> C {
        self.phi1 * self.mu1 * y * (x - 1.0) - (1.0 - self.phi2) * self.mu2 * x * (y - 1.0)
    }

    pub fn h4(&self, x: C, y: C) -> C {
        (1.0 - self.phi1) * self.mu1 * y * (x - 1.0) + (1.0 - self.phi2) * self.mu2 * x * (y - 1.0)
    }

    pub fn h1_dx(&self, x: C, y: C) -> C {
        self.xs.kernel_du(x, y)
    }

    pub fn h1_dy(&self, x: C, y: C) -> C {
        self.xs.kernel_dv(x, y)
    }

    pub fn h3_dx(&self, _x: C, y: C) -> C {
        self.phi1 * self.mu1 * y - (1.0 - self.phi2) * self.mu2 * (y - 1.0)
    }

    pub fn h3_dy(&self, x: C, _y: C) -> C {
        self.phi1 * self.mu1 * (x - 1.0) - (1.0 - self.phi2) * self.mu2 * x
    }

    /// Largest coefficient magnitude of `h1`, used to make residuals relative.
    pub fn h1_scale(&self) -> f64 {
        [
            self.lambda1,
            self.lambda2,
            self.total_rate,
            self.phi1 * self.mu1,
            self.phi2 * self.mu2,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Discriminant of `h1` in `x`, a quartic in `y`.
    pub fn delta2(&self, y: C) -> C {
        self.xs.disc(y)
    }

    /// Discriminant of `h1` in `y`, a quartic in `x`.
    pub fn delta1(&self, x: C) -> C {
        self.ys.disc(x)
    }

    /// Branch of `sqrt(delta2)` analytic off the two cuts and positive at 0.
    pub fn sqrt_delta2(&self, y: C) -> Result<C> {
        self.xs.sqrt_disc(y)
    }

    pub fn sqrt_delta1(&self, x: C) -> Result<C> {
        self.ys.sqrt_disc(x)
    }

    /// Limit of [`Self::sqrt_delta2`] from above or below a point of a cut (endpoints included).
    pub fn sqrt_delta2_onesided(&self, y: f64, side: Side) -> Result<C> {
        self.xs.sqrt_disc_onesided(y, side)
    }

    pub fn sqrt_delta1_onesided(&self, x: f64, side: Side) -> Result<C> {
        self.ys.sqrt_disc_onesided(x, side)
    }

    /// Root of `h1(., y)` vanishing at `y = 0`.
    pub fn x_star(&self, y: C) -> Result<C> {
        self.xs.star(y)
    }

    /// The other root of `h1(., y)`; pole at `y = 0`.
    pub fn x_substar(&self, y: C) -> Result<C> {
        self.xs.substar(y)
    }

    pub fn y_star(&self, x: C) -> Result<C> {
        self.ys.star(x)
    }

    pub fn y_substar(&self, x: C) -> Result<C> {
        self.ys.substar(x)
    }

    pub fn x_star_onesided(&self, y: f64, side: Side) -> Result<C> {
        self.xs.star_onesided(y, side)
    }

    pub fn x_substar_onesided(&self, y: f64, side: Side) -> Result<C> {
        self.xs.substar_onesided(y, side)
    }

    pub fn y_star_onesided(&self, x: f64, side: Side) -> Result<C> {
        self.ys.star_onesided(x, side)
    }

    pub fn y_substar_onesided(&self, x: f64, side: Side) -> Result<C> {
        self.ys.substar_onesided(x, side)
    }

    /// `d x_star / d y` by implicit differentiation of `h1(x_star(y), y) = 0`.
    pub fn x_star_derivative(&self, y: C) -> Result<C> {
        let x = self.x_star(y)?;
        Ok(-self.h1_dy(x, y) / self.h1_dx(x, y))
    }

    /// `|y_star(x_star(y)) - y|`.
    pub fn conformal_roundtrip(&self, y: C) -> Result<f64> {
        let x = self.x_star(y)?;
        Ok((self.y_star(x)? - y).norm())
    }

    /// `P(1, 0)` implied by `P(0, 0)`.
    pub fn p10_from_p00(&self, p00: f64) -> f64 {
        let (f1, f2) = (self.phi1, self.phi2);
        (-f1 + (1.0 - f2) * self.rho1 + f1 * self.rho2 + (1.0 - f2) * p00) / (1.0 - f1 - f2)
    }

    /// `P(0, 1)` implied by `P(0, 0)`.
    pub fn p01_from_p00(&self, p00: f64) -> f64 {
        let (f1, f2) = (self.phi1, self.phi2);
        (-f2 + (1.0 - f1) * self.rho2 + f2 * self.rho1 + (1.0 - f1) * p00) / (1.0 - f1 - f2)
    }

    pub fn boundary_relations(&self, p00: f64) -> BoundaryRelations<'_> {
        BoundaryRelations {
            kernel: self,
            p00,
            p10: self.p10_from_p00(p00),
            p01: self.p01_from_p00(p00),
        }
    }
}

/// Evaluators for `P(1, y)` and `P(x, 1)` in terms of the boundary functions.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryRelations<'a> {
    kernel: &'a Kernel,
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
}

/// Points closer than this (relative) to the zero of a denominator are
/// evaluated through the mean value over a small circle.
const REMOVABLE_BAND: f64 = 1e-6;
const REMOVABLE_RADIUS: f64 = 1e-3;
const REMOVABLE_NODES: usize = 16;

fn circle_mean<F: Fn(C) -> Result<C>>(f: F, center: C, radius: f64) -> Result<C> {
    let mut acc = C::new(0.0, 0.0);
    for k in 0..REMOVABLE_NODES {
        let t = std::f64::consts::TAU * (k as f64 + 0.5) / REMOVABLE_NODES as f64;
        acc += f(center + C::from_polar(radius, t))?;
    }
    Ok(acc / REMOVABLE_NODES as f64)
}

impl BoundaryRelations<'_> {
    /// `P(1, y)`; the point `y = phi2/rho2` is removable iff `phi1 >= rho1`.
    pub fn p1y<F: Fn(C) -> Result<C> + Copy>(&self, y: C, p0y: F) -> Result<C> {
        let k = self.kernel;
        let pole = k.phi2 / k.rho2;
        let direct = |y: C| -> Result<C> {
            let num = k.phi2 * self.p10 - (1.0 - k.phi2) * p0y(y)? + (1.0 - k.phi2) * self.p00;
            Ok(num / (k.phi2 - k.rho2 * y))
        };
        if (y - pole).norm() <= REMOVABLE_BAND * pole {
            if k.phi1 < k.rho1 {
                return Err(Error::PoleEncountered(y));
            }
            return circle_mean(direct, y, REMOVABLE_RADIUS * pole);
        }
        direct(y)
    }

    /// `P(x, 1)`; the point `x = phi1/rho1` is removable iff `phi2 >= rho2`.
    pub fn px1<F: Fn(C) -> Result<C> + Copy>(&self, x: C, px0: F) -> Result<C> {
        let k = self.kernel;
        let pole = k.phi1 / k.rho1;
        let direct = |x: C| -> Result<C> {
            let num = -(1.0 - k.phi1) * px0(x)? + k.phi1 * self.p01 + (1.0 - k.phi1) * self.p00;
            Ok(num / (k.phi1 - k.rho1 * x))
        };
        if (x - pole).norm() <= REMOVABLE_BAND * pole {
            if k.phi2 < k.rho2 {
                return Err(Error::PoleEncountered(x));
            }
            return circle_mean(direct, x, REMOVABLE_RADIUS * pole);
        }
        direct(x)
    }
}
