//! Solution of the zero-index boundary value problem for `P(0, y)`.
//!
//! `P(0, y)` is `A phi(y) + B` inside the circle `|y| = sqrt(phi2/rho2)` and
//! `A alpha(y) phi(y) + B` outside, where `phi = exp(Gamma)` and
//! `Gamma(y) = (y/pi) \int_{x1}^{x2} (lambda1 x^2 - phi1 mu1) theta(x) / (x h1(x, y)) dx`.
//! `P(x, 0)` is the same construction on the model with the queues exchanged.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{BoundaryRelations, Kernel};
use crate::model::{ModelParams, Queue};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::resultants::{locate_poles, PoleReport, Resultants};

type C = Complex64;

/// Points within this relative distance of the circle are treated as lying on it.
pub const CIRCLE_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    InsideDisk,
    OutsideDisk,
    Boundary,
}

/// Value of a boundary generating function and the piece of its definition used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GFValue {
    pub value: C,
    pub region: Region,
}

/// `Gamma` on the circle: principal value and the two one-sided limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLog {
    pub principal: C,
    pub inside: C,
    pub outside: C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexReport {
    pub winding: i64,
    /// Largest real part of `-lambda2 mu1 (1 - phi1 - phi2) x_star(y) y + R_Y(x_star(y))` on the circle.
    pub max_re_contour: f64,
    pub samples: usize,
}

/// Solver for the `y`-side problem of one orientation of the model.
#[derive(Debug, Clone)]
pub struct RhSolver {
    kernel: Kernel,
    res: Resultants,
    poles: PoleReport,
    cfg: QuadratureConfig,
    seg: [f64; 4],
    half_width: f64,
    p00: f64,
    varphi_one: C,
}

impl RhSolver {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Self::with_config(params, QuadratureConfig::default())
    }

    pub fn with_config(params: &ModelParams, cfg: QuadratureConfig) -> Result<Self> {
        params.require_stable()?;
        let kernel = Kernel::new(params)?;
        let res = Resultants::new(&kernel);
        let poles = locate_poles(&kernel, &res);
        let seg = kernel.branch_points().x;
        let mut s = RhSolver {
            half_width: 0.5 * (seg[1] - seg[0]),
            kernel,
            res,
            poles,
            cfg,
            seg,
            p00: f64::NAN,
            varphi_one: C::new(f64::NAN, 0.0),
        };
        let one = C::new(1.0, 0.0);
        let varphi_one = if s.on_circle(one) {
            s.boundary_log_varphi(one)?.inside.exp()
        } else {
            s.varphi_y(one)?
        };
        s.varphi_one = varphi_one;
        s.p00 = s.p00_from_varphi(varphi_one.re);
        Ok(s)
    }

    fn p00_from_varphi(&self, varphi_one: f64) -> f64 {
        let k = &self.kernel;
        if k.phi2 > k.rho2 {
            (1.0 - k.rho1 - (1.0 - k.phi1) / k.phi2 * k.rho2) / varphi_one
        } else {
            k.phi1 * (1.0 - (1.0 - k.phi2) / k.phi1 * k.rho1 - k.rho2) / ((1.0 - k.phi2) * varphi_one)
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn resultants(&self) -> &Resultants {
        &self.res
    }

    pub fn poles(&self) -> &PoleReport {
        &self.poles
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn p00(&self) -> f64 {
        self.p00
    }

    pub fn varphi_at_one(&self) -> C {
        self.varphi_one
    }

    pub fn circle_radius(&self) -> f64 {
        self.kernel.y_circle_radius()
    }

    pub fn on_circle(&self, y: C) -> bool {
        let r = self.circle_radius();
        (y.norm() - r).abs() <= CIRCLE_BAND * r
    }

    fn coefficient_a(&self) -> f64 {
        let k = &self.kernel;
        -k.phi2 * self.p00 / (1.0 - k.phi1 - k.phi2)
    }

    fn coefficient_b(&self) -> f64 {
        let k = &self.kernel;
        (1.0 - k.phi1) * self.p00 / (1.0 - k.phi1 - k.phi2)
    }

    /// Phase function on `[x1, x2]`; vanishes at both ends.
    pub fn theta_y(&self, x: f64) -> Result<f64> {
        let [x1, x2, x3, x4] = self.seg;
        if !(x1..=x2).contains(&x) {
            return Err(Error::NotOnCut(x));
        }
        let sq = self.kernel.lambda1 * ((x - x1) * (x2 - x) * (x3 - x) * (x4 - x)).sqrt();
        self.theta_with(x, sq)
    }

    fn theta_with(&self, x: f64, sqrt_neg_delta1: f64) -> Result<f64> {
        let k = &self.kernel;
        let excess = k.phi1 + k.phi2 - 1.0;
        let p = k.lambda1 * x * x - k.total_rate * x + k.phi1 * k.mu1;
        let num = k.mu1 * excess * sqrt_neg_delta1;
        let den = k.mu1 * excess * p - 2.0 * self.res.r_y.eval(x);
        if den.is_nan() || den <= 0.0 {
            return Err(Error::BranchAmbiguity { x, value: den });
        }
        Ok(num.atan2(den))
    }

    /// Node of the cosine substitution `x = x1 + w (1 - cos t)`:
    /// returns `(x, (lambda1 x^2 - phi1 mu1) theta(x) / x, dx/dt)`.
    fn node(&self, t: f64) -> Result<(f64, f64, f64)> {
        let [x1, _, x3, x4] = self.seg;
        let w = self.half_width;
        let half = (0.5 * t).sin();
        let x = x1 + 2.0 * w * half * half;
        let jac = w * t.sin();
        let sq = self.kernel.lambda1 * jac * ((x3 - x) * (x4 - x)).sqrt();
        let theta = self.theta_with(x, sq)?;
        let k = &self.kernel;
        Ok((x, (k.lambda1 * x * x - k.phi1 * k.mu1) * theta / x, jac))
    }

    fn t_of(&self, x: f64) -> f64 {
        let u = ((x - self.seg[0]) / (2.0 * self.half_width)).clamp(0.0, 1.0);
        2.0 * u.sqrt().asin()
    }

    fn integrate_nodes<F>(&self, a: f64, b: f64, f: F) -> Result<C>
    where
        F: FnMut(f64, f64, f64) -> C,
    {
        self.integrate_nodes_with(a, b, &self.cfg, f)
    }

    fn integrate_nodes_with<F>(&self, a: f64, b: f64, cfg: &QuadratureConfig, mut f: F) -> Result<C>
    where
        F: FnMut(f64, f64, f64) -> C,
    {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let out = integrate(
            |t| match self.node(t) {
                Ok((x, g, jac)) => f(x, g, jac),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    C::new(0.0, 0.0)
                }
            },
            a,
            b,
            cfg,
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(out.value),
        }
    }

    /// `log phi(y)` for `y` off the circle.
    pub fn log_varphi(&self, y: C) -> Result<C> {
        if self.on_circle(y) {
            let r = self.circle_radius();
            return Err(Error::NearSingularity {
                distance: (y.norm() - r).abs(),
            });
        }
        if y.norm() == 0.0 {
            return Ok(C::new(0.0, 0.0));
        }
        let k = &self.kernel;
        let [x1, x2, _, _] = self.seg;
        if let Ok(z) = k.x_star(y) {
            // near the circle the kernel root approaches the segment: subtract the pole
            if z.re > x1 && z.re < x2 && z.im.abs() < 0.2 * (x2 - x1) {
                let far = k.phi1 / (k.rho1 * z);
                let (regular, g_hat) = self.subtracted(y, z, far)?;
                let log_term = (x2 - z).ln() - (x1 - z).ln();
                return Ok(y / PI * (regular + g_hat * log_term));
            }
        }
        let integral = self.integrate_nodes(0.0, PI, |x, g, jac| {
            let x = C::new(x, 0.0);
            g * jac / k.h1(x, y)
        })?;
        Ok(y / PI * integral)
    }

    pub fn varphi_y(&self, y: C) -> Result<C> {
        Ok(self.log_varphi(y)?.exp())
    }

    /// Writing `g(x) / h1(x, y) = G(x) / (x - pole)`, returns
    /// `\int (G(x) - G(x_hat)) / (x - pole) dx` with `x_hat = Re pole`, and `G(x_hat)`.
    fn subtracted(&self, y: C, pole: C, far: C) -> Result<(C, C)> {
        let k = &self.kernel;
        let [x1, x2, _, _] = self.seg;
        let x_hat = pole.re.clamp(x1, x2);
        let big_g = |x: f64, g: f64| C::new(g, 0.0) / (-k.lambda1 * y * (x - far));
        let t_hat = self.t_of(x_hat);
        let g_hat = if x_hat > x1 && x_hat < x2 {
            let (_, g, _) = self.node(t_hat)?;
            big_g(x_hat, g)
        } else {
            C::new(0.0, 0.0)
        };
        let span = x2 - x1;
        let mut quotient = |x: f64, g: f64, jac: f64| {
            let dx = x - pole;
            if dx.norm() <= 1e-14 * span {
                C::new(0.0, 0.0)
            } else {
                (big_g(x, g) - g_hat) / dx * jac
            }
        };
        // cancellation in G - G(x_hat) leaves noise proportional to |G(x_hat)|,
        // and the short piece near an endpoint only needs accuracy relative to the sum
        let mut cfg = QuadratureConfig {
            abs_tol: self.cfg.abs_tol.max(self.cfg.rel_tol * g_hat.norm() * span),
            ..self.cfg
        };
        let hi = self.integrate_nodes_with(t_hat, PI, &cfg, &mut quotient)?;
        cfg.abs_tol = cfg.abs_tol.max(self.cfg.rel_tol * hi.norm());
        let regular = hi + self.integrate_nodes_with(0.0, t_hat, &cfg, &mut quotient)?;
        Ok((regular, g_hat))
    }

    /// Principal value of `Gamma` at a point of the circle (projected onto it)
    /// together with both boundary values.
    pub fn boundary_log_varphi(&self, y: C) -> Result<BoundaryLog> {
        let r = self.circle_radius();
        let y = y * (r / y.norm());
        let k = &self.kernel;
        let [x1, x2, _, _] = self.seg;
        let x_hat = k.x_star(y)?.re.clamp(x1, x2);
        let far = C::new(k.phi1 / (k.rho1 * x_hat), 0.0);
        let (regular, g_hat) = self.subtracted(y, C::new(x_hat, 0.0), far)?;
        let mut pv = regular;
        if g_hat.norm() > 0.0 {
            pv += g_hat * ((x2 - x_hat) / (x_hat - x1)).ln();
        }
        let principal = y / PI * pv;
        // the near root approaches the segment from the side given by Im x_star just inside
        let probe = k.x_star(y * (1.0 - 1e-7))?;
        let side = if probe.im >= 0.0 { 1.0 } else { -1.0 };
        let jump = C::new(0.0, side) * y * g_hat;
        Ok(BoundaryLog {
            principal,
            inside: principal + jump,
            outside: principal - jump,
        })
    }

    /// Number of roots of `h1(., y)` strictly inside `(x1, x2)`.
    fn interior_kernel_roots(&self, y: C) -> usize {
        let k = &self.kernel;
        let [x1, x2, _, _] = self.seg;
        let tol = 1e-9 * (x2 - x1);
        [k.x_star(y), k.x_substar(y)]
            .into_iter()
            .filter_map(|r| r.ok())
            .filter(|r| r.im.abs() <= tol && r.re > x1 && r.re < x2)
            .count()
    }

    /// `exp` of the principal-value integral; equals [`Self::varphi_y`] off the circle.
    pub fn varphi_y_pv(&self, y: C) -> Result<C> {
        if !self.on_circle(y) {
            return match self.interior_kernel_roots(y) {
                0 => self.varphi_y(y),
                n => Err(Error::MultipleSingularities(n)),
            };
        }
        Ok(self.boundary_log_varphi(y)?.principal.exp())
    }

    fn alpha_parts(&self, y: C) -> Result<(C, C)> {
        let k = &self.kernel;
        let x = k.x_star(y)?;
        let r = self.res.r_y.eval_complex(x);
        let wc = 1.0 - k.phi1 - k.phi2;
        let num = -k.mu1 * wc * k.phi2 * k.mu2 * x + y * r;
        let den = y * (-k.lambda2 * k.mu1 * x * wc * y + r);
        Ok((num, den))
    }

    fn alpha_den_is_zero(&self, y: C, den: C) -> bool {
        let k = &self.kernel;
        let scale = y.norm() * (1.0 + y.norm()) * (k.lambda2 * k.mu1 + self.res.r_y.norm()) * (1.0 + y.norm());
        den.norm() <= 1e-13 * scale
    }

    /// Coefficient of the boundary problem, rational form.
    pub fn alpha_y(&self, y: C) -> Result<C> {
        if y.norm() == 0.0 {
            return Err(Error::PoleOfAlpha(y));
        }
        let (num, den) = self.alpha_parts(y)?;
        if self.alpha_den_is_zero(y, den) {
            return Err(Error::PoleOfAlpha(y));
        }
        Ok(num / den)
    }

    /// Coefficient of the boundary problem, `h3(X, w) h2(X, y) / (h2(X, w) h3(X, y))` with
    /// `X = x_star(y)` and `w = phi2 / (rho2 y)`.
    pub fn alpha_y_factored(&self, y: C) -> Result<C> {
        let k = &self.kernel;
        if y.norm() == 0.0 {
            return Err(Error::PoleOfAlpha(y));
        }
        let x = k.x_star(y)?;
        let w = k.phi2 / (k.rho2 * y);
        let den = k.h2(x, w) * k.h3(x, y);
        if den.norm() == 0.0 {
            return Err(Error::PoleOfAlpha(y));
        }
        Ok(k.h3(x, w) * k.h2(x, y) / den)
    }

    fn circle_point(&self, j: usize, n: usize) -> C {
        C::from_polar(self.circle_radius(), TAU * j as f64 / n as f64)
    }

    /// Winding number of `alpha` along the circle and the half-plane check of its contour.
    pub fn index_report(&self, samples: usize) -> Result<IndexReport> {
        let k = &self.kernel;
        let wc = 1.0 - k.phi1 - k.phi2;
        let mut total = 0.0;
        let mut prev: Option<f64> = None;
        let mut max_re = f64::NEG_INFINITY;
        for j in 0..=samples {
            let y = self.circle_point(j % samples, samples);
            let x = k.x_star(y)?;
            let contour = -k.lambda2 * k.mu1 * x * wc * y + self.res.r_y.eval_complex(x);
            max_re = max_re.max(contour.re);
            let arg = self.alpha_y(y)?.arg();
            if let Some(p) = prev {
                {
                    let mut d = arg - p;
                    d -= TAU * (d / TAU).round();
                    if d.abs() > PI / 2.0 {
                        return Err(Error::PhaseAliasing { jump: d });
                    }
                    total += d;
                }
            }
            prev = Some(arg);
        }
        Ok(IndexReport {
            winding: (total / TAU).round() as i64,
            max_re_contour: max_re,
            samples,
        })
    }

    /// `P(0, y)`.
    pub fn p0y(&self, y: C) -> Result<GFValue> {
        let (a, b) = (self.coefficient_a(), self.coefficient_b());
        let r = self.circle_radius();
        if self.on_circle(y) {
            let bl = self.boundary_log_varphi(y)?;
            return Ok(GFValue {
                value: a * bl.inside.exp() + b,
                region: Region::Boundary,
            });
        }
        if y.norm() < r {
            return Ok(GFValue {
                value: a * self.varphi_y(y)? + b,
                region: Region::InsideDisk,
            });
        }
        let (num, den) = self.alpha_parts(y)?;
        if self.alpha_den_is_zero(y, den) {
            return Err(Error::AtPole(y));
        }
        Ok(GFValue {
            value: a * (num / den) * self.varphi_y(y)? + b,
            region: Region::OutsideDisk,
        })
    }

    fn p0y_value(&self, y: C) -> Result<C> {
        Ok(self.p0y(y)?.value)
    }

    pub fn boundary_relations(&self) -> BoundaryRelations<'_> {
        self.kernel.boundary_relations(self.p00)
    }

    /// `P(1, 0)`, the probability that the second queue is empty.
    pub fn p10(&self) -> f64 {
        self.kernel.p10_from_p00(self.p00)
    }

    /// `P(0, 1)`, the probability that the first queue is empty.
    pub fn p01(&self) -> f64 {
        self.kernel.p01_from_p00(self.p00)
    }

    /// `P(1, y)`, the generating function of the second queue length.
    pub fn p1y(&self, y: C) -> Result<C> {
        self.boundary_relations().p1y(y, |y| self.p0y_value(y))
    }

    /// Residual of the boundary condition
    /// `Re(i (h3/h2)(x_star(y), y) (P(0, y) - B)) = 0` at a point of the circle.
    pub fn boundary_condition_residual(&self, y: C) -> Result<f64> {
        let r = self.circle_radius();
        let y = y * (r / y.norm());
        let k = &self.kernel;
        let x = k.x_star(y)?;
        let p = self.p0y(y)?.value - self.coefficient_b();
        Ok((C::i() * k.h3(x, y) / k.h2(x, y) * p).re)
    }

    /// `|phi_inside - alpha phi_outside|` at a point of the circle.
    pub fn gluing_residual(&self, y: C) -> Result<f64> {
        let r = self.circle_radius();
        let y = y * (r / y.norm());
        let bl = self.boundary_log_varphi(y)?;
        Ok((bl.inside.exp() - self.alpha_y(y)? * bl.outside.exp()).norm())
    }

    /// Largest radius at which `P(1, y)` is still analytic.
    pub fn marginal_radius_of_convergence(&self) -> f64 {
        let k = &self.kernel;
        let mut r = self.poles.radius_of_convergence;
        if k.phi1 < k.rho1 {
            r = r.min(k.phi2 / k.rho2);
        }
        r
    }

    /// Coefficients `p(0, n)`, `n = 0..=n_max`.
    pub fn boundary_coefficients(&self, n_max: usize) -> Result<Vec<f64>> {
        let c = cauchy_coefficients(|y| self.p0y_value(y), self.series_radius(), 64, n_max)?;
        Ok(c.into_iter().map(|z| z.re).collect())
    }

    /// Coefficients of `P(1, y)`: the distribution of the second queue length.
    pub fn marginal_coefficients(&self, n_max: usize) -> Result<Vec<f64>> {
        let c = cauchy_coefficients(|y| self.p1y(y), self.series_radius(), 64, n_max)?;
        Ok(c.into_iter().map(|z| z.re).collect())
    }

    fn series_radius(&self) -> f64 {
        let k = &self.kernel;
        let avoid = [k.phi2 / k.rho2, self.circle_radius()];
        [0.5, 0.4, 0.6, 0.3]
            .into_iter()
            .find(|r| avoid.iter().all(|a| (a - r).abs() > 0.02))
            .unwrap_or(0.5)
    }

    /// Mean length of the second queue, `d/dy P(1, y)` at `y = 1`.
    pub fn mean_queue_length(&self) -> Result<f64> {
        let reach = self.marginal_radius_of_convergence() - 1.0;
        let delta = (0.5 * reach).min(0.25);
        let n = 48;
        let mut acc = C::new(0.0, 0.0);
        for j in 0..n {
            let w = C::from_polar(1.0, TAU * (j as f64 + 0.5) / n as f64);
            acc += self.p1y(1.0 + delta * w)? / w;
        }
        Ok(acc.re / (n as f64 * delta))
    }
}

/// Taylor coefficients of `f` at 0 from a trapezoidal Cauchy integral on `|z| = radius`.
pub fn cauchy_coefficients<F>(f: F, radius: f64, nodes: usize, n_max: usize) -> Result<Vec<C>>
where
    F: Fn(C) -> Result<C>,
{
    let values = (0..nodes)
        .map(|j| f(C::from_polar(radius, TAU * j as f64 / nodes as f64)))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=n_max)
        .map(|n| {
            let s: C = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * C::from_polar(1.0, -TAU * (n * j % nodes) as f64 / nodes as f64))
                .sum();
            s / (nodes as f64 * radius.powi(n as i32))
        })
        .collect())
}

/// Both boundary problems and the full generating function.
#[derive(Debug, Clone)]
pub struct RhSolution {
    y_side: RhSolver,
    x_side: RhSolver,
}

impl RhSolution {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Self::with_config(params, QuadratureConfig::default())
    }

    pub fn with_config(params: &ModelParams, cfg: QuadratureConfig) -> Result<Self> {
        Ok(RhSolution {
            y_side: RhSolver::with_config(params, cfg)?,
            x_side: RhSolver::with_config(&params.swapped(), cfg)?,
        })
    }

    pub fn params(&self) -> &ModelParams {
        self.y_side.kernel.params()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.y_side.kernel
    }

    /// Solver whose boundary function describes an empty `queue`'s partner:
    /// `Queue::Two` is the `P(0, y)` problem, `Queue::One` the `P(x, 0)` problem.
    pub fn side(&self, queue: Queue) -> &RhSolver {
        match queue {
            Queue::One => &self.x_side,
            Queue::Two => &self.y_side,
        }
    }

    pub fn y_side(&self) -> &RhSolver {
        &self.y_side
    }

    pub fn x_side(&self) -> &RhSolver {
        &self.x_side
    }

    pub fn p00(&self) -> f64 {
        self.y_side.p00
    }

    /// `|P(0,0)` from the `y`-problem minus `P(0,0)` from the `x`-problem`|`.
    pub fn p00_dual_gap(&self) -> f64 {
        (self.y_side.p00 - self.x_side.p00).abs()
    }

    pub fn p10(&self) -> f64 {
        self.y_side.p10()
    }

    pub fn p01(&self) -> f64 {
        self.y_side.p01()
    }

    pub fn p0y(&self, y: C) -> Result<GFValue> {
        self.y_side.p0y(y)
    }

    pub fn px0(&self, x: C) -> Result<GFValue> {
        self.x_side.p0y(x)
    }

    pub fn p1y(&self, y: C) -> Result<C> {
        self.y_side.p1y(y)
    }

    pub fn px1(&self, x: C) -> Result<C> {
        self.x_side.p1y(x)
    }

    /// `P(x, y)` from the functional equation.
    pub fn pxy(&self, x: C, y: C) -> Result<C> {
        let one = C::new(1.0, 0.0);
        if x == one {
            return self.p1y(y);
        }
        if y == one {
            return self.px1(x);
        }
        if x.norm() == 0.0 {
            return Ok(self.p0y(y)?.value);
        }
        if y.norm() == 0.0 {
            return Ok(self.px0(x)?.value);
        }
        let k = self.kernel();
        let h1 = k.h1(x, y);
        let scale = k.h1_scale() * (1.0 + x.norm()).powi(2) * (1.0 + y.norm()).powi(2);
        if h1.norm() <= 1e-13 * scale {
            return Err(Error::KernelZero { x, y });
        }
        let num = k.h2(x, y) * self.px0(x)?.value
            + k.h3(x, y) * self.p0y(y)?.value
            + k.h4(x, y) * self.p00();
        Ok(num / h1)
    }

    /// Marginal distribution `P(N_queue = n)`, `n = 0..=n_max`.
    pub fn marginal_coefficients(&self, queue: Queue, n_max: usize) -> Result<Vec<f64>> {
        self.side(queue).marginal_coefficients(n_max)
    }

    /// `p(0, n)` for `Queue::Two`, `p(n, 0)` for `Queue::One`.
    pub fn boundary_coefficients(&self, queue: Queue, n_max: usize) -> Result<Vec<f64>> {
        self.side(queue).boundary_coefficients(n_max)
    }

    pub fn mean_queue_length(&self, queue: Queue) -> Result<f64> {
        self.side(queue).mean_queue_length()
    }

    /// Joint probabilities `p(n1, n2)` for `n1, n2 <= n_max` by a double Cauchy integral
    /// on a torus chosen away from the zeros of the kernel.
    pub fn joint_coefficients(&self, n_max: usize) -> Result<Vec<Vec<f64>>> {
        let nodes = 64;
        let k = self.kernel();
        let unit = |j: usize| C::from_polar(1.0, TAU * j as f64 / nodes as f64);
        let candidates = [0.3, 0.4, 0.5, 0.6];
        let mut best = (0.5, 0.5, -1.0);
        for &r1 in &candidates {
            for &r2 in &candidates {
                let mut worst = f64::INFINITY;
                for j in 0..nodes {
                    for l in 0..nodes {
                        worst = worst.min(k.h1(r1 * unit(j), r2 * unit(l)).norm());
                    }
                }
                if worst > best.2 {
                    best = (r1, r2, worst);
                }
            }
        }
        let (r1, r2, _) = best;
        let xs: Vec<C> = (0..nodes).map(|j| r1 * unit(j)).collect();
        let ys: Vec<C> = (0..nodes).map(|j| r2 * unit(j)).collect();
        let px0 = xs.iter().map(|&x| Ok(self.px0(x)?.value)).collect::<Result<Vec<_>>>()?;
        let p0y = ys.iter().map(|&y| Ok(self.p0y(y)?.value)).collect::<Result<Vec<_>>>()?;
        let p00 = self.p00();
        let mut grid = vec![vec![C::new(0.0, 0.0); nodes]; nodes];
        for (j, &x) in xs.iter().enumerate() {
            for (l, &y) in ys.iter().enumerate() {
                let num = k.h2(x, y) * px0[j] + k.h3(x, y) * p0y[l] + k.h4(x, y) * p00;
                grid[j][l] = num / k.h1(x, y);
            }
        }
        let mut out = vec![vec![0.0; n_max + 1]; n_max + 1];
        for (n1, row) in out.iter_mut().enumerate() {
            for (n2, cell) in row.iter_mut().enumerate() {
                let mut s = C::new(0.0, 0.0);
                for (j, grow) in grid.iter().enumerate() {
                    for (l, v) in grow.iter().enumerate() {
                        s += v * unit((nodes * nodes - (n1 * j + n2 * l) % nodes) % nodes);
                    }
                }
                *cell = s.re / ((nodes * nodes) as f64 * r1.powi(n1 as i32) * r2.powi(n2 as i32));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: [f64; 7]) -> ModelParams {
        ModelParams::new(p[0], p[1], p[2], p[3], p[4], p[5], p[6]).unwrap()
    }

    const CANONICAL: [f64; 7] = [0.3, 0.4, 1.0, 1.0, 1.0, 0.7, 0.6];

    #[test]
    fn canonical_p00() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        assert!((s.varphi_at_one().re - 1.7361025667514636).abs() < 1e-10);
        assert!((s.p00() - 0.2016009921895964).abs() < 1e-11);
    }

    #[test]
    fn theta_vanishes_at_ends_and_matches_arg_form() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        let [x1, x2, _, _] = s.seg;
        assert!(s.theta_y(x1).unwrap().abs() < 1e-12);
        assert!(s.theta_y(x2).unwrap().abs() < 1e-12);
        let k = s.kernel();
        let wc = 1.0 - k.phi1 - k.phi2;
        for x in [0.3, 0.5 * (x1 + x2), 0.9] {
            let y = k.y_star_onesided(x, crate::error::Side::Above).unwrap();
            let z = k.lambda2 * k.mu1 * x * wc * y - s.res.r_y.eval(x);
            let th = s.theta_y(x).unwrap();
            assert!((th - z.arg()).abs() < 1e-10 || (th + z.arg()).abs() < 1e-10, "{th} {}", z.arg());
            assert!((0.0..PI / 2.0).contains(&th));
        }
    }

    #[test]
    fn varphi_is_one_at_zero() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        assert_eq!(s.varphi_y(C::new(0.0, 0.0)).unwrap(), C::new(1.0, 0.0));
        let z = s.p0y(C::new(0.0, 0.0)).unwrap();
        assert!((z.value.re - s.p00()).abs() < 1e-15);
    }

    #[test]
    fn quadrature_refinement_is_stable() {
        let p = params(CANONICAL);
        let loose = QuadratureConfig {
            rel_tol: 1e-9,
            ..Default::default()
        };
        let a = RhSolver::with_config(&p, loose).unwrap().varphi_at_one();
        let b = RhSolver::new(&p).unwrap().varphi_at_one();
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn alpha_forms_agree_and_are_unimodular_on_circle() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        for j in 0..20 {
            let y = s.circle_point(j, 20) * C::from_polar(1.0, 0.01);
            let (a, b) = (s.alpha_y(y).unwrap(), s.alpha_y_factored(y).unwrap());
            assert!((a - b).norm() < 1e-12 * a.norm());
            assert!((a.norm() - 1.0).abs() < 1e-10);
        }
        let y = C::new(2.5, -0.7);
        let (a, b) = (s.alpha_y(y).unwrap(), s.alpha_y_factored(y).unwrap());
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn index_is_zero() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        let rep = s.index_report(2048).unwrap();
        assert_eq!(rep.winding, 0);
        assert!(rep.max_re_contour < 0.0);
    }

    #[test]
    fn boundary_values_match_radial_limits() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        let y = C::from_polar(s.circle_radius(), 0.9);
        let bl = s.boundary_log_varphi(y).unwrap();
        let inner = s.log_varphi(y * (1.0 - 1e-6)).unwrap();
        let outer = s.log_varphi(y * (1.0 + 1e-6)).unwrap();
        assert!((bl.inside - inner).norm() < 1e-4, "{:?} {inner}", bl);
        assert!((bl.outside - outer).norm() < 1e-4, "{:?} {outer}", bl);
        let half_log_alpha = 0.5 * s.alpha_y(y).unwrap().ln();
        assert!((bl.inside - bl.principal - half_log_alpha).norm() < 1e-9);
        assert!(s.gluing_residual(y).unwrap() < 1e-9);
    }

    #[test]
    fn boundary_condition_holds() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        for j in 0..16 {
            let y = s.circle_point(j, 16) * C::from_polar(1.0, 0.1);
            assert!(s.boundary_condition_residual(y).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn p0y_at_one_matches_p01() {
        for p in [CANONICAL, [0.2, 0.5, 1.0, 1.0, 1.0, 0.8, 0.5]] {
            let s = RhSolver::new(&params(p)).unwrap();
            let v = s.p0y(C::new(1.0, 0.0)).unwrap().value;
            assert!((v.re - s.p01()).abs() < 1e-10, "{v} {}", s.p01());
        }
    }

    #[test]
    fn dual_route_and_normalisation() {
        let sol = RhSolution::new(&params(CANONICAL)).unwrap();
        assert!(sol.p00_dual_gap() < 1e-10);
        let one = C::new(1.0, 0.0);
        assert!((sol.pxy(one, one).unwrap() - 1.0).norm() < 1e-10);
        assert!((sol.px0(one).unwrap().value.re - sol.p10()).abs() < 1e-10);
        let x = C::new(0.3, 0.1);
        assert_eq!(sol.pxy(x, C::new(0.0, 0.0)).unwrap(), sol.px0(x).unwrap().value);
    }

    #[test]
    fn far_field_limit() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        let a = s.coefficient_a();
        let gap = |m: f64| (a * s.varphi_y(C::from_polar(m, 2.0)).unwrap() - a).norm();
        let (g3, g4) = (gap(1e3), gap(1e4));
        assert!(g4 < 1e-4, "{g4}");
        // the approach is first order in 1/|y|
        assert!((g3 / g4 - 10.0).abs() < 0.1, "{g3} {g4}");
    }

    #[test]
    fn reflection_identity() {
        // outside the circle, A phi(y) + B equals the conjugate of P(0, .) at the mirror point
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        let k = s.kernel();
        for y in [C::new(1.6, 0.4), C::new(-2.0, 3.0), C::new(1.2, -0.1)] {
            let lhs = s.coefficient_a() * s.varphi_y(y).unwrap() + s.coefficient_b();
            let mirror = k.phi2 / (k.rho2 * y.conj());
            let rhs = s.p0y(mirror).unwrap().value.conj();
            assert!((lhs - rhs).norm() < 1e-10, "{lhs} {rhs}");
        }
    }

    #[test]
    fn pole_is_reported() {
        let s = RhSolver::new(&params(CANONICAL)).unwrap();
        let xi = s.poles().xi_plus.unwrap();
        assert!(matches!(s.p0y(C::new(xi, 0.0)), Err(Error::AtPole(_))));
        assert!(matches!(
            s.p0y(C::new(0.5 * (s.kernel().branch_points().y[2] + s.kernel().branch_points().y[3]), 0.0)),
            Err(Error::OnCut { .. })
        ));
    }

    #[test]
    fn cauchy_coefficients_of_geometric_series() {
        let c = cauchy_coefficients(|z| Ok(1.0 / (1.0 - 0.5 * z)), 0.5, 64, 10).unwrap();
        for (n, v) in c.iter().enumerate() {
            assert!((v.re - 0.5f64.powi(n as i32)).abs() < 1e-12);
        }
    }
}
