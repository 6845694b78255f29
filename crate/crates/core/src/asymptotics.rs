//! Tail regimes of the queue lengths and their leading-order asymptotics.
//!
//! The estimates describe `P(N2 = n)` for the orientation of the solver they
//! are computed from; the first queue is handled by the swapped solver.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result, Side};
use crate::kernel::Kernel;
use crate::model::{ModelParams, Queue};
use crate::resultants::Resultants;
use crate::rh::{RhSolution, RhSolver};

/// Relative width of the band around `Q_Y(sqrt(phi1/rho1)) = 0` classified as case (b).
pub const CASE_B_TOLERANCE: f64 = 1e-10;
/// Relative width of the band around `phi1 = rho1` flagged as ambiguous.
pub const AMBIGUITY_TOLERANCE: f64 = 1e-10;

const DERIVATIVE_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailCase {
    /// Pole of `P(0, y)` at `xi_plus`.
    A,
    /// Pole merging with the branch point `y3`.
    B,
    /// Branch point `y3`.
    C,
    /// Pole of `P(1, y)` at `phi2/rho2`.
    D,
}

impl TailCase {
    pub fn power_exponent(self) -> f64 {
        match self {
            TailCase::A | TailCase::D => 0.0,
            TailCase::B => -0.5,
            TailCase::C => -1.5,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            TailCase::A => "a",
            TailCase::B => "b",
            TailCase::C => "c",
            TailCase::D => "d",
        }
    }
}

impl std::fmt::Display for TailCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseClassification {
    pub case: TailCase,
    /// Set when `phi1` and `rho1` coincide to tolerance: case (d) is then a second candidate.
    pub ambiguous: bool,
    /// `Q_Y(sqrt(phi1/rho1))`, or NaN when `phi1 < rho1`.
    pub q_y_at_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub case: TailCase,
    pub decay_base: f64,
    pub power_exponent: f64,
    pub prefactor: f64,
    /// Competing estimate when the classification is ambiguous.
    pub alternative: Option<Box<TailEstimate>>,
}

impl TailEstimate {
    /// `prefactor * n^power_exponent * decay_base^n`.
    pub fn eval(&self, n: u32) -> f64 {
        let n = f64::from(n);
        self.prefactor * n.powf(self.power_exponent) * self.decay_base.powf(n)
    }
}

pub fn tail_eval(estimate: &TailEstimate, n: u32) -> f64 {
    estimate.eval(n)
}

pub fn classify_case(params: &ModelParams) -> Result<CaseClassification> {
    params.require_stable()?;
    let k = Kernel::new(params)?;
    let res = Resultants::new(&k);
    Ok(classify_kernel(&k, &res))
}

pub(crate) fn classify_kernel(k: &Kernel, res: &Resultants) -> CaseClassification {
    let gap = k.phi1 - k.rho1;
    let ambiguous = gap.abs() <= AMBIGUITY_TOLERANCE * k.phi1.max(k.rho1);
    if gap < 0.0 && !ambiguous {
        return CaseClassification {
            case: TailCase::D,
            ambiguous,
            q_y_at_threshold: f64::NAN,
        };
    }
    let q = res.q_y.eval(k.x_circle_radius());
    let case = if q.abs() < CASE_B_TOLERANCE * res.q_y.norm() {
        TailCase::B
    } else if q < 0.0 {
        TailCase::A
    } else {
        TailCase::C
    };
    CaseClassification {
        case,
        ambiguous,
        q_y_at_threshold: q,
    }
}

/// Tail of the second queue length of `solver`'s orientation.
pub fn tail_estimate(solver: &RhSolver) -> Result<TailEstimate> {
    let k = solver.kernel();
    let class = classify_kernel(k, solver.resultants());
    let mut est = estimate_for_case(solver, class.case)?;
    if class.ambiguous {
        est.alternative = Some(Box::new(estimate_for_case(solver, TailCase::D)?));
    }
    Ok(est)
}

/// Tail of either queue.
pub fn queue_tail_estimate(solution: &RhSolution, queue: Queue) -> Result<TailEstimate> {
    tail_estimate(solution.side(queue))
}

fn estimate_for_case(solver: &RhSolver, case: TailCase) -> Result<TailEstimate> {
    let k = solver.kernel();
    let (decay_base, prefactor) = match case {
        TailCase::A => case_a(solver)?,
        TailCase::B | TailCase::C => branch_point_case(solver, case)?,
        TailCase::D => (k.rho2 / k.phi2, residue_closed_form(k) / k.phi2),
    };
    if !(prefactor.is_finite() && prefactor > 0.0) {
        return Err(Error::IdentityCheck {
            what: "positivity of the tail prefactor",
            residual: prefactor,
        });
    }
    Ok(TailEstimate {
        case,
        decay_base,
        power_exponent: case.power_exponent(),
        prefactor,
        alternative: None,
    })
}

fn case_a(solver: &RhSolver) -> Result<(f64, f64)> {
    let k = solver.kernel();
    let xi = solver.poles().xi_plus.ok_or(Error::IdentityCheck {
        what: "real positive root of Q_X in case (a)",
        residual: f64::NAN,
    })?;
    let r = pole_weight(k, xi)?;
    let phi = solver.varphi_y(C::new(xi, 0.0))?.re;
    let (f1, f2) = (k.phi1, k.phi2);
    let prefactor =
        -f2 * (1.0 - f2) * solver.p00() * r * phi / (xi * (1.0 - f1 - f2) * (f2 - k.rho2 * xi));
    Ok((1.0 / xi, prefactor))
}

/// `r(xi)`: the residue factor of `h3(x_star(y), y)` at its zero `xi`.
pub fn pole_weight(k: &Kernel, xi: f64) -> Result<f64> {
    let y = C::new(xi, 0.0);
    let x = k.x_star(y)?;
    let dx = x_star_derivative_checked(k, xi)?;
    let mirror = C::new(k.phi2 / (k.rho2 * xi), 0.0);
    let num = k.h3(x, mirror) * k.h2(x, y);
    let den = k.h2(x, mirror) * (k.h3_dx(x, y) * dx + k.h3_dy(x, y));
    Ok((num / den).re)
}

/// `d x_star / d y` at a real point, cross-checked by a central difference.
pub fn x_star_derivative_checked(k: &Kernel, y: f64) -> Result<C> {
    let exact = k.x_star_derivative(C::new(y, 0.0))?;
    let h = DERIVATIVE_STEP;
    let fd = (k.x_star(C::new(y + h, 0.0))? - k.x_star(C::new(y - h, 0.0))?) / (2.0 * h);
    let residual = (fd - exact).norm() / exact.norm().max(1.0);
    if residual > 1e-6 {
        return Err(Error::IdentityCheck {
            what: "derivative of x_star against central difference",
            residual,
        });
    }
    Ok(exact)
}

fn branch_point_case(solver: &RhSolver, case: TailCase) -> Result<(f64, f64)> {
    let k = solver.kernel();
    let res = solver.resultants();
    let residual = modulus_identity_residual(k, res)?;
    if residual > 1e-8 {
        return Err(Error::IdentityCheck {
            what: "|h3(x_star(y), y)|^2 = (phi1/rho1)(y - 1) Q_X(y) on [y3, y4]",
            residual,
        });
    }
    let [y1, y2, y3, y4] = k.branch_points().y;
    let (f1, f2, m1, m2, r2) = (k.phi1, k.phi2, k.mu1, k.mu2, k.rho2);
    let kappa = f2 * f2 * m2 * m2 * (1.0 - f2) * ((1.0 - f1) * m1 + (1.0 - f2) * m2) * solver.p00();
    let phi = solver.varphi_y_pv(C::new(y3, 0.0))?.re;
    let root = (y3 * (y3 - y1) * (y3 - y2) * (y4 - y3)).sqrt();
    let common = k.lambda2 * kappa * (r2 * y3 * y3 - f2) * phi * root
        / (r2 * (r2 * y3 - f2) * res.p_x.eval(f2 / (r2 * y3)));
    let prefactor = match case {
        TailCase::B => common / (2.0 * PI.sqrt() * y3.powi(3) * res.q_x.derivative(y3)),
        _ => common / (4.0 * PI.sqrt() * y3 * y3 * res.q_x.eval(y3)),
    };
    Ok((1.0 / y3, prefactor))
}

/// Largest relative deviation from `|h3(x_star(y + 0i), y)|^2 = (phi1/rho1)(y - 1) Q_X(y)`
/// over interior points of `[y3, y4]`.
pub fn modulus_identity_residual(k: &Kernel, res: &Resultants) -> Result<f64> {
    let [_, _, y3, y4] = k.branch_points().y;
    let mut worst = 0.0f64;
    for j in 1..10 {
        let y = y3 + (y4 - y3) * f64::from(j) / 10.0;
        let x = k.x_star_onesided(y, Side::Above)?;
        let lhs = k.h3(x, C::new(y, 0.0)).norm_sqr();
        let rhs = k.phi1 / k.rho1 * (y - 1.0) * res.q_x.eval(y);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Closed form of `phi2 P(1,0) - (1-phi2) P(0, phi2/rho2) + (1-phi2) P(0,0)` when `phi1 < rho1`.
pub fn residue_closed_form(k: &Kernel) -> f64 {
    let (f1, f2, m1, m2, r1, r2) = (k.phi1, k.phi2, k.mu1, k.mu2, k.rho1, k.rho2);
    f2 * (r1 - f1) * (f2 - r2) * ((1.0 - f1) * m1 + (1.0 - f2) * m2)
        / ((1.0 - f1) * (f2 * (r1 - f1) * m1 + (1.0 - f2) * (f2 - r2) * m2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemovableCheck {
    /// Whether `phi2/rho2` is a removable singularity of `P(1, y)`.
    pub removable: bool,
    /// `phi2 P(1,0) - (1-phi2) P(0, phi2/rho2) + (1-phi2) P(0,0)`, evaluated
    /// from the solver; `None` when `phi2 <= rho2`.
    pub combination: Option<f64>,
    /// The closed form of the combination, when `phi1 < rho1`.
    pub closed_form: Option<f64>,
}

pub fn removable_singularity_check(solver: &RhSolver) -> Result<RemovableCheck> {
    let k = solver.kernel();
    if k.phi2 <= k.rho2 {
        return Ok(RemovableCheck {
            removable: true,
            combination: None,
            closed_form: None,
        });
    }
    let point = k.phi2 / k.rho2;
    let p0 = p0y_regularised(solver, point)?;
    let combination = k.phi2 * solver.p10() - (1.0 - k.phi2) * p0 + (1.0 - k.phi2) * solver.p00();
    let removable = k.phi1 >= k.rho1;
    Ok(RemovableCheck {
        removable,
        combination: Some(combination),
        closed_form: (!removable).then(|| residue_closed_form(k)),
    })
}

/// `P(0, y)` at a real point outside the circle, through a contour mean when the
/// boundary ratio is of the form 0/0 there.
fn p0y_regularised(solver: &RhSolver, y: f64) -> Result<f64> {
    match solver.p0y(C::new(y, 0.0)) {
        Ok(v) if v.value.is_finite() && !near_removable(solver.kernel(), y) => Ok(v.value.re),
        Ok(_) | Err(Error::AtPole(_)) => {
            let k = solver.kernel();
            let y3 = k.branch_points().y[2];
            let mut radius = (1e-3 * y).min(0.25 * (y3 - y));
            radius = radius.min(0.25 * (y - solver.circle_radius()));
            if let Some(xi) = solver.poles().xi_plus.filter(|_| solver.poles().has_pole_in_annulus) {
                radius = radius.min(0.25 * (xi - y).abs());
            }
            const NODES: usize = 32;
            let mut sum = C::new(0.0, 0.0);
            for j in 0..NODES {
                let z = C::new(y, 0.0) + C::from_polar(radius, 2.0 * PI * j as f64 / NODES as f64);
                sum += solver.p0y(z)?.value;
            }
            Ok(sum.re / NODES as f64)
        }
        Err(e) => Err(e),
    }
}

fn near_removable(k: &Kernel, y: f64) -> bool {
    k.phi1 >= k.rho1 && (y - k.phi2 / k.rho2).abs() < 1e-9 * y
}
