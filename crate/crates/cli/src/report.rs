use std::fmt::Write as _;

use gpsrh_core::oracle::SolverConfig;
use gpsrh_core::{
    CaseClassification, Complex64, DerivedRates, ModelParams, QuadratureConfig, Region, SimConfig,
    SimResult, StabilityVerdict, TailEstimate,
};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub input: ModelParams,
    pub derived: Option<DerivedRates>,
    pub stability: Option<StabilityReport>,
    pub config: RunConfig,
    pub solution: Option<SolutionReport>,
    pub evaluations: Vec<Evaluation>,
    pub tail: Option<TailReport>,
    pub oracle: Option<OracleReport>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: &'static str, input: ModelParams) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command,
            input,
            derived: None,
            stability: None,
            config: RunConfig::default(),
            solution: None,
            evaluations: Vec::new(),
            tail: None,
            oracle: None,
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityReport {
    #[serde(flatten)]
    pub verdict: StabilityVerdict,
    pub margin: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub quadrature: Option<QuadratureConfig>,
    pub ctmc: Option<CtmcConfig>,
    pub simulation: Option<SimConfig>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CtmcConfig {
    pub truncation: usize,
    #[serde(flatten)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolutionReport {
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
    /// Disagreement between the two independent routes to `P(0,0)`.
    pub p00_dual_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub function: &'static str,
    pub x: Option<Complex64>,
    pub y: Option<Complex64>,
    pub value: Complex64,
    pub region: Option<Region>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub queue: u8,
    pub classification: CaseClassification,
    pub estimate: TailEstimate,
    /// `(n, estimate of P(N >= n))`.
    pub table: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CtmcSummary {
    pub truncation: usize,
    pub sweeps: usize,
    pub balance_residual: f64,
    pub boundary_mass: f64,
    pub p00: f64,
    pub mean_n1: f64,
    pub mean_n2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub analytic: f64,
    pub reference: f64,
    pub abs_gap: f64,
    /// Confidence half-width when the reference is a simulation estimate.
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleReport {
    pub ctmc: Option<CtmcSummary>,
    pub simulation: Option<SimResult>,
    pub comparisons: Vec<Comparison>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

/// Six significant digits.
pub fn num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, v)
    } else {
        format!("{v:.5e}")
    }
}

fn cnum(z: Complex64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", num(z.re), num(z.im.abs()))
    }
}

pub fn to_table(r: &RunReport) -> String {
    let mut s = String::new();
    let p = &r.input;
    let _ = writeln!(
        s,
        "parameters: lambda1 {} lambda2 {} nu1 {} nu2 {} r {} phi1 {} phi2 {}",
        num(p.lambda1),
        num(p.lambda2),
        num(p.nu1),
        num(p.nu2),
        num(p.r),
        num(p.phi1),
        num(p.phi2)
    );
    if let Some(d) = &r.derived {
        let _ = writeln!(s, "mu1 {} mu2 {} rho1 {} rho2 {}", num(d.mu1), num(d.mu2), num(d.rho1), num(d.rho2));
    }
    if let Some(st) = &r.stability {
        let v = &st.verdict;
        let _ = writeln!(
            s,
            "stability: {} (LHS1 = {}, LHS2 = {}, margin {})",
            if v.stable { "stable" } else { "unstable" },
            num(v.lhs1),
            num(v.lhs2),
            num(st.margin)
        );
    }
    if let Some(sol) = &r.solution {
        let _ = writeln!(s, "P(0,0) = {}", num(sol.p00));
        let _ = writeln!(s, "P(1,0) = {}", num(sol.p10));
        let _ = writeln!(s, "P(0,1) = {}", num(sol.p01));
        let _ = writeln!(s, "dual-route gap for P(0,0) = {}", num(sol.p00_dual_gap));
    }
    for e in &r.evaluations {
        let arg = match (e.x, e.y) {
            (Some(x), Some(y)) => format!("{}, {}", cnum(x), cnum(y)),
            (Some(x), None) => cnum(x),
            (None, Some(y)) => cnum(y),
            (None, None) => String::new(),
        };
        let _ = writeln!(s, "{} at ({arg}) = {}", e.function, cnum(e.value));
    }
    if let Some(t) = &r.tail {
        let e = &t.estimate;
        let _ = writeln!(
            s,
            "tail of N{}: case {}, decay base {}, power exponent {}, prefactor {}",
            t.queue,
            e.case,
            num(e.decay_base),
            num(e.power_exponent),
            num(e.prefactor)
        );
        if let Some(alt) = &e.alternative {
            let _ = writeln!(
                s,
                "  alternative: case {}, decay base {}, power exponent {}, prefactor {}",
                alt.case,
                num(alt.decay_base),
                num(alt.power_exponent),
                num(alt.prefactor)
            );
        }
        if !t.table.is_empty() {
            let _ = writeln!(s, "{:>6}  {:>14}", "n", "P(N >= n)");
            for (n, v) in &t.table {
                let _ = writeln!(s, "{n:>6}  {:>14}", num(*v));
            }
        }
    }
    if let Some(o) = &r.oracle {
        if let Some(c) = &o.ctmc {
            let _ = writeln!(
                s,
                "truncated chain N = {}: {} sweeps, balance residual {}, boundary mass {}",
                c.truncation,
                c.sweeps,
                num(c.balance_residual),
                num(c.boundary_mass)
            );
            let _ = writeln!(s, "  p(0,0) {} E[N1] {} E[N2] {}", num(c.p00), num(c.mean_n1), num(c.mean_n2));
        }
        if let Some(sim) = &o.simulation {
            let _ = writeln!(
                s,
                "simulation: {} replications, seed {}, confidence {}",
                sim.replications,
                sim.seed,
                num(sim.confidence)
            );
            for (name, e) in [("p(0,0)", sim.p00), ("E[N1]", sim.mean_n1), ("E[N2]", sim.mean_n2)] {
                let _ = writeln!(s, "  {name} {} +/- {}", num(e.mean), num(e.half_width));
            }
        }
        for c in &o.comparisons {
            let _ = write!(
                s,
                "{}: analytic {} reference {} gap {}",
                c.quantity,
                num(c.analytic),
                num(c.reference),
                num(c.abs_gap)
            );
            if let Some(h) = c.half_width {
                let _ = write!(s, " (half-width {})", num(h));
            }
            s.push('\n');
        }
        for f in &o.files {
            let _ = writeln!(s, "wrote {f}");
        }
    }
    for c in &r.checks {
        let _ = writeln!(
            s,
            "{} {}: {} (tolerance {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            num(c.value),
            num(c.tolerance)
        );
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}
