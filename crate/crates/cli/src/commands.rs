use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use gpsrh_core::asymptotics::queue_tail_estimate;
use gpsrh_core::model::STABILITY_MARGIN;
use gpsrh_core::oracle::{solve_stationary_rates, SolverConfig};
use gpsrh_core::{
    classify_case, simulate, Complex64 as C, Error, Horizon, Kernel, KernelPoly, ModelParams, Queue,
    Region, RhSolution, SimConfig, StationaryGrid,
};

use crate::args::{AsymptoticsArgs, Common, OracleArgs, SolveArgs, ValidateArgs};
use crate::report::{
    Check, Comparison, CtmcConfig, CtmcSummary, Evaluation, OracleReport, RunReport, SolutionReport,
    StabilityReport, TailReport,
};

/// Largest stability left-hand side above which a heavy-load warning is issued.
const HEAVY_LOAD: f64 = 0.98;
/// Default simulated time per replication.
const DEFAULT_HORIZON: f64 = 1e4;

pub fn stability(args: &Common) -> Result<RunReport, Error> {
    let params = args.params()?;
    let mut report = base_report("stability", params)?;
    if let Some(st) = &report.stability {
        if !st.verdict.stable {
            report.warnings.push("parameters are outside the stability region".into());
        }
    }
    Ok(report)
}

pub fn solve(args: &SolveArgs) -> Result<RunReport, Error> {
    let params = args.common.params()?;
    params.require_stable()?;
    let mut report = base_report("solve", params)?;
    let s = RhSolution::new(&params)?;
    report.config.quadrature = Some(*s.y_side().quadrature());
    report.solution = Some(SolutionReport {
        p00: s.p00(),
        p10: s.p10(),
        p01: s.p01(),
        p00_dual_gap: s.p00_dual_gap(),
    });
    for &y in &args.eval_p0y {
        let v = s.p0y(y)?;
        if v.region == Region::Boundary {
            report.warnings.push(format!("P(0,y) at y = {y} lies on the circle; boundary value from the principal value"));
        }
        report.evaluations.push(Evaluation {
            function: "P(0,y)",
            x: None,
            y: Some(y),
            value: v.value,
            region: Some(v.region),
        });
    }
    for &x in &args.eval_px0 {
        let v = s.px0(x)?;
        if v.region == Region::Boundary {
            report.warnings.push(format!("P(x,0) at x = {x} lies on the circle; boundary value from the principal value"));
        }
        report.evaluations.push(Evaluation {
            function: "P(x,0)",
            x: Some(x),
            y: None,
            value: v.value,
            region: Some(v.region),
        });
    }
    for &(x, y) in &args.eval_pxy {
        report.evaluations.push(Evaluation {
            function: "P(x,y)",
            x: Some(x),
            y: Some(y),
            value: s.pxy(x, y)?,
            region: None,
        });
    }
    if let Some(n) = args.n {
        let (grid, cfg) = run_ctmc(&params, n)?;
        report.config.ctmc = Some(cfg);
        let mut oracle = OracleReport::default();
        oracle.comparisons.push(compare("p00", s.p00(), grid.get(0, 0)));
        oracle.ctmc = Some(summary(&grid));
        report.oracle = Some(oracle);
    }
    Ok(report)
}

pub fn asymptotics(args: &AsymptoticsArgs) -> Result<RunReport, Error> {
    let params = args.common.params()?;
    params.require_stable()?;
    let mut report = base_report("asymptotics", params)?;
    let s = RhSolution::new(&params)?;
    report.config.quadrature = Some(*s.y_side().quadrature());
    let (queue, oriented) = match args.queue {
        1 => (Queue::One, params.swapped()),
        _ => (Queue::Two, params),
    };
    let classification = classify_case(&oriented)?;
    let estimate = queue_tail_estimate(&s, queue)?;
    if classification.ambiguous || estimate.alternative.is_some() {
        report.warnings.push(format!(
            "tail regime is ambiguous within tolerance; the alternative estimate is reported too (Q_Y at threshold {:e})",
            classification.q_y_at_threshold
        ));
    }
    let table = match args.tail_range {
        Some((a, b)) => (a..=b).map(|n| (n, estimate.eval(n))).collect(),
        None => Vec::new(),
    };
    report.tail = Some(TailReport {
        queue: args.queue,
        classification,
        estimate,
        table,
    });
    Ok(report)
}

pub fn oracle(args: &OracleArgs) -> Result<RunReport, Error> {
    let params = args.common.params()?;
    params.require_stable()?;
    let mut report = base_report("oracle", params)?;
    let (grid, cfg) = run_ctmc(&params, args.n)?;
    report.config.ctmc = Some(cfg);
    let mut oracle = OracleReport::default();

    let analytic = RhSolution::new(&params)?;
    report.config.quadrature = Some(*analytic.y_side().quadrature());
    let means = [
        analytic.mean_queue_length(Queue::One)?,
        analytic.mean_queue_length(Queue::Two)?,
    ];
    oracle.comparisons.push(compare("p00 (chain)", analytic.p00(), grid.get(0, 0)));
    oracle.comparisons.push(compare("E[N1] (chain)", means[0], grid.mean(Queue::One)));
    oracle.comparisons.push(compare("E[N2] (chain)", means[1], grid.mean(Queue::Two)));
    oracle.ctmc = Some(summary(&grid));

    let wants_sim = args.horizon.is_some() || args.replications.is_some() || args.seed.is_some();
    let sim = if wants_sim {
        let defaults = SimConfig::default();
        let cfg = SimConfig {
            horizon: Horizon::Time(args.horizon.unwrap_or(DEFAULT_HORIZON)),
            replications: args.replications.unwrap_or(defaults.replications),
            seed: args.seed.unwrap_or(defaults.seed),
            ..defaults
        };
        let res = simulate(&params, &cfg)?;
        report.config.simulation = Some(cfg);
        for (name, value, est) in [
            ("p00 (simulation)", analytic.p00(), res.p00),
            ("E[N1] (simulation)", means[0], res.mean_n1),
            ("E[N2] (simulation)", means[1], res.mean_n2),
        ] {
            oracle.comparisons.push(Comparison {
                half_width: Some(est.half_width),
                ..compare(name, value, est.mean)
            });
        }
        Some(res)
    } else {
        None
    };

    if let Some(dir) = &args.common.out {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let path = dir.join("stationary.csv");
        write_with(&path, |w| grid.write_csv(w))?;
        oracle.files.push(path.display().to_string());
        if let Some(res) = &sim {
            let path = dir.join("simulation.csv");
            write_with(&path, |w| res.write_csv(w))?;
            oracle.files.push(path.display().to_string());
        }
    }
    oracle.simulation = sim;
    report.oracle = Some(oracle);
    Ok(report)
}

pub fn validate(args: &ValidateArgs) -> Result<RunReport, Error> {
    let params = args.common.params()?;
    params.require_stable()?;
    let mut report = base_report("validate", params)?;
    let k = Kernel::new(&params)?;
    let s = RhSolution::new(&params)?;
    report.config.quadrature = Some(*s.y_side().quadrature());
    let checks = &mut report.checks;

    let mut linear = 0.0f64;
    let mut star = 0.0f64;
    for (x, y) in sample_points() {
        let sum = (1.0 - k.phi2) * k.h2(x, y) + (1.0 - k.phi1) * k.h3(x, y)
            + (1.0 - k.phi1 - k.phi2) * k.h4(x, y);
        linear = linear.max(sum.norm() / (1.0 + x.norm() * y.norm()));
        let xs = k.x_star(y)?;
        star = star.max(k.h1(xs, y).norm() / k.h1_scale() / (1.0 + xs.norm()).powi(2) / (1.0 + y.norm()).powi(2));
    }
    checks.push(Check::at_most("kernel linear identity", linear, 1e-12));
    let one = C::new(1.0, 0.0);
    let at_one = [KernelPoly::H1, KernelPoly::H2, KernelPoly::H3, KernelPoly::H4]
        .into_iter()
        .map(|w| k.eval(w, one, one).norm())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("kernel polynomials at (1,1)", at_one, 1e-12));
    checks.push(Check::at_most("kernel at (X*(y), y)", star, 1e-10));

    let [y1, y2, _, _] = k.branch_points().y;
    let r = k.y_circle_radius();
    let mut conformal = 0.0f64;
    for j in 0..100 {
        let y = C::from_polar(r * (0.05 + 0.9 * (j % 10) as f64 / 10.0), 0.3 + 0.6 * j as f64);
        if y.im.abs() < 1e-6 && (y1..=y2).contains(&y.re) {
            continue;
        }
        conformal = conformal.max(k.conformal_roundtrip(y)?);
    }
    checks.push(Check::at_most("conformal round trip Y*(X*(y))", conformal, 1e-9));

    let index = s.y_side().index_report(512)?;
    checks.push(Check::at_most("winding number of the boundary coefficient", index.winding.abs() as f64, 0.0));
    checks.push(Check {
        name: "largest real part on the index contour".into(),
        value: index.max_re_contour,
        tolerance: 0.0,
        pass: index.max_re_contour < 0.0,
    });

    let mut boundary = 0.0f64;
    let mut gluing = 0.0f64;
    for j in 0..200 {
        let y = C::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.5) / 200.0);
        boundary = boundary.max(s.y_side().boundary_condition_residual(y)?.abs());
        gluing = gluing.max(s.y_side().gluing_residual(y)?);
    }
    checks.push(Check::at_most("boundary condition residual on the circle", boundary, 1e-7));
    checks.push(Check::at_most("gluing residual on the circle", gluing, 1e-7));
    checks.push(Check::at_most("dual-route gap for P(0,0)", s.p00_dual_gap(), 1e-9));
    let norm = (s.pxy(one, one)? - 1.0).norm();
    checks.push(Check::at_most("normalisation P(1,1) = 1", norm, 1e-9));

    let (grid, cfg) = run_ctmc(&params, args.n)?;
    report.config.ctmc = Some(cfg);
    let checks = &mut report.checks;
    checks.push(Check::at_most("P(0,0) against the truncated chain", (s.p00() - grid.get(0, 0)).abs(), 1e-3));
    let coeffs = s.boundary_coefficients(Queue::Two, 10)?;
    let gap = coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| (c - grid.get(0, n)).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("P(0,y) coefficients against the truncated chain", gap, 1e-4));
    let marginal = s.marginal_coefficients(Queue::Two, 10)?;
    let pmf = grid.marginal_pmf(Queue::Two);
    let gap = marginal.iter().zip(&pmf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("P(1,y) coefficients against the truncated chain", gap, 1e-4));
    checks.push(Check::at_most("truncated chain boundary mass", grid.boundary_mass, 1e-10));
    report.oracle = Some(OracleReport {
        ctmc: Some(summary(&grid)),
        ..Default::default()
    });
    Ok(report)
}

fn base_report(command: &'static str, params: ModelParams) -> Result<RunReport, Error> {
    let mut report = RunReport::new(command, params);
    let verdict = params.stability()?;
    report.derived = Some(params.derive_rates()?);
    report.stability = Some(StabilityReport {
        verdict,
        margin: STABILITY_MARGIN,
    });
    if verdict.stable && verdict.lhs1.max(verdict.lhs2) > HEAVY_LOAD {
        report.warnings.push(format!(
            "close to the stability boundary (LHS {:.6}); tails are heavy and the chain needs a large truncation",
            verdict.lhs1.max(verdict.lhs2)
        ));
    }
    if verdict.near_boundary {
        report.warnings.push("within the numerical margin of the stability boundary".into());
    }
    Ok(report)
}

fn run_ctmc(params: &ModelParams, n: usize) -> Result<(StationaryGrid, CtmcConfig), Error> {
    let solver = SolverConfig::default();
    let grid = solve_stationary_rates(&params.transition_rates()?, n, &solver)?;
    Ok((grid, CtmcConfig { truncation: n, solver }))
}

fn summary(grid: &StationaryGrid) -> CtmcSummary {
    CtmcSummary {
        truncation: grid.n,
        sweeps: grid.sweeps,
        balance_residual: grid.balance_residual,
        boundary_mass: grid.boundary_mass,
        p00: grid.get(0, 0),
        mean_n1: grid.mean(Queue::One),
        mean_n2: grid.mean(Queue::Two),
    }
}

fn compare(quantity: &str, analytic: f64, reference: f64) -> Comparison {
    Comparison {
        quantity: quantity.into(),
        analytic,
        reference,
        abs_gap: (analytic - reference).abs(),
        half_width: None,
    }
}

/// Deterministic spread of complex pairs in the box `[-3, 3]^2`, off the real axis.
fn sample_points() -> impl Iterator<Item = (C, C)> {
    (0..200).map(|j| {
        let t = j as f64;
        let x = C::new(3.0 * (0.7 * t).sin(), 3.0 * (1.3 * t + 0.4).cos());
        let y = C::new(3.0 * (1.1 * t + 0.2).cos(), 3.0 * (0.5 * t + 0.3).sin());
        (x, y)
    })
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("cannot write {}: {e}", path.display()))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<(), Error> {
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|()| w.flush()).map_err(|e| io_error(path, e))
}
