//! The ten acceptance criteria, each printed as one PASS/FAIL line.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use gpsrh_core::asymptotics::{removable_singularity_check, tail_estimate, TailCase};
use gpsrh_core::oracle::{simulate, Horizon, SimConfig};
use gpsrh_core::{solve_stationary, Complex64 as C, Kernel, KernelPoly, ModelParams, Queue, Resultants, RhSolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kernel_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_lin, mut worst_one, mut worst_root) = (0.0f64, 0.0f64, 0.0f64);
    for p in random_stable_sets(1, 10, (0.2, 0.85)) {
        let k = Kernel::new(&p).unwrap();
        let one = C::new(1.0, 0.0);
        for w in [KernelPoly::H1, KernelPoly::H2, KernelPoly::H3, KernelPoly::H4] {
            worst_one = worst_one.max(k.eval(w, one, one).norm());
        }
        for _ in 0..100 {
            let x = C::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let y = C::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let lin = (1.0 - k.phi2) * k.h2(x, y)
                + (1.0 - k.phi1) * k.h3(x, y)
                + (1.0 - k.phi1 - k.phi2) * k.h4(x, y);
            worst_lin = worst_lin.max(lin.norm());
            let xs = k.x_star(y).map_err(|e| e.to_string())?;
            worst_root = worst_root.max(k.h1(xs, y).norm());
        }
    }
    check(
        worst_lin < 1e-12 && worst_one < 1e-14 && worst_root < 1e-10,
        format!("linear identity {worst_lin:.1e}, h(1,1) {worst_one:.1e}, |h1(X*(y),y)| {worst_root:.1e} over 1000 points"),
    )
}

fn conformal_mapping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for p in random_stable_sets(2, 20, (0.2, 0.85)) {
        let k = Kernel::new(&p).unwrap();
        let [y1, y2, _, _] = k.branch_points().y;
        for y in disk_points(&mut rng, k.y_circle_radius(), 100, y1, y2) {
            worst = worst.max(k.conformal_roundtrip(y).map_err(|e| e.to_string())?);
        }
    }
    check(worst < 1e-9, format!("max |Y*(X*(y)) - y| = {worst:.1e} over 2000 points"))
}

fn index_zero() -> Outcome {
    let mut worst_re = f64::NEG_INFINITY;
    let mut bad = 0;
    for p in random_stable_sets(3, 100, (0.2, 0.85)) {
        let s = RhSolution::new(&p).map_err(|e| e.to_string())?;
        let rep = s.y_side().index_report(512).map_err(|e| e.to_string())?;
        worst_re = worst_re.max(rep.max_re_contour);
        if rep.winding != 0 || rep.max_re_contour >= 0.0 {
            bad += 1;
        }
    }
    check(bad == 0, format!("{bad} of 100 sets violate; largest Re on contour {worst_re:.3e}"))
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn resultant_factorisations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = [0.0f64; 5];
    for p in random_stable_sets(4, 5, (0.2, 0.85)) {
        let k = Kernel::new(&p).unwrap();
        let r = Resultants::new(&k);
        for _ in 0..20 {
            let t = C::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let base = t * (t - 1.0);
            let checks = [
                (sylvester_2_1(h1_in_x(&k, t), h2_in_x(&k, t)), k.mu1 * base * r.p_x.eval_complex(t)),
                (sylvester_2_1(h1_in_x(&k, t), h3_in_x(&k, t)), -k.phi1 * k.mu1 * base * r.q_x.eval_complex(t)),
                (sylvester_2_1(h1_in_y(&k, t), h2_in_y(&k, t)), -k.phi2 * k.mu2 * base * r.p_y.eval_complex(t)),
                (sylvester_2_1(h1_in_y(&k, t), h3_in_y(&k, t)), k.mu2 * base * r.q_y.eval_complex(t)),
            ];
            for (slot, (det, closed)) in worst.iter_mut().zip(checks) {
                *slot = slot.max(rel(det, closed));
            }
            let x = rng.random_range(-3.0..3.0);
            let lhs = C::new(k.mu2 * x * (x - 1.0) * r.r_y.eval(x), 0.0);
            worst[4] = worst[4].max(rel(lhs, C::new(r_y_identity_rhs(&k, x), 0.0)));
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    check(
        max < 1e-9,
        format!("relative gaps P_X {:.1e}, Q_X {:.1e}, P_Y {:.1e}, Q_Y {:.1e}, R_Y {:.1e}", worst[0], worst[1], worst[2], worst[3], worst[4]),
    )
}

fn boundary_condition() -> Outcome {
    let mut worst = 0.0f64;
    let mut sets = vec![params(CANONICAL), params(CASE_D), params(CASE_C)];
    sets.extend(random_stable_sets(5, 7, (0.2, 0.85)));
    for p in sets {
        let s = RhSolution::new(&p).map_err(|e| e.to_string())?;
        let r = s.kernel().y_circle_radius();
        for j in 0..200 {
            let y = C::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.5) / 200.0);
            worst = worst.max(s.y_side().boundary_condition_residual(y).map_err(|e| e.to_string())?.abs());
        }
    }
    check(worst < 1e-7, format!("max residual {worst:.1e} over 2000 circle points"))
}

fn oracle_agreement() -> Outcome {
    let (mut p00_gap, mut boundary_gap, mut marginal_gap, mut mass) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in random_stable_sets(6, 10, (0.2, 0.85)) {
        let s = RhSolution::new(&p).map_err(|e| e.to_string())?;
        let g = solve_stationary(&p, 400).map_err(|e| e.to_string())?;
        mass = mass.max(g.boundary_mass);
        p00_gap = p00_gap.max((s.p00() - g.get(0, 0)).abs());
        let pmf = g.marginal_pmf(Queue::Two);
        let b = s.boundary_coefficients(Queue::Two, 10).map_err(|e| e.to_string())?;
        let m = s.marginal_coefficients(Queue::Two, 10).map_err(|e| e.to_string())?;
        for n in 0..=10 {
            boundary_gap = boundary_gap.max((b[n] - g.get(0, n)).abs());
            marginal_gap = marginal_gap.max((m[n] - pmf[n]).abs());
        }
    }
    check(
        mass < 1e-12 && p00_gap < 1e-3 && boundary_gap < 1e-4 && marginal_gap < 1e-4,
        format!("P00 gap {p00_gap:.1e}, P(0,y) coefficients {boundary_gap:.1e}, P(1,y) coefficients {marginal_gap:.1e}, boundary mass {mass:.1e}"),
    )
}

fn work_conserving_limit() -> Outcome {
    let (phi1, phi2) = (0.5, 0.5 + 1e-6);
    let mu = 1.0 / (phi1 + phi2);
    let p = ModelParams::new(0.2 * mu, 0.3 * mu, 1.0, 1.0, 1.0, phi1, phi2).unwrap();
    let s = RhSolution::new(&p).map_err(|e| e.to_string())?;
    check((s.p00() - 0.5).abs() < 1e-4, format!("P00 = {:.10}", s.p00()))
}

fn tail_asymptotics() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let runs: [(&str, [f64; 7], TailCase, bool); 4] = [
        ("a", CANONICAL, TailCase::A, true),
        ("c", CASE_C, TailCase::C, false),
        ("d", CASE_D, TailCase::D, false),
        ("d separated", CASE_D_SEPARATED, TailCase::D, true),
    ];
    for (label, set, case, ratio_check) in runs {
        let p = params(set);
        let s = RhSolution::new(&p).map_err(|e| e.to_string())?;
        let est = tail_estimate(s.y_side()).map_err(|e| e.to_string())?;
        let g = solve_stationary(&p, 600).map_err(|e| e.to_string())?;
        let slope = g.tail_slope(Queue::Two, 20, 60).map_err(|e| e.to_string())?;
        let slope_err = (slope - est.decay_base.ln()).abs() / est.decay_base.ln().abs();
        ok &= est.case == case && slope_err < 0.02;
        let mut line = format!("{label}: slope error {:.2}%", 100.0 * slope_err);
        if ratio_check {
            let ratio = est.eval(40) / g.marginal_pmf(Queue::Two)[40];
            ok &= (0.9..=1.1).contains(&ratio);
            line += &format!(", ratio at 40 {ratio:.4}");
        }
        lines.push(line);
    }
    let p = case_b_params(CANONICAL);
    let s = RhSolution::new(&p).map_err(|e| e.to_string())?;
    let est = tail_estimate(s.y_side()).map_err(|e| e.to_string())?;
    let finite = est.case == TailCase::B && est.prefactor.is_finite() && est.eval(40).is_finite();
    ok &= finite;
    lines.push(format!("b: prefactor {:.4e}", est.prefactor));
    check(ok, lines.join("; "))
}

fn removable_dichotomy() -> Outcome {
    let (mut removable, mut closed) = (0.0f64, 0.0f64);
    let (mut n_removable, mut n_closed) = (0, 0);
    let mut sets = vec![params(CANONICAL), params(CASE_D), params(CASE_D_SEPARATED)];
    sets.extend(random_stable_sets(9, 20, (0.2, 0.85)));
    for p in sets {
        let s = RhSolution::new(&p).map_err(|e| e.to_string())?;
        let chk = removable_singularity_check(s.y_side()).map_err(|e| e.to_string())?;
        match (chk.combination, chk.closed_form) {
            (Some(v), None) => {
                n_removable += 1;
                removable = removable.max(v.abs());
            }
            (Some(v), Some(c)) => {
                n_closed += 1;
                closed = closed.max((v - c).abs());
            }
            (None, _) => {}
        }
    }
    check(
        n_removable > 0 && n_closed > 0 && removable < 1e-7 && closed < 1e-6,
        format!("removable: max |combination| {removable:.1e} ({n_removable} sets); pole: max gap to closed form {closed:.1e} ({n_closed} sets)"),
    )
}

fn simulation_concordance() -> Outcome {
    let (mut covered, mut total) = (0, 0);
    for (i, p) in random_stable_sets(10, 30, (0.2, 0.85)).into_iter().enumerate() {
        let s = RhSolution::new(&p).map_err(|e| e.to_string())?;
        let cfg = SimConfig {
            horizon: Horizon::Events(1_000_000),
            replications: 30,
            seed: 1000 + i as u64,
            ..Default::default()
        };
        let sim = simulate(&p, &cfg).map_err(|e| e.to_string())?;
        let checks = [
            sim.p00.covers(s.p00()),
            sim.mean_n1.covers(s.mean_queue_length(Queue::One).map_err(|e| e.to_string())?),
            sim.mean_n2.covers(s.mean_queue_length(Queue::Two).map_err(|e| e.to_string())?),
        ];
        covered += checks.iter().filter(|&&c| c).count();
        total += checks.len();
    }
    let share = covered as f64 / total as f64;
    check(share >= 0.93, format!("{covered} of {total} intervals cover ({:.1}%)", 100.0 * share))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "kernel identities", budget: Duration::from_secs(5), run: kernel_identities },
        Criterion { id: 2, name: "conformal mapping", budget: Duration::from_secs(10), run: conformal_mapping },
        Criterion { id: 3, name: "index zero", budget: Duration::from_secs(60), run: index_zero },
        Criterion { id: 4, name: "resultant factorisations", budget: Duration::from_secs(5), run: resultant_factorisations },
        Criterion { id: 5, name: "boundary condition", budget: Duration::from_secs(60), run: boundary_condition },
        Criterion { id: 6, name: "oracle agreement", budget: Duration::from_secs(600), run: oracle_agreement },
        Criterion { id: 7, name: "work-conserving limit", budget: Duration::from_secs(60), run: work_conserving_limit },
        Criterion { id: 8, name: "tail asymptotics", budget: Duration::from_secs(900), run: tail_asymptotics },
        Criterion { id: 9, name: "removable singularity", budget: Duration::from_secs(60), run: removable_dichotomy },
        Criterion { id: 10, name: "simulation concordance", budget: Duration::from_secs(900), run: simulation_concordance },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (elapsed <= c.budget, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} ({}): {} [{:.1} s of {} s]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
