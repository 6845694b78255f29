use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::{ModelParams, TransitionRates};

pub const MIN_REPLICATIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "unit", content = "value")]
pub enum Horizon {
    /// Simulated time per replication.
    Time(f64),
    /// Number of transitions per replication.
    Events(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub horizon: Horizon,
    pub replications: usize,
    pub seed: u64,
    /// Levels `n` at which `P(N2 >= n)` is estimated.
    pub tail_points: Vec<usize>,
    /// Nominal coverage of the confidence intervals.
    pub confidence: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: Horizon::Events(1_000_000),
            replications: MIN_REPLICATIONS,
            seed: 0,
            tail_points: vec![1, 5, 10],
            confidence: 0.95,
        }
    }
}

/// Sample mean across replications with a Student-t half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn covers(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub horizon: Horizon,
    pub replications: usize,
    pub seed: u64,
    pub confidence: f64,
    pub p00: Estimate,
    pub mean_n1: Estimate,
    pub mean_n2: Estimate,
    /// `(n, P(N2 >= n))`.
    pub tail_n2: Vec<(usize, Estimate)>,
}

impl SimResult {
    /// Rows `quantity,mean,half_width`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "quantity,mean,half_width")?;
        writeln!(out, "p00,{:e},{:e}", self.p00.mean, self.p00.half_width)?;
        writeln!(out, "mean_n1,{:e},{:e}", self.mean_n1.mean, self.mean_n1.half_width)?;
        writeln!(out, "mean_n2,{:e},{:e}", self.mean_n2.mean, self.mean_n2.half_width)?;
        for (n, e) in &self.tail_n2 {
            writeln!(out, "tail_n2_ge_{n},{:e},{:e}", e.mean, e.half_width)?;
        }
        Ok(())
    }
}

pub fn simulate(params: &ModelParams, cfg: &SimConfig) -> Result<SimResult> {
    params.require_stable()?;
    simulate_rates(&params.transition_rates()?, cfg)
}

/// Independent replications started empty, each on its own stream of a
/// seeded ChaCha8 generator; results are merged in replication order.
pub fn simulate_rates(rates: &TransitionRates, cfg: &SimConfig) -> Result<SimResult> {
    if cfg.replications < MIN_REPLICATIONS {
        return Err(Error::InvalidParameter {
            name: "replications",
            value: cfg.replications as f64,
            reason: "at least 30 replications are required",
        });
    }
    let valid = match cfg.horizon {
        Horizon::Time(t) => t.is_finite() && t > 0.0,
        Horizon::Events(e) => e > 0,
    };
    if !valid {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: match cfg.horizon {
                Horizon::Time(t) => t,
                Horizon::Events(e) => e as f64,
            },
            reason: "must be positive",
        });
    }
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return Err(Error::InvalidParameter {
            name: "confidence",
            value: cfg.confidence,
            reason: "must lie in (0, 1)",
        });
    }
    let runs: Vec<Replication> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run(rates, cfg, rep as u64))
        .collect();
    let t = StudentsT::new(0.0, 1.0, (cfg.replications - 1) as f64)
        .expect("degrees of freedom are positive");
    let quantile = t.inverse_cdf(0.5 + 0.5 * cfg.confidence);
    let estimate = |f: &dyn Fn(&Replication) -> f64| {
        let m = runs.len() as f64;
        let mean = runs.iter().map(f).sum::<f64>() / m;
        let var = runs.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / (m - 1.0);
        Estimate {
            mean,
            half_width: quantile * (var / m).sqrt(),
        }
    };
    Ok(SimResult {
        horizon: cfg.horizon,
        replications: cfg.replications,
        seed: cfg.seed,
        confidence: cfg.confidence,
        p00: estimate(&|r| r.p00),
        mean_n1: estimate(&|r| r.mean_n1),
        mean_n2: estimate(&|r| r.mean_n2),
        tail_n2: cfg
            .tail_points
            .iter()
            .enumerate()
            .map(|(k, &n)| (n, estimate(&|r| r.tail_n2[k])))
            .collect(),
    })
}

/// Time averages of one replication.
struct Replication {
    p00: f64,
    mean_n1: f64,
    mean_n2: f64,
    tail_n2: Vec<f64>,
}

fn run(rates: &TransitionRates, cfg: &SimConfig, rep: u64) -> Replication {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep);
    let l1 = rates.rate(1, 1, (1, 0));
    let l2 = rates.rate(1, 1, (0, 1));
    let (mut n1, mut n2) = (0usize, 0usize);
    let (mut clock, mut events) = (0.0f64, 0u64);
    let mut empty = 0.0;
    let (mut area1, mut area2) = (0.0, 0.0);
    let mut tail = vec![0.0; cfg.tail_points.len()];
    loop {
        let s1 = rates.rate(n1, n2, (-1, 0));
        let s2 = rates.rate(n1, n2, (0, -1));
        let total = l1 + l2 + s1 + s2;
        let remaining = match cfg.horizon {
            Horizon::Time(t) => t - clock,
            Horizon::Events(e) if events >= e => 0.0,
            Horizon::Events(_) => f64::INFINITY,
        };
        if remaining <= 0.0 {
            break;
        }
        let mut dt = if total > 0.0 {
            rng.sample::<f64, _>(Exp1) / total
        } else {
            f64::INFINITY
        };
        let fires = dt <= remaining;
        if !fires {
            dt = remaining;
        }
        if !dt.is_finite() {
            // absorbing state under an event horizon: it is occupied forever
            clock = 1.0;
            (empty, area1, area2) = if n1 + n2 == 0 { (1.0, 0.0, 0.0) } else { (0.0, n1 as f64, n2 as f64) };
            for (slot, &n) in tail.iter_mut().zip(&cfg.tail_points) {
                *slot = f64::from(u8::from(n2 >= n));
            }
            break;
        }
        clock += dt;
        if n1 + n2 == 0 {
            empty += dt;
        }
        area1 += dt * n1 as f64;
        area2 += dt * n2 as f64;
        for (slot, &n) in tail.iter_mut().zip(&cfg.tail_points) {
            if n2 >= n {
                *slot += dt;
            }
        }
        if !fires {
            break;
        }
        events += 1;
        let u = rng.random::<f64>() * total;
        if u < l1 {
            n1 += 1;
        } else if u < l1 + l2 {
            n2 += 1;
        } else if u < l1 + l2 + s1 {
            n1 -= 1;
        } else {
            n2 -= 1;
        }
    }
    Replication {
        p00: empty / clock,
        mean_n1: area1 / clock,
        mean_n2: area2 / clock,
        tail_n2: tail.into_iter().map(|v| v / clock).collect(),
    }
}
