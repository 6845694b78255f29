use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Queue, TransitionRates};

/// Entries below this are treated as zero when testing convergence.
const NEGLIGIBLE: f64 = 1e-280;
/// Entries below this are flushed to zero to keep the sweeps out of subnormals.
const FLUSH: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Largest relative change of a non-negligible entry over one sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-13,
            max_sweeps: 200_000,
        }
    }
}

/// Stationary distribution of the chain restricted to `{0..n-1}^2`, with
/// transitions leaving the box removed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryGrid {
    pub n: usize,
    /// Row-major in `n1`: `p[n1 * n + n2]`.
    pub p: Vec<f64>,
    /// Mass on states with `n1 = n - 1` or `n2 = n - 1`.
    pub boundary_mass: f64,
    /// Largest absolute violation of the global balance equations.
    pub balance_residual: f64,
    pub sweeps: usize,
}

#[derive(Clone, Copy)]
struct Rates {
    l1: f64,
    l2: f64,
    s1_shared: f64,
    s1_alone: f64,
    s2_shared: f64,
    s2_alone: f64,
    n: usize,
}

impl Rates {
    fn new(t: &TransitionRates, n: usize) -> Self {
        Rates {
            l1: t.rate(1, 1, (1, 0)),
            l2: t.rate(1, 1, (0, 1)),
            s1_shared: t.rate(1, 1, (-1, 0)),
            s1_alone: t.rate(1, 0, (-1, 0)),
            s2_shared: t.rate(1, 1, (0, -1)),
            s2_alone: t.rate(0, 1, (0, -1)),
            n,
        }
    }

    fn up1(&self, i: usize) -> f64 {
        if i + 1 < self.n {
            self.l1
        } else {
            0.0
        }
    }

    fn up2(&self, j: usize) -> f64 {
        if j + 1 < self.n {
            self.l2
        } else {
            0.0
        }
    }

    fn down1(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, _) => 0.0,
            (_, 0) => self.s1_alone,
            _ => self.s1_shared,
        }
    }

    fn down2(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (_, 0) => 0.0,
            (0, _) => self.s2_alone,
            _ => self.s2_shared,
        }
    }

    fn out(&self, i: usize, j: usize) -> f64 {
        self.up1(i) + self.up2(j) + self.down1(i, j) + self.down2(i, j)
    }

    fn inflow(&self, p: &[f64], i: usize, j: usize) -> f64 {
        let n = self.n;
        let mut v = 0.0;
        if i > 0 {
            v += p[(i - 1) * n + j] * self.up1(i - 1);
        }
        if j > 0 {
            v += p[i * n + j - 1] * self.up2(j - 1);
        }
        if i + 1 < n {
            v += p[(i + 1) * n + j] * self.down1(i + 1, j);
        }
        if j + 1 < n {
            v += p[i * n + j + 1] * self.down2(i, j + 1);
        }
        v
    }
}

pub fn solve_stationary(params: &ModelParams, n: usize) -> Result<StationaryGrid> {
    params.require_stable()?;
    solve_stationary_rates(&params.transition_rates()?, n, &SolverConfig::default())
}

/// Block Gauss–Seidel on the balance equations: every sweep solves each
/// line `n1 = const` and then each line `n2 = const` exactly.
pub fn solve_stationary_rates(
    rates: &TransitionRates,
    n: usize,
    cfg: &SolverConfig,
) -> Result<StationaryGrid> {
    if n < 20 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: n as f64,
            reason: "truncation must be at least 20",
        });
    }
    let q = Rates::new(rates, n);
    if q.l1 <= 0.0 && q.l2 <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: 0.0,
            reason: "at least one arrival rate must be positive",
        });
    }
    let mut p = vec![1.0 / (n * n) as f64; n * n];
    let lines = Lines::new(&q);
    let mut scratch = vec![0.0; n];
    let mut sweeps = 0;
    let mut change = f64::INFINITY;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let before = p.clone();
        for order in [Order::Forward, Order::Backward] {
            for axis in [Axis::Second, Axis::First] {
                for k in order.indices(n) {
                    lines.solve(&mut p, &mut scratch, axis, k);
                }
            }
        }
        let total: f64 = p.iter().sum();
        change = 0.0;
        for (v, old) in p.iter_mut().zip(&before) {
            *v /= total;
            if *v < FLUSH {
                *v = 0.0;
            } else if *v > NEGLIGIBLE {
                change = change.max((*v - old).abs() / *v);
            }
        }
        if change < cfg.tolerance {
            break;
        }
    }
    if change >= cfg.tolerance {
        return Err(Error::NonConvergence {
            what: "block Gauss-Seidel on the truncated chain",
            iterations: sweeps,
            residual: change,
        });
    }
    let balance_residual = (0..n * n)
        .map(|s| {
            let (i, j) = (s / n, s % n);
            (q.inflow(&p, i, j) - q.out(i, j) * p[s]).abs()
        })
        .fold(0.0, f64::max);
    let boundary_mass = (0..n).map(|k| p[(n - 1) * n + k] + p[k * n + n - 1]).sum::<f64>()
        - p[n * n - 1];
    Ok(StationaryGrid {
        n,
        p,
        boundary_mass,
        balance_residual,
        sweeps,
    })
}

#[derive(Clone, Copy)]
enum Order {
    Forward,
    Backward,
}

impl Order {
    fn indices(self, n: usize) -> Box<dyn Iterator<Item = usize>> {
        match self {
            Order::Forward => Box::new(0..n),
            Order::Backward => Box::new((0..n).rev()),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Axis {
    /// Lines `n2 = const`, varying `n1`.
    First,
    /// Lines `n1 = const`, varying `n2`.
    Second,
}

/// One tridiagonal line system with its elimination precomputed.
struct LineFactor {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    mult: Vec<f64>,
    inv_pivot: Vec<f64>,
    /// Rates into the line from the neighbouring lines.
    from_prev: Vec<f64>,
    from_next: Vec<f64>,
    /// No flow leaves the line, so its block is singular.
    closed: bool,
}

impl LineFactor {
    fn new(q: &Rates, axis: Axis, line: usize) -> Self {
        let n = q.n;
        let mut f = LineFactor {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            mult: vec![0.0; n],
            inv_pivot: vec![0.0; n],
            from_prev: vec![0.0; n],
            from_next: vec![0.0; n],
            closed: match axis {
                Axis::First => line == 0 && q.l2 == 0.0,
                Axis::Second => line == 0 && q.l1 == 0.0,
            },
        };
        for k in 0..n {
            let (i, j) = match axis {
                Axis::First => (k, line),
                Axis::Second => (line, k),
            };
            f.diag[k] = q.out(i, j);
            match axis {
                Axis::First => {
                    f.sub[k] = if k > 0 { -q.up1(k - 1) } else { 0.0 };
                    f.sup[k] = if k + 1 < n { -q.down1(k + 1, j) } else { 0.0 };
                    f.from_prev[k] = if j > 0 { q.up2(j - 1) } else { 0.0 };
                    f.from_next[k] = if j + 1 < n { q.down2(i, j + 1) } else { 0.0 };
                }
                Axis::Second => {
                    f.sub[k] = if k > 0 { -q.up2(k - 1) } else { 0.0 };
                    f.sup[k] = if k + 1 < n { -q.down2(i, k + 1) } else { 0.0 };
                    f.from_prev[k] = if i > 0 { q.up1(i - 1) } else { 0.0 };
                    f.from_next[k] = if i + 1 < n { q.down1(i + 1, j) } else { 0.0 };
                }
            }
        }
        let mut pivot = f.diag[0];
        f.inv_pivot[0] = 1.0 / pivot;
        for k in 1..n {
            f.mult[k] = f.sub[k] / pivot;
            pivot = f.diag[k] - f.mult[k] * f.sup[k - 1];
            f.inv_pivot[k] = 1.0 / pivot;
        }
        f
    }
}

/// Line systems are identical for all lines strictly between the first and the last.
struct Lines {
    n: usize,
    first: [LineFactor; 3],
    second: [LineFactor; 3],
}

impl Lines {
    fn new(q: &Rates) -> Self {
        let n = q.n;
        let build = |axis| [0, 1, n - 1].map(|line| LineFactor::new(q, axis, line));
        Lines {
            n,
            first: build(Axis::First),
            second: build(Axis::Second),
        }
    }

    fn solve(&self, p: &mut [f64], x: &mut [f64], axis: Axis, line: usize) {
        let n = self.n;
        let class = if line == 0 {
            0
        } else if line + 1 == n {
            2
        } else {
            1
        };
        let (f, stride, base, step) = match axis {
            Axis::First => (&self.first[class], n, line, 1),
            Axis::Second => (&self.second[class], 1, line * n, n),
        };
        for k in 0..n {
            let mut r = 0.0;
            if line > 0 {
                r += f.from_prev[k] * p[base - step + k * stride];
            }
            if line + 1 < n {
                r += f.from_next[k] * p[base + step + k * stride];
            }
            x[k] = r;
        }
        if f.closed {
            for k in 0..n {
                let mut v = x[k];
                if k > 0 {
                    v -= f.sub[k] * p[base + (k - 1) * stride];
                }
                if k + 1 < n {
                    v -= f.sup[k] * p[base + (k + 1) * stride];
                }
                p[base + k * stride] = v / f.diag[k];
            }
            return;
        }
        for k in 1..n {
            x[k] -= f.mult[k] * x[k - 1];
        }
        let mut next = x[n - 1] * f.inv_pivot[n - 1];
        p[base + (n - 1) * stride] = next;
        for k in (0..n - 1).rev() {
            next = (x[k] - f.sup[k] * next) * f.inv_pivot[k];
            p[base + k * stride] = next;
        }
    }
}

impl StationaryGrid {
    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        self.p[n1 * self.n + n2]
    }

    pub fn marginal_pmf(&self, queue: Queue) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| match queue {
                Queue::One => self.p[k * n..(k + 1) * n].iter().sum(),
                Queue::Two => (0..n).map(|i| self.p[i * n + k]).sum(),
            })
            .collect()
    }

    /// `sum_n P(N = n) z^n`.
    pub fn marginal_gf(&self, queue: Queue, z: f64) -> f64 {
        self.marginal_pmf(queue).iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn mean(&self, queue: Queue) -> f64 {
        self.marginal_pmf(queue).iter().enumerate().map(|(k, &c)| k as f64 * c).sum()
    }

    /// `P(N >= n)`.
    pub fn tail(&self, queue: Queue, n: usize) -> f64 {
        self.marginal_pmf(queue).iter().skip(n).sum()
    }

    /// Least-squares slope of `log P(N = n)` over `from..=to`.
    pub fn tail_slope(&self, queue: Queue, from: usize, to: usize) -> Result<f64> {
        let unreliable = |reason: String| Error::WindowUnreliable { from, to, reason };
        if from >= to || to + 1 >= self.n {
            return Err(unreliable(format!("window must lie inside 0..{}", self.n - 1)));
        }
        let pmf = self.marginal_pmf(queue);
        let window = &pmf[from..=to];
        let smallest = window.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest.is_nan() || smallest <= 0.0 {
            return Err(unreliable("zero probability in window".into()));
        }
        if self.boundary_mass > 1e-6 * smallest {
            return Err(unreliable(format!(
                "boundary mass {:e} is not negligible against {:e}",
                self.boundary_mass, smallest
            )));
        }
        let m = window.len() as f64;
        let xs = (from..=to).map(|k| k as f64);
        let mx = xs.clone().sum::<f64>() / m;
        let my = window.iter().map(|c| c.ln()).sum::<f64>() / m;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (x, c) in xs.zip(window) {
            sxy += (x - mx) * (c.ln() - my);
            sxx += (x - mx) * (x - mx);
        }
        Ok(sxy / sxx)
    }

    /// Rows `n1,n2,probability`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n1,n2,probability")?;
        for i in 0..self.n {
            for j in 0..self.n {
                writeln!(out, "{i},{j},{:e}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}
