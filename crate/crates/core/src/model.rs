//! System parameters, derived rates, stability and the quarter-plane transition structure.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Distance to the stability boundary below which a parameter set is refused.
pub const STABILITY_MARGIN: f64 = 1e-12;

/// Inputs of the two-class GPS queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub r: f64,
    pub phi1: f64,
    pub phi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedRates {
    pub mu1: f64,
    pub mu2: f64,
    pub rho1: f64,
    pub rho2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub lhs1: f64,
    pub lhs2: f64,
    /// Either left-hand side lies within [`STABILITY_MARGIN`] of 1.
    pub near_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Queue {
    One,
    Two,
}

/// Displacement of one transition in the quarter plane.
pub type Step = (i8, i8);

/// Transition rates of the random walk, split by region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionRates {
    pub interior: BTreeMap<Step, f64>,
    /// States with n2 = 0 and n1 > 0.
    pub h_boundary: BTreeMap<Step, f64>,
    /// States with n1 = 0 and n2 > 0.
    pub v_boundary: BTreeMap<Step, f64>,
    pub origin: BTreeMap<Step, f64>,
}

impl ModelParams {
    pub fn new(
        lambda1: f64,
        lambda2: f64,
        nu1: f64,
        nu2: f64,
        r: f64,
        phi1: f64,
        phi2: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            lambda1,
            lambda2,
            nu1,
            nu2,
            r,
            phi1,
            phi2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("r", self.r),
        ];
        for (name, value) in positive {
            if !value.is_finite() {
                return Err(Error::InvalidParameter { name, value, reason: "must be finite" });
            }
            if value <= 0.0 {
                return Err(Error::InvalidParameter { name, value, reason: "must be > 0" });
            }
        }
        for (name, value) in [("phi1", self.phi1), ("phi2", self.phi2)] {
            if !(value.is_finite() && value > 0.0 && value < 1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must lie in (0, 1)",
                });
            }
        }
        if self.phi1 + self.phi2 <= 1.0 {
            return Err(Error::ParameterDomain(format!(
                "phi1 + phi2 = {} must exceed 1",
                self.phi1 + self.phi2
            )));
        }
        Ok(())
    }

    /// Exchange the roles of queue 1 and queue 2.
    pub fn swapped(&self) -> Self {
        ModelParams {
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            nu1: self.nu2,
            nu2: self.nu1,
            r: self.r,
            phi1: self.phi2,
            phi2: self.phi1,
        }
    }

    /// Change the time unit: arrival rates and capacity are multiplied by `factor`.
    pub fn time_scaled(&self, factor: f64) -> Self {
        ModelParams {
            lambda1: self.lambda1 * factor,
            lambda2: self.lambda2 * factor,
            r: self.r * factor,
            ..*self
        }
    }

    pub fn derive_rates(&self) -> Result<DerivedRates> {
        self.validate()?;
        Ok(self.rates_unchecked())
    }

    pub(crate) fn rates_unchecked(&self) -> DerivedRates {
        let total = self.phi1 + self.phi2;
        let mu1 = self.nu1 * self.r / total;
        let mu2 = self.nu2 * self.r / total;
        DerivedRates {
            mu1,
            mu2,
            rho1: self.lambda1 / mu1,
            rho2: self.lambda2 / mu2,
        }
    }

    pub fn stability(&self) -> Result<StabilityVerdict> {
        let d = self.derive_rates()?;
        let lhs1 = d.rho1 + (1.0 - self.phi1) / self.phi2 * d.rho2;
        let lhs2 = (1.0 - self.phi2) / self.phi1 * d.rho1 + d.rho2;
        let near_boundary =
            (1.0 - lhs1).abs() <= STABILITY_MARGIN || (1.0 - lhs2).abs() <= STABILITY_MARGIN;
        let stable = lhs1 < 1.0 - STABILITY_MARGIN && lhs2 < 1.0 - STABILITY_MARGIN;
        Ok(StabilityVerdict {
            stable,
            lhs1,
            lhs2,
            near_boundary,
        })
    }

    /// Validate and require strict stability.
    pub fn require_stable(&self) -> Result<DerivedRates> {
        let v = self.stability()?;
        if !v.stable {
            return Err(Error::Unstable {
                lhs1: v.lhs1,
                lhs2: v.lhs2,
            });
        }
        Ok(self.rates_unchecked())
    }

    pub fn transition_rates(&self) -> Result<TransitionRates> {
        let d = self.derive_rates()?;
        Ok(TransitionRates::from_rates(
            self.lambda1,
            self.lambda2,
            self.phi1 * d.mu1,
            self.phi2 * d.mu2,
            d.mu1,
            d.mu2,
        ))
    }
}

impl TransitionRates {
    fn from_rates(l1: f64, l2: f64, s1_shared: f64, s2_shared: f64, s1_alone: f64, s2_alone: f64) -> Self {
        let interior =
            BTreeMap::from([((1, 0), l1), ((0, 1), l2), ((-1, 0), s1_shared), ((0, -1), s2_shared)]);
        let h_boundary = BTreeMap::from([((1, 0), l1), ((0, 1), l2), ((-1, 0), s1_alone)]);
        let v_boundary = BTreeMap::from([((1, 0), l1), ((0, 1), l2), ((0, -1), s2_alone)]);
        let origin = BTreeMap::from([((1, 0), l1), ((0, 1), l2)]);
        TransitionRates {
            interior,
            h_boundary,
            v_boundary,
            origin,
        }
    }

    /// Same service structure with different arrival rates; zero is allowed,
    /// which is useful for degenerate checks outside the analytic domain.
    pub fn with_arrival_rates(&self, lambda1: f64, lambda2: f64) -> Self {
        let mut out = self.clone();
        for map in [
            &mut out.interior,
            &mut out.h_boundary,
            &mut out.v_boundary,
            &mut out.origin,
        ] {
            map.insert((1, 0), lambda1);
            map.insert((0, 1), lambda2);
        }
        out
    }

    /// Rates out of state `(n1, n2)`.
    pub fn at(&self, n1: usize, n2: usize) -> &BTreeMap<Step, f64> {
        match (n1 == 0, n2 == 0) {
            (true, true) => &self.origin,
            (false, true) => &self.h_boundary,
            (true, false) => &self.v_boundary,
            (false, false) => &self.interior,
        }
    }

    pub fn rate(&self, n1: usize, n2: usize, step: Step) -> f64 {
        self.at(n1, n2).get(&step).copied().unwrap_or(0.0)
    }
}

/// Partially specified parameters, as read from a config file or flags.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    pub r: Option<f64>,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
}

pub const PARAM_KEYS: [&str; 7] = ["lambda1", "lambda2", "nu1", "nu2", "r", "phi1", "phi2"];

impl ParamOverrides {
    /// Parse a flat `key = value` file. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ParamOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!("line {}: cannot parse value for {key}", lineno + 1))
            })?;
            let slot = out
                .slot_mut(key)
                .ok_or_else(|| Error::Config(format!("line {}: unknown key {key}", lineno + 1)))?;
            *slot = Some(value);
        }
        Ok(out)
    }

    fn slot_mut(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "lambda1" => &mut self.lambda1,
            "lambda2" => &mut self.lambda2,
            "nu1" => &mut self.nu1,
            "nu2" => &mut self.nu2,
            "r" => &mut self.r,
            "phi1" => &mut self.phi1,
            "phi2" => &mut self.phi2,
            _ => return None,
        })
    }

    /// Values set in `other` win.
    pub fn merged_with(self, other: ParamOverrides) -> Self {
        ParamOverrides {
            lambda1: other.lambda1.or(self.lambda1),
            lambda2: other.lambda2.or(self.lambda2),
            nu1: other.nu1.or(self.nu1),
            nu2: other.nu2.or(self.nu2),
            r: other.r.or(self.r),
            phi1: other.phi1.or(self.phi1),
            phi2: other.phi2.or(self.phi2),
        }
    }

    pub fn build(self) -> Result<ModelParams> {
        let get = |name: &'static str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("missing parameter {name}")))
        };
        ModelParams::new(
            get("lambda1", self.lambda1)?,
            get("lambda2", self.lambda2)?,
            get("nu1", self.nu1)?,
            get("nu2", self.nu2)?,
            get("r", self.r)?,
            get("phi1", self.phi1)?,
            get("phi2", self.phi2)?,
        )
    }
}
