//! Named parameter sets reproducing the coupler figures, sweeps over κ or the
//! power ratio, and their CSV and summary output.

pub mod config;
pub mod csv;
mod runner;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{InputPhases, SystemParams};

pub use runner::{
    analyze_point, run_scenario, sweep, PeakRow, PointFailure, PointResult, PointSummary, Row,
    RunReport,
};

pub const DEFAULT_COUPLING: f64 = 0.08;
pub const DEFAULT_NONLINEARITY: f64 = 0.0025;
pub const DEFAULT_STEPS_PER_UNIT: usize = 4096;
pub const OUTPUT_ROWS_PER_UNIT: usize = 256;

/// Physical length covered by each fig4b point.
pub const FIG4B_LENGTH_MM: f64 = 50.0;

pub const FIG4A_RATIOS: [f64; 5] = [1.0 / 10.0, 1.0 / 9.0, 1.0 / 4.0, 2.0 / 3.0, 1.0];
pub const FIG4B_KAPPAS: [f64; 5] = [1.01, 1.13, 1.6, 2.26, 3.2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Fig2,
    Fig3,
    Fig4a,
    Fig4b,
    Fig5,
    Custom,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::Fig2,
        ScenarioName::Fig3,
        ScenarioName::Fig4a,
        ScenarioName::Fig4b,
        ScenarioName::Fig5,
        ScenarioName::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioName::Fig2 => "fig2",
            ScenarioName::Fig3 => "fig3",
            ScenarioName::Fig4a => "fig4a",
            ScenarioName::Fig4b => "fig4b",
            ScenarioName::Fig5 => "fig5",
            ScenarioName::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scenario `{s}` (expected fig2, fig3, fig4a, fig4b, fig5 or custom)"
                ))
            })
    }
}

/// Optional parameter overrides; unset fields fall through to the next layer.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub kappa: Option<f64>,
    pub ratio: Option<f64>,
    pub coupling: Option<f64>,
    pub nonlinearity: Option<f64>,
    pub zeta_max: Option<f64>,
    pub steps_per_unit: Option<usize>,
    pub phases: Option<InputPhases>,
}

impl Overrides {
    /// Fields of `self` take precedence over those of `lower`.
    pub fn or(self, lower: Overrides) -> Overrides {
        Overrides {
            kappa: self.kappa.or(lower.kappa),
            ratio: self.ratio.or(lower.ratio),
            coupling: self.coupling.or(lower.coupling),
            nonlinearity: self.nonlinearity.or(lower.nonlinearity),
            zeta_max: self.zeta_max.or(lower.zeta_max),
            steps_per_unit: self.steps_per_unit.or(lower.steps_per_unit),
            phases: self.phases.or(lower.phases),
        }
    }
}

/// Which parameter a scenario sweeps.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxis {
    Ratio(Vec<f64>),
    Kappa(Vec<f64>),
}

impl SweepAxis {
    pub fn key(&self) -> &'static str {
        match self {
            SweepAxis::Ratio(_) => "ratio",
            SweepAxis::Kappa(_) => "kappa",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Ratio(v) | SweepAxis::Kappa(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub overrides: Overrides,
    /// Directory receiving the CSV and summary files.
    pub out_dir: PathBuf,
}

/// One fully resolved parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSpec {
    /// File-name stem, e.g. `fig3` or `fig4a_ratio-0.25`.
    pub label: String,
    /// Value of the swept parameter, if any.
    pub axis_value: Option<f64>,
    pub params: SystemParams,
    pub zeta_max: f64,
    pub steps_per_unit: usize,
}

impl PointSpec {
    pub fn steps(&self) -> usize {
        ((self.zeta_max * self.steps_per_unit as f64).round() as usize).max(1)
    }

    /// Integration steps between CSV rows.
    pub fn stride(&self) -> usize {
        (self.steps_per_unit / OUTPUT_ROWS_PER_UNIT).max(1)
    }
}

impl Scenario {
    pub fn new(name: ScenarioName) -> Self {
        Scenario {
            name,
            overrides: Overrides::default(),
            out_dir: PathBuf::from("."),
        }
    }

    pub fn with_overrides(mut self, overrides: Overrides) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn with_out_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.out_dir = dir.into();
        self
    }

    /// Pinned parameters before overrides.
    pub fn defaults(name: ScenarioName) -> Overrides {
        let base = Overrides {
            coupling: Some(DEFAULT_COUPLING),
            nonlinearity: Some(DEFAULT_NONLINEARITY),
            steps_per_unit: Some(DEFAULT_STEPS_PER_UNIT),
            phases: Some(InputPhases::default()),
            ..Overrides::default()
        };
        let (kappa, ratio, zeta_max) = match name {
            ScenarioName::Fig2 => (Some(1.13), Some(1e-20), Some(6.0)),
            ScenarioName::Fig3 => (Some(1.13), Some(1.0), Some(6.0)),
            ScenarioName::Fig4a => (Some(1.13), None, Some(6.0)),
            ScenarioName::Fig4b => (None, Some(0.25), None),
            ScenarioName::Fig5 => (Some(2.26), Some(1.0), Some(4.0)),
            ScenarioName::Custom => (None, Some(1.0), Some(6.0)),
        };
        Overrides {
            kappa,
            ratio,
            zeta_max,
            ..base
        }
    }

    /// The sweep axis, unless an override pins the swept parameter.
    pub fn axis(&self) -> Option<SweepAxis> {
        match self.name {
            ScenarioName::Fig4a if self.overrides.ratio.is_none() => {
                Some(SweepAxis::Ratio(FIG4A_RATIOS.to_vec()))
            }
            ScenarioName::Fig4b if self.overrides.kappa.is_none() => {
                Some(SweepAxis::Kappa(FIG4B_KAPPAS.to_vec()))
            }
            _ => None,
        }
    }

    /// Effective parameters, flags over config over defaults.
    pub fn effective(&self) -> Overrides {
        self.overrides.or(Scenario::defaults(self.name))
    }

    pub fn points(&self) -> Result<Vec<PointSpec>> {
        match self.axis() {
            Some(axis) => self.points_along(&axis),
            None => Ok(vec![self.point(self.effective(), None)?]),
        }
    }

    pub fn points_along(&self, axis: &SweepAxis) -> Result<Vec<PointSpec>> {
        if axis.values().is_empty() {
            return Err(Error::Config("sweep axis is empty".into()));
        }
        let eff = self.effective();
        axis.values()
            .iter()
            .map(|&x| {
                let o = match axis {
                    SweepAxis::Ratio(_) => Overrides {
                        ratio: Some(x),
                        ..eff
                    },
                    SweepAxis::Kappa(_) => Overrides {
                        kappa: Some(x),
                        ..eff
                    },
                };
                self.point(o, Some((axis.key(), x)))
            })
            .collect()
    }

    fn point(&self, o: Overrides, axis: Option<(&str, f64)>) -> Result<PointSpec> {
        let kappa = o
            .kappa
            .ok_or_else(|| Error::Config(format!("scenario {} requires kappa", self.name)))?;
        let coupling = o.coupling.unwrap_or(DEFAULT_COUPLING);
        let params = SystemParams::new(
            coupling,
            o.nonlinearity.unwrap_or(DEFAULT_NONLINEARITY),
            kappa,
            o.ratio.unwrap_or(1.0),
            o.phases.unwrap_or_default(),
        )?;
        let zeta_max = match o.zeta_max {
            Some(z) => z,
            None => params.zeta_of_z(FIG4B_LENGTH_MM),
        };
        if !(zeta_max.is_finite() && zeta_max > 0.0) {
            return Err(Error::Config(format!(
                "zeta_max must be positive, got {zeta_max}"
            )));
        }
        let steps_per_unit = o.steps_per_unit.unwrap_or(DEFAULT_STEPS_PER_UNIT);
        if steps_per_unit == 0 {
            return Err(Error::Config("steps_per_unit must be at least 1".into()));
        }
        let label = match axis {
            Some((key, x)) => format!("{}_{key}-{}", self.name, fmt_label(x)),
            None => self.name.to_string(),
        };
        Ok(PointSpec {
            label,
            axis_value: axis.map(|(_, x)| x),
            params,
            zeta_max,
            steps_per_unit,
        })
    }
}

fn fmt_label(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}
