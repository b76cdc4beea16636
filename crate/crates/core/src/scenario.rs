//! Built-in test problems on `[−1, 1]` with the quadratic kernel, `η = 0.2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SolverError};
use crate::models::{
    make_arrhenius_model, make_multilane_model, make_quadratic_kernel, Grid, InitialData, Kernel,
    Piece, SystemModel,
};
use crate::timeint::Problem;

/// Identifier of a built-in scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    ArrheniusSmooth,
    ArrheniusDiscontinuous,
    MultilaneSmooth,
    MultilaneDiscontinuous,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::ArrheniusSmooth,
        ScenarioName::ArrheniusDiscontinuous,
        ScenarioName::MultilaneSmooth,
        ScenarioName::MultilaneDiscontinuous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::ArrheniusSmooth => "arrhenius_smooth",
            ScenarioName::ArrheniusDiscontinuous => "arrhenius_discontinuous",
            ScenarioName::MultilaneSmooth => "multilane_smooth",
            ScenarioName::MultilaneDiscontinuous => "multilane_discontinuous",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioName::ArrheniusSmooth => {
                "g=rho(1-rho), v=exp(-R), rho0=0.5+0.4 sin(pi x), T=0.15"
            }
            ScenarioName::ArrheniusDiscontinuous => {
                "g=rho(1-rho), v=exp(-R), two plateaus (1 and 0.8) on 0.2, T=1, 100 cells"
            }
            ScenarioName::MultilaneSmooth => {
                "two lanes, g=rho, v=1-R^2, lane exchange; sin/cos data, T=0.15"
            }
            ScenarioName::MultilaneDiscontinuous => {
                "two lanes, g=rho, v=1-R^2, lane exchange; indicator data, T=0.25, 200 cells"
            }
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                SolverError::InvalidParameter(format!(
                    "unknown scenario '{s}' (expected one of {})",
                    ScenarioName::ALL.map(|n| n.as_str()).join(", ")
                ))
            })
    }
}

/// A model, kernel, initial data and final time on a periodic interval.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub label: String,
    pub model: SystemModel,
    pub kernel: Kernel,
    pub initial: Vec<InitialData>,
    pub t_final: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// Cell count at refinement level 0.
    pub default_cells: usize,
}

fn indicator(start: f64, end: f64) -> InitialData {
    InitialData::PiecewiseConstant {
        background: 0.0,
        pieces: vec![Piece { start, end, value: 1.0 }],
    }
}

impl Scenario {
    pub fn builtin(name: ScenarioName) -> Result<Self> {
        let kernel = make_quadratic_kernel(0.2)?;
        let (model, initial, t_final, default_cells) = match name {
            ScenarioName::ArrheniusSmooth => (
                SystemModel::scalar(make_arrhenius_model()),
                vec![InitialData::smooth(|x| 0.5 + 0.4 * (PI * x).sin())],
                0.15,
                40,
            ),
            ScenarioName::ArrheniusDiscontinuous => (
                SystemModel::scalar(make_arrhenius_model()),
                vec![InitialData::PiecewiseConstant {
                    background: 0.2,
                    pieces: vec![
                        Piece { start: -0.5, end: 0.0, value: 1.0 },
                        Piece { start: 0.5, end: 0.75, value: 0.8 },
                    ],
                }],
                1.0,
                100,
            ),
            ScenarioName::MultilaneSmooth => (
                make_multilane_model(),
                vec![
                    InitialData::smooth(|x| 0.5 + 0.5 * (PI * x).sin()),
                    InitialData::smooth(|x| 0.25 + 0.25 * (2.0 * PI * x).cos()),
                ],
                0.15,
                40,
            ),
            ScenarioName::MultilaneDiscontinuous => (
                make_multilane_model(),
                vec![indicator(0.0, 0.5), indicator(0.5, 1.0)],
                0.25,
                200,
            ),
        };
        Ok(Self {
            label: name.as_str().to_string(),
            model,
            kernel,
            initial,
            t_final,
            x_min: -1.0,
            x_max: 1.0,
            default_cells,
        })
    }

    pub fn grid(&self, n_cells: usize) -> Result<Grid> {
        Grid::new(self.x_min, self.x_max, n_cells)
    }

    /// Level `n` halves the scenario's base spacing `n` times; the smooth
    /// scenarios start from `Δx = 1/20`.
    pub fn cells_for_level(&self, level: u32) -> usize {
        self.default_cells << level
    }

    pub fn problem(&self, n_cells: usize) -> Result<Problem> {
        Problem::from_data(
            self.grid(n_cells)?,
            self.kernel.clone(),
            self.model.clone(),
            &self.initial,
        )
    }

    pub fn problem_for_level(&self, level: u32) -> Result<Problem> {
        self.problem(self.cells_for_level(level))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for n in ScenarioName::ALL {
            assert_eq!(n.as_str().parse::<ScenarioName>().unwrap(), n);
        }
        assert!("burgers".parse::<ScenarioName>().is_err());
    }

    #[test]
    fn builtin_shapes() {
        let s = Scenario::builtin(ScenarioName::MultilaneDiscontinuous).unwrap();
        assert_eq!(s.model.n_components(), 2);
        let p = s.problem(200).unwrap();
        assert_eq!(p.grid.dx(), 0.01);
        // lane 1 has mass 0.5, lane 2 mass 0.5
        let m = p.initial.masses(p.grid.dx());
        assert!((m[0] - 0.5).abs() < 1e-14 && (m[1] - 0.5).abs() < 1e-14);
        let a = Scenario::builtin(ScenarioName::ArrheniusDiscontinuous).unwrap();
        let p = a.problem(a.default_cells).unwrap();
        assert_eq!(p.grid.dx(), 0.02);
        assert!((p.initial.masses(0.02)[0] - (0.5 + 0.2 + 0.2 * 1.25)).abs() < 1e-13);
        assert_eq!(a.cells_for_level(1), 200);
        let smooth = Scenario::builtin(ScenarioName::ArrheniusSmooth).unwrap();
        assert_eq!(smooth.cells_for_level(3), 320);
    }
}
