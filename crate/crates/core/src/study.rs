//! Grid-refinement studies: L1 errors against a fine reference and
//! observed convergence rates.

use crate::error::{Result, SolverError};
use crate::models::State;
use crate::scenario::Scenario;
use crate::timeint::{run, Scheme, SchemeConfig};

/// L1 distance between a coarse solution and a finer reference on the
/// same domain, summed over components.
///
/// The reference is block-averaged onto the coarse cells, which requires
/// its cell count to be a multiple of the coarse one.
pub fn l1_error(coarse: &State, reference: &State, domain_length: f64) -> Result<f64> {
    if coarse.n_components() != reference.n_components() {
        return Err(SolverError::InvalidParameter(
            "component counts differ".into(),
        ));
    }
    let (nc, nf) = (coarse.n_cells(), reference.n_cells());
    if nc == 0 || nf % nc != 0 {
        return Err(SolverError::InvalidParameter(format!(
            "reference with {nf} cells cannot be averaged onto {nc} cells"
        )));
    }
    let ratio = nf / nc;
    let dx = domain_length / nc as f64;
    let mut err = 0.0;
    for (c, f) in coarse.values.iter().zip(&reference.values) {
        for (j, &v) in c.iter().enumerate() {
            let avg = f[j * ratio..(j + 1) * ratio].iter().sum::<f64>() / ratio as f64;
            err += (v - avg).abs();
        }
    }
    Ok(dx * err)
}

/// `log2(e_{n−1}/e_n)` for consecutive errors.
pub fn observed_rates(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .iter()
        .enumerate()
        .map(|(i, &e)| (i > 0).then(|| (errors[i - 1] / e).log2()))
        .collect()
}

/// One line of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub scheme: Scheme,
    pub level: u32,
    pub dx: f64,
    pub l1_error: f64,
    pub rate: Option<f64>,
}

/// Convergence tables for several schemes against one reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub reference_scheme: Scheme,
    pub reference_level: u32,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn rows_for(&self, scheme: Scheme) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    pub fn errors(&self, scheme: Scheme) -> Vec<f64> {
        self.rows_for(scheme).map(|r| r.l1_error).collect()
    }

    pub fn rates(&self, scheme: Scheme) -> Vec<f64> {
        self.rows_for(scheme).filter_map(|r| r.rate).collect()
    }
}

/// Solves `scenario` at `level` with `config` and returns the final state.
pub fn solve_level(scenario: &Scenario, config: &SchemeConfig, level: u32) -> Result<State> {
    let problem = scenario.problem_for_level(level)?;
    Ok(run(&problem, config, &[])?.final_state().clone())
}

/// Errors of each scheme at `levels` against a `reference_scheme` run at
/// `reference_level`. `configure` adjusts the default configuration of
/// each scheme (e.g. CFL factor or θ).
pub fn convergence_study(
    scenario: &Scenario,
    schemes: &[Scheme],
    levels: &[u32],
    reference_scheme: Scheme,
    reference_level: u32,
    configure: impl Fn(SchemeConfig) -> SchemeConfig,
) -> Result<ConvergenceReport> {
    if let Some(&bad) = levels.iter().find(|&&l| l >= reference_level) {
        return Err(SolverError::InvalidParameter(format!(
            "level {bad} is not coarser than the reference level {reference_level}"
        )));
    }
    let reference = solve_level(
        scenario,
        &configure(SchemeConfig::new(reference_scheme, scenario.t_final)),
        reference_level,
    )?;
    let length = scenario.x_max - scenario.x_min;
    let mut rows = Vec::new();
    for &scheme in schemes {
        let config = configure(SchemeConfig::new(scheme, scenario.t_final));
        let mut errors = Vec::with_capacity(levels.len());
        for &level in levels {
            let state = solve_level(scenario, &config, level)?;
            errors.push(l1_error(&state, &reference, length)?);
        }
        for ((&level, &l1), rate) in levels.iter().zip(&errors).zip(observed_rates(&errors)) {
            rows.push(ConvergenceRow {
                scheme,
                level,
                dx: length / scenario.cells_for_level(level) as f64,
                l1_error: l1,
                rate,
            });
        }
    }
    Ok(ConvergenceReport {
        scenario: scenario.label.clone(),
        reference_scheme,
        reference_level,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_average_error() {
        let coarse = State::new(0.0, vec![vec![1.0, 0.0]]).unwrap();
        let fine = State::new(0.0, vec![vec![1.0, 0.0, 0.0, 0.0]]).unwrap();
        // coarse cell 0 vs average 0.5, coarse cell 1 vs 0; dx = 1
        assert!((l1_error(&coarse, &fine, 2.0).unwrap() - 0.5).abs() < 1e-15);
        let odd = State::new(0.0, vec![vec![0.0; 3]]).unwrap();
        assert!(l1_error(&odd, &fine, 2.0).is_err());
        assert_eq!(l1_error(&fine, &fine, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn rate_formula() {
        let r = observed_rates(&[4e-3, 1e-3, 2.5e-4]);
        assert!(r[0].is_none());
        assert!((r[1].unwrap() - 2.0).abs() < 1e-12);
        assert!((r[2].unwrap() - 2.0).abs() < 1e-12);
    }
}
