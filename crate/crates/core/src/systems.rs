//! Weakly coupled systems: componentwise fluxes plus a pointwise source.
//!
//! Each component `k` is transported by its own flux
//! `g_k(ρ_k) v_k(ω ∗ ρ_k)` and all components are coupled through
//! `S(ρ, R)`. The semi-discrete scheme evaluates the source at cell
//! centres, using the cell averages and `R_j = (R_{j−1/2} + R_{j+1/2})/2`.

use crate::error::{Result, SolverError};
use crate::flux::{component_rhs, ComponentRhs, FluxKind, Order, SpeedPair};
use crate::models::{Grid, State, SystemModel};
use crate::nonlocal::KernelWeights;

/// Componentwise right-hand side and the data it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRhs {
    pub rates: Vec<Vec<f64>>,
    pub components: Vec<ComponentRhs>,
}

/// Local speeds of every component at every interface.
pub fn componentwise_speeds(rhs: &SystemRhs) -> Vec<Vec<SpeedPair>> {
    rhs.components
        .iter()
        .map(|c| c.fluxes.speeds.clone())
        .collect()
}

/// Full semi-discrete right-hand side of a system, with the details of
/// each component.
pub fn system_rhs_detailed(
    state: &State,
    grid: &Grid,
    weights: &KernelWeights,
    model: &SystemModel,
    kind: FluxKind,
    order: Order,
    theta: f64,
) -> Result<SystemRhs> {
    if state.n_components() != model.n_components() {
        return Err(SolverError::InvalidParameter(format!(
            "state has {} components, model has {}",
            state.n_components(),
            model.n_components()
        )));
    }
    let components = state
        .values
        .iter()
        .zip(model.components())
        .map(|(values, comp)| component_rhs(values, grid, weights, comp, kind, order, theta))
        .collect::<Result<Vec<_>>>()?;
    let mut rates: Vec<Vec<f64>> = components.iter().map(|c| c.rates.clone()).collect();
    if model.has_source() {
        let nc = model.n_components();
        let n = grid.n_cells();
        let mut rho = vec![0.0; nc];
        let mut conv = vec![0.0; nc];
        let mut out = vec![0.0; nc];
        for j in 0..n {
            let p = (j + n - 1) % n;
            for k in 0..nc {
                rho[k] = state.values[k][j];
                let c = &components[k].convolutions;
                conv[k] = 0.5 * (c[p] + c[j]);
            }
            model.source(&rho, &conv, &mut out);
            for k in 0..nc {
                rates[k][j] += out[k];
            }
        }
    }
    Ok(SystemRhs { rates, components })
}

/// `dρ/dt` of every component.
pub fn system_rhs(
    state: &State,
    grid: &Grid,
    weights: &KernelWeights,
    model: &SystemModel,
    kind: FluxKind,
    order: Order,
    theta: f64,
) -> Result<Vec<Vec<f64>>> {
    Ok(system_rhs_detailed(state, grid, weights, model, kind, order, theta)?.rates)
}
