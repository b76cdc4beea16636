//! Local speed estimates, numerical fluxes and the semi-discrete operator.
//!
//! With the nonlocal term frozen at the interface, `F(ρ, R) = g(ρ) v(R)`
//! and every flux here factors as `G(a, b) v(R)`.

use crate::error::Result;
use crate::models::{FluxShape, Grid, ScalarModel};
use crate::nonlocal::{convolve_interfaces, KernelWeights};
use crate::recon::{compute_slopes, interface_values, minmod, piecewise_constant, Reconstruction};

/// Relative threshold below which `c⁺ − c⁻` counts as zero.
pub const DEGENERATE_SPEED_REL: f64 = 1e-14;

/// One-sided speed bounds at an interface; `c_minus ≤ 0 ≤ c_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpeedPair {
    pub c_plus: f64,
    pub c_minus: f64,
}

impl SpeedPair {
    pub fn spread(&self) -> f64 {
        self.c_plus - self.c_minus
    }

    pub fn max_abs(&self) -> f64 {
        self.c_plus.max(-self.c_minus)
    }

    /// True when `c⁺ − c⁻` is negligible relative to the speeds.
    pub fn is_degenerate(&self) -> bool {
        self.spread() <= DEGENERATE_SPEED_REL * self.max_abs().max(1.0)
    }
}

/// `c± = max/min(g'(a)v(R), g'(b)v(R), 0)`.
#[inline]
pub fn local_speeds(a: f64, b: f64, r: f64, model: &ScalarModel) -> SpeedPair {
    let v = model.v(r);
    let (sa, sb) = (model.g_prime(a) * v, model.g_prime(b) * v);
    // zero enters after scaling so a v(R) that rounds below zero cannot
    // flip the sign of either speed
    SpeedPair {
        c_plus: sa.max(sb).max(0.0),
        c_minus: sa.min(sb).min(0.0),
    }
}

/// Central-upwind flux with its intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuFlux {
    pub value: f64,
    pub speeds: SpeedPair,
    /// `ρ*`, absent on degenerate or one-sided interfaces.
    pub rho_star: Option<f64>,
    /// Built-in anti-diffusion `d = minmod(b − ρ*, ρ* − a)`.
    pub anti_diffusion: f64,
}

/// Central-upwind flux for left/right states `a`, `b` and interface
/// convolution `r`.
pub fn cu_flux_detailed(a: f64, b: f64, r: f64, model: &ScalarModel) -> CuFlux {
    let speeds = local_speeds(a, b, r, model);
    let SpeedPair { c_plus, c_minus } = speeds;
    let v = model.v(r);
    let fa = model.g(a) * v;
    let fb = model.g(b) * v;
    let simple = |value| CuFlux {
        value,
        speeds,
        rho_star: None,
        anti_diffusion: 0.0,
    };
    if speeds.is_degenerate() {
        return simple(if c_plus > 0.0 {
            fa
        } else if c_minus < 0.0 {
            fb
        } else {
            0.5 * (fa + fb)
        });
    }
    // one-sided fans: the central terms collapse to pure upwinding
    if c_minus == 0.0 {
        return simple(fa);
    }
    if c_plus == 0.0 {
        return simple(fb);
    }
    let spread = c_plus - c_minus;
    let rho_star = (c_plus * b - c_minus * a - (fb - fa)) / spread;
    let d = minmod(b - rho_star, rho_star - a);
    let value = (c_plus * fa - c_minus * fb) / spread + c_plus * c_minus / spread * (b - a - d);
    CuFlux {
        value,
        speeds,
        rho_star: Some(rho_star),
        anti_diffusion: d,
    }
}

#[inline]
pub fn cu_flux(a: f64, b: f64, r: f64, model: &ScalarModel) -> f64 {
    cu_flux_detailed(a, b, r, model).value
}

/// Godunov flux of `ρ ↦ g(ρ) v(R)` with `R` frozen:
/// `v(R) min_[a,b] g` if `a ≤ b`, `v(R) max_[b,a] g` otherwise.
pub fn godunov_flux(a: f64, b: f64, r: f64, model: &ScalarModel) -> f64 {
    let v = model.v(r);
    let (ga, gb) = (model.g(a), model.g(b));
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let interior = || model.critical_point_in(lo, hi).map(|c| model.g(c));
    let g = match (a <= b, model.shape()) {
        (true, FluxShape::Concave) => ga.min(gb),
        (false, FluxShape::Convex) => ga.max(gb),
        (true, FluxShape::Convex) => interior().map_or(ga.min(gb), |gc| gc.min(ga).min(gb)),
        (false, FluxShape::Concave) => interior().map_or(ga.max(gb), |gc| gc.max(ga).max(gb)),
    };
    g * v
}

/// Numerical flux family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    CentralUpwind,
    Godunov,
}

/// Spatial reconstruction order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Piecewise constant.
    First,
    /// Minmod-limited piecewise linear.
    Second,
}

/// Fluxes `ℱ_{j+1/2}` (index `j`) and their speeds.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFlux {
    pub values: Vec<f64>,
    pub speeds: Vec<SpeedPair>,
}

/// Everything one component contributes to a right-hand side evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRhs {
    /// `−(ℱ_{j+1/2} − ℱ_{j−1/2})/Δx`
    pub rates: Vec<f64>,
    pub fluxes: InterfaceFlux,
    pub reconstruction: Reconstruction,
    /// `R_{j+1/2}`
    pub convolutions: Vec<f64>,
}

/// Reconstruction of one component at the requested order.
pub fn reconstruct(values: &[f64], dx: f64, order: Order, theta: f64) -> Result<Reconstruction> {
    Ok(match order {
        Order::First => piecewise_constant(values),
        Order::Second => {
            let slopes = compute_slopes(values, dx, theta)?;
            interface_values(values, &slopes, dx)
        }
    })
}

/// Flux divergence for one component (no source).
pub fn component_rhs(
    values: &[f64],
    grid: &Grid,
    weights: &KernelWeights,
    model: &ScalarModel,
    kind: FluxKind,
    order: Order,
    theta: f64,
) -> Result<ComponentRhs> {
    let recon = reconstruct(values, grid.dx(), order, theta)?;
    let slopes = match order {
        Order::First => None,
        Order::Second => Some(recon.slopes.as_slice()),
    };
    let conv = convolve_interfaces(values, weights, slopes, grid)?;
    let n = values.len();
    let mut fluxes = Vec::with_capacity(n);
    let mut speeds = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b, r) = (recon.left_values[j], recon.right_values[j], conv[j]);
        match kind {
            FluxKind::CentralUpwind => {
                let f = cu_flux_detailed(a, b, r, model);
                fluxes.push(f.value);
                speeds.push(f.speeds);
            }
            FluxKind::Godunov => {
                fluxes.push(godunov_flux(a, b, r, model));
                speeds.push(local_speeds(a, b, r, model));
            }
        }
    }
    let inv_dx = 1.0 / grid.dx();
    let rates = (0..n)
        .map(|j| -(fluxes[j] - fluxes[(j + n - 1) % n]) * inv_dx)
        .collect();
    Ok(ComponentRhs {
        rates,
        fluxes: InterfaceFlux {
            values: fluxes,
            speeds,
        },
        reconstruction: recon,
        convolutions: conv,
    })
}

/// `dρ_j/dt` of the semi-discrete scheme for a scalar law.
pub fn semidiscrete_rhs(
    values: &[f64],
    grid: &Grid,
    weights: &KernelWeights,
    model: &ScalarModel,
    kind: FluxKind,
    order: Order,
    theta: f64,
) -> Result<Vec<f64>> {
    Ok(component_rhs(values, grid, weights, model, kind, order, theta)?.rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_arrhenius_model, make_multilane_model, make_quadratic_kernel};
    use crate::nonlocal::compute_kernel_weights;
    use std::sync::Arc;

    fn linear_model(v_const: bool) -> ScalarModel {
        if v_const {
            ScalarModel::new(
                "transport",
                Arc::new(|r| r),
                Arc::new(|_| 1.0),
                Arc::new(|_| 1.0),
                Arc::new(|_| 0.0),
                FluxShape::Concave,
            )
            .with_monotone_nonneg(true)
        } else {
            make_multilane_model().component(0).clone()
        }
    }

    #[test]
    fn speed_examples() {
        let m = make_arrhenius_model();
        let s = local_speeds(0.2, 0.8, 0.5, &m);
        let expected = 0.6 * (-0.5f64).exp();
        assert!((s.c_plus - expected).abs() < 1e-15);
        assert!((s.c_minus + expected).abs() < 1e-15);
        let s = local_speeds(0.5, 0.5, 0.3, &m);
        assert_eq!(s.c_plus, 0.0);
        assert_eq!(s.c_minus, 0.0);
        let lin = linear_model(false);
        let s = local_speeds(0.1, 0.9, 0.0, &lin);
        assert_eq!(s.c_plus, 1.0);
        assert_eq!(s.c_minus, 0.0);
    }

    #[test]
    fn cu_flux_hand_evaluation() {
        let m = make_arrhenius_model();
        let f = cu_flux_detailed(0.2, 0.8, 0.5, &m);
        assert!((f.rho_star.unwrap() - 0.5).abs() < 1e-15);
        assert!((f.anti_diffusion - 0.3).abs() < 1e-15);
        // 0.16 e^{-1/2} - 0.15 · 0.6 e^{-1/2}
        let expected = 0.07 * (-0.5f64).exp();
        assert!((f.value - expected).abs() < 1e-15);
    }

    #[test]
    fn cu_flux_consistency_and_degeneracy() {
        let m = make_arrhenius_model();
        for rho in [0.1, 0.3, 0.5, 0.77] {
            let f = cu_flux(rho, rho, 0.4, &m);
            assert!((f - m.flux(rho, 0.4)).abs() <= 1e-15 * f.abs().max(1e-300));
        }
        // v(R) = 0 for the multilane speed at R = 1
        let lane = linear_model(false);
        assert_eq!(cu_flux(0.3, 0.6, 1.0, &lane), 0.0);
    }

    #[test]
    fn upwind_reduction_for_increasing_g() {
        let lane = linear_model(false);
        for (a, b, r) in [(0.1, 0.9, 0.3), (0.8, 0.2, 0.5), (0.0, 1.0, 0.0)] {
            let expected = lane.g(a) * lane.v(r);
            assert_eq!(cu_flux(a, b, r, &lane), expected);
            assert_eq!(godunov_flux(a, b, r, &lane), expected);
        }
    }

    #[test]
    fn godunov_examples() {
        let m = make_arrhenius_model();
        assert!((godunov_flux(0.2, 0.8, 0.0, &m) - 0.16).abs() < 1e-15);
        assert!((godunov_flux(0.8, 0.2, 0.0, &m) - 0.25).abs() < 1e-15);
        assert!((godunov_flux(0.7, 0.6, 0.0, &m) - 0.24).abs() < 1e-15);
        // convex g: min at the vertex when increasing
        let convex = ScalarModel::new(
            "convex",
            Arc::new(|r| (r - 0.5) * (r - 0.5)),
            Arc::new(|r| 2.0 * (r - 0.5)),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            FluxShape::Convex,
        );
        assert!(godunov_flux(0.2, 0.8, 0.0, &convex).abs() < 1e-15);
        assert!((godunov_flux(0.8, 0.2, 0.0, &convex) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn rhs_vanishes_on_constants() {
        let k = make_quadratic_kernel(0.2).unwrap();
        let grid = Grid::new(-1.0, 1.0, 40).unwrap();
        let w = compute_kernel_weights(&k, grid.dx()).unwrap();
        let m = make_arrhenius_model();
        for kind in [FluxKind::CentralUpwind, FluxKind::Godunov] {
            for order in [Order::First, Order::Second] {
                let r = semidiscrete_rhs(&[0.3; 40], &grid, &w, &m, kind, order, 1.0).unwrap();
                assert!(r.iter().all(|x| x.abs() < 1e-14));
            }
        }
    }

    #[test]
    fn upwind_stencil_by_hand() {
        // g(ρ) = ρ, v ≡ 1: ℱ_{j+1/2} = ρ_j
        let k = make_quadratic_kernel(0.5).unwrap();
        let grid = Grid::new(-1.0, 1.0, 4).unwrap();
        let w = compute_kernel_weights(&k, grid.dx()).unwrap();
        let m = linear_model(true);
        let rho = [0.0, 1.0, 0.0, 0.0];
        let r = semidiscrete_rhs(&rho, &grid, &w, &m, FluxKind::CentralUpwind, Order::First, 1.0)
            .unwrap();
        assert_eq!(r, vec![0.0, -2.0, 2.0, 0.0]);
    }

    #[test]
    fn telescoping_sum() {
        let k = make_quadratic_kernel(0.2).unwrap();
        let grid = Grid::new(-1.0, 1.0, 64).unwrap();
        let w = compute_kernel_weights(&k, grid.dx()).unwrap();
        let m = make_arrhenius_model();
        let rho: Vec<f64> = grid
            .centers()
            .iter()
            .map(|x| 0.5 + 0.4 * (3.0 * x).sin())
            .collect();
        let r = semidiscrete_rhs(&rho, &grid, &w, &m, FluxKind::CentralUpwind, Order::Second, 1.0)
            .unwrap();
        assert!(r.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn speeds_keep_their_signs_when_v_rounds_negative() {
        let lane = make_multilane_model().component(0).clone();
        let r = 1.0 + f64::EPSILON;
        assert!(lane.v(r) < 0.0);
        let s = local_speeds(0.3, 0.7, r, &lane);
        assert!(s.c_plus >= 0.0 && s.c_minus <= 0.0);
    }
}
