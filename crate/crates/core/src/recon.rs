//! Piecewise-constant and minmod-limited piecewise-linear reconstruction.

use crate::error::{Result, SolverError};

/// Two-argument minmod. Ties with equal sign return `a`.
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if b.abs() < a.abs() {
        b
    } else {
        a
    }
}

/// Three-argument minmod: smallest magnitude if all signs agree, else 0.
#[inline]
pub fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Slopes, plus the one-sided values `ρ⁻_{j+1/2}` (left of interface
/// `j+1/2`) and `ρ⁺_{j+1/2}` (right of it).
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub slopes: Vec<f64>,
    pub left_values: Vec<f64>,
    pub right_values: Vec<f64>,
}

/// Limited slopes of a periodic array of cell averages.
///
/// `theta = 1` is the plain two-argument minmod of the one-sided
/// differences; `theta ∈ (1, 2]` uses the generalized minmod of
/// `(θ·backward, central, θ·forward)`. The result is finally clamped so
/// both one-sided values of every cell stay between the averages of the
/// cell and its neighbour on that side.
pub fn compute_slopes(values: &[f64], dx: f64, theta: f64) -> Result<Vec<f64>> {
    if !(1.0..=2.0).contains(&theta) {
        return Err(SolverError::InvalidParameter(format!(
            "limiter parameter theta must lie in [1, 2], got {theta}"
        )));
    }
    let n = values.len();
    let half = 0.5 * dx;
    let mut slopes = Vec::with_capacity(n);
    for j in 0..n {
        let prev = values[(j + n - 1) % n];
        let next = values[(j + 1) % n];
        let here = values[j];
        let back = (here - prev) / dx;
        let fwd = (next - here) / dx;
        let mut s = if theta == 1.0 {
            minmod(back, fwd)
        } else {
            minmod3(theta * back, 0.5 * (back + fwd), theta * fwd)
        };
        // one-sided values within the adjacent averages
        let cap_right = (next - here) / half;
        let cap_left = (here - prev) / half;
        if s > 0.0 {
            s = s.min(cap_right.max(0.0)).min(cap_left.max(0.0));
        } else if s < 0.0 {
            s = s.max(cap_right.min(0.0)).max(cap_left.min(0.0));
        }
        slopes.push(s);
    }
    Ok(slopes)
}

/// One-sided interface values from cell averages and slopes.
pub fn interface_values(values: &[f64], slopes: &[f64], dx: f64) -> Reconstruction {
    let n = values.len();
    let half = 0.5 * dx;
    let left_values = (0..n).map(|j| values[j] + half * slopes[j]).collect();
    let right_values = (0..n)
        .map(|j| {
            let k = (j + 1) % n;
            values[k] - half * slopes[k]
        })
        .collect();
    Reconstruction {
        slopes: slopes.to_vec(),
        left_values,
        right_values,
    }
}

/// Piecewise-constant reconstruction: zero slopes.
pub fn piecewise_constant(values: &[f64]) -> Reconstruction {
    interface_values(values, &vec![0.0; values.len()], 1.0)
}
