//! Kernel weights and quadratures for the nonlocal term `ω_η ∗ ρ`.
//!
//! Interface convolutions use exact cell integrals of the kernel
//! (`γ_k`); the shifted evaluations needed by the KT scheme use midpoint
//! rules over strips whose widths depend on the local speeds.

use crate::error::{Result, SolverError};
use crate::models::{Grid, Kernel};

/// Cell-integrated kernel weights for one grid spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    /// `γ_0 ..= γ_{N_η}`; `γ_{N_η}` covers the residual window
    /// `[N_η Δx, η]` and is zero when `η/Δx` is an integer.
    pub gamma: Vec<f64>,
    /// `N_η = ⌊η/Δx⌋`.
    pub n_eta: usize,
    pub dx: f64,
    pub integer_ratio: bool,
    /// Offset of the residual window's midpoint from the center of the
    /// partially covered cell (nonpositive).
    pub partial_offset: f64,
}

impl KernelWeights {
    pub fn gamma0(&self) -> f64 {
        self.gamma[0]
    }

    pub fn sum(&self) -> f64 {
        self.gamma.iter().sum()
    }
}

/// Returns `Some(n)` when `eta/dx` is (to rounding) the integer `n ≥ 1`.
pub fn integer_ratio(eta: f64, dx: f64) -> Option<usize> {
    let ratio = eta / dx;
    let r = ratio.round();
    (r >= 1.0 && (ratio - r).abs() <= 1e-9 * ratio.max(1.0)).then_some(r as usize)
}

/// `γ_k = ∫_{kΔx}^{min((k+1)Δx, η)} ω_η`, exact when the kernel carries an
/// antiderivative and adaptive Simpson (abs. tol. 1e-12) otherwise.
pub fn compute_kernel_weights(kernel: &Kernel, dx: f64) -> Result<KernelWeights> {
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(SolverError::InvalidParameter(format!(
            "grid spacing must be positive, got {dx}"
        )));
    }
    let eta = kernel.eta();
    let (n_eta, exact) = match integer_ratio(eta, dx) {
        Some(n) => (n, true),
        None => ((eta / dx).floor() as usize, false),
    };
    let integrate = |a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        match kernel.antiderivative() {
            Some(w) => Ok(w(b) - w(a)),
            None => adaptive_simpson(&|x| kernel.omega(x), a, b, 1e-12),
        }
    };
    let mut gamma = Vec::with_capacity(n_eta + 1);
    for k in 0..n_eta {
        let a = k as f64 * dx;
        let b = if exact && k + 1 == n_eta {
            eta
        } else {
            ((k + 1) as f64 * dx).min(eta)
        };
        gamma.push(integrate(a, b)?);
    }
    gamma.push(if exact {
        0.0
    } else {
        integrate(n_eta as f64 * dx, eta)?
    });
    let partial_offset = if exact {
        0.0
    } else {
        0.5 * (eta - (n_eta as f64 + 1.0) * dx)
    };
    Ok(KernelWeights {
        gamma,
        n_eta,
        dx,
        integer_ratio: exact,
        partial_offset,
    })
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(SolverError::NumericalFailure(format!(
                "adaptive Simpson did not converge on [{a}, {b}] (residual {delta:e})"
            )));
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn check_dx(weights: &KernelWeights, grid: &Grid) -> Result<()> {
    if (weights.dx - grid.dx()).abs() > 1e-12 * grid.dx() {
        return Err(SolverError::InvalidParameter(format!(
            "kernel weights built for dx={} used on grid with dx={}",
            weights.dx,
            grid.dx()
        )));
    }
    Ok(())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `R_{j+1/2} ≈ (ω_η ∗ ρ)(x_{j+1/2})` for every interface `j`.
///
/// Full cells contribute `γ_k ρ_{j+k+1}`. When `η/Δx ∉ ℕ` the residual
/// window adds `γ_{N_η}` times the reconstruction of cell `j+N_η+1` at
/// the window midpoint; without slopes the cell average is used.
pub fn convolve_interfaces(
    values: &[f64],
    weights: &KernelWeights,
    slopes: Option<&[f64]>,
    grid: &Grid,
) -> Result<Vec<f64>> {
    check_dx(weights, grid)?;
    let n = values.len();
    if n != grid.n_cells() {
        return Err(SolverError::InvalidParameter(format!(
            "state has {n} cells, grid has {}",
            grid.n_cells()
        )));
    }
    let n_eta = weights.n_eta;
    let ext: Vec<f64> = (0..n + n_eta + 1).map(|i| values[i % n]).collect();
    let full = &weights.gamma[..n_eta];
    let partial = weights.gamma[n_eta];
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut r = dot(full, &ext[j + 1..j + 1 + n_eta]);
        if !weights.integer_ratio {
            let cell = (j + n_eta + 1) % n;
            let slope = slopes.map_or(0.0, |s| s[cell]);
            r += partial * (values[cell] + slope * weights.partial_offset);
        }
        out.push(r);
    }
    Ok(out)
}

/// Which split point a shifted quadrature is anchored at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x_{j+1/2,l} = x_{j+1/2} + c⁻Δt`
    Left,
    /// `x_{j+1/2,r} = x_{j+1/2} + c⁺Δt`
    Right,
}

/// Midpoint-rule weights for a kernel window anchored at a split point.
///
/// Term `i` (`0..=N_η`) lives in cell `j + base + i` and, for the time
/// derivative, uses the flux slope at split point `j + i`. Only the first
/// and last strips are partial cells; their reconstruction offsets from
/// the cell centers are stored separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedStencil {
    pub base: usize,
    pub weights: Vec<f64>,
    pub first_offset: f64,
    pub last_offset: f64,
}

/// Builds the strip weights for `shift = c⁻Δt` (left) or `c⁺Δt` (right).
pub fn shifted_stencil(
    kernel: &Kernel,
    dx: f64,
    n_eta: usize,
    shift: f64,
    side: Side,
) -> Result<ShiftedStencil> {
    if shift.abs() > 0.5 * dx * (1.0 + 1e-12) {
        return Err(SolverError::CflViolation(format!(
            "split-point shift {shift:e} exceeds dx/2 = {:e}",
            0.5 * dx
        )));
    }
    if n_eta == 0 {
        return Err(SolverError::InvalidParameter(
            "shifted quadrature needs eta >= dx".into(),
        ));
    }
    let nf = n_eta as f64;
    let mut weights = Vec::with_capacity(n_eta + 1);
    let stencil = match side {
        Side::Left => {
            if shift > 0.0 {
                return Err(SolverError::InvalidParameter(format!(
                    "left split point needs a nonpositive shift, got {shift:e}"
                )));
            }
            let w0 = -shift;
            weights.push(w0 * kernel.omega(-0.5 * shift));
            for l in 0..n_eta - 1 {
                weights.push(dx * kernel.omega((l as f64 + 0.5) * dx - shift));
            }
            let wl = dx + shift;
            weights.push(wl * kernel.omega(0.5 * ((2.0 * nf - 1.0) * dx - shift)));
            ShiftedStencil {
                base: 0,
                weights,
                first_offset: 0.5 * (dx + shift),
                last_offset: 0.5 * shift,
            }
        }
        Side::Right => {
            if shift < 0.0 {
                return Err(SolverError::InvalidParameter(format!(
                    "right split point needs a nonnegative shift, got {shift:e}"
                )));
            }
            let w0 = dx - shift;
            weights.push(w0 * kernel.omega(0.5 * w0));
            for l in 0..n_eta - 1 {
                weights.push(dx * kernel.omega((l as f64 + 1.5) * dx - shift));
            }
            weights.push(shift * kernel.omega(0.5 * (2.0 * nf * dx - shift)));
            ShiftedStencil {
                base: 1,
                weights,
                first_offset: 0.5 * shift,
                last_offset: -0.5 * (dx - shift),
            }
        }
    };
    Ok(stencil)
}

impl ShiftedStencil {
    /// Midpoint quadrature of `ω ∗ ρ` at the split point of interface `j`.
    pub fn convolve(&self, values: &[f64], slopes: &[f64], j: usize) -> f64 {
        let n = values.len();
        let first = j + self.base;
        let last_i = self.weights.len() - 1;
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * values[(first + i) % n];
        }
        acc + self.weights[0] * slopes[first % n] * self.first_offset
            + self.weights[last_i] * slopes[(first + last_i) % n] * self.last_offset
    }

    /// `−Σ_i w_i F_x(j+i)`: first-order quadrature of `∂_t(ω ∗ ρ)` at the
    /// split point of interface `j`, given flux slopes at the split points
    /// of the same family.
    pub fn time_derivative(&self, flux_slopes: &[f64], j: usize) -> f64 {
        let n = flux_slopes.len();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * flux_slopes[(j + i) % n];
        }
        -acc
    }
}

fn kt_n_eta(kernel: &Kernel, grid: &Grid) -> Result<usize> {
    integer_ratio(kernel.eta(), grid.dx()).ok_or_else(|| {
        SolverError::InvalidParameter(format!(
            "shifted quadratures need eta/dx integral, got {}",
            kernel.eta() / grid.dx()
        ))
    })
}

/// `R(tⁿ, x_{j+1/2,l/r})` by the strip/midpoint rule.
pub fn convolve_shifted(
    values: &[f64],
    slopes: &[f64],
    kernel: &Kernel,
    grid: &Grid,
    j: usize,
    shift: f64,
    side: Side,
) -> Result<f64> {
    let n_eta = kt_n_eta(kernel, grid)?;
    let stencil = shifted_stencil(kernel, grid.dx(), n_eta, shift, side)?;
    Ok(stencil.convolve(values, slopes, j % values.len()))
}

/// `∂_t R(tⁿ, x_{j+1/2,l/r})` from flux slopes at the split points.
pub fn convolve_time_derivative(
    flux_slopes: &[f64],
    kernel: &Kernel,
    grid: &Grid,
    j: usize,
    shift: f64,
    side: Side,
) -> Result<f64> {
    let n_eta = kt_n_eta(kernel, grid)?;
    let stencil = shifted_stencil(kernel, grid.dx(), n_eta, shift, side)?;
    Ok(stencil.time_derivative(flux_slopes, j % flux_slopes.len()))
}
