//! Fully-discrete second-order Kurganov–Tadmor scheme for nonlocal laws.
//!
//! One step, per component:
//!
//! 1. minmod slopes, interface convolutions `R_{j+1/2}` and speeds `c±`;
//! 2. split points `x_{j+1/2,l/r} = x_{j+1/2} + c∓Δt` and the
//!    reconstruction `ρ_{j+1/2,l/r}` there;
//! 3. shifted convolutions `R_{j+1/2,l/r}` (strip/midpoint quadrature);
//! 4. minmod flux slopes `F_x` along each family of split points;
//! 5. `∂_t R` at the split points from the conservation law;
//! 6. half-step Taylor predictors for `ρ` and `R`;
//! 7. intermediate averages over the non-smooth (`w_{j+1/2}`) and smooth
//!    (`w_j`) regions;
//! 8. slopes of the non-smooth pieces and projection back onto the grid.
//!
//! Balance-law sources enter every place the time derivative is used
//! (`∂_t ρ = −F_x + S`) and are integrated over each region with the
//! trapezoidal rule at the half step. Sources couple components, so all
//! components advance through each stage together.

use crate::error::{Result, SolverError};
use crate::flux::{local_speeds, SpeedPair};
use crate::models::{Grid, Kernel, ScalarModel, State, SystemModel};
use crate::nonlocal::{convolve_interfaces, integer_ratio, shifted_stencil, KernelWeights, Side};
use crate::recon::{compute_slopes, interface_values, minmod};

/// Switches for the KT pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KtOptions {
    /// Use the smooth-region formula and flux-slope denominators exactly as
    /// printed in the original derivation (missing `Δt`, mismatched
    /// convolution index, `c⁺` in the left-family spacing). For
    /// demonstrating the resulting loss of accuracy only.
    pub strict_paper_formulas: bool,
}

/// Quantities available at the start of a step, before `Δt` is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct KtStart {
    pub slopes: Vec<f64>,
    pub interface_convolutions: Vec<f64>,
    pub speeds: Vec<SpeedPair>,
}

/// Every intermediate of one KT step for one component; index `j` refers
/// to interface `j+1/2` except for `w_smooth` (cell `j`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KtWorkspace {
    pub speeds: Vec<SpeedPair>,
    pub slopes: Vec<f64>,
    pub interface_convolutions: Vec<f64>,
    /// `x_{j+1/2,l}`, `x_{j+1/2,r}` as offsets from `x_{j+1/2}`.
    pub split_left: Vec<f64>,
    pub split_right: Vec<f64>,
    pub rho_left: Vec<f64>,
    pub rho_right: Vec<f64>,
    pub conv_left: Vec<f64>,
    pub conv_right: Vec<f64>,
    pub flux_slope_left: Vec<f64>,
    pub flux_slope_right: Vec<f64>,
    /// `S` at the split points at `tⁿ` (zero without source).
    pub source_left: Vec<f64>,
    pub source_right: Vec<f64>,
    pub dconv_left: Vec<f64>,
    pub dconv_right: Vec<f64>,
    pub rho_half_left: Vec<f64>,
    pub rho_half_right: Vec<f64>,
    pub conv_half_left: Vec<f64>,
    pub conv_half_right: Vec<f64>,
    /// Half-step source averaged over the non-smooth region of interface
    /// `j` and over the smooth region of cell `j`.
    pub source_avg_mid: Vec<f64>,
    pub source_avg_smooth: Vec<f64>,
    pub w_mid: Vec<f64>,
    pub w_smooth: Vec<f64>,
    pub proj_slopes: Vec<f64>,
}

/// Slopes, interface convolutions and speeds for every component.
pub fn kt_prepare(
    state: &State,
    grid: &Grid,
    weights: &KernelWeights,
    model: &SystemModel,
    theta: f64,
) -> Result<Vec<KtStart>> {
    check_components(state, model)?;
    state
        .values
        .iter()
        .zip(model.components())
        .map(|(values, comp)| {
            let slopes = compute_slopes(values, grid.dx(), theta)?;
            let recon = interface_values(values, &slopes, grid.dx());
            let conv = convolve_interfaces(values, weights, Some(&slopes), grid)?;
            let speeds = (0..values.len())
                .map(|j| local_speeds(recon.left_values[j], recon.right_values[j], conv[j], comp))
                .collect();
            Ok(KtStart {
                slopes,
                interface_convolutions: conv,
                speeds,
            })
        })
        .collect()
}

/// `Δt = safety · Δx / (2 max_j max(c⁺, −c⁻))`; `safety · Δx` when every
/// speed vanishes.
pub fn kt_cfl_dt_from_speeds<'a>(
    speeds: impl IntoIterator<Item = &'a SpeedPair>,
    dx: f64,
    safety: f64,
) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(SolverError::InvalidParameter(format!(
            "CFL safety factor must lie in (0, 1], got {safety}"
        )));
    }
    let max_speed = speeds.into_iter().fold(0.0f64, |m, s| m.max(s.max_abs()));
    if !max_speed.is_finite() {
        return Err(SolverError::NumericalFailure(
            "non-finite local speed".into(),
        ));
    }
    Ok(if max_speed > 0.0 {
        safety * dx / (2.0 * max_speed)
    } else {
        safety * dx
    })
}

/// KT time step for the current state.
pub fn kt_cfl_dt(
    state: &State,
    grid: &Grid,
    model: &SystemModel,
    weights: &KernelWeights,
    theta: f64,
    safety: f64,
) -> Result<f64> {
    let start = kt_prepare(state, grid, weights, model, theta)?;
    kt_cfl_dt_from_speeds(start.iter().flat_map(|s| s.speeds.iter()), grid.dx(), safety)
}

/// `ρ_{j+1/2,l} = ρ_j + s_j(Δx/2 + Δt c⁻)`,
/// `ρ_{j+1/2,r} = ρ_{j+1} − s_{j+1}(Δx/2 − Δt c⁺)`.
pub fn kt_shifted_values(
    values: &[f64],
    slopes: &[f64],
    speeds: &[SpeedPair],
    grid: &Grid,
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let half = 0.5 * grid.dx();
    let left = (0..n)
        .map(|j| values[j] + slopes[j] * (half + dt * speeds[j].c_minus))
        .collect();
    let right = (0..n)
        .map(|j| {
            let k = (j + 1) % n;
            values[k] - slopes[k] * (half - dt * speeds[j].c_plus)
        })
        .collect();
    (left, right)
}

/// Minmod slopes of `F` along the left and right split-point families.
/// Divided differences use the actual distance between neighbouring split
/// points of the same family.
pub fn kt_flux_slopes(
    rho_left: &[f64],
    rho_right: &[f64],
    conv_left: &[f64],
    conv_right: &[f64],
    speeds: &[SpeedPair],
    model: &ScalarModel,
    grid: &Grid,
    dt: f64,
    options: KtOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rho_left.len();
    let dx = grid.dx();
    let f_left: Vec<f64> = (0..n).map(|j| model.flux(rho_left[j], conv_left[j])).collect();
    let f_right: Vec<f64> = (0..n).map(|j| model.flux(rho_right[j], conv_right[j])).collect();
    let spacing = |a: f64, b: f64| -> Result<f64> {
        let d = dx - a * dt + b * dt;
        if d > 0.0 {
            Ok(d)
        } else {
            Err(SolverError::CflViolation(format!(
                "nonpositive split-point spacing {d:e}"
            )))
        }
    };
    let mut fx_left = Vec::with_capacity(n);
    let mut fx_right = Vec::with_capacity(n);
    for j in 0..n {
        let (p, q) = ((j + n - 1) % n, (j + 1) % n);
        let (sp, sj, sq) = (speeds[p], speeds[j], speeds[q]);
        let back = (f_left[j] - f_left[p]) / spacing(sp.c_minus, sj.c_minus)?;
        let fwd_den = if options.strict_paper_formulas {
            spacing(sj.c_plus, sq.c_plus)?
        } else {
            spacing(sj.c_minus, sq.c_minus)?
        };
        fx_left.push(minmod(back, (f_left[q] - f_left[j]) / fwd_den));
        let back = (f_right[j] - f_right[p]) / spacing(sp.c_plus, sj.c_plus)?;
        let fwd = (f_right[q] - f_right[j]) / spacing(sj.c_plus, sq.c_plus)?;
        fx_right.push(minmod(back, fwd));
    }
    Ok((fx_left, fx_right))
}

/// Half-step Taylor predictors `ρ − (Δt/2)·rate` and `R + (Δt/2)·∂_t R`,
/// where `rate` is `F_x` (minus the source for balance laws).
pub fn kt_predictors(
    rho: &[f64],
    conv: &[f64],
    rate: &[f64],
    dconv: &[f64],
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let h = 0.5 * dt;
    (
        rho.iter().zip(rate).map(|(r, f)| r - h * f).collect(),
        conv.iter().zip(dconv).map(|(r, d)| r + h * d).collect(),
    )
}

/// Intermediate averages over the non-smooth (`w_{j+1/2}`) and smooth
/// (`w_j`) regions.
///
/// `flux_half_*` are `F(ρ^{n+1/2}, R^{n+1/2})` at the split points and
/// `source_avg_mid` and `source_avg_smooth` are half-step source averages
/// over the non-smooth and smooth regions (zeros for conservation laws).
/// `flux_half_left_mixed` is only read in strict mode.
#[allow(clippy::too_many_arguments)]
pub fn kt_intermediate_averages(
    values: &[f64],
    slopes: &[f64],
    speeds: &[SpeedPair],
    rho_left: &[f64],
    rho_right: &[f64],
    flux_half_left: &[f64],
    flux_half_right: &[f64],
    flux_half_right_mixed: Option<&[f64]>,
    source_avg_mid: &[f64],
    source_avg_smooth: &[f64],
    grid: &Grid,
    dt: f64,
    options: KtOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = values.len();
    let dx = grid.dx();
    let mut w_mid = Vec::with_capacity(n);
    for j in 0..n {
        let SpeedPair { c_plus, c_minus } = speeds[j];
        if speeds[j].is_degenerate() {
            w_mid.push(0.5 * (rho_left[j] + rho_right[j]));
            continue;
        }
        let k = (j + 1) % n;
        let num = rho_right[j] * c_plus - 0.5 * slopes[k] * c_plus * c_plus * dt
            - rho_left[j] * c_minus
            + 0.5 * slopes[j] * c_minus * c_minus * dt
            - (flux_half_right[j] - flux_half_left[j]);
        w_mid.push(
            num / (c_plus - c_minus) + dt * source_avg_mid[j],
        );
    }
    // A degenerate interface has a zero-width non-smooth region that cannot
    // hold the flux jump, so both neighbouring smooth regions see the mean
    // half-step flux there.
    let shared = |j: usize, own: f64| {
        if speeds[j].is_degenerate() {
            0.5 * (flux_half_left[j] + flux_half_right[j])
        } else {
            own
        }
    };
    let mut w_smooth = Vec::with_capacity(n);
    for j in 0..n {
        let p = (j + n - 1) % n;
        let width = dx - dt * (speeds[p].c_plus - speeds[j].c_minus);
        if !(width > 0.0) {
            return Err(SolverError::CflViolation(format!(
                "smooth region of cell {j} has nonpositive width {width:e}"
            )));
        }
        let (shift, flux_r) = if options.strict_paper_formulas {
            let mixed = flux_half_right_mixed.unwrap_or(flux_half_right);
            (0.5 * slopes[j] * (speeds[j].c_plus + speeds[j].c_minus), mixed[p])
        } else {
            (
                0.5 * dt * (speeds[p].c_plus + speeds[j].c_minus) * slopes[j],
                shared(p, flux_half_right[p]),
            )
        };
        let flux_l = shared(j, flux_half_left[j]);
        w_smooth.push(
            values[j] + shift - dt / width * (flux_l - flux_r)
                + dt * source_avg_smooth[j],
        );
    }
    Ok((w_mid, w_smooth))
}

/// Slopes of the non-smooth pieces, from full-step endpoint predictions
/// `rho_end_left/right`; zero on degenerate interfaces and wherever a
/// piece endpoint leaves the range of `w_j, w_{j+1/2}, w_{j+1}`.
pub fn kt_projection_slopes(
    w_mid: &[f64],
    w_smooth: &[f64],
    speeds: &[SpeedPair],
    rho_end_left: &[f64],
    rho_end_right: &[f64],
    dt: f64,
) -> Vec<f64> {
    let n = w_mid.len();
    (0..n)
        .map(|j| {
            if speeds[j].is_degenerate() {
                return 0.0;
            }
            let h = 0.5 * speeds[j].spread() * dt;
            let s = minmod(
                (w_mid[j] - rho_end_left[j]) / h,
                (rho_end_right[j] - w_mid[j]) / h,
            );
            if s == 0.0 {
                return 0.0;
            }
            let k = (j + 1) % n;
            let lo = w_smooth[j].min(w_mid[j]).min(w_smooth[k]);
            let hi = w_smooth[j].max(w_mid[j]).max(w_smooth[k]);
            let (a, b) = (w_mid[j] - s * h, w_mid[j] + s * h);
            if a < lo || a > hi || b < lo || b > hi {
                0.0
            } else {
                s
            }
        })
        .collect()
}

/// Projection of the smooth and non-smooth pieces onto cell averages.
pub fn kt_project(
    w_mid: &[f64],
    w_smooth: &[f64],
    proj_slopes: &[f64],
    speeds: &[SpeedPair],
    grid: &Grid,
    dt: f64,
) -> Vec<f64> {
    let n = w_mid.len();
    let lambda = dt / grid.dx();
    let mu = 0.5 * dt * dt / grid.dx();
    (0..n)
        .map(|j| {
            let p = (j + n - 1) % n;
            let (sp, sj) = (speeds[p], speeds[j]);
            w_smooth[j]
                + lambda
                    * (sp.c_plus * (w_mid[p] - w_smooth[j]) - sj.c_minus * (w_mid[j] - w_smooth[j]))
                + mu * (proj_slopes[j] * sj.c_plus * sj.c_minus
                    - proj_slopes[p] * sp.c_plus * sp.c_minus)
        })
        .collect()
}

fn check_components(state: &State, model: &SystemModel) -> Result<()> {
    if state.n_components() != model.n_components() {
        return Err(SolverError::InvalidParameter(format!(
            "state has {} components, model has {}",
            state.n_components(),
            model.n_components()
        )));
    }
    Ok(())
}

/// Piecewise-linear interpolation of a component's split-point values near
/// interface `j`, at offset `x` from `x_{j+1/2}`. Nodes are, in order,
/// `x_{j−1/2,r}`, `x_{j+1/2,l}`, `x_{j+1/2,r}`, `x_{j+3/2,l}`.
fn sample_near(
    ws_split_left: &[f64],
    ws_split_right: &[f64],
    left: &[f64],
    right: &[f64],
    dx: f64,
    j: usize,
    x: f64,
) -> f64 {
    let n = left.len();
    let (p, q) = ((j + n - 1) % n, (j + 1) % n);
    let nodes = [
        (ws_split_right[p] - dx, right[p]),
        (ws_split_left[j], left[j]),
        (ws_split_right[j], right[j]),
        (ws_split_left[q] + dx, left[q]),
    ];
    if x <= nodes[0].0 {
        return nodes[0].1;
    }
    for pair in nodes.windows(2) {
        let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
        if x <= x1 {
            let width = x1 - x0;
            return if width > 0.0 {
                y0 + (y1 - y0) * (x - x0) / width
            } else {
                y1
            };
        }
    }
    nodes[3].1
}

/// Source of component `k` at its own split point of interface `j`, with
/// the other components interpolated to the same location.
#[allow(clippy::too_many_arguments)]
fn source_at(
    model: &SystemModel,
    ws: &[KtWorkspace],
    rho_of: impl Fn(&KtWorkspace) -> (&[f64], &[f64]),
    conv_of: impl Fn(&KtWorkspace) -> (&[f64], &[f64]),
    k: usize,
    j: usize,
    side: Side,
    dx: f64,
    rho_buf: &mut [f64],
    conv_buf: &mut [f64],
    out: &mut [f64],
) -> f64 {
    let x = match side {
        Side::Left => ws[k].split_left[j],
        Side::Right => ws[k].split_right[j],
    };
    for (m, w) in ws.iter().enumerate() {
        let (rl, rr) = rho_of(w);
        let (cl, cr) = conv_of(w);
        if m == k {
            let (r, c) = match side {
                Side::Left => (rl[j], cl[j]),
                Side::Right => (rr[j], cr[j]),
            };
            rho_buf[m] = r;
            conv_buf[m] = c;
        } else {
            rho_buf[m] = sample_near(&w.split_left, &w.split_right, rl, rr, dx, j, x);
            conv_buf[m] = sample_near(&w.split_left, &w.split_right, cl, cr, dx, j, x);
        }
    }
    model.source(rho_buf, conv_buf, out);
    out[k]
}

type FamilyPick = fn(&KtWorkspace) -> (&[f64], &[f64]);

/// Pointwise sources at every component's own split points at `tⁿ`.
fn fill_point_sources(model: &SystemModel, ws: &mut [KtWorkspace], dx: f64) {
    let nc = ws.len();
    let n = ws[0].speeds.len();
    if !model.has_source() {
        for w in ws.iter_mut() {
            w.source_left = vec![0.0; n];
            w.source_right = vec![0.0; n];
        }
        return;
    }
    let rho_of: FamilyPick = |w| (&w.rho_left, &w.rho_right);
    let conv_of: FamilyPick = |w| (&w.conv_left, &w.conv_right);
    let mut rho_buf = vec![0.0; nc];
    let mut conv_buf = vec![0.0; nc];
    let mut out = vec![0.0; nc];
    let mut all = Vec::with_capacity(nc);
    for k in 0..nc {
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        for j in 0..n {
            for (side, dst) in [(Side::Left, &mut left), (Side::Right, &mut right)] {
                dst.push(source_at(
                    model,
                    ws,
                    rho_of,
                    conv_of,
                    k,
                    j,
                    side,
                    dx,
                    &mut rho_buf,
                    &mut conv_buf,
                    &mut out,
                ));
            }
        }
        all.push((left, right));
    }
    for (w, (left, right)) in ws.iter_mut().zip(all) {
        w.source_left = left;
        w.source_right = right;
    }
}

/// Exact integral over `[a, b]` of the piecewise-linear interpolant
/// through `nodes` (ascending abscissae).
fn integrate_linear(nodes: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for pair in nodes.windows(2) {
        let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
        let (lo, hi) = (x0.max(a), x1.min(b));
        if hi <= lo || x1 <= x0 {
            continue;
        }
        let at = |x: f64| y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        total += 0.5 * (hi - lo) * (at(lo) + at(hi));
    }
    total
}

/// Half-step source averages over each component's non-smooth and
/// smooth regions.
///
/// All components share one piecewise-linear source field, interpolated
/// through the union of every component's split points at `t^{n+1/2}`;
/// each region average is the exact mean of that field. With a single
/// component this is the two-point trapezoidal rule on each region, and
/// because the regions of any component tile the period, source vectors
/// that sum to zero produce region integrals that sum to zero across
/// components.
fn fill_region_sources(model: &SystemModel, ws: &mut [KtWorkspace], dx: f64) {
    let nc = ws.len();
    let n = ws[0].speeds.len();
    if !model.has_source() {
        for w in ws.iter_mut() {
            w.source_avg_mid = vec![0.0; n];
            w.source_avg_smooth = vec![0.0; n];
        }
        return;
    }
    let mut rho_buf = vec![0.0; nc];
    let mut conv_buf = vec![0.0; nc];
    let mut out = vec![0.0; nc];
    // per interface: sorted union of split offsets with the source vector
    let mut fields: Vec<Vec<(f64, Vec<f64>)>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut xs: Vec<f64> = ws
            .iter()
            .flat_map(|w| [w.split_left[j], w.split_right[j]])
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let nodes = xs
            .into_iter()
            .map(|x| {
                for (m, w) in ws.iter().enumerate() {
                    rho_buf[m] = sample_near(
                        &w.split_left,
                        &w.split_right,
                        &w.rho_half_left,
                        &w.rho_half_right,
                        dx,
                        j,
                        x,
                    );
                    conv_buf[m] = sample_near(
                        &w.split_left,
                        &w.split_right,
                        &w.conv_half_left,
                        &w.conv_half_right,
                        dx,
                        j,
                        x,
                    );
                }
                model.source(&rho_buf, &conv_buf, &mut out);
                (x, out.clone())
            })
            .collect();
        fields.push(nodes);
    }
    for (k, w) in ws.iter_mut().enumerate() {
        let mut mid = Vec::with_capacity(n);
        let mut smooth = Vec::with_capacity(n);
        for j in 0..n {
            let here: Vec<(f64, f64)> = fields[j].iter().map(|(x, s)| (*x, s[k])).collect();
            let spread = w.split_right[j] - w.split_left[j];
            mid.push(if spread > 0.0 {
                integrate_linear(&here, w.split_left[j], w.split_right[j]) / spread
            } else {
                here.iter()
                    .find(|(x, _)| *x == w.split_left[j])
                    .map_or(0.0, |(_, s)| *s)
            });
            let p = (j + n - 1) % n;
            let mut cell: Vec<(f64, f64)> = fields[p].iter().map(|(x, s)| (x - dx, s[k])).collect();
            cell.extend_from_slice(&here);
            let (a, b) = (w.split_right[p] - dx, w.split_left[j]);
            smooth.push(integrate_linear(&cell, a, b) / (b - a));
        }
        w.source_avg_mid = mid;
        w.source_avg_smooth = smooth;
    }
}

/// Advances all components by `dt` from prepared start quantities,
/// returning the new state and the per-component workspaces.
#[allow(clippy::too_many_arguments)]
pub fn kt_advance(
    state: &State,
    start: &[KtStart],
    grid: &Grid,
    kernel: &Kernel,
    weights: &KernelWeights,
    model: &SystemModel,
    dt: f64,
    options: KtOptions,
) -> Result<(State, Vec<KtWorkspace>)> {
    check_components(state, model)?;
    let n_eta = integer_ratio(kernel.eta(), grid.dx()).ok_or_else(|| {
        SolverError::InvalidParameter(format!(
            "the KT scheme needs eta/dx integral, got {}",
            kernel.eta() / grid.dx()
        ))
    })?;
    if n_eta != weights.n_eta || (weights.dx - grid.dx()).abs() > 1e-12 * grid.dx() {
        return Err(SolverError::InvalidParameter(
            "kernel weights do not match the grid".into(),
        ));
    }
    let dx = grid.dx();
    let n = grid.n_cells();
    let max_shift = start
        .iter()
        .flat_map(|s| s.speeds.iter())
        .fold(0.0f64, |m, s| m.max(s.max_abs()))
        * dt;
    if max_shift > 0.5 * dx * (1.0 + 1e-12) {
        return Err(SolverError::CflViolation(format!(
            "dt={dt:e} moves split points by {max_shift:e} > dx/2"
        )));
    }

    // split points, shifted reconstruction and convolutions, flux slopes
    let mut ws = Vec::with_capacity(start.len());
    let mut stencils = Vec::with_capacity(start.len());
    for ((values, st), comp) in state.values.iter().zip(start).zip(model.components()) {
        let (rho_left, rho_right) = kt_shifted_values(values, &st.slopes, &st.speeds, grid, dt);
        let mut left_st = Vec::with_capacity(n);
        let mut right_st = Vec::with_capacity(n);
        let mut conv_left = Vec::with_capacity(n);
        let mut conv_right = Vec::with_capacity(n);
        for j in 0..n {
            let l = shifted_stencil(kernel, dx, n_eta, st.speeds[j].c_minus * dt, Side::Left)?;
            let r = shifted_stencil(kernel, dx, n_eta, st.speeds[j].c_plus * dt, Side::Right)?;
            conv_left.push(l.convolve(values, &st.slopes, j));
            conv_right.push(r.convolve(values, &st.slopes, j));
            left_st.push(l);
            right_st.push(r);
        }
        let (fx_left, fx_right) = kt_flux_slopes(
            &rho_left,
            &rho_right,
            &conv_left,
            &conv_right,
            &st.speeds,
            comp,
            grid,
            dt,
            options,
        )?;
        ws.push(KtWorkspace {
            speeds: st.speeds.clone(),
            slopes: st.slopes.clone(),
            interface_convolutions: st.interface_convolutions.clone(),
            split_left: st.speeds.iter().map(|s| s.c_minus * dt).collect(),
            split_right: st.speeds.iter().map(|s| s.c_plus * dt).collect(),
            rho_left,
            rho_right,
            conv_left,
            conv_right,
            flux_slope_left: fx_left,
            flux_slope_right: fx_right,
            ..Default::default()
        });
        stencils.push((left_st, right_st));
    }

    // sources at tⁿ, time derivatives of R, half-step predictors
    fill_point_sources(model, &mut ws, dx);
    for (w, (left_st, right_st)) in ws.iter_mut().zip(&stencils) {
        let rate_left: Vec<f64> = w
            .flux_slope_left
            .iter()
            .zip(&w.source_left)
            .map(|(f, s)| f - s)
            .collect();
        let rate_right: Vec<f64> = w
            .flux_slope_right
            .iter()
            .zip(&w.source_right)
            .map(|(f, s)| f - s)
            .collect();
        w.dconv_left = (0..n).map(|j| left_st[j].time_derivative(&rate_left, j)).collect();
        w.dconv_right = (0..n).map(|j| right_st[j].time_derivative(&rate_right, j)).collect();
        let (rl, cl) = kt_predictors(&w.rho_left, &w.conv_left, &rate_left, &w.dconv_left, dt);
        let (rr, cr) = kt_predictors(&w.rho_right, &w.conv_right, &rate_right, &w.dconv_right, dt);
        w.rho_half_left = rl;
        w.conv_half_left = cl;
        w.rho_half_right = rr;
        w.conv_half_right = cr;
    }
    fill_region_sources(model, &mut ws, dx);

    // intermediate averages, projection
    let mut next = Vec::with_capacity(ws.len());
    for ((w, values), comp) in ws.iter_mut().zip(&state.values).zip(model.components()) {
        let flux_half_left: Vec<f64> = (0..n)
            .map(|j| comp.flux(w.rho_half_left[j], w.conv_half_left[j]))
            .collect();
        let flux_half_right: Vec<f64> = (0..n)
            .map(|j| comp.flux(w.rho_half_right[j], w.conv_half_right[j]))
            .collect();
        // strict mode pairs ρ_{j−1/2,r} with R_{j+1/2,l}
        let mixed: Option<Vec<f64>> = options.strict_paper_formulas.then(|| {
            (0..n)
                .map(|p| comp.flux(w.rho_half_right[p], w.conv_half_left[(p + 1) % n]))
                .collect()
        });
        let (w_mid, w_smooth) = kt_intermediate_averages(
            values,
            &w.slopes,
            &w.speeds,
            &w.rho_left,
            &w.rho_right,
            &flux_half_left,
            &flux_half_right,
            mixed.as_deref(),
            &w.source_avg_mid,
            &w.source_avg_smooth,
            grid,
            dt,
            options,
        )?;
        let end_left: Vec<f64> = (0..n)
            .map(|j| w.rho_left[j] - dt * (w.flux_slope_left[j] - w.source_left[j]))
            .collect();
        let end_right: Vec<f64> = (0..n)
            .map(|j| w.rho_right[j] - dt * (w.flux_slope_right[j] - w.source_right[j]))
            .collect();
        let proj = kt_projection_slopes(&w_mid, &w_smooth, &w.speeds, &end_left, &end_right, dt);
        next.push(kt_project(&w_mid, &w_smooth, &proj, &w.speeds, grid, dt));
        w.w_mid = w_mid;
        w.w_smooth = w_smooth;
        w.proj_slopes = proj;
    }
    Ok((State::new(state.t + dt, next)?, ws))
}

/// One KT step of size `dt`.
#[allow(clippy::too_many_arguments)]
pub fn kt_step(
    state: &State,
    grid: &Grid,
    kernel: &Kernel,
    weights: &KernelWeights,
    model: &SystemModel,
    dt: f64,
    theta: f64,
    options: KtOptions,
) -> Result<State> {
    let start = kt_prepare(state, grid, weights, model, theta)?;
    Ok(kt_advance(state, &start, grid, kernel, weights, model, dt, options)?.0)
}
