//! Grids, kernels, flux/speed models and solution state.
//!
//! All model types are immutable after construction and cheap to clone
//! (function members are reference counted).

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SolverError};

/// Real function of one variable shared between threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Source term `S(ρ, R, out)`: writes one rate per component into `out`.
pub type SourceFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Closed-form sup-norm bounds over an interval.
pub type NormFn = Arc<dyn Fn(Interval) -> NormBounds + Send + Sync>;

/// Uniform periodic mesh on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(SolverError::InvalidParameter(
                "grid needs at least one cell".into(),
            ));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(SolverError::InvalidParameter(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx: (x_max - x_min) / n_cells as f64,
        })
    }

    /// Grid on `[-1, 1]` with `Δx = (1/20)·2^{-level}`.
    pub fn from_level(level: u32) -> Result<Self> {
        Self::new(-1.0, 1.0, 40usize << level)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Cell center `x_j`.
    pub fn center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    /// Right interface `x_{j+1/2}` of cell `j`.
    pub fn interface(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 1.0) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    /// Periodic index reduction.
    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.n_cells as isize) as usize
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(SolverError::InvalidParameter(format!(
                "empty interval [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Smallest interval containing all finite values.
    pub fn hull<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in values {
            if !x.is_finite() {
                return Err(SolverError::NumericalFailure(format!(
                    "non-finite value {x} in interval hull"
                )));
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
        Self::new(lo, hi)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// `max(|lo|, |hi|)`.
    pub fn abs_max(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Forward-looking kernel `ω_η` supported on `[0, η]`.
#[derive(Clone)]
pub struct Kernel {
    eta: f64,
    density: ScalarFn,
    antiderivative: Option<ScalarFn>,
    label: String,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("label", &self.label)
            .field("eta", &self.eta)
            .field("exact_antiderivative", &self.antiderivative.is_some())
            .finish()
    }
}

impl Kernel {
    /// `ω_η(x) = 3(η² − x²)/(2η³)` with antiderivative `(3η²x − x³)/(2η³)`.
    pub fn quadratic(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        let scale = 2.0 * eta * eta * eta;
        let eta2 = eta * eta;
        Ok(Self {
            eta,
            density: Arc::new(move |x| 3.0 * (eta2 - x * x) / scale),
            antiderivative: Some(Arc::new(move |x| (3.0 * eta2 * x - x * x * x) / scale)),
            label: format!("quadratic(eta={eta})"),
        })
    }

    /// `ω_η ≡ 1/η`.
    pub fn constant(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            eta,
            density: Arc::new(move |_| 1.0 / eta),
            antiderivative: Some(Arc::new(move |x| x / eta)),
            label: format!("constant(eta={eta})"),
        })
    }

    /// User-supplied kernel; checked for nonnegativity, monotonicity and
    /// unit mass.
    pub fn custom(
        eta: f64,
        density: ScalarFn,
        antiderivative: Option<ScalarFn>,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_eta(eta)?;
        let kernel = Self {
            eta,
            density,
            antiderivative,
            label: label.into(),
        };
        kernel.validate()?;
        Ok(kernel)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn antiderivative(&self) -> Option<&ScalarFn> {
        self.antiderivative.as_ref()
    }

    /// `ω_η(x)`, zero outside the support.
    #[inline]
    pub fn omega(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.eta {
            0.0
        } else {
            (self.density)(x)
        }
    }

    /// Sampled check of `ω ≥ 0`, `ω' ≤ 0` and `∫ω = 1`.
    pub fn validate(&self) -> Result<()> {
        const SAMPLES: usize = 10_000;
        let h = self.eta / SAMPLES as f64;
        let mut prev = self.omega(0.0);
        let scale = prev.abs().max(1.0 / self.eta);
        for i in 0..=SAMPLES {
            let x = (i as f64 * h).min(self.eta);
            let w = self.omega(x);
            if !w.is_finite() || w < -1e-12 * scale {
                return Err(SolverError::InvalidParameter(format!(
                    "kernel {} is negative or non-finite at x={x}: {w}",
                    self.label
                )));
            }
            if w > prev + 1e-12 * scale {
                return Err(SolverError::InvalidParameter(format!(
                    "kernel {} increases at x={x}",
                    self.label
                )));
            }
            prev = w;
        }
        let mass = match &self.antiderivative {
            Some(w) => w(self.eta) - w(0.0),
            None => {
                // composite Simpson on the sample grid
                let mut acc = self.omega(0.0) + self.omega(self.eta);
                for i in 1..SAMPLES {
                    let c = if i % 2 == 1 { 4.0 } else { 2.0 };
                    acc += c * self.omega(i as f64 * h);
                }
                acc * h / 3.0
            }
        };
        if (mass - 1.0).abs() > 1e-8 {
            return Err(SolverError::InvalidParameter(format!(
                "kernel {} has mass {mass}, expected 1",
                self.label
            )));
        }
        Ok(())
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(SolverError::InvalidParameter(format!(
            "kernel support eta must be positive, got {eta}"
        )))
    }
}

/// Curvature of `g`; selects where the extrema of `g` over an interval lie.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxShape {
    Convex,
    Concave,
}

/// Sup norms of `g, g', v, v'` over an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    pub g: f64,
    pub g_prime: f64,
    pub v: f64,
    pub v_prime: f64,
}

/// Scalar flux `F(ρ, R) = g(ρ) v(R)`.
#[derive(Clone)]
pub struct ScalarModel {
    name: String,
    g: ScalarFn,
    g_prime: ScalarFn,
    v: ScalarFn,
    v_prime: ScalarFn,
    shape: FluxShape,
    g_monotone_nonneg: bool,
    critical_point: Option<f64>,
    closed_norms: Option<NormFn>,
}

impl fmt::Debug for ScalarModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarModel")
            .field("name", &self.name)
            .field("shape", &self.shape)
            .field("g_monotone_nonneg", &self.g_monotone_nonneg)
            .finish()
    }
}

impl ScalarModel {
    pub fn new(
        name: impl Into<String>,
        g: ScalarFn,
        g_prime: ScalarFn,
        v: ScalarFn,
        v_prime: ScalarFn,
        shape: FluxShape,
    ) -> Self {
        Self {
            name: name.into(),
            g,
            g_prime,
            v,
            v_prime,
            shape,
            g_monotone_nonneg: false,
            critical_point: None,
            closed_norms: None,
        }
    }

    /// Declares `g' ≥ 0` on the working interval.
    pub fn with_monotone_nonneg(mut self, flag: bool) -> Self {
        self.g_monotone_nonneg = flag;
        self
    }

    /// Known root of `g'`, used by the Godunov flux.
    pub fn with_critical_point(mut self, x: f64) -> Self {
        self.critical_point = Some(x);
        self
    }

    pub fn with_norms(mut self, norms: NormFn) -> Self {
        self.closed_norms = Some(norms);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> FluxShape {
        self.shape
    }

    pub fn g_monotone_nonneg(&self) -> bool {
        self.g_monotone_nonneg
    }

    #[inline]
    pub fn g(&self, rho: f64) -> f64 {
        (self.g)(rho)
    }

    #[inline]
    pub fn g_prime(&self, rho: f64) -> f64 {
        (self.g_prime)(rho)
    }

    #[inline]
    pub fn v(&self, r: f64) -> f64 {
        (self.v)(r)
    }

    #[inline]
    pub fn v_prime(&self, r: f64) -> f64 {
        (self.v_prime)(r)
    }

    /// `F(ρ, R) = g(ρ) v(R)`.
    #[inline]
    pub fn flux(&self, rho: f64, r: f64) -> f64 {
        self.g(rho) * self.v(r)
    }

    /// Root of `g'` inside `[lo, hi]`, if `g'` changes sign there.
    pub fn critical_point_in(&self, lo: f64, hi: f64) -> Option<f64> {
        if let Some(c) = self.critical_point {
            return (c >= lo && c <= hi).then_some(c);
        }
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (self.g_prime(a), self.g_prime(b));
        if fa == 0.0 {
            return Some(a);
        }
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() == fb.signum() {
            return None;
        }
        let sa = fa.signum();
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.g_prime(m);
            if fm == 0.0 {
                return Some(m);
            }
            if fm.signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }

    /// Norm bounds over `interval`: closed form when supplied, otherwise
    /// the sampled supremum inflated by 1%.
    pub fn norms(&self, interval: Interval) -> NormBounds {
        match &self.closed_norms {
            Some(f) => f(interval),
            None => self.sampled_norms(interval, 10_000, 1.01),
        }
    }

    pub fn sampled_norms(&self, interval: Interval, samples: usize, inflate: f64) -> NormBounds {
        let mut out = NormBounds {
            g: 0.0,
            g_prime: 0.0,
            v: 0.0,
            v_prime: 0.0,
        };
        let n = samples.max(2);
        for i in 0..n {
            let x = interval.lo + interval.width() * i as f64 / (n - 1) as f64;
            out.g = out.g.max(self.g(x).abs());
            out.g_prime = out.g_prime.max(self.g_prime(x).abs());
            out.v = out.v.max(self.v(x).abs());
            out.v_prime = out.v_prime.max(self.v_prime(x).abs());
        }
        out.g *= inflate;
        out.g_prime *= inflate;
        out.v *= inflate;
        out.v_prime *= inflate;
        out
    }

    /// Sampled check of `g ≥ 0`, `v ≥ 0`, `v' ≤ 0` and, when declared,
    /// `g' ≥ 0` on `interval`.
    pub fn check_hypotheses(&self, interval: Interval) -> Result<()> {
        const SAMPLES: usize = 1000;
        for i in 0..=SAMPLES {
            let x = interval.lo + interval.width() * i as f64 / SAMPLES as f64;
            let checks = [
                (self.g(x) >= -1e-14, "g >= 0"),
                (self.v(x) >= -1e-14, "v >= 0"),
                (self.v_prime(x) <= 1e-14, "v' <= 0"),
                (
                    !self.g_monotone_nonneg || self.g_prime(x) >= -1e-14,
                    "g' >= 0",
                ),
            ];
            for (ok, what) in checks {
                if !ok {
                    return Err(SolverError::DomainViolation(format!(
                        "model {} violates {what} at rho={x} on {interval}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `N` scalar components coupled only through an optional source.
///
/// Component `k` is transported with `g_k(ρ_k) v_k(ω ∗ ρ_k)`.
#[derive(Clone)]
pub struct SystemModel {
    components: Vec<ScalarModel>,
    source: Option<SourceFn>,
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("components", &self.components)
            .field("source", &self.source.is_some())
            .finish()
    }
}

impl SystemModel {
    pub fn new(components: Vec<ScalarModel>, source: Option<SourceFn>) -> Result<Self> {
        if components.is_empty() {
            return Err(SolverError::InvalidParameter(
                "system needs at least one component".into(),
            ));
        }
        Ok(Self { components, source })
    }

    pub fn scalar(model: ScalarModel) -> Self {
        Self {
            components: vec![model],
            source: None,
        }
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, k: usize) -> &ScalarModel {
        &self.components[k]
    }

    pub fn components(&self) -> &[ScalarModel] {
        &self.components
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    /// Evaluates the source into `out`; zero when there is none.
    #[inline]
    pub fn source(&self, rho: &[f64], r: &[f64], out: &mut [f64]) {
        match &self.source {
            Some(s) => s(rho, r, out),
            None => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }
}

/// Cell averages per component at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    /// `values[k][j]`: component `k`, cell `j`.
    pub values: Vec<Vec<f64>>,
}

impl State {
    pub fn new(t: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        let state = Self { t, values };
        if state.values.is_empty() {
            return Err(SolverError::InvalidParameter(
                "state has no components".into(),
            ));
        }
        let n = state.values[0].len();
        if state.values.iter().any(|row| row.len() != n) {
            return Err(SolverError::InvalidParameter(
                "state components have different lengths".into(),
            ));
        }
        Ok(state)
    }

    pub fn n_components(&self) -> usize {
        self.values.len()
    }

    pub fn n_cells(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|x| x.is_finite())
    }

    /// `Δx Σ_j ρ_{k,j}` per component.
    pub fn masses(&self, dx: f64) -> Vec<f64> {
        self.values.iter().map(|row| dx * row.iter().sum::<f64>()).collect()
    }
}

/// A piece `value · χ_[start, end]` of piecewise-constant initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

/// Initial datum for one component.
#[derive(Clone)]
pub enum InitialData {
    Smooth(ScalarFn),
    /// `background` everywhere except on the (disjoint) pieces.
    PiecewiseConstant { background: f64, pieces: Vec<Piece> },
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Smooth(_) => f.write_str("Smooth(..)"),
            InitialData::PiecewiseConstant { background, pieces } => f
                .debug_struct("PiecewiseConstant")
                .field("background", background)
                .field("pieces", pieces)
                .finish(),
        }
    }
}

impl InitialData {
    pub fn smooth(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        InitialData::Smooth(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialData::Smooth(f) => f(x),
            InitialData::PiecewiseConstant { background, pieces } => pieces
                .iter()
                .find(|p| x >= p.start && x <= p.end)
                .map_or(*background, |p| p.value),
        }
    }
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Cell averages of the initial data: 5-point Gauss–Legendre per cell for
/// smooth data, exact overlap lengths for piecewise-constant data.
pub fn project_initial_data(data: &[InitialData], grid: &Grid) -> Result<State> {
    if data.is_empty() {
        return Err(SolverError::InvalidParameter(
            "no initial data supplied".into(),
        ));
    }
    let dx = grid.dx();
    let values = data
        .iter()
        .map(|datum| {
            (0..grid.n_cells())
                .map(|j| {
                    let a = grid.x_min() + j as f64 * dx;
                    let b = a + dx;
                    match datum {
                        InitialData::Smooth(f) => {
                            let mid = grid.center(j);
                            0.5 * GAUSS5_NODES
                                .iter()
                                .zip(GAUSS5_WEIGHTS)
                                .map(|(&xi, w)| w * f(mid + 0.5 * dx * xi))
                                .sum::<f64>()
                        }
                        InitialData::PiecewiseConstant { background, pieces } => {
                            let mut avg = *background;
                            for p in pieces {
                                let overlap = (b.min(p.end) - a.max(p.start)).max(0.0);
                                avg += (p.value - background) * overlap / dx;
                            }
                            avg
                        }
                    }
                })
                .collect()
        })
        .collect();
    State::new(0.0, values)
}

/// Quadratic kernel `3(η² − x²)/(2η³)`.
pub fn make_quadratic_kernel(eta: f64) -> Result<Kernel> {
    Kernel::quadratic(eta)
}

/// Arrhenius model: `g(ρ) = ρ(1 − ρ)`, `v(R) = exp(−R)`.
pub fn make_arrhenius_model() -> ScalarModel {
    ScalarModel::new(
        "arrhenius",
        Arc::new(|r| r * (1.0 - r)),
        Arc::new(|r| 1.0 - 2.0 * r),
        Arc::new(|r: f64| (-r).exp()),
        Arc::new(|r: f64| -(-r).exp()),
        FluxShape::Concave,
    )
    .with_critical_point(0.5)
    .with_norms(Arc::new(|i: Interval| {
        let g_end = (i.lo * (1.0 - i.lo)).abs().max((i.hi * (1.0 - i.hi)).abs());
        let g = if i.contains(0.5, 0.0) { g_end.max(0.25) } else { g_end };
        NormBounds {
            g,
            g_prime: (1.0 - 2.0 * i.lo).abs().max((1.0 - 2.0 * i.hi).abs()),
            v: (-i.lo).exp(),
            v_prime: (-i.lo).exp(),
        }
    }))
}

/// Speed law of the multilane model, `v(R) = 1 − R²`.
pub fn multilane_speed(r: f64) -> f64 {
    1.0 - r * r
}

/// Lane-change rate `S(ρ¹, ρ², R¹, R²)`: positive values move mass from
/// lane 1 to lane 2.
pub fn multilane_exchange(rho1: f64, rho2: f64, r1: f64, r2: f64) -> f64 {
    let (v1, v2) = (multilane_speed(r1), multilane_speed(r2));
    let dv = v2 - v1;
    if v2 >= v1 {
        dv * rho1 * (1.0 - rho2)
    } else {
        dv * rho2 * (1.0 - rho1)
    }
}

fn multilane_lane() -> ScalarModel {
    ScalarModel::new(
        "multilane-lane",
        Arc::new(|r| r),
        Arc::new(|_| 1.0),
        Arc::new(multilane_speed),
        Arc::new(|r| -2.0 * r),
        FluxShape::Concave,
    )
    .with_monotone_nonneg(true)
    .with_norms(Arc::new(|i: Interval| {
        let v_end = multilane_speed(i.lo).abs().max(multilane_speed(i.hi).abs());
        NormBounds {
            g: i.abs_max(),
            g_prime: 1.0,
            v: if i.contains(0.0, 0.0) { v_end.max(1.0) } else { v_end },
            v_prime: 2.0 * i.abs_max(),
        }
    }))
}

/// Two-lane model: `g(ρ) = ρ`, `v(R) = 1 − R²` per lane, with `−S` on
/// lane 1 and `+S` on lane 2.
pub fn make_multilane_model() -> SystemModel {
    SystemModel {
        components: vec![multilane_lane(), multilane_lane()],
        source: Some(Arc::new(|rho: &[f64], r: &[f64], out: &mut [f64]| {
            let s = multilane_exchange(rho[0], rho[1], r[0], r[1]);
            out[0] = -s;
            out[1] = s;
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.center(0), -0.75);
        assert_eq!(g.interface(0), -0.5);
        assert_eq!(g.wrap(-1), 3);
        assert_eq!(g.wrap(5), 1);
        assert!(Grid::new(1.0, 1.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 0).is_err());
        assert_eq!(Grid::from_level(0).unwrap().n_cells(), 40);
        assert_eq!(Grid::from_level(5).unwrap().dx(), 1.0 / 640.0);
    }

    #[test]
    fn quadratic_kernel_values() {
        let k = make_quadratic_kernel(0.2).unwrap();
        assert!((k.omega(0.0) - 7.5).abs() < 1e-13);
        assert_eq!(k.omega(0.2), 0.0);
        assert_eq!(k.omega(0.3), 0.0);
        let w = k.antiderivative().unwrap();
        assert!((w(0.2) - w(0.0) - 1.0).abs() <= 1e-15);
        let k1 = make_quadratic_kernel(1.0).unwrap();
        assert!((k1.omega(0.5) - 1.125).abs() < 1e-15);
        k.validate().unwrap();
        assert!(make_quadratic_kernel(0.0).is_err());
        assert!(make_quadratic_kernel(-1.0).is_err());
    }

    #[test]
    fn custom_kernel_validation() {
        let increasing: ScalarFn = Arc::new(|x| 2.0 * x);
        assert!(Kernel::custom(1.0, increasing, None, "ramp").is_err());
        let unnormalised: ScalarFn = Arc::new(|_| 2.0);
        assert!(Kernel::custom(1.0, unnormalised, None, "heavy").is_err());
        let linear: ScalarFn = Arc::new(|x| 2.0 * (1.0 - x));
        Kernel::custom(1.0, linear, None, "linear").unwrap();
    }

    #[test]
    fn arrhenius_values() {
        let m = make_arrhenius_model();
        assert_eq!(m.g(0.5), 0.25);
        assert_eq!(m.v(0.0), 1.0);
        assert!((m.g_prime(0.2) - 0.6).abs() < 1e-15);
        assert_eq!(m.shape(), FluxShape::Concave);
        assert!(!m.g_monotone_nonneg());
        m.check_hypotheses(Interval::new(0.0, 1.0).unwrap()).unwrap();
    }

    #[test]
    fn closed_norms_dominate_samples() {
        let intervals = [(0.2, 1.0), (0.1, 0.9), (0.0, 0.4), (0.6, 0.7)];
        let models = [make_arrhenius_model(), make_multilane_model().component(0).clone()];
        for m in &models {
            for &(lo, hi) in &intervals {
                let i = Interval::new(lo, hi).unwrap();
                let closed = m.norms(i);
                let sampled = m.sampled_norms(i, 10_000, 1.0);
                assert!(closed.g >= sampled.g - 1e-15, "{m:?} {i}");
                assert!(closed.g_prime >= sampled.g_prime - 1e-15);
                assert!(closed.v >= sampled.v - 1e-15);
                assert!(closed.v_prime >= sampled.v_prime - 1e-15);
            }
        }
    }

    #[test]
    fn multilane_source_cases() {
        assert_eq!(multilane_exchange(0.3, 0.3, 0.4, 0.4), 0.0);
        let s = multilane_exchange(0.5, 0.2, 0.8, 0.2);
        assert!((s - 0.24).abs() < 1e-15);
        assert_eq!(multilane_exchange(0.0, 0.7, 0.5, 0.1), 0.0);
        let m = make_multilane_model();
        let mut out = [0.0; 2];
        m.source(&[0.5, 0.2], &[0.8, 0.2], &mut out);
        assert_eq!(out[0], -out[1]);
    }

    #[test]
    fn projection_of_simple_data() {
        let grid = Grid::new(-1.0, 1.0, 4).unwrap();
        let c = project_initial_data(&[InitialData::smooth(|_| 0.3)], &grid).unwrap();
        assert!(c.values[0].iter().all(|&v| (v - 0.3).abs() < 1e-15));
        let ind = InitialData::PiecewiseConstant {
            background: 0.0,
            pieces: vec![Piece { start: 0.0, end: 0.5, value: 1.0 }],
        };
        let s = project_initial_data(&[ind], &grid).unwrap();
        assert_eq!(s.values[0], vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn projection_of_sine_matches_closed_form() {
        use std::f64::consts::PI;
        let grid = Grid::new(-1.0, 1.0, 40).unwrap();
        let s = project_initial_data(
            &[InitialData::smooth(|x| 0.5 + 0.4 * (PI * x).sin())],
            &grid,
        )
        .unwrap();
        let anti = |x: f64| 0.5 * x - 0.4 / PI * (PI * x).cos();
        let dx = grid.dx();
        let exact0 = (anti(-1.0 + dx) - anti(-1.0)) / dx;
        assert!((s.values[0][0] - exact0).abs() < 1e-14);
        // total mass equals the exact integral over the period
        let mass = s.masses(dx)[0];
        assert!((mass - (anti(1.0) - anti(-1.0))).abs() < 1e-10);
    }

    #[test]
    fn projection_of_misaligned_indicator_is_exact() {
        let grid = Grid::new(-1.0, 1.0, 100).unwrap();
        let data = InitialData::PiecewiseConstant {
            background: 0.2,
            pieces: vec![
                Piece { start: -0.5, end: 0.0, value: 1.0 },
                Piece { start: 0.5, end: 0.75, value: 0.8 },
            ],
        };
        let s = project_initial_data(&[data], &grid).unwrap();
        let exact = 0.2 * 2.0 + 0.8 * 0.5 + 0.6 * 0.25;
        assert!((s.masses(grid.dx())[0] - exact).abs() < 1e-13);
        // the cell straddling 0.75 gets half of each value
        assert!((s.values[0][87] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn state_shape_checks() {
        assert!(State::new(0.0, vec![]).is_err());
        assert!(State::new(0.0, vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        let s = State::new(0.0, vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(s.masses(0.5), vec![1.5]);
    }
}
