//! Straight-line re-derivation of one KT step for the scalar Arrhenius law
//! `F(ρ, R) = ρ(1 − ρ) e^{−R}` with the quadratic look-ahead kernel, on a
//! periodic grid with `η/Δx ∈ ℕ`. Nothing here calls into the solver, so
//! comparisons against `kt_step` test the pipeline formula by formula.

#![allow(dead_code)]

pub struct KtOracle {
    pub dt: f64,
    pub w_mid: Vec<f64>,
    pub w_smooth: Vec<f64>,
    pub next: Vec<f64>,
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() <= b.abs() {
        a
    } else {
        b
    }
}

fn g(r: f64) -> f64 {
    r * (1.0 - r)
}

fn dg(r: f64) -> f64 {
    1.0 - 2.0 * r
}

fn v(r: f64) -> f64 {
    (-r).exp()
}

fn flux(rho: f64, conv: f64) -> f64 {
    g(rho) * v(conv)
}

/// One step of size `safety · Δx / (2 max|c|)` on `[x_min, x_min + n·dx)`.
pub fn kt_oracle_step(rho: &[f64], dx: f64, eta: f64, safety: f64) -> KtOracle {
    let n = rho.len();
    let ne = (eta / dx).round() as usize;
    let at = |i: usize| rho[i % n];
    let omega = |x: f64| 1.5 * (eta * eta - x * x) / (eta * eta * eta);
    let big_w = |x: f64| (3.0 * eta * eta * x - x * x * x) / (2.0 * eta * eta * eta);

    // slopes and one-sided values at x_{j+1/2}
    let s: Vec<f64> = (0..n)
        .map(|j| minmod((rho[j] - at(j + n - 1)) / dx, (at(j + 1) - rho[j]) / dx))
        .collect();
    let sl = |i: usize| s[i % n];
    let gamma: Vec<f64> = (0..ne)
        .map(|k| big_w((k as f64 + 1.0) * dx) - big_w(k as f64 * dx))
        .collect();
    let r_iface: Vec<f64> = (0..n)
        .map(|j| (0..ne).map(|k| gamma[k] * at(j + k + 1)).sum())
        .collect();
    let mut cp = vec![0.0; n];
    let mut cm = vec![0.0; n];
    for j in 0..n {
        let minus = rho[j] + 0.5 * dx * s[j];
        let plus = at(j + 1) - 0.5 * dx * sl(j + 1);
        let vr = v(r_iface[j]);
        cp[j] = dg(minus).max(dg(plus)).max(0.0) * vr;
        cm[j] = dg(minus).min(dg(plus)).min(0.0) * vr;
    }
    let max_speed = (0..n).map(|j| cp[j].max(-cm[j])).fold(0.0, f64::max);
    let dt = safety * dx / (2.0 * max_speed);

    // values at the split points
    let mut rl = vec![0.0; n];
    let mut rr = vec![0.0; n];
    for j in 0..n {
        rl[j] = rho[j] + s[j] * (0.5 * dx + dt * cm[j]);
        rr[j] = at(j + 1) - sl(j + 1) * (0.5 * dx - dt * cp[j]);
    }

    // shifted convolutions by strip/midpoint quadrature
    let mut cl = vec![0.0; n];
    let mut cr = vec![0.0; n];
    for j in 0..n {
        let a = cm[j] * dt;
        let mut left = -a * omega(-a / 2.0) * (rho[j] + (dx + a) / 2.0 * s[j]);
        for l in 0..ne - 1 {
            left += dx * omega((l as f64 + 0.5) * dx - a) * at(j + l + 1);
        }
        left += (dx + a)
            * omega(((2 * ne - 1) as f64 * dx - a) / 2.0)
            * (at(j + ne) + a / 2.0 * sl(j + ne));
        cl[j] = left;

        let b = cp[j] * dt;
        let mut right = (dx - b) * omega((dx - b) / 2.0) * (at(j + 1) + b / 2.0 * sl(j + 1));
        for l in 0..ne - 1 {
            right += dx * omega((l as f64 + 1.5) * dx - b) * at(j + l + 2);
        }
        right += b
            * omega((2.0 * ne as f64 * dx - b) / 2.0)
            * (at(j + ne + 1) - (dx - b) / 2.0 * sl(j + ne + 1));
        cr[j] = right;
    }

    // flux slopes along each family; spacing is the distance between
    // neighbouring split points of that family
    let fl: Vec<f64> = (0..n).map(|j| flux(rl[j], cl[j])).collect();
    let fr: Vec<f64> = (0..n).map(|j| flux(rr[j], cr[j])).collect();
    let mut fxl = vec![0.0; n];
    let mut fxr = vec![0.0; n];
    for j in 0..n {
        let (p, q) = ((j + n - 1) % n, (j + 1) % n);
        fxl[j] = minmod(
            (fl[j] - fl[p]) / (dx - cm[p] * dt + cm[j] * dt),
            (fl[q] - fl[j]) / (dx - cm[j] * dt + cm[q] * dt),
        );
        fxr[j] = minmod(
            (fr[j] - fr[p]) / (dx - cp[p] * dt + cp[j] * dt),
            (fr[q] - fr[j]) / (dx - cp[j] * dt + cp[q] * dt),
        );
    }

    // time derivatives of the convolution at the split points
    let mut dcl = vec![0.0; n];
    let mut dcr = vec![0.0; n];
    for j in 0..n {
        let a = cm[j] * dt;
        let mut d = a * omega(-a / 2.0) * fxl[j];
        for l in 0..ne - 1 {
            d -= dx * omega((l as f64 + 0.5) * dx - a) * fxl[(j + l + 1) % n];
        }
        d -= (dx + a) * omega(((2 * ne - 1) as f64 * dx - a) / 2.0) * fxl[(j + ne) % n];
        dcl[j] = d;

        let b = cp[j] * dt;
        let mut d = -(dx - b) * omega((dx - b) / 2.0) * fxr[j];
        for l in 0..ne - 1 {
            d -= dx * omega((l as f64 + 1.5) * dx - b) * fxr[(j + l + 1) % n];
        }
        d -= b * omega((2.0 * ne as f64 * dx - b) / 2.0) * fxr[(j + ne) % n];
        dcr[j] = d;
    }

    // half-step fluxes
    let fhl: Vec<f64> = (0..n)
        .map(|j| flux(rl[j] - dt / 2.0 * fxl[j], cl[j] + dt / 2.0 * dcl[j]))
        .collect();
    let fhr: Vec<f64> = (0..n)
        .map(|j| flux(rr[j] - dt / 2.0 * fxr[j], cr[j] + dt / 2.0 * dcr[j]))
        .collect();

    // intermediate averages
    let mut w_mid = vec![0.0; n];
    let mut w_smooth = vec![0.0; n];
    for j in 0..n {
        w_mid[j] = (rr[j] * cp[j] - sl(j + 1) / 2.0 * cp[j] * cp[j] * dt - rl[j] * cm[j]
            + s[j] / 2.0 * cm[j] * cm[j] * dt
            - (fhr[j] - fhl[j]))
            / (cp[j] - cm[j]);
    }
    for j in 0..n {
        let p = (j + n - 1) % n;
        w_smooth[j] = rho[j] + dt / 2.0 * (cp[p] + cm[j]) * s[j]
            - dt / (dx - dt * (cp[p] - cm[j])) * (fhl[j] - fhr[p]);
    }

    // projection slopes from full-step endpoint values
    let mut sp = vec![0.0; n];
    for j in 0..n {
        let half = (cp[j] - cm[j]) * dt / 2.0;
        let end_l = rl[j] - dt * fxl[j];
        let end_r = rr[j] - dt * fxr[j];
        let cand = minmod((w_mid[j] - end_l) / half, (end_r - w_mid[j]) / half);
        let k = (j + 1) % n;
        let lo = w_smooth[j].min(w_mid[j]).min(w_smooth[k]);
        let hi = w_smooth[j].max(w_mid[j]).max(w_smooth[k]);
        let (e0, e1) = (w_mid[j] - cand * half, w_mid[j] + cand * half);
        let inside = |e: f64| e >= lo && e <= hi;
        sp[j] = if inside(e0) && inside(e1) { cand } else { 0.0 };
    }

    // projection back onto the grid
    let next = (0..n)
        .map(|j| {
            let p = (j + n - 1) % n;
            w_smooth[j]
                + dt / dx * (cp[p] * (w_mid[p] - w_smooth[j]) - cm[j] * (w_mid[j] - w_smooth[j]))
                + dt * dt / (2.0 * dx) * (sp[j] * cp[j] * cm[j] - sp[p] * cm[p] * cp[p])
        })
        .collect();

    KtOracle {
        dt,
        w_mid,
        w_smooth,
        next,
    }
}

/// Eight cells with both signs of `g'` and no flat interfaces.
pub fn oracle_initial_data() -> Vec<f64> {
    vec![0.21, 0.35, 0.62, 0.88, 0.74, 0.55, 0.41, 0.18]
}
