//! Randomized invariant checks with a reproducible seed.

use nonlocal_cu::flux::{cu_flux, godunov_flux};
use nonlocal_cu::models::{make_arrhenius_model, make_multilane_model, Interval};
use nonlocal_cu::nonlocal::compute_kernel_weights;
use nonlocal_cu::timeint::run;
use nonlocal_cu::{Grid, Kernel, Problem, Scheme, SchemeConfig, State, SystemModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::CheckArgs;
use crate::error::CliError;
use crate::settings::FileSettings;

const RUN_CELLS: usize = 40;
const RUN_SAMPLES_DIVISOR: usize = 100;

type Check = fn(&mut ChaCha8Rng, usize) -> Result<(), String>;

pub fn check(args: CheckArgs) -> Result<(), CliError> {
    let file = FileSettings::load(args.config.as_deref())?;
    let seed: u64 = file.pick(args.seed, "seed")?.unwrap_or(0);
    let samples: usize = file.pick(args.samples, "samples")?.unwrap_or(1000);
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let checks: [(&str, Check); 8] = [
        ("kernel weights sum to one", kernel_weights),
        ("model hypotheses", hypotheses),
        ("numerical flux consistency", consistency),
        ("upwind models reduce to Godunov", godunov_reduction),
        ("numerical flux monotonicity", monotonicity),
        ("lane exchange antisymmetry", antisymmetry),
        ("mass conservation", conservation),
        ("maximum principle", maximum_principle),
    ];
    println!("seed {seed}, {samples} samples per property");
    let mut failures = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        // Each check gets its own stream so results do not depend on order.
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        match f(&mut rng, samples) {
            Ok(()) => println!("PASS {name}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        return Err(CliError::ChecksFailed(failures));
    }
    Ok(())
}

fn kernel_weights(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    for _ in 0..samples {
        let eta = rng.gen_range(0.01..1.0);
        let dx = rng.gen_range(0.001..0.2);
        for kernel in [Kernel::quadratic(eta), Kernel::constant(eta)] {
            let kernel = kernel.map_err(|e| e.to_string())?;
            let w = compute_kernel_weights(&kernel, dx).map_err(|e| e.to_string())?;
            if (w.sum() - 1.0).abs() > 1e-12 {
                return Err(format!("{} eta={eta} dx={dx}: sum {}", kernel.label(), w.sum()));
            }
        }
    }
    Ok(())
}

fn hypotheses(_: &mut ChaCha8Rng, _: usize) -> Result<(), String> {
    let unit = Interval::new(0.0, 1.0).map_err(|e| e.to_string())?;
    make_arrhenius_model()
        .check_hypotheses(unit)
        .map_err(|e| format!("arrhenius: {e}"))?;
    for lane in make_multilane_model().components() {
        lane.check_hypotheses(unit)
            .map_err(|e| format!("{}: {e}", lane.name()))?;
    }
    Ok(())
}

fn consistency(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    let models = [make_arrhenius_model(), make_multilane_model().component(0).clone()];
    for _ in 0..samples {
        let (rho, r): (f64, f64) = (rng.gen(), rng.gen());
        for m in &models {
            let exact = m.flux(rho, r);
            let got = cu_flux(rho, rho, r, m);
            if (got - exact).abs() > 1e-14 * exact.abs().max(1e-300) {
                return Err(format!("{}: H({rho}, {rho}; {r}) = {got}, flux {exact}", m.name()));
            }
        }
    }
    Ok(())
}

fn godunov_reduction(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    let lane = make_multilane_model().component(0).clone();
    for _ in 0..samples {
        let (a, b, r): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let (cu, god) = (cu_flux(a, b, r, &lane), godunov_flux(a, b, r, &lane));
        if cu != god {
            return Err(format!("a={a} b={b} R={r}: central-upwind {cu}, Godunov {god}"));
        }
    }
    Ok(())
}

fn monotonicity(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    let m = make_arrhenius_model();
    let h = 1e-6;
    for _ in 0..samples {
        let (a, b, r): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let g = |x: f64, y: f64| cu_flux(x, y, r, &m) / m.v(r);
        let base = g(a, b);
        if g(a + h, b) - base < -1e-10 || g(a, b + h) - base > 1e-10 {
            return Err(format!("not monotone at a={a} b={b} R={r}"));
        }
    }
    Ok(())
}

fn antisymmetry(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    let model = make_multilane_model();
    let mut out = [0.0; 2];
    for _ in 0..samples {
        let rho: [f64; 2] = [rng.gen(), rng.gen()];
        let r: [f64; 2] = [rng.gen(), rng.gen()];
        model.source(&rho, &r, &mut out);
        if out[0] + out[1] != 0.0 {
            return Err(format!("rho={rho:?} R={r:?}: source {out:?}"));
        }
    }
    Ok(())
}

fn random_state(rng: &mut ChaCha8Rng, components: usize, lo: f64, hi: f64) -> State {
    let values = (0..components)
        .map(|_| (0..RUN_CELLS).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect();
    State::new(0.0, values).expect("random state is well formed")
}

fn problem(model: SystemModel, initial: State) -> Result<Problem, String> {
    let grid = Grid::new(-1.0, 1.0, RUN_CELLS).map_err(|e| e.to_string())?;
    let kernel = Kernel::quadratic(0.2).map_err(|e| e.to_string())?;
    Problem::new(grid, kernel, model, initial).map_err(|e| e.to_string())
}

fn run_samples(samples: usize) -> usize {
    (samples / RUN_SAMPLES_DIVISOR).max(1)
}

fn conservation(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    for _ in 0..run_samples(samples) {
        let cases = [
            (SystemModel::scalar(make_arrhenius_model()), random_state(rng, 1, 0.0, 1.0)),
            (make_multilane_model(), random_state(rng, 2, 0.0, 1.0)),
        ];
        for (model, initial) in cases {
            let p = problem(model, initial)?;
            let dx = p.grid.dx();
            let m0: f64 = p.initial.masses(dx).iter().sum();
            for scheme in Scheme::ALL {
                let result = run(&p, &SchemeConfig::new(scheme, 0.05), &[]).map_err(|e| e.to_string())?;
                let m: f64 = result.final_state().masses(dx).iter().sum();
                if (m - m0).abs() > 1e-12 * m0.max(1.0) {
                    return Err(format!("{scheme}: total mass {m0} -> {m}"));
                }
            }
        }
    }
    Ok(())
}

fn maximum_principle(rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    for _ in 0..run_samples(samples) {
        let initial = random_state(rng, 1, 0.1, 0.95);
        let lo = initial.values[0].iter().copied().fold(f64::INFINITY, f64::min);
        let hi = initial.values[0].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p = problem(SystemModel::scalar(make_arrhenius_model()), initial)?;
        for scheme in [Scheme::Cu1, Scheme::Godunov1, Scheme::Cu2] {
            let result = run(&p, &SchemeConfig::new(scheme, 0.1), &[]).map_err(|e| e.to_string())?;
            if let Some(&x) = result.final_state().values[0]
                .iter()
                .find(|&&x| x < lo - 1e-12 || x > hi + 1e-12)
            {
                return Err(format!("{scheme}: value {x} outside [{lo}, {hi}]"));
            }
        }
    }
    Ok(())
}
