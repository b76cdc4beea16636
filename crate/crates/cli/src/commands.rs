//! `solve`, `converge` and `scenarios`.

use std::io::Write;
use std::path::{Path, PathBuf};

use nonlocal_cu::output::{create_file, write_mass_log, write_report, write_solution};
use nonlocal_cu::study::convergence_study;
use nonlocal_cu::timeint::run;
use nonlocal_cu::{Scenario, ScenarioName, Scheme, SchemeConfig};

use crate::args::{ConvergeArgs, RunArgs, SolveArgs};
use crate::error::CliError;
use crate::settings::FileSettings;

const DEFAULT_OUT: &str = "out";
const DEFAULT_LEVELS: u32 = 6;
const DEFAULT_REF_LEVEL: u32 = 9;

/// Options common to `solve` and `converge` after merging the config file.
struct Common {
    scenario_name: ScenarioName,
    scenario: Scenario,
    schemes: Vec<Scheme>,
    cfl: Option<f64>,
    theta: Option<f64>,
    out: PathBuf,
}

impl Common {
    fn resolve(run: RunArgs, file: &FileSettings, default_schemes: &[Scheme]) -> Result<Self, CliError> {
        let scenario_name: ScenarioName = file
            .pick(run.scenario, "scenario")?
            .ok_or_else(|| CliError::Usage("--scenario is required (see `nlcu scenarios`)".into()))?;
        let mut scenario = Scenario::builtin(scenario_name)?;
        if let Some(t) = file.pick(run.t_final, "t_final")? {
            scenario.t_final = t;
        }
        let mut schemes = file.pick_list(run.schemes, "scheme")?;
        if schemes.is_empty() {
            schemes = default_schemes.to_vec();
        }
        let common = Self {
            scenario_name,
            scenario,
            schemes,
            cfl: file.pick(run.cfl, "cfl")?,
            theta: file.pick(run.theta, "theta")?,
            out: file
                .pick(run.out, "out")?
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        };
        for &scheme in &common.schemes {
            common.config(scheme).validate()?;
        }
        Ok(common)
    }

    fn apply(&self, mut config: SchemeConfig) -> SchemeConfig {
        if let Some(cfl) = self.cfl {
            config.cfl_safety = cfl;
        }
        if let Some(theta) = self.theta {
            config.theta = theta;
        }
        config
    }

    fn config(&self, scheme: Scheme) -> SchemeConfig {
        self.apply(SchemeConfig::new(scheme, self.scenario.t_final))
    }
}

pub fn solve(args: SolveArgs) -> Result<(), CliError> {
    let file = FileSettings::load(args.run.config.as_deref())?;
    let common = Common::resolve(args.run, &file, &[Scheme::Cu2])?;
    let level: u32 = file.pick(args.level, "n")?.unwrap_or(0);
    let cells: Option<usize> = file.pick(args.cells, "cells")?;
    let requested = file.pick_list(args.snapshots, "snapshot")?;

    let (n_cells, tag) = match cells {
        Some(c) => (c, format!("c{c}")),
        None => (common.scenario.cells_for_level(level), format!("n{level}")),
    };
    let problem = common.scenario.problem(n_cells)?;
    let t_final = common.scenario.t_final;

    // `run` returns one snapshot per distinct sorted time, ending at t_final.
    let mut times = requested.clone();
    times.push(t_final);
    times.sort_by(f64::total_cmp);
    times.dedup();

    for &scheme in &common.schemes {
        let config = common.config(scheme);
        let result = run(&problem, &config, &requested)?;
        let stem = format!("{}_{}_{}", common.scenario_name, scheme, tag);
        let header = [
            ("scenario", common.scenario_name.to_string()),
            ("scheme", scheme.to_string()),
            ("cells", n_cells.to_string()),
            ("dx", format!("{:.16e}", problem.grid.dx())),
            ("cfl", config.cfl_safety.to_string()),
            ("theta", config.theta.to_string()),
            ("t_final", t_final.to_string()),
        ];
        for (state, &t) in result.snapshots.iter().zip(&times) {
            let name = if t == t_final {
                format!("{stem}.csv")
            } else {
                format!("{stem}_t{t}.csv")
            };
            let path = common.out.join(name);
            let mut out = create_file(&path)?;
            write_solution(&mut out, &problem.grid, state, &header)?;
            out.flush()?;
        }
        let mass_path = common.out.join(format!("{stem}_mass.csv"));
        let mut out = create_file(&mass_path)?;
        write_mass_log(&mut out, &result.mass_history)?;
        out.flush()?;

        let d = &result.diagnostics;
        println!(
            "{:<9} cells={n_cells} steps={} mass drift={:.3e} excursion={:.3e} -> {}",
            scheme.name(),
            d.steps,
            d.max_total_mass_drift,
            d.max_excursion,
            display(&common.out.join(format!("{stem}.csv")))
        );
    }
    Ok(())
}

pub fn converge(args: ConvergeArgs) -> Result<(), CliError> {
    let file = FileSettings::load(args.run.config.as_deref())?;
    let common = Common::resolve(args.run, &file, &Scheme::ALL)?;
    let n_levels: u32 = file.pick(args.levels, "levels")?.unwrap_or(DEFAULT_LEVELS);
    let ref_level: u32 = file.pick(args.ref_level, "ref_level")?.unwrap_or(DEFAULT_REF_LEVEL);
    if n_levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let levels: Vec<u32> = (0..n_levels).collect();
    let report = convergence_study(
        &common.scenario,
        &common.schemes,
        &levels,
        Scheme::Cu2,
        ref_level,
        |c| common.apply(c),
    )?;

    let path = common.out.join(format!("{}_convergence.csv", common.scenario_name));
    let mut out = create_file(&path)?;
    let cfl: Vec<String> = common
        .schemes
        .iter()
        .map(|&s| format!("{s}={}", common.config(s).cfl_safety))
        .collect();
    writeln!(out, "# cfl: {}", cfl.join(","))?;
    writeln!(out, "# theta: {}", common.config(Scheme::Cu2).theta)?;
    writeln!(out, "# t_final: {}", common.scenario.t_final)?;
    write_report(&mut out, &report)?;
    out.flush()?;

    println!(
        "{}: L1 errors against cu2 at level {ref_level} ({} cells)",
        common.scenario_name,
        common.scenario.cells_for_level(ref_level)
    );
    println!("{:<9} {:>6} {:>12} {:>12} {:>7}", "scheme", "cells", "dx", "L1 error", "rate");
    for row in &report.rows {
        let rate = row.rate.map_or_else(|| "-".to_string(), |r| format!("{r:.3}"));
        println!(
            "{:<9} {:>6} {:>12.4e} {:>12.4e} {:>7}",
            row.scheme.name(),
            common.scenario.cells_for_level(row.level),
            row.dx,
            row.l1_error,
            rate
        );
    }
    println!("report written to {}", display(&path));
    Ok(())
}

pub fn scenarios() {
    for name in ScenarioName::ALL {
        println!("{:<24} {}", name.as_str(), name.description());
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}
