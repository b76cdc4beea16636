//! CSV writers for solutions, mass logs and convergence reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::models::{Grid, State};
use crate::study::ConvergenceReport;
use crate::timeint::MassRecord;

/// `x,rho_1,…,rho_N` per cell, with `#` header comments for metadata.
pub fn write_solution(
    mut out: impl Write,
    grid: &Grid,
    state: &State,
    header: &[(&str, String)],
) -> Result<()> {
    for (k, v) in header {
        writeln!(out, "# {k}: {v}")?;
    }
    writeln!(out, "# t: {:.16e}", state.t)?;
    let cols: Vec<String> = (1..=state.n_components()).map(|k| format!("rho_{k}")).collect();
    writeln!(out, "x,{}", cols.join(","))?;
    for j in 0..grid.n_cells() {
        write!(out, "{:.16e}", grid.center(j))?;
        for comp in &state.values {
            write!(out, ",{:.16e}", comp[j])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// `step,t,dt,mass_1[,…,mass_N,mass_total]`; the total column only
/// appears for systems.
pub fn write_mass_log(mut out: impl Write, history: &[MassRecord]) -> Result<()> {
    let n = history.first().map_or(0, |r| r.masses.len());
    let mut cols: Vec<String> = (1..=n).map(|k| format!("mass_{k}")).collect();
    if n > 1 {
        cols.push("mass_total".into());
    }
    writeln!(out, "step,t,dt,{}", cols.join(","))?;
    for r in history {
        write!(out, "{},{:.16e},{:.16e}", r.step, r.t, r.dt)?;
        for m in &r.masses {
            write!(out, ",{m:.16e}")?;
        }
        if n > 1 {
            write!(out, ",{:.16e}", r.masses.iter().sum::<f64>())?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// `scheme,n,dx,l1_error,rate`; the first level of each scheme has an
/// empty rate.
pub fn write_report(mut out: impl Write, report: &ConvergenceReport) -> Result<()> {
    writeln!(out, "# scenario: {}", report.scenario)?;
    writeln!(
        out,
        "# reference: {} at level {}",
        report.reference_scheme, report.reference_level
    )?;
    writeln!(out, "scheme,n,dx,l1_error,rate")?;
    for r in &report.rows {
        let rate = r.rate.map_or(String::new(), |x| format!("{x:.4}"));
        writeln!(
            out,
            "{},{},{:.6e},{:.6e},{}",
            r.scheme, r.level, r.dx, r.l1_error, rate
        )?;
    }
    Ok(())
}

/// Opens `path` for buffered writing, creating parent directories.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::ConvergenceRow;
    use crate::timeint::Scheme;

    #[test]
    fn solution_csv_round_trips_values() {
        let grid = Grid::new(0.0, 1.0, 2).unwrap();
        let state = State::new(0.5, vec![vec![0.1, 0.2], vec![0.3, 1.0 / 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_solution(&mut buf, &grid, &state, &[("scheme", "kt".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "x,rho_1,rho_2");
        let last: Vec<f64> = rows[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(last, vec![0.75, 0.2, 1.0 / 3.0]);
        assert!(text.contains("# scheme: kt"));
    }

    #[test]
    fn report_and_mass_log_format() {
        let report = ConvergenceReport {
            scenario: "s".into(),
            reference_scheme: Scheme::Cu2,
            reference_level: 3,
            rows: vec![
                ConvergenceRow { scheme: Scheme::Kt, level: 0, dx: 0.05, l1_error: 1e-3, rate: None },
                ConvergenceRow { scheme: Scheme::Kt, level: 1, dx: 0.025, l1_error: 2.5e-4, rate: Some(2.0) },
            ],
        };
        let mut buf = Vec::new();
        write_report(&mut buf, &report).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("scheme,n,dx,l1_error,rate\nkt,0,5.000000e-2,1.000000e-3,\n"));
        assert!(text.contains("kt,1,2.500000e-2,2.500000e-4,2.0000"));
        let mut buf = Vec::new();
        write_mass_log(&mut buf, &[MassRecord { step: 0, t: 0.0, dt: 0.0, masses: vec![1.0, 2.0] }]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,t,dt,mass_1,mass_2,mass_total\n0,"));
        assert!(text.trim_end().ends_with("3.0000000000000000e0"));
    }
}
