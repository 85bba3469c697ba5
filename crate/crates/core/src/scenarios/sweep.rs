use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::{ScenarioError, ScenarioInstance};
use crate::analysis::measure_poa;
use crate::equilibrium::SolverConfig;
use crate::output::fmt12;

pub const SWEEP_CSV_HEADER: &str = "r,cost_eq,cost_opt,poa,onstreet_mass,garage_mass";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub cost_eq: f64,
    pub cost_opt: f64,
    pub poa: f64,
    /// Equilibrium flow on the on-street edges.
    pub onstreet_mass: f64,
    pub garage_mass: f64,
    /// Set when this point failed; the numeric fields are then NaN.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, r: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|row| row.r == r)
    }

    /// One line per row; failed rows print `NaN` fields.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt12(row.r),
                fmt12(row.cost_eq),
                fmt12(row.cost_opt),
                fmt12(row.poa),
                fmt12(row.onstreet_mass),
                fmt12(row.garage_mass)
            )?;
        }
        Ok(())
    }
}

fn sweep_row<F>(build: &F, r: f64, config: &SolverConfig) -> Result<SweepRow, String>
where
    F: Fn(f64) -> Result<ScenarioInstance<f64>, ScenarioError>,
{
    let s = build(r).map_err(|e| e.to_string())?;
    let sample = measure_poa(&s.instance, config).map_err(|e| e.to_string())?;
    let mass = |edges: &[usize]| edges.iter().map(|&e| *sample.equilibrium.edge_flow(e)).sum();
    Ok(SweepRow {
        r,
        cost_eq: sample.cost_equilibrium,
        cost_opt: sample.cost_optimum,
        poa: sample.poa,
        onstreet_mass: mass(&s.onstreet_edges),
        garage_mass: mass(&s.garage_edges),
        error: None,
    })
}

/// Rebuilds and solves the instance at every `r` in parallel. Failing
/// points are kept as rows with the error recorded.
pub fn sweep_uncertainty<F>(build: F, r_grid: &[f64], config: &SolverConfig) -> Result<SweepResult, ScenarioError>
where
    F: Fn(f64) -> Result<ScenarioInstance<f64>, ScenarioError> + Sync,
{
    if r_grid.is_empty() {
        return Err(ScenarioError::InvalidGrid("empty r grid".into()));
    }
    if r_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(ScenarioError::InvalidGrid("r values must be positive".into()));
    }
    if r_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScenarioError::InvalidGrid("r values must be strictly increasing".into()));
    }
    let rows = r_grid
        .par_iter()
        .map(|&r| {
            sweep_row(&build, r, config).unwrap_or_else(|e| SweepRow {
                r,
                cost_eq: f64::NAN,
                cost_opt: f64::NAN,
                poa: f64::NAN,
                onstreet_mass: f64::NAN,
                garage_mass: f64::NAN,
                error: Some(e),
            })
        })
        .collect();
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::empirical_poa;
    use crate::scenarios::{apply_parking_transform, pigou, ParkingSpec};

    #[test]
    fn grid_validation() {
        let cfg = SolverConfig::default();
        let b = |r: f64| pigou(0.5, r);
        assert!(sweep_uncertainty(b, &[], &cfg).is_err());
        assert!(sweep_uncertainty(b, &[1.0, 1.0], &cfg).is_err());
        assert!(sweep_uncertainty(b, &[0.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn single_point_matches_poa() {
        let cfg = SolverConfig::default();
        let res = sweep_uncertainty(|r| pigou(0.5, r), &[1.0], &cfg).unwrap();
        let direct = empirical_poa(&pigou(0.5, 1.0).unwrap().instance, &cfg).unwrap();
        assert!((res.rows[0].poa - direct).abs() < 1e-12);
    }

    #[test]
    fn failures_are_rows() {
        let cfg = SolverConfig::default();
        let res = sweep_uncertainty(|r| if r > 1.5 { pigou(2.0, r) } else { pigou(0.5, r) }, &[1.0, 2.0], &cfg).unwrap();
        assert!(res.rows[0].error.is_none());
        assert!(res.rows[1].error.is_some() && res.rows[1].poa.is_nan());
    }

    #[test]
    fn pigou_onstreet_mass_decreases() {
        let grid = [1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5];
        let res = sweep_uncertainty(|r| pigou(0.5, r), &grid, &SolverConfig::default()).unwrap();
        for w in res.rows.windows(2) {
            assert!(w[1].onstreet_mass <= w[0].onstreet_mass + 1e-9);
        }
        assert!(res.rows.iter().all(|row| row.poa >= 1.0 - 1e-9));
    }

    #[test]
    fn parking_shape() {
        let spec = ParkingSpec::stylized();
        let grid = [0.5, 0.75, 1.0, 1.5, 2.0, 2.5];
        let res = sweep_uncertainty(|r| apply_parking_transform(&spec.with_r(r)), &grid, &SolverConfig::default()).unwrap();
        let poa = |r| res.row(r).unwrap().poa;
        assert!(poa(0.5) > poa(1.0) && poa(1.0) > poa(2.0), "{res:?}");
        assert!(poa(2.0) <= 1.0 + 1e-3, "{res:?}");
        let rows: Vec<_> = res.rows.iter().filter(|r| r.r >= 1.0).collect();
        for w in rows.windows(2) {
            assert!(w[1].onstreet_mass <= w[0].onstreet_mass + 1e-9, "{res:?}");
        }
    }

    #[test]
    fn csv_layout() {
        let res = sweep_uncertainty(|r| pigou(0.1, r), &[3.0], &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("3,1.0625,"));
    }
}
