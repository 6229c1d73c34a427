//! Trajectory CSV and JSON run reports.
//!
//! CSV columns, in order: `t`, `q0..`, `v0..`, `p0..`, `lambda0..`, `E`,
//! `phi_residual`, `dirac_residual`. Values are written with 17 significant
//! digits so identical runs give byte-identical files.

use std::io::{self, Write};

use serde::Serialize;

use crate::dynamics::{energy_series, EquivalenceReport, InitialData, SolverConfig, Trajectory};
use crate::error::Result;
use crate::scalar::Real;
use crate::system::SystemSpec;

pub fn csv_header(n: usize, m: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for prefix in ["q", "v", "p"] {
        cols.extend((0..n).map(|i| format!("{prefix}{i}")));
    }
    cols.extend((0..m).map(|i| format!("lambda{i}")));
    cols.extend(["E", "phi_residual", "dirac_residual"].map(String::from));
    cols
}

fn fmt<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

pub fn write_csv<T: Real>(traj: &Trajectory<T>, out: &mut impl Write) -> io::Result<()> {
    let (n, m) = traj.states.first().map(|s| s.dims()).unwrap_or((0, 0));
    writeln!(out, "{}", csv_header(n, m).join(","))?;
    for ((t, s), d) in traj.times.iter().zip(&traj.states).zip(&traj.diagnostics) {
        let fields: Vec<String> = std::iter::once(*t)
            .chain(s.q.iter().copied())
            .chain(s.v.iter().copied())
            .chain(s.p.iter().copied())
            .chain(s.lambda.iter().copied())
            .chain([d.energy, d.constraint_residual, d.dirac_residual])
            .map(fmt)
            .collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub system: String,
    pub mode: &'static str,
    pub integrator: &'static str,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub aggregation: &'static str,
    pub q0: Vec<f64>,
    pub v0: Vec<f64>,
    pub lambda0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumRow {
    pub index: usize,
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    pub max_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conservation {
    pub energy_initial: f64,
    pub energy_final: f64,
    pub energy_max_drift: f64,
    pub max_constraint_residual: f64,
    pub max_dirac_residual: f64,
    pub momenta: Vec<MomentumRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceMaxima {
    pub direct: f64,
    pub bar: f64,
    pub hat: f64,
    pub pairwise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalState {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub rows: usize,
    pub conservation: Conservation,
    pub equivalence: Option<EquivalenceMaxima>,
    #[serde(rename = "final")]
    pub last: FinalState,
    pub warnings: Vec<String>,
}

fn lossy<T: Real>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.to_f64_lossy()).collect()
}

impl RunReport {
    pub fn new<T: Real>(
        spec: &SystemSpec<T>,
        init: &InitialData<T>,
        cfg: &SolverConfig<T>,
        traj: &Trajectory<T>,
        equivalence: Option<&EquivalenceReport<T>>,
    ) -> Result<Self> {
        let (energies, drift) = energy_series(spec, traj)?;
        let last = traj.last();
        let momenta = (0..spec.n())
            .map(|i| MomentumRow {
                index: i,
                initial: traj.states[0].p[i].to_f64_lossy(),
                last: last.p[i].to_f64_lossy(),
                max_drift: traj.momentum_drift(i).to_f64_lossy(),
            })
            .collect();
        let max_dirac = traj.diagnostics.iter().fold(T::zero(), |acc, d| acc.max(d.dirac_residual));
        Ok(Self {
            config: ConfigEcho {
                system: spec.name().to_string(),
                mode: traj.mode.name(),
                integrator: cfg.integrator.name(),
                dt: cfg.dt.to_f64_lossy(),
                t_end: cfg.t_end.to_f64_lossy(),
                steps: cfg.steps(),
                newton_tol: cfg.newton_tol.to_f64_lossy(),
                newton_max_iter: cfg.newton_max_iter,
                aggregation: cfg.aggregation.name(),
                q0: lossy(&init.q0),
                v0: lossy(&init.v0),
                lambda0: lossy(&init.lambda0),
            },
            rows: traj.len(),
            conservation: Conservation {
                energy_initial: energies[0].to_f64_lossy(),
                energy_final: energies[energies.len() - 1].to_f64_lossy(),
                energy_max_drift: drift.to_f64_lossy(),
                max_constraint_residual: traj.max_constraint_residual().to_f64_lossy(),
                max_dirac_residual: max_dirac.to_f64_lossy(),
                momenta,
            },
            equivalence: equivalence.map(|e| EquivalenceMaxima {
                direct: e.max_direct.to_f64_lossy(),
                bar: e.max_bar.to_f64_lossy(),
                hat: e.max_hat.to_f64_lossy(),
                pairwise: e.max_pairwise.to_f64_lossy(),
            }),
            last: FinalState {
                t: traj.times[traj.len() - 1].to_f64_lossy(),
                q: lossy(&last.q),
                v: lossy(&last.v),
                p: lossy(&last.p),
                lambda: lossy(&last.lambda),
            },
            warnings: traj.warnings.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize")
    }
}
