use std::path::PathBuf;

use vakonomic::export::{write_csv, RunReport};
use vakonomic::{integrate, theorem_equivalence_report, InitialData, Mode, SolverConfig, SystemSpec};

use crate::args::{OutputArgs, SimulateArgs};
use crate::{emit, load_system, write_file, CliError, CliResult};

pub struct RunManifest {
    pub spec: SystemSpec,
    pub init: InitialData<f64>,
    pub config: SolverConfig<f64>,
    pub csv: Option<PathBuf>,
    pub output: OutputArgs,
}

fn vector(name: &str, given: &Option<Vec<f64>>, len: usize) -> CliResult<Vec<f64>> {
    match given {
        None => Ok(vec![0.0; len]),
        Some(v) if v.len() == len => Ok(v.clone()),
        Some(v) => Err(CliError::Usage(format!("--{name} needs {len} components, got {}", v.len()))),
    }
}

impl RunManifest {
    pub fn from_args(args: &SimulateArgs) -> CliResult<Self> {
        let spec = load_system(&args.system)?;
        let (n, m) = (spec.n(), spec.m());
        let init = InitialData::new(
            vector("q0", &args.q0, n)?,
            vector("v0", &args.v0, n)?,
            vector("lambda0", &args.lambda0, m)?,
            args.mode.into(),
        );
        let mut config = SolverConfig::new(args.dt, args.t_end)
            .with_integrator(args.integrator.into())
            .with_aggregation(args.aggregation.into());
        config.newton_tol = args.newton_tol;
        config.newton_max_iter = args.newton_max_iter;
        config.validate()?;
        Ok(Self { spec, init, config, csv: args.csv.clone(), output: args.output.clone() })
    }
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let manifest = RunManifest::from_args(args)?;
    let RunManifest { spec, init, config, csv, output } = &manifest;
    let traj = integrate(spec, init, config).map_err(CliError::Solver)?;
    let equivalence = match init.mode {
        Mode::Vakonomic => Some(theorem_equivalence_report(spec, &traj).map_err(CliError::Solver)?),
        Mode::Nonholonomic => None,
    };
    let report = RunReport::new(spec, init, config, &traj, equivalence.as_ref()).map_err(CliError::Solver)?;

    if let Some(path) = csv {
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).map_err(|source| CliError::Output { path: path.clone(), source })?;
        write_file(path, &buf)?;
    }

    let c = &report.conservation;
    let mut summary = vec![
        format!(
            "{} ({}, {}): {} rows, t = {}",
            report.config.system, report.config.mode, report.config.integrator, report.rows, report.last.t
        ),
        format!("energy drift {:.3e}, max constraint residual {:.3e}", c.energy_max_drift, c.max_constraint_residual),
    ];
    if let Some(e) = &report.equivalence {
        summary.push(format!("equivalence residuals: direct {:.3e}, bar {:.3e}, hat {:.3e}", e.direct, e.bar, e.hat));
    }
    summary.extend(report.warnings.iter().map(|w| format!("warning: {w}")));
    emit(output, &report.to_json(), &summary)
}
