use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use vakonomic::submanifold::{pullback_matrix, SubmanifoldChart, STEP_SCALE, ZERO_TOL};
use vakonomic::{Error, SubmanifoldKind, SystemSpec};

use crate::args::PullbackArgs;
use crate::{emit, load_system, CliError, CliResult};

pub const RNG_NAME: &str = "ChaCha8";

#[derive(Debug, Clone, Serialize)]
pub struct ChartRecord {
    pub index: usize,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Largest pullback entry used for the verdict.
    pub max_abs: f64,
    /// Largest entry over the whole tangent basis, multiplier directions included.
    pub full_max_abs: f64,
    pub analytic_deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KindSummary {
    pub kind: &'static str,
    pub evaluated: usize,
    pub skipped: usize,
    pub max_abs: Option<f64>,
    pub min_abs: Option<f64>,
    pub lagrangian: Option<bool>,
    pub verdict: String,
    pub charts: Vec<ChartRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub system: String,
    pub rng: &'static str,
    pub seed: u64,
    pub charts: usize,
    pub lambda: Option<Vec<f64>>,
    pub fd_step: f64,
    pub tolerance: f64,
    pub vakonomic: KindSummary,
    pub nonholonomic: KindSummary,
}

fn sample(
    spec: &SystemSpec,
    kind: SubmanifoldKind,
    seed: u64,
    index: usize,
    lambda: Option<&[f64]>,
) -> CliResult<Option<ChartRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = match kind {
        SubmanifoldKind::Vakonomic => 0,
        SubmanifoldKind::Nonholonomic => 1,
    };
    rng.set_stream(2 * index as u64 + offset);
    let result = SubmanifoldChart::random(spec, kind, &mut rng, lambda).and_then(|c| pullback_matrix(spec, &c).map(|pb| (c, pb)));
    match result {
        Ok((chart, pb)) => {
            let nonholonomic = kind == SubmanifoldKind::Nonholonomic;
            Ok(Some(ChartRecord {
                index,
                q: chart.q().to_vec(),
                qdot: chart.qdot().to_vec(),
                lambda: chart.lambda().to_vec(),
                // for the nonholonomic kind only the state block carries the obstruction;
                // the multiplier directions pair with μ even at λ = 0
                max_abs: if nonholonomic { pb.obstruction_max_abs } else { pb.max_abs },
                full_max_abs: pb.max_abs,
                analytic_deviation: nonholonomic.then_some(pb.analytic_deviation),
            }))
        }
        Err(Error::RankDeficient { .. } | Error::ChartConstraintViolated { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn summarize(kind: SubmanifoldKind, requested: usize, records: Vec<ChartRecord>, note: Option<&str>) -> KindSummary {
    let skipped = requested - records.len();
    let values = records.iter().map(|r| r.max_abs);
    let max_abs = values.clone().reduce(f64::max);
    let min_abs = values.reduce(f64::min);
    let lagrangian = max_abs.map(|m| m <= ZERO_TOL);
    let verdict = match (lagrangian, note) {
        (_, Some(note)) => format!("{}: not evaluated ({note})", kind.name()),
        (Some(true), _) => format!("{}: Lagrangian (max |i*Ω| = {:.3e})", kind.name(), max_abs.unwrap_or(0.0)),
        (Some(false), _) => format!("{}: NOT Lagrangian (max |i*Ω| = {:.3e})", kind.name(), max_abs.unwrap_or(0.0)),
        (None, None) => format!("{}: no usable charts", kind.name()),
    };
    KindSummary { kind: kind.name(), evaluated: records.len(), skipped, max_abs, min_abs, lagrangian, verdict, charts: records }
}

fn run_kind(spec: &SystemSpec, kind: SubmanifoldKind, args: &PullbackArgs) -> CliResult<Vec<ChartRecord>> {
    let lambda = args.lambda.as_deref();
    let results: Vec<CliResult<Option<ChartRecord>>> =
        (0..args.charts).into_par_iter().map(|i| sample(spec, kind, args.seed, i, lambda)).collect();
    let mut records = Vec::with_capacity(args.charts);
    for r in results {
        if let Some(record) = r? {
            records.push(record);
        }
    }
    Ok(records)
}

pub fn run(args: &PullbackArgs) -> CliResult<()> {
    let spec = load_system(&args.system)?;
    if let Some(l) = &args.lambda {
        if l.len() != spec.m() {
            return Err(CliError::Usage(format!("--lambda needs {} components, got {}", spec.m(), l.len())));
        }
    }
    if args.charts == 0 {
        return Err(CliError::Usage("--charts must be positive".into()));
    }

    let vak = run_kind(&spec, SubmanifoldKind::Vakonomic, args)?;
    let vakonomic = summarize(SubmanifoldKind::Vakonomic, args.charts, vak, None);
    let nonholonomic = if spec.forms().is_some() {
        let nonh = run_kind(&spec, SubmanifoldKind::Nonholonomic, args)?;
        summarize(SubmanifoldKind::Nonholonomic, args.charts, nonh, None)
    } else {
        summarize(SubmanifoldKind::Nonholonomic, args.charts, Vec::new(), Some("constraints are not linear in the velocities"))
    };

    let report = PullbackReport {
        system: spec.name().to_string(),
        rng: RNG_NAME,
        seed: args.seed,
        charts: args.charts,
        lambda: args.lambda.clone(),
        fd_step: STEP_SCALE,
        tolerance: ZERO_TOL,
        vakonomic,
        nonholonomic,
    };
    let mut summary = vec![report.vakonomic.verdict.clone(), report.nonholonomic.verdict.clone()];
    for s in [&report.vakonomic, &report.nonholonomic] {
        if s.skipped > 0 && s.evaluated > 0 {
            summary.push(format!("{}: skipped {} rank-deficient charts", s.kind, s.skipped));
        }
    }
    summary.push(format!("seed {} ({RNG_NAME})", args.seed));
    let json = serde_json::to_string_pretty(&report).expect("report fields serialize");
    emit(&args.output, &json, &summary)
}
