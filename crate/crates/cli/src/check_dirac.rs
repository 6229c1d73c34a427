use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use vakonomic::dirac::{check_self_orthogonal, SelfOrthogonality, PAIRING_TOL};
use vakonomic::geometry::{presymp_bar_flat, presymp_hat_flat, ExtendedPoint, ExtendedTangent, PontryaginTangent};
use vakonomic::{LinearDiracData, Matrix, VakState};

use crate::args::CheckDiracArgs;
use crate::pullback::RNG_NAME;
use crate::{emit, CliError, CliResult};

#[derive(Debug, Clone, Default, Serialize)]
pub struct Batch {
    pub instances: usize,
    pub passed: usize,
    pub max_pairing: f64,
    pub dim_mismatches: usize,
}

impl Batch {
    fn add(&mut self, r: &SelfOrthogonality<f64>) {
        self.instances += 1;
        self.passed += usize::from(r.passed);
        self.max_pairing = self.max_pairing.max(r.max_pairing);
        self.dim_mismatches += usize::from(r.dim != r.expected_dim);
    }

    fn all_passed(&self) -> bool {
        self.passed == self.instances
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlBatch {
    pub instances: usize,
    pub rejected: usize,
    pub min_pairing: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiracReport {
    pub rng: &'static str,
    pub seed: u64,
    pub dim: usize,
    pub seeds: usize,
    pub tolerance: f64,
    pub random: Batch,
    pub hat_graph: Batch,
    pub bar_graph: Batch,
    pub negative_control: Option<ControlBatch>,
    pub passed: bool,
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn unit(len: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[i] = 1.0;
    e
}

fn rng_for(seed: u64, index: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(4 * index as u64 + stream);
    rng
}

/// Graph of the flat map of `dq ∧ dp` pulled back to `T*Q × V*`, at a random base point.
fn hat_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CliResult<LinearDiracData> {
    let base = ExtendedPoint { q: random_vec(rng, n), p: random_vec(rng, n), lambda: random_vec(rng, m) };
    let d = 2 * n + m;
    let columns = (0..d)
        .map(|j| {
            let e = unit(d, j);
            let xdot = ExtendedTangent { qdot: e[..n].to_vec(), pdot: e[n..2 * n].to_vec(), lambdadot: e[2 * n..].to_vec() };
            let flat = presymp_hat_flat(&base, &xdot)?;
            Ok([flat.alpha, flat.u, flat.w].concat())
        })
        .collect::<vakonomic::Result<Vec<_>>>()?;
    Ok(LinearDiracData::new(Matrix::from_columns(&columns), Matrix::identity(d))?)
}

/// Graph of the flat map of `dq ∧ dp` pulled back to the Pontryagin bundle, at a random base point.
fn bar_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CliResult<LinearDiracData> {
    let base = VakState::new(random_vec(rng, n), random_vec(rng, n), random_vec(rng, n), random_vec(rng, m));
    let d = 3 * n + m;
    let columns = (0..d)
        .map(|j| {
            let e = unit(d, j);
            let xdot = PontryaginTangent {
                qdot: e[..n].to_vec(),
                vdot: e[n..2 * n].to_vec(),
                pdot: e[2 * n..3 * n].to_vec(),
                lambdadot: e[3 * n..].to_vec(),
            };
            let flat = presymp_bar_flat(&base, &xdot)?;
            Ok([flat.alpha, flat.beta, flat.w, flat.u].concat())
        })
        .collect::<vakonomic::Result<Vec<_>>>()?;
    Ok(LinearDiracData::new(Matrix::from_columns(&columns), Matrix::identity(d))?)
}

struct SeedResult {
    random: SelfOrthogonality<f64>,
    hat: SelfOrthogonality<f64>,
    bar: SelfOrthogonality<f64>,
    control: Option<SelfOrthogonality<f64>>,
}

fn run_seed(args: &CheckDiracArgs, index: usize) -> CliResult<SeedResult> {
    let d = args.dim as usize;
    let mut rng = rng_for(args.seed, index, 0);
    let k = rng.random_range(0..=d);
    let random = check_self_orthogonal(&LinearDiracData::random(&mut rng, d, k))?;

    let mut rng = rng_for(args.seed, index, 1);
    let m = rng.random_range(0..=d);
    let hat = check_self_orthogonal(&hat_graph(&mut rng, d, m)?)?;
    let bar = check_self_orthogonal(&bar_graph(&mut rng, d, m)?)?;

    let control = if args.negative_control {
        let mut rng = rng_for(args.seed, index, 2);
        // an empty distribution would hide the form entirely
        let k = rng.random_range(1..=d);
        Some(check_self_orthogonal(&LinearDiracData::symmetric_control(&mut rng, d, k))?)
    } else {
        None
    };
    Ok(SeedResult { random, hat, bar, control })
}

pub fn run(args: &CheckDiracArgs) -> CliResult<()> {
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be positive".into()));
    }
    let results = (0..args.seeds).into_par_iter().map(|i| run_seed(args, i)).collect::<CliResult<Vec<_>>>()?;

    let (mut random, mut hat_graph, mut bar_graph) = (Batch::default(), Batch::default(), Batch::default());
    let mut control = args.negative_control.then_some(ControlBatch { instances: 0, rejected: 0, min_pairing: f64::INFINITY });
    for r in &results {
        random.add(&r.random);
        hat_graph.add(&r.hat);
        bar_graph.add(&r.bar);
        if let (Some(c), Some(batch)) = (&r.control, control.as_mut()) {
            batch.instances += 1;
            batch.rejected += usize::from(!c.passed);
            batch.min_pairing = batch.min_pairing.min(c.max_pairing);
        }
    }
    let control_ok = control.as_ref().is_none_or(|c| c.rejected == c.instances);
    let passed = random.all_passed() && hat_graph.all_passed() && bar_graph.all_passed();

    let report = DiracReport {
        rng: RNG_NAME,
        seed: args.seed,
        dim: args.dim as usize,
        seeds: args.seeds,
        tolerance: PAIRING_TOL,
        random,
        hat_graph,
        bar_graph,
        negative_control: control,
        passed,
    };

    let line =
        |name: &str, b: &Batch| format!("{name}: {}/{} certified (max pairing = {:.3e})", b.passed, b.instances, b.max_pairing);
    let mut summary = vec![
        line("random structures", &report.random),
        line("hat graph", &report.hat_graph),
        line("bar graph", &report.bar_graph),
    ];
    if let Some(c) = &report.negative_control {
        summary
            .push(format!("negative control: {}/{} rejected (min max-pairing = {:.3e})", c.rejected, c.instances, c.min_pairing));
    }
    summary.push(format!("seed {} ({RNG_NAME})", args.seed));
    let json = serde_json::to_string_pretty(&report).expect("report fields serialize");
    emit(&args.output, &json, &summary)?;

    if !passed {
        return Err(CliError::CheckFailed("some structures failed the D = D⊥ certificate".into()));
    }
    if !control_ok {
        return Err(CliError::CheckFailed("the symmetric control was not rejected".into()));
    }
    Ok(())
}
