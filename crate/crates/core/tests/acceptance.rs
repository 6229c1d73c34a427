//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero
//! exit status if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{central_gradient, max_diff, random_expression, random_vec, relative_error};
use vakonomic::dirac::check_self_orthogonal;
use vakonomic::dynamics::Trajectory;
use vakonomic::geometry::{
    gamma, kappa, kappa_inv, omega_flat, project_to_tq, tangent_projection, tilde_gamma, tilde_gamma_composed, TStarTPoint,
    TTStarPoint, VakCotangentPoint,
};
use vakonomic::submanifold::{pullback_matrix, SubmanifoldChart};
use vakonomic::{
    builtin, integrate_nonholonomic, integrate_vakonomic, theorem_equivalence_report, GradientMode, InitialData, LinearDiracData,
    Mode, Result, ScalarField, SolverConfig, SubmanifoldKind, BUILTIN_NAMES,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn particle_init(mode: Mode) -> InitialData<f64> {
    InitialData::new(vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![2.0], mode)
}

fn final_state(traj: &Trajectory<f64>) -> Vec<f64> {
    let s = traj.last();
    s.q.iter().chain(&s.v).chain(&s.p).chain(&s.lambda).copied().collect()
}

fn bundle_maps() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=8);
        let m = rng.random_range(0..n);
        let mut block = |k| random_vec(&mut rng, k, 10.0);
        let x = TTStarPoint::new(block(n), block(n), block(n), block(n))?;
        let y = TStarTPoint::new(block(n), block(n), block(n), block(n))?;
        let z = VakCotangentPoint::new(block(n), block(n), block(m), block(n), block(n), block(m))?;

        let via_kappa = omega_flat(&kappa_inv(&y));
        let direct = gamma(&y);
        let composed = tilde_gamma_composed(&z);
        let explicit = tilde_gamma(&z);
        let (bq, bv) = project_to_tq(&kappa(&x));
        let (tq, tv) = tangent_projection(&x);

        let gaps = [
            max_diff(via_kappa.q(), direct.q()),
            max_diff(via_kappa.p(), direct.p()),
            max_diff(via_kappa.mdp(), direct.mdp()),
            max_diff(via_kappa.dq(), direct.dq()),
            max_diff(composed.fiber(), explicit.fiber()),
            max_diff(composed.cov_q(), explicit.cov_q()),
            max_diff(composed.cov_fiber(), explicit.cov_fiber()),
            max_diff(composed.cov_lambda(), explicit.cov_lambda()),
            max_diff(&bq, &tq),
            max_diff(&bv, &tv),
        ];
        worst = gaps.into_iter().fold(worst, f64::max);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-15 && within(elapsed, 1.0),
        format!("max deviation {worst:e} over 1e4 points in {:.3} s", elapsed.as_secs_f64()),
    )
}

fn self_orthogonality() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let (mut worst, mut all_pass) = (0.0_f64, true);
    for _ in 0..100 {
        let d = rng.random_range(1..=8);
        let k = rng.random_range(0..=d);
        let report = check_self_orthogonal(&LinearDiracData::random(&mut rng, d, k))?;
        worst = worst.max(report.max_pairing);
        all_pass &= report.passed && report.dim == d && report.max_pairing <= 1e-12;
    }
    let control = check_self_orthogonal(&LinearDiracData::symmetric_control(&mut rng, 6, 3))?;
    let elapsed = start.elapsed();
    outcome(
        all_pass && !control.passed && within(elapsed, 1.0),
        format!(
            "max pairing {worst:e} over 100 instances; control pairing {:e} ({}) in {:.3} s",
            control.max_pairing,
            if control.passed { "not rejected" } else { "rejected" },
            elapsed.as_secs_f64()
        ),
    )
}

fn particle_reproduction() -> Result<Outcome> {
    let spec = builtin("particle")?;
    let start = Instant::now();
    let traj = integrate_vakonomic(&spec, &particle_init(Mode::Vakonomic), &SolverConfig::new(1e-3, 10.0))?;
    let elapsed = start.elapsed();
    let reference = integrate_vakonomic(&spec, &particle_init(Mode::Vakonomic), &SolverConfig::new(1e-4, 10.0))?;
    let (px, pz) = (traj.momentum_drift(0), traj.momentum_drift(2));
    let phi = traj.max_constraint_residual();
    let (_, energy) = vakonomic::energy_series(&spec, &traj)?;
    let gap = max_diff(&final_state(&traj), &final_state(&reference));
    outcome(
        px <= 1e-8 && pz <= 1e-8 && phi <= 1e-8 && energy <= 1e-8 && gap <= 1e-9 && within(elapsed, 10.0),
        format!(
            "p_x drift {px:e}, p_z drift {pz:e}, φ {phi:e}, E drift {energy:e}, dt/10 gap {gap:e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn disk_and_skate() -> Result<Outcome> {
    let disk = builtin("disk")?;
    let start = Instant::now();
    let init = InitialData::new(vec![0.0; 4], vec![1.0, 0.0, 0.5, 1.0], vec![0.3, -0.2], Mode::Vakonomic);
    let traj = integrate_vakonomic(&disk, &init, &SolverConfig::new(1e-3, 10.0))?;
    let disk_time = start.elapsed();
    let disk_drift = [0, 1, 3].map(|i| traj.momentum_drift(i));

    let skate = builtin("skate")?;
    let start = Instant::now();
    let init = InitialData::new(vec![0.0; 3], vec![1.0, 0.0, 0.5], vec![0.4], Mode::Vakonomic);
    let dt = 1e-3;
    let traj = integrate_vakonomic(&skate, &init, &SolverConfig::new(dt, 10.0))?;
    let skate_time = start.elapsed();
    let py = traj.momentum_drift(1);
    let force = 9.81 * 0.5;
    let tracking = traj.states.windows(2).map(|w| ((w[1].p[0] - w[0].p[0]) / dt - force).abs()).fold(0.0, f64::max);
    let worst_disk = disk_drift.into_iter().fold(0.0, f64::max);
    outcome(
        worst_disk <= 1e-8 && py <= 1e-8 && tracking <= 1e-8 && within(disk_time, 10.0) && within(skate_time, 10.0),
        format!(
            "disk p_x/p_y/p_φ drift {:e}/{:e}/{:e} ({:.2} s); skate p_y drift {py:e}, |Δp_x/dt − m g sin α| ≤ {tracking:e} ({:.2} s)",
            disk_drift[0],
            disk_drift[1],
            disk_drift[2],
            disk_time.as_secs_f64(),
            skate_time.as_secs_f64()
        ),
    )
}

fn equivalence() -> Result<Outcome> {
    let runs = [
        ("particle", particle_init(Mode::Vakonomic)),
        ("disk", InitialData::new(vec![0.0; 4], vec![1.0, 0.0, 0.5, 1.0], vec![0.3, -0.2], Mode::Vakonomic)),
        ("skate", InitialData::new(vec![0.0; 3], vec![1.0, 0.0, 0.5], vec![0.4], Mode::Vakonomic)),
    ];
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for (name, init) in runs {
        let spec = builtin(name)?;
        let traj = integrate_vakonomic(&spec, &init, &SolverConfig::new(1e-2, 5.0))?;
        let report = theorem_equivalence_report(&spec, &traj)?;
        worst = worst.max(report.max_pairwise);
        parts.push(format!("{name} {:e} (residual {:e})", report.max_pairwise, report.max_direct));
    }
    outcome(worst <= 1e-12, format!("max pairwise difference {worst:e}: {}", parts.join(", ")))
}

fn dichotomy() -> Result<Outcome> {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut passed = true;
    for (seed, name) in BUILTIN_NAMES.iter().enumerate() {
        let spec = builtin(name)?;
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed as u64);
        let (mut vak, mut nonh_min, mut deviation) = (0.0_f64, f64::INFINITY, 0.0_f64);
        for _ in 0..100 {
            let chart = SubmanifoldChart::random(&spec, SubmanifoldKind::Vakonomic, &mut rng, None)?;
            vak = vak.max(pullback_matrix(&spec, &chart)?.max_abs);
            let chart = SubmanifoldChart::random(&spec, SubmanifoldKind::Nonholonomic, &mut rng, None)?;
            let pb = pullback_matrix(&spec, &chart)?;
            nonh_min = nonh_min.min(pb.obstruction_max_abs);
            deviation = deviation.max(pb.analytic_deviation);
        }
        passed &= vak <= 1e-6 && nonh_min >= 0.1 && deviation <= 1e-4;
        parts.push(format!("{name}: vak max {vak:e}, nonh min {nonh_min:.3}, analytic dev {deviation:e}"));
    }
    let elapsed = start.elapsed();
    outcome(passed && within(elapsed, 30.0), format!("{}; {:.2} s", parts.join("; "), elapsed.as_secs_f64()))
}

fn order() -> Result<Outcome> {
    let spec = builtin("particle")?;
    let init = particle_init(Mode::Vakonomic);
    let t_end = 10.0;
    let dts = [4e-3, 2e-3, 1e-3];
    let mut errors = Vec::new();
    for dt in dts {
        let coarse = integrate_vakonomic(&spec, &init, &SolverConfig::new(dt, t_end))?;
        let fine = integrate_vakonomic(&spec, &init, &SolverConfig::new(dt / 10.0, t_end))?;
        let state = |t: &Trajectory<f64>| -> Vec<f64> { t.last().q.iter().chain(&t.last().p).copied().collect() };
        errors.push(max_diff(&state(&coarse), &state(&fine)));
    }
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    outcome(
        orders.iter().all(|o| (o - 4.0).abs() <= 0.2),
        format!("errors {:e}, {:e}, {:e}; observed orders {:.3}, {:.3}", errors[0], errors[1], errors[2], orders[0], orders[1]),
    )
}

fn ad_correctness() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    let mut tested = 0;
    while tested < 100 {
        let n = rng.random_range(1..=4);
        let expr = random_expression(&mut rng, n, 5);
        if expr.depth() > 6 {
            continue;
        }
        let field = ScalarField::from_expression(expr.clone(), n)?;
        let (q, v) = (random_vec(&mut rng, n, 1.5), random_vec(&mut rng, n, 1.5));
        let Ok(ad) = field.eval_with_grad(&q, &v) else { continue };
        let (dq, dv) = central_gradient(|q, v| expr.eval::<f64>(q, v).unwrap_or(f64::NAN), &q, &v);
        if dq.iter().chain(&dv).any(|x| !x.is_finite()) {
            continue;
        }
        worst = worst.max(relative_error(&ad.dq, &dq)).max(relative_error(&ad.dv, &dv));
        tested += 1;
    }
    for name in BUILTIN_NAMES {
        let spec = builtin(name)?.with_mode(GradientMode::Dual)?;
        let n = spec.n();
        for _ in 0..10 {
            let (q, v) = (random_vec(&mut rng, n, 2.0), random_vec(&mut rng, n, 2.0));
            let fields = std::iter::once(spec.lagrangian()).chain(spec.constraints());
            for field in fields {
                let ad = field.eval_with_grad(&q, &v)?;
                let (dq, dv) = central_gradient(|q, v| field.value(q, v).unwrap(), &q, &v);
                worst = worst.max(relative_error(&ad.dq, &dq)).max(relative_error(&ad.dv, &dv));
            }
        }
    }
    outcome(worst <= 1e-6, format!("max relative gradient error {worst:e} over 100 expressions and the built-ins"))
}

fn vak_vs_nonholonomic() -> Result<Outcome> {
    let spec = builtin("particle")?;
    let cfg = SolverConfig::new(1e-3, 5.0);
    let vak = integrate_vakonomic(&spec, &particle_init(Mode::Vakonomic), &cfg)?;
    let nonh = integrate_nonholonomic(&spec, &particle_init(Mode::Nonholonomic), &cfg)?;
    let separation = vakonomic::scalar::distance(&vak.last().q, &nonh.last().q);
    outcome(separation > 1e-3, format!("‖q_vak(5) − q_nonh(5)‖ = {separation:.6}"))
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("bundle-map identities", bundle_maps),
        ("D = D⊥ certification", self_orthogonality),
        ("vakonomic particle", particle_reproduction),
        ("disk and skate momenta", disk_and_skate),
        ("three-way equivalence", equivalence),
        ("Lagrangian-submanifold dichotomy", dichotomy),
        ("integrator order", order),
        ("AD correctness", ad_correctness),
        ("vakonomic vs nonholonomic", vak_vs_nonholonomic),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!passed);
        println!("{} [{}] {name}: {detail}", if passed { "PASS" } else { "FAIL" }, i + 1);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
