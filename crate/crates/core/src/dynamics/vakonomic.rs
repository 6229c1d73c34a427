use crate::dirac::{bar_dirac_residual, hat_dirac_residual, Aggregation};
use crate::error::{Error, Result};
use crate::geometry::{ExtendedPoint, ExtendedTangent, PontryaginTangent, VakState};
use crate::scalar::{norm, Real};
use crate::system::SystemSpec;

use super::algebraic::{vak_rhs, VakRhs};
use super::equivalence::differential_covector;
use super::{midpoint_step, rk4_step, InitialData, Integrator, Mode, SolverConfig, StepDiagnostics, Trajectory};

fn fail<T: Real>(time: T) -> impl FnOnce(Error) -> Error {
    move |source| Error::SolverFailure { time: time.to_f64_lossy(), source: Box::new(source) }
}

/// Diagnostics at an accepted state, using the vector field as `ẋ`.
fn diagnostics<T: Real>(
    spec: &SystemSpec<T>,
    state: &VakState<T>,
    rhs: &VakRhs<T>,
    aggregation: Aggregation,
) -> Result<StepDiagnostics<T>> {
    let m = spec.m();
    let phi = spec.phi(&state.q, &state.v)?;
    let base = ExtendedPoint { q: state.q.clone(), p: state.p.clone(), lambda: state.lambda.clone() };
    let xdot = ExtendedTangent { qdot: rhs.qdot.clone(), pdot: rhs.pdot.clone(), lambdadot: vec![T::zero(); m] };
    let covector = differential_covector(spec, &state.q, &state.v, &state.lambda)?;
    let hat = hat_dirac_residual(&base, &xdot, &covector)?.total(aggregation);
    let tangent = PontryaginTangent {
        qdot: rhs.qdot.clone(),
        vdot: vec![T::zero(); spec.n()],
        pdot: rhs.pdot.clone(),
        lambdadot: vec![T::zero(); m],
    };
    let bar = bar_dirac_residual(spec, state, &tangent, &spec.d_energy(state)?)?.total(aggregation);
    Ok(StepDiagnostics {
        energy: spec.vak_energy(state)?,
        constraint_residual: norm(&phi),
        dirac_residual: hat,
        bar_residual: Some(bar),
        newton_iterations: rhs.iterations,
    })
}

/// Integrates the implicit vakonomic equations with `(q, p)` as differential
/// states and `(v, λ)` re-solved at every stage.
///
/// `p₀ = ∂𝔏/∂v(q₀, v₀, λ₀)`; the supplied `λ₀` only seeds that choice.
pub fn integrate_vakonomic<T: Real>(spec: &SystemSpec<T>, init: &InitialData<T>, cfg: &SolverConfig<T>) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let init = InitialData { mode: Mode::Vakonomic, ..init.clone() };
    init.check(spec)?;
    let n = spec.n();
    let (tol, max_iter) = (cfg.newton_tol, cfg.newton_max_iter);
    let drift_limit = T::lit(1e3) * tol;

    let p0 = spec.vak_derivatives(&init.q0, &init.v0, &init.lambda0)?.dv;
    let mut rhs = vak_rhs(spec, &init.q0, &p0, (&init.v0, &init.lambda0), tol, max_iter).map_err(fail(T::zero()))?;
    let mut y: Vec<T> = init.q0.iter().chain(&p0).copied().collect();

    let steps = cfg.steps();
    let mut traj = Trajectory {
        mode: Mode::Vakonomic,
        dt: cfg.dt,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        diagnostics: Vec::with_capacity(steps + 1),
        aggregation: cfg.aggregation,
        warnings: Vec::new(),
    };
    let mut drift_reported = false;
    let mut record = |traj: &mut Trajectory<T>, k: usize, y: &[T], rhs: &VakRhs<T>| -> Result<()> {
        let t = T::from_usize(k).expect("step index fits the scalar type") * cfg.dt;
        let mut state = VakState::new(y[..n].to_vec(), rhs.v.clone(), y[n..].to_vec(), rhs.lambda.clone());
        state.t = Some(t);
        let diag = diagnostics(spec, &state, rhs, cfg.aggregation)?;
        if diag.constraint_residual > drift_limit && !drift_reported {
            drift_reported = true;
            traj.warnings.push(format!(
                "constraint drift {:e} exceeds {:e} at t = {}",
                diag.constraint_residual.to_f64_lossy(),
                drift_limit.to_f64_lossy(),
                t.to_f64_lossy()
            ));
        }
        traj.times.push(t);
        traj.states.push(state);
        traj.diagnostics.push(diag);
        Ok(())
    };
    record(&mut traj, 0, &y, &rhs)?;

    for k in 0..steps {
        let t = T::from_usize(k).expect("step index fits the scalar type") * cfg.dt;
        let mut guess = (rhs.v.clone(), rhs.lambda.clone());
        let mut stage_iterations = 0;
        let mut field = |x: &[T]| -> Result<Vec<T>> {
            let r = vak_rhs(spec, &x[..n], &x[n..], (&guess.0, &guess.1), tol, max_iter)?;
            stage_iterations += r.iterations;
            guess = (r.v.clone(), r.lambda.clone());
            Ok(r.flat())
        };
        let k1 = rhs.flat();
        let next = match cfg.integrator {
            Integrator::Rk4 => rk4_step(&y, &k1, cfg.dt, &mut field),
            Integrator::ImplicitMidpoint => midpoint_step(&y, &k1, cfg.dt, tol, max_iter, &mut field),
        }
        .map_err(fail(t))?;
        let t_next = T::from_usize(k + 1).expect("step index fits the scalar type") * cfg.dt;
        let mut new_rhs = vak_rhs(spec, &next[..n], &next[n..], (&guess.0, &guess.1), tol, max_iter).map_err(fail(t_next))?;
        new_rhs.iterations += stage_iterations;
        y = next;
        rhs = new_rhs;
        record(&mut traj, k + 1, &y, &rhs)?;
    }
    Ok(traj)
}
