use crate::dirac::{induced_dirac_residual, Aggregation, TangentCovectorPair};
use crate::error::{check_len, Error, Result};
use crate::geometry::VakState;
use crate::linalg::{solve_checked, Matrix};
use crate::scalar::{dot, norm, Real};
use crate::system::SystemSpec;

use super::{midpoint_step, rk4_step, InitialData, Integrator, Mode, SolverConfig, StepDiagnostics, Trajectory, MAX_CONDITION};

/// Constrained acceleration at `(q, v)` together with the quantities the
/// diagnostics reuse.
#[derive(Debug, Clone, PartialEq)]
pub struct Acceleration<T> {
    pub vdot: Vec<T>,
    pub lambda: Vec<T>,
    /// `∂L/∂v`
    pub momentum: Vec<T>,
    /// `∂L/∂q`
    pub force: Vec<T>,
    /// `d/dt ∂L/∂v = M v̇ + C`
    pub pdot: Vec<T>,
}

/// Solves `[[M, μᵀ], [μ, 0]] (v̇, −λ) = (∂L/∂q − C, −(∂(μ·v)/∂q)·v)` with
/// `M = ∂²L/∂v²` and `Cᵢ = Σⱼ ∂²L/∂vᵢ∂qⱼ vⱼ`.
pub fn nonholonomic_acceleration<T: Real>(spec: &SystemSpec<T>, q: &[T], v: &[T]) -> Result<Acceleration<T>> {
    let (n, m) = (spec.n(), spec.m());
    check_len("q", n, q.len())?;
    check_len("v", n, v.len())?;
    let forms = spec.require_forms()?;
    let grad = spec.lagrangian().eval_with_grad(q, v)?;
    let second = spec.lagrangian().second(q, v)?;
    let coupling = second.vq.mul_vec(v);
    let mu = spec.mu(q)?;

    let mut rhs: Vec<T> = grad.dq.iter().zip(&coupling).map(|(&f, &c)| f - c).collect();
    for form in forms {
        let jac = form.jacobian(q)?;
        rhs.push(-dot(v, &jac.mul_vec(v)));
    }
    let saddle = Matrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => second.vv[(i, j)],
        (true, false) => mu[j - n][i],
        (false, true) => mu[i - n][j],
        (false, false) => T::zero(),
    });
    let x = solve_checked(&saddle, &rhs, T::lit(MAX_CONDITION))?;
    let vdot = x[..n].to_vec();
    let lambda: Vec<T> = x[n..].iter().map(|&l| -l).collect();
    let inertial = second.vv.mul_vec(&vdot);
    let pdot = inertial.iter().zip(&coupling).map(|(&a, &c)| a + c).collect();
    Ok(Acceleration { vdot, lambda, momentum: grad.dv, force: grad.dq, pdot })
}

fn field<T: Real>(spec: &SystemSpec<T>, y: &[T]) -> Result<(Vec<T>, Acceleration<T>)> {
    let n = spec.n();
    let acc = nonholonomic_acceleration(spec, &y[..n], &y[n..])?;
    Ok((y[n..].iter().chain(&acc.vdot).copied().collect(), acc))
}

fn diagnostics<T: Real>(
    spec: &SystemSpec<T>,
    state: &VakState<T>,
    acc: &Acceleration<T>,
    aggregation: Aggregation,
) -> Result<StepDiagnostics<T>> {
    let pair = TangentCovectorPair {
        qdot: state.v.clone(),
        pdot: acc.pdot.clone(),
        alpha: acc.force.iter().map(|&f| -f).collect(),
        w: state.v.clone(),
    };
    let induced = induced_dirac_residual(spec, &state.q, &state.p, &pair)?.total(aggregation);
    Ok(StepDiagnostics {
        energy: spec.vak_energy(state)?,
        constraint_residual: norm(&spec.phi(&state.q, &state.v)?),
        dirac_residual: induced,
        bar_residual: None,
        newton_iterations: 0,
    })
}

/// Integrates the Lagrange-d'Alembert equations with RK4 (or implicit
/// midpoint) on `(q, v)`; the multipliers are eliminated at every stage.
pub fn integrate_nonholonomic<T: Real>(
    spec: &SystemSpec<T>,
    init: &InitialData<T>,
    cfg: &SolverConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let init = InitialData { mode: Mode::Nonholonomic, ..init.clone() };
    init.check(spec)?;
    let n = spec.n();
    let fail = |time: T| move |source| Error::SolverFailure { time: time.to_f64_lossy(), source: Box::new(source) };
    let at = |k: usize| T::from_usize(k).expect("step index fits the scalar type") * cfg.dt;

    let mut y: Vec<T> = init.q0.iter().chain(&init.v0).copied().collect();
    let (mut k1, mut acc) = field(spec, &y).map_err(fail(T::zero()))?;
    let steps = cfg.steps();
    let mut traj = Trajectory {
        mode: Mode::Nonholonomic,
        dt: cfg.dt,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        diagnostics: Vec::with_capacity(steps + 1),
        aggregation: cfg.aggregation,
        warnings: Vec::new(),
    };
    let record = |traj: &mut Trajectory<T>, k: usize, y: &[T], acc: &Acceleration<T>| -> Result<()> {
        let t = at(k);
        let mut state = VakState::new(y[..n].to_vec(), y[n..].to_vec(), acc.momentum.clone(), acc.lambda.clone());
        state.t = Some(t);
        traj.diagnostics.push(diagnostics(spec, &state, acc, cfg.aggregation)?);
        traj.times.push(t);
        traj.states.push(state);
        Ok(())
    };
    record(&mut traj, 0, &y, &acc)?;

    let rate = |x: &[T]| field(spec, x).map(|(f, _)| f);
    for k in 0..steps {
        let next = match cfg.integrator {
            Integrator::Rk4 => rk4_step(&y, &k1, cfg.dt, rate),
            Integrator::ImplicitMidpoint => midpoint_step(&y, &k1, cfg.dt, cfg.newton_tol, cfg.newton_max_iter, rate),
        }
        .map_err(fail(at(k)))?;
        (k1, acc) = field(spec, &next).map_err(fail(at(k + 1)))?;
        y = next;
        record(&mut traj, k + 1, &y, &acc)?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::builtin;

    #[test]
    fn disk_has_zero_acceleration_and_multiplier() {
        let spec = builtin::<f64>("disk").unwrap();
        let (th, s) = (0.3_f64, 1.2);
        let v = [s * th.cos(), s * th.sin(), 0.0, s];
        let acc = nonholonomic_acceleration(&spec, &[0.0, 0.0, th, 0.0], &v).unwrap();
        assert!(acc.vdot.iter().all(|x| x.abs() < 1e-14));
        assert!(acc.lambda.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn skate_multiplier_balances_gravity() {
        // heading along x: the lateral constraint blocks y, gravity acts along x
        let spec = builtin::<f64>("skate").unwrap();
        let acc = nonholonomic_acceleration(&spec, &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((acc.vdot[0] - 9.81 * 0.5).abs() < 1e-12);
        assert!(acc.vdot[1].abs() < 1e-12);
    }
}
