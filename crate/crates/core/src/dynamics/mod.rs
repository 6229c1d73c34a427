//! Vakonomic and nonholonomic integrators with per-step diagnostics.

mod algebraic;
mod equivalence;
mod nonholonomic;
mod vakonomic;

pub use algebraic::{solve_algebraic, vak_rhs, AlgebraicSolution, VakRhs};
pub use equivalence::{equivalence_at, estimate_rates, theorem_equivalence_report, EquivalenceReport, EquivalenceRow};
pub use nonholonomic::{integrate_nonholonomic, nonholonomic_acceleration, Acceleration};
pub use vakonomic::integrate_vakonomic;

use crate::dirac::Aggregation;
use crate::error::{check_len, Error, Result};
use crate::geometry::VakState;
use crate::scalar::Real;
use crate::system::SystemSpec;

/// Initial data is accepted when its constraint residual is at most this.
pub const INITIAL_TOL: f64 = 1e-10;
/// Bordered and saddle systems with a larger condition estimate are singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Vakonomic,
    Nonholonomic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Vakonomic => "vakonomic",
            Self::Nonholonomic => "nonholonomic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    ImplicitMidpoint,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rk4 => "rk4",
            Self::ImplicitMidpoint => "midpoint-implicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData<T> {
    pub q0: Vec<T>,
    pub v0: Vec<T>,
    /// Newton seed for the multipliers; ignored by the nonholonomic mode.
    pub lambda0: Vec<T>,
    pub mode: Mode,
}

impl<T: Real> InitialData<T> {
    pub fn new(q0: Vec<T>, v0: Vec<T>, lambda0: Vec<T>, mode: Mode) -> Self {
        Self { q0, v0, lambda0, mode }
    }

    fn check(&self, spec: &SystemSpec<T>) -> Result<()> {
        check_len("q0", spec.n(), self.q0.len())?;
        check_len("v0", spec.n(), self.v0.len())?;
        check_len("λ0", spec.m(), self.lambda0.len())?;
        let residual: Vec<T> = match self.mode {
            Mode::Vakonomic => spec.phi(&self.q0, &self.v0)?,
            Mode::Nonholonomic => spec.mu(&self.q0)?.iter().map(|row| crate::scalar::dot(row, &self.v0)).collect(),
        };
        if residual.iter().any(|r| !(r.abs() <= T::lit(INITIAL_TOL))) {
            return Err(Error::InitialConstraintViolated { residual: residual.iter().map(|r| r.to_f64_lossy()).collect() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub dt: T,
    pub t_end: T,
    /// Max-norm tolerance on the algebraic residual, scaled by `max(1, ‖p‖∞)`.
    pub newton_tol: T,
    pub newton_max_iter: usize,
    pub integrator: Integrator,
    /// How per-condition Dirac residual norms are combined in diagnostics.
    pub aggregation: Aggregation,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(dt: T, t_end: T) -> Self {
        Self {
            dt,
            t_end,
            newton_tol: T::lit(1e-12),
            newton_max_iter: 50,
            integrator: Integrator::Rk4,
            aggregation: Aggregation::Max,
        }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::InvalidConfig("t_end must be non-negative".into()));
        }
        if !(self.newton_tol > T::zero()) {
            return Err(Error::InvalidConfig("newton_tol must be positive".into()));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidConfig("newton_max_iter must be positive".into()));
        }
        Ok(())
    }

    /// `floor(t_end / dt)`, robust to representation error in the quotient.
    pub fn steps(&self) -> usize {
        let ratio = (self.t_end / self.dt).to_f64_lossy();
        (ratio + 1e-9).floor().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics<T> {
    pub energy: T,
    /// `‖φ(q, v)‖`.
    pub constraint_residual: T,
    /// Vakonomic: `D̂` membership of the Dirac differential. Nonholonomic:
    /// membership in the induced structure.
    pub dirac_residual: T,
    /// `D̄` membership of `dE` (vakonomic only).
    pub bar_residual: Option<T>,
    /// Newton iterations summed over the stages of the step.
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub mode: Mode,
    pub dt: T,
    pub times: Vec<T>,
    pub states: Vec<VakState<T>>,
    pub diagnostics: Vec<StepDiagnostics<T>>,
    pub aggregation: Aggregation,
    pub warnings: Vec<String>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &VakState<T> {
        self.states.last().expect("trajectories hold the initial state")
    }

    /// Largest deviation of coordinate `i` of `p` from its initial value.
    pub fn momentum_drift(&self, i: usize) -> T {
        let p0 = self.states[0].p[i];
        self.states.iter().fold(T::zero(), |acc, s| acc.max((s.p[i] - p0).abs()))
    }

    pub fn max_constraint_residual(&self) -> T {
        self.diagnostics.iter().fold(T::zero(), |acc, d| acc.max(d.constraint_residual))
    }
}

/// `E` along the trajectory and its largest deviation from the initial value.
pub fn energy_series<T: Real>(spec: &SystemSpec<T>, traj: &Trajectory<T>) -> Result<(Vec<T>, T)> {
    let energies = traj.states.iter().map(|s| spec.vak_energy(s)).collect::<Result<Vec<_>>>()?;
    let e0 = energies.first().copied().unwrap_or_else(T::zero);
    let drift = energies.iter().fold(T::zero(), |acc, &e| acc.max((e - e0).abs()));
    Ok((energies, drift))
}

/// Runs the integrator selected by `init.mode`.
pub fn integrate<T: Real>(spec: &SystemSpec<T>, init: &InitialData<T>, cfg: &SolverConfig<T>) -> Result<Trajectory<T>> {
    match init.mode {
        Mode::Vakonomic => integrate_vakonomic(spec, init, cfg),
        Mode::Nonholonomic => integrate_nonholonomic(spec, init, cfg),
    }
}

/// One classical Runge-Kutta step of `ẏ = f(y)`.
pub(crate) fn rk4_step<T: Real>(y: &[T], k1: &[T], dt: T, mut f: impl FnMut(&[T]) -> Result<Vec<T>>) -> Result<Vec<T>> {
    let half = dt * T::lit(0.5);
    let shift = |k: &[T], h: T| -> Vec<T> { y.iter().zip(k).map(|(&a, &b)| a + h * b).collect() };
    let k2 = f(&shift(k1, half))?;
    let k3 = f(&shift(&k2, half))?;
    let k4 = f(&shift(&k3, dt))?;
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    Ok((0..y.len()).map(|i| y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i])).collect())
}

/// One implicit midpoint step `y₁ = y₀ + dt f((y₀ + y₁)/2)` by fixed-point
/// iteration started from the explicit Euler guess.
pub(crate) fn midpoint_step<T: Real>(
    y: &[T],
    k1: &[T],
    dt: T,
    tol: T,
    max_iter: usize,
    mut f: impl FnMut(&[T]) -> Result<Vec<T>>,
) -> Result<Vec<T>> {
    let half = T::lit(0.5);
    let mut next: Vec<T> = y.iter().zip(k1).map(|(&a, &b)| a + dt * b).collect();
    for _ in 0..max_iter {
        let mid: Vec<T> = y.iter().zip(&next).map(|(&a, &b)| half * (a + b)).collect();
        let k = f(&mid)?;
        let updated: Vec<T> = y.iter().zip(&k).map(|(&a, &b)| a + dt * b).collect();
        let change = crate::scalar::distance(&updated, &next);
        next = updated;
        let scale = T::one().max(crate::scalar::max_norm(&next));
        if change <= tol * scale {
            return Ok(next);
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_is_robust() {
        assert_eq!(SolverConfig::new(1e-3, 10.0).steps(), 10_000);
        assert_eq!(SolverConfig::new(0.1, 1.0).steps(), 10);
        assert_eq!(SolverConfig::new(0.3, 1.0).steps(), 3);
        assert_eq!(SolverConfig::new(1.0, 0.0).steps(), 0);
    }

    #[test]
    fn invalid_configs() {
        assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(1e-3, -1.0).validate().is_err());
        let mut c = SolverConfig::new(1e-3, 1.0);
        c.newton_tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rk4_is_exact_on_cubics() {
        // y' = 3t^2 written autonomously as (t, y)
        let f = |y: &[f64]| Ok(vec![1.0, 3.0 * y[0] * y[0]]);
        let y0 = [0.0, 0.0];
        let k1 = f(&y0).unwrap();
        let y1 = rk4_step(&y0, &k1, 0.5, f).unwrap();
        assert!((y1[1] - 0.125).abs() < 1e-15);
    }
}
