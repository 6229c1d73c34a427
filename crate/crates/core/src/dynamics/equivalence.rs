use crate::dirac::{bar_dirac_residual, hat_dirac_residual, Aggregation};
use crate::error::{Error, Result};
use crate::geometry::{ExtendedCovector, ExtendedPoint, ExtendedTangent, PontryaginTangent, VakState};
use crate::scalar::{distance, norm, Real};
use crate::system::SystemSpec;

use super::{Mode, Trajectory};

/// The Dirac differential `d_D𝔏(q, v, λ)` read as a covector on `T*Q × V*`
/// over the base `(q, ∂𝔏/∂v, λ)`.
pub fn differential_covector<T: Real>(spec: &SystemSpec<T>, q: &[T], v: &[T], lambda: &[T]) -> Result<ExtendedCovector<T>> {
    let d = spec.dirac_differential(q, v, lambda)?;
    Ok(ExtendedCovector {
        base: ExtendedPoint { q: d.q().to_vec(), p: d.fiber().to_vec(), lambda: d.lambda().to_vec() },
        alpha: d.cov_q().to_vec(),
        u: d.cov_fiber().to_vec(),
        w: d.cov_lambda().to_vec(),
    })
}

/// Residuals of the three equivalent local forms of the implicit vakonomic
/// equations at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceRow<T> {
    pub t: T,
    /// `max(‖q̇ − v‖, ‖ṗ − ∂𝔏/∂q‖, ‖p − ∂𝔏/∂v‖, ‖φ‖)`
    pub direct: T,
    /// Distance of `(ẋ, dE)` from `D̄`.
    pub bar: T,
    /// Distance of `(ẋ, d_D𝔏)` from `D̂`.
    pub hat: T,
}

impl<T: Real> EquivalenceRow<T> {
    pub fn max_pairwise(&self) -> T {
        (self.direct - self.bar).abs().max((self.direct - self.hat).abs()).max((self.bar - self.hat).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport<T> {
    pub rows: Vec<EquivalenceRow<T>>,
    pub max_direct: T,
    pub max_bar: T,
    pub max_hat: T,
    pub max_pairwise: T,
}

pub fn equivalence_at<T: Real>(
    spec: &SystemSpec<T>,
    state: &VakState<T>,
    xdot: &PontryaginTangent<T>,
    aggregation: Aggregation,
) -> Result<EquivalenceRow<T>> {
    spec.check_state(state)?;
    xdot.check(spec.n(), spec.m())?;
    let d = spec.vak_derivatives(&state.q, &state.v, &state.lambda)?;
    let direct = [distance(&xdot.qdot, &state.v), distance(&xdot.pdot, &d.dq), distance(&state.p, &d.dv), norm(&d.phi)]
        .into_iter()
        .fold(T::zero(), T::max);

    let bar = bar_dirac_residual(spec, state, xdot, &spec.d_energy(state)?)?.total(aggregation);

    let base = ExtendedPoint { q: state.q.clone(), p: state.p.clone(), lambda: state.lambda.clone() };
    let tangent = ExtendedTangent { qdot: xdot.qdot.clone(), pdot: xdot.pdot.clone(), lambdadot: xdot.lambdadot.clone() };
    let covector = differential_covector(spec, &state.q, &state.v, &state.lambda)?;
    let hat = hat_dirac_residual(&base, &tangent, &covector)?.total(aggregation);

    Ok(EquivalenceRow { t: state.t.unwrap_or_else(T::zero), direct, bar, hat })
}

fn derivative<T: Real>(values: &[&[T]], k: usize, h: T) -> Vec<T> {
    let len = values.len();
    let twelve_h = T::lit(12.0) * h;
    let (offsets, weights): ([usize; 5], [f64; 5]) = if k >= 2 && k + 2 < len {
        ([k - 2, k - 1, k, k + 1, k + 2], [1.0, -8.0, 0.0, 8.0, -1.0])
    } else if k == 0 {
        ([0, 1, 2, 3, 4], [-25.0, 48.0, -36.0, 16.0, -3.0])
    } else if k == 1 {
        ([0, 1, 2, 3, 4], [-3.0, -10.0, 18.0, -6.0, 1.0])
    } else if k == len - 1 {
        ([len - 5, len - 4, len - 3, len - 2, len - 1], [3.0, -16.0, 36.0, -48.0, 25.0])
    } else {
        ([len - 5, len - 4, len - 3, len - 2, len - 1], [-1.0, 6.0, -18.0, 10.0, 3.0])
    };
    (0..values[k].len())
        .map(|i| offsets.iter().zip(weights).fold(T::zero(), |acc, (&o, w)| acc + T::lit(w) * values[o][i]) / twelve_h)
        .collect()
}

/// Fourth-order finite-difference estimate of `(q̇, v̇, ṗ, λ̇)` along a
/// trajectory with at least five states; one-sided stencils at the ends.
pub fn estimate_rates<T: Real>(traj: &Trajectory<T>) -> Result<Vec<PontryaginTangent<T>>> {
    let len = traj.len();
    if len < 5 {
        return Err(Error::InvalidConfig(format!("rate estimate needs at least 5 states, got {len}")));
    }
    let h = traj.dt;
    let q: Vec<&[T]> = traj.states.iter().map(|s| s.q.as_slice()).collect();
    let v: Vec<&[T]> = traj.states.iter().map(|s| s.v.as_slice()).collect();
    let p: Vec<&[T]> = traj.states.iter().map(|s| s.p.as_slice()).collect();
    let lambda: Vec<&[T]> = traj.states.iter().map(|s| s.lambda.as_slice()).collect();
    Ok((0..len)
        .map(|k| PontryaginTangent {
            qdot: derivative(&q, k, h),
            vdot: derivative(&v, k, h),
            pdot: derivative(&p, k, h),
            lambdadot: derivative(&lambda, k, h),
        })
        .collect())
}

/// Evaluates the three formulations along a vakonomic trajectory, with `ẋ`
/// estimated from the trajectory itself (or from the vector field when the
/// trajectory is shorter than the stencil).
pub fn theorem_equivalence_report<T: Real>(spec: &SystemSpec<T>, traj: &Trajectory<T>) -> Result<EquivalenceReport<T>> {
    if traj.mode != Mode::Vakonomic {
        return Err(Error::InvalidConfig("equivalence report needs a vakonomic trajectory".into()));
    }
    let rates = if traj.len() >= 5 {
        estimate_rates(traj)?
    } else {
        traj.states
            .iter()
            .map(|s| {
                let d = spec.vak_derivatives(&s.q, &s.v, &s.lambda)?;
                Ok(PontryaginTangent {
                    qdot: s.v.clone(),
                    vdot: vec![T::zero(); spec.n()],
                    pdot: d.dq,
                    lambdadot: vec![T::zero(); spec.m()],
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let rows =
        traj.states.iter().zip(&rates).map(|(s, r)| equivalence_at(spec, s, r, traj.aggregation)).collect::<Result<Vec<_>>>()?;
    let max = |f: fn(&EquivalenceRow<T>) -> T| rows.iter().map(f).fold(T::zero(), T::max);
    Ok(EquivalenceReport {
        max_direct: max(|r| r.direct),
        max_bar: max(|r| r.bar),
        max_hat: max(|r| r.hat),
        max_pairwise: max(|r| r.max_pairwise()),
        rows,
    })
}
