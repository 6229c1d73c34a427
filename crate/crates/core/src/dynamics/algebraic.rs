use crate::error::{check_len, Error, Result};
use crate::linalg::{solve_checked, Matrix};
use crate::scalar::{max_norm, Real};
use crate::system::SystemSpec;

use super::MAX_CONDITION;

/// A constraint whose velocity gradient is below this in max-norm is treated
/// as holonomic.
const HOLONOMIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicSolution<T> {
    pub v: Vec<T>,
    pub lambda: Vec<T>,
    pub iterations: usize,
    /// Max-norm of `(∂𝔏/∂v − p, φ)` at the returned point.
    pub residual: T,
}

/// Vector field of the `(q, p)` system at one point, with the algebraic
/// variables it was evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct VakRhs<T> {
    pub qdot: Vec<T>,
    pub pdot: Vec<T>,
    pub v: Vec<T>,
    pub lambda: Vec<T>,
    pub iterations: usize,
}

impl<T: Real> VakRhs<T> {
    pub(crate) fn flat(&self) -> Vec<T> {
        self.qdot.iter().chain(&self.pdot).copied().collect()
    }
}

fn residual<T: Real>(spec: &SystemSpec<T>, q: &[T], p: &[T], v: &[T], lambda: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let d = spec.vak_derivatives(q, v, lambda)?;
    let f: Vec<T> = d.dv.iter().zip(p).map(|(&g, &p)| g - p).chain(d.phi.iter().copied()).collect();
    Ok((f, d.phi_dv))
}

/// Bordered Jacobian `[[L_vv + λ·φ_vv, φ_vᵀ], [φ_v, 0]]`.
fn bordered<T: Real>(spec: &SystemSpec<T>, q: &[T], v: &[T], lambda: &[T], phi_dv: &[Vec<T>]) -> Result<Matrix<T>> {
    let (n, m) = (spec.n(), spec.m());
    let mut hess = spec.lagrangian().second(q, v)?.vv;
    for (c, &lam) in spec.constraints().iter().zip(lambda) {
        let vv = c.second(q, v)?.vv;
        for i in 0..n {
            for j in 0..n {
                hess[(i, j)] = hess[(i, j)] + lam * vv[(i, j)];
            }
        }
    }
    Ok(Matrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => hess[(i, j)],
        (true, false) => phi_dv[j - n][i],
        (false, true) => phi_dv[i - n][j],
        (false, false) => T::zero(),
    }))
}

/// Newton solve of `∂𝔏/∂v(q, v, λ) = p`, `φ(q, v) = 0` for `(v, λ)`.
///
/// At least one Newton step is always taken. Convergence is declared when
/// the max-norm of the residual is at most `tol · max(1, ‖p‖∞)`.
pub fn solve_algebraic<T: Real>(
    spec: &SystemSpec<T>,
    q: &[T],
    p: &[T],
    guess: (&[T], &[T]),
    tol: T,
    max_iter: usize,
) -> Result<AlgebraicSolution<T>> {
    let (n, m) = (spec.n(), spec.m());
    check_len("q", n, q.len())?;
    check_len("p", n, p.len())?;
    check_len("v guess", n, guess.0.len())?;
    check_len("λ guess", m, guess.1.len())?;
    let mut v = guess.0.to_vec();
    let mut lambda = guess.1.to_vec();
    let target = tol * T::one().max(max_norm(p));

    let (mut f, mut phi_dv) = residual(spec, q, p, &v, &lambda)?;
    if let Some(index) = phi_dv.iter().position(|row| max_norm(row) <= T::lit(HOLONOMIC_TOL)) {
        return Err(Error::HolonomicConstraint { index });
    }
    for iteration in 1..=max_iter {
        let jac = bordered(spec, q, &v, &lambda, &phi_dv)?;
        let rhs: Vec<T> = f.iter().map(|&x| -x).collect();
        let step = solve_checked(&jac, &rhs, T::lit(MAX_CONDITION))?;
        for i in 0..n {
            v[i] = v[i] + step[i];
        }
        for a in 0..m {
            lambda[a] = lambda[a] + step[n + a];
        }
        (f, phi_dv) = residual(spec, q, p, &v, &lambda)?;
        let size = max_norm(&f);
        if !size.is_finite() {
            break;
        }
        if size <= target {
            return Ok(AlgebraicSolution { v, lambda, iterations: iteration, residual: size });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: max_norm(&f).to_f64_lossy() })
}

/// `q̇ = v`, `ṗ = ∂𝔏/∂q` with `(v, λ)` solved from `(q, p)` starting at `warm_start`.
pub fn vak_rhs<T: Real>(
    spec: &SystemSpec<T>,
    q: &[T],
    p: &[T],
    warm_start: (&[T], &[T]),
    tol: T,
    max_iter: usize,
) -> Result<VakRhs<T>> {
    let sol = solve_algebraic(spec, q, p, warm_start, tol, max_iter)?;
    let d = spec.vak_derivatives(q, &sol.v, &sol.lambda)?;
    Ok(VakRhs { qdot: sol.v.clone(), pdot: d.dq, v: sol.v, lambda: sol.lambda, iterations: sol.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::field::ScalarField;
    use crate::systems::builtin;
    use std::collections::BTreeMap;

    fn free(n: usize) -> SystemSpec<f64> {
        let l = ScalarField::from_expression(parse("0.5*(v0^2 + v1^2)", n).unwrap(), n).unwrap();
        SystemSpec::new("free", n, l, vec![], BTreeMap::new()).unwrap()
    }

    #[test]
    fn free_particle_one_step() {
        let spec = free(2);
        let sol = solve_algebraic(&spec, &[0.0, 0.0], &[2.0, 3.0], (&[0.0, 0.0], &[]), 1e-12, 50).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!((sol.v[0] - 2.0).abs() < 1e-15 && (sol.v[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn particle_inverse_map() {
        let spec = builtin::<f64>("particle").unwrap();
        let sol = solve_algebraic(&spec, &[0.0, 1.0, 0.0], &[-1.0, 0.0, 3.0], (&[0.9, 0.1, 1.1], &[1.8]), 1e-12, 50).unwrap();
        for (a, b) in sol.v.iter().zip([1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((sol.lambda[0] - 2.0).abs() < 1e-12);
        let rhs = vak_rhs(&spec, &[0.0, 1.0, 0.0], &[-1.0, 0.0, 3.0], (&sol.v, &sol.lambda), 1e-12, 50).unwrap();
        assert!(rhs.pdot[0].abs() < 1e-12 && (rhs.pdot[1] + 2.0).abs() < 1e-12 && rhs.pdot[2].abs() < 1e-12);
    }

    #[test]
    fn holonomic_constraint_is_rejected() {
        let n = 2;
        let l = ScalarField::from_expression(parse("0.5*(v0^2 + v1^2)", n).unwrap(), n).unwrap();
        let c = ScalarField::from_expression(parse("q0 - q1", n).unwrap(), n).unwrap();
        let spec = SystemSpec::new("holo", n, l, vec![c], BTreeMap::new()).unwrap();
        let err = solve_algebraic(&spec, &[0.0, 0.0], &[1.0, 0.0], (&[0.0, 0.0], &[0.0]), 1e-12, 50).unwrap_err();
        assert!(matches!(err, Error::HolonomicConstraint { index: 0 }));
    }
}
