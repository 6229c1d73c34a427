//! Numerical pullback of the canonical form of `TT*Q` to the vakonomic
//! Lagrangian submanifold and to the nonholonomic dynamical submanifold.
//!
//! Both submanifolds are parameterized by `(q, q̇, λ)` on the constraint set
//! and have dimension `2n`. Tangent vectors come from central differences of
//! the embedding along a basis of parameter directions:
//!
//! - `n` configuration directions `(eⱼ, δq̇ⱼ, 0)` with `δq̇ⱼ` the minimum-norm
//!   velocity correction keeping the linearized constraint satisfied,
//! - `n − m` velocity directions `(0, k, 0)` with `k ∈ ker ∂φ/∂q̇`,
//! - `m` multiplier directions `(0, 0, eₐ)`.
//!
//! The first `2n − m` directions hold `λ` fixed and form the *state block*.
//! On the nonholonomic submanifold the pullback restricted to the state block
//! is `λ_α ∂μ^α_i/∂q^j dq^i ∧ dq^j`, proportional to `λ`. The multiplier
//! directions add a coupling `dq^i ∧ μ^α_i dλ_α` which does not vanish at
//! `λ = 0`; the full matrix reports it, the obstruction summary excludes it.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{omega_tt, TTStarPoint};
use crate::linalg::{Matrix, Svd};
use crate::scalar::{dot, max_norm, norm, Real};
use crate::system::SystemSpec;

/// Chart constraint residual bound.
pub const CHART_TOL: f64 = 1e-10;
/// Relative FD step for tangent vectors.
pub const STEP_SCALE: f64 = 1e-5;
/// Values at or below this are certified zero for the default step.
pub const ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubmanifoldKind {
    Vakonomic,
    Nonholonomic,
}

impl SubmanifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Vakonomic => "vakonomic",
            Self::Nonholonomic => "nonholonomic",
        }
    }
}

/// Parameter point `(q, q̇, λ)` on the constraint set.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmanifoldChart<T> {
    kind: SubmanifoldKind,
    q: Vec<T>,
    qdot: Vec<T>,
    lambda: Vec<T>,
}

impl<T: Real> SubmanifoldChart<T> {
    pub fn new(spec: &SystemSpec<T>, kind: SubmanifoldKind, q: Vec<T>, qdot: Vec<T>, lambda: Vec<T>) -> Result<Self> {
        let chart = Self { kind, q, qdot, lambda };
        let residual = chart.constraint_residual(spec)?;
        if !(residual <= T::lit(CHART_TOL)) {
            return Err(Error::ChartConstraintViolated { residual: residual.to_f64_lossy() });
        }
        Ok(chart)
    }

    pub fn kind(&self) -> SubmanifoldKind {
        self.kind
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn qdot(&self) -> &[T] {
        &self.qdot
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    fn params(&self) -> Vec<T> {
        [&self.q[..], &self.qdot, &self.lambda].concat()
    }

    /// `|φ(q, q̇)|` for the vakonomic kind, `|μ(q)·q̇|` for the nonholonomic one.
    pub fn constraint_residual(&self, spec: &SystemSpec<T>) -> Result<T> {
        crate::error::check_len("chart q", spec.n(), self.q.len())?;
        crate::error::check_len("chart q̇", spec.n(), self.qdot.len())?;
        crate::error::check_len("chart λ", spec.m(), self.lambda.len())?;
        let values = match self.kind {
            SubmanifoldKind::Vakonomic => spec.phi(&self.q, &self.qdot)?,
            SubmanifoldKind::Nonholonomic => spec.mu(&self.q)?.iter().map(|row| dot(row, &self.qdot)).collect(),
        };
        Ok(norm(&values))
    }

    /// Random chart: `q` and a velocity draw uniform in `[-1, 1]`, the
    /// velocity projected onto the constraint set, `λ` as given or a random
    /// unit vector.
    pub fn random(spec: &SystemSpec<T>, kind: SubmanifoldKind, rng: &mut impl Rng, lambda: Option<&[T]>) -> Result<Self> {
        let n = spec.n();
        let m = spec.m();
        let q: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
        let mut qdot: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
        let lambda = match lambda {
            Some(l) => l.to_vec(),
            None => {
                let raw: Vec<T> = (0..m).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
                let len = norm(&raw);
                if len > T::zero() {
                    raw.iter().map(|&x| x / len).collect()
                } else {
                    raw
                }
            }
        };
        if kind == SubmanifoldKind::Nonholonomic {
            spec.require_forms()?;
        }
        for _ in 0..30 {
            let chart = Self { kind, q: q.clone(), qdot: qdot.clone(), lambda: lambda.clone() };
            let phi = match kind {
                SubmanifoldKind::Vakonomic => spec.phi(&q, &qdot)?,
                SubmanifoldKind::Nonholonomic => spec.mu(&q)?.iter().map(|row| dot(row, &qdot)).collect(),
            };
            if max_norm(&phi) <= T::lit(1e-14) {
                return Ok(chart);
            }
            let jac = velocity_jacobian(spec, &q, &qdot)?;
            let step = Svd::new(&jac).solve_min_norm(&phi, T::lit(1e-12));
            for (x, s) in qdot.iter_mut().zip(step) {
                *x = *x - s;
            }
        }
        Self::new(spec, kind, q, qdot, lambda)
    }
}

fn velocity_jacobian<T: Real>(spec: &SystemSpec<T>, q: &[T], qdot: &[T]) -> Result<Matrix<T>> {
    let rows: Vec<Vec<T>> = spec.constraints().iter().map(|c| c.eval_with_grad(q, qdot).map(|g| g.dv)).collect::<Result<_>>()?;
    Ok(Matrix::from_rows(&rows))
}

fn embed_raw<T: Real>(spec: &SystemSpec<T>, kind: SubmanifoldKind, x: &[T]) -> Result<TTStarPoint<T>> {
    let n = spec.n();
    let (q, rest) = x.split_at(n);
    let (qdot, lambda) = rest.split_at(n);
    let (p, pdot) = match kind {
        SubmanifoldKind::Vakonomic => {
            let d = spec.vak_derivatives(q, qdot, lambda)?;
            (d.dv, d.dq)
        }
        SubmanifoldKind::Nonholonomic => {
            let g = spec.lagrangian().eval_with_grad(q, qdot)?;
            let mut pdot = g.dq;
            for (row, &lam) in spec.mu(q)?.iter().zip(lambda) {
                for (pd, &mu) in pdot.iter_mut().zip(row) {
                    *pd = *pd + lam * mu;
                }
            }
            (g.dv, pdot)
        }
    };
    TTStarPoint::new(q.to_vec(), p, qdot.to_vec(), pdot)
}

/// Point `(q, p, q̇, ṗ)` of `TT*Q` over the chart.
pub fn embed<T: Real>(spec: &SystemSpec<T>, chart: &SubmanifoldChart<T>) -> Result<TTStarPoint<T>> {
    let residual = chart.constraint_residual(spec)?;
    if !(residual <= T::lit(CHART_TOL)) {
        return Err(Error::ChartConstraintViolated { residual: residual.to_f64_lossy() });
    }
    embed_raw(spec, chart.kind, &chart.params())
}

#[derive(Debug, Clone)]
pub struct TangentBasis<T> {
    /// Parameter directions in `(q, q̇, λ)`.
    pub directions: Vec<Vec<T>>,
    /// Pushed-forward tangent vectors `(Δq, Δp, Δq̇, Δṗ)`.
    pub vectors: Vec<TTStarPoint<T>>,
    /// The first `state_count` directions hold `λ` fixed.
    pub state_count: usize,
    pub step: T,
}

/// Parameter directions spanning the tangent space of the constraint set.
fn parameter_directions<T: Real>(spec: &SystemSpec<T>, chart: &SubmanifoldChart<T>) -> Result<Vec<Vec<T>>> {
    let (n, m) = (spec.n(), spec.m());
    let dim = 2 * n + m;
    let tol = T::lit(1e-10);
    let grads: Vec<_> = spec.constraints().iter().map(|c| c.eval_with_grad(&chart.q, &chart.qdot)).collect::<Result<_>>()?;
    // The nonholonomic constraint μ(q)·q̇ has the same linearization as φ
    // because φ is linear in the velocities whenever the forms exist.
    let phi_q = Matrix::from_rows(&grads.iter().map(|g| g.dq.clone()).collect::<Vec<_>>());
    let phi_v = Matrix::from_rows(&grads.iter().map(|g| g.dv.clone()).collect::<Vec<_>>());

    let mut dirs = Vec::with_capacity(2 * n);
    let embed_dir = |dq: &[T], dv: &[T]| -> Vec<T> {
        let mut d = vec![T::zero(); dim];
        d[..n].copy_from_slice(dq);
        d[n..2 * n].copy_from_slice(dv);
        d
    };
    let velocity_rank = if m == 0 { 0 } else { Svd::new(&phi_v).rank(tol) };
    if velocity_rank == m {
        let svd = (m > 0).then(|| Svd::new(&phi_v));
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            let dv = match &svd {
                Some(svd) => {
                    let rhs: Vec<T> = (0..m).map(|a| -phi_q[(a, j)]).collect();
                    svd.solve_min_norm(&rhs, tol)
                }
                None => vec![T::zero(); n],
            };
            dirs.push(embed_dir(&e, &dv));
        }
        let kernel = match &svd {
            Some(svd) => svd.null_space(tol),
            None => (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect(),
        };
        for k in kernel {
            dirs.push(embed_dir(&vec![T::zero(); n], &k));
        }
    } else {
        let joint = Matrix::from_fn(m, 2 * n, |a, j| if j < n { phi_q[(a, j)] } else { phi_v[(a, j - n)] });
        let svd = Svd::new(&joint);
        let rank = svd.rank(tol);
        if rank < m {
            return Err(Error::RankDeficient { what: "constraint linearization", rank, required: m });
        }
        for k in svd.null_space(tol) {
            dirs.push(embed_dir(&k[..n], &k[n..]));
        }
    }
    for a in 0..m {
        let mut d = vec![T::zero(); dim];
        d[2 * n + a] = T::one();
        dirs.push(d);
    }
    Ok(dirs)
}

pub fn tangent_basis<T: Real>(spec: &SystemSpec<T>, chart: &SubmanifoldChart<T>) -> Result<TangentBasis<T>> {
    tangent_basis_with_step(spec, chart, T::lit(STEP_SCALE))
}

pub fn tangent_basis_with_step<T: Real>(
    spec: &SystemSpec<T>,
    chart: &SubmanifoldChart<T>,
    step_scale: T,
) -> Result<TangentBasis<T>> {
    let residual = chart.constraint_residual(spec)?;
    if !(residual <= T::lit(CHART_TOL)) {
        return Err(Error::ChartConstraintViolated { residual: residual.to_f64_lossy() });
    }
    if chart.kind == SubmanifoldKind::Nonholonomic {
        spec.require_forms()?;
    }
    let x0 = chart.params();
    let h = step_scale * T::one().max(norm(&x0));
    let directions = parameter_directions(spec, chart)?;
    let two_h = h + h;
    let vectors = directions
        .iter()
        .map(|d| {
            let plus: Vec<T> = x0.iter().zip(d).map(|(&x, &e)| x + h * e).collect();
            let minus: Vec<T> = x0.iter().zip(d).map(|(&x, &e)| x - h * e).collect();
            let a = embed_raw(spec, chart.kind, &plus)?.to_flat();
            let b = embed_raw(spec, chart.kind, &minus)?.to_flat();
            TTStarPoint::from_flat(&a.iter().zip(&b).map(|(&u, &w)| (u - w) / two_h).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentBasis { state_count: directions.len() - spec.m(), directions, vectors, step: h })
}

/// Pullback value on tangent basis entries `u` and `w`.
pub fn pullback_form<T: Real>(spec: &SystemSpec<T>, chart: &SubmanifoldChart<T>, u: usize, w: usize) -> Result<T> {
    let basis = tangent_basis(spec, chart)?;
    let count = basis.vectors.len();
    if u >= count || w >= count {
        return Err(Error::InvalidConfig(format!("tangent index out of range (basis has {count} vectors)")));
    }
    omega_tt(&basis.vectors[u], &basis.vectors[w])
}

#[derive(Debug, Clone)]
pub struct PullbackMatrix<T> {
    pub kind: SubmanifoldKind,
    /// All `2n × 2n` pairings.
    pub matrix: Matrix<T>,
    pub max_abs: T,
    /// Largest entry with both directions in the state block.
    pub obstruction_max_abs: T,
    /// Closed-form state block `Σ cᵢⱼ (UᵢWⱼ − UⱼWᵢ)` with
    /// `cᵢⱼ = (λ_α/2)(∂μ^α_i/∂qʲ − ∂μ^α_j/∂qⁱ)`; zero for the vakonomic kind.
    pub analytic_obstruction: Matrix<T>,
    /// Largest deviation between the state block and its closed form.
    pub analytic_deviation: T,
    pub state_count: usize,
    pub step: T,
    /// Antisymmetry defect `max |Mᵢⱼ + Mⱼᵢ|`.
    pub antisymmetry: T,
}

/// Antisymmetrized obstruction coefficients `cᵢⱼ`.
pub fn obstruction_coefficients<T: Real>(spec: &SystemSpec<T>, q: &[T], lambda: &[T]) -> Result<Matrix<T>> {
    let n = spec.n();
    let mut c = Matrix::zeros(n, n);
    let half = T::lit(0.5);
    for (form, &lam) in spec.require_forms()?.iter().zip(lambda) {
        let jac = form.jacobian(q)?;
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] = c[(i, j)] + half * lam * (jac[(i, j)] - jac[(j, i)]);
            }
        }
    }
    Ok(c)
}

pub fn pullback_matrix<T: Real>(spec: &SystemSpec<T>, chart: &SubmanifoldChart<T>) -> Result<PullbackMatrix<T>> {
    let basis = tangent_basis(spec, chart)?;
    let count = basis.vectors.len();
    let mut matrix = Matrix::zeros(count, count);
    for i in 0..count {
        for j in i + 1..count {
            let value = omega_tt(&basis.vectors[i], &basis.vectors[j])?;
            matrix[(i, j)] = value;
            matrix[(j, i)] = -value;
        }
    }
    let n = spec.n();
    let mut analytic = Matrix::zeros(count, count);
    if chart.kind == SubmanifoldKind::Nonholonomic {
        let c = obstruction_coefficients(spec, &chart.q, &chart.lambda)?;
        for a in 0..basis.state_count {
            for b in 0..basis.state_count {
                let (u, w) = (&basis.directions[a][..n], &basis.directions[b][..n]);
                let mut value = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        value = value + c[(i, j)] * (u[i] * w[j] - u[j] * w[i]);
                    }
                }
                analytic[(a, b)] = value;
            }
        }
    }
    let mut obstruction = T::zero();
    let mut deviation = T::zero();
    let mut antisymmetry = T::zero();
    for a in 0..count {
        for b in 0..count {
            antisymmetry = antisymmetry.max((matrix[(a, b)] + matrix[(b, a)]).abs());
            if a < basis.state_count && b < basis.state_count {
                obstruction = obstruction.max(matrix[(a, b)].abs());
                deviation = deviation.max((matrix[(a, b)] - analytic[(a, b)]).abs());
            }
        }
    }
    Ok(PullbackMatrix {
        kind: chart.kind,
        max_abs: matrix.max_abs(),
        matrix,
        obstruction_max_abs: obstruction,
        analytic_obstruction: analytic,
        analytic_deviation: deviation,
        state_count: basis.state_count,
        step: basis.step,
        antisymmetry,
    })
}
