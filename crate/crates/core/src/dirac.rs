//! Dirac structures: enumerated bases for the linear case, residual
//! evaluators for the structures over the dynamical bundles.

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::geometry::{ExtendedCovector, ExtendedPoint, ExtendedTangent, PontryaginCovector, PontryaginTangent, VakState};
use crate::linalg::{reject_from_span, Matrix, Svd};
use crate::scalar::{dot, norm, Real};
use crate::system::SystemSpec;

/// Relative rank cutoff used for every subspace computation here.
pub const RANK_TOL: f64 = 1e-10;
/// Bound on the pairing over a certified basis.
pub const PAIRING_TOL: f64 = 1e-12;

/// A two-form `Ω` on `V = ℝᵈ` together with a subspace `Δ` (columns of `delta`).
///
/// The flat map is `v ↦ Ω·v`, so `D = {(v, α) : v ∈ Δ, α − Ω·v ∈ Δ°}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDiracData<T> {
    omega: Matrix<T>,
    delta: Matrix<T>,
}

impl<T: Real> LinearDiracData<T> {
    /// Requires `Ω` antisymmetric to 1e-14 and `Δ` of full column rank.
    pub fn new(omega: Matrix<T>, delta: Matrix<T>) -> Result<Self> {
        let data = Self::new_unchecked(omega, delta)?;
        let d = data.dim();
        let scale = T::one().max(data.omega.max_abs());
        for i in 0..d {
            for j in 0..d {
                if (data.omega[(i, j)] + data.omega[(j, i)]).abs() > T::lit(1e-14) * scale {
                    return Err(Error::InvalidConfig("two-form is not antisymmetric".into()));
                }
            }
        }
        data.delta_rank_check()?;
        Ok(data)
    }

    /// Only dimensions are checked; used to feed deliberately broken forms.
    pub fn new_unchecked(omega: Matrix<T>, delta: Matrix<T>) -> Result<Self> {
        check_len("two-form columns", omega.rows(), omega.cols())?;
        check_len("distribution basis rows", omega.rows(), delta.rows())?;
        Ok(Self { omega, delta })
    }

    pub fn dim(&self) -> usize {
        self.omega.rows()
    }

    pub fn omega(&self) -> &Matrix<T> {
        &self.omega
    }

    pub fn delta(&self) -> &Matrix<T> {
        &self.delta
    }

    fn delta_rank_check(&self) -> Result<()> {
        let k = self.delta.cols();
        if k == 0 {
            return Ok(());
        }
        let rank = Svd::new(&self.delta).rank(T::lit(RANK_TOL));
        if rank < k {
            return Err(Error::RankDeficient { what: "distribution basis", rank, required: k });
        }
        Ok(())
    }

    /// Random antisymmetric form and random `k`-dimensional distribution.
    pub fn random(rng: &mut impl Rng, d: usize, k: usize) -> Self {
        let a = Matrix::from_fn(d, d, |_, _| T::lit(rng.random_range(-1.0..1.0)));
        let omega = Matrix::from_fn(d, d, |i, j| a[(i, j)] - a[(j, i)]);
        let delta = Matrix::from_fn(d, k, |_, _| T::lit(rng.random_range(-1.0..1.0)));
        Self { omega, delta }
    }

    /// Same distribution with the form replaced by a symmetric one.
    pub fn symmetric_control(rng: &mut impl Rng, d: usize, k: usize) -> Self {
        let a = Matrix::from_fn(d, d, |_, _| T::lit(rng.random_range(-1.0..1.0)));
        let omega = Matrix::from_fn(d, d, |i, j| a[(i, j)] + a[(j, i)]);
        let delta = Matrix::from_fn(d, k, |_, _| T::lit(rng.random_range(-1.0..1.0)));
        Self { omega, delta }
    }
}

/// Element `(v, α)` of `V ⊕ V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPair<T> {
    pub v: Vec<T>,
    pub alpha: Vec<T>,
}

/// `⟨⟨(v, α), (v̄, ᾱ)⟩⟩ = ⟨α, v̄⟩ + ⟨ᾱ, v⟩`.
pub fn symmetric_pairing<T: Real>(a: &LinearPair<T>, b: &LinearPair<T>) -> T {
    dot(&a.alpha, &b.v) + dot(&b.alpha, &a.v)
}

/// `{(b, Ω·b) : b ∈ cols Δ} ∪ {(0, c) : c ∈ basis Δ°}`; always `d` pairs.
pub fn linear_dirac_basis<T: Real>(data: &LinearDiracData<T>) -> Result<Vec<LinearPair<T>>> {
    data.delta_rank_check()?;
    let d = data.dim();
    let mut basis: Vec<LinearPair<T>> = (0..data.delta.cols())
        .map(|j| {
            let v = data.delta.column(j);
            let alpha = data.omega.mul_vec(&v);
            LinearPair { v, alpha }
        })
        .collect();
    let annihilator = if data.delta.cols() == 0 {
        (0..d).map(|i| (0..d).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
    } else {
        Svd::new(&data.delta.transpose()).null_space(T::lit(RANK_TOL))
    };
    basis.extend(annihilator.into_iter().map(|c| LinearPair { v: vec![T::zero(); d], alpha: c }));
    Ok(basis)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfOrthogonality<T> {
    pub max_pairing: T,
    pub dim: usize,
    pub expected_dim: usize,
    pub passed: bool,
}

/// Certifies `D = D⊥` from isotropy plus `dim D = d`.
pub fn check_self_orthogonal<T: Real>(data: &LinearDiracData<T>) -> Result<SelfOrthogonality<T>> {
    let basis = linear_dirac_basis(data)?;
    let mut max_pairing = T::zero();
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i..] {
            max_pairing = max_pairing.max(symmetric_pairing(a, b).abs());
        }
    }
    let stacked: Vec<Vec<T>> = basis.iter().map(|b| [&b.v[..], &b.alpha].concat()).collect();
    let dim = if stacked.is_empty() { 0 } else { Svd::new(&Matrix::from_rows(&stacked)).rank(T::lit(RANK_TOL)) };
    let expected_dim = data.dim();
    Ok(SelfOrthogonality { max_pairing, dim, expected_dim, passed: max_pairing <= T::lit(PAIRING_TOL) && dim == expected_dim })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Aggregation {
    #[default]
    Max,
    Sum,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Max => "max",
            Aggregation::Sum => "sum",
        }
    }
}

/// Distance of a pair from a Dirac structure, one Euclidean norm per
/// defining condition. The three summary fields group the conditions into
/// the tangent, covector and base-point parts.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracResidual<T> {
    pub tangent_violation: T,
    pub covector_violation: T,
    pub base_point_violation: T,
    pub conditions: Vec<(&'static str, T)>,
}

impl<T: Real> DiracResidual<T> {
    pub fn total(&self, aggregation: Aggregation) -> T {
        let values = self.conditions.iter().map(|c| c.1);
        match aggregation {
            Aggregation::Max => values.fold(T::zero(), T::max),
            Aggregation::Sum => values.fold(T::zero(), |a, b| a + b),
        }
    }

    pub fn condition(&self, name: &str) -> Option<T> {
        self.conditions.iter().find(|c| c.0 == name).map(|c| c.1)
    }
}

fn diff_norm<T: Real>(a: &[T], b: &[T]) -> T {
    crate::scalar::distance(a, b)
}

fn sum_norm<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x + y) * (x + y)).sqrt()
}

fn combined<T: Real>(parts: &[T]) -> T {
    norm(parts)
}

/// Tangent-covector pair `((q̇, ṗ), (α, w))` over a point of `T*Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCovectorPair<T> {
    pub qdot: Vec<T>,
    pub pdot: Vec<T>,
    pub alpha: Vec<T>,
    pub w: Vec<T>,
}

/// Membership in the induced structure: `q̇ ∈ Δ`, `w = q̇`, `α + ṗ ∈ Δ°`.
pub fn induced_dirac_residual<T: Real>(
    spec: &SystemSpec<T>,
    q: &[T],
    p: &[T],
    pair: &TangentCovectorPair<T>,
) -> Result<DiracResidual<T>> {
    let n = spec.n();
    check_len("base q", n, q.len())?;
    check_len("base p", n, p.len())?;
    for (what, len) in [("q̇", pair.qdot.len()), ("ṗ", pair.pdot.len()), ("α", pair.alpha.len()), ("w", pair.w.len())] {
        check_len(what, n, len)?;
    }
    let mu = spec.mu(q)?;
    let tangent: Vec<T> = mu.iter().map(|row| dot(row, &pair.qdot)).collect();
    let force: Vec<T> = pair.alpha.iter().zip(&pair.pdot).map(|(&a, &b)| a + b).collect();
    let covector = norm(&reject_from_span(&force, &mu, T::lit(RANK_TOL)));
    let tangent = norm(&tangent);
    let base = diff_norm(&pair.w, &pair.qdot);
    Ok(DiracResidual {
        tangent_violation: tangent,
        covector_violation: covector,
        base_point_violation: base,
        conditions: vec![("qdot in distribution", tangent), ("alpha + pdot in annihilator", covector), ("w - qdot", base)],
    })
}

/// Membership in `D̄`: `w = q̇`, `β = 0`, `α + ṗ = 0`, `u = 0`.
pub fn bar_dirac_residual<T: Real>(
    spec: &SystemSpec<T>,
    state: &VakState<T>,
    xdot: &PontryaginTangent<T>,
    covector: &PontryaginCovector<T>,
) -> Result<DiracResidual<T>> {
    let (n, m) = (spec.n(), spec.m());
    spec.check_state(state)?;
    xdot.check(n, m)?;
    covector.check(n, m)?;
    let w = diff_norm(&covector.w, &xdot.qdot);
    let beta = norm(&covector.beta);
    let force = sum_norm(&covector.alpha, &xdot.pdot);
    let u = norm(&covector.u);
    Ok(DiracResidual {
        tangent_violation: w,
        covector_violation: combined(&[beta, force, u]),
        base_point_violation: T::zero(),
        conditions: vec![("w - qdot", w), ("beta", beta), ("alpha + pdot", force), ("u", u)],
    })
}

/// Membership in `D̂`: `u = q̇`, `α + ṗ = 0`, `w = 0`, and the covector must
/// sit over the given base point.
pub fn hat_dirac_residual<T: Real>(
    base: &ExtendedPoint<T>,
    xdot: &ExtendedTangent<T>,
    covector: &ExtendedCovector<T>,
) -> Result<DiracResidual<T>> {
    base.check()?;
    let (n, m) = base.dims();
    xdot.check(n, m)?;
    covector.check()?;
    check_len("covector base dimension", n, covector.base.q.len())?;
    check_len("covector base multipliers", m, covector.base.lambda.len())?;
    let u = diff_norm(&covector.u, &xdot.qdot);
    let force = sum_norm(&covector.alpha, &xdot.pdot);
    let w = norm(&covector.w);
    let base_gap = combined(&[
        diff_norm(&base.q, &covector.base.q),
        diff_norm(&base.p, &covector.base.p),
        diff_norm(&base.lambda, &covector.base.lambda),
    ]);
    Ok(DiracResidual {
        tangent_violation: u,
        covector_violation: combined(&[force, w]),
        base_point_violation: base_gap,
        conditions: vec![("u - qdot", u), ("alpha + pdot", force), ("w", w), ("base point", base_gap)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{presymp_bar_flat, presymp_hat_flat};
    use crate::systems::builtin;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn canonical(d: usize) -> Matrix<f64> {
        let h = d / 2;
        Matrix::from_fn(d, d, |i, j| {
            if j == i + h && i < h {
                1.0
            } else if i == j + h && j < h {
                -1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn two_dimensional_example() {
        let omega = Matrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let delta = Matrix::from_rows(&[vec![1.0], vec![0.0]]);
        let data = LinearDiracData::new(omega, delta).unwrap();
        let basis = linear_dirac_basis(&data).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(basis[0], LinearPair { v: vec![1.0, 0.0], alpha: vec![0.0, -1.0] });
        assert_eq!(basis[1].v, vec![0.0, 0.0]);
        assert!(basis[1].alpha[0].abs() < 1e-15 && (basis[1].alpha[1].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn graph_and_degenerate_cases() {
        let full = LinearDiracData::new(canonical(4), Matrix::identity(4)).unwrap();
        let report = check_self_orthogonal(&full).unwrap();
        assert!(report.passed && report.dim == 4 && report.max_pairing <= 1e-12);
        let basis = linear_dirac_basis(&full).unwrap();
        assert!(basis.iter().all(|b| b.alpha == canonical(4).mul_vec(&b.v)));

        let empty = LinearDiracData::new(canonical(4), Matrix::zeros(4, 0)).unwrap();
        let basis = linear_dirac_basis(&empty).unwrap();
        assert_eq!(basis.len(), 4);
        assert!(basis.iter().all(|b| b.v == vec![0.0; 4]));
        assert!(check_self_orthogonal(&empty).unwrap().passed);
    }

    #[test]
    fn random_instances_and_negative_control() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let data = LinearDiracData::<f64>::random(&mut rng, 6, 3);
            assert!(check_self_orthogonal(&data).unwrap().passed);
        }
        let bad = LinearDiracData::<f64>::symmetric_control(&mut rng, 6, 3);
        let report = check_self_orthogonal(&bad).unwrap();
        assert!(!report.passed && report.max_pairing > 1e-3);
        assert!(LinearDiracData::new(bad.omega().clone(), bad.delta().clone()).is_err());
    }

    #[test]
    fn rank_deficient_distribution_rejected() {
        let delta = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0]]);
        let omega = Matrix::zeros(3, 3);
        assert!(matches!(LinearDiracData::new(omega, delta), Err(Error::RankDeficient { rank: 1, required: 2, .. })));
    }

    #[test]
    fn induced_residual_on_disk() {
        let spec = builtin::<f64>("disk").unwrap();
        let q = [0.0; 4];
        let spin = TangentCovectorPair {
            qdot: vec![0.0, 0.0, 1.0, 0.0],
            pdot: vec![0.0; 4],
            alpha: vec![0.0; 4],
            w: vec![0.0, 0.0, 1.0, 0.0],
        };
        let r = induced_dirac_residual(&spec, &q, &q, &spin).unwrap();
        assert_eq!(r.total(Aggregation::Max), 0.0);

        let mut shifted = spin.clone();
        shifted.w[0] = 0.5;
        let r = induced_dirac_residual(&spec, &q, &q, &shifted).unwrap();
        assert_eq!(r.base_point_violation, 0.5);

        let mut reaction = spin.clone();
        reaction.alpha = vec![0.0, -3.0, 0.0, 0.0];
        let r = induced_dirac_residual(&spec, &q, &q, &reaction).unwrap();
        assert!(r.covector_violation < 1e-15);
    }

    #[test]
    fn bar_residual_graph_membership_and_perturbation() {
        let spec = builtin::<f64>("particle").unwrap();
        let state = VakState::new(vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![-1.0, 0.0, 3.0], vec![2.0]);
        let xdot = PontryaginTangent {
            qdot: vec![1.0, 0.0, 1.0],
            vdot: vec![5.0, 1.0, -2.0],
            pdot: vec![0.0, -2.0, 0.0],
            lambdadot: vec![3.0],
        };
        let mut cov = presymp_bar_flat(&state, &xdot).unwrap();
        assert_eq!(bar_dirac_residual(&spec, &state, &xdot, &cov).unwrap().total(Aggregation::Max), 0.0);
        cov.u[0] = 1e-3;
        assert_eq!(bar_dirac_residual(&spec, &state, &xdot, &cov).unwrap().total(Aggregation::Max), 1e-3);
    }

    #[test]
    fn hat_residual_ignores_multiplier_rate() {
        let base = ExtendedPoint { q: vec![0.5, 1.0], p: vec![1.0, -1.0], lambda: vec![0.3] };
        let xdot = ExtendedTangent { qdot: vec![1.0, 2.0], pdot: vec![0.1, 0.2], lambdadot: vec![9.0] };
        let cov = presymp_hat_flat(&base, &xdot).unwrap();
        let r = hat_dirac_residual(&base, &xdot, &cov).unwrap();
        assert_eq!(r.total(Aggregation::Sum), 0.0);
        let other = ExtendedTangent { lambdadot: vec![-4.0], ..xdot.clone() };
        assert_eq!(hat_dirac_residual(&base, &other, &cov).unwrap(), r);
    }
}
