//! Coordinate forms of the iterated bundle maps over `Q = ℝⁿ`.
//!
//! Every point is a set of dense blocks. The maps are permutations and sign
//! flips, so they are generic over [`Coefficient`] and exact for rationals.
//!
//! Block orders:
//!
//! | type                | blocks                          | space            |
//! |---------------------|---------------------------------|------------------|
//! | [`TTStarPoint`]     | `(q, p, dq, dp)`                | `TT*Q`           |
//! | [`TStarTPoint`]     | `(q, dq, dp, p)`                | `T*TQ`           |
//! | [`TStarTStarPoint`] | `(q, p, -dp, dq)`               | `T*T*Q`          |
//! | [`VakCotangentPoint`] | `(q, fiber, λ, cov_q, cov_fiber, cov_λ)` | `T*(TQ×V*)` or `T*(T*Q×V*)` |
//!
//! `T*TQ` keeps the momentum `p` in the last slot: it is the covector
//! component dual to the velocity direction, so `(q, dq)` is the base point and
//! `(dp, p)` the fibre.
//!
//! The symplectic convention throughout is `Ω = dq ∧ dp`.

use crate::error::{check_len, Result};
use crate::scalar::Coefficient;

fn check_blocks(what: &'static str, n: usize, blocks: &[usize]) -> Result<()> {
    if n == 0 {
        return Err(crate::Error::DimensionMismatch { what, expected: 1, found: 0 });
    }
    blocks.iter().try_for_each(|&len| check_len(what, n, len))
}

fn negated<T: Coefficient>(x: &[T]) -> Vec<T> {
    x.iter().map(|&a| -a).collect()
}

fn dot<T: Coefficient>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

macro_rules! accessors {
    ($($name:ident),*) => {
        $(
            pub fn $name(&self) -> &[T] {
                &self.$name
            }
        )*
    };
}

/// Point `(q, p, δq, δp)` of `TT*Q`. Also used as a tangent vector
/// `(Δq, Δp, Δδq, Δδp)` when evaluating [`omega_tt`].
#[derive(Debug, Clone, PartialEq)]
pub struct TTStarPoint<T> {
    q: Vec<T>,
    p: Vec<T>,
    dq: Vec<T>,
    dp: Vec<T>,
}

impl<T: Coefficient> TTStarPoint<T> {
    pub fn new(q: Vec<T>, p: Vec<T>, dq: Vec<T>, dp: Vec<T>) -> Result<Self> {
        check_blocks("TT*Q point", q.len(), &[p.len(), dq.len(), dp.len()])?;
        Ok(Self { q, p, dq, dp })
    }

    pub fn zeros(n: usize) -> Self {
        let z = vec![T::zero(); n];
        Self { q: z.clone(), p: z.clone(), dq: z.clone(), dp: z }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    accessors!(q, p, dq, dp);

    /// Flat layout `(q, p, dq, dp)`.
    pub fn to_flat(&self) -> Vec<T> {
        [&self.q[..], &self.p, &self.dq, &self.dp].concat()
    }

    /// Inverse of [`to_flat`](Self::to_flat); the length must be a positive multiple of 4.
    pub fn from_flat(x: &[T]) -> Result<Self> {
        if x.is_empty() || !x.len().is_multiple_of(4) {
            return Err(crate::Error::DimensionMismatch {
                what: "flat TT*Q point",
                expected: 4 * (x.len() / 4).max(1),
                found: x.len(),
            });
        }
        let n = x.len() / 4;
        Ok(Self { q: x[..n].to_vec(), p: x[n..2 * n].to_vec(), dq: x[2 * n..3 * n].to_vec(), dp: x[3 * n..].to_vec() })
    }
}

/// Point `(q, δq, δp, p)` of `T*TQ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TStarTPoint<T> {
    q: Vec<T>,
    dq: Vec<T>,
    dp: Vec<T>,
    p: Vec<T>,
}

impl<T: Coefficient> TStarTPoint<T> {
    pub fn new(q: Vec<T>, dq: Vec<T>, dp: Vec<T>, p: Vec<T>) -> Result<Self> {
        check_blocks("T*TQ point", q.len(), &[dq.len(), dp.len(), p.len()])?;
        Ok(Self { q, dq, dp, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    accessors!(q, dq, dp, p);
}

/// Point `(q, p, -δp, δq)` of `T*T*Q`; `mdp` is the `-δp` slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TStarTStarPoint<T> {
    q: Vec<T>,
    p: Vec<T>,
    mdp: Vec<T>,
    dq: Vec<T>,
}

impl<T: Coefficient> TStarTStarPoint<T> {
    pub fn new(q: Vec<T>, p: Vec<T>, mdp: Vec<T>, dq: Vec<T>) -> Result<Self> {
        check_blocks("T*T*Q point", q.len(), &[p.len(), mdp.len(), dq.len()])?;
        Ok(Self { q, p, mdp, dq })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    accessors!(q, p, mdp, dq);
}

pub fn kappa<T: Coefficient>(x: &TTStarPoint<T>) -> TStarTPoint<T> {
    TStarTPoint { q: x.q.clone(), dq: x.dq.clone(), dp: x.dp.clone(), p: x.p.clone() }
}

pub fn kappa_inv<T: Coefficient>(x: &TStarTPoint<T>) -> TTStarPoint<T> {
    TTStarPoint { q: x.q.clone(), p: x.p.clone(), dq: x.dq.clone(), dp: x.dp.clone() }
}

pub fn omega_flat<T: Coefficient>(x: &TTStarPoint<T>) -> TStarTStarPoint<T> {
    TStarTStarPoint { q: x.q.clone(), p: x.p.clone(), mdp: negated(&x.dp), dq: x.dq.clone() }
}

pub fn omega_flat_inv<T: Coefficient>(x: &TStarTStarPoint<T>) -> TTStarPoint<T> {
    TTStarPoint { q: x.q.clone(), p: x.p.clone(), dq: x.dq.clone(), dp: negated(&x.mdp) }
}

/// `(q, δq, δp, p) ↦ (q, p, -δp, δq)`, written out directly.
pub fn gamma<T: Coefficient>(x: &TStarTPoint<T>) -> TStarTStarPoint<T> {
    TStarTStarPoint { q: x.q.clone(), p: x.p.clone(), mdp: negated(&x.dp), dq: x.dq.clone() }
}

pub fn gamma_inv<T: Coefficient>(x: &TStarTStarPoint<T>) -> TStarTPoint<T> {
    TStarTPoint { q: x.q.clone(), dq: x.dq.clone(), dp: negated(&x.mdp), p: x.p.clone() }
}

/// Base projection `T*TQ → TQ`: the `(q, δq)` blocks.
pub fn project_to_tq<T: Coefficient>(x: &TStarTPoint<T>) -> (Vec<T>, Vec<T>) {
    (x.q.clone(), x.dq.clone())
}

/// Tangent of the cotangent projection, `TT*Q → TQ`: the `(q, δq)` blocks.
pub fn tangent_projection<T: Coefficient>(x: &TTStarPoint<T>) -> (Vec<T>, Vec<T>) {
    (x.q.clone(), x.dq.clone())
}

/// Canonical form on `TT*Q`:
/// `⟨Δq_V, Δδp_W⟩ − ⟨Δq_W, Δδp_V⟩ + ⟨Δδq_V, Δp_W⟩ − ⟨Δδq_W, Δp_V⟩`.
pub fn omega_tt<T: Coefficient>(v: &TTStarPoint<T>, w: &TTStarPoint<T>) -> Result<T> {
    check_len("omega_tt operands", v.dim(), w.dim())?;
    Ok(dot(&v.q, &w.dp) - dot(&w.q, &v.dp) + dot(&v.dq, &w.p) - dot(&w.dq, &v.p))
}

/// Point of `T*(TQ × V*)` or `T*(T*Q × V*)`.
///
/// Base blocks are `(q, fiber, λ)` and the covector blocks `(cov_q,
/// cov_fiber, cov_λ)` pair with them in the same order. On `TQ × V*` the
/// fibre is the velocity `δq` and the covector reads `(δp, p, w)`; on
/// `T*Q × V*` the fibre is `p` and the covector reads `(-δp, δq, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VakCotangentPoint<T> {
    q: Vec<T>,
    fiber: Vec<T>,
    lambda: Vec<T>,
    cov_q: Vec<T>,
    cov_fiber: Vec<T>,
    cov_lambda: Vec<T>,
}

impl<T: Coefficient> VakCotangentPoint<T> {
    pub fn new(q: Vec<T>, fiber: Vec<T>, lambda: Vec<T>, cov_q: Vec<T>, cov_fiber: Vec<T>, cov_lambda: Vec<T>) -> Result<Self> {
        check_blocks("vakonomic cotangent point", q.len(), &[fiber.len(), cov_q.len(), cov_fiber.len()])?;
        check_len("vakonomic cotangent multiplier blocks", lambda.len(), cov_lambda.len())?;
        Ok(Self { q, fiber, lambda, cov_q, cov_fiber, cov_lambda })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.q.len(), self.lambda.len())
    }

    accessors!(q, fiber, lambda, cov_q, cov_fiber, cov_lambda);
}

/// Covector on the multiplier factor `V*`: base `λ`, fibre `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierCovector<T> {
    pub lambda: Vec<T>,
    pub w: Vec<T>,
}

/// `ι₁ : T*(TQ×V*) → T*TQ × T*V*`, `(q,δq,λ,δp,p,w) ↦ ((q,δq,δp,p),(λ,w))`.
pub fn iota1<T: Coefficient>(x: &VakCotangentPoint<T>) -> (TStarTPoint<T>, MultiplierCovector<T>) {
    (
        TStarTPoint { q: x.q.clone(), dq: x.fiber.clone(), dp: x.cov_q.clone(), p: x.cov_fiber.clone() },
        MultiplierCovector { lambda: x.lambda.clone(), w: x.cov_lambda.clone() },
    )
}

/// `ι₂ : T*(T*Q×V*) → T*T*Q × T*V*`, `(q,p,λ,-δp,δq,w) ↦ ((q,p,-δp,δq),(λ,w))`.
pub fn iota2<T: Coefficient>(x: &VakCotangentPoint<T>) -> (TStarTStarPoint<T>, MultiplierCovector<T>) {
    (
        TStarTStarPoint { q: x.q.clone(), p: x.fiber.clone(), mdp: x.cov_q.clone(), dq: x.cov_fiber.clone() },
        MultiplierCovector { lambda: x.lambda.clone(), w: x.cov_lambda.clone() },
    )
}

pub fn iota2_inv<T: Coefficient>(x: &TStarTStarPoint<T>, m: &MultiplierCovector<T>) -> Result<VakCotangentPoint<T>> {
    VakCotangentPoint::new(x.q.clone(), x.p.clone(), m.lambda.clone(), x.mdp.clone(), x.dq.clone(), m.w.clone())
}

/// `(q, δq, λ, δp, p, w) ↦ (q, p, λ, -δp, δq, w)`, written out directly.
pub fn tilde_gamma<T: Coefficient>(x: &VakCotangentPoint<T>) -> VakCotangentPoint<T> {
    VakCotangentPoint {
        q: x.q.clone(),
        fiber: x.cov_fiber.clone(),
        lambda: x.lambda.clone(),
        cov_q: negated(&x.cov_q),
        cov_fiber: x.fiber.clone(),
        cov_lambda: x.cov_lambda.clone(),
    }
}

/// The same map routed through `ι₂⁻¹ ∘ (γ × Id) ∘ ι₁`.
pub fn tilde_gamma_composed<T: Coefficient>(x: &VakCotangentPoint<T>) -> VakCotangentPoint<T> {
    let (tq, mult) = iota1(x);
    iota2_inv(&gamma(&tq), &mult).expect("blocks inherited from a valid point")
}

/// Point `(q, p, λ)` of `T*Q × V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPoint<T> {
    pub q: Vec<T>,
    pub p: Vec<T>,
    pub lambda: Vec<T>,
}

/// Tangent vector `(q̇, ṗ, λ̇)` at a point of `T*Q × V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTangent<T> {
    pub qdot: Vec<T>,
    pub pdot: Vec<T>,
    pub lambdadot: Vec<T>,
}

/// Covector `(α, u, w)` on `T*Q × V*`, pairing with `(q̇, ṗ, λ̇)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedCovector<T> {
    pub base: ExtendedPoint<T>,
    pub alpha: Vec<T>,
    pub u: Vec<T>,
    pub w: Vec<T>,
}

impl<T: Coefficient> ExtendedPoint<T> {
    pub fn dims(&self) -> (usize, usize) {
        (self.q.len(), self.lambda.len())
    }

    pub fn check(&self) -> Result<()> {
        check_blocks("T*Q×V* point", self.q.len(), &[self.p.len()])
    }
}

impl<T: Coefficient> ExtendedTangent<T> {
    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        check_len("tangent q-block", n, self.qdot.len())?;
        check_len("tangent p-block", n, self.pdot.len())?;
        check_len("tangent λ-block", m, self.lambdadot.len())
    }
}

impl<T: Coefficient> ExtendedCovector<T> {
    pub fn check(&self) -> Result<()> {
        self.base.check()?;
        let (n, m) = self.base.dims();
        check_len("covector α-block", n, self.alpha.len())?;
        check_len("covector u-block", n, self.u.len())?;
        check_len("covector w-block", m, self.w.len())
    }

    pub fn pair(&self, t: &ExtendedTangent<T>) -> T {
        dot(&self.alpha, &t.qdot) + dot(&self.u, &t.pdot) + dot(&self.w, &t.lambdadot)
    }
}

/// Flat map of `Ω̂ = dq ∧ dp` pulled back to `T*Q × V*`: `(α, u, w) = (−ṗ, q̇, 0)`.
pub fn presymp_hat_flat<T: Coefficient>(base: &ExtendedPoint<T>, xdot: &ExtendedTangent<T>) -> Result<ExtendedCovector<T>> {
    base.check()?;
    let (n, m) = base.dims();
    xdot.check(n, m)?;
    Ok(ExtendedCovector { base: base.clone(), alpha: negated(&xdot.pdot), u: xdot.qdot.clone(), w: vec![T::zero(); m] })
}

/// `Ω̂(ẋ, y) = ⟨δp_y, q̇⟩ − ⟨ṗ, δq_y⟩` evaluated from the local form.
pub fn presymp_hat<T: Coefficient>(xdot: &ExtendedTangent<T>, test: &ExtendedTangent<T>) -> T {
    dot(&test.pdot, &xdot.qdot) - dot(&xdot.pdot, &test.qdot)
}

/// Point `(q, v, p, λ)` of the vakonomic Pontryagin bundle `(TQ ⊕ T*Q) × V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct VakState<T> {
    pub q: Vec<T>,
    pub v: Vec<T>,
    pub p: Vec<T>,
    pub lambda: Vec<T>,
    pub t: Option<T>,
}

impl<T: Coefficient> VakState<T> {
    pub fn new(q: Vec<T>, v: Vec<T>, p: Vec<T>, lambda: Vec<T>) -> Self {
        Self { q, v, p, lambda, t: None }
    }

    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        check_len("state q-block", n, self.q.len())?;
        check_len("state v-block", n, self.v.len())?;
        check_len("state p-block", n, self.p.len())?;
        check_len("state λ-block", m, self.lambda.len())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.q.len(), self.lambda.len())
    }
}

/// Tangent vector `(q̇, v̇, ṗ, λ̇)` on `(TQ ⊕ T*Q) × V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct PontryaginTangent<T> {
    pub qdot: Vec<T>,
    pub vdot: Vec<T>,
    pub pdot: Vec<T>,
    pub lambdadot: Vec<T>,
}

impl<T: Coefficient> PontryaginTangent<T> {
    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        check_len("tangent q-block", n, self.qdot.len())?;
        check_len("tangent v-block", n, self.vdot.len())?;
        check_len("tangent p-block", n, self.pdot.len())?;
        check_len("tangent λ-block", m, self.lambdadot.len())
    }
}

/// Covector `(α, β, w, u)` on `(TQ ⊕ T*Q) × V*`, pairing with the `q`, `v`,
/// `p` and `λ` directions respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct PontryaginCovector<T> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub w: Vec<T>,
    pub u: Vec<T>,
}

impl<T: Coefficient> PontryaginCovector<T> {
    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        check_len("covector α-block", n, self.alpha.len())?;
        check_len("covector β-block", n, self.beta.len())?;
        check_len("covector w-block", n, self.w.len())?;
        check_len("covector u-block", m, self.u.len())
    }
}

/// Flat map of `Ω̄ = dq ∧ dp` on `(TQ ⊕ T*Q) × V*`: `(−ṗ, 0, q̇, 0)`.
pub fn presymp_bar_flat<T: Coefficient>(base: &VakState<T>, xdot: &PontryaginTangent<T>) -> Result<PontryaginCovector<T>> {
    let (n, m) = base.dims();
    base.check(n, m)?;
    xdot.check(n, m)?;
    Ok(PontryaginCovector { alpha: negated(&xdot.pdot), beta: vec![T::zero(); n], w: xdot.qdot.clone(), u: vec![T::zero(); m] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn pt(v: [i64; 4]) -> TTStarPoint<Ratio<i64>> {
        let r = |x| vec![Ratio::from_integer(x)];
        TTStarPoint::new(r(v[0]), r(v[1]), r(v[2]), r(v[3])).unwrap()
    }

    #[test]
    fn kappa_permutes_blocks() {
        let k = kappa(&pt([1, 2, 3, 4]));
        let flat: Vec<_> = [k.q(), k.dq(), k.dp(), k.p()].concat();
        assert_eq!(flat, pt([1, 3, 4, 2]).to_flat());
    }

    #[test]
    fn omega_flat_negates_momentum_displacement() {
        let o = omega_flat(&pt([1, 2, 3, 4]));
        let flat: Vec<_> = [o.q(), o.p(), o.mdp(), o.dq()].concat();
        assert_eq!(flat, pt([1, 2, -4, 3]).to_flat());
        assert_eq!(omega_flat_inv(&o), pt([1, 2, 3, 4]));
    }

    #[test]
    fn gamma_on_worked_point() {
        let x = TStarTPoint::new(vec![1.0], vec![3.0], vec![4.0], vec![2.0]).unwrap();
        let g = gamma(&x);
        assert_eq!([g.q(), g.p(), g.mdp(), g.dq()].concat(), vec![1.0, 2.0, -4.0, 3.0]);
        assert_eq!(gamma_inv(&g), x);
    }

    #[test]
    fn tilde_gamma_worked_point() {
        let x = VakCotangentPoint::new(vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0], vec![6.0]).unwrap();
        let y = tilde_gamma(&x);
        let flat = [y.q(), y.fiber(), y.lambda(), y.cov_q(), y.cov_fiber(), y.cov_lambda()].concat();
        assert_eq!(flat, vec![1.0, 5.0, 3.0, -4.0, 2.0, 6.0]);
        assert_eq!(tilde_gamma_composed(&x), y);
    }

    #[test]
    fn omega_tt_single_wedge() {
        let e1 = vec![1.0, 0.0];
        let z = vec![0.0, 0.0];
        let v = TTStarPoint::new(e1.clone(), z.clone(), z.clone(), z.clone()).unwrap();
        let w = TTStarPoint::new(z.clone(), z.clone(), z.clone(), e1).unwrap();
        assert_eq!(omega_tt(&v, &w).unwrap(), 1.0);
        assert_eq!(omega_tt(&w, &v).unwrap(), -1.0);
        assert_eq!(omega_tt(&v, &v).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_blocks_are_rejected() {
        let err = TTStarPoint::new(vec![1.0, 2.0], vec![1.0], vec![0.0, 0.0], vec![0.0, 0.0]).unwrap_err();
        assert_eq!(err, crate::Error::DimensionMismatch { what: "TT*Q point", expected: 2, found: 1 });
        let v = TTStarPoint::<f64>::zeros(2);
        let w = TTStarPoint::<f64>::zeros(3);
        assert!(omega_tt(&v, &w).is_err());
    }

    #[test]
    fn presymplectic_flats() {
        let base = ExtendedPoint { q: vec![0.0], p: vec![0.0], lambda: vec![0.0] };
        let xdot = ExtendedTangent { qdot: vec![2.0], pdot: vec![3.0], lambdadot: vec![7.0] };
        let c = presymp_hat_flat(&base, &xdot).unwrap();
        assert_eq!((c.alpha[0], c.u[0], c.w[0]), (-3.0, 2.0, 0.0));

        let state = VakState::new(vec![0.0], vec![0.0], vec![0.0], vec![0.0]);
        let xdot = PontryaginTangent { qdot: vec![1.0], vdot: vec![5.0], pdot: vec![2.0], lambdadot: vec![9.0] };
        let c = presymp_bar_flat(&state, &xdot).unwrap();
        assert_eq!((c.alpha[0], c.beta[0], c.w[0], c.u[0]), (-2.0, 0.0, 1.0, 0.0));
    }
}
