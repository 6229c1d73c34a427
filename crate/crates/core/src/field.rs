//! Scalar functions of `(q, v)` with first and mixed second derivatives.

use std::fmt;
use std::sync::Arc;

use crate::dual::Dual;
use crate::error::{check_len, Error, Result};
use crate::expr::Expression;
use crate::linalg::Matrix;
use crate::scalar::Real;

/// How derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GradientMode {
    /// Hand-coded closed forms (built-in systems).
    Analytic,
    /// Forward-mode dual numbers through the expression tree.
    Dual,
    /// Central differences of the value.
    FiniteDifference,
}

impl GradientMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Dual => "dual",
            Self::FiniteDifference => "finite-difference",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub value: T,
    pub dq: Vec<T>,
    pub dv: Vec<T>,
}

/// `vv[(i, j)] = ∂²f/∂vᵢ∂vⱼ`, `vq[(i, j)] = ∂²f/∂vᵢ∂qⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDerivatives<T> {
    pub vv: Matrix<T>,
    pub vq: Matrix<T>,
}

/// Closed-form field supplied by a built-in system.
pub trait AnalyticField<T: Real>: Send + Sync {
    fn value(&self, q: &[T], v: &[T]) -> T;
    fn gradient(&self, q: &[T], v: &[T]) -> Gradient<T>;
    fn second(&self, q: &[T], v: &[T]) -> SecondDerivatives<T>;
}

#[derive(Clone)]
pub struct ScalarField<T> {
    n: usize,
    expr: Option<Arc<Expression>>,
    analytic: Option<Arc<dyn AnalyticField<T>>>,
    mode: GradientMode,
}

impl<T> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("n", &self.n)
            .field("expr", &self.expr.as_ref().map(|e| e.to_string()))
            .field("analytic", &self.analytic.is_some())
            .field("mode", &self.mode)
            .finish()
    }
}

fn fd_step<T: Real>(x: T) -> T {
    T::epsilon().cbrt() * T::one().max(x.abs())
}

impl<T: Real> ScalarField<T> {
    pub fn from_expression(expr: Expression, n: usize) -> Result<Self> {
        if let Some(i) = expr.max_index() {
            if i >= n {
                return Err(Error::DimensionMismatch { what: "expression variable index", expected: n, found: i + 1 });
            }
        }
        Ok(Self { n, expr: Some(Arc::new(expr)), analytic: None, mode: GradientMode::Dual })
    }

    pub fn from_analytic(field: impl AnalyticField<T> + 'static, n: usize) -> Self {
        Self { n, expr: None, analytic: Some(Arc::new(field)), mode: GradientMode::Analytic }
    }

    /// Both representations; analytic derivatives by default.
    pub fn with_both(expr: Expression, field: impl AnalyticField<T> + 'static, n: usize) -> Result<Self> {
        let mut f = Self::from_expression(expr, n)?;
        f.analytic = Some(Arc::new(field));
        f.mode = GradientMode::Analytic;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> GradientMode {
        self.mode
    }

    pub fn expression(&self) -> Option<&Expression> {
        self.expr.as_deref()
    }

    pub fn supports(&self, mode: GradientMode) -> bool {
        match mode {
            GradientMode::Analytic => self.analytic.is_some(),
            GradientMode::Dual => self.expr.is_some(),
            GradientMode::FiniteDifference => true,
        }
    }

    pub fn with_mode(&self, mode: GradientMode) -> Result<Self> {
        if !self.supports(mode) {
            return Err(Error::ModeUnavailable { mode: mode.name() });
        }
        Ok(Self { mode, ..self.clone() })
    }

    fn check(&self, q: &[T], v: &[T]) -> Result<()> {
        check_len("field q argument", self.n, q.len())?;
        check_len("field v argument", self.n, v.len())
    }

    pub fn value(&self, q: &[T], v: &[T]) -> Result<T> {
        self.check(q, v)?;
        self.raw_value(q, v)
    }

    fn raw_value(&self, q: &[T], v: &[T]) -> Result<T> {
        match (&self.analytic, &self.expr) {
            (Some(a), _) if self.mode == GradientMode::Analytic => Ok(a.value(q, v)),
            (_, Some(e)) => e.eval(q, v),
            (Some(a), None) => Ok(a.value(q, v)),
            (None, None) => unreachable!("field without a representation"),
        }
    }

    /// Value with `∂f/∂q` and `∂f/∂v`.
    pub fn eval_with_grad(&self, q: &[T], v: &[T]) -> Result<Gradient<T>> {
        self.check(q, v)?;
        match self.mode {
            GradientMode::Analytic => {
                let a = self.analytic.as_ref().ok_or(Error::ModeUnavailable { mode: "analytic" })?;
                Ok(a.gradient(q, v))
            }
            GradientMode::Dual => self.dual_gradient(q, v),
            GradientMode::FiniteDifference => self.fd_gradient(q, v),
        }
    }

    pub fn second(&self, q: &[T], v: &[T]) -> Result<SecondDerivatives<T>> {
        self.check(q, v)?;
        match self.mode {
            GradientMode::Analytic => {
                let a = self.analytic.as_ref().ok_or(Error::ModeUnavailable { mode: "analytic" })?;
                Ok(a.second(q, v))
            }
            GradientMode::Dual => self.dual_second(q, v),
            GradientMode::FiniteDifference => self.fd_second(q, v),
        }
    }

    fn dual_gradient(&self, q: &[T], v: &[T]) -> Result<Gradient<T>> {
        let e = self.expr.as_ref().ok_or(Error::ModeUnavailable { mode: "dual" })?;
        let n = self.n;
        let mut qd: Vec<Dual<T>> = q.iter().map(|&x| Dual::new(x, T::zero())).collect();
        let mut vd: Vec<Dual<T>> = v.iter().map(|&x| Dual::new(x, T::zero())).collect();
        let mut value = T::zero();
        let mut dq = vec![T::zero(); n];
        let mut dv = vec![T::zero(); n];
        if n == 0 {
            value = e.eval(q, v)?;
        }
        for i in 0..n {
            qd[i].eps = T::one();
            let r = e.eval(&qd, &vd)?;
            qd[i].eps = T::zero();
            value = r.re;
            dq[i] = r.eps;

            vd[i].eps = T::one();
            let r = e.eval(&qd, &vd)?;
            vd[i].eps = T::zero();
            dv[i] = r.eps;
        }
        Ok(Gradient { value, dq, dv })
    }

    fn dual_second(&self, q: &[T], v: &[T]) -> Result<SecondDerivatives<T>> {
        let e = self.expr.as_ref().ok_or(Error::ModeUnavailable { mode: "dual" })?;
        let n = self.n;
        let lift = |x: T| Dual::new(Dual::new(x, T::zero()), Dual::new(T::zero(), T::zero()));
        let mut qd: Vec<Dual<Dual<T>>> = q.iter().map(|&x| lift(x)).collect();
        let mut vd: Vec<Dual<Dual<T>>> = v.iter().map(|&x| lift(x)).collect();
        let mut vv = Matrix::zeros(n, n);
        let mut vq = Matrix::zeros(n, n);
        for i in 0..n {
            vd[i].re.eps = T::one();
            for j in i..n {
                vd[j].eps.re = T::one();
                let r = e.eval(&qd, &vd)?;
                vd[j].eps.re = T::zero();
                vv[(i, j)] = r.eps.eps;
                vv[(j, i)] = r.eps.eps;
            }
            for j in 0..n {
                qd[j].eps.re = T::one();
                let r = e.eval(&qd, &vd)?;
                qd[j].eps.re = T::zero();
                vq[(i, j)] = r.eps.eps;
            }
            vd[i].re.eps = T::zero();
        }
        Ok(SecondDerivatives { vv, vq })
    }

    fn fd_gradient(&self, q: &[T], v: &[T]) -> Result<Gradient<T>> {
        let n = self.n;
        let value = self.raw_value(q, v)?;
        let two = T::lit(2.0);
        let mut dq = vec![T::zero(); n];
        let mut dv = vec![T::zero(); n];
        let mut qs = q.to_vec();
        let mut vs = v.to_vec();
        for i in 0..n {
            let h = fd_step(q[i]);
            qs[i] = q[i] + h;
            let fp = self.raw_value(&qs, v)?;
            qs[i] = q[i] - h;
            let fm = self.raw_value(&qs, v)?;
            qs[i] = q[i];
            dq[i] = (fp - fm) / (two * h);

            let h = fd_step(v[i]);
            vs[i] = v[i] + h;
            let fp = self.raw_value(q, &vs)?;
            vs[i] = v[i] - h;
            let fm = self.raw_value(q, &vs)?;
            vs[i] = v[i];
            dv[i] = (fp - fm) / (two * h);
        }
        Ok(Gradient { value, dq, dv })
    }

    /// Four-point mixed differences with step `eps^(1/4)·max(1, |x|)`.
    fn fd_second(&self, q: &[T], v: &[T]) -> Result<SecondDerivatives<T>> {
        let n = self.n;
        let step = |x: T| T::epsilon().sqrt().sqrt() * T::one().max(x.abs());
        // joint argument layout: q then v
        let x0: Vec<T> = q.iter().chain(v).copied().collect();
        let f = |x: &[T]| self.raw_value(&x[..n], &x[n..]);
        let mixed = |a: usize, b: usize| -> Result<T> {
            let (ha, hb) = (step(x0[a]), step(x0[b]));
            let mut x = x0.clone();
            let mut eval = |sa: T, sb: T| {
                x.copy_from_slice(&x0);
                x[a] = x[a] + sa * ha;
                x[b] = x[b] + sb * hb;
                f(&x)
            };
            let one = T::one();
            let val = eval(one, one)? - eval(one, -one)? - eval(-one, one)? + eval(-one, -one)?;
            Ok(val / (T::lit(4.0) * ha * hb))
        };
        let diagonal = |a: usize| -> Result<T> {
            let h = step(x0[a]);
            let mut x = x0.clone();
            x[a] = x0[a] + h;
            let fp = f(&x)?;
            x[a] = x0[a] - h;
            let fm = f(&x)?;
            Ok((fp - T::lit(2.0) * f(&x0)? + fm) / (h * h))
        };
        let mut vv = Matrix::zeros(n, n);
        let mut vq = Matrix::zeros(n, n);
        for i in 0..n {
            vv[(i, i)] = diagonal(n + i)?;
            for j in i + 1..n {
                let m = mixed(n + i, n + j)?;
                vv[(i, j)] = m;
                vv[(j, i)] = m;
            }
            for j in 0..n {
                vq[(i, j)] = mixed(n + i, j)?;
            }
        }
        Ok(SecondDerivatives { vv, vq })
    }
}
