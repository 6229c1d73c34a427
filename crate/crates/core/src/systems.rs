//! Built-in systems: vertical rolling disk, vakonomic particle, vakonomic skate.
//!
//! Each field carries both an expression (for dual-number and
//! finite-difference modes) and a hand-coded closed form, which is the default.
//!
//! | name       | q                 | L                                            | constraints |
//! |------------|-------------------|----------------------------------------------|-------------|
//! | `disk`     | `(x, y, θ, φ)`    | `½(vx² + vy² + I1 vθ² + I2 vφ²)`             | `vx sinθ − vy cosθ`, `vx cosθ + vy sinθ − R vφ` |
//! | `particle` | `(x, y, z)`       | `½(vx² + vy² + vz²)`                         | `vz − y vx` |
//! | `skate`    | `(x, y, φ)`       | `m/2 (vx² + vy²) + J/2 vφ² + m g x sin α`    | `vx sinφ − vy cosφ` |

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::parse_with_params;
use crate::field::{AnalyticField, Gradient, ScalarField, SecondDerivatives};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::system::SystemSpec;

pub const BUILTIN_NAMES: [&str; 3] = ["disk", "particle", "skate"];

/// `½ Σ cᵢ vᵢ² + Σ fᵢ qᵢ`.
#[derive(Debug, Clone)]
pub struct QuadraticLagrangian {
    pub mass: Vec<f64>,
    pub force: Vec<f64>,
}

impl<T: Real> AnalyticField<T> for QuadraticLagrangian {
    fn value(&self, q: &[T], v: &[T]) -> T {
        let half = T::lit(0.5);
        let kinetic = self.mass.iter().zip(v).fold(T::zero(), |acc, (&c, &x)| acc + half * T::lit(c) * x * x);
        self.force.iter().zip(q).fold(kinetic, |acc, (&f, &x)| acc + T::lit(f) * x)
    }

    fn gradient(&self, q: &[T], v: &[T]) -> Gradient<T> {
        Gradient {
            value: self.value(q, v),
            dq: self.force.iter().map(|&f| T::lit(f)).collect(),
            dv: self.mass.iter().zip(v).map(|(&c, &x)| T::lit(c) * x).collect(),
        }
    }

    fn second(&self, _q: &[T], _v: &[T]) -> SecondDerivatives<T> {
        let n = self.mass.len();
        SecondDerivatives {
            vv: Matrix::from_fn(n, n, |i, j| if i == j { T::lit(self.mass[i]) } else { T::zero() }),
            vq: Matrix::zeros(n, n),
        }
    }
}

/// Coefficient `μᵢ(q) = c + s·sin(q_k) + k·cos(q_k) + l·q_k` of a linear
/// constraint; `k` is the configuration index the coefficient depends on.
#[derive(Debug, Clone, Copy, Default)]
pub struct FormCoefficient {
    pub constant: f64,
    pub sin: f64,
    pub cos: f64,
    pub linear: f64,
    pub index: usize,
}

impl FormCoefficient {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, ..Self::default() }
    }

    fn value<T: Real>(&self, q: &[T]) -> T {
        let x = q[self.index];
        T::lit(self.constant) + T::lit(self.sin) * x.sin() + T::lit(self.cos) * x.cos() + T::lit(self.linear) * x
    }

    fn derivative<T: Real>(&self, q: &[T]) -> T {
        let x = q[self.index];
        T::lit(self.sin) * x.cos() - T::lit(self.cos) * x.sin() + T::lit(self.linear)
    }
}

/// `φ(q, v) = Σ μᵢ(q) vᵢ`.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub coefficients: Vec<FormCoefficient>,
}

impl<T: Real> AnalyticField<T> for LinearConstraint {
    fn value(&self, q: &[T], v: &[T]) -> T {
        self.coefficients.iter().zip(v).fold(T::zero(), |acc, (c, &x)| acc + c.value(q) * x)
    }

    fn gradient(&self, q: &[T], v: &[T]) -> Gradient<T> {
        let n = self.coefficients.len();
        let mut dq = vec![T::zero(); n];
        for (c, &x) in self.coefficients.iter().zip(v) {
            dq[c.index] = dq[c.index] + c.derivative(q) * x;
        }
        Gradient { value: self.value(q, v), dq, dv: self.coefficients.iter().map(|c| c.value(q)).collect() }
    }

    fn second(&self, q: &[T], _v: &[T]) -> SecondDerivatives<T> {
        let n = self.coefficients.len();
        let mut vq = Matrix::zeros(n, n);
        for (i, c) in self.coefficients.iter().enumerate() {
            vq[(i, c.index)] = vq[(i, c.index)] + c.derivative(q);
        }
        SecondDerivatives { vv: Matrix::zeros(n, n), vq }
    }
}

fn field<T: Real>(
    params: &BTreeMap<String, f64>,
    n: usize,
    text: &str,
    analytic: impl AnalyticField<T> + 'static,
) -> Result<ScalarField<T>> {
    ScalarField::with_both(parse_with_params(text, n, params)?, analytic, n)
}

pub fn default_params(name: &str) -> Result<BTreeMap<String, f64>> {
    let pairs: &[(&str, f64)] = match name {
        "disk" => &[("R", 1.0), ("I1", 1.0), ("I2", 1.0)],
        "particle" => &[],
        "skate" => &[("m", 1.0), ("J", 1.0), ("g", 9.81), ("alpha", std::f64::consts::FRAC_PI_6)],
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect())
}

pub fn builtin<T: Real>(name: &str) -> Result<SystemSpec<T>> {
    builtin_with(name, &BTreeMap::new())
}

/// Built-in system with some parameters overridden.
pub fn builtin_with<T: Real>(name: &str, overrides: &BTreeMap<String, f64>) -> Result<SystemSpec<T>> {
    let mut params = default_params(name)?;
    for (k, &v) in overrides {
        match params.get_mut(k) {
            Some(slot) => *slot = v,
            None => return Err(Error::InvalidConfig(format!("system `{name}` has no parameter `{k}`"))),
        }
    }
    let p = |k: &str| params[k];
    let rotating = |s: f64, c: f64, index| FormCoefficient { sin: s, cos: c, index, ..Default::default() };

    let (n, lagrangian, constraints) = match name {
        "disk" => {
            let l = QuadraticLagrangian { mass: vec![1.0, 1.0, p("I1"), p("I2")], force: vec![0.0; 4] };
            let lateral = LinearConstraint {
                coefficients: vec![
                    rotating(1.0, 0.0, 2),
                    rotating(0.0, -1.0, 2),
                    FormCoefficient::default(),
                    FormCoefficient::default(),
                ],
            };
            let rolling = LinearConstraint {
                coefficients: vec![
                    rotating(0.0, 1.0, 2),
                    rotating(1.0, 0.0, 2),
                    FormCoefficient::default(),
                    FormCoefficient::constant(-p("R")),
                ],
            };
            (
                4,
                field(&params, 4, "0.5*(v0^2 + v1^2 + I1*v2^2 + I2*v3^2)", l)?,
                vec![
                    field(&params, 4, "v0*sin(q2) - v1*cos(q2)", lateral)?,
                    field(&params, 4, "v0*cos(q2) + v1*sin(q2) - R*v3", rolling)?,
                ],
            )
        }
        "particle" => {
            let l = QuadraticLagrangian { mass: vec![1.0; 3], force: vec![0.0; 3] };
            let c = LinearConstraint {
                coefficients: vec![
                    FormCoefficient { linear: -1.0, index: 1, ..Default::default() },
                    FormCoefficient::default(),
                    FormCoefficient::constant(1.0),
                ],
            };
            (3, field(&params, 3, "0.5*(v0^2 + v1^2 + v2^2)", l)?, vec![field(&params, 3, "v2 - q1*v0", c)?])
        }
        "skate" => {
            let (m, g, alpha) = (p("m"), p("g"), p("alpha"));
            let l = QuadraticLagrangian { mass: vec![m, m, p("J")], force: vec![m * g * alpha.sin(), 0.0, 0.0] };
            let c = LinearConstraint {
                coefficients: vec![rotating(1.0, 0.0, 2), rotating(0.0, -1.0, 2), FormCoefficient::default()],
            };
            (
                3,
                field(&params, 3, "0.5*m*(v0^2 + v1^2) + 0.5*J*v2^2 + m*g*q0*sin(alpha)", l)?,
                vec![field(&params, 3, "v0*sin(q2) - v1*cos(q2)", c)?],
            )
        }
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    SystemSpec::new(name, n, lagrangian, constraints, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GradientMode;

    #[test]
    fn dimensions() {
        let dims = |name| {
            let s = builtin::<f64>(name).unwrap();
            (s.n(), s.m())
        };
        assert_eq!(dims("particle"), (3, 1));
        assert_eq!(dims("disk"), (4, 2));
        assert_eq!(dims("skate"), (3, 1));
        assert!(matches!(builtin::<f64>("unicycle"), Err(Error::UnknownSystem(_))));
    }

    #[test]
    fn all_builtins_have_forms() {
        for name in BUILTIN_NAMES {
            let spec = builtin::<f64>(name).unwrap();
            assert!(spec.forms().is_some(), "{name}");
            assert!(spec.supports(GradientMode::Dual));
        }
    }

    #[test]
    fn disk_forms_at_zero_angle() {
        let spec = builtin::<f64>("disk").unwrap();
        let mu = spec.mu(&[0.0; 4]).unwrap();
        assert_eq!(mu[0], vec![0.0, -1.0, 0.0, 0.0]);
        assert_eq!(mu[1], vec![1.0, 0.0, 0.0, -1.0]);
        let jac = spec.forms().unwrap()[0].jacobian(&[0.0; 4]).unwrap();
        assert_eq!(jac[(0, 2)], 1.0);
    }

    #[test]
    fn overrides() {
        let mut o = BTreeMap::new();
        o.insert("R".to_string(), 2.0);
        let spec = builtin_with::<f64>("disk", &o).unwrap();
        assert_eq!(spec.mu(&[0.0; 4]).unwrap()[1][3], -2.0);
        o.insert("mass".to_string(), 2.0);
        assert!(builtin_with::<f64>("disk", &o).is_err());
    }

    #[test]
    fn single_precision_build() {
        let spec = builtin::<f32>("skate").unwrap();
        let g = spec.lagrangian().eval_with_grad(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap();
        assert!((g.dq[0] - 9.81 * 0.5).abs() < 1e-5);
    }
}
