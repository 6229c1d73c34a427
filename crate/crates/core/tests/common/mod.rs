#![allow(dead_code)]

use rand::Rng;
use vakonomic::expr::{BinaryOp, UnaryOp, VarKind};
use vakonomic::Expression;

pub fn random_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Random expression over `q0..q{n-1}`, `v0..v{n-1}` of depth at most
/// `depth`. Only operators that are smooth everywhere are used, plus
/// `sqrt`, `log` and division applied to strictly positive arguments.
pub fn random_expression<R: Rng>(rng: &mut R, n: usize, depth: usize) -> Expression {
    if depth <= 1 || rng.random_bool(0.2) {
        return match rng.random_range(0..3) {
            0 => Expression::Const(rng.random_range(-2.0..2.0)),
            1 => Expression::Var(VarKind::Q, rng.random_range(0..n)),
            _ => Expression::Var(VarKind::V, rng.random_range(0..n)),
        };
    }
    let sub = |rng: &mut R| random_expression(rng, n, depth - 1);
    let unary = |op, e| Expression::Unary(op, Box::new(e));
    let binary = |op, a, b| Expression::Binary(op, Box::new(a), Box::new(b));
    match rng.random_range(0..10) {
        0 => unary(UnaryOp::Sin, sub(rng)),
        1 => unary(UnaryOp::Cos, sub(rng)),
        2 => unary(UnaryOp::Neg, sub(rng)),
        // exp of a bounded argument
        3 => unary(UnaryOp::Exp, unary(UnaryOp::Sin, sub(rng))),
        // sqrt(1 + e²) and log(1 + e²)
        4 | 5 => {
            let e = sub(rng);
            let positive = binary(BinaryOp::Add, Expression::Const(1.0), binary(BinaryOp::Pow, e, Expression::Const(2.0)));
            unary(if rng.random_bool(0.5) { UnaryOp::Sqrt } else { UnaryOp::Log }, positive)
        }
        6 => binary(BinaryOp::Add, sub(rng), sub(rng)),
        7 => binary(BinaryOp::Sub, sub(rng), sub(rng)),
        8 => binary(BinaryOp::Mul, sub(rng), sub(rng)),
        _ => {
            let den = binary(BinaryOp::Add, Expression::Const(2.0), unary(UnaryOp::Cos, sub(rng)));
            binary(BinaryOp::Div, sub(rng), den)
        }
    }
}

/// Central differences of `f` in every `q` and `v` slot.
pub fn central_gradient(f: impl Fn(&[f64], &[f64]) -> f64, q: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let partial = |x: &[f64], i: usize, eval: &dyn Fn(&[f64]) -> f64| {
        let h = f64::EPSILON.cbrt() * x[i].abs().max(1.0);
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[i] += h;
        minus[i] -= h;
        (eval(&plus) - eval(&minus)) / (plus[i] - minus[i])
    };
    let dq = (0..q.len()).map(|i| partial(q, i, &|x| f(x, v))).collect();
    let dv = (0..v.len()).map(|i| partial(v, i, &|x| f(q, x))).collect();
    (dq, dv)
}

/// Largest `|a − b| / max(1, |b|)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
