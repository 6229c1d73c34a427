//! Mechanical systems and the vakonomic Lagrangian `𝔏 = L + λ·φ`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::field::{GradientMode, ScalarField};
use crate::geometry::{tilde_gamma, PontryaginCovector, VakCotangentPoint, VakState};
use crate::linalg::Matrix;
use crate::scalar::{dot, Real};

/// Constraint one-form `μ(q)` of a constraint linear in the velocities,
/// read off as `∂φ/∂v`.
#[derive(Debug, Clone)]
pub struct OneForm<T> {
    constraint: ScalarField<T>,
}

impl<T: Real> OneForm<T> {
    pub fn eval(&self, q: &[T]) -> Result<Vec<T>> {
        let zero = vec![T::zero(); q.len()];
        Ok(self.constraint.eval_with_grad(q, &zero)?.dv)
    }

    /// `J[(i, j)] = ∂μᵢ/∂qⱼ`.
    pub fn jacobian(&self, q: &[T]) -> Result<Matrix<T>> {
        let zero = vec![T::zero(); q.len()];
        Ok(self.constraint.second(q, &zero)?.vq)
    }
}

#[derive(Debug, Clone)]
pub struct SystemSpec<T> {
    name: String,
    n: usize,
    lagrangian: ScalarField<T>,
    constraints: Vec<ScalarField<T>>,
    forms: Option<Vec<OneForm<T>>>,
    params: BTreeMap<String, f64>,
}

/// Everything the dynamics needs from `𝔏` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct VakDerivatives<T> {
    pub value: T,
    /// `∂𝔏/∂q`
    pub dq: Vec<T>,
    /// `∂𝔏/∂v`
    pub dv: Vec<T>,
    /// `φ(q, v)`, which is also `∂𝔏/∂λ`.
    pub phi: Vec<T>,
    /// Rows `∂φ^α/∂v`.
    pub phi_dv: Vec<Vec<T>>,
    /// Rows `∂φ^α/∂q`.
    pub phi_dq: Vec<Vec<T>>,
}

const LINEARITY_SAMPLES: usize = 16;

impl<T: Real> SystemSpec<T> {
    /// Validates dimensions and detects constraints that are linear in the
    /// velocities, for which the one-forms `μ^α` become available.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        lagrangian: ScalarField<T>,
        constraints: Vec<ScalarField<T>>,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("configuration dimension must be positive".into()));
        }
        check_len("Lagrangian dimension", n, lagrangian.dim())?;
        for c in &constraints {
            check_len("constraint dimension", n, c.dim())?;
        }
        if constraints.len() >= n {
            return Err(Error::InvalidConfig(format!("constraint count {} must be below the dimension {n}", constraints.len())));
        }
        let mut spec = Self { name: name.into(), n, lagrangian, constraints, forms: None, params };
        if spec.constraints.iter().all(|c| spec.is_linear_in_velocity(c)) {
            spec.forms = Some(spec.constraints.iter().map(|c| OneForm { constraint: c.clone() }).collect());
        }
        Ok(spec)
    }

    fn is_linear_in_velocity(&self, c: &ScalarField<T>) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let form = OneForm { constraint: c.clone() };
        (0..LINEARITY_SAMPLES).all(|_| {
            let q: Vec<T> = (0..self.n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
            let v: Vec<T> = (0..self.n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
            let (Ok(value), Ok(mu)) = (c.value(&q, &v), form.eval(&q)) else {
                return false;
            };
            let scale = mu.iter().zip(&v).fold(T::one(), |acc, (a, b)| acc.max((*a * *b).abs()));
            (value - dot(&mu, &v)).abs() <= T::lit(1e-12) * scale
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn lagrangian(&self) -> &ScalarField<T> {
        &self.lagrangian
    }

    pub fn constraints(&self) -> &[ScalarField<T>] {
        &self.constraints
    }

    pub fn forms(&self) -> Option<&[OneForm<T>]> {
        self.forms.as_deref()
    }

    pub fn require_forms(&self) -> Result<&[OneForm<T>]> {
        self.forms().ok_or(Error::MissingConstraintForms)
    }

    /// Rows `μ^α(q)`.
    pub fn mu(&self, q: &[T]) -> Result<Vec<Vec<T>>> {
        self.require_forms()?.iter().map(|f| f.eval(q)).collect()
    }

    /// Copy with every field switched to `mode`.
    pub fn with_mode(&self, mode: GradientMode) -> Result<Self> {
        let lagrangian = self.lagrangian.with_mode(mode)?;
        let constraints: Vec<_> = self.constraints.iter().map(|c| c.with_mode(mode)).collect::<Result<_>>()?;
        let forms = self.forms.as_ref().map(|_| constraints.iter().map(|c| OneForm { constraint: c.clone() }).collect());
        Ok(Self { lagrangian, constraints, forms, ..self.clone() })
    }

    pub fn supports(&self, mode: GradientMode) -> bool {
        self.lagrangian.supports(mode) && self.constraints.iter().all(|c| c.supports(mode))
    }

    pub fn phi(&self, q: &[T], v: &[T]) -> Result<Vec<T>> {
        self.constraints.iter().map(|c| c.value(q, v)).collect()
    }

    fn check_qvl(&self, q: &[T], v: &[T], lambda: &[T]) -> Result<()> {
        check_len("q block", self.n, q.len())?;
        check_len("v block", self.n, v.len())?;
        check_len("λ block", self.m(), lambda.len())
    }

    /// `𝔏` and its first derivatives in one pass.
    pub fn vak_derivatives(&self, q: &[T], v: &[T], lambda: &[T]) -> Result<VakDerivatives<T>> {
        self.check_qvl(q, v, lambda)?;
        let l = self.lagrangian.eval_with_grad(q, v)?;
        let mut out = VakDerivatives {
            value: l.value,
            dq: l.dq,
            dv: l.dv,
            phi: Vec::with_capacity(self.m()),
            phi_dv: Vec::with_capacity(self.m()),
            phi_dq: Vec::with_capacity(self.m()),
        };
        for (c, &lam) in self.constraints.iter().zip(lambda) {
            let g = c.eval_with_grad(q, v)?;
            out.value = out.value + lam * g.value;
            for i in 0..self.n {
                out.dq[i] = out.dq[i] + lam * g.dq[i];
                out.dv[i] = out.dv[i] + lam * g.dv[i];
            }
            out.phi.push(g.value);
            out.phi_dv.push(g.dv);
            out.phi_dq.push(g.dq);
        }
        Ok(out)
    }

    /// `𝔏(q, v, λ) = L(q, v) + λ_α φ^α(q, v)`.
    pub fn vak_lagrangian(&self, state: &VakState<T>) -> Result<T> {
        self.check_state(state)?;
        let mut value = self.lagrangian.value(&state.q, &state.v)?;
        for (c, &lam) in self.constraints.iter().zip(&state.lambda) {
            value = value + lam * c.value(&state.q, &state.v)?;
        }
        Ok(value)
    }

    /// `E = ⟨p, v⟩ − 𝔏`.
    pub fn vak_energy(&self, state: &VakState<T>) -> Result<T> {
        Ok(dot(&state.p, &state.v) - self.vak_lagrangian(state)?)
    }

    pub fn check_state(&self, state: &VakState<T>) -> Result<()> {
        state.check(self.n, self.m())
    }

    /// `d𝔏` as a point of `T*(TQ × V*)`: base `(q, v, λ)`, covector
    /// `(∂𝔏/∂q, ∂𝔏/∂v, φ)`.
    pub fn d_vak_lagrangian(&self, q: &[T], v: &[T], lambda: &[T]) -> Result<VakCotangentPoint<T>> {
        let d = self.vak_derivatives(q, v, lambda)?;
        VakCotangentPoint::new(q.to_vec(), v.to_vec(), lambda.to_vec(), d.dq, d.dv, d.phi)
    }

    /// Dirac differential `γ̃ ∘ d𝔏`: base `(q, ∂𝔏/∂v, λ)`, covector
    /// `(−∂𝔏/∂q, v, φ)`.
    pub fn dirac_differential(&self, q: &[T], v: &[T], lambda: &[T]) -> Result<VakCotangentPoint<T>> {
        Ok(tilde_gamma(&self.d_vak_lagrangian(q, v, lambda)?))
    }

    /// `dE = (−∂𝔏/∂q, p − ∂𝔏/∂v, v, −φ)` in the `(q, v, p, λ)` directions.
    pub fn d_energy(&self, state: &VakState<T>) -> Result<PontryaginCovector<T>> {
        self.check_state(state)?;
        let d = self.vak_derivatives(&state.q, &state.v, &state.lambda)?;
        Ok(PontryaginCovector {
            alpha: d.dq.iter().map(|&x| -x).collect(),
            beta: state.p.iter().zip(&d.dv).map(|(&p, &g)| p - g).collect(),
            w: state.v.clone(),
            u: d.phi.iter().map(|&x| -x).collect(),
        })
    }
}

/// Parsed system definition file.
///
/// ```text
/// # comments run to end of line
/// name = "particle"
/// n = 3
/// m = 1
/// params { k = 2.5  c = 1 }
/// L = "0.5*k*(v0^2+v1^2+v2^2)"
/// phi = ["v2 - q1*v0"]
/// ```
///
/// Keys may appear in any order; `params` values are numbers (optionally
/// signed) and may be referenced by name in `L` and `phi`. `m` is optional
/// and, when given, must match the length of `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDefinition {
    pub name: String,
    pub n: usize,
    pub m: Option<usize>,
    pub lagrangian: String,
    pub constraints: Vec<String>,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum DefToken {
    Ident(String),
    Str(String),
    Num(f64),
    Sym(char),
}

fn def_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Definition(format!("line {line}: {}", msg.into()))
}

fn lex_definition(text: &str) -> Result<Vec<(DefToken, usize)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let mut chars = line.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            match c {
                '#' => break,
                c if c.is_whitespace() => {
                    chars.next();
                }
                '=' | '{' | '}' | '[' | ']' | ',' => {
                    out.push((DefToken::Sym(c), line_no));
                    chars.next();
                }
                '"' => {
                    chars.next();
                    let mut s = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '"')) => break,
                            Some((_, ch)) => s.push(ch),
                            None => return Err(def_error(line_no, "unterminated string")),
                        }
                    }
                    out.push((DefToken::Str(s), line_no));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    let mut end = i;
                    while let Some(&(j, ch)) = chars.peek() {
                        if ch.is_ascii_alphanumeric() || ch == '_' {
                            end = j + ch.len_utf8();
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push((DefToken::Ident(line[start..end].to_string()), line_no));
                }
                c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                    let start = i;
                    let mut end = i;
                    while let Some(&(j, ch)) = chars.peek() {
                        let exp_sign = (ch == '-' || ch == '+') && line[start..j].ends_with(['e', 'E']);
                        if ch.is_ascii_digit() || ch == '.' || ch == 'e' || ch == 'E' || exp_sign || j == start {
                            end = j + 1;
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    let lexeme = &line[start..end];
                    let value = lexeme.parse::<f64>().map_err(|_| def_error(line_no, format!("invalid number `{lexeme}`")))?;
                    out.push((DefToken::Num(value), line_no));
                }
                other => return Err(def_error(line_no, format!("unexpected character `{other}`"))),
            }
        }
    }
    Ok(out)
}

impl SystemDefinition {
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = lex_definition(text)?;
        let mut it = tokens.into_iter().peekable();
        let mut name = None;
        let mut n = None;
        let mut m = None;
        let mut lagrangian = None;
        let mut constraints = None;
        let mut params = BTreeMap::new();

        let last_line = |line: Option<usize>| line.unwrap_or(0);
        while let Some((tok, line)) = it.next() {
            let DefToken::Ident(key) = tok else {
                return Err(def_error(line, "expected a key"));
            };
            if key == "params" {
                match it.next() {
                    Some((DefToken::Sym('{'), _)) => {}
                    other => return Err(def_error(last_line(other.map(|o| o.1)), "expected `{` after params")),
                }
                loop {
                    match it.next() {
                        Some((DefToken::Sym('}'), _)) => break,
                        Some((DefToken::Sym(','), _)) => continue,
                        Some((DefToken::Ident(pname), l)) => {
                            match it.next() {
                                Some((DefToken::Sym('='), _)) => {}
                                _ => return Err(def_error(l, format!("expected `=` after parameter `{pname}`"))),
                            }
                            match it.next() {
                                Some((DefToken::Num(x), _)) => {
                                    params.insert(pname, x);
                                }
                                _ => return Err(def_error(l, format!("parameter `{pname}` needs a numeric value"))),
                            }
                        }
                        Some((_, l)) => return Err(def_error(l, "malformed params block")),
                        None => return Err(def_error(line, "unterminated params block")),
                    }
                }
                continue;
            }
            match it.next() {
                Some((DefToken::Sym('='), _)) => {}
                _ => return Err(def_error(line, format!("expected `=` after `{key}`"))),
            }
            let value = it.next().ok_or_else(|| def_error(line, format!("missing value for `{key}`")))?;
            match (key.as_str(), value) {
                ("name", (DefToken::Str(s) | DefToken::Ident(s), _)) => name = Some(s),
                ("n", (DefToken::Num(x), l)) => n = Some(as_count(x, l, "n")?),
                ("m", (DefToken::Num(x), l)) => m = Some(as_count(x, l, "m")?),
                ("L", (DefToken::Str(s), _)) => lagrangian = Some(s),
                ("phi", (DefToken::Sym('['), l)) => {
                    let mut list = Vec::new();
                    loop {
                        match it.next() {
                            Some((DefToken::Sym(']'), _)) => break,
                            Some((DefToken::Sym(','), _)) => continue,
                            Some((DefToken::Str(s), _)) => list.push(s),
                            _ => return Err(def_error(l, "phi must be a list of quoted expressions")),
                        }
                    }
                    constraints = Some(list);
                }
                ("name" | "n" | "m" | "L" | "phi", (_, l)) => return Err(def_error(l, format!("wrong value type for `{key}`"))),
                (_, (_, l)) => return Err(def_error(l, format!("unknown key `{key}`"))),
            }
        }

        let constraints = constraints.unwrap_or_default();
        if let Some(m) = m {
            if m != constraints.len() {
                return Err(Error::Definition(format!("m = {m} but {} constraint expressions given", constraints.len())));
            }
        }
        Ok(Self {
            name: name.unwrap_or_else(|| "user".to_string()),
            n: n.ok_or_else(|| Error::Definition("missing key `n`".into()))?,
            m,
            lagrangian: lagrangian.ok_or_else(|| Error::Definition("missing key `L`".into()))?,
            constraints,
            params,
        })
    }

    /// Parses the expressions; derivatives come from dual numbers.
    pub fn build<T: Real>(&self) -> Result<SystemSpec<T>> {
        let l = crate::expr::parse_with_params(&self.lagrangian, self.n, &self.params)?;
        let constraints = self
            .constraints
            .iter()
            .map(|c| ScalarField::from_expression(crate::expr::parse_with_params(c, self.n, &self.params)?, self.n))
            .collect::<Result<Vec<_>>>()?;
        SystemSpec::new(self.name.clone(), self.n, ScalarField::from_expression(l, self.n)?, constraints, self.params.clone())
    }
}

fn as_count(x: f64, line: usize, key: &str) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(def_error(line, format!("`{key}` must be a non-negative integer")))
    }
}
