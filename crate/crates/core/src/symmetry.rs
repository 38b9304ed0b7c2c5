//! Star-product variants under `C` and `P`, Weyl-type chart data, and
//! symmetrised equivalences built from a formal operator calculus.
//!
//! A [`FormalOperator`] is `Σ_{k ≤ K} ν^k D_k` with each `D_k` a
//! differential operator `Σ_α c_α ∂^α` with polynomial coefficients. Text
//! form:
//!
//! ```text
//! dim 2
//! order 2
//! nu^0: (1) * id
//! nu^1: (x2 + i) * d/dx2 + (-x1) * d/dx1
//! nu^2: 0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::binomial;
use thiserror::Error;

use crate::fedosov::{FedosovError, FedosovState};
use crate::forms::{Form, FormSeries, VectorField};
use crate::report::Report;
use crate::scalar::{parse_scalar, rat, GaussianRational, Monomial, NuSeries, Rational, Scalar};
use crate::weyl::WeylElement;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("operator text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("order-0 part is not the identity")]
    NotUnipotent,
    #[error("exp needs a vanishing order-0 part")]
    NotNilpotent,
    #[error("operators differ in dimension or truncation order")]
    Mismatch,
    #[error("operator order {order} exceeds what the star product certifies ({max})")]
    OrderTooHigh { order: usize, max: usize },
    #[error("target form c^{0} is not closed")]
    NotClosed(usize),
    #[error("target violates the {mode} condition at c^{index}: {reason}")]
    ModeCondition { mode: Mode, index: usize, reason: String },
    #[error("precondition failed:\n{0}")]
    Precondition(Report),
    #[error(transparent)]
    Fedosov(#[from] FedosovError),
}

/// Exponent vector of `∂^α`.
pub type MultiIndex = Vec<u32>;

fn d_multi(f: &Scalar, alpha: &[u32]) -> Scalar {
    let mut out = f.clone();
    for (i, &e) in alpha.iter().enumerate() {
        for _ in 0..e {
            if out.is_zero() {
                return out;
            }
            out = out.partial(i);
        }
    }
    out
}

/// All `γ ≤ α` componentwise.
fn sub_indices(alpha: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![vec![]];
    for &a in alpha {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                (0..=a).map(move |g| {
                    let mut q = p.clone();
                    q.push(g);
                    q
                })
            })
            .collect();
    }
    out
}

/// Differential operator `Σ_α c_α ∂^α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    dim: usize,
    terms: BTreeMap<MultiIndex, Scalar>,
}

impl DiffOp {
    pub fn zero(dim: usize) -> Self {
        DiffOp { dim, terms: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zero(dim);
        out.add_term(vec![0; dim], &Scalar::one());
        out
    }

    pub fn from_field(x: &VectorField) -> Self {
        let dim = x.dim();
        let mut out = Self::zero(dim);
        for i in 0..dim {
            let mut alpha = vec![0; dim];
            alpha[i] = 1;
            out.add_term(alpha, x.component(i));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: &Scalar) {
        assert_eq!(alpha.len(), self.dim);
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(alpha.clone()).or_insert_with(Scalar::zero);
        e.add_assign_ref(c);
        if e.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn apply(&self, f: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (alpha, c) in &self.terms {
            let d = d_multi(f, alpha);
            if !d.is_zero() {
                out.add_assign_ref(&(c * &d));
            }
        }
        out
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.map(|c| -c))
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> DiffOp {
        let mut out = Self::zero(self.dim);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), &f(c));
        }
        out
    }

    pub fn scale_rat(&self, q: &Rational) -> DiffOp {
        self.map(|c| c.scale_rat(q))
    }

    /// `(a∘b) = Σ a_α binom(α,γ) ∂^γ(b_β) ∂^{α−γ+β}`
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let mut out = Self::zero(self.dim);
        for (alpha, a) in &self.terms {
            let gammas = sub_indices(alpha);
            for (beta, b) in &other.terms {
                for gamma in &gammas {
                    let db = d_multi(b, gamma);
                    if db.is_zero() {
                        continue;
                    }
                    let mut mult = 1u64;
                    let mut idx = Vec::with_capacity(self.dim);
                    for i in 0..self.dim {
                        mult *= binomial(alpha[i] as u64, gamma[i] as u64);
                        idx.push(alpha[i] - gamma[i] + beta[i]);
                    }
                    out.add_term(idx, &(a * &db).scale_rat(&Rational::from_integer((mult as i64).into())));
                }
            }
        }
        out
    }

    /// Highest derivative order.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum()).max().unwrap_or(0)
    }
}

fn fmt_index(alpha: &[u32]) -> String {
    let parts: Vec<String> = alpha
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("d/dx{}", i + 1) } else { format!("d/dx{}^{e}", i + 1) })
        .collect();
    if parts.is_empty() {
        "id".into()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(a, c)| format!("({c}) * {}", fmt_index(a))).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Σ_{k ≤ K} ν^k D_k`, truncated at `ν^K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalOperator {
    dim: usize,
    ops: Vec<DiffOp>,
}

impl FormalOperator {
    pub fn zero(dim: usize, order: usize) -> Self {
        FormalOperator { dim, ops: vec![DiffOp::zero(dim); order + 1] }
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        let mut out = Self::zero(dim, order);
        out.ops[0] = DiffOp::identity(dim);
        out
    }

    /// `ν^k D`
    pub fn monomial(k: usize, d: DiffOp, order: usize) -> Self {
        let mut out = Self::zero(d.dim(), order);
        if k <= order {
            out.ops[k] = d;
        }
        out
    }

    /// `ν·A`, one order longer.
    pub fn nu_shift(&self) -> Self {
        let mut ops = vec![DiffOp::zero(self.dim)];
        ops.extend(self.ops.iter().cloned());
        FormalOperator { dim: self.dim, ops }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &DiffOp {
        &self.ops[k]
    }

    pub fn set(&mut self, k: usize, d: DiffOp) {
        self.ops[k] = d;
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim, self.order())
    }

    fn check(&self, other: &Self) -> Result<(), SymmetryError> {
        if self.dim != other.dim || self.ops.len() != other.ops.len() {
            return Err(SymmetryError::Mismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SymmetryError> {
        self.check(other)?;
        Ok(FormalOperator { dim: self.dim, ops: self.ops.iter().zip(&other.ops).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SymmetryError> {
        self.check(other)?;
        Ok(FormalOperator { dim: self.dim, ops: self.ops.iter().zip(&other.ops).map(|(a, b)| a.sub(b)).collect() })
    }

    pub fn scale_rat(&self, q: &Rational) -> Self {
        FormalOperator { dim: self.dim, ops: self.ops.iter().map(|d| d.scale_rat(q)).collect() }
    }

    pub fn compose(&self, other: &Self) -> Result<Self, SymmetryError> {
        self.check(other)?;
        let k_max = self.order();
        let mut out = Self::zero(self.dim, k_max);
        for (i, a) in self.ops.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.ops.iter().enumerate().take(k_max + 1 - i) {
                if !b.is_zero() {
                    out.ops[i + j] = out.ops[i + j].add(&a.compose(b));
                }
            }
        }
        Ok(out)
    }

    /// `Σ_{n ≤ K} c_n Y^n` for `Y` with vanishing order-0 part.
    fn power_series(&self, coeffs: impl Fn(usize) -> Rational) -> Self {
        let k_max = self.order();
        let mut out = Self::zero(self.dim, k_max);
        let mut pow = Self::identity(self.dim, k_max);
        for n in 0..=k_max {
            let c = coeffs(n);
            if c != Rational::from_integer(0.into()) {
                out = out.add(&pow.scale_rat(&c)).expect("same shape");
            }
            pow = pow.compose(self).expect("same shape");
        }
        out
    }

    fn unipotent_part(&self) -> Result<Self, SymmetryError> {
        if self.ops[0] != DiffOp::identity(self.dim) {
            return Err(SymmetryError::NotUnipotent);
        }
        let mut y = self.clone();
        y.ops[0] = DiffOp::zero(self.dim);
        Ok(y)
    }

    pub fn inverse(&self) -> Result<Self, SymmetryError> {
        let y = self.unipotent_part()?;
        Ok(y.power_series(|n| if n % 2 == 0 { rat(1, 1) } else { rat(-1, 1) }))
    }

    pub fn exp(&self) -> Result<Self, SymmetryError> {
        if !self.ops[0].is_zero() {
            return Err(SymmetryError::NotNilpotent);
        }
        let mut fact = Rational::from_integer(1.into());
        let mut inv_fact = vec![fact.clone()];
        for n in 1..=self.order() {
            fact *= Rational::from_integer((n as i64).into());
            inv_fact.push(fact.recip());
        }
        Ok(self.power_series(|n| inv_fact[n].clone()))
    }

    pub fn log(&self) -> Result<Self, SymmetryError> {
        let y = self.unipotent_part()?;
        Ok(y.power_series(|n| match n {
            0 => rat(0, 1),
            _ if n % 2 == 1 => rat(1, n as i64),
            _ => rat(-1, n as i64),
        }))
    }

    /// `A^t = exp(t log A)`
    pub fn power(&self, t: &Rational) -> Result<Self, SymmetryError> {
        self.log()?.scale_rat(t).exp()
    }

    /// `P A P`: the `ν^k` part picks up `(−1)^k`.
    pub fn conj_p(&self) -> Self {
        FormalOperator {
            dim: self.dim,
            ops: self.ops.iter().enumerate().map(|(k, d)| if k % 2 == 1 { d.map(|c| -c) } else { d.clone() }).collect(),
        }
    }

    /// `C A C`: conjugate coefficients, and `(−1)^k` since `Cν = −ν`.
    pub fn conj_c(&self) -> Self {
        FormalOperator {
            dim: self.dim,
            ops: self
                .ops
                .iter()
                .enumerate()
                .map(|(k, d)| if k % 2 == 1 { d.map(|c| -&c.conj()) } else { d.map(Scalar::conj) })
                .collect(),
        }
    }

    pub fn apply(&self, f: &Scalar) -> NuSeries {
        NuSeries::from_coeffs(self.ops.iter().map(|d| d.apply(f)).collect())
    }

    /// Action on a series, reduced modulo `ν^{K+1}`.
    pub fn apply_series(&self, f: &NuSeries) -> NuSeries {
        let mut out = NuSeries::zero();
        for (j, c) in f.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (k, d) in self.ops.iter().enumerate() {
                if j + k <= self.order() {
                    out.add_at(j + k, &d.apply(c));
                }
            }
        }
        out
    }

    /// Operators whose action on every monomial of degree `≤ d_test` agrees.
    pub fn agrees_on_monomials(&self, other: &Self, d_test: u32) -> bool {
        monomials(self.dim, d_test).iter().all(|m| self.apply(m) == other.apply(m))
    }

    /// Fits `Σ ν^k D_k` to a linear action, assuming `D_k` has derivative
    /// order at most `max_deriv(k)`.
    pub fn fit(dim: usize, order: usize, max_deriv: impl Fn(usize) -> u32, action: impl Fn(&Scalar) -> NuSeries) -> Self {
        let top = (0..=order).map(&max_deriv).max().unwrap_or(0);
        let basis = multi_indices(dim, top);
        let images: Vec<NuSeries> = basis.iter().map(|b| action(&Scalar::monomial(GaussianRational::one(), Monomial::from_exponents(b.clone())))).collect();
        let mut out = Self::zero(dim, order);
        for k in 0..=order {
            let bound = max_deriv(k);
            let mut d = DiffOp::zero(dim);
            for (beta, image) in basis.iter().zip(&images) {
                if beta.iter().sum::<u32>() > bound {
                    continue;
                }
                let xb = Scalar::monomial(GaussianRational::one(), Monomial::from_exponents(beta.clone()));
                let rest = &image.coeff(k) - &d.apply(&xb);
                let fact: i64 = beta.iter().map(|&e| (1..=e as i64).product::<i64>()).product();
                d.add_term(beta.clone(), &rest.scale_rat(&rat(1, fact)));
            }
            out.ops[k] = d;
        }
        out
    }
}

impl fmt::Display for FormalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        writeln!(f, "order {}", self.order())?;
        for (k, d) in self.ops.iter().enumerate() {
            writeln!(f, "nu^{k}: {d}")?;
        }
        Ok(())
    }
}

fn parse_index(tok: &str, dim: usize) -> Result<MultiIndex, String> {
    let mut alpha = vec![0u32; dim];
    if tok == "id" {
        return Ok(alpha);
    }
    for part in tok.split('*') {
        let rest = part.strip_prefix("d/dx").ok_or_else(|| format!("expected d/dx<i>, found {part:?}"))?;
        let (var, exp) = match rest.split_once('^') {
            Some((v, e)) => (v, e.parse::<u32>().map_err(|_| format!("bad exponent {e:?}"))?),
            None => (rest, 1),
        };
        let i: usize = var.parse().map_err(|_| format!("bad variable index {var:?}"))?;
        if i == 0 || i > dim {
            return Err(format!("variable x{i} outside dimension {dim}"));
        }
        alpha[i - 1] += exp;
    }
    Ok(alpha)
}

fn parse_diffop(body: &str, dim: usize) -> Result<DiffOp, String> {
    let mut out = DiffOp::zero(dim);
    let body = body.trim();
    if body == "0" {
        return Ok(out);
    }
    let bytes = body.as_bytes();
    let mut pos = 0;
    loop {
        if bytes.get(pos) != Some(&b'(') {
            return Err(format!("expected '(' at column {pos}"));
        }
        let mut depth = 0;
        let mut close = None;
        for (i, &b) in bytes.iter().enumerate().skip(pos) {
            match b {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let close = close.ok_or("unbalanced parenthesis")?;
        let c = parse_scalar(&body[pos + 1..close], dim).map_err(|e| e.to_string())?;
        let rest = body[close + 1..].strip_prefix(" * ").ok_or("expected ' * ' after coefficient")?;
        let (tok, next) = match rest.find(" + (") {
            Some(i) => (&rest[..i], Some(&rest[i + 3..])),
            None => (rest, None),
        };
        out.add_term(parse_index(tok.trim(), dim)?, &c);
        match next {
            None => return Ok(out),
            Some(n) => pos = body.len() - n.len(),
        }
    }
}

/// Inverse of the `Display` form.
pub fn parse_operator(text: &str) -> Result<FormalOperator, SymmetryError> {
    let err = |line: usize, msg: String| SymmetryError::Parse { line, msg };
    let mut dim = None;
    let mut order = None;
    let mut ops: BTreeMap<usize, DiffOp> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let ln = n + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(v) = line.strip_prefix("dim ") {
            dim = Some(v.trim().parse::<usize>().map_err(|e| err(ln, e.to_string()))?);
        } else if let Some(v) = line.strip_prefix("order ") {
            order = Some(v.trim().parse::<usize>().map_err(|e| err(ln, e.to_string()))?);
        } else if let Some(v) = line.strip_prefix("nu^") {
            let d = dim.ok_or_else(|| err(ln, "dim must precede the orders".into()))?;
            let (k, body) = v.split_once(':').ok_or_else(|| err(ln, "expected ':'".into()))?;
            let k: usize = k.trim().parse().map_err(|_| err(ln, format!("bad order {k:?}")))?;
            ops.insert(k, parse_diffop(body, d).map_err(|m| err(ln, m))?);
        } else {
            return Err(err(ln, format!("unrecognised line {line:?}")));
        }
    }
    let dim = dim.ok_or_else(|| err(0, "missing dim".into()))?;
    let order = order.unwrap_or_else(|| ops.keys().next_back().copied().unwrap_or(0));
    let mut out = FormalOperator::zero(dim, order);
    for (k, d) in ops {
        if k > order {
            return Err(err(0, format!("nu^{k} beyond declared order {order}")));
        }
        out.set(k, d);
    }
    Ok(out)
}

fn multi_indices(dim: usize, max_deg: u32) -> Vec<MultiIndex> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                let used: u32 = p.iter().sum();
                (0..=max_deg - used).map(move |e| {
                    let mut q = p.clone();
                    q.push(e);
                    q
                })
            })
            .collect();
    }
    out.sort_by_key(|a| (a.iter().sum::<u32>(), a.clone()));
    out
}

/// All monic monomials of degree `≤ max_deg`.
pub fn monomials(dim: usize, max_deg: u32) -> Vec<Scalar> {
    multi_indices(dim, max_deg)
        .into_iter()
        .map(|a| Scalar::monomial(GaussianRational::one(), Monomial::from_exponents(a)))
        .collect()
}

/// `(1/ν)(H * f − f * H)` as a formal operator through `ν^order`.
pub fn inner_derivation(st: &FedosovState, h: &Scalar, order: usize) -> Result<FormalOperator, SymmetryError> {
    let max = st.max_order().saturating_sub(1);
    if order > max {
        return Err(SymmetryError::OrderTooHigh { order, max });
    }
    let hs: NuSeries = h.clone().into();
    Ok(FormalOperator::fit(st.dim(), order, |k| k as u32 + 1, |f| {
        let fs: NuSeries = f.clone().into();
        st.star(&hs, &fs).sub(&st.star(&fs, &hs)).shift_down().unwrap_or_default()
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StarVariant {
    Opposite,
    Conjugate,
    Parity,
}

impl FromStr for StarVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "opposite" => Ok(StarVariant::Opposite),
            "conjugate" => Ok(StarVariant::Conjugate),
            "parity" => Ok(StarVariant::Parity),
            _ => Err(format!("unknown variant {s:?}; expected opposite, conjugate or parity")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    P,
    C,
    Weyl,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::P => "P",
            Mode::C => "C",
            Mode::Weyl => "Weyl",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "P" | "p" => Ok(Mode::P),
            "C" | "c" => Ok(Mode::C),
            "Weyl" | "weyl" => Ok(Mode::Weyl),
            _ => Err(format!("unknown mode {s:?}; expected P, C or Weyl")),
        }
    }
}

impl Mode {
    fn wants_p(self) -> bool {
        matches!(self, Mode::P | Mode::Weyl)
    }

    fn wants_c(self) -> bool {
        matches!(self, Mode::C | Mode::Weyl)
    }
}

pub fn star_variant(st: &FedosovState, v: StarVariant, f: &NuSeries, g: &NuSeries) -> NuSeries {
    match v {
        StarVariant::Opposite => st.star(g, f),
        StarVariant::Conjugate => st.star(&f.conjugate(), &g.conjugate()).conjugate(),
        StarVariant::Parity => st.star(&f.parity(), &g.parity()).parity(),
    }
}

/// `f ⋆^P g = g ⋆ f` (mode P), `f ⋆^C g = g ⋆ f` (mode C), or both, on all
/// monomial pairs of degree `≤ d_test`.
pub fn check_antiautomorphism(st: &FedosovState, mode: Mode, d_test: u32) -> Report {
    let mons = monomials(st.dim(), d_test);
    let mut rep = Report::new();
    let mut run = |name: &str, v: StarVariant| {
        rep.series_family(
            name,
            mons.iter().flat_map(|f| mons.iter().map(move |g| (f, g))).map(|(f, g)| {
                let (f, g): (NuSeries, NuSeries) = (f.clone().into(), g.clone().into());
                (format!("({f}, {g})"), star_variant(st, v, &f, &g), st.star(&g, &f))
            }),
        );
    };
    if mode.wants_p() {
        run("P((Pf) * (Pg)) = g * f", StarVariant::Parity);
    }
    if mode.wants_c() {
        run("C((Cf) * (Cg)) = g * f", StarVariant::Conjugate);
    }
    rep
}

/// `Ω` and `s` realising a prescribed class `Σ ν^k c^k` with the symmetry of
/// the mode; `Ω_{k+1} = c^k`, `s = 0`.
#[derive(Clone, Debug)]
pub struct WeylTypeData {
    pub big_omega: FormSeries,
    pub s: WeylElement,
}

pub fn build_weyl_type_data(target: &[Form], mode: Mode, dim: usize, cap: u32) -> Result<WeylTypeData, SymmetryError> {
    let mut big_omega = FormSeries::zero(2, dim);
    for (k, c) in target.iter().enumerate() {
        if !c.exterior_derivative().is_zero() {
            return Err(SymmetryError::NotClosed(k));
        }
        let bad = |reason: &str| SymmetryError::ModeCondition { mode, index: k, reason: reason.into() };
        if mode.wants_p() && k % 2 == 0 && !c.is_zero() {
            return Err(bad("even-index classes must vanish"));
        }
        if mode.wants_c() {
            let sign = if k % 2 == 0 { rat(-1, 1) } else { rat(1, 1) };
            if c.conj() != c.map(|v| v.scale_rat(&sign)) {
                return Err(bad(if k % 2 == 0 { "must be purely imaginary" } else { "must be real" }));
            }
        }
        big_omega.set(k + 1, c.clone());
    }
    Ok(WeylTypeData { big_omega, s: WeylElement::zero(dim, cap + 1) })
}

/// `P r = r`, `C r = r` as the mode demands, plus the matching
/// anti-automorphism identities.
pub fn certify_weyl_type(st: &FedosovState, mode: Mode, d_test: u32) -> Report {
    let mut rep = Report::new();
    if mode.wants_p() {
        rep.weyl_eq("P r = r", &st.r.parity(), &st.r);
    }
    if mode.wants_c() {
        rep.weyl_eq("C r = r", &st.r.conjugate(), &st.r);
    }
    rep.extend(check_antiautomorphism(st, mode, d_test));
    rep
}

fn check_order(t: &FormalOperator, st1: &FedosovState, st2: &FedosovState) -> usize {
    t.order().min(st1.max_order()).min(st2.max_order()) + 1
}

/// `T(f ⋆₁ g) = (Tf) ⋆₂ (Tg)` on monomial pairs, modulo the certified order.
pub fn check_equivalence(
    name: &str,
    t: &FormalOperator,
    st1: &FedosovState,
    st2: &FedosovState,
    d_test: u32,
) -> Report {
    let m = check_order(t, st1, st2);
    let mons = monomials(t.dim(), d_test);
    let images: Vec<NuSeries> = mons.iter().map(|f| t.apply(f)).collect();
    let mut rep = Report::new();
    rep.series_family(
        name,
        (0..mons.len()).flat_map(|i| (0..mons.len()).map(move |j| (i, j))).map(|(i, j)| {
            let (f, g): (NuSeries, NuSeries) = (mons[i].clone().into(), mons[j].clone().into());
            let lhs = t.apply_series(&st1.star(&f, &g)).truncate(m);
            let rhs = st2.star(&images[i], &images[j]).truncate(m);
            (format!("({f}, {g})"), lhs, rhs)
        }),
    );
    rep
}

/// `L(f ⋆ g) = (Lf) ⋆ g + f ⋆ (Lg)` on monomial pairs.
pub fn check_derivation(name: &str, l: &FormalOperator, st: &FedosovState, d_test: u32) -> Report {
    let m = check_order(l, st, st);
    let mons = monomials(l.dim(), d_test);
    let mut rep = Report::new();
    rep.series_family(
        name,
        mons.iter().flat_map(|f| mons.iter().map(move |g| (f, g))).map(|(f, g)| {
            let (f, g): (NuSeries, NuSeries) = (f.clone().into(), g.clone().into());
            let lhs = l.apply_series(&st.star(&f, &g)).truncate(m);
            let rhs = st.star(&l.apply_series(&f), &g).add(&st.star(&f, &l.apply_series(&g))).truncate(m);
            (format!("({f}, {g})"), lhs, rhs)
        }),
    );
    rep
}

fn eq_line(rep: &mut Report, name: &str, a: &FormalOperator, b: &FormalOperator) {
    let diff = a.sub(b).expect("same shape");
    let first = diff.ops.iter().enumerate().find(|(_, d)| !d.is_zero());
    match first {
        None => rep.pass(name),
        Some((k, d)) => rep.push(name, false, format!("first differing order nu^{k}: {d}")),
    }
}

/// Averages an equivalence `T: ⋆₁ → ⋆₂` into one commuting with `C`, `P` or
/// both.
pub fn symmetrize_equivalence(
    t: &FormalOperator,
    st1: &FedosovState,
    st2: &FedosovState,
    mode: Mode,
    d_test: u32,
) -> Result<(FormalOperator, Report), SymmetryError> {
    let mut pre = check_equivalence("T(f *1 g) = Tf *2 Tg", t, st1, st2, d_test);
    pre.extend(check_antiautomorphism(st1, mode, d_test));
    pre.extend(check_antiautomorphism(st2, mode, d_test));
    if !pre.all_pass() {
        return Err(SymmetryError::Precondition(pre));
    }
    let half = rat(1, 2);
    let t_inv = t.inverse()?;
    let mut rep = Report::new();
    let mut automorphism = |label: &str, a: &FormalOperator| -> Result<(), SymmetryError> {
        rep.extend(check_derivation(&format!("log {label} is a derivation of *1"), &a.log()?, st1, d_test));
        Ok(())
    };
    let s = match mode {
        Mode::C | Mode::P => {
            let conj = if mode == Mode::C { t.conj_c() } else { t.conj_p() };
            let a = t_inv.compose(&conj)?;
            automorphism("A", &a)?;
            t.compose(&a.power(&half)?)?
        }
        Mode::Weyl => {
            let a1 = t_inv.compose(&t.conj_c())?;
            let a2 = t_inv.compose(&t.conj_p())?;
            automorphism("A1", &a1)?;
            automorphism("A2", &a2)?;
            let a2_half = a2.power(&half)?;
            let s2 = t.compose(&a2_half)?;
            let f2 = a2.power(&rat(-1, 2))?.compose(&a1)?.compose(&a2_half.conj_c())?;
            automorphism("F2", &f2)?;
            s2.compose(&f2.power(&half)?)?
        }
    };
    rep.extend(check_equivalence("S(f *1 g) = Sf *2 Sg", &s, st1, st2, d_test));
    if mode.wants_c() {
        eq_line(&mut rep, "C S C = S", &s.conj_c(), &s);
    }
    if mode.wants_p() {
        eq_line(&mut rep, "P S P = S", &s.conj_p(), &s);
    }
    Ok((s, rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> Scalar {
        parse_scalar(t, 2).unwrap()
    }

    fn field_op(x: &str, y: &str, order: usize) -> FormalOperator {
        FormalOperator::monomial(1, DiffOp::from_field(&VectorField(vec![s(x), s(y)])), order)
    }

    #[test]
    fn exp_of_translation() {
        assert!(FormalOperator::zero(2, 4).exp().unwrap().is_identity());
        let t = field_op("1", "0", 4).exp().unwrap();
        assert_eq!(t.apply(&s("x1")), NuSeries::from_coeffs(vec![s("x1"), s("1")]));
    }

    #[test]
    fn log_exp_round_trip() {
        let d = field_op("0", "x1", 4);
        let e = d.exp().unwrap();
        assert_eq!(e.log().unwrap(), d);
        assert_eq!(e.compose(&e.inverse().unwrap()).unwrap(), FormalOperator::identity(2, 4));
        assert!(d.log().is_err());
        assert!(e.exp().is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut d = DiffOp::zero(2);
        d.add_term(vec![2, 1], &s("x1 + i"));
        d.add_term(vec![0, 1], &s("-3/2*x2^2"));
        let mut op = FormalOperator::identity(2, 3);
        op.set(2, d);
        let text = op.to_string();
        assert_eq!(parse_operator(&text).unwrap(), op);
        assert!(text.contains("d/dx1^2*d/dx2"));
        assert!(matches!(parse_operator("dim 2\nnu^0: (1) * d/dx3"), Err(SymmetryError::Parse { line: 2, .. })));
    }

    #[test]
    fn compose_uses_leibniz() {
        let a = DiffOp::from_field(&VectorField(vec![s("1"), s("0")]));
        let b = DiffOp::from_field(&VectorField(vec![s("x1"), s("0")]));
        let ab = a.compose(&b);
        let f = s("x1^3*x2");
        assert_eq!(ab.apply(&f), a.apply(&b.apply(&f)));
    }

    #[test]
    fn mode_conditions() {
        let mut vol = Form::zero(2, 2);
        vol.add_component(&[0, 1], &Scalar::one());
        let zero = Form::zero(2, 2);
        let d = build_weyl_type_data(&[zero.clone(), vol.clone()], Mode::P, 2, 4).unwrap();
        assert_eq!(d.big_omega.coeff(2), vol);
        assert!(d.big_omega.coeff(1).is_zero());
        let iv = vol.map(|c| c * &Scalar::i());
        assert!(build_weyl_type_data(std::slice::from_ref(&iv), Mode::C, 2, 4).is_ok());
        assert!(build_weyl_type_data(std::slice::from_ref(&vol), Mode::C, 2, 4).is_err());
        assert!(matches!(
            build_weyl_type_data(&[iv], Mode::Weyl, 2, 4),
            Err(SymmetryError::ModeCondition { index: 0, .. })
        ));
    }
}
