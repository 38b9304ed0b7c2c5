//! Elements of the formal Weyl algebra tensored with forms, `W ⊗ Λ`.
//!
//! A basis element is `ν^k · dx^{s1}∨…∨dx^{sp} ⊗ dx^{a1}∧…∧dx^{aq}` with a
//! polynomial coefficient. `Deg = symdeg + 2·k`; every element carries a cap
//! `N` and terms with `Deg > N` are dropped as soon as they are produced.
//!
//! Text form, one term:
//!
//! ```text
//! term  := (nu ('^' uint)? '*')? '(' scalar ')' '*' sym '⊗' anti
//! sym   := '1' | 'dx' uint ('∨' 'dx' uint)*
//! anti  := '1' | 'dx' uint ('∧' 'dx' uint)*
//! elem  := '0' | term (' + ' term)*
//! nu    := 'ν' | 'nu'
//! ```
//!
//! Indices in the text are 1-based. Terms print ordered by ν-power, symdeg,
//! sym indices, antideg, anti indices.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::forms::{sort_with_sign, Form, VectorField};
use crate::scalar::{parse_scalar, GaussianRational, NuSeries, ParseError, Rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeylError {
    #[error("cap mismatch: {0} vs {1}")]
    CapMismatch(u32, u32),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("parse error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("coefficient: {0}")]
    Coefficient(#[from] ParseError),
    #[error("covector index dx{index} exceeds dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// Basis label of a term: ν-power, sorted sym multiset, strictly increasing
/// anti set. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylKey {
    pub nu: u32,
    pub sym: Vec<u8>,
    pub anti: Vec<u8>,
}

impl WeylKey {
    pub fn new(nu: u32, sym: Vec<u8>, anti: Vec<u8>) -> Self {
        WeylKey { nu, sym, anti }
    }

    pub fn symdeg(&self) -> u32 {
        self.sym.len() as u32
    }

    pub fn antideg(&self) -> u32 {
        self.anti.len() as u32
    }

    /// `symdeg + 2·nu`
    pub fn total_deg(&self) -> u32 {
        self.symdeg() + 2 * self.nu
    }
}

impl Ord for WeylKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.nu
            .cmp(&other.nu)
            .then(self.sym.len().cmp(&other.sym.len()))
            .then_with(|| self.sym.cmp(&other.sym))
            .then(self.anti.len().cmp(&other.anti.len()))
            .then_with(|| self.anti.cmp(&other.anti))
    }
}

impl PartialOrd for WeylKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Merge two sorted multisets.
pub(crate) fn sym_merge(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `dx^a ∧ dx^b` for increasing index sets; `None` if they overlap.
pub(crate) fn anti_wedge(a: &[u8], b: &[u8]) -> Option<(Vec<u8>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut negative = false;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                if (a.len() - i) % 2 == 1 {
                    negative = !negative;
                }
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, negative))
}

/// An element of `W ⊗ Λ` truncated at total degree `cap`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylElement {
    dim: usize,
    cap: u32,
    terms: BTreeMap<WeylKey, Scalar>,
}

impl WeylElement {
    pub fn zero(dim: usize, cap: u32) -> Self {
        WeylElement { dim, cap, terms: BTreeMap::new() }
    }

    /// `f ⊗ 1`
    pub fn scalar(f: Scalar, dim: usize, cap: u32) -> Self {
        Self::term(WeylKey::new(0, vec![], vec![]), f, dim, cap)
    }

    /// `Σ ν^k f_k ⊗ 1`
    pub fn nu_series(f: &NuSeries, dim: usize, cap: u32) -> Self {
        let mut out = Self::zero(dim, cap);
        for (k, c) in f.coeffs().iter().enumerate() {
            out.add_term(WeylKey::new(k as u32, vec![], vec![]), c);
        }
        out
    }

    /// A single basis term; indices in `key` may be unsorted.
    pub fn term(key: WeylKey, coeff: Scalar, dim: usize, cap: u32) -> Self {
        let mut out = Self::zero(dim, cap);
        let mut sym = key.sym;
        sym.sort_unstable();
        let mut anti = key.anti;
        if let Some(sign) = sort_with_sign(&mut anti) {
            let c = if sign < 0 { -&coeff } else { coeff };
            out.add_term(WeylKey::new(key.nu, sym, anti), &c);
        }
        out
    }

    /// `ν`
    pub fn nu(dim: usize, cap: u32) -> Self {
        Self::term(WeylKey::new(1, vec![], vec![]), Scalar::one(), dim, cap)
    }

    /// `α ⊗ 1` for a one-form, i.e. `α_i dx^i ⊗ 1`.
    pub fn sym_one_form(alpha: &Form, cap: u32) -> Self {
        assert_eq!(alpha.degree(), 1);
        let mut out = Self::zero(alpha.dim(), cap);
        for (idx, c) in alpha.components() {
            out.add_term(WeylKey::new(0, idx.clone(), vec![]), c);
        }
        out
    }

    /// `1 ⊗ α` for a form of any degree.
    pub fn anti_form(alpha: &Form, cap: u32) -> Self {
        let mut out = Self::zero(alpha.dim(), cap);
        for (idx, c) in alpha.components() {
            out.add_term(WeylKey::new(0, vec![], idx.clone()), c);
        }
        out
    }

    /// `Σ ν^k (1 ⊗ α_k)`
    pub fn anti_form_series(orders: &[Form], dim: usize, cap: u32) -> Self {
        let mut out = Self::zero(dim, cap);
        for (k, alpha) in orders.iter().enumerate() {
            for (idx, c) in alpha.components() {
                out.add_term(WeylKey::new(k as u32, vec![], idx.clone()), c);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WeylKey, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &WeylKey) -> Scalar {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    /// Accumulate `c` on a canonical key, dropping it if `Deg > cap`.
    pub fn add_term(&mut self, key: WeylKey, c: &Scalar) {
        if c.is_zero() || key.total_deg() > self.cap {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                v.add_assign_ref(c);
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    fn add_term_signed(&mut self, key: WeylKey, c: Scalar, negative: bool) {
        if negative {
            self.add_term(key, &-&c);
        } else {
            self.add_term(key, &c);
        }
    }

    /// Same terms under a different cap (dropping those above it).
    pub fn with_cap(&self, cap: u32) -> Self {
        let mut out = Self::zero(self.dim, cap);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v);
        }
        out
    }

    /// Terms with `Deg ≤ d`.
    pub fn truncate(&self, d: u32) -> Self {
        self.filter(|k| k.total_deg() <= d)
    }

    pub fn filter(&self, keep: impl Fn(&WeylKey) -> bool) -> Self {
        WeylElement {
            dim: self.dim,
            cap: self.cap,
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&WeylKey, &Scalar) -> Scalar) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), &f(k, v));
        }
        out
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.cap, other.cap, "cap mismatch");
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        self.check(other);
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v);
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Self) {
        self.check(other);
        for (k, v) in &other.terms {
            self.add_term(k.clone(), &-v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_ref(other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.sub_assign_ref(other);
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|_, v| -v)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        self.map_coeffs(|_, v| v.scale(c))
    }

    pub fn scale_rat(&self, q: &Rational) -> Self {
        self.scale(&GaussianRational::real(q.clone()))
    }

    /// Multiply every coefficient by a function `f` (i.e. by `f ⊗ 1`).
    pub fn mul_scalar(&self, f: &Scalar) -> Self {
        self.map_coeffs(|_, v| v * f)
    }

    /// Multiply by `ν^k`.
    pub fn shift_nu(&self, k: u32) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (key, v) in &self.terms {
            out.add_term(WeylKey::new(key.nu + k, key.sym.clone(), key.anti.clone()), v);
        }
        out
    }

    /// Divide by `ν`; `None` when a `ν⁰` term is present.
    pub fn shift_nu_down(&self) -> Option<Self> {
        let mut out = Self::zero(self.dim, self.cap);
        for (key, v) in &self.terms {
            if key.nu == 0 {
                return None;
            }
            out.add_term(WeylKey::new(key.nu - 1, key.sym.clone(), key.anti.clone()), v);
        }
        Some(out)
    }

    /// The undeformed product `μ(a ⊗ b)`.
    pub fn mu(&self, other: &Self) -> Self {
        self.check(other);
        let mut out = Self::zero(self.dim, self.cap);
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                if ka.total_deg() + kb.total_deg() > self.cap {
                    continue;
                }
                let Some((anti, negative)) = anti_wedge(&ka.anti, &kb.anti) else {
                    continue;
                };
                let key = WeylKey::new(ka.nu + kb.nu, sym_merge(&ka.sym, &kb.sym), anti);
                out.add_term_signed(key, va * vb, negative);
            }
        }
        out
    }

    /// `(dx^i ⊗ 1) · a`
    pub fn sym_left(&self, i: u8) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            let sym = sym_merge(&[i], &k.sym);
            out.add_term(WeylKey::new(k.nu, sym, k.anti.clone()), v);
        }
        out
    }

    /// `(1 ⊗ dx^i) · a`
    pub fn wedge_left(&self, i: u8) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            if let Some((anti, negative)) = anti_wedge(&[i], &k.anti) {
                out.add_term_signed(WeylKey::new(k.nu, k.sym.clone(), anti), v.clone(), negative);
            }
        }
        out
    }

    /// `i_s(∂_i)`
    pub fn insert_sym_basis(&self, i: u8) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            let mult = k.sym.iter().filter(|&&s| s == i).count();
            if mult == 0 {
                continue;
            }
            let pos = k.sym.iter().position(|&s| s == i).unwrap();
            let mut sym = k.sym.clone();
            sym.remove(pos);
            out.add_term(
                WeylKey::new(k.nu, sym, k.anti.clone()),
                &v.scale(&GaussianRational::from_int(mult as i64)),
            );
        }
        out
    }

    /// `i_a(∂_i)`
    pub fn insert_anti_basis(&self, i: u8) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            if let Some(pos) = k.anti.iter().position(|&a| a == i) {
                let mut anti = k.anti.clone();
                anti.remove(pos);
                out.add_term_signed(WeylKey::new(k.nu, k.sym.clone(), anti), v.clone(), pos % 2 == 1);
            }
        }
        out
    }

    /// `i_s(X) = X^i i_s(∂_i)`
    pub fn insert_sym(&self, x: &VectorField) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (i, xi) in x.0.iter().enumerate() {
            if !xi.is_zero() {
                out.add_assign_ref(&self.insert_sym_basis(i as u8).mul_scalar(xi));
            }
        }
        out
    }

    /// `i_a(X) = X^i i_a(∂_i)`
    pub fn insert_anti(&self, x: &VectorField) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (i, xi) in x.0.iter().enumerate() {
            if !xi.is_zero() {
                out.add_assign_ref(&self.insert_anti_basis(i as u8).mul_scalar(xi));
            }
        }
        out
    }

    /// `δ = (1⊗dx^i) i_s(∂_i)`
    pub fn delta(&self) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            let mut prev = None;
            for (pos, &i) in k.sym.iter().enumerate() {
                if prev == Some(i) {
                    continue;
                }
                prev = Some(i);
                let mult = k.sym.iter().filter(|&&s| s == i).count() as i64;
                let Some((anti, negative)) = anti_wedge(&[i], &k.anti) else {
                    continue;
                };
                let mut sym = k.sym.clone();
                sym.remove(pos);
                out.add_term_signed(
                    WeylKey::new(k.nu, sym, anti),
                    v.scale(&GaussianRational::from_int(mult)),
                    negative,
                );
            }
        }
        out
    }

    /// `δ* = (dx^i⊗1) i_a(∂_i)`
    pub fn delta_star(&self) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            for (pos, &i) in k.anti.iter().enumerate() {
                let mut anti = k.anti.clone();
                anti.remove(pos);
                let sym = sym_merge(&[i], &k.sym);
                out.add_term_signed(WeylKey::new(k.nu, sym, anti), v.clone(), pos % 2 == 1);
            }
        }
        out
    }

    /// `δ⁻¹`: `δ*/(k+l)` on terms of symdeg `k`, antideg `l`; zero when `k+l = 0`.
    pub fn delta_inv(&self) -> Self {
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            let w = k.symdeg() + k.antideg();
            if w == 0 || k.anti.is_empty() {
                continue;
            }
            let c = v.scale(&GaussianRational::from_frac(1, w as i64));
            for (pos, &i) in k.anti.iter().enumerate() {
                let mut anti = k.anti.clone();
                anti.remove(pos);
                let sym = sym_merge(&[i], &k.sym);
                out.add_term_signed(WeylKey::new(k.nu, sym, anti), c.clone(), pos % 2 == 1);
            }
        }
        out
    }

    /// `σ`: the symdeg-0, antideg-0 part as a ν-series.
    pub fn sigma(&self) -> NuSeries {
        let mut out = NuSeries::zero();
        for (k, v) in &self.terms {
            if k.sym.is_empty() && k.anti.is_empty() {
                out.add_at(k.nu as usize, v);
            }
        }
        out
    }

    /// Homogeneous components keyed by `(symdeg, antideg, νdeg)`.
    pub fn grade_decompose(&self) -> BTreeMap<(u32, u32, u32), WeylElement> {
        let mut out: BTreeMap<(u32, u32, u32), WeylElement> = BTreeMap::new();
        for (k, v) in &self.terms {
            out.entry((k.symdeg(), k.antideg(), k.nu))
                .or_insert_with(|| Self::zero(self.dim, self.cap))
                .terms
                .insert(k.clone(), v.clone());
        }
        out
    }

    /// Component of total degree `Deg = d`.
    pub fn deg_component(&self, d: u32) -> Self {
        self.filter(|k| k.total_deg() == d)
    }

    pub fn antideg_component(&self, l: u32) -> Self {
        self.filter(|k| k.antideg() == l)
    }

    /// Largest `Deg` among the terms.
    pub fn max_deg(&self) -> Option<u32> {
        self.terms.keys().map(WeylKey::total_deg).max()
    }

    pub fn min_deg(&self) -> Option<u32> {
        self.terms.keys().map(WeylKey::total_deg).min()
    }

    /// Set of antisymmetric degrees present.
    pub fn antidegs(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.keys().map(WeylKey::antideg).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `ν ∂_ν`
    pub fn nu_euler(&self) -> Self {
        self.map_coeffs(|k, v| v.scale(&GaussianRational::from_int(k.nu as i64)))
    }

    /// `ν ↦ −ν`
    pub fn parity(&self) -> Self {
        self.map_coeffs(|k, v| if k.nu % 2 == 1 { -v } else { v.clone() })
    }

    /// Complex conjugation with `ν` imaginary.
    pub fn conjugate(&self) -> Self {
        self.map_coeffs(|k, v| if k.nu % 2 == 1 { -v.conj() } else { v.conj() })
    }

    /// Extend a derivation to the tensor: `coeff` acts on coefficients and
    /// `slot(j)` gives the image `Σ c_k dx^k` of `dx^j`, applied in every sym
    /// and anti slot (even, so no extra signs).
    pub fn derivation(
        &self,
        coeff: impl Fn(&Scalar) -> Scalar,
        slot: impl Fn(u8) -> Vec<(u8, Scalar)>,
    ) -> Self {
        let images: Vec<Vec<(u8, Scalar)>> = (0..self.dim as u8).map(&slot).collect();
        let mut out = Self::zero(self.dim, self.cap);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), &coeff(v));
            for (pos, &j) in k.sym.iter().enumerate() {
                if pos > 0 && k.sym[pos - 1] == j {
                    continue;
                }
                let mult = k.sym.iter().filter(|&&s| s == j).count() as i64;
                let mut rest = k.sym.clone();
                rest.remove(pos);
                for (t, c) in &images[j as usize] {
                    let sym = sym_merge(&[*t], &rest);
                    let val = (v * c).scale(&GaussianRational::from_int(mult));
                    out.add_term(WeylKey::new(k.nu, sym, k.anti.clone()), &val);
                }
            }
            for (pos, &j) in k.anti.iter().enumerate() {
                for (t, c) in &images[j as usize] {
                    let mut anti = k.anti.clone();
                    anti[pos] = *t;
                    if let Some(sign) = sort_with_sign(&mut anti) {
                        out.add_term_signed(WeylKey::new(k.nu, k.sym.clone(), anti), v * c, sign < 0);
                    }
                }
            }
        }
        out
    }

    /// Canonical text form.
    pub fn canonical_string(&self) -> String {
        self.to_string()
    }
}

/// `μ(a ⊗ b)`, rejecting operands with different caps or dimensions.
pub fn mu_product(a: &WeylElement, b: &WeylElement) -> Result<WeylElement, WeylError> {
    if a.dim != b.dim {
        return Err(WeylError::DimMismatch(a.dim, b.dim));
    }
    if a.cap != b.cap {
        return Err(WeylError::CapMismatch(a.cap, b.cap));
    }
    Ok(a.mu(b))
}

/// Every monomial `c ν^k dx^S ⊗ dx^A` with `c ∈ {1, x_j}` and `Deg ≤ max_deg`;
/// spans the elements of that degree as a module over polynomials.
pub fn monomial_generators(dim: usize, max_deg: u32, cap: u32) -> Vec<WeylElement> {
    let mut coeffs = vec![Scalar::one()];
    coeffs.extend((0..dim).map(Scalar::var));
    let mut syms: Vec<Vec<u8>> = vec![vec![]];
    let mut frontier: Vec<Vec<u8>> = vec![vec![]];
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.last().copied().unwrap_or(0);
            for i in start..dim as u8 {
                let mut v = m.clone();
                v.push(i);
                next.push(v);
            }
        }
        syms.extend(next.iter().cloned());
        frontier = next;
    }
    let antis: Vec<Vec<u8>> = (0u32..1 << dim)
        .map(|mask| (0..dim as u8).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    let mut out = Vec::new();
    for nu in 0..=max_deg / 2 {
        for sym in &syms {
            if sym.len() as u32 + 2 * nu > max_deg {
                continue;
            }
            for anti in &antis {
                for c in &coeffs {
                    let key = WeylKey::new(nu, sym.clone(), anti.clone());
                    out.push(WeylElement::term(key, c.clone(), dim, cap));
                }
            }
        }
    }
    out
}

fn slots(idx: &[u8], sep: &str) -> String {
    if idx.is_empty() {
        "1".to_string()
    } else {
        idx.iter().map(|i| format!("dx{}", i + 1)).collect::<Vec<_>>().join(sep)
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, v)| {
                let nu = match k.nu {
                    0 => String::new(),
                    1 => "ν * ".to_string(),
                    n => format!("ν^{n} * "),
                };
                format!("{nu}({v}) * {} ⊗ {}", slots(&k.sym, "∨"), slots(&k.anti, "∧"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

struct TextCursor<'a> {
    text: &'a str,
    at: usize,
}

impl<'a> TextCursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.at..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.at += c.len_utf8();
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.text[self.at..].starts_with(tok) {
            self.at += tok.len();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T, WeylError> {
        Err(WeylError::Syntax { pos: self.at, msg: msg.to_string() })
    }

    fn expect(&mut self, tok: &str) -> Result<(), WeylError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(&format!("expected `{tok}`"))
        }
    }

    fn uint(&mut self) -> Result<usize, WeylError> {
        self.skip_ws();
        let digits: String = self.text[self.at..].chars().take_while(char::is_ascii_digit).collect();
        if digits.is_empty() {
            return self.err("expected unsigned integer");
        }
        self.at += digits.len();
        digits.parse().or_else(|_| self.err("integer too large"))
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.at == self.text.len()
    }

    /// Balanced parenthesised substring, returned without the outer parens.
    fn paren_group(&mut self) -> Result<(usize, &'a str), WeylError> {
        self.expect("(")?;
        let start = self.at;
        let mut depth = 1;
        for (off, c) in self.text[start..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        self.at = start + off + 1;
                        return Ok((start, &self.text[start..start + off]));
                    }
                }
                _ => {}
            }
        }
        self.err("unbalanced `(`")
    }

    fn indices(&mut self, sep: &str, dim: usize) -> Result<Vec<u8>, WeylError> {
        if self.eat("1") {
            return Ok(vec![]);
        }
        let mut out = Vec::new();
        loop {
            self.expect("dx")?;
            let i = self.uint()?;
            if i == 0 || i > dim {
                return Err(WeylError::IndexOutOfRange { index: i, dim });
            }
            out.push((i - 1) as u8);
            if !self.eat(sep) {
                return Ok(out);
            }
        }
    }
}

/// Parse the canonical text form (see the module docs). Terms above `cap`
/// are dropped; anti factors may be given in any order.
pub fn parse_weyl(text: &str, dim: usize, cap: u32) -> Result<WeylElement, WeylError> {
    let mut cur = TextCursor { text, at: 0 };
    let mut out = WeylElement::zero(dim, cap);
    if cur.eat("0") && cur.at_end() {
        return Ok(out);
    }
    cur.at = 0;
    loop {
        let mut nu = 0u32;
        if cur.eat("ν") || cur.eat("nu") {
            nu = 1;
            if cur.eat("^") {
                nu = cur.uint()? as u32;
            }
            cur.expect("*")?;
        }
        let (pos, inner) = cur.paren_group()?;
        let coeff = parse_scalar(inner, dim).map_err(|e| match e {
            ParseError::Syntax { pos: p, msg } => WeylError::Syntax { pos: pos + p, msg },
            other => WeylError::Coefficient(other),
        })?;
        cur.expect("*")?;
        let sym = cur.indices("∨", dim)?;
        cur.expect("⊗")?;
        let anti = cur.indices("∧", dim)?;
        out.add_assign_ref(&WeylElement::term(WeylKey::new(nu, sym, anti), coeff, dim, cap));
        if cur.at_end() {
            return Ok(out);
        }
        cur.expect("+")?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_scalar;

    const N: u32 = 8;

    fn w(text: &str) -> WeylElement {
        parse_weyl(text, 2, N).unwrap()
    }

    fn s(text: &str) -> Scalar {
        parse_scalar(text, 2).unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(w("(1) * dx1 ⊗ 1").mu(&w("(1) * dx2 ⊗ 1")), w("(1) * dx1∨dx2 ⊗ 1"));
        let a = w("(1) * 1 ⊗ dx1");
        let b = w("(1) * 1 ⊗ dx2");
        assert_eq!(a.mu(&b), w("(1) * 1 ⊗ dx1∧dx2"));
        assert_eq!(b.mu(&a), w("(-1) * 1 ⊗ dx1∧dx2"));
        assert!(a.mu(&a).is_zero());
        let other = WeylElement::zero(2, N + 1);
        assert_eq!(mu_product(&a, &other), Err(WeylError::CapMismatch(N, N + 1)));
    }

    #[test]
    fn insertions() {
        let d1 = VectorField::coordinate(2, 0);
        let d2 = VectorField::coordinate(2, 1);
        assert_eq!(w("(1) * dx1∨dx1 ⊗ 1").insert_sym(&d1), w("(2) * dx1 ⊗ 1"));
        assert!(w("(1) * dx1 ⊗ 1").insert_sym(&d2).is_zero());
        let x1d1 = VectorField(vec![s("x1"), s("0")]);
        assert_eq!(w("(1) * dx1 ⊗ dx2").insert_sym(&x1d1), w("(x1) * 1 ⊗ dx2"));
        assert_eq!(w("(1) * 1 ⊗ dx1∧dx2").insert_anti(&d1), w("(1) * 1 ⊗ dx2"));
        assert_eq!(w("(1) * 1 ⊗ dx1∧dx2").insert_anti(&d2), w("(-1) * 1 ⊗ dx1"));
        assert!(w("(1) * dx2 ⊗ 1").insert_anti(&d1).is_zero());
    }

    #[test]
    fn delta_calculus() {
        assert_eq!(w("(1) * dx1∨dx1 ⊗ 1").delta(), w("(2) * dx1 ⊗ dx1"));
        assert_eq!(w("(1) * dx1 ⊗ dx1").delta_star(), w("(1) * dx1∨dx1 ⊗ 1"));
        assert!(w("(x1^2 + x2) * 1 ⊗ 1").delta().is_zero());
        assert_eq!(w("(1) * dx1 ⊗ dx1").delta_inv(), w("(1/2) * dx1∨dx1 ⊗ 1"));
        assert!(w("(x1) * 1 ⊗ 1").delta_inv().is_zero());
    }

    #[test]
    fn sigma_and_grading() {
        let f = s("x1*x2 + 3");
        let a = WeylElement::scalar(f.clone(), 2, N).add(&w("(1) * dx1 ⊗ 1"));
        assert_eq!(a.sigma(), NuSeries::from_scalar(f.clone()));
        assert_eq!(w("ν * (x2) * 1 ⊗ 1").sigma(), NuSeries::monomial(1, s("x2")));
        assert!(w("(1) * 1 ⊗ dx1").sigma().is_zero());

        let b = WeylElement::scalar(f.clone(), 2, N).add(&w("ν * (1) * dx1 ⊗ 1"));
        let g = b.grade_decompose();
        assert_eq!(g.len(), 2);
        assert_eq!(g[&(0, 0, 0)], WeylElement::scalar(f, 2, N));
        assert_eq!(g[&(1, 0, 1)], w("ν * (1) * dx1 ⊗ 1"));
        assert_eq!(w("ν * (1) * dx1 ⊗ 1").max_deg(), Some(3));
        assert_eq!(w("ν^2 * (1) * 1 ⊗ dx1∧dx2").max_deg(), Some(4));
    }

    #[test]
    fn cap_drops_high_terms() {
        let a = parse_weyl("ν^2 * (1) * dx1 ⊗ 1", 2, 4).unwrap();
        assert!(a.is_zero());
        let b = parse_weyl("ν * (1) * dx1 ⊗ 1", 2, 4).unwrap();
        assert!(b.mu(&b).is_zero());
    }

    #[test]
    fn text_round_trip() {
        let a = w("ν^2 * (x1 - i) * dx2∨dx1 ⊗ dx2∧dx1 + (3/2) * 1 ⊗ 1 + nu * (1) * dx1 ⊗ 1");
        let text = a.to_string();
        assert_eq!(
            text,
            "(3/2) * 1 ⊗ 1 + ν * (1) * dx1 ⊗ 1 + ν^2 * (-x1 + i) * dx1∨dx2 ⊗ dx1∧dx2"
        );
        assert_eq!(w(&text), a);
        assert_eq!(w("0"), WeylElement::zero(2, N));
        assert!(matches!(parse_weyl("(1) * dx3 ⊗ 1", 2, N), Err(WeylError::IndexOutOfRange { .. })));
        assert!(matches!(parse_weyl("(1) * dx1", 2, N), Err(WeylError::Syntax { .. })));
    }

    #[test]
    fn derivation_extension_matches_leibniz() {
        // dx^1 ↦ dx^2, dx^2 ↦ 0 on sym and anti slots
        let a = w("(1) * dx1∨dx1 ⊗ dx1");
        let d = a.derivation(|_| Scalar::zero(), |j| if j == 0 { vec![(1, Scalar::one())] } else { vec![] });
        assert_eq!(d, w("(2) * dx1∨dx2 ⊗ dx1 + (1) * dx1∨dx1 ⊗ dx2"));
    }
}
