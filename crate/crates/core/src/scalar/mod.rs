//! Exact coefficient ring: polynomials in the chart coordinates `x1..x{2n}`
//! with Gaussian-rational coefficients, plus formal `nu`-series over them.

mod gaussian;
mod parse;
mod series;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use gaussian::{rat, rat_int, GaussianRational, Rational};
pub use parse::{parse_nu_series, parse_scalar, ParseError};
pub use series::NuSeries;

use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("coordinate index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Exponent vector of a monomial `x1^e1 * x2^e2 * ...`, trailing zeros trimmed.
///
/// Ordered graded-lexicographically: total degree first, then the exponent of
/// `x1`, then `x2`, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// The coordinate `x^{index+1}` (zero-based index).
    pub fn var(index: usize) -> Self {
        let mut e = vec![0; index + 1];
        e[index] = 1;
        Monomial(e)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exp(&self, index: usize) -> u32 {
        self.0.get(index).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of coordinates this monomial mentions (highest index + 1).
    pub fn span(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let e = (0..n).map(|i| self.exp(i) + other.exp(i)).collect();
        Monomial(e)
    }

    /// Lower the exponent of `x^{index+1}` by one; `None` if it is absent.
    pub fn lower(&self, index: usize) -> Option<Monomial> {
        if self.exp(index) == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[index] -= 1;
        Some(Monomial::from_exponents(e))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            for i in 0..n {
                match self.exp(i).cmp(&other.exp(i)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// Polynomial in the chart coordinates with Gaussian-rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(c, Monomial::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(GaussianRational::from_int(n))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::constant(GaussianRational::from_frac(n, d))
    }

    pub fn i() -> Self {
        Self::constant(GaussianRational::i())
    }

    /// The coordinate function `x^{index+1}` (zero-based index).
    pub fn var(index: usize) -> Self {
        Self::monomial(GaussianRational::one(), Monomial::var(index))
    }

    pub fn monomial(c: GaussianRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Scalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(GaussianRational::is_real)
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_default()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Number of coordinates mentioned (highest index + 1).
    pub fn span(&self) -> usize {
        self.terms.keys().map(Monomial::span).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, other: &Scalar) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Scalar) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), &-c);
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Scalar {
        if c.is_zero() {
            return Scalar::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        let terms = self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect();
        Scalar { terms }
    }

    pub fn scale_rat(&self, q: &Rational) -> Scalar {
        self.scale(&GaussianRational::real(q.clone()))
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative along the zero-based coordinate `index`.
    pub fn partial(&self, index: usize) -> Scalar {
        let mut out = Scalar::zero();
        for (m, c) in &self.terms {
            let e = m.exp(index);
            if let Some(lower) = m.lower(index) {
                out.add_term(lower, &c.scale(&rat_int(e as i64)));
            }
        }
        out
    }

    /// Complex conjugation of every coefficient.
    pub fn conj(&self) -> Scalar {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect();
        Scalar { terms }
    }

    pub fn canonical_string(&self) -> String {
        self.to_string()
    }
}

/// `d/dx^i` with a one-based coordinate index, checked against the chart dimension.
pub fn partial_derivative(s: &Scalar, i: usize, dim: usize) -> Result<Scalar, ScalarError> {
    if i == 0 || i > dim {
        return Err(ScalarError::IndexOutOfRange { index: i, dim });
    }
    Ok(s.partial(i - 1))
}

pub fn conjugate_scalar(s: &Scalar) -> Scalar {
    s.conj()
}

pub fn canonical_string(s: &Scalar) -> String {
    s.to_string()
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        Scalar { terms }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(mut self, rhs: Scalar) -> Scalar {
        self.add_assign_ref(&rhs);
        self
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(mut self, rhs: Scalar) -> Scalar {
        self.sub_assign_ref(&rhs);
        self
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// A single printed term split into its sign and the unsigned body, so that
/// sums can be joined as `a + b - c`.
pub(crate) fn format_term(c: &GaussianRational, factors: &[String]) -> (bool, String) {
    let factors: Vec<&String> = factors.iter().filter(|s| !s.is_empty()).collect();
    let rest = factors.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("*");
    let (negative, magnitude) = if c.re.is_zero() || c.im.is_zero() {
        if c.is_negative_lead() {
            (true, -c)
        } else {
            (false, c.clone())
        }
    } else {
        (false, c.clone())
    };
    let body = if rest.is_empty() {
        magnitude.to_string()
    } else if magnitude.is_one() {
        rest
    } else {
        format!("{magnitude}*{rest}")
    };
    (negative, body)
}

pub(crate) fn join_terms(terms: impl IntoIterator<Item = (bool, String)>) -> String {
    let mut out = String::new();
    for (negative, body) in terms {
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Scalar {
    /// Monomials in descending graded-lexicographic order, e.g. `x1^2 + 2*i*x1 - 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = join_terms(
            self.terms
                .iter()
                .rev()
                .map(|(m, c)| format_term(c, &[m.to_string()])),
        );
        write!(f, "{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Scalar {
        parse_scalar(s, 2).unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!((&Scalar::var(1) * &Scalar::var(0)).to_string(), "x1*x2");
        assert_eq!(Scalar::constant(GaussianRational::new(rat(0, 1), rat(1, 2))).to_string(), "1/2*i");
        assert_eq!(p("x1*x2 + 3/2").to_string(), "x1*x2 + 3/2");
        assert_eq!(p("-x2 + x1 - 1").to_string(), "x1 - x2 - 1");
        assert_eq!(p("(1 - 2*i)*x1").to_string(), "(1-2*i)*x1");
        assert_eq!(p("-i*x1^2").to_string(), "-i*x1^2");
    }

    #[test]
    fn gaussian_square_expands() {
        // (x1 + i)^2 = x1^2 + 2i x1 - 1
        let mut expected = Scalar::zero();
        expected.add_term(Monomial::from_exponents(vec![2]), &GaussianRational::one());
        expected.add_term(Monomial::var(0), &GaussianRational::new(rat(0, 1), rat(2, 1)));
        expected.add_term(Monomial::one(), &GaussianRational::from_int(-1));
        assert_eq!(p("(x1+i)^2"), expected);
        assert_eq!(p("(x1+i)^2").to_string(), "x1^2 + 2*i*x1 - 1");
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(partial_derivative(&p("x1^2*x2"), 1, 2).unwrap(), p("2*x1*x2"));
        assert_eq!(partial_derivative(&p("7/3"), 2, 2).unwrap(), Scalar::zero());
        assert_eq!(partial_derivative(&p("x1*x2"), 2, 2).unwrap(), p("x1"));
        assert!(matches!(
            partial_derivative(&p("x1"), 3, 2),
            Err(ScalarError::IndexOutOfRange { index: 3, dim: 2 })
        ));
        assert!(partial_derivative(&p("x1"), 0, 2).is_err());
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(p("i*x1").conj(), p("-i*x1"));
        assert_eq!(p("x1+x2").conj(), p("x1+x2"));
        let sq = p("(1+i)^2");
        assert_eq!(sq, p("2*i"));
        assert_eq!(sq.conj(), p("-2*i"));
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let x1 = Monomial::var(0);
        let x2 = Monomial::var(1);
        assert!(x1 > x2);
        assert!(Monomial::from_exponents(vec![0, 2]) > x1);
        assert!(Monomial::from_exponents(vec![2]) > Monomial::from_exponents(vec![1, 1]));
        assert!(Monomial::one() < x2);
    }
}
