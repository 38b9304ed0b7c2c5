//! Polynomial vector fields and differential forms on the chart, with the
//! exterior derivative, interior product, Lie derivative and the radial
//! homotopy operator.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::{rat, GaussianRational, Monomial, NuSeries, Scalar};

/// Components `X^1..X^{dim}` of a vector field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField(pub Vec<Scalar>);

impl VectorField {
    pub fn zero(dim: usize) -> Self {
        VectorField(vec![Scalar::zero(); dim])
    }

    /// The coordinate field `d/dx^{index+1}`.
    pub fn coordinate(dim: usize, index: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[index] = Scalar::one();
        v
    }

    /// `x^i d/dx^i`, the radial (Euler) field.
    pub fn radial(dim: usize) -> Self {
        VectorField((0..dim).map(Scalar::var).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn component(&self, i: usize) -> &Scalar {
        &self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    /// `X(f) = X^i d_i f`
    pub fn apply(&self, f: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (i, xi) in self.0.iter().enumerate() {
            if !xi.is_zero() {
                out.add_assign_ref(&(xi * &f.partial(i)));
            }
        }
        out
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &GaussianRational) -> VectorField {
        VectorField(self.0.iter().map(|a| a.scale(c)).collect())
    }

    /// `(d_j X^i)`, indexed `[i][j]`.
    pub fn jacobian(&self) -> Vec<Vec<Scalar>> {
        self.0
            .iter()
            .map(|xi| (0..self.dim()).map(|j| xi.partial(j)).collect())
            .collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c})*d{}", i + 1))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Sorts `idx` in place and returns the permutation sign, or `None` when an
/// index repeats.
pub(crate) fn sort_with_sign(idx: &mut [u8]) -> Option<i8> {
    let mut sign = 1i8;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// A differential `p`-form `sum_{I increasing} F_I dx^I` with polynomial
/// coefficients. Zero components are not stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Form {
    degree: usize,
    dim: usize,
    comps: BTreeMap<Vec<u8>, Scalar>,
}

impl Form {
    pub fn zero(degree: usize, dim: usize) -> Self {
        Form { degree, dim, comps: BTreeMap::new() }
    }

    pub fn function(f: Scalar, dim: usize) -> Self {
        let mut out = Self::zero(0, dim);
        out.add_component(&[], &f);
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Components with strictly increasing zero-based index sets.
    pub fn components(&self) -> impl Iterator<Item = (&Vec<u8>, &Scalar)> {
        self.comps.iter()
    }

    /// Coefficient of `dx^{i1} ^ ... ^ dx^{ip}` for an arbitrary index order.
    pub fn component(&self, idx: &[u8]) -> Scalar {
        let mut sorted = idx.to_vec();
        match sort_with_sign(&mut sorted) {
            None => Scalar::zero(),
            Some(sign) => {
                let c = self.comps.get(&sorted).cloned().unwrap_or_default();
                if sign < 0 {
                    -&c
                } else {
                    c
                }
            }
        }
    }

    /// Adds `f dx^{idx}` (any index order; repeated indices contribute nothing).
    pub fn add_component(&mut self, idx: &[u8], f: &Scalar) {
        assert_eq!(idx.len(), self.degree, "form degree mismatch");
        if f.is_zero() {
            return;
        }
        let mut sorted = idx.to_vec();
        let Some(sign) = sort_with_sign(&mut sorted) else {
            return;
        };
        let val = if sign < 0 { -f } else { f.clone() };
        let entry = self.comps.entry(sorted).or_default();
        entry.add_assign_ref(&val);
        if entry.is_zero() {
            let mut key = idx.to_vec();
            sort_with_sign(&mut key);
            self.comps.remove(&key);
        }
    }

    /// The zero-form's function value.
    pub fn as_function(&self) -> Scalar {
        assert_eq!(self.degree, 0);
        self.comps.get(&Vec::new()).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.add_component(k, v);
        }
        out
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.map(|c| -c)
    }

    pub fn scale(&self, c: &GaussianRational) -> Form {
        self.map(|s| s.scale(c))
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Form {
        let mut out = Form::zero(self.degree, self.dim);
        for (k, v) in &self.comps {
            out.add_component(k, &f(v));
        }
        out
    }

    pub fn conj(&self) -> Form {
        self.map(Scalar::conj)
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form::zero(self.degree + other.degree, self.dim);
        for (a, fa) in &self.comps {
            for (b, fb) in &other.comps {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                out.add_component(&idx, &(fa * fb));
            }
        }
        out
    }

    /// Exterior derivative `d = dx^i ^ d_i`.
    pub fn exterior_derivative(&self) -> Form {
        let mut out = Form::zero(self.degree + 1, self.dim);
        for (idx, f) in &self.comps {
            for i in 0..self.dim {
                let df = f.partial(i);
                if df.is_zero() {
                    continue;
                }
                let mut full = vec![i as u8];
                full.extend_from_slice(idx);
                out.add_component(&full, &df);
            }
        }
        out
    }

    /// Interior product `i_X`.
    pub fn interior(&self, x: &VectorField) -> Form {
        assert!(self.degree > 0, "interior product of a function");
        let mut out = Form::zero(self.degree - 1, self.dim);
        for (idx, f) in &self.comps {
            for (p, &i) in idx.iter().enumerate() {
                let xi = x.component(i as usize);
                if xi.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(p);
                let val = f * xi;
                out.add_component(&rest, &if p % 2 == 1 { -&val } else { val });
            }
        }
        out
    }

    /// `L_X = i_X d + d i_X`.
    pub fn lie_derivative(&self, x: &VectorField) -> Form {
        let a = self.exterior_derivative().interior(x);
        if self.degree == 0 {
            return a;
        }
        a.add(&self.interior(x).exterior_derivative())
    }

    /// Evaluate a two-form on a pair of vector fields, `F(X, Y) = F_ij X^i Y^j`.
    pub fn eval2(&self, x: &VectorField, y: &VectorField) -> Scalar {
        assert_eq!(self.degree, 2);
        self.interior(x).interior(y).as_function()
    }

    /// Radial homotopy operator `K` on a star-shaped chart: for closed forms of
    /// positive degree `d K(a) = a`, and `K` of a monomial-coefficient term is
    /// `x^M/(p + |M|) i_E dx^I` with `E` the radial field.
    pub fn radial_homotopy(&self) -> Form {
        assert!(self.degree > 0, "homotopy operator needs positive degree");
        let e = VectorField::radial(self.dim);
        let mut out = Form::zero(self.degree - 1, self.dim);
        for (idx, f) in &self.comps {
            let mut weighted = Scalar::zero();
            for (m, c) in f.terms() {
                let w = rat(1, (self.degree as u32 + m.degree()) as i64);
                weighted.add_assign_ref(&Scalar::monomial(c.scale(&w), m.clone()));
            }
            let mut single = Form::zero(self.degree, self.dim);
            single.add_component(idx, &weighted);
            out = out.add(&single.interior(&e));
        }
        out
    }

    /// Largest coordinate index mentioned anywhere (coefficients or slots).
    pub fn span(&self) -> usize {
        self.comps
            .iter()
            .map(|(k, v)| v.span().max(k.iter().map(|&i| i as usize + 1).max().unwrap_or(0)))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Form {
    /// `(f)*dx1∧dx2 + ...`, zero-forms print as the bare function.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        if self.degree == 0 {
            return write!(f, "{}", self.as_function());
        }
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|(idx, c)| {
                let slots: Vec<String> = idx.iter().map(|i| format!("dx{}", i + 1)).collect();
                format!("({c})*{}", slots.join("∧"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A formal series `sum_k nu^k F_k` of forms of a fixed degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSeries {
    pub degree: usize,
    pub dim: usize,
    /// `orders[k]` is the coefficient of `nu^k`.
    pub orders: Vec<Form>,
}

impl FormSeries {
    pub fn zero(degree: usize, dim: usize) -> Self {
        FormSeries { degree, dim, orders: Vec::new() }
    }

    pub fn coeff(&self, k: usize) -> Form {
        self.orders.get(k).cloned().unwrap_or_else(|| Form::zero(self.degree, self.dim))
    }

    pub fn set(&mut self, k: usize, f: Form) {
        while self.orders.len() <= k {
            self.orders.push(Form::zero(self.degree, self.dim));
        }
        self.orders[k] = f;
    }

    pub fn is_zero(&self) -> bool {
        self.orders.iter().all(Form::is_zero)
    }

    pub fn map(&self, f: impl Fn(usize, &Form) -> Form) -> FormSeries {
        FormSeries {
            degree: self.degree,
            dim: self.dim,
            orders: self.orders.iter().enumerate().map(|(k, v)| f(k, v)).collect(),
        }
    }

    pub fn add(&self, other: &FormSeries) -> FormSeries {
        let n = self.orders.len().max(other.orders.len());
        let mut out = FormSeries::zero(self.degree, self.dim);
        for k in 0..n {
            out.set(k, self.coeff(k).add(&other.coeff(k)));
        }
        out
    }

    pub fn sub(&self, other: &FormSeries) -> FormSeries {
        self.add(&other.map(|_, f| f.neg()))
    }

    pub fn exterior_derivative(&self) -> FormSeries {
        FormSeries {
            degree: self.degree + 1,
            dim: self.dim,
            orders: self.orders.iter().map(Form::exterior_derivative).collect(),
        }
    }

    /// Zero-form series as a `nu`-series of functions.
    pub fn as_functions(&self) -> NuSeries {
        assert_eq!(self.degree, 0);
        NuSeries::from_coeffs(self.orders.iter().map(Form::as_function).collect())
    }
}

impl fmt::Display for FormSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .orders
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, v)| format!("nu^{k}: {v}"))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("; "))
        }
    }
}

/// Monomial coefficient helper used by tests and fixtures.
pub fn monomial_scalar(exps: &[u32]) -> Scalar {
    Scalar::monomial(GaussianRational::one(), Monomial::from_exponents(exps.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_scalar;

    fn s(t: &str) -> Scalar {
        parse_scalar(t, 4).unwrap()
    }

    fn two_form(dim: usize, entries: &[(u8, u8, &str)]) -> Form {
        let mut f = Form::zero(2, dim);
        for (i, j, c) in entries {
            f.add_component(&[*i, *j], &s(c));
        }
        f
    }

    #[test]
    fn constant_symplectic_form_potential() {
        let omega = two_form(2, &[(0, 1, "1")]);
        let k = omega.radial_homotopy();
        let mut expected = Form::zero(1, 2);
        expected.add_component(&[1], &s("1/2*x1"));
        expected.add_component(&[0], &s("-1/2*x2"));
        assert_eq!(k, expected);
        assert_eq!(k.exterior_derivative(), omega);
    }

    #[test]
    fn constant_one_form_potential() {
        let mut a = Form::zero(1, 2);
        a.add_component(&[0], &s("3"));
        assert_eq!(a.radial_homotopy(), Form::function(s("3*x1"), 2));
    }

    #[test]
    fn closedness_in_four_dimensions() {
        // d(x1 dx1^dx2) = 0 but d(x3 dx1^dx2) = dx3^dx1^dx2 = dx1^dx2^dx3
        assert!(two_form(4, &[(0, 1, "x1")]).exterior_derivative().is_zero());
        let d = two_form(4, &[(0, 1, "x3")]).exterior_derivative();
        assert_eq!(d.component(&[0, 1, 2]), s("1"));
        assert_eq!(d.component(&[2, 0, 1]), s("1"));
        assert_eq!(d.component(&[1, 0, 2]), s("-1"));
    }

    #[test]
    fn d_squared_vanishes_and_cartan() {
        let mut th = Form::zero(1, 3);
        th.add_component(&[0], &s("x2*x3^2"));
        th.add_component(&[2], &s("x1^3 - x2"));
        assert!(th.exterior_derivative().exterior_derivative().is_zero());
        let x = VectorField(vec![s("x2"), s("1"), s("x1*x3")]);
        let lhs = th.lie_derivative(&x).exterior_derivative();
        let rhs = th.exterior_derivative().lie_derivative(&x);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluation_on_hamiltonian_fields() {
        let omega = two_form(2, &[(0, 1, "1")]);
        let xf = VectorField(vec![s("0"), s("-1")]);
        let xg = VectorField(vec![s("1"), s("0")]);
        assert_eq!(omega.eval2(&xf, &xg), s("1"));
        assert_eq!(omega.interior(&xf).component(&[0]), s("1"));
    }
}
