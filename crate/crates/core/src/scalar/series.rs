use std::fmt;

use super::{format_term, join_terms, GaussianRational, Rational, Scalar};

/// Formal power series in `nu` with `Scalar` coefficients, stored up to the
/// highest nonzero order. Truncation is always explicit at the call site.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct NuSeries {
    coeffs: Vec<Scalar>,
}

impl NuSeries {
    pub fn zero() -> Self {
        NuSeries { coeffs: Vec::new() }
    }

    pub fn from_scalar(s: Scalar) -> Self {
        Self::monomial(0, s)
    }

    /// `nu^k * s`
    pub fn monomial(k: usize, s: Scalar) -> Self {
        let mut out = NuSeries::zero();
        out.set(k, s);
        out
    }

    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Self {
        let mut out = NuSeries { coeffs };
        out.trim();
        out
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Scalar::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest order with a nonzero coefficient.
    pub fn max_order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn set(&mut self, k: usize, s: Scalar) {
        if self.coeffs.len() <= k {
            self.coeffs.resize(k + 1, Scalar::zero());
        }
        self.coeffs[k] = s;
        self.trim();
    }

    pub fn add_at(&mut self, k: usize, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        if self.coeffs.len() <= k {
            self.coeffs.resize(k + 1, Scalar::zero());
        }
        self.coeffs[k].add_assign_ref(s);
        self.trim();
    }

    /// Keep orders `0..order` (i.e. reduce modulo `nu^order`).
    pub fn truncate(&self, order: usize) -> NuSeries {
        NuSeries::from_coeffs(self.coeffs.iter().take(order).cloned().collect())
    }

    pub fn add(&self, other: &NuSeries) -> NuSeries {
        let n = self.coeffs.len().max(other.coeffs.len());
        NuSeries::from_coeffs((0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &NuSeries) -> NuSeries {
        let n = self.coeffs.len().max(other.coeffs.len());
        NuSeries::from_coeffs((0..n).map(|k| &self.coeff(k) - &other.coeff(k)).collect())
    }

    pub fn neg(&self) -> NuSeries {
        NuSeries::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, c: &GaussianRational) -> NuSeries {
        NuSeries::from_coeffs(self.coeffs.iter().map(|s| s.scale(c)).collect())
    }

    pub fn scale_rat(&self, q: &Rational) -> NuSeries {
        self.scale(&GaussianRational::real(q.clone()))
    }

    pub fn mul_scalar(&self, s: &Scalar) -> NuSeries {
        NuSeries::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Product reduced modulo `nu^order`.
    pub fn mul_trunc(&self, other: &NuSeries, order: usize) -> NuSeries {
        let mut out = vec![Scalar::zero(); order];
        for (i, a) in self.coeffs.iter().enumerate().take(order) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= order {
                    break;
                }
                out[i + j].add_assign_ref(&(a * b));
            }
        }
        NuSeries::from_coeffs(out)
    }

    /// Multiply by `nu^k`.
    pub fn shift_up(&self, k: usize) -> NuSeries {
        if self.is_zero() {
            return NuSeries::zero();
        }
        let mut coeffs = vec![Scalar::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        NuSeries::from_coeffs(coeffs)
    }

    /// Divide by `nu`; `None` when the `nu^0` coefficient is nonzero.
    pub fn shift_down(&self) -> Option<NuSeries> {
        if !self.coeff(0).is_zero() {
            return None;
        }
        Some(NuSeries::from_coeffs(self.coeffs.iter().skip(1).cloned().collect()))
    }

    /// `nu d/dnu`: multiplies the order-`k` coefficient by `k`.
    pub fn nu_euler(&self) -> NuSeries {
        NuSeries::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.scale(&GaussianRational::from_int(k as i64)))
                .collect(),
        )
    }

    /// `nu -> -nu`.
    pub fn parity(&self) -> NuSeries {
        NuSeries::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// Complex conjugation with `nu` treated as purely imaginary.
    pub fn conjugate(&self) -> NuSeries {
        NuSeries::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c.conj() } else { c.conj() })
                .collect(),
        )
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> NuSeries {
        NuSeries::from_coeffs(self.coeffs.iter().map(f).collect())
    }

    pub fn canonical_string(&self) -> String {
        self.to_string()
    }
}

impl From<Scalar> for NuSeries {
    fn from(s: Scalar) -> Self {
        NuSeries::from_scalar(s)
    }
}

pub(crate) fn nu_factor(k: usize) -> String {
    match k {
        0 => String::new(),
        1 => "nu".to_string(),
        _ => format!("nu^{k}"),
    }
}

impl fmt::Display for NuSeries {
    /// Ascending in `nu`, each order printed like a `Scalar`: `x1*x2 + 1/2*nu`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.coeffs.iter().enumerate().flat_map(|(k, s)| {
            s.terms()
                .rev()
                .map(move |(m, c)| format_term(c, &[m.to_string(), nu_factor(k)]))
        });
        write!(f, "{}", join_terms(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_nu_series;

    #[test]
    fn display_and_parse() {
        let s = parse_nu_series("x1*x2 + 1/2*nu", 2).unwrap();
        assert_eq!(s.to_string(), "x1*x2 + 1/2*nu");
        let t = parse_nu_series("nu^2*x1 - nu*(1+i)", 2).unwrap();
        assert_eq!(t.to_string(), "(-1-i)*nu + x1*nu^2");
        assert_eq!(parse_nu_series(&t.to_string(), 2).unwrap(), t);
    }

    #[test]
    fn conjugate_and_parity_are_involutions() {
        let s = parse_nu_series("i*x1 + nu*x2 + nu^2*(1+i) + i*nu^3", 2).unwrap();
        assert_eq!(s.conjugate().conjugate(), s);
        assert_eq!(s.parity().parity(), s);
        assert_eq!(s.conjugate().coeff(1), Scalar::var(1).scale(&GaussianRational::from_int(-1)));
    }

    #[test]
    fn truncated_product() {
        let a = parse_nu_series("1 + nu", 2).unwrap();
        let sq = a.mul_trunc(&a, 2);
        assert_eq!(sq, parse_nu_series("1 + 2*nu", 2).unwrap());
        assert!(a.shift_down().is_none());
        assert_eq!(a.shift_up(1).shift_down().unwrap(), a);
    }
}
