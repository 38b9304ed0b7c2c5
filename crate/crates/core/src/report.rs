//! One PASS/FAIL line per certified identity.

use std::fmt;

use crate::scalar::{NuSeries, Scalar};
use crate::weyl::WeylElement;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

/// First term of a nonzero difference, in canonical text.
pub fn first_weyl_term(diff: &WeylElement) -> String {
    match diff.terms().next() {
        None => "0".into(),
        Some((k, v)) => WeylElement::term(k.clone(), v.clone(), diff.dim(), diff.cap()).to_string(),
    }
}

pub fn first_series_term(diff: &NuSeries) -> String {
    for (k, c) in diff.coeffs().iter().enumerate() {
        if let Some((m, v)) = c.terms().next_back() {
            let one = Scalar::monomial(v.clone(), m.clone());
            return NuSeries::monomial(k, one).to_string();
        }
    }
    "0".into()
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.push(name, true, "");
    }

    /// Records `lhs == rhs`, and on failure the first differing term.
    pub fn weyl_eq(&mut self, name: impl Into<String>, lhs: &WeylElement, rhs: &WeylElement) -> bool {
        let diff = lhs.sub(rhs);
        let ok = diff.is_zero();
        self.push(name, ok, if ok { String::new() } else { format!("first differing term {}", first_weyl_term(&diff)) });
        ok
    }

    pub fn series_eq(&mut self, name: impl Into<String>, lhs: &NuSeries, rhs: &NuSeries) -> bool {
        let diff = lhs.sub(rhs);
        let ok = diff.is_zero();
        self.push(name, ok, if ok { String::new() } else { format!("first differing term {}", first_series_term(&diff)) });
        ok
    }

    /// Folds a family of comparisons into one line, naming the first failing case.
    pub fn weyl_family(
        &mut self,
        name: impl Into<String>,
        cases: impl IntoIterator<Item = (String, WeylElement, WeylElement)>,
    ) -> bool {
        let mut count = 0usize;
        for (label, lhs, rhs) in cases {
            count += 1;
            let diff = lhs.sub(&rhs);
            if !diff.is_zero() {
                self.push(name, false, format!("on {label}: first differing term {}", first_weyl_term(&diff)));
                return false;
            }
        }
        self.push(name, true, format!("{count} cases"));
        true
    }

    pub fn series_family(
        &mut self,
        name: impl Into<String>,
        cases: impl IntoIterator<Item = (String, NuSeries, NuSeries)>,
    ) -> bool {
        let mut count = 0usize;
        for (label, lhs, rhs) in cases {
            count += 1;
            let diff = lhs.sub(&rhs);
            if !diff.is_zero() {
                self.push(name, false, format!("on {label}: first differing term {}", first_series_term(&diff)));
                return false;
            }
        }
        self.push(name, true, format!("{count} cases"));
        true
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "{tag} {}", c.name)?;
            } else {
                writeln!(f, "{tag} {} ({})", c.name, c.detail)?;
            }
        }
        Ok(())
    }
}
