//! TOML chart configuration, schema version 1.
//!
//! ```toml
//! dim = 2
//! cap = 6
//! omega = [["0", "1"], ["-1", "0"]]      # optional, Darboux by default
//! lambda = [["0", "1"], ["-1", "0"]]     # optional, -omega^-1 by default
//! s = "nu * (x1) * dx2 ⊗ 1"              # optional Weyl text, 0 by default
//!
//! [[gamma]]                              # Gamma^k_ij, 1-based; list both (i, j) orders
//! k = 2
//! i = 1
//! j = 1
//! value = "x1*x2"
//!
//! [[big_omega]]                          # nu^order (Omega_order)_ij, i < j
//! order = 1
//! i = 1
//! j = 2
//! value = "1 + x1*x2"
//!
//! [[potentials]]                         # one radial potential "A" by default
//! label = "A"
//! theta = "auto"                         # or one string per dx^i
//! big_theta = "auto"                     # or [{ order, i, value }]
//! shift = "x1*x2"                        # optional: theta += d(shift)
//! nu_shift = "nu*x1^2"                   # optional: Theta_k += d(nu^k part)
//!
//! [suite]
//! seed = 1
//! samples = 20
//! test_degree = 3
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::euler::{poincare_potential_series, EulerError, PotentialChoice};
use crate::fedosov::{validate_chart, ChartData, FedosovError, FedosovState, ValidationReport};
use crate::fibrewise::PoissonData;
use crate::forms::{Form, FormSeries};
use crate::scalar::{parse_nu_series, parse_scalar, NuSeries, Scalar};
use crate::suites::SuiteParams;
use crate::weyl::parse_weyl;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error: {0}")]
    Toml(String),
    #[error("schema error in `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("chart validation failed:\n{0}")]
    Invalid(ValidationReport),
    #[error("potential `{label}`: {source}")]
    Potential { label: String, source: EulerError },
    #[error(transparent)]
    Fedosov(#[from] FedosovError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dim: usize,
    cap: u32,
    omega: Option<Vec<Vec<String>>>,
    lambda: Option<Vec<Vec<String>>>,
    #[serde(default)]
    gamma: Vec<RawGamma>,
    #[serde(default)]
    big_omega: Vec<RawOmega>,
    s: Option<String>,
    #[serde(default)]
    potentials: Vec<RawPotential>,
    #[serde(default)]
    suite: SuiteParams,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGamma {
    k: usize,
    i: usize,
    j: usize,
    value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOmega {
    order: usize,
    i: usize,
    j: usize,
    value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTheta {
    order: usize,
    i: usize,
    value: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Auto<T> {
    Keyword(String),
    Given(T),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    label: String,
    theta: Option<Auto<Vec<String>>>,
    big_theta: Option<Auto<Vec<RawTheta>>>,
    shift: Option<String>,
    nu_shift: Option<String>,
}

/// A loaded configuration: a chart that passed validation, its Poisson data,
/// materialised potential choices and suite parameters.
#[derive(Debug)]
pub struct Config {
    pub chart: ChartData,
    pub pd: PoissonData,
    pub potentials: Vec<PotentialChoice>,
    pub suite: SuiteParams,
}

fn schema(field: impl Into<String>, reason: impl ToString) -> ConfigError {
    ConfigError::Schema { field: field.into(), reason: reason.to_string() }
}

fn index(field: &str, v: usize, dim: usize) -> Result<usize, ConfigError> {
    if v == 0 || v > dim {
        return Err(schema(field, format!("index {v} outside 1..={dim}")));
    }
    Ok(v - 1)
}

fn matrix(field: &str, m: &[Vec<String>], dim: usize) -> Result<Vec<Vec<Scalar>>, ConfigError> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(schema(field, format!("expected a {dim}x{dim} matrix")));
    }
    m.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, t)| parse_scalar(t, dim).map_err(|e| schema(format!("{field}[{}][{}]", i + 1, j + 1), e)))
                .collect()
        })
        .collect()
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string()))?;
    let dim = raw.dim;
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(schema("dim", "must be a positive even integer"));
    }
    let mut chart = ChartData::flat(dim, raw.cap);
    if let Some(m) = &raw.omega {
        chart.omega = matrix("omega", m, dim)?;
    }
    if let Some(m) = &raw.lambda {
        chart.lambda = Some(matrix("lambda", m, dim)?);
    }
    for (n, g) in raw.gamma.iter().enumerate() {
        let field = format!("gamma[{n}]");
        let (k, i, j) = (index(&field, g.k, dim)?, index(&field, g.i, dim)?, index(&field, g.j, dim)?);
        chart.gamma[k][i][j] = parse_scalar(&g.value, dim).map_err(|e| schema(&field, e))?;
    }
    for (n, o) in raw.big_omega.iter().enumerate() {
        let field = format!("big_omega[{n}]");
        let (i, j) = (index(&field, o.i, dim)?, index(&field, o.j, dim)?);
        if i >= j {
            return Err(schema(&field, "components are given with i < j"));
        }
        let v = parse_scalar(&o.value, dim).map_err(|e| schema(&field, e))?;
        let mut f = chart.big_omega.coeff(o.order);
        f.add_component(&[i as u8, j as u8], &v);
        chart.big_omega.set(o.order, f);
    }
    if let Some(s) = &raw.s {
        chart.s = parse_weyl(s, dim, raw.cap + 1).map_err(|e| schema("s", e))?;
    }
    let report = validate_chart(&chart);
    if !report.is_valid() {
        return Err(ConfigError::Invalid(report));
    }
    let pd = FedosovState::poisson(&chart)?;

    let mut potentials = Vec::new();
    if raw.potentials.is_empty() {
        let p = PotentialChoice::radial("A", &chart, &pd)
            .map_err(|source| ConfigError::Potential { label: "A".into(), source })?;
        potentials.push(p);
    }
    for p in &raw.potentials {
        potentials.push(potential(p, &chart, &pd)?);
    }
    Ok(Config { chart, pd, potentials, suite: raw.suite })
}

fn potential(p: &RawPotential, chart: &ChartData, pd: &PoissonData) -> Result<PotentialChoice, ConfigError> {
    let dim = chart.dim;
    let field = |f: &str| format!("potentials.{}.{f}", p.label);
    let wrap = |source: EulerError| ConfigError::Potential { label: p.label.clone(), source };
    let radial = PotentialChoice::radial(p.label.clone(), chart, pd).map_err(wrap)?;
    let theta = match &p.theta {
        None => radial.theta.clone(),
        Some(Auto::Keyword(k)) if k == "auto" => radial.theta.clone(),
        Some(Auto::Keyword(k)) => return Err(schema(field("theta"), format!("expected \"auto\" or a list, got {k:?}"))),
        Some(Auto::Given(v)) => {
            if v.len() != dim {
                return Err(schema(field("theta"), format!("expected {dim} components")));
            }
            let mut t = Form::zero(1, dim);
            for (i, c) in v.iter().enumerate() {
                t.add_component(&[i as u8], &parse_scalar(c, dim).map_err(|e| schema(field("theta"), e))?);
            }
            t
        }
    };
    let big_theta = match &p.big_theta {
        None => poincare_potential_series(&chart.big_omega).map_err(wrap)?,
        Some(Auto::Keyword(k)) if k == "auto" => poincare_potential_series(&chart.big_omega).map_err(wrap)?,
        Some(Auto::Keyword(k)) => {
            return Err(schema(field("big_theta"), format!("expected \"auto\" or a list, got {k:?}")))
        }
        Some(Auto::Given(v)) => {
            let mut s = FormSeries::zero(1, dim);
            for t in v {
                let i = index(&field("big_theta"), t.i, dim)?;
                let c = parse_scalar(&t.value, dim).map_err(|e| schema(field("big_theta"), e))?;
                let mut f = s.coeff(t.order);
                f.add_component(&[i as u8], &c);
                s.set(t.order, f);
            }
            s
        }
    };
    let base = PotentialChoice::new(p.label.clone(), chart, pd, theta, big_theta).map_err(wrap)?;
    if p.shift.is_none() && p.nu_shift.is_none() {
        return Ok(base);
    }
    let f = match &p.shift {
        Some(t) => parse_scalar(t, dim).map_err(|e| schema(field("shift"), e))?,
        None => Scalar::zero(),
    };
    let g = match &p.nu_shift {
        Some(t) => parse_nu_series(t, dim).map_err(|e| schema(field("nu_shift"), e))?,
        None => NuSeries::zero(),
    };
    base.shifted(p.label.clone(), chart, pd, &f, &g).map_err(wrap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_defaults() {
        let c = parse_config("dim = 2\ncap = 4\n").unwrap();
        assert!(c.chart.gamma.iter().flatten().flatten().all(Scalar::is_zero));
        assert_eq!(c.potentials.len(), 1);
        assert_eq!(c.suite, SuiteParams::default());
    }

    #[test]
    fn asymmetric_gamma_names_torsion() {
        let text = "dim = 2\ncap = 4\n[[gamma]]\nk = 1\ni = 1\nj = 2\nvalue = \"x1\"\n";
        match parse_config(text) {
            Err(ConfigError::Invalid(r)) => assert!(r.failures.iter().any(|f| f.identity.contains("torsion"))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_a_schema_error() {
        assert!(matches!(parse_config("dim = 2\ncap = 4\nfoo = 1\n"), Err(ConfigError::Toml(_))));
        assert!(matches!(
            parse_config("dim = 2\ncap = 4\n[[gamma]]\nk = 3\ni = 1\nj = 1\nvalue = \"1\"\n"),
            Err(ConfigError::Schema { .. })
        ));
    }
}
