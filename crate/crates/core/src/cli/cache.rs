//! Solved-state cache.
//!
//! Four lines of UTF-8 text:
//!
//! ```text
//! fedosov-cache v1
//! chart-sha256 <hex digest of ChartData::canonical_string>
//! cap <N>
//! r <canonical text of r>
//! ```
//!
//! A cache whose version, digest or cap disagrees with the chart is ignored
//! with a notice and rewritten after re-solving.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::fedosov::{ChartData, FedosovError, FedosovState};
use crate::weyl::parse_weyl;

pub const HEADER: &str = "fedosov-cache v1";

pub fn chart_hash(chart: &ChartData) -> String {
    hex::encode(Sha256::digest(chart.canonical_string().as_bytes()))
}

pub fn render(st: &FedosovState) -> String {
    format!("{HEADER}\nchart-sha256 {}\ncap {}\nr {}\n", chart_hash(&st.chart), st.cap(), st.r)
}

pub fn store(st: &FedosovState, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render(st))
}

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error(transparent)]
    Fedosov(#[from] FedosovError),
    #[error("cannot write cache {path}: {source}")]
    Write { path: std::path::PathBuf, source: std::io::Error },
}

/// Why a cache file was not used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stale {
    Missing,
    Version(String),
    Hash,
    Cap { cached: u32, wanted: u32 },
    Malformed(String),
}

impl std::fmt::Display for Stale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stale::Missing => write!(f, "no cache file"),
            Stale::Version(v) => write!(f, "cache version {v:?} is not {HEADER:?}"),
            Stale::Hash => write!(f, "chart hash differs from the cached chart"),
            Stale::Cap { cached, wanted } => write!(f, "cached cap {cached} differs from cap {wanted}"),
            Stale::Malformed(m) => write!(f, "malformed cache: {m}"),
        }
    }
}

/// Parse a cache for `chart`, returning the cached `r` when it is current.
pub fn read(chart: &ChartData, text: &str) -> Result<crate::weyl::WeylElement, Stale> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != HEADER {
        return Err(Stale::Version(header.to_string()));
    }
    let mut field = |key: &str| {
        lines
            .next()
            .and_then(|l| l.strip_prefix(key))
            .and_then(|l| l.strip_prefix(' '))
            .ok_or_else(|| Stale::Malformed(format!("expected `{key}` line")))
    };
    let hash = field("chart-sha256")?;
    let cap: u32 = field("cap")?.parse().map_err(|_| Stale::Malformed("cap is not an integer".into()))?;
    let r = field("r")?;
    if cap != chart.cap {
        return Err(Stale::Cap { cached: cap, wanted: chart.cap });
    }
    if hash != chart_hash(chart) {
        return Err(Stale::Hash);
    }
    parse_weyl(r, chart.dim, chart.cap).map_err(|e| Stale::Malformed(e.to_string()))
}

/// Load `path` if current, otherwise solve and rewrite it. The second value is
/// the invalidation notice, if any.
pub fn load_or_solve(chart: ChartData, path: &Path) -> Result<(FedosovState, Option<Stale>), CacheError> {
    let cached = match std::fs::read_to_string(path) {
        Ok(text) => read(&chart, &text),
        Err(_) => Err(Stale::Missing),
    };
    match cached {
        Ok(r) => Ok((FedosovState::from_cached_r(chart, r)?, None)),
        Err(why) => {
            let st = FedosovState::new(chart)?;
            store(&st, path).map_err(|source| CacheError::Write { path: path.to_path_buf(), source })?;
            Ok((st, Some(why)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_invalidation() {
        let st = FedosovState::new(ChartData::flat(2, 4)).unwrap();
        let text = render(&st);
        assert_eq!(read(&st.chart, &text).unwrap(), st.r);
        assert_eq!(read(&ChartData::flat(2, 6), &text), Err(Stale::Cap { cached: 4, wanted: 6 }));
        let mut c = ChartData::flat(2, 4);
        c.gamma[0][0][0] = crate::scalar::Scalar::one();
        assert_eq!(read(&c, &text), Err(Stale::Hash));
        assert!(matches!(read(&st.chart, "fedosov-cache v0\n"), Err(Stale::Version(_))));
    }
}
