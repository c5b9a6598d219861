//! On-disk cache of Gauss-Legendre rules, enabled by `SPHERE_EDGELAB_CACHE`.
//!
//! Entries are JSON arrays; `serde_json` writes shortest round-trip decimals,
//! so a cached rule is bit-identical to a freshly computed one.

use serde::{Deserialize, Serialize};
use sphere_edgelab_core::quad::GaussLegendre;
use sphere_edgelab_core::sh::QuadratureGrid;
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "SPHERE_EDGELAB_CACHE";

#[derive(Serialize, Deserialize)]
struct Entry {
    m: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn entry_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("gauss-legendre-{m}.json"))
}

fn load(dir: &Path, m: usize) -> Option<GaussLegendre> {
    let bytes = std::fs::read(entry_path(dir, m)).ok()?;
    let e: Entry = serde_json::from_slice(&bytes).ok()?;
    (e.m == m && e.nodes.len() == m && e.weights.len() == m).then_some(GaussLegendre { nodes: e.nodes, weights: e.weights })
}

/// The `m`-point rule, read from or written to `dir` when given. Cache
/// failures fall back to computing the rule.
pub fn gauss_legendre(dir: Option<&Path>, m: usize) -> GaussLegendre {
    let Some(dir) = dir else {
        return GaussLegendre::new(m);
    };
    if let Some(rule) = load(dir, m) {
        return rule;
    }
    let rule = GaussLegendre::new(m);
    let entry = Entry { m, nodes: rule.nodes.clone(), weights: rule.weights.clone() };
    if std::fs::create_dir_all(dir).is_ok() {
        if let Ok(s) = serde_json::to_vec(&entry) {
            // write then rename so concurrent runs never read a partial file
            let tmp = dir.join(format!(".gauss-legendre-{m}.{}.tmp", std::process::id()));
            if std::fs::write(&tmp, s).is_ok() {
                let _ = std::fs::rename(&tmp, entry_path(dir, m));
            }
        }
    }
    rule
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn quadrature_grid(degree: usize) -> QuadratureGrid {
    QuadratureGrid::from_rule(degree, gauss_legendre(cache_dir().as_deref(), degree / 2 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cached_rule_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let fresh = gauss_legendre(Some(dir.path()), 37);
        assert!(entry_path(dir.path(), 37).is_file());
        let again = gauss_legendre(Some(dir.path()), 37);
        assert_eq!(fresh, again);
        assert_eq!(fresh, GaussLegendre::new(37));
    }

    #[test]
    fn corrupt_entries_are_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(entry_path(dir.path(), 5), b"not json").unwrap();
        assert_eq!(gauss_legendre(Some(dir.path()), 5), GaussLegendre::new(5));
    }
}
