//! The JSON run configuration shared by every command.
//!
//! Relative paths inside a config resolve against the config file's
//! directory.

use crate::CliError;
use serde::{Deserialize, Serialize};
use sphere_edgelab_core::geometry::{EulerAngles, Rotation};
use sphere_edgelab_core::region::{GraphRegion, RegionSpec};
use sphere_edgelab_core::wavelet::{default_window, WaveletSpec, WindowKappa};
use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub wavelet: WaveletConfig,
    #[serde(default)]
    pub region: RegionConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub study: StudyConfig,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveletConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N", default = "default_n_list")]
    pub n: NList,
    /// Two-column `t,kappa` CSV; the built-in window when absent.
    #[serde(default)]
    pub window: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NList {
    One(usize),
    Many(Vec<usize>),
}

impl NList {
    pub fn values(&self) -> Vec<usize> {
        match self {
            NList::One(n) => vec![*n],
            NList::Many(v) => v.clone(),
        }
    }
}

fn default_n_list() -> NList {
    NList::Many(vec![32, 64, 128])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum RegionConfig {
    /// A [`RegionSpec`] JSON file.
    Spec { spec: PathBuf },
    Cap { cap: CapConfig },
    /// `"example"` selects the built-in test region.
    Builtin { builtin: String },
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig::Builtin { builtin: "example".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapConfig {
    /// Euler angles `(α, β, γ)` of the rotation taking `e3` to the centre.
    pub center: [f64; 3],
    pub phi0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "M")]
    pub m: usize,
    pub gamma: Vec<f64>,
    /// Degree of the signal expansion; `2 max N` when absent.
    #[serde(rename = "L", default)]
    pub l: Option<usize>,
    /// Exactness degree of the Gauss-Legendre grid the indicator is sampled on.
    pub quadrature_degree: usize,
    pub coefficients: CoefficientSource,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { m: 200, gamma: vec![0.0, PI / 2.0], l: None, quadrature_degree: 512, coefficients: CoefficientSource::Sampled }
    }
}

/// How the indicator's harmonic coefficients are obtained for `edge-map`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientSource {
    /// Forward transform of the indicator sampled on the quadrature grid.
    Sampled,
    /// Closed form for caps, band integrals for graph regions.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Normal offsets `N d`, positive inside.
    pub nd: Vec<f64>,
    pub delta_gamma: Vec<f64>,
    /// Boundary points per study.
    pub points: usize,
    /// `d_δ / r` for the area-difference fit.
    pub radius_divisors: Vec<f64>,
    pub peak_quantile: f64,
    pub local_max: bool,
    pub gamma_steps: usize,
    pub chi_points: usize,
    pub theta_samples: usize,
    /// Largest `|N d|` of the decay profile.
    pub decay_extent: f64,
    /// Maximal `N · sup residual` spread accepted by `cap-verify`.
    pub max_scaled_spread: f64,
    /// Peak statistics are computed only when set.
    pub peaks: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            nd: vec![0.0, 1.0, 2.0, 4.0, -1.0, -2.0, -4.0],
            delta_gamma: vec![0.0, PI / 4.0, PI / 2.0],
            points: 4,
            radius_divisors: vec![4.0, 8.0, 16.0, 32.0],
            peak_quantile: 0.99,
            local_max: false,
            gamma_steps: 32,
            chi_points: 1000,
            theta_samples: 2001,
            decay_extent: 20.0,
            max_scaled_spread: 3.0,
            peaks: true,
        }
    }
}

/// A parsed configuration with its paths resolved and its objects built.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub base: PathBuf,
    pub window: Arc<WindowKappa>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Resolved, CliError> {
        let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.resolve(base)
    }

    pub fn resolve(self, base: PathBuf) -> Result<Resolved, CliError> {
        self.validate()?;
        let window = match &self.wavelet.window {
            Some(p) => {
                let p = base.join(p);
                let f = File::open(&p).map_err(|e| CliError::Config(format!("window {}: {e}", p.display())))?;
                Arc::new(WindowKappa::from_csv(BufReader::new(f))?)
            }
            None => default_window(),
        };
        if let RegionConfig::Spec { spec } = &self.region {
            let p = base.join(spec);
            if !p.is_file() {
                return Err(CliError::Config(format!("region spec {} does not exist", p.display())));
            }
        }
        Ok(Resolved { config: self, base, window })
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let ns = self.wavelet.n.values();
        if self.wavelet.k == 0 {
            return bad("wavelet.K must be at least 1".into());
        }
        if ns.is_empty() || ns.contains(&0) {
            return bad(format!("wavelet.N must be a nonempty list of positive integers, got {ns:?}"));
        }
        let g = &self.grid;
        if g.m < 2 {
            return bad(format!("grid.M = {} must be at least 2", g.m));
        }
        if g.gamma.is_empty() || g.gamma.iter().any(|v| !v.is_finite()) {
            return bad("grid.gamma must be a nonempty list of finite angles".into());
        }
        let nmax = ns.iter().copied().max().unwrap_or(0);
        if let Some(l) = g.l {
            if l < 2 * nmax {
                return bad(format!("grid.L = {l} is below the wavelet degree 2N = {}", 2 * nmax));
            }
            if g.coefficients == CoefficientSource::Sampled && g.quadrature_degree < l {
                return bad(format!("grid.quadrature_degree = {} is below grid.L = {l}", g.quadrature_degree));
            }
        }
        let s = &self.study;
        if s.points == 0 || s.chi_points == 0 || s.theta_samples < 2 || s.gamma_steps < 3 {
            return bad("study counts must be positive (theta_samples ≥ 2, gamma_steps ≥ 3)".into());
        }
        if !(0.0..=1.0).contains(&s.peak_quantile) {
            return bad(format!("study.peak_quantile = {} not in [0, 1]", s.peak_quantile));
        }
        if s.radius_divisors.iter().any(|&d| d <= 2.0) {
            return bad("study.radius_divisors must exceed 2 so that r < d_δ/2".into());
        }
        if let RegionConfig::Builtin { builtin } = &self.region {
            if builtin != "example" {
                return bad(format!("unknown built-in region {builtin:?}"));
            }
        }
        if let RegionConfig::Cap { cap } = &self.region {
            if !(cap.phi0 > 0.0 && cap.phi0 < PI) {
                return bad(format!("cap.phi0 = {} not in (0, π)", cap.phi0));
            }
        }
        Ok(())
    }
}

impl Resolved {
    pub fn n_list(&self) -> Vec<usize> {
        self.config.wavelet.n.values()
    }

    pub fn specs(&self) -> Result<Vec<WaveletSpec>, CliError> {
        let k = self.config.wavelet.k;
        Ok(self.n_list().into_iter().map(|n| WaveletSpec::with_window(k, n, self.window.clone())).collect::<Result<_, _>>()?)
    }

    /// Degree of the signal expansion.
    pub fn lmax(&self) -> usize {
        let nmax = self.n_list().into_iter().max().unwrap_or(1);
        self.config.grid.l.unwrap_or(2 * nmax)
    }

    pub fn region(&self) -> Result<GraphRegion, CliError> {
        match &self.config.region {
            RegionConfig::Builtin { .. } => Ok(GraphRegion::example()),
            RegionConfig::Cap { cap } => {
                let [a, b, c] = cap.center;
                Ok(GraphRegion::cap(Rotation::from_euler(EulerAngles::new(a, b, c)), cap.phi0)?)
            }
            RegionConfig::Spec { spec } => {
                let p = self.base.join(spec);
                let f = File::open(&p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                let spec: RegionSpec = serde_json::from_reader(BufReader::new(f))
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Ok(GraphRegion::from_spec(&spec)?)
            }
        }
    }

    pub fn is_cap(&self) -> bool {
        matches!(self.config.region, RegionConfig::Cap { .. })
    }
}
