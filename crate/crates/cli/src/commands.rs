//! The six commands. Each computes in parallel, then writes its files from
//! one thread in a fixed order.

use crate::cache::quadrature_grid;
use crate::config::{CoefficientSource, Resolved};
use crate::CliError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sphere_edgelab_core::edge::{
    coefficient_map, decay_profile, interval_estimate, peak_extract, residual_study, Neighbourhood, PeakOptions,
    ResidualReport, StudyFrame,
};
use sphere_edgelab_core::geometry::{geodesic_distance, Cap, SpherePoint};
use sphere_edgelab_core::io::{create_writer, write_json, write_pgm16, write_table, Rescale};
use sphere_edgelab_core::map::{magnitude_quantile, CoefficientMap};
use sphere_edgelab_core::region::{
    boundary_curve, cap_area_difference, cap_harmonic_coeffs, graph_region_coeffs, region_harmonic_coeffs_on,
    select_segment, tangency_residuals, BoundaryCurve, GraphRegion,
};
use sphere_edgelab_core::sh::io::write_coeffs_csv;
use sphere_edgelab_core::sh::HarmonicCoeffs;
use sphere_edgelab_core::wavelet::{
    chi, fit_slope, localization_profile, wavelet_coeffs, wavelet_synthesize, WaveletSpec,
};
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Boundary samples used for arc-length tables.
const CURVE_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SynthWavelet,
    Chi,
    CapVerify,
    CurveVerify,
    EdgeMap,
    Residuals,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SynthWavelet => "synth-wavelet",
            Command::Chi => "chi",
            Command::CapVerify => "cap-verify",
            Command::CurveVerify => "curve-verify",
            Command::EdgeMap => "edge-map",
            Command::Residuals => "residuals",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: u64,
}

/// What a command produced. `passed` is false when a built-in acceptance
/// check failed; the files are written either way.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    pub summary: Value,
}

struct Emitter {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn with<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let path = self.dir.join(name);
        let mut w = create_writer(&path)?;
        f(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn table(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
        self.with(name, |w| Ok(write_table(w, header, rows)?))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }

    fn pgm(&mut self, name: &str, values: &[f64], width: usize, height: usize) -> Result<Rescale, CliError> {
        let mut rescale = None;
        self.with(name, |w| {
            rescale = Some(write_pgm16(values, width, height, w)?);
            Ok(())
        })?;
        Ok(rescale.expect("written"))
    }

    fn finish(self, passed: bool, summary: Value) -> Outcome {
        Outcome { files: self.files, passed, summary }
    }
}

pub fn run(command: Command, cfg: &Resolved, opts: &RunOptions) -> Result<Outcome, CliError> {
    let mut em = Emitter::new(&opts.out)?;
    em.json(
        "run.json",
        &json!({
            "command": command.name(),
            "seed": opts.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg.config,
        }),
    )?;
    let (passed, summary) = match command {
        Command::SynthWavelet => synth_wavelet(cfg, &mut em)?,
        Command::Chi => chi_table(cfg, &mut em)?,
        Command::CapVerify => cap_verify(cfg, &mut em)?,
        Command::CurveVerify => curve_verify(cfg, &mut em)?,
        Command::EdgeMap => edge_map(cfg, &mut em)?,
        Command::Residuals => residuals(cfg, opts.seed, &mut em)?,
    };
    em.json(&format!("{}.json", command.name().replace('-', "_")), &summary)?;
    Ok(em.finish(passed, summary))
}

fn tag(k: usize, n: usize) -> String {
    format!("K{k}_N{n}")
}

fn synth_wavelet(cfg: &Resolved, em: &mut Emitter) -> Result<(bool, Value), CliError> {
    let m = cfg.config.grid.m;
    let study = &cfg.config.study;
    let thetas: Vec<f64> = (0..m).map(|l| (l as f64 + 0.5) * PI / m as f64).collect();
    let phis: Vec<f64> = (0..2 * m).map(|j| j as f64 * PI / m as f64).collect();
    let points: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| phis.iter().map(move |&p| (t, p))).collect();
    let profile_thetas: Vec<f64> =
        (0..study.theta_samples).map(|i| PI * i as f64 / (study.theta_samples - 1) as f64).collect();
    let mut rows = Vec::new();
    for spec in cfg.specs()? {
        let name = tag(spec.k, spec.n);
        let vals = wavelet_synthesize(&spec, &points)?;
        em.with(&format!("wavelet_{name}.csv"), |w| {
            let rows = points.iter().zip(&vals).enumerate().map(|(i, ((t, p), v))| {
                vec![(i % (2 * m)) as f64, (i / (2 * m)) as f64, *t, *p, v.re, v.im]
            });
            Ok(write_table(w, &["j", "l", "theta", "phi", "re", "im"], rows)?)
        })?;
        let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
        let rescale = em.pgm(&format!("wavelet_{name}.pgm"), &re, 2 * m, m)?;
        em.json(
            &format!("wavelet_{name}.pgm.json"),
            &json!({
                "width": 2 * m, "height": m, "K": spec.k, "N": spec.n,
                "theta": "(l + 1/2) π / M down the rows", "phi": "j π / M along the rows",
                "value": "real part", "rescale": rescale,
            }),
        )?;
        let coeffs = wavelet_coeffs(&spec, spec.lmax())?;
        em.with(&format!("wavelet_{name}_coeffs.csv"), |w| Ok(write_coeffs_csv(&coeffs, w)?))?;
        let loc = localization_profile(&spec, &profile_thetas)?;
        em.table(
            &format!("localization_{name}.csv"),
            &["theta", "max_abs_over_n2"],
            loc.thetas.iter().zip(&loc.profile).map(|(t, p)| vec![*t, *p]),
        )?;
        let (ratio, axis) = anisotropy(&spec)?;
        rows.push(json!({
            "N": spec.n, "tail_slope": loc.tail_slope, "weighted_sup": loc.weighted_sup,
            "peak_theta": loc.peak_theta, "anisotropy": ratio, "major_axis_phi": axis,
        }));
    }
    Ok((true, json!({ "K": cfg.config.wavelet.k, "wavelets": rows })))
}

/// Shape of the main lobe of `Re Ψ`, the connected half-maximum superlevel
/// set around its maximum on a `121 × 121` azimuthal-equidistant grid of
/// half-width `8/N` about the pole: the ratio of its principal standard
/// deviations and the azimuth of its major axis.
fn anisotropy(spec: &WaveletSpec) -> Result<(f64, f64), CliError> {
    let (h, g) = (8.0 / spec.n as f64, 121);
    let plane: Vec<(f64, f64)> = (0..g * g)
        .map(|i| (-h + 2.0 * h * (i / g) as f64 / (g - 1) as f64, -h + 2.0 * h * (i % g) as f64 / (g - 1) as f64))
        .collect();
    let polar: Vec<(f64, f64)> = plane.iter().map(|&(x, y)| (x.hypot(y), y.atan2(x))).collect();
    let re: Vec<f64> = wavelet_synthesize(spec, &polar)?.iter().map(|v| v.re).collect();
    let top = re.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let start = re.iter().position(|&v| v == top).expect("nonempty grid");
    let mut seen = vec![false; g * g];
    let mut stack = vec![start];
    seen[start] = true;
    let mut set = Vec::new();
    while let Some(i) = stack.pop() {
        set.push(plane[i]);
        let (r, c) = (i / g, i % g);
        let near = [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)];
        for (rr, cc) in near {
            if rr < g && cc < g && !seen[rr * g + cc] && re[rr * g + cc] >= 0.5 * top {
                seen[rr * g + cc] = true;
                stack.push(rr * g + cc);
            }
        }
    }
    let count = set.len() as f64;
    let (cx, cy) = set.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / count, b + p.1 / count));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in &set {
        let (dx, dy) = (x - cx, y - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let mean = 0.5 * (sxx + syy);
    let dev = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let ratio = if mean > dev { ((mean + dev) / (mean - dev)).sqrt() } else { f64::INFINITY };
    Ok((ratio, 0.5 * (2.0 * sxy).atan2(sxx - syy)))
}

fn chi_table(cfg: &Resolved, em: &mut Emitter) -> Result<(bool, Value), CliError> {
    let kmax = cfg.config.wavelet.k;
    let count = cfg.config.study.chi_points;
    let gammas: Vec<f64> = (0..count).map(|i| TAU * i as f64 / count as f64).collect();
    let header: Vec<String> = std::iter::once("gamma".to_string()).chain((1..=kmax).map(|k| format!("chi_{k}"))).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    em.table("chi.csv", &header, gammas.iter().map(|&g| std::iter::once(g).chain((1..=kmax).map(|k| chi(k, g))).collect()))?;

    let one = gammas.iter().map(|&g| (chi(1, g) - 1.0).abs()).fold(0.0, f64::max);
    let two = gammas.iter().map(|&g| (chi(2, g) - 2f64.sqrt() * g.cos()).abs()).fold(0.0, f64::max);
    let parity = (1..=kmax.max(16))
        .flat_map(|k| {
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            gammas.iter().map(move |&g| (chi(k, g + PI) - s * chi(k, g)).abs())
        })
        .fold(0.0, f64::max);
    let passed = one <= 1e-12 && two <= 1e-12 && parity <= 1e-12;
    Ok((passed, json!({ "points": count, "chi1_error": one, "chi2_error": two, "parity_error": parity })))
}

fn residual_rows(report: &ResidualReport) -> Vec<Vec<f64>> {
    report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n as f64,
                r.sup_residual,
                r.scaled_residual,
                r.sup_cap_difference,
                r.frames_used as f64,
                r.frames_excluded as f64,
                r.asymptotic as u8 as f64,
            ]
        })
        .collect()
}

const RESIDUAL_HEADER: [&str; 7] =
    ["n", "sup_residual", "scaled_residual", "sup_cap_difference", "frames_used", "frames_excluded", "asymptotic"];

fn frames(ts: &[f64], cfg: &Resolved) -> Vec<StudyFrame> {
    let s = &cfg.config.study;
    ts.iter()
        .flat_map(|&t| s.nd.iter().flat_map(move |&nd| s.delta_gamma.iter().map(move |&dg| StudyFrame { t, nd, delta_gamma: dg })))
        .collect()
}

fn cap_verify(cfg: &Resolved, em: &mut Emitter) -> Result<(bool, Value), CliError> {
    if !cfg.is_cap() {
        return Err(CliError::Config("cap-verify needs a cap region".into()));
    }
    let region = cfg.region()?;
    let phi0 = region.coeffs().a0;
    let curve = boundary_curve(&region, 512)?;
    let centre = region.frame().apply(&SpherePoint::north());
    let specs = cfg.specs()?;
    let lmax = specs.iter().map(|s| s.lmax()).max().unwrap_or(0);
    let coeffs = cap_harmonic_coeffs(&Cap::new(centre, phi0)?, lmax);
    let count = cfg.config.study.points;
    let ts: Vec<f64> = (0..count).map(|i| curve.length() * i as f64 / count as f64).collect();
    let hood = Neighbourhood { phi_star: phi0.min(PI - phi0), segment: None };
    let report = residual_study(&curve, &coeffs, &specs, &frames(&ts, cfg), &hood)?;
    em.table("cap_residuals.csv", &RESIDUAL_HEADER, residual_rows(&report))?;
    let spread = report.scaled_spread();
    let limit = cfg.config.study.max_scaled_spread;
    let passed = spread.is_finite() && spread <= limit;
    Ok((passed, json!({ "phi0": phi0, "report": report, "scaled_spread": spread, "limit": limit })))
}

fn curve_verify(cfg: &Resolved, em: &mut Emitter) -> Result<(bool, Value), CliError> {
    let region = cfg.region()?;
    let curve = boundary_curve(&region, CURVE_SAMPLES)?;
    em.with("curve.csv", |w| Ok(curve.write_csv(CURVE_SAMPLES, w)?))?;
    let len = curve.length();

    let tangency: Vec<(f64, [f64; 3])> =
        (0..32).map(|i| len * i as f64 / 32.0).map(|t| Ok((t, tangency_residuals(&curve, t)?))).collect::<Result<_, CliError>>()?;
    em.table("osculating.csv", &["t", "position", "tangent", "second_derivative"], tangency.iter().map(|(t, r)| vec![*t, r[0], r[1], r[2]]))?;
    let tangency_max = tangency.iter().flat_map(|(_, r)| r.iter().copied()).fold(0.0, f64::max);

    let min_curvature = curve.table(CURVE_SAMPLES).iter().map(|p| p.curvature()).fold(f64::INFINITY, f64::min);

    let seg = select_segment(&curve, 64)?;
    let p = steepest_curvature_point(&curve, seg.inner());
    let radii: Vec<f64> = cfg.config.study.radius_divisors.iter().map(|d| seg.d_delta / d).collect();
    let areas: Vec<f64> = radii.iter().map(|&r| cap_area_difference(&curve, &seg, p, 0.0, r)).collect::<Result<_, _>>()?;
    em.table("area_difference.csv", &["r", "area"], radii.iter().zip(&areas).map(|(r, a)| vec![*r, *a]))?;
    let logs: (Vec<f64>, Vec<f64>) = radii.iter().zip(&areas).filter(|(_, a)| **a > 0.0).map(|(r, a)| (r.ln(), a.ln())).unzip();
    let slope = if logs.0.len() == radii.len() { fit_slope(&logs.0, &logs.1) } else { f64::NAN };

    let (latitude_error, lower_bound_ok) = latitude_check();
    let passed = tangency_max <= 1e-6
        && min_curvature >= 1.0 - 1e-9
        && (3.5..=4.5).contains(&slope)
        && latitude_error <= 1e-12
        && lower_bound_ok;
    Ok((
        passed,
        json!({
            "length": len, "min_curvature": min_curvature, "tangency_max": tangency_max,
            "segment": seg, "p": p, "area_slope": slope, "latitude_error": latitude_error,
            "latitude_lower_bound_ok": lower_bound_ok,
        }),
    ))
}

/// The point of `[lo, hi]` where the geodesic curvature changes fastest,
/// which makes the quartic area term largest.
pub fn steepest_curvature_point(curve: &BoundaryCurve, (lo, hi): (f64, f64)) -> f64 {
    (0..200)
        .map(|i| lo + (hi - lo) * i as f64 / 199.0)
        .map(|t| (t, curve.eval(t).geodesic_curvature_rate().abs()))
        .fold((lo, -1.0), |best, c| if c.1 > best.1 { c } else { best })
        .0
}

/// Same-latitude distance `arccos(1 + (cos Δφ − 1) sin²θ)` against the
/// geodesic distance on a 50 × 50 grid, and the lower bound
/// `√(1 − Δφ²/12) |Δφ| sin θ` beneath it.
fn latitude_check() -> (f64, bool) {
    let mut err = 0.0f64;
    let mut ok = true;
    for i in 0..50 {
        let theta = PI * (i as f64 + 0.5) / 50.0;
        for j in 0..50 {
            let dphi = -PI + TAU * (j as f64 + 0.5) / 50.0;
            let d = geodesic_distance(&SpherePoint::from_polar(theta, 0.0), &SpherePoint::from_polar(theta, dphi));
            let formula = (1.0 + (dphi.cos() - 1.0) * theta.sin().powi(2)).clamp(-1.0, 1.0).acos();
            err = err.max((formula - d).abs());
            ok &= (1.0 - dphi * dphi / 12.0).max(0.0).sqrt() * dphi.abs() * theta.sin() <= d + 1e-12;
        }
    }
    (err, ok)
}

fn signal_coeffs(cfg: &Resolved, region: &GraphRegion) -> Result<(HarmonicCoeffs, Value), CliError> {
    let lmax = cfg.lmax();
    let grid = &cfg.config.grid;
    Ok(match grid.coefficients {
        CoefficientSource::Sampled => {
            let rc = region_harmonic_coeffs_on(region, lmax, &quadrature_grid(grid.quadrature_degree))?;
            let meta = json!({ "source": "sampled", "L": lmax, "grid_degree": rc.grid_degree, "noise_level": rc.noise_level });
            (rc.coeffs, meta)
        }
        CoefficientSource::Exact => (graph_region_coeffs(region, lmax), json!({ "source": "exact", "L": lmax })),
    })
}

fn edge_map(cfg: &Resolved, em: &mut Emitter) -> Result<(bool, Value), CliError> {
    let region = cfg.region()?;
    em.json("region.json", &region.to_spec())?;
    let (coeffs, source) = signal_coeffs(cfg, &region)?;
    let study = &cfg.config.study;
    let truth = if study.peaks { Some(boundary_curve(&region, CURVE_SAMPLES)?) } else { None };
    let opts = PeakOptions { quantile: study.peak_quantile, local_max: study.local_max, gamma_steps: study.gamma_steps };
    let m = cfg.config.grid.m;
    let mut maps = Vec::new();
    for spec in cfg.specs()? {
        for (gi, &gamma) in cfg.config.grid.gamma.iter().enumerate() {
            let map = coefficient_map(&coeffs, &spec, m, gamma)?;
            let name = format!("{}_g{gi}", tag(spec.k, spec.n));
            em.with(&format!("map_{name}.csv"), |w| Ok(map.write_csv(w)?))?;
            let rescale = em.pgm(&format!("map_{name}.pgm"), &map.values, map.width(), map.height())?;
            em.json(&format!("map_{name}.json"), &sphere_edgelab_core::map::MapMeta { rescale: Some(rescale), ..map.meta() })?;
            em.with(&format!("sorted_{name}.csv"), |w| Ok(map.write_sorted_csv(w)?))?;
            let mut entry = json!({
                "N": spec.n, "gamma": gamma, "imag_max": map.imag_max,
                "p99_over_median": magnitude_quantile(&map.values, 0.99) / magnitude_quantile(&map.values, 0.5),
            });
            if let Some(curve) = &truth {
                let stats = write_peaks(em, &name, &map, &coeffs, &spec, &opts, curve)?;
                entry["peaks"] = stats;
            }
            maps.push(entry);
        }
    }
    Ok((true, json!({ "K": cfg.config.wavelet.k, "M": m, "coefficients": source, "maps": maps })))
}

fn write_peaks(
    em: &mut Emitter,
    name: &str,
    map: &CoefficientMap,
    coeffs: &HarmonicCoeffs,
    spec: &WaveletSpec,
    opts: &PeakOptions,
    curve: &BoundaryCurve,
) -> Result<Value, CliError> {
    let peaks = peak_extract(map, coeffs, spec, opts, Some(curve))?;
    let header =
        ["alpha", "beta", "x", "y", "z", "magnitude", "gamma", "tx", "ty", "tz", "d_to_truth", "orientation_error"];
    em.table(
        &format!("peaks_{name}.csv"),
        &header,
        peaks.iter().map(|p| {
            vec![
                p.alpha,
                p.beta,
                p.x[0],
                p.x[1],
                p.x[2],
                p.magnitude,
                p.gamma,
                p.tangent[0],
                p.tangent[1],
                p.tangent[2],
                p.d_to_truth.unwrap_or(f64::NAN),
                p.orientation_error.unwrap_or(f64::NAN),
            ]
        }),
    )?;
    let total = peaks.len().max(1) as f64;
    let radius = 3.0 * PI / spec.n as f64;
    let near = peaks.iter().filter(|p| p.d_to_truth.is_some_and(|d| d <= radius)).count();
    let oriented = peaks.iter().filter(|p| p.orientation_error.is_some_and(|e| e <= PI / 8.0)).count();
    Ok(json!({
        "count": peaks.len(), "near_radius": radius,
        "near_fraction": near as f64 / total, "oriented_fraction": oriented as f64 / total,
    }))
}

fn residuals(cfg: &Resolved, seed: u64, em: &mut Emitter) -> Result<(bool, Value), CliError> {
    let region = cfg.region()?;
    let curve = boundary_curve(&region, CURVE_SAMPLES)?;
    let specs = cfg.specs()?;
    let lmax = specs.iter().map(|s| s.lmax()).max().unwrap_or(0);
    let coeffs = graph_region_coeffs(&region, lmax);
    let seg = select_segment(&curve, 64)?;
    let (lo, hi) = seg.inner();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ts: Vec<f64> = (0..cfg.config.study.points).map(|_| rng.random_range(lo..hi)).collect();
    ts.sort_by(f64::total_cmp);
    let hood = Neighbourhood { phi_star: seg.phi_star, segment: Some(seg.clone()) };
    let report = residual_study(&curve, &coeffs, &specs, &frames(&ts, cfg), &hood)?;
    em.table("residuals.csv", &RESIDUAL_HEADER, residual_rows(&report))?;

    let extent = cfg.config.study.decay_extent;
    let steps = (4.0 * extent).round() as usize;
    let nds: Vec<f64> = (0..=2 * steps).map(|i| -extent + i as f64 * extent / steps as f64).collect();
    let p = 0.5 * (lo + hi);
    let mut decay = Vec::new();
    for spec in &specs {
        let prof = decay_profile(&curve, &coeffs, spec, p, &nds)?;
        em.table(&format!("decay_{}.csv", tag(spec.k, spec.n)), &["nd", "magnitude"], prof.rows.iter().map(|&(u, w)| vec![u, w]))?;
        decay.push(json!({ "N": spec.n, "tail_exponent": prof.tail_exponent, "interval": interval_estimate(spec)? }));
    }
    Ok((true, json!({ "seed": seed, "segment": seg, "points": ts, "p": p, "report": report, "decay": decay })))
}
