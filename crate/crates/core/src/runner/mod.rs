//! Scenario layer: turns a [`ScenarioConfig`] into correlation curves,
//! cross-checks methods against each other and extracts death/revival features.

pub mod config;
pub mod csv;
pub mod features;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{Method, NoiseKind, ScenarioConfig, DEFAULT_THRESHOLD, PRESETS};
pub use csv::{emit_csv, parse_csv, write_csv, CsvRow, CSV_HEADER};
pub use features::{extract_features, intervals_before, intervals_overlap_pairwise, CurveFeatures};

use crate::error::{Error, Result};
use crate::evolver::{
    average_rtn_mc, average_static_mc_grid, average_static_quadrature, closed_form_rtn, closed_form_static,
    in_pool, HamiltonianSpec, McSettings, Topology,
};
use crate::matcore::DensityMatrix;
use crate::noisegen::{RtnSpec, StaticNoiseSpec};
use crate::qcorr::{correlation_report, CorrelationReport, OptimizerSettings};

/// Where a curve came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub method: Method,
    pub topology: Topology,
    pub noise: NoiseKind,
    pub nu: f64,
    pub gamma: Option<f64>,
    pub c0: Option<f64>,
    pub delta_c: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub nodes: Option<usize>,
}

/// Correlations along a time grid; `times` are `nu * t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub times: Vec<f64>,
    pub reports: Vec<CorrelationReport>,
    pub states: Vec<DensityMatrix>,
    pub provenance: Provenance,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn negativity(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.negativity).collect()
    }

    pub fn discord(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.discord).collect()
    }
}

fn hamiltonian(cfg: &ScenarioConfig) -> Result<HamiltonianSpec> {
    HamiltonianSpec::new(cfg.epsilon, cfg.nu)
}

/// Evaluates `f` at every grid time in parallel; the first failure in grid order wins.
fn per_time<T, F>(cfg: &ScenarioConfig, nts: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, f64) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = in_pool(cfg.workers, || {
        nts.par_iter()
            .enumerate()
            .map(|(i, &nt)| f(i, nt).map_err(|e| e.at_time(nt)))
            .collect()
    })?;
    results.into_iter().collect()
}

/// Averaged states on the configured grid, unvalidated.
pub fn average_states(cfg: &ScenarioConfig, method: Method, topo: Topology) -> Result<Vec<DensityMatrix>> {
    cfg.validate()?;
    let h = hamiltonian(cfg)?;
    let nts = cfg.times();
    let ts: Vec<f64> = nts.iter().map(|nt| nt / cfg.nu).collect();
    let mc = McSettings {
        samples: cfg.n_samples,
        seed: cfg.seed,
        workers: cfg.workers,
    };
    match cfg.noise {
        NoiseKind::Static => {
            let n = StaticNoiseSpec::new(cfg.c0, cfg.delta_c)?;
            match method {
                Method::ClosedForm => per_time(cfg, &nts, |i, _| closed_form_static(&h, &n, topo, ts[i])),
                Method::Quadrature => {
                    per_time(cfg, &nts, |i, _| average_static_quadrature(&h, &n, topo, ts[i], cfg.quad_nodes))
                }
                Method::Mc => average_static_mc_grid(&h, &n, topo, &ts, &mc),
            }
        }
        NoiseKind::Rtn => {
            let r = RtnSpec::new(cfg.effective_gamma())?;
            match method {
                Method::ClosedForm => per_time(cfg, &nts, |i, _| closed_form_rtn(&h, &r, topo, ts[i])),
                Method::Mc => average_rtn_mc(&h, &r, topo, &ts, &mc),
                Method::Quadrature => Err(Error::Usage("field `method`: quadrature needs static noise".into())),
            }
        }
    }
}

/// One curve for one method and topology. Every state is re-validated as a
/// density matrix before its correlations are computed.
pub fn run_curve(cfg: &ScenarioConfig, method: Method, topo: Topology) -> Result<Curve> {
    let states = average_states(cfg, method, topo)?;
    let nts = cfg.times();
    let opt = OptimizerSettings::default();
    let checked: Vec<(DensityMatrix, CorrelationReport)> = per_time(cfg, &nts, |i, _| {
        let rho = DensityMatrix::new(*states[i].mat())?;
        let report = correlation_report(&rho, &opt)?;
        Ok((rho, report))
    })?;
    let (states, reports) = checked.into_iter().unzip();
    let stochastic = method.is_stochastic();
    let is_static = cfg.noise == NoiseKind::Static;
    Ok(Curve {
        times: nts,
        reports,
        states,
        provenance: Provenance {
            method,
            topology: topo,
            noise: cfg.noise,
            nu: cfg.nu,
            gamma: (!is_static).then(|| cfg.effective_gamma()),
            c0: is_static.then_some(cfg.c0),
            delta_c: is_static.then_some(cfg.delta_c),
            seed: stochastic.then_some(cfg.seed),
            samples: stochastic.then_some(cfg.n_samples),
            nodes: (method == Method::Quadrature).then_some(cfg.quad_nodes),
        },
    })
}

/// Curves for every configured method and topology, methods outermost.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<Curve>> {
    cfg.validate()?;
    let mut curves = Vec::new();
    for &method in &cfg.methods {
        for &topo in &cfg.topologies {
            curves.push(run_curve(cfg, method, topo)?);
        }
    }
    Ok(curves)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Deviation {
    pub max: f64,
    pub mean: f64,
}

impl Deviation {
    fn over(diffs: impl Iterator<Item = f64>) -> Self {
        let (mut max, mut sum, mut n) = (0.0f64, 0.0, 0usize);
        for d in diffs {
            max = max.max(d);
            sum += d;
            n += 1;
        }
        Deviation {
            max,
            mean: if n == 0 { 0.0 } else { sum / n as f64 },
        }
    }
}

/// Deviation of one method from the reference method on one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodDeviation {
    pub topology: Topology,
    pub reference: Method,
    pub method: Method,
    /// Largest entrywise `|rho_a - rho_b|` per time.
    pub entries: Deviation,
    pub negativity: Deviation,
    pub discord: Deviation,
    pub mutual_info: Deviation,
    pub classical: Deviation,
    pub tolerance: f64,
}

impl MethodDeviation {
    pub fn worst(&self) -> f64 {
        [self.entries, self.negativity, self.discord, self.mutual_info, self.classical]
            .iter()
            .map(|d| d.max)
            .fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.worst() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<MethodDeviation>,
}

impl ComparisonReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(MethodDeviation::passes)
    }

    pub fn render(&self) -> String {
        let mut s = String::from(
            "topology,reference,method,quantity,max_abs_dev,mean_abs_dev,tolerance,status\n",
        );
        for r in &self.rows {
            let status = if r.passes() { "pass" } else { "fail" };
            for (name, d) in [
                ("entries", r.entries),
                ("negativity", r.negativity),
                ("discord", r.discord),
                ("mutual_info", r.mutual_info),
                ("classical", r.classical),
            ] {
                let _ = writeln!(
                    s,
                    "{},{},{},{name},{:e},{:e},{:e},{status}",
                    r.topology, r.reference, r.method, d.max, d.mean, r.tolerance
                );
            }
        }
        s
    }
}

/// Default agreement bound for a method pair: sampling error for Monte Carlo,
/// quadrature error otherwise.
pub fn default_tolerance(a: Method, b: Method) -> f64 {
    if a.is_stochastic() || b.is_stochastic() {
        5e-3
    } else {
        1e-9
    }
}

/// Compares each method against the first on every configured topology.
pub fn compare_methods(cfg: &ScenarioConfig, methods: &[Method]) -> Result<ComparisonReport> {
    let mut distinct: Vec<Method> = Vec::new();
    for &m in methods {
        if !distinct.contains(&m) {
            distinct.push(m);
        }
    }
    if distinct.len() < 2 {
        return Err(Error::Usage("compare needs at least two distinct methods".into()));
    }
    let cfg = ScenarioConfig {
        methods: distinct.clone(),
        ..cfg.clone()
    };
    cfg.validate()?;
    let reference = distinct[0];
    let mut rows = Vec::new();
    for &topo in &cfg.topologies {
        let base = run_curve(&cfg, reference, topo)?;
        for &method in &distinct[1..] {
            let other = run_curve(&cfg, method, topo)?;
            let pairs = || base.reports.iter().zip(&other.reports);
            rows.push(MethodDeviation {
                topology: topo,
                reference,
                method,
                entries: Deviation::over(base.states.iter().zip(&other.states).map(|(a, b)| a.mat().max_abs_diff(b.mat()))),
                negativity: Deviation::over(pairs().map(|(a, b)| (a.negativity - b.negativity).abs())),
                discord: Deviation::over(pairs().map(|(a, b)| (a.discord - b.discord).abs())),
                mutual_info: Deviation::over(pairs().map(|(a, b)| (a.mutual_info - b.mutual_info).abs())),
                classical: Deviation::over(pairs().map(|(a, b)| (a.classical - b.classical).abs())),
                tolerance: cfg.tolerance.unwrap_or_else(|| default_tolerance(reference, method)),
            });
        }
    }
    Ok(ComparisonReport { rows })
}

/// Death/revival features of both tracked measures.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFeatures {
    pub negativity: CurveFeatures,
    pub discord: CurveFeatures,
}

pub fn curve_features(curve: &Curve, threshold: f64) -> MeasureFeatures {
    MeasureFeatures {
        negativity: extract_features(&curve.times, &curve.negativity(), threshold),
        discord: extract_features(&curve.times, &curve.discord(), threshold),
    }
}

/// Header of the features table written by [`render_features`].
pub const FEATURES_HEADER: &str = "method,topology,noise,measure,kind,nt,value";

/// One row per death (`value` = threshold) and per revival peak.
pub fn render_features(
    rows: &[((Method, Topology, NoiseKind), MeasureFeatures)],
    threshold: f64,
) -> String {
    let mut s = format!("{FEATURES_HEADER}\n");
    for ((method, topo, noise), f) in rows {
        for (measure, cf) in [("negativity", &f.negativity), ("discord", &f.discord)] {
            for d in &cf.death_times {
                let _ = writeln!(s, "{method},{topo},{noise},{measure},death,{d},{threshold}");
            }
            for (t, v) in &cf.revival_peaks {
                let _ = writeln!(s, "{method},{topo},{noise},{measure},revival,{t},{v}");
            }
        }
    }
    s
}

/// `run.csv` -> `run.config`.
pub fn resolved_config_path(output: &Path) -> PathBuf {
    output.with_extension("config")
}

/// Writes `body` to `output` and the resolved configuration next to it.
pub fn write_with_config(output: &Path, body: &str, cfg: &ScenarioConfig) -> Result<PathBuf> {
    let io = |p: &Path, e: std::io::Error| Error::Usage(format!("cannot write {}: {e}", p.display()));
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    fs::write(output, body).map_err(|e| io(output, e))?;
    let cfg_path = resolved_config_path(output);
    let resolved = ScenarioConfig {
        output_path: Some(output.to_path_buf()),
        ..cfg.clone()
    };
    fs::write(&cfg_path, resolved.to_text()).map_err(|e| io(&cfg_path, e))?;
    Ok(cfg_path)
}
