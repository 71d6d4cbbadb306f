//! Experiment sweeps wiring scenario, channel, clustering, and solver
//! into reproducible metrics files.
//!
//! A sweep walks a grid of axis points, runs a fixed number of
//! independent instances per point (each on its own derived sub-seed),
//! and appends one metrics row per (instance, method). Instances run in
//! parallel but results are merged in (axis, instance) order, so the
//! metrics CSV is byte-identical across re-runs of the same config.
//! Wall-clock timings are deliberately written to a separate file to
//! keep the metrics deterministic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{coverage_radius, AccessParams, FsoParams};
use crate::clustering::{kmeans_pp, run_hc, HcParams, Placement};
use crate::dnp::{build_graph, exact_sampler, run_ga, BackhaulGraph, GaConfig, GaSetting};
use crate::rng::sub_seed;
use crate::scenario::{generate_pcp_scenario, PcpConfig, Scenario};
use crate::{Error, Result};

/// Method tag of the uniform-sampling baseline solver.
pub const EXACT_TAG: &str = "EXACT";

/// Parameter table shared by all experiments. Key names follow the
/// conventional symbols; units are noted per field and converted to SI
/// on use.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableParams {
    /// Drone altitude, m.
    pub h: f64,
    /// LOS-sigmoid environment constant.
    pub alpha: f64,
    /// LOS-sigmoid environment constant, per degree.
    pub beta: f64,
    /// Mean LOS excess loss, dB.
    pub eta_los: f64,
    /// Mean NLOS excess loss, dB.
    pub eta_nlos: f64,
    /// Access carrier frequency, Hz.
    pub f_c: f64,
    /// Per-ground-node demand, Mbps.
    #[serde(rename = "R_n")]
    pub r_n: f64,
    /// Gateway count.
    #[serde(rename = "B")]
    pub b: usize,
    /// FSO beam waist, cm.
    pub omega_0: f64,
    /// Weather attenuation coefficient, 1/m.
    pub kappa: f64,
    /// FSO transmit power, mW.
    #[serde(rename = "P_FSO")]
    pub p_fso: f64,
    /// FSO wavelength, nm.
    pub lambda: f64,
    /// Receiver lens radius, m.
    pub r_0: f64,
    /// Photo-detector responsivity.
    pub eta: f64,
    /// Receiver noise power, dBm.
    pub sigma_n2: f64,
    /// GA generation count.
    pub generations: usize,
    /// GA population size.
    pub population: usize,
    /// GA crossover rate.
    pub chi_co: f64,
    /// GA mutation rate.
    pub chi_m: f64,
    /// GA elite fraction.
    pub chi_e: f64,
}

impl Default for TableParams {
    fn default() -> Self {
        TableParams {
            h: 60.0,
            alpha: 9.61,
            beta: 0.16,
            eta_los: 1.0,
            eta_nlos: 20.0,
            f_c: 2.0e9,
            r_n: 20.0,
            b: 4,
            omega_0: 0.25,
            kappa: 4.3e-4,
            p_fso: 50.0,
            lambda: 1550.0,
            r_0: 0.1,
            eta: 0.5,
            sigma_n2: -60.1,
            generations: 400,
            population: 400,
            chi_co: 0.3,
            chi_m: 0.2,
            chi_e: 0.1,
        }
    }
}

impl TableParams {
    pub fn access(&self, pl_max: f64) -> AccessParams {
        AccessParams {
            h: self.h,
            alpha: self.alpha,
            beta: self.beta,
            eta_los: self.eta_los,
            eta_nlos: self.eta_nlos,
            f_c: self.f_c,
            pl_max,
        }
    }

    /// FSO parameters in SI units, with the link gate at `d_max` m.
    pub fn fso(&self, d_max: f64, stabilized: bool) -> FsoParams {
        let base = if stabilized {
            FsoParams::stabilized()
        } else {
            FsoParams::default()
        };
        FsoParams {
            beam_waist: self.omega_0 * 1e-2,
            kappa: self.kappa,
            tx_power: self.p_fso * 1e-3,
            wavelength: self.lambda * 1e-9,
            lens_radius: self.r_0,
            responsivity: self.eta,
            noise_power: 10f64.powf((self.sigma_n2 - 30.0) / 10.0),
            altitude: self.h,
            d_max,
            ..base
        }
    }

    pub fn ga(&self, setting: GaSetting, seed: u64) -> GaConfig {
        GaConfig {
            population: self.population,
            generations: self.generations,
            crossover_rate: self.chi_co,
            mutation_rate: self.chi_m,
            elite_fraction: self.chi_e,
            setting,
            seed,
            ..GaConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Mean surviving cluster count over a d_max × N_B grid.
    DbsCountSweep,
    /// Distribution of within-d_max neighbor degrees at termination.
    NeighborHistogram,
    /// Distribution of node-to-drone distances, constrained clustering
    /// against the K-means baseline with matched cluster count.
    DistanceHistogram,
    /// Solver success probability against instance size.
    GaSuccessVsM,
    /// Solver success probability against the link gate.
    GaSuccessVsDmax,
    /// Best node surplus against instance size.
    SurplusVsM,
    /// Best node surplus against the link gate.
    SurplusVsDmax,
    /// End-to-end comparison of both placement methods.
    HcVsKmeans,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::DbsCountSweep => "dbs-count-sweep",
            ExperimentKind::NeighborHistogram => "neighbor-histogram",
            ExperimentKind::DistanceHistogram => "distance-histogram",
            ExperimentKind::GaSuccessVsM => "ga-success-vs-m",
            ExperimentKind::GaSuccessVsDmax => "ga-success-vs-dmax",
            ExperimentKind::SurplusVsM => "surplus-vs-m",
            ExperimentKind::SurplusVsDmax => "surplus-vs-dmax",
            ExperimentKind::HcVsKmeans => "hc-vs-kmeans",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub instances_per_point: usize,
    pub base_seed: u64,
    pub out_dir: String,
    /// Maximum tolerable access path loss, dB; sets the coverage radius.
    pub pl_max: f64,
    /// Evaluation budget of the uniform-sampling baseline.
    pub n_exact: u64,
    /// Use the stabilized-transceiver jitter profile for FSO links.
    pub stabilized_fso: bool,
    /// Solver settings by tag; `EXACT` selects the sampling baseline.
    pub settings: Vec<String>,
    /// Backhaul link gate grid, m.
    pub d_max_grid: Vec<f64>,
    /// Protected-neighbor-count grid.
    pub n_b_grid: Vec<usize>,
    /// Cluster-count grid for the vs-m sweeps.
    pub m_grid: Vec<usize>,
    /// Point-process knobs; `load_per_gn`, `mbs_count`, and `seed` are
    /// overwritten from the parameter table and the sweep sub-seeds.
    pub scenario: PcpConfig,
    pub params: TableParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::DbsCountSweep,
            instances_per_point: 50,
            base_seed: 1,
            out_dir: "out".into(),
            pl_max: 110.0,
            n_exact: 100_000,
            stabilized_fso: true,
            settings: vec!["NVP".into()],
            d_max_grid: vec![1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0],
            n_b_grid: vec![1, 2, 3],
            m_grid: vec![5, 10, 15, 20],
            scenario: PcpConfig::default(),
            params: TableParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances_per_point < 1 {
            return Err(Error::Config("instances_per_point must be >= 1".into()));
        }
        let uses_m = matches!(
            self.kind,
            ExperimentKind::GaSuccessVsM | ExperimentKind::SurplusVsM
        );
        if uses_m && self.m_grid.is_empty() {
            return Err(Error::Config("m_grid must be nonempty for a vs-m sweep".into()));
        }
        if !uses_m && self.d_max_grid.is_empty() {
            return Err(Error::Config("d_max_grid must be nonempty".into()));
        }
        if !uses_m && self.n_b_grid.is_empty() {
            return Err(Error::Config("n_b_grid must be nonempty".into()));
        }
        for tag in &self.settings {
            if tag != EXACT_TAG && GaSetting::from_tag(tag).is_none() {
                return Err(Error::Config(format!("unknown solver setting `{tag}`")));
            }
        }
        if self.solver_kind() && self.settings.is_empty() {
            return Err(Error::Config("settings must be nonempty for a solver sweep".into()));
        }
        self.scenario.validate()?;
        Ok(())
    }

    fn solver_kind(&self) -> bool {
        !matches!(
            self.kind,
            ExperimentKind::DbsCountSweep
                | ExperimentKind::NeighborHistogram
                | ExperimentKind::DistanceHistogram
        )
    }

    /// The axis grid as (x, y) points in sweep order.
    pub fn axis_points(&self) -> Vec<AxisPoint> {
        match self.kind {
            ExperimentKind::GaSuccessVsM | ExperimentKind::SurplusVsM => self
                .m_grid
                .iter()
                .map(|&m| AxisPoint { x: m as f64, y: 0.0 })
                .collect(),
            ExperimentKind::GaSuccessVsDmax | ExperimentKind::SurplusVsDmax => self
                .d_max_grid
                .iter()
                .map(|&d| AxisPoint {
                    x: d,
                    y: self.n_b_grid[0] as f64,
                })
                .collect(),
            _ => {
                let mut points = Vec::new();
                for &d in &self.d_max_grid {
                    for &n_b in &self.n_b_grid {
                        points.push(AxisPoint { x: d, y: n_b as f64 });
                    }
                }
                points
            }
        }
    }
}

/// One grid coordinate: `x` is the swept quantity (d_max in meters or
/// the cluster count), `y` the secondary one (N_B where applicable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisPoint {
    pub x: f64,
    pub y: f64,
}

/// One (instance, method) outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub axis_index: usize,
    pub instance: usize,
    pub seed: u64,
    pub x: f64,
    pub y: f64,
    pub method: String,
    /// Placed drone count.
    pub m: usize,
    pub success: bool,
    /// Raw node surplus of the best valid solution, when one exists.
    pub f_node: Option<f64>,
    /// Failure description; commas and newlines are stripped.
    pub error: Option<String>,
}

const METRICS_MAGIC: &str = "# dbsnet-metrics v1";
const METRICS_HEADER: &str = "axis_index,instance,seed,x,y,method,m,success,f_node,error";

pub fn metrics_to_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{METRICS_MAGIC}");
    let _ = writeln!(out, "{METRICS_HEADER}");
    for r in rows {
        let f_node = r.f_node.map_or(String::new(), |v| format!("{v}"));
        let error = r
            .error
            .as_deref()
            .unwrap_or("")
            .replace([',', '\n'], ";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.axis_index, r.instance, r.seed, r.x, r.y, r.method, r.m, r.success, f_node, error
        );
    }
    out
}

pub fn metrics_from_str(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == METRICS_MAGIC => {}
        _ => return Err(Error::parse(1, "bad or missing metrics header")),
    }
    match lines.next() {
        Some((_, l)) if l.trim() == METRICS_HEADER => {}
        _ => return Err(Error::parse(2, "unexpected metrics column set")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::parse(line_no, "wrong field count"));
        }
        let bad = |what: &str| Error::parse(line_no, format!("bad {what}"));
        rows.push(MetricsRow {
            axis_index: f[0].parse().map_err(|_| bad("axis_index"))?,
            instance: f[1].parse().map_err(|_| bad("instance"))?,
            seed: f[2].parse().map_err(|_| bad("seed"))?,
            x: f[3].parse().map_err(|_| bad("x"))?,
            y: f[4].parse().map_err(|_| bad("y"))?,
            method: f[5].to_string(),
            m: f[6].parse().map_err(|_| bad("m"))?,
            success: f[7].parse().map_err(|_| bad("success"))?,
            f_node: if f[8].is_empty() {
                None
            } else {
                Some(f[8].parse().map_err(|_| bad("f_node"))?)
            },
            error: if f[9].is_empty() {
                None
            } else {
                Some(f[9].to_string())
            },
        });
    }
    Ok(rows)
}

/// Binned auxiliary data (neighbor degrees or coverage distances).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub x: f64,
    pub y: f64,
    pub method: String,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
}

pub fn histogram_to_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("x,y,method,bin_lo,bin_hi,count\n");
    for b in bins {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            b.x, b.y, b.method, b.bin_lo, b.bin_hi, b.count
        );
    }
    out
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<MetricsRow>,
    pub histogram: Vec<HistogramBin>,
    pub metrics_path: PathBuf,
    /// Count of rows that recorded an instance-level error.
    pub failures: usize,
}

struct InstanceOutput {
    rows: Vec<MetricsRow>,
    /// Raw values destined for the histogram file, tagged by method.
    hist_values: Vec<(String, f64)>,
    wall_ms: f64,
}

/// Runs the configured sweep and writes `metrics.csv`,
/// `histogram.csv` (when the kind produces one), `summary.json`,
/// `summary.txt`, and `timings.csv` under the output directory.
///
/// Instance-level failures become rows with an error tag; only
/// configuration and I/O problems abort the sweep.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let points = config.axis_points();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|a| (0..config.instances_per_point).map(move |i| (a, i)))
        .collect();

    let mut outputs: Vec<((usize, usize), InstanceOutput)> = jobs
        .par_iter()
        .map(|&(axis_index, instance)| {
            let started = Instant::now();
            let mut out = run_instance(config, points[axis_index], axis_index, instance);
            out.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            ((axis_index, instance), out)
        })
        .collect();
    // Completion order is nondeterministic; the merge order is not.
    outputs.sort_by_key(|&(key, _)| key);

    let mut rows = Vec::new();
    let mut hist_raw: Vec<(usize, String, f64)> = Vec::new();
    let mut timings = String::from("axis_index,instance,wall_ms\n");
    for ((axis_index, instance), out) in outputs {
        rows.extend(out.rows);
        for (method, v) in out.hist_values {
            hist_raw.push((axis_index, method, v));
        }
        let _ = writeln!(timings, "{axis_index},{instance},{:.3}", out.wall_ms);
    }
    let histogram = bin_histogram(config, &points, hist_raw);
    let failures = rows.iter().filter(|r| r.error.is_some()).count();

    let dir = PathBuf::from(&config.out_dir);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let metrics_path = dir.join("metrics.csv");
    write_file(&metrics_path, &metrics_to_csv(&rows))?;
    if !histogram.is_empty() {
        write_file(&dir.join("histogram.csv"), &histogram_to_csv(&histogram))?;
    }
    write_file(&dir.join("timings.csv"), &timings)?;
    let report = summarize_rows(&rows)?;
    write_file(&dir.join("summary.json"), &serde_json::to_string_pretty(&report)?)?;
    write_file(&dir.join("summary.txt"), &report.render_text())?;

    Ok(ExperimentOutput {
        rows,
        histogram,
        metrics_path,
        failures,
    })
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

fn bin_histogram(
    config: &ExperimentConfig,
    points: &[AxisPoint],
    raw: Vec<(usize, String, f64)>,
) -> Vec<HistogramBin> {
    if raw.is_empty() {
        return Vec::new();
    }
    // Integer bins for degrees, 50 m bins for distances.
    let width = match config.kind {
        ExperimentKind::NeighborHistogram => 1.0,
        _ => 50.0,
    };
    let mut counts: BTreeMap<(usize, String, u64), u64> = BTreeMap::new();
    for (axis, method, v) in raw {
        let bin = (v / width).floor() as u64;
        *counts.entry((axis, method, bin)).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|((axis, method, bin), count)| HistogramBin {
            x: points[axis].x,
            y: points[axis].y,
            method,
            bin_lo: bin as f64 * width,
            bin_hi: (bin + 1) as f64 * width,
            count,
        })
        .collect()
}

fn error_row(
    axis_index: usize,
    instance: usize,
    seed: u64,
    point: AxisPoint,
    method: &str,
    message: String,
) -> MetricsRow {
    MetricsRow {
        axis_index,
        instance,
        seed,
        x: point.x,
        y: point.y,
        method: method.to_string(),
        m: 0,
        success: false,
        f_node: None,
        error: Some(message),
    }
}

fn run_instance(
    config: &ExperimentConfig,
    point: AxisPoint,
    axis_index: usize,
    instance: usize,
) -> InstanceOutput {
    let seed = sub_seed(config.base_seed, axis_index as u64, instance as u64);
    match try_run_instance(config, point, axis_index, instance, seed) {
        Ok(out) => out,
        Err(e) => InstanceOutput {
            rows: vec![error_row(axis_index, instance, seed, point, "-", e.to_string())],
            hist_values: Vec::new(),
            wall_ms: 0.0,
        },
    }
}

fn try_run_instance(
    config: &ExperimentConfig,
    point: AxisPoint,
    axis_index: usize,
    instance: usize,
    seed: u64,
) -> Result<InstanceOutput> {
    let scenario = make_scenario(config, seed)?;
    let gns = scenario.gn_positions();
    let access = config.params.access(config.pl_max);
    let diagonal = config.scenario.area_side * std::f64::consts::SQRT_2;
    let r_a = coverage_radius(&access, diagonal)?.radius;

    let mut rows = Vec::new();
    let mut hist_values = Vec::new();
    let row = |method: &str, m: usize, success: bool, f_node: Option<f64>| MetricsRow {
        axis_index,
        instance,
        seed,
        x: point.x,
        y: point.y,
        method: method.to_string(),
        m,
        success,
        f_node,
        error: None,
    };

    match config.kind {
        ExperimentKind::DbsCountSweep => {
            let hc = run_hc(&gns, &hc_params(config, point, r_a))?;
            rows.push(row("HC", hc.placement.dbs_count(), !hc.constraint_unsatisfiable, None));
        }
        ExperimentKind::NeighborHistogram => {
            let params = hc_params(config, point, r_a);
            let mut state = crate::clustering::ClusterState::init(&gns, params.d_max)?;
            while state.merge_step(params.n_b, params.r_a).is_some() {}
            for &deg in &state.degree {
                hist_values.push(("HC".to_string(), deg as f64));
            }
            rows.push(row("HC", state.len(), true, None));
        }
        ExperimentKind::DistanceHistogram => {
            let hc = run_hc(&gns, &hc_params(config, point, r_a))?;
            let m = hc.placement.dbs_count();
            let km = kmeans_pp(&gns, m, sub_seed(seed, 7, 0), config.params.h)?;
            for (placement, tag) in [(&hc.placement, "HC"), (&km, "KMEANS")] {
                for (j, members) in placement.association.iter().enumerate() {
                    let c = placement.dbs_positions[j];
                    for &n in members {
                        let d = ((gns[n][0] - c[0]).powi(2) + (gns[n][1] - c[1]).powi(2)).sqrt();
                        hist_values.push((tag.to_string(), d));
                    }
                }
                rows.push(row(tag, m, true, None));
            }
        }
        ExperimentKind::HcVsKmeans => {
            let hc = run_hc(&gns, &hc_params(config, point, r_a))?;
            let m = hc.placement.dbs_count();
            let km = kmeans_pp(&gns, m, sub_seed(seed, 7, 0), config.params.h)?;
            for (placement, tag) in [(&hc.placement, "HC"), (&km, "KMEANS")] {
                let covered = placement.association.iter().enumerate().all(|(j, members)| {
                    let c = placement.dbs_positions[j];
                    members.iter().all(|&n| {
                        ((gns[n][0] - c[0]).powi(2) + (gns[n][1] - c[1]).powi(2)).sqrt()
                            <= r_a + 1e-6
                    })
                });
                let graph = instance_graph(config, placement, &scenario, point.x)?;
                solver_rows(config, &graph, seed, tag, covered, m, &row, &mut rows);
            }
        }
        ExperimentKind::GaSuccessVsM | ExperimentKind::SurplusVsM => {
            let m = point.x as usize;
            let placement = kmeans_pp(&gns, m, sub_seed(seed, 7, 0), config.params.h)?;
            let d_max = *config
                .d_max_grid
                .first()
                .unwrap_or(&FsoParams::default().d_max);
            let graph = instance_graph(config, &placement, &scenario, d_max)?;
            solver_rows(config, &graph, seed, "", true, m, &row, &mut rows);
        }
        ExperimentKind::GaSuccessVsDmax | ExperimentKind::SurplusVsDmax => {
            let hc = run_hc(&gns, &hc_params(config, point, r_a))?;
            let m = hc.placement.dbs_count();
            let graph = instance_graph(config, &hc.placement, &scenario, point.x)?;
            solver_rows(config, &graph, seed, "", true, m, &row, &mut rows);
        }
    }
    Ok(InstanceOutput {
        rows,
        hist_values,
        wall_ms: 0.0,
    })
}

fn make_scenario(config: &ExperimentConfig, seed: u64) -> Result<Scenario> {
    let pcp = PcpConfig {
        load_per_gn: config.params.r_n,
        mbs_count: config.params.b,
        seed,
        ..config.scenario.clone()
    };
    generate_pcp_scenario(&pcp)
}

fn hc_params(config: &ExperimentConfig, point: AxisPoint, r_a: f64) -> HcParams {
    HcParams::new(point.x, point.y as usize, r_a, config.params.h)
}

fn instance_graph(
    config: &ExperimentConfig,
    placement: &Placement,
    scenario: &Scenario,
    d_max: f64,
) -> Result<BackhaulGraph> {
    let fso = config.params.fso(d_max, config.stabilized_fso);
    build_graph(placement, &scenario.gateways, &fso, &scenario.gn_loads())
}

/// Runs every configured solver on one graph, one row each. `prefix`
/// distinguishes the placement source when two are compared.
#[allow(clippy::too_many_arguments)]
fn solver_rows(
    config: &ExperimentConfig,
    graph: &BackhaulGraph,
    seed: u64,
    prefix: &str,
    feasible_placement: bool,
    m: usize,
    row: &dyn Fn(&str, usize, bool, Option<f64>) -> MetricsRow,
    rows: &mut Vec<MetricsRow>,
) {
    for (tag_index, tag) in config.settings.iter().enumerate() {
        let method = if prefix.is_empty() {
            tag.clone()
        } else {
            format!("{prefix}/{tag}")
        };
        let solver_seed = sub_seed(seed, 100 + tag_index as u64, 0);
        let (success, f_node) = if tag == EXACT_TAG {
            let res = exact_sampler(graph, config.n_exact as usize, solver_seed);
            (res.best.is_some(), res.best.map(|s| s.f_node))
        } else {
            let setting = GaSetting::from_tag(tag).expect("validated tag");
            match run_ga(graph, &config.params.ga(setting, solver_seed)) {
                // Success means a valid design survives to termination,
                // not that one was merely observed mid-search.
                Ok(out) => (out.retained.is_some(), out.retained.map(|s| s.f_node)),
                Err(e) => {
                    rows.push(MetricsRow {
                        error: Some(e.to_string()),
                        ..row(&method, m, false, None)
                    });
                    continue;
                }
            }
        };
        rows.push(row(&method, m, success && feasible_placement, f_node));
    }
}

// --- Summaries -------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub rows: usize,
    pub successes: usize,
    pub success_probability: f64,
    /// Mean node surplus over instances solved by every method.
    pub mean_f_node: Option<f64>,
    /// Stddev (population) of the same restricted set.
    pub stddev_f_node: Option<f64>,
    pub mean_m: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryReport {
    pub instances: usize,
    /// Instances on which every compared method succeeded.
    pub mutually_solved: usize,
    pub methods: Vec<MethodSummary>,
}

/// Aggregates metrics rows: per-method success probability and mean
/// drone count, plus surplus statistics restricted to the instances
/// solved by all methods (so quality comparisons are like-for-like).
pub fn summarize_rows(rows: &[MetricsRow]) -> Result<SummaryReport> {
    if rows.is_empty() {
        return Err(Error::Validation("no metrics rows to summarize".into()));
    }
    let mut methods: Vec<String> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    // Instance key: (axis, instance). Mutually solved means every
    // row recorded for that key succeeded with a surplus value.
    let mut by_instance: BTreeMap<(usize, usize), Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        by_instance.entry((r.axis_index, r.instance)).or_default().push(r);
    }
    let mutually: Vec<(usize, usize)> = by_instance
        .iter()
        .filter(|(_, rs)| rs.iter().all(|r| r.success))
        .map(|(&k, _)| k)
        .collect();

    let summaries = methods
        .iter()
        .map(|method| {
            let mine: Vec<&MetricsRow> = rows.iter().filter(|r| &r.method == method).collect();
            let successes = mine.iter().filter(|r| r.success).count();
            let surplus: Vec<f64> = mine
                .iter()
                .filter(|r| mutually.contains(&(r.axis_index, r.instance)))
                .filter_map(|r| r.f_node)
                .collect();
            let (mean_f_node, stddev_f_node) = if surplus.is_empty() {
                (None, None)
            } else {
                let mean = surplus.iter().sum::<f64>() / surplus.len() as f64;
                let var = surplus.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / surplus.len() as f64;
                (Some(mean), Some(var.sqrt()))
            };
            let mean_m =
                mine.iter().map(|r| r.m as f64).sum::<f64>() / mine.len().max(1) as f64;
            MethodSummary {
                method: method.clone(),
                rows: mine.len(),
                successes,
                success_probability: successes as f64 / mine.len().max(1) as f64,
                mean_f_node,
                stddev_f_node,
                mean_m,
            }
        })
        .collect();
    Ok(SummaryReport {
        instances: by_instance.len(),
        mutually_solved: mutually.len(),
        methods: summaries,
    })
}

/// Reads and aggregates one or more metrics files.
pub fn summarize_files(paths: &[PathBuf]) -> Result<SummaryReport> {
    if paths.is_empty() {
        return Err(Error::Config("summarize requires at least one metrics file".into()));
    }
    let mut rows = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        rows.extend(metrics_from_str(&text)?);
    }
    summarize_rows(&rows)
}

impl SummaryReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "instances {}  mutually_solved {}",
            self.instances, self.mutually_solved
        );
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>9} {:>9} {:>12} {:>12} {:>8}",
            "method", "rows", "success", "p", "mean_f_node", "std_f_node", "mean_m"
        );
        for m in &self.methods {
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(
                out,
                "{:<12} {:>6} {:>9} {:>9.3} {:>12} {:>12} {:>8.2}",
                m.method,
                m.rows,
                m.successes,
                m.success_probability,
                fmt(m.mean_f_node),
                fmt(m.stddev_f_node),
                m.mean_m
            );
        }
        out
    }
}
