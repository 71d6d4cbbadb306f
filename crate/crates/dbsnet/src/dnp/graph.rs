//! Backhaul graph: node loads and pairwise achievable link rates.

use std::fmt::Write as _;

use rand::Rng;

use crate::channel::{distance_3d, fso_rate, FsoParams};
use crate::clustering::Placement;
use crate::rng::rng_from_seed;
use crate::scenario::GatewayStation;
use crate::{Error, Result};

/// Node-indexed view of the backhaul layer.
///
/// Nodes `0..dbs_count` are drones (each carrying the load of its
/// ground-node cluster), nodes `dbs_count..dbs_count + mbs_count` are
/// gateways (no load). Rates are symmetric with a zero diagonal and
/// zero wherever the distance gate closed the link.
#[derive(Debug, Clone, PartialEq)]
pub struct BackhaulGraph {
    pub dbs_count: usize,
    pub mbs_count: usize,
    /// `(M+B)²` link rates in Mbps.
    pub rates: Vec<Vec<f64>>,
    /// Per-drone cluster load in Mbps, length `dbs_count`.
    pub loads: Vec<f64>,
}

impl BackhaulGraph {
    pub fn new(
        dbs_count: usize,
        mbs_count: usize,
        rates: Vec<Vec<f64>>,
        loads: Vec<f64>,
    ) -> Result<Self> {
        let n = dbs_count + mbs_count;
        if mbs_count < 1 {
            return Err(Error::Config("graph requires at least one gateway".into()));
        }
        if rates.len() != n || rates.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!("rates matrix must be {n}x{n}")));
        }
        if loads.len() != dbs_count {
            return Err(Error::Validation(format!(
                "loads must have one entry per drone ({dbs_count})"
            )));
        }
        for i in 0..n {
            if rates[i][i] != 0.0 {
                return Err(Error::Validation(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                if rates[i][j] < 0.0 {
                    return Err(Error::Validation(format!("negative rate at ({i}, {j})")));
                }
                if (rates[i][j] - rates[j][i]).abs() > 1e-9 {
                    return Err(Error::Validation(format!(
                        "rates not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if loads.iter().any(|&g| g < 0.0) {
            return Err(Error::Validation("negative node load".into()));
        }
        Ok(BackhaulGraph {
            dbs_count,
            mbs_count,
            rates,
            loads,
        })
    }

    pub fn node_count(&self) -> usize {
        self.dbs_count + self.mbs_count
    }

    /// Sum of all link rates over unordered pairs.
    pub fn total_rate(&self) -> f64 {
        let n = self.node_count();
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += self.rates[i][j];
            }
        }
        sum
    }
}

/// Builds the backhaul graph for a placement: FSO rates over 3D
/// distances between all station pairs, and per-drone loads summed from
/// the associated ground nodes.
pub fn build_graph(
    placement: &Placement,
    gateways: &[GatewayStation],
    fso: &FsoParams,
    gn_loads: &[f64],
) -> Result<BackhaulGraph> {
    if placement.dbs_count() == 0 {
        return Err(Error::Config("placement has no drones".into()));
    }
    if gateways.is_empty() {
        return Err(Error::Config("no gateway stations".into()));
    }
    fso.validate()?;

    let mut positions: Vec<[f64; 3]> = placement.dbs_positions.clone();
    positions.extend(gateways.iter().map(|g| [g.x, g.y, g.h]));
    let n = positions.len();

    let mut rates = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance_3d(positions[i], positions[j]);
            let r = if d > 0.0 { fso_rate(fso, d) } else { 0.0 };
            rates[i][j] = r;
            rates[j][i] = r;
        }
    }
    let loads = placement.loads(gn_loads);
    BackhaulGraph::new(placement.dbs_count(), gateways.len(), rates, loads)
}

/// Synthetic fully-random instance for solver benchmarking: symmetric
/// rates uniform in `[0, max_rate]`, loads uniform in `[min_load,
/// max_load]`.
pub fn random_dense_graph(
    dbs_count: usize,
    mbs_count: usize,
    max_rate: f64,
    min_load: f64,
    max_load: f64,
    seed: u64,
) -> BackhaulGraph {
    let mut rng = rng_from_seed(seed);
    let n = dbs_count + mbs_count;
    let mut rates = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let r = rng.random_range(0.0..max_rate);
            rates[i][j] = r;
            rates[j][i] = r;
        }
    }
    let loads = (0..dbs_count)
        .map(|_| rng.random_range(min_load..max_load))
        .collect();
    BackhaulGraph::new(dbs_count, mbs_count, rates, loads).expect("constructed symmetric")
}

// --- Text format -----------------------------------------------------------
//
//   dbsnet-graph v1
//   dbs_count <M>
//   mbs_count <B>
//   node <idx> <load>        (M lines, drone loads)
//   edge <i> <j> <rate>      (i < j, nonzero rates only)

const MAGIC: &str = "dbsnet-graph v1";

pub fn graph_to_string(g: &BackhaulGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "dbs_count {}", g.dbs_count);
    let _ = writeln!(out, "mbs_count {}", g.mbs_count);
    for (i, load) in g.loads.iter().enumerate() {
        let _ = writeln!(out, "node {i} {load}");
    }
    let n = g.node_count();
    for i in 0..n {
        for j in (i + 1)..n {
            if g.rates[i][j] > 0.0 {
                let _ = writeln!(out, "edge {i} {j} {}", g.rates[i][j]);
            }
        }
    }
    out
}

pub fn graph_from_str(text: &str) -> Result<BackhaulGraph> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        other => {
            let line = other.map_or(1, |(i, _)| i + 1);
            return Err(Error::parse(line, "bad or missing graph header"));
        }
    }
    let mut dbs_count: Option<usize> = None;
    let mut mbs_count: Option<usize> = None;
    let mut loads: Vec<Option<f64>> = Vec::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            ["dbs_count", v] => {
                let m = v
                    .parse()
                    .map_err(|_| Error::parse(line_no, "invalid dbs_count"))?;
                dbs_count = Some(m);
                loads = vec![None; m];
            }
            ["mbs_count", v] => {
                mbs_count =
                    Some(v.parse().map_err(|_| Error::parse(line_no, "invalid mbs_count"))?);
            }
            ["node", i, load] => {
                let i: usize = i.parse().map_err(|_| Error::parse(line_no, "bad node index"))?;
                let load: f64 =
                    load.parse().map_err(|_| Error::parse(line_no, "bad node load"))?;
                match loads.get_mut(i) {
                    Some(slot) => *slot = Some(load),
                    None => {
                        return Err(Error::parse(line_no, format!("node index {i} out of range")))
                    }
                }
            }
            ["edge", i, j, rate] => {
                edges.push((
                    i.parse().map_err(|_| Error::parse(line_no, "bad edge index"))?,
                    j.parse().map_err(|_| Error::parse(line_no, "bad edge index"))?,
                    rate.parse().map_err(|_| Error::parse(line_no, "bad edge rate"))?,
                ));
            }
            _ => return Err(Error::parse(line_no, format!("unexpected record `{line}`"))),
        }
    }
    let dbs_count = dbs_count.ok_or_else(|| Error::parse(0, "missing dbs_count"))?;
    let mbs_count = mbs_count.ok_or_else(|| Error::parse(0, "missing mbs_count"))?;
    let n = dbs_count + mbs_count;
    let loads: Vec<f64> = loads
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::Validation(format!("missing load for node {i}"))))
        .collect::<Result<_>>()?;
    let mut rates = vec![vec![0.0; n]; n];
    for (i, j, r) in edges {
        if i >= n || j >= n {
            return Err(Error::Validation(format!("edge ({i}, {j}) out of range")));
        }
        rates[i][j] = r;
        rates[j][i] = r;
    }
    BackhaulGraph::new(dbs_count, mbs_count, rates, loads)
}
