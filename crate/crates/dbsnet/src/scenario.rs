//! Problem-instance generation and persistence.
//!
//! Ground nodes are drawn from a Poisson cluster process: parent points
//! from a homogeneous PPP over the area, each spawning a Poisson number
//! of daughters with isotropic Gaussian scatter. Gateway macro stations
//! sit on the area boundary (the four corners in the reference setup).
//!
//! Instances are pure functions of `(config, seed)` and serialize to a
//! line-oriented text format (see [`save_scenario`]).

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, splitmix64};
use crate::{Error, Result};

/// A terrestrial demand point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundNode {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    /// Expected throughput load in Mbps.
    pub load: f64,
}

/// A gateway macro base station (core-network access point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayStation {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

/// Poisson-cluster-process generator parameters.
///
/// The point-process intensities are planning knobs, not physical
/// constants; defaults give instance sizes in the tens-of-clusters range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcpConfig {
    /// Side of the square coverage area in meters.
    pub area_side: f64,
    /// Expected parent points per km².
    pub parent_intensity: f64,
    /// Mean daughters per parent.
    pub daughters_per_parent: f64,
    /// Std of the isotropic Gaussian daughter offset, meters.
    pub daughter_scatter: f64,
    /// Per-node throughput demand in Mbps.
    pub load_per_gn: f64,
    /// Number of gateway stations.
    pub mbs_count: usize,
    /// Gateway antenna height in meters.
    pub mbs_height: f64,
    /// Extra parent points placed deterministically (test hook for
    /// degenerate instances).
    pub forced_parents: Vec<[f64; 2]>,
    pub seed: u64,
}

impl Default for PcpConfig {
    fn default() -> Self {
        PcpConfig {
            area_side: 10_000.0,
            parent_intensity: 0.08,
            daughters_per_parent: 25.0,
            daughter_scatter: 400.0,
            load_per_gn: 20.0,
            mbs_count: 4,
            mbs_height: 30.0,
            forced_parents: Vec::new(),
            seed: 0,
        }
    }
}

impl PcpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_side > 0.0) {
            return Err(Error::Config("area_side must be positive".into()));
        }
        if self.parent_intensity < 0.0 {
            return Err(Error::Config("parent_intensity must be nonnegative".into()));
        }
        if self.daughters_per_parent < 0.0 {
            return Err(Error::Config(
                "daughters_per_parent must be nonnegative".into(),
            ));
        }
        if self.daughter_scatter < 0.0 {
            return Err(Error::Config("daughter_scatter must be nonnegative".into()));
        }
        if !(self.load_per_gn > 0.0) {
            return Err(Error::Config("load_per_gn must be positive".into()));
        }
        if self.mbs_count < 1 {
            return Err(Error::Config("mbs_count must be at least 1".into()));
        }
        for p in &self.forced_parents {
            if !inside(p[0], p[1], self.area_side) {
                return Err(Error::Config(format!(
                    "forced parent ({}, {}) outside area",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }
}

/// A complete problem instance: ground nodes plus gateway stations.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<GroundNode>,
    pub gateways: Vec<GatewayStation>,
    pub config: PcpConfig,
    pub seed: u64,
}

impl Scenario {
    pub fn gn_positions(&self) -> Vec<[f64; 2]> {
        self.nodes.iter().map(|n| [n.x, n.y]).collect()
    }

    pub fn gn_loads(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.load).collect()
    }
}

fn inside(x: f64, y: f64, side: f64) -> bool {
    (0.0..=side).contains(&x) && (0.0..=side).contains(&y)
}

fn sample_poisson<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive Poisson mean");
    dist.sample(rng) as usize
}

/// Draws a scenario from the Poisson cluster process.
///
/// Out-of-area daughters are redrawn rather than clipped, which keeps
/// the spatial statistics free of boundary pile-ups. An empty draw
/// (zero ground nodes) restarts from a derived sub-seed so the result
/// stays a pure function of `(config, seed)`.
pub fn generate_pcp_scenario(config: &PcpConfig) -> Result<Scenario> {
    config.validate()?;
    for attempt in 0u64.. {
        let seed = if attempt == 0 {
            config.seed
        } else {
            splitmix64(config.seed.wrapping_add(attempt))
        };
        let mut rng = rng_from_seed(seed);

        let area_km2 = (config.area_side / 1000.0).powi(2);
        let parent_count = sample_poisson(&mut rng, config.parent_intensity * area_km2);
        let mut parents: Vec<[f64; 2]> = (0..parent_count)
            .map(|_| {
                [
                    rng.random_range(0.0..config.area_side),
                    rng.random_range(0.0..config.area_side),
                ]
            })
            .collect();
        parents.extend(config.forced_parents.iter().copied());

        let mut nodes = Vec::new();
        for parent in &parents {
            let daughters = sample_poisson(&mut rng, config.daughters_per_parent);
            for _ in 0..daughters {
                let (x, y) = draw_daughter(&mut rng, parent, config);
                nodes.push(GroundNode {
                    id: nodes.len(),
                    x,
                    y,
                    load: config.load_per_gn,
                });
            }
        }

        if !nodes.is_empty() {
            let gateways =
                place_mbs_corners(config.area_side, config.mbs_count, config.mbs_height)?;
            return Ok(Scenario {
                nodes,
                gateways,
                config: config.clone(),
                seed: config.seed,
            });
        }
    }
    unreachable!("retry loop returns on first non-empty draw")
}

fn draw_daughter<R: Rng>(rng: &mut R, parent: &[f64; 2], config: &PcpConfig) -> (f64, f64) {
    if config.daughter_scatter == 0.0 {
        return (parent[0], parent[1]);
    }
    let normal = Normal::new(0.0, config.daughter_scatter).expect("valid scatter");
    // Redraw until the daughter lands inside the area; parents are
    // interior points so this terminates quickly.
    for _ in 0..100_000 {
        let x = parent[0] + normal.sample(rng);
        let y = parent[1] + normal.sample(rng);
        if inside(x, y, config.area_side) {
            return (x, y);
        }
    }
    (
        parent[0].clamp(0.0, config.area_side),
        parent[1].clamp(0.0, config.area_side),
    )
}

/// Places gateway stations on the area boundary.
///
/// Four gateways go to the rectangle corners; other counts are spread
/// evenly along the boundary perimeter starting from the origin.
pub fn place_mbs_corners(
    area_side: f64,
    mbs_count: usize,
    mbs_height: f64,
) -> Result<Vec<GatewayStation>> {
    if mbs_count < 1 {
        return Err(Error::Config("mbs_count must be at least 1".into()));
    }
    let s = area_side;
    let positions: Vec<[f64; 2]> = if mbs_count == 4 {
        vec![[0.0, 0.0], [0.0, s], [s, 0.0], [s, s]]
    } else {
        (0..mbs_count)
            .map(|i| perimeter_point(s, i as f64 * 4.0 * s / mbs_count as f64))
            .collect()
    };
    Ok(positions
        .into_iter()
        .enumerate()
        .map(|(id, p)| GatewayStation {
            id,
            x: p[0],
            y: p[1],
            h: mbs_height,
        })
        .collect())
}

/// Maps a perimeter arc length (counter-clockwise from the origin) to a
/// boundary point of the `s`-sided square.
fn perimeter_point(s: f64, t: f64) -> [f64; 2] {
    let t = t.rem_euclid(4.0 * s);
    if t < s {
        [t, 0.0]
    } else if t < 2.0 * s {
        [s, t - s]
    } else if t < 3.0 * s {
        [3.0 * s - t, s]
    } else {
        [0.0, 4.0 * s - t]
    }
}

// --- Text format -----------------------------------------------------------
//
// Line-oriented, fixed field order:
//
//   dbsnet-scenario v1
//   area_side <m>
//   seed <u64>
//   parent_intensity <per km²>
//   daughters_per_parent <mean>
//   daughter_scatter <m>
//   load_per_gn <Mbps>
//   mbs_height <m>
//   gn_count <U>
//   mbs_count <B>
//   forced_parent <x> <y>        (zero or more)
//   gn <id> <x> <y> <load>       (exactly U)
//   mbs <id> <x> <y> <h>         (exactly B)
//
// Floats use Rust's shortest round-trip formatting, so save → load is
// lossless.

const MAGIC: &str = "dbsnet-scenario v1";

pub fn scenario_to_string(s: &Scenario) -> String {
    let mut out = String::new();
    let c = &s.config;
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "area_side {}", c.area_side);
    let _ = writeln!(out, "seed {}", s.seed);
    let _ = writeln!(out, "parent_intensity {}", c.parent_intensity);
    let _ = writeln!(out, "daughters_per_parent {}", c.daughters_per_parent);
    let _ = writeln!(out, "daughter_scatter {}", c.daughter_scatter);
    let _ = writeln!(out, "load_per_gn {}", c.load_per_gn);
    let _ = writeln!(out, "mbs_height {}", c.mbs_height);
    let _ = writeln!(out, "gn_count {}", s.nodes.len());
    let _ = writeln!(out, "mbs_count {}", s.gateways.len());
    for p in &c.forced_parents {
        let _ = writeln!(out, "forced_parent {} {}", p[0], p[1]);
    }
    for n in &s.nodes {
        let _ = writeln!(out, "gn {} {} {} {}", n.id, n.x, n.y, n.load);
    }
    for g in &s.gateways {
        let _ = writeln!(out, "mbs {} {} {} {}", g.id, g.x, g.y, g.h);
    }
    out
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario_to_string(s))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    scenario_from_str(&text)
}

struct LineReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    peeked: Option<(usize, &'a str)>,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        LineReader {
            lines: text.lines().enumerate(),
            peeked: None,
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.peeked.take().or_else(|| self.lines.next())
    }

    fn peek(&mut self) -> Option<(usize, &'a str)> {
        if self.peeked.is_none() {
            self.peeked = self.lines.next();
        }
        self.peeked
    }

    fn expect_kv(&mut self, key: &str) -> Result<(usize, Vec<String>)> {
        match self.next() {
            None => Err(Error::parse(0, format!("missing `{key}` record"))),
            Some((idx, line)) => {
                let line_no = idx + 1;
                let mut parts = line.split_whitespace();
                match parts.next() {
                    Some(k) if k == key => {
                        Ok((line_no, parts.map(|p| p.to_string()).collect()))
                    }
                    Some(other) => Err(Error::parse(
                        line_no,
                        format!("expected `{key}`, found `{other}`"),
                    )),
                    None => Err(Error::parse(line_no, format!("expected `{key}` record"))),
                }
            }
        }
    }
}

fn parse_f64(line: usize, field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("field `{field}`: invalid number `{raw}`")))
}

fn parse_usize(line: usize, field: &str, raw: &str) -> Result<usize> {
    raw.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("field `{field}`: invalid integer `{raw}`")))
}

fn scalar(line: usize, key: &str, fields: &[String]) -> Result<f64> {
    if fields.len() != 1 {
        return Err(Error::parse(
            line,
            format!("`{key}` takes exactly one value, found {}", fields.len()),
        ));
    }
    parse_f64(line, key, &fields[0])
}

pub fn scenario_from_str(text: &str) -> Result<Scenario> {
    let mut reader = LineReader::new(text);
    match reader.next() {
        Some((_, line)) if line.trim() == MAGIC => {}
        Some((idx, line)) => {
            return Err(Error::parse(idx + 1, format!("bad header `{line}`")));
        }
        None => return Err(Error::parse(1, "empty file")),
    }

    let (l, v) = reader.expect_kv("area_side")?;
    let area_side = scalar(l, "area_side", &v)?;
    let (l, v) = reader.expect_kv("seed")?;
    if v.len() != 1 {
        return Err(Error::parse(l, "`seed` takes exactly one value"));
    }
    let seed = v[0]
        .parse::<u64>()
        .map_err(|_| Error::parse(l, format!("field `seed`: invalid integer `{}`", v[0])))?;
    let (l, v) = reader.expect_kv("parent_intensity")?;
    let parent_intensity = scalar(l, "parent_intensity", &v)?;
    let (l, v) = reader.expect_kv("daughters_per_parent")?;
    let daughters_per_parent = scalar(l, "daughters_per_parent", &v)?;
    let (l, v) = reader.expect_kv("daughter_scatter")?;
    let daughter_scatter = scalar(l, "daughter_scatter", &v)?;
    let (l, v) = reader.expect_kv("load_per_gn")?;
    let load_per_gn = scalar(l, "load_per_gn", &v)?;
    let (l, v) = reader.expect_kv("mbs_height")?;
    let mbs_height = scalar(l, "mbs_height", &v)?;
    let (l, v) = reader.expect_kv("gn_count")?;
    if v.len() != 1 {
        return Err(Error::parse(l, "`gn_count` takes exactly one value"));
    }
    let gn_count = parse_usize(l, "gn_count", &v[0])?;
    let (l, v) = reader.expect_kv("mbs_count")?;
    if v.len() != 1 {
        return Err(Error::parse(l, "`mbs_count` takes exactly one value"));
    }
    let mbs_count = parse_usize(l, "mbs_count", &v[0])?;

    let mut forced_parents = Vec::new();
    while let Some((idx, line)) = reader.peek() {
        if line.split_whitespace().next() == Some("forced_parent") {
            reader.next();
            let line_no = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().skip(1).collect();
            if fields.len() != 2 {
                return Err(Error::parse(line_no, "`forced_parent` takes x y"));
            }
            forced_parents.push([
                parse_f64(line_no, "x", fields[0])?,
                parse_f64(line_no, "y", fields[1])?,
            ]);
        } else {
            break;
        }
    }

    let mut nodes = Vec::with_capacity(gn_count);
    for _ in 0..gn_count {
        let (l, v) = reader.expect_kv("gn")?;
        if v.len() != 4 {
            return Err(Error::parse(l, "`gn` takes id x y load"));
        }
        let node = GroundNode {
            id: parse_usize(l, "id", &v[0])?,
            x: parse_f64(l, "x", &v[1])?,
            y: parse_f64(l, "y", &v[2])?,
            load: parse_f64(l, "load", &v[3])?,
        };
        if node.load <= 0.0 {
            return Err(Error::Validation(format!(
                "gn {} has non-positive load {}",
                node.id, node.load
            )));
        }
        if !inside(node.x, node.y, area_side) {
            return Err(Error::Validation(format!(
                "gn {} at ({}, {}) lies outside the area",
                node.id, node.x, node.y
            )));
        }
        nodes.push(node);
    }

    let mut gateways = Vec::with_capacity(mbs_count);
    for _ in 0..mbs_count {
        let (l, v) = reader.expect_kv("mbs")?;
        if v.len() != 4 {
            return Err(Error::parse(l, "`mbs` takes id x y h"));
        }
        gateways.push(GatewayStation {
            id: parse_usize(l, "id", &v[0])?,
            x: parse_f64(l, "x", &v[1])?,
            y: parse_f64(l, "y", &v[2])?,
            h: parse_f64(l, "h", &v[3])?,
        });
    }

    if let Some((idx, line)) = reader.next() {
        if !line.trim().is_empty() {
            return Err(Error::parse(idx + 1, format!("unexpected record `{line}`")));
        }
    }

    Ok(Scenario {
        nodes,
        gateways,
        config: PcpConfig {
            area_side,
            parent_intensity,
            daughters_per_parent,
            daughter_scatter,
            load_per_gn,
            mbs_count,
            mbs_height,
            forced_parents,
            seed,
        },
        seed,
    })
}
