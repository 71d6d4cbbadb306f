//! Surplus-based fitness for decoded chain partitions.
//!
//! Each chain is walked from the far end toward its gateway. The link
//! leaving position `r` must carry the loads of the first `r` drones,
//! so its residual is the link rate minus that running load. Edge
//! fitness sums residuals as-is; node fitness sums per-position prefix
//! minima, crediting each drone with the tightest link between it and
//! the gateway. Negative residuals are handled by one of three penalty
//! regimes.

use std::fmt::Write as _;

use serde::Serialize;

use super::genome::Genome;
use super::graph::BackhaulGraph;

/// How negative residual terms enter a fitness sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyMode {
    /// Negative terms are excluded from the sum.
    None,
    /// A large constant is subtracted once if any term is negative;
    /// negative terms themselves are excluded.
    Value,
    /// Negative terms enter the sum unchanged.
    EdgeDeficit,
}

/// Which residual aggregate drives selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitnessBasis {
    Edge,
    Node,
}

/// A (basis, penalty) pair used for selection; solution quality is
/// always reported as raw node surplus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GaSetting {
    pub basis: FitnessBasis,
    pub penalty: PenaltyMode,
}

impl GaSetting {
    pub const ALL: [GaSetting; 6] = [
        GaSetting { basis: FitnessBasis::Edge, penalty: PenaltyMode::None },
        GaSetting { basis: FitnessBasis::Edge, penalty: PenaltyMode::Value },
        GaSetting { basis: FitnessBasis::Edge, penalty: PenaltyMode::EdgeDeficit },
        GaSetting { basis: FitnessBasis::Node, penalty: PenaltyMode::None },
        GaSetting { basis: FitnessBasis::Node, penalty: PenaltyMode::Value },
        GaSetting { basis: FitnessBasis::Node, penalty: PenaltyMode::EdgeDeficit },
    ];

    /// Short tag: `E`/`N` for the basis, then `NP`/`VP`/`EP` for the
    /// penalty (none, value, edge-deficit).
    pub fn tag(&self) -> &'static str {
        match (self.basis, self.penalty) {
            (FitnessBasis::Edge, PenaltyMode::None) => "ENP",
            (FitnessBasis::Edge, PenaltyMode::Value) => "EVP",
            (FitnessBasis::Edge, PenaltyMode::EdgeDeficit) => "EEP",
            (FitnessBasis::Node, PenaltyMode::None) => "NNP",
            (FitnessBasis::Node, PenaltyMode::Value) => "NVP",
            (FitnessBasis::Node, PenaltyMode::EdgeDeficit) => "NEP",
        }
    }

    pub fn from_tag(tag: &str) -> Option<GaSetting> {
        GaSetting::ALL.into_iter().find(|s| s.tag() == tag)
    }
}

/// A decoded and scored candidate design.
#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    /// Full node sequences, one per gateway, each ending in its
    /// gateway id.
    pub paths: Vec<Vec<usize>>,
    /// Per-link residuals in chain order, concatenated across chains.
    pub residuals: Vec<f64>,
    /// Per-drone prefix-minimum residuals, same layout as `residuals`.
    pub node_surplus: Vec<f64>,
    /// Raw node fitness: sum of `node_surplus`.
    pub f_node: f64,
    /// Raw edge fitness: sum of `residuals`.
    pub f_edge: f64,
    /// True when every residual is nonnegative.
    pub valid: bool,
}

/// Decodes a genome against a graph and computes both raw fitness sums.
pub fn evaluate(graph: &BackhaulGraph, genome: &Genome) -> Solution {
    debug_assert_eq!(genome.dbs_count(), graph.dbs_count);
    debug_assert_eq!(genome.mbs_count(), graph.mbs_count);
    let paths = genome.decode();
    let mut residuals = Vec::with_capacity(graph.dbs_count);
    let mut node_surplus = Vec::with_capacity(graph.dbs_count);
    for path in &paths {
        let mut carried = 0.0;
        let mut tightest = f64::INFINITY;
        for w in path.windows(2) {
            carried += graph.loads[w[0]];
            let residual = graph.rates[w[0]][w[1]] - carried;
            tightest = tightest.min(residual);
            residuals.push(residual);
            node_surplus.push(tightest);
        }
    }
    let f_edge = residuals.iter().sum();
    let f_node = node_surplus.iter().sum();
    let valid = residuals.iter().all(|&r| r >= 0.0);
    Solution {
        paths,
        residuals,
        node_surplus,
        f_node,
        f_edge,
        valid,
    }
}

/// Penalty constant: total rate over all links plus one, strictly
/// larger than any achievable fitness so penalized genomes rank below
/// every unpenalized one.
pub fn penalty_constant(graph: &BackhaulGraph) -> f64 {
    graph.total_rate() + 1.0
}

/// Applies a penalty regime to a slice of fitness terms.
pub fn score_terms(terms: &[f64], mode: PenaltyMode, p_const: f64) -> f64 {
    match mode {
        PenaltyMode::None => terms.iter().filter(|&&t| t >= 0.0).sum(),
        PenaltyMode::EdgeDeficit => terms.iter().sum(),
        PenaltyMode::Value => {
            let clean: f64 = terms.iter().filter(|&&t| t >= 0.0).sum();
            if terms.iter().any(|&t| t < 0.0) {
                clean - p_const
            } else {
                clean
            }
        }
    }
}

impl Solution {
    /// Selection fitness under a setting.
    pub fn selection_fitness(&self, setting: GaSetting, p_const: f64) -> f64 {
        let terms = match setting.basis {
            FitnessBasis::Edge => &self.residuals,
            FitnessBasis::Node => &self.node_surplus,
        };
        score_terms(terms, setting.penalty, p_const)
    }

    /// Human-readable chain listing with residuals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut cursor = 0;
        for path in &self.paths {
            let ids: Vec<String> = path.iter().map(|n| n.to_string()).collect();
            let links = path.len() - 1;
            let res: Vec<String> = self.residuals[cursor..cursor + links]
                .iter()
                .map(|r| format!("{r:.3}"))
                .collect();
            cursor += links;
            let _ = writeln!(out, "chain [{}] residuals [{}]", ids.join(" -> "), res.join(", "));
        }
        let _ = writeln!(
            out,
            "f_node {:.3}  f_edge {:.3}  valid {}",
            self.f_node, self.f_edge, self.valid
        );
        out
    }
}
