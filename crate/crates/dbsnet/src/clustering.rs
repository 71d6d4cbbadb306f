//! Constrained agglomerative clustering for drone placement.
//!
//! Ground nodes start as singleton clusters and are merged bottom-up by
//! centroid (UPGMC) distance. A merge is admitted only when
//!
//! 1. the complete-link distance of the pair stays within the coverage
//!    radius `r_a`, so every member of the merged cluster remains inside
//!    the serving disk regardless of where the centroid lands, and
//! 2. no third cluster that currently neighbors either side would be
//!    left with `n_b` or fewer within-`d_max` neighbors.
//!
//! Exhausting the eligible pairs terminates the run; the surviving
//! centroids become the drone positions. A seeded K-means++ baseline is
//! provided for comparison (it honors neither constraint).
//!
//! Two dissimilarity matrices are carried: `dissim` tracks centroid
//! distances through the Lance–Williams UPGMC recurrence (applied to
//! squared distances, where it is exact), and `cl` tracks the maximum
//! pairwise member distance through the complete-link recurrence.

use std::fmt::Write as _;

use rand::Rng;

use crate::channel::distance_2d;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Hard cap on instance size; the merge loop is cubic in `U`.
pub const MAX_GROUND_NODES: usize = 2000;

/// One active cluster: running centroid plus member ground-node ids.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub centroid: [f64; 2],
    pub members: Vec<usize>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Mutable state of one clustering run.
#[derive(Debug, Clone)]
pub struct ClusterState {
    pub clusters: Vec<Cluster>,
    /// Centroid distances, meters.
    pub dissim: Vec<Vec<f64>>,
    /// Complete-link distances (max member pair distance), meters.
    pub cl: Vec<Vec<f64>>,
    /// Adjacency under `d_max` (strict inequality, zero diagonal).
    pub mask: Vec<Vec<bool>>,
    /// Row sums of `mask`, plus gateway neighbors when enabled.
    pub degree: Vec<usize>,
    pub d_max: f64,
    /// Completed merges.
    pub iteration: usize,
    /// Gateway positions counted into `degree` when
    /// `count_mbs_neighbors` is set.
    mbs_positions: Vec<[f64; 2]>,
    count_mbs_neighbors: bool,
}

/// One row of the merge log.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkageRow {
    /// Active-set index of the first merged cluster at merge time.
    pub merged_a: usize,
    /// Active-set index of the second merged cluster at merge time.
    pub merged_b: usize,
    /// Centroid distance of the pair when merged, meters.
    pub dissimilarity: f64,
    /// Member count of the merged cluster.
    pub new_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementMethod {
    Hc,
    Kmeans,
}

impl PlacementMethod {
    pub fn tag(self) -> &'static str {
        match self {
            PlacementMethod::Hc => "HC",
            PlacementMethod::Kmeans => "KMEANS",
        }
    }
}

/// Drone positions with the ground-node association.
#[derive(Debug, Clone)]
pub struct Placement {
    /// One `(x, y, h)` per drone.
    pub dbs_positions: Vec<[f64; 3]>,
    /// Ground-node ids served by each drone; disjoint across drones.
    pub association: Vec<Vec<usize>>,
    /// Ground nodes covered by no drone disk.
    pub uncovered: Vec<usize>,
    pub method: PlacementMethod,
}

impl Placement {
    pub fn dbs_count(&self) -> usize {
        self.dbs_positions.len()
    }

    /// Per-drone load as the sum of associated ground-node loads.
    pub fn loads(&self, gn_loads: &[f64]) -> Vec<f64> {
        self.association
            .iter()
            .map(|members| members.iter().map(|&n| gn_loads[n]).sum())
            .collect()
    }
}

/// Constraint and geometry knobs of one clustering run.
#[derive(Debug, Clone)]
pub struct HcParams {
    /// Maximum backhaul link distance, meters.
    pub d_max: f64,
    /// Minimum surviving neighbor count protected during merges.
    pub n_b: usize,
    /// Coverage radius bound on cluster diameter; `f64::INFINITY`
    /// disables the fronthaul constraint.
    pub r_a: f64,
    /// Altitude assigned to placed drones, meters.
    pub dbs_height: f64,
    /// Gateway ground positions, used only when
    /// `count_mbs_neighbors` is set.
    pub mbs_positions: Vec<[f64; 2]>,
    /// Count gateways toward the neighbor degree (off by default; the
    /// degree machinery otherwise ranges over clusters only).
    pub count_mbs_neighbors: bool,
}

impl HcParams {
    pub fn new(d_max: f64, n_b: usize, r_a: f64, dbs_height: f64) -> Self {
        HcParams {
            d_max,
            n_b,
            r_a,
            dbs_height,
            mbs_positions: Vec::new(),
            count_mbs_neighbors: false,
        }
    }
}

/// Output of [`run_hc`]: the placement plus the full merge log.
#[derive(Debug, Clone)]
pub struct HcRun {
    pub placement: Placement,
    pub linkage: Vec<LinkageRow>,
    /// Set when the neighbor constraint was unsatisfiable from the
    /// start (`U < n_b + 1`), so no merge was attempted.
    pub constraint_unsatisfiable: bool,
}

impl ClusterState {
    /// Builds the singleton-cluster state: pairwise distances, the
    /// complete-link copy, and the derived adjacency machinery.
    pub fn init(gns: &[[f64; 2]], d_max: f64) -> Result<Self> {
        if gns.is_empty() {
            return Err(Error::Config("clustering requires at least one node".into()));
        }
        if gns.len() > MAX_GROUND_NODES {
            return Err(Error::Config(format!(
                "instance size {} exceeds the {MAX_GROUND_NODES}-node guard",
                gns.len()
            )));
        }
        let u = gns.len();
        let mut dissim = vec![vec![0.0; u]; u];
        for a in 0..u {
            for b in (a + 1)..u {
                let d = distance_2d(gns[a], gns[b]);
                dissim[a][b] = d;
                dissim[b][a] = d;
            }
        }
        let cl = dissim.clone();
        let clusters = gns
            .iter()
            .enumerate()
            .map(|(i, &p)| Cluster {
                centroid: p,
                members: vec![i],
            })
            .collect();
        let mut state = ClusterState {
            clusters,
            dissim,
            cl,
            mask: Vec::new(),
            degree: Vec::new(),
            d_max,
            iteration: 0,
            mbs_positions: Vec::new(),
            count_mbs_neighbors: false,
        };
        state.refresh_adjacency();
        Ok(state)
    }

    pub fn with_gateway_degrees(mut self, mbs_positions: Vec<[f64; 2]>) -> Self {
        self.mbs_positions = mbs_positions;
        self.count_mbs_neighbors = true;
        self.refresh_adjacency();
        self
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    fn refresh_adjacency(&mut self) {
        let n = self.clusters.len();
        self.mask = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                self.mask[a][b] = a != b && self.dissim[a][b] < self.d_max;
            }
        }
        self.degree = (0..n)
            .map(|a| {
                let mut deg = self.mask[a].iter().filter(|&&m| m).count();
                if self.count_mbs_neighbors {
                    deg += self
                        .mbs_positions
                        .iter()
                        .filter(|&&p| distance_2d(self.clusters[a].centroid, p) < self.d_max)
                        .count();
                }
                deg
            })
            .collect();
    }

    /// Checks both merge conditions for the pair `(a, b)`.
    ///
    /// Condition 1 bounds the merged diameter by `r_a` via the
    /// complete-link distance. Condition 2 protects dependents: every
    /// cluster adjacent to `a` or `b` must currently have degree
    /// strictly above `n_b`, since the merge can cost it one neighbor.
    pub fn pair_eligible(&self, a: usize, b: usize, n_b: usize, r_a: f64) -> bool {
        if !(self.cl[a][b] <= r_a) {
            return false;
        }
        for i in 0..self.clusters.len() {
            if i == a || i == b {
                continue;
            }
            if (self.mask[i][a] || self.mask[i][b]) && self.degree[i] <= n_b {
                return false;
            }
        }
        true
    }

    /// All currently mergeable pairs, `a < b`.
    pub fn eligible_pairs(&self, n_b: usize, r_a: f64) -> Vec<(usize, usize)> {
        let n = self.clusters.len();
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.pair_eligible(a, b, n_b, r_a) {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    /// Executes one merge: the minimum-distance eligible pair, ties
    /// broken by lowest `(a, b)`. Returns `None` when no pair is
    /// eligible (termination).
    pub fn merge_step(&mut self, n_b: usize, r_a: f64) -> Option<LinkageRow> {
        let n = self.clusters.len();
        // Scan candidates in ascending distance; filtering before the
        // argmin and taking the first eligible pair are equivalent.
        let mut candidates: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.cl[a][b] <= r_a)
            .collect();
        candidates.sort_by(|&(a1, b1), &(a2, b2)| {
            self.dissim[a1][b1]
                .partial_cmp(&self.dissim[a2][b2])
                .unwrap()
                .then(a1.cmp(&a2))
                .then(b1.cmp(&b2))
        });
        let (a, b) = candidates
            .into_iter()
            .find(|&(a, b)| self.pair_eligible(a, b, n_b, r_a))?;
        Some(self.merge(a, b))
    }

    fn merge(&mut self, a: usize, b: usize) -> LinkageRow {
        debug_assert!(a < b);
        let n = self.clusters.len();
        let (n_a, n_b_size) = (self.clusters[a].size() as f64, self.clusters[b].size() as f64);
        let total = n_a + n_b_size;
        let d_ab = self.dissim[a][b];
        let row = LinkageRow {
            merged_a: a,
            merged_b: b,
            dissimilarity: d_ab,
            new_size: (n_a + n_b_size) as usize,
        };

        // UPGMC recurrence on squared distances (exact for centroids),
        // complete-link recurrence on raw distances.
        let mut new_dissim = vec![0.0; n];
        let mut new_cl = vec![0.0; n];
        for s in 0..n {
            if s == a || s == b {
                continue;
            }
            let das = self.dissim[a][s];
            let dbs = self.dissim[b][s];
            let sq = (n_a / total) * das * das + (n_b_size / total) * dbs * dbs
                - (n_a * n_b_size / (total * total)) * d_ab * d_ab;
            new_dissim[s] = sq.max(0.0).sqrt();
            let (ras, rbs) = (self.cl[a][s], self.cl[b][s]);
            new_cl[s] = 0.5 * (ras + rbs + (ras - rbs).abs());
        }

        // Merged cluster replaces slot a; slot b is compacted away.
        let removed = self.clusters.remove(b);
        let merged = &mut self.clusters[a];
        merged.centroid = [
            (n_a * merged.centroid[0] + n_b_size * removed.centroid[0]) / total,
            (n_a * merged.centroid[1] + n_b_size * removed.centroid[1]) / total,
        ];
        merged.members.extend(removed.members);
        merged.members.sort_unstable();

        for s in 0..n {
            if s == a || s == b {
                continue;
            }
            self.dissim[a][s] = new_dissim[s];
            self.dissim[s][a] = new_dissim[s];
            self.cl[a][s] = new_cl[s];
            self.cl[s][a] = new_cl[s];
        }
        self.dissim[a][a] = 0.0;
        self.cl[a][a] = 0.0;
        remove_index(&mut self.dissim, b);
        remove_index(&mut self.cl, b);

        self.refresh_adjacency();
        self.iteration += 1;
        row
    }
}

fn remove_index(matrix: &mut Vec<Vec<f64>>, idx: usize) {
    matrix.remove(idx);
    for row in matrix.iter_mut() {
        row.remove(idx);
    }
}

/// Runs the constrained clustering to exhaustion and places one drone
/// at every surviving centroid.
pub fn run_hc(gns: &[[f64; 2]], params: &HcParams) -> Result<HcRun> {
    let mut state = ClusterState::init(gns, params.d_max)?;
    if params.count_mbs_neighbors {
        state = state.with_gateway_degrees(params.mbs_positions.clone());
    }

    let constraint_unsatisfiable = params.n_b > 0 && gns.len() < params.n_b + 1;
    let mut linkage = Vec::new();
    if !constraint_unsatisfiable {
        while let Some(row) = state.merge_step(params.n_b, params.r_a) {
            linkage.push(row);
        }
    }

    let dbs_positions: Vec<[f64; 3]> = state
        .clusters
        .iter()
        .map(|c| [c.centroid[0], c.centroid[1], params.dbs_height])
        .collect();
    let association: Vec<Vec<usize>> = state.clusters.iter().map(|c| c.members.clone()).collect();
    Ok(HcRun {
        placement: Placement {
            dbs_positions,
            association,
            uncovered: Vec::new(),
            method: PlacementMethod::Hc,
        },
        linkage,
        constraint_unsatisfiable,
    })
}

/// Replays a merge log against a fresh state and re-verifies that each
/// recorded merge was eligible when it was taken.
pub fn audit_linkage(
    gns: &[[f64; 2]],
    params: &HcParams,
    linkage: &[LinkageRow],
) -> Result<()> {
    let mut state = ClusterState::init(gns, params.d_max)?;
    if params.count_mbs_neighbors {
        state = state.with_gateway_degrees(params.mbs_positions.clone());
    }
    for (step, row) in linkage.iter().enumerate() {
        let (a, b) = (row.merged_a, row.merged_b);
        if b >= state.len() || a >= b {
            return Err(Error::Validation(format!(
                "step {step}: merge indices ({a}, {b}) out of range"
            )));
        }
        if !state.pair_eligible(a, b, params.n_b, params.r_a) {
            return Err(Error::Validation(format!(
                "step {step}: merge ({a}, {b}) violates the eligibility conditions"
            )));
        }
        if (state.dissim[a][b] - row.dissimilarity).abs() > 1e-6 {
            return Err(Error::Validation(format!(
                "step {step}: recorded dissimilarity {} differs from state {}",
                row.dissimilarity, state.dissim[a][b]
            )));
        }
        let replayed = state.merge(a, b);
        if replayed.new_size != row.new_size {
            return Err(Error::Validation(format!(
                "step {step}: recorded size {} differs from replay {}",
                row.new_size, replayed.new_size
            )));
        }
    }
    Ok(())
}

/// Merge log as CSV for dendrogram tooling.
pub fn linkage_to_csv(linkage: &[LinkageRow]) -> String {
    let mut out = String::from("a,b,dissimilarity,new_size\n");
    for row in linkage {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.merged_a, row.merged_b, row.dissimilarity, row.new_size
        );
    }
    out
}

/// K-means with K-means++ seeding (Lloyd iterations), the comparison
/// baseline. Associates every node to its nearest centroid with no
/// coverage-radius enforcement.
pub fn kmeans_pp(gns: &[[f64; 2]], m: usize, seed: u64, dbs_height: f64) -> Result<Placement> {
    Ok(kmeans_pp_with_trace(gns, m, seed, dbs_height)?.0)
}

/// As [`kmeans_pp`], also returning the per-iteration inertia trace.
pub fn kmeans_pp_with_trace(
    gns: &[[f64; 2]],
    m: usize,
    seed: u64,
    dbs_height: f64,
) -> Result<(Placement, Vec<f64>)> {
    if m < 1 || m > gns.len() {
        return Err(Error::Config(format!(
            "kmeans: M = {m} must be in [1, {}]",
            gns.len()
        )));
    }
    let mut rng = rng_from_seed(seed);

    // K-means++ seeding: first centroid uniform, then D² sampling.
    let mut centroids: Vec<[f64; 2]> = Vec::with_capacity(m);
    centroids.push(gns[rng.random_range(0..gns.len())]);
    let mut dist_sq: Vec<f64> = gns
        .iter()
        .map(|&p| {
            let d = distance_2d(p, centroids[0]);
            d * d
        })
        .collect();
    while centroids.len() < m {
        let total: f64 = dist_sq.iter().sum();
        let next = if total <= 0.0 {
            rng.random_range(0..gns.len())
        } else {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = gns.len() - 1;
            for (i, &w) in dist_sq.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        };
        centroids.push(gns[next]);
        for (i, &p) in gns.iter().enumerate() {
            let d = distance_2d(p, *centroids.last().unwrap());
            dist_sq[i] = dist_sq[i].min(d * d);
        }
    }

    let mut assignment = vec![0usize; gns.len()];
    let mut inertia_trace = Vec::new();
    for _ in 0..300 {
        let mut inertia = 0.0;
        for (i, &p) in gns.iter().enumerate() {
            let (best, best_d) = centroids
                .iter()
                .enumerate()
                .map(|(j, &c)| (j, distance_2d(p, c)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .unwrap();
            assignment[i] = best;
            inertia += best_d * best_d;
        }
        inertia_trace.push(inertia);

        let mut sums = vec![[0.0f64; 2]; m];
        let mut counts = vec![0usize; m];
        for (i, &p) in gns.iter().enumerate() {
            sums[assignment[i]][0] += p[0];
            sums[assignment[i]][1] += p[1];
            counts[assignment[i]] += 1;
        }
        let mut movement: f64 = 0.0;
        for j in 0..m {
            if counts[j] == 0 {
                continue; // empty cluster keeps its centroid
            }
            let new = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
            movement = movement.max(distance_2d(centroids[j], new));
            centroids[j] = new;
        }
        if movement < 1e-6 {
            break;
        }
    }

    let mut association = vec![Vec::new(); m];
    for (i, &j) in assignment.iter().enumerate() {
        association[j].push(i);
    }
    Ok((
        Placement {
            dbs_positions: centroids
                .iter()
                .map(|&c| [c[0], c[1], dbs_height])
                .collect(),
            association,
            uncovered: Vec::new(),
            method: PlacementMethod::Kmeans,
        },
        inertia_trace,
    ))
}

/// Re-associates ground nodes to an externally supplied placement: each
/// node goes to the nearest drone whose disk covers it (strictly within
/// `r_a`); ties go to the lower-indexed drone. Nodes covered by no disk
/// are reported uncovered.
pub fn associate(
    dbs_positions: &[[f64; 3]],
    gns: &[[f64; 2]],
    r_a: f64,
) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut association = vec![Vec::new(); dbs_positions.len()];
    let mut uncovered = Vec::new();
    for (n, &p) in gns.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (j, dbs) in dbs_positions.iter().enumerate() {
            let d = distance_2d(p, [dbs[0], dbs[1]]);
            if d < r_a && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => association[j].push(n),
            None => uncovered.push(n),
        }
    }
    (association, uncovered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_points(n: usize, side: f64, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| [rng.random_range(0.0..side), rng.random_range(0.0..side)])
            .collect()
    }

    fn brute_centroid(gns: &[[f64; 2]], members: &[usize]) -> [f64; 2] {
        let n = members.len() as f64;
        let (sx, sy) = members
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &i| (sx + gns[i][0], sy + gns[i][1]));
        [sx / n, sy / n]
    }

    fn brute_max_pair(gns: &[[f64; 2]], a: &[usize], b: &[usize]) -> f64 {
        let mut max = 0.0f64;
        for &i in a {
            for &j in b {
                max = max.max(distance_2d(gns[i], gns[j]));
            }
        }
        max
    }

    #[test]
    fn init_two_nodes() {
        let gns = vec![[0.0, 0.0], [3.0, 0.0]];
        let state = ClusterState::init(&gns, 5.0).unwrap();
        assert_eq!(state.dissim, vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
        assert_eq!(state.cl, state.dissim);
        assert_eq!(state.degree, vec![1, 1]);

        let state = ClusterState::init(&gns, 2.0).unwrap();
        assert_eq!(state.degree, vec![0, 0]);
    }

    #[test]
    fn relaxed_constraints_make_all_pairs_eligible() {
        let gns = random_points(8, 1000.0, 3);
        let state = ClusterState::init(&gns, 500.0).unwrap();
        assert_eq!(state.eligible_pairs(0, f64::INFINITY).len(), 8 * 7 / 2);
    }

    #[test]
    fn tight_radius_leaves_no_pairs() {
        let gns = random_points(6, 1000.0, 4);
        let state = ClusterState::init(&gns, 500.0).unwrap();
        assert!(state.eligible_pairs(0, 1e-9).is_empty());
    }

    #[test]
    fn dependent_cluster_blocks_merge() {
        // c neighbors only a; with n_b = 1, merging a elsewhere could
        // strand c, so the pair (a, b) must be excluded.
        let gns = vec![[0.0, 0.0], [500.0, 0.0], [-900.0, 0.0]];
        let state = ClusterState::init(&gns, 1000.0).unwrap();
        assert_eq!(state.degree, vec![2, 1, 1]);
        assert!(!state.pair_eligible(0, 1, 1, f64::INFINITY));
        assert!(!state.pair_eligible(0, 2, 1, f64::INFINITY));
        assert!(state.eligible_pairs(0, f64::INFINITY).len() == 3);
    }

    #[test]
    fn first_merge_is_closest_pair() {
        let gns = vec![[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]];
        let mut state = ClusterState::init(&gns, f64::INFINITY).unwrap();
        let row = state.merge_step(0, f64::INFINITY).unwrap();
        assert_eq!((row.merged_a, row.merged_b), (0, 1));
        assert_eq!(row.dissimilarity, 1.0);
        assert_eq!(row.new_size, 2);
        assert_eq!(state.len(), 2);
    }

    #[test]
    fn upgmc_and_cl_match_brute_force() {
        let gns = random_points(40, 2000.0, 9);
        let mut state = ClusterState::init(&gns, f64::INFINITY).unwrap();
        while state.merge_step(0, f64::INFINITY).is_some() {
            let n = state.len();
            for a in 0..n {
                let ca = brute_centroid(&gns, &state.clusters[a].members);
                let stored = state.clusters[a].centroid;
                assert!(distance_2d(ca, stored) < 1e-6);
                for b in (a + 1)..n {
                    let cb = brute_centroid(&gns, &state.clusters[b].members);
                    let expect = distance_2d(ca, cb);
                    assert!(
                        (state.dissim[a][b] - expect).abs() < 1e-6,
                        "UPGMC drift: {} vs {expect}",
                        state.dissim[a][b]
                    );
                    let max_pair = brute_max_pair(
                        &gns,
                        &state.clusters[a].members,
                        &state.clusters[b].members,
                    );
                    assert!(
                        (state.cl[a][b] - max_pair).abs() < 1e-6,
                        "CL drift: {} vs {max_pair}",
                        state.cl[a][b]
                    );
                }
            }
        }
        assert_eq!(state.len(), 1);
    }

    #[test]
    fn cluster_count_tracks_merges() {
        let gns = random_points(25, 1500.0, 11);
        let params = HcParams::new(f64::INFINITY, 0, f64::INFINITY, 60.0);
        let run = run_hc(&gns, &params).unwrap();
        assert_eq!(run.placement.dbs_count(), gns.len() - run.linkage.len());
        assert_eq!(run.placement.dbs_count(), 1);
    }

    #[test]
    fn coincident_nodes_collapse_to_one() {
        let gns = vec![[5.0, 5.0]; 7];
        let params = HcParams::new(f64::INFINITY, 0, f64::INFINITY, 60.0);
        let run = run_hc(&gns, &params).unwrap();
        assert_eq!(run.placement.dbs_count(), 1);
        assert_eq!(run.placement.association[0].len(), 7);
    }

    #[test]
    fn zero_radius_blocks_all_merges() {
        let gns = random_points(10, 1000.0, 12);
        let params = HcParams::new(1000.0, 0, 0.0, 60.0);
        let run = run_hc(&gns, &params).unwrap();
        assert_eq!(run.placement.dbs_count(), 10);
        assert!(run.linkage.is_empty());
    }

    #[test]
    fn unsatisfiable_neighbor_constraint_terminates_immediately() {
        let gns = random_points(3, 100.0, 13);
        let params = HcParams::new(1000.0, 5, f64::INFINITY, 60.0);
        let run = run_hc(&gns, &params).unwrap();
        assert!(run.constraint_unsatisfiable);
        assert_eq!(run.placement.dbs_count(), 3);
    }

    #[test]
    fn coverage_invariant_members_inside_radius() {
        for seed in 0..5 {
            let gns = random_points(60, 4000.0, 100 + seed);
            let r_a = 600.0;
            let params = HcParams::new(1500.0, 1, r_a, 60.0);
            let run = run_hc(&gns, &params).unwrap();
            for (j, members) in run.placement.association.iter().enumerate() {
                let c = run.placement.dbs_positions[j];
                for &n in members {
                    assert!(distance_2d(gns[n], [c[0], c[1]]) <= r_a + 1e-6);
                }
            }
        }
    }

    #[test]
    fn audit_accepts_own_log_and_rejects_tampering() {
        let gns = random_points(30, 2000.0, 21);
        let params = HcParams::new(1200.0, 1, 800.0, 60.0);
        let run = run_hc(&gns, &params).unwrap();
        audit_linkage(&gns, &params, &run.linkage).unwrap();

        if run.linkage.len() >= 2 {
            let mut tampered = run.linkage.clone();
            tampered[0].dissimilarity += 5.0;
            assert!(audit_linkage(&gns, &params, &tampered).is_err());
        }
    }

    #[test]
    fn merge_drops_third_party_degree_by_at_most_one() {
        let gns = random_points(50, 3000.0, 31);
        let mut state = ClusterState::init(&gns, 1000.0).unwrap();
        loop {
            let before = state.degree.clone();
            let n_before = state.len();
            let Some(row) = state.merge_step(1, f64::INFINITY) else {
                break;
            };
            // Map old indices to new: merged slot a keeps its index,
            // indices above b shift down by one.
            for old in 0..n_before {
                if old == row.merged_a || old == row.merged_b {
                    continue;
                }
                let new = if old > row.merged_b { old - 1 } else { old };
                if before[old] > 1 {
                    assert!(
                        state.degree[new] >= before[old] - 1,
                        "degree fell from {} to {}",
                        before[old],
                        state.degree[new]
                    );
                }
            }
        }
    }

    #[test]
    fn kmeans_degenerate_cases() {
        let gns = random_points(12, 500.0, 41);
        let (p, trace) = kmeans_pp_with_trace(&gns, 12, 1, 60.0).unwrap();
        assert_eq!(p.dbs_count(), 12);
        assert!(trace.last().unwrap() < &1e-9);

        let (p, _) = kmeans_pp_with_trace(&gns, 1, 1, 60.0).unwrap();
        let mean = brute_centroid(&gns, &(0..12).collect::<Vec<_>>());
        assert!(distance_2d([p.dbs_positions[0][0], p.dbs_positions[0][1]], mean) < 1e-6);

        assert!(kmeans_pp(&gns, 13, 1, 60.0).is_err());
        assert!(kmeans_pp(&gns, 0, 1, 60.0).is_err());
    }

    #[test]
    fn kmeans_inertia_nonincreasing() {
        let gns = random_points(120, 5000.0, 5);
        let (_, trace) = kmeans_pp_with_trace(&gns, 8, 3, 60.0).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn associate_tie_break_and_uncovered() {
        let dbs = vec![[0.0, 0.0, 60.0], [10.0, 0.0, 60.0]];
        let gns = vec![[5.0, 0.0], [100.0, 0.0]];
        let (assoc, uncovered) = associate(&dbs, &gns, 8.0);
        assert_eq!(assoc[0], vec![0]); // equidistant → lower index
        assert!(assoc[1].is_empty());
        assert_eq!(uncovered, vec![1]);
    }

    #[test]
    fn hc_association_has_no_uncovered_under_finite_radius() {
        let gns = random_points(40, 3000.0, 51);
        let params = HcParams::new(1500.0, 0, 500.0, 60.0);
        let run = run_hc(&gns, &params).unwrap();
        let (_, uncovered) = associate(
            &run.placement.dbs_positions,
            &gns,
            500.0 + 1e-6,
        );
        assert!(uncovered.is_empty());
    }

    #[test]
    fn linkage_csv_shape() {
        let rows = vec![LinkageRow {
            merged_a: 0,
            merged_b: 3,
            dissimilarity: 2.5,
            new_size: 4,
        }];
        assert_eq!(linkage_to_csv(&rows), "a,b,dissimilarity,new_size\n0,3,2.5,4\n");
    }
}
