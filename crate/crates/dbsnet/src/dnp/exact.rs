//! Exact and sampling baselines for small chain-partition instances.

use serde::Serialize;

use super::fitness::{evaluate, Solution};
use super::genome::Genome;
use super::graph::BackhaulGraph;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Number of distinct genomes for `m` drones and `b` gateways:
/// `m! * (m + 1)^(b - 1)`. `None` on overflow.
pub fn genome_space_size(m: usize, b: usize) -> Option<u64> {
    if b == 0 {
        return None;
    }
    let mut size: u64 = 1;
    for k in 1..=m as u64 {
        size = size.checked_mul(k)?;
    }
    for _ in 1..b {
        size = size.checked_mul(m as u64 + 1)?;
    }
    Some(size)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationResult {
    /// Best valid solution by raw node surplus; lexicographically
    /// smallest genome on ties.
    pub best: Option<Solution>,
    /// Number of genomes evaluated.
    pub evaluated: u64,
}

const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Evaluates every genome in the space. Refuses instances larger than
/// ten million genomes.
pub fn exhaustive_enumerate(graph: &BackhaulGraph) -> Result<EnumerationResult> {
    let m = graph.dbs_count;
    let b = graph.mbs_count;
    match genome_space_size(m, b) {
        Some(size) if size <= ENUMERATION_LIMIT => {}
        _ => {
            return Err(Error::Infeasible(format!(
                "genome space for {m} drones and {b} gateways exceeds {ENUMERATION_LIMIT}"
            )))
        }
    }

    let mut best: Option<(Solution, Genome)> = None;
    let mut evaluated = 0u64;
    let mut perm: Vec<usize> = (0..m).collect();
    // Nondecreasing gateway insertion points in 0..=m, one per
    // non-terminal gateway; iterated in lexicographic order so the
    // first best encountered is the lexicographically smallest genome.
    let mut points = vec![0usize; b - 1];
    loop {
        loop {
            let genome = assemble(&perm, &points, m, b);
            let sol = evaluate(graph, &genome);
            evaluated += 1;
            if sol.valid
                && best
                    .as_ref()
                    .is_none_or(|(cur, _)| sol.f_node > cur.f_node + 1e-12)
            {
                best = Some((sol, genome));
            }
            if !advance_points(&mut points, m) {
                break;
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
        points.fill(0);
    }
    Ok(EnumerationResult {
        best: best.map(|(s, _)| s),
        evaluated,
    })
}

/// Uniform random search with a fixed evaluation budget; same
/// reporting contract as the GA but with no learning.
pub fn exact_sampler(graph: &BackhaulGraph, budget: usize, seed: u64) -> EnumerationResult {
    let mut rng = rng_from_seed(seed);
    let mut best: Option<Solution> = None;
    for _ in 0..budget {
        let genome = Genome::random(graph.dbs_count, graph.mbs_count, &mut rng);
        let sol = evaluate(graph, &genome);
        if sol.valid && best.as_ref().is_none_or(|cur| sol.f_node > cur.f_node) {
            best = Some(sol);
        }
    }
    EnumerationResult {
        best,
        evaluated: budget as u64,
    }
}

fn assemble(perm: &[usize], points: &[usize], m: usize, b: usize) -> Genome {
    let mut genes = Vec::with_capacity(m + b);
    let mut next_mbs = m;
    let mut point_iter = points.iter().peekable();
    for i in 0..=m {
        while point_iter.peek() == Some(&&i) {
            point_iter.next();
            genes.push(next_mbs);
            next_mbs += 1;
        }
        if i < m {
            genes.push(perm[i]);
        }
    }
    genes.push(m + b - 1);
    Genome::new(genes, m, b).expect("enumeration assembles valid genomes")
}

/// Advances a nondecreasing tuple over `0..=m` in lexicographic order.
fn advance_points(points: &mut [usize], m: usize) -> bool {
    for i in (0..points.len()).rev() {
        if points[i] < m {
            points[i] += 1;
            for j in i + 1..points.len() {
                points[j] = points[i];
            }
            return true;
        }
    }
    false
}

/// In-place next lexicographic permutation; false after the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let Some(i) = (0..perm.len() - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let j = (i + 1..perm.len())
        .rev()
        .find(|&j| perm[j] > perm[i])
        .expect("pivot guarantees a successor");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}
