//! Chain-partition genome encoding and the variation operators.
//!
//! A genome is a sequence over all drone ids `0..m` and gateway ids
//! `m..m + b`, each exactly once. Gateway genes appear in ascending id
//! order and the highest gateway closes the sequence, so splitting at
//! gateway genes yields one (possibly empty) drone chain per gateway.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Genome {
    genes: Vec<usize>,
    dbs_count: usize,
    mbs_count: usize,
}

impl Genome {
    pub fn new(genes: Vec<usize>, dbs_count: usize, mbs_count: usize) -> Result<Self> {
        let genome = Genome {
            genes,
            dbs_count,
            mbs_count,
        };
        genome.check_invariants()?;
        Ok(genome)
    }

    pub fn genes(&self) -> &[usize] {
        &self.genes
    }

    pub fn dbs_count(&self) -> usize {
        self.dbs_count
    }

    pub fn mbs_count(&self) -> usize {
        self.mbs_count
    }

    fn is_mbs(&self, gene: usize) -> bool {
        gene >= self.dbs_count
    }

    /// Verifies the three structural invariants: permutation of all
    /// ids, ascending gateway order, terminal gateway last.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.dbs_count + self.mbs_count;
        if self.genes.len() != n {
            return Err(Error::Validation(format!(
                "genome length {} != {n}",
                self.genes.len()
            )));
        }
        let mut seen = vec![false; n];
        for &g in &self.genes {
            if g >= n || seen[g] {
                return Err(Error::Validation(format!("gene {g} repeated or out of range")));
            }
            seen[g] = true;
        }
        let mbs_genes: Vec<usize> = self
            .genes
            .iter()
            .copied()
            .filter(|&g| self.is_mbs(g))
            .collect();
        if !mbs_genes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation("gateway genes out of ascending order".into()));
        }
        match self.genes.last() {
            Some(&last) if last == n - 1 => Ok(()),
            _ => Err(Error::Validation("genome must end with the terminal gateway".into())),
        }
    }

    /// Splits the genome into one full sequence per gateway: the drone
    /// run preceding gateway `k`, terminated by gateway `k` itself. A
    /// run of length zero marks an unused gateway.
    pub fn decode(&self) -> Vec<Vec<usize>> {
        let mut paths = Vec::with_capacity(self.mbs_count);
        let mut current = Vec::new();
        for &g in &self.genes {
            current.push(g);
            if self.is_mbs(g) {
                paths.push(std::mem::take(&mut current));
            }
        }
        paths
    }

    /// Rebuilds a genome from decoded sequences (inverse of [`decode`]).
    ///
    /// [`decode`]: Genome::decode
    pub fn encode(paths: &[Vec<usize>], dbs_count: usize, mbs_count: usize) -> Result<Self> {
        let genes = paths.iter().flatten().copied().collect();
        Genome::new(genes, dbs_count, mbs_count)
    }

    /// Draws a uniform random genome: a drone permutation with the
    /// non-terminal gateways inserted at independently uniform points
    /// (repeats allowed), terminal gateway appended.
    pub fn random<R: Rng>(dbs_count: usize, mbs_count: usize, rng: &mut R) -> Self {
        assert!(mbs_count >= 1);
        let mut perm: Vec<usize> = (0..dbs_count).collect();
        perm.shuffle(rng);
        let mut points: Vec<usize> = (0..mbs_count.saturating_sub(1))
            .map(|_| rng.random_range(0..=dbs_count))
            .collect();
        points.sort_unstable();

        let mut genes = Vec::with_capacity(dbs_count + mbs_count);
        let mut next_mbs = dbs_count;
        let mut point_iter = points.iter().peekable();
        for i in 0..=dbs_count {
            while point_iter.peek() == Some(&&i) {
                point_iter.next();
                genes.push(next_mbs);
                next_mbs += 1;
            }
            if i < dbs_count {
                genes.push(perm[i]);
            }
        }
        genes.push(dbs_count + mbs_count - 1);
        Genome {
            genes,
            dbs_count,
            mbs_count,
        }
    }

    /// Swap mutation: two distinct non-terminal positions are
    /// exchanged; gateway genes are then re-sorted in place so the
    /// ascending-order invariant survives boundary-moving swaps.
    pub fn mutate<R: Rng>(&self, rng: &mut R) -> Self {
        let swappable = self.genes.len() - 1; // terminal stays put
        if swappable < 2 {
            return self.clone();
        }
        let mut genes = self.genes.clone();
        let i = rng.random_range(0..swappable);
        let j = loop {
            let j = rng.random_range(0..swappable);
            if j != i {
                break j;
            }
        };
        genes.swap(i, j);

        let mbs_positions: Vec<usize> = (0..genes.len())
            .filter(|&p| genes[p] >= self.dbs_count)
            .collect();
        let mut mbs_values: Vec<usize> = mbs_positions.iter().map(|&p| genes[p]).collect();
        mbs_values.sort_unstable();
        for (&p, &v) in mbs_positions.iter().zip(&mbs_values) {
            genes[p] = v;
        }
        Genome {
            genes,
            dbs_count: self.dbs_count,
            mbs_count: self.mbs_count,
        }
    }

    /// Path-level crossover. A nonempty subset of the leader's chains
    /// is kept verbatim; the remaining gateway slots take the
    /// follower's chains, repaired left to right: drones already used
    /// are replaced by unused ones in ascending id, surplus duplicates
    /// are dropped, and any drones still missing are appended to the
    /// shortest follower-sourced chain.
    pub fn crossover<R: Rng>(leader: &Self, follower: &Self, rng: &mut R) -> Result<Self> {
        if leader.dbs_count != follower.dbs_count || leader.mbs_count != follower.mbs_count {
            return Err(Error::Validation("crossover parents have different shapes".into()));
        }
        let b = leader.mbs_count;
        let mut from_leader: Vec<bool> = (0..b).map(|_| rng.random_bool(0.5)).collect();
        if from_leader.iter().all(|&t| !t) {
            let forced = rng.random_range(0..b);
            from_leader[forced] = true;
        }

        let leader_paths = leader.decode();
        let follower_paths = follower.decode();
        // Work on drone runs only; gateway ids are re-attached at the end.
        let mut runs: Vec<Vec<usize>> = (0..b)
            .map(|p| {
                let src = if from_leader[p] {
                    &leader_paths[p]
                } else {
                    &follower_paths[p]
                };
                src[..src.len() - 1].to_vec()
            })
            .collect();

        let mut used = vec![false; leader.dbs_count];
        for (p, run) in runs.iter().enumerate() {
            if from_leader[p] {
                for &d in run {
                    used[d] = true;
                }
            }
        }
        // Mark duplicate slots in follower-sourced runs.
        let mut duplicates: Vec<(usize, usize)> = Vec::new();
        for (p, run) in runs.iter().enumerate() {
            if from_leader[p] {
                continue;
            }
            for (slot, &d) in run.iter().enumerate() {
                if used[d] {
                    duplicates.push((p, slot));
                } else {
                    used[d] = true;
                }
            }
        }
        let mut unused: std::collections::VecDeque<usize> = (0..leader.dbs_count)
            .filter(|&d| !used[d])
            .collect();
        let mut to_remove: Vec<(usize, usize)> = Vec::new();
        for &(p, slot) in &duplicates {
            match unused.pop_front() {
                Some(d) => runs[p][slot] = d,
                None => to_remove.push((p, slot)),
            }
        }
        for &(p, slot) in to_remove.iter().rev() {
            runs[p].remove(slot);
        }
        if !unused.is_empty() {
            let target = (0..b)
                .filter(|&p| !from_leader[p])
                .min_by_key(|&p| (runs[p].len(), p))
                .expect("leftover drones imply a follower-sourced chain exists");
            runs[target].extend(unused);
        }

        let mut genes = Vec::with_capacity(leader.genes.len());
        for (p, run) in runs.iter().enumerate() {
            genes.extend(run);
            genes.push(leader.dbs_count + p);
        }
        Genome::new(genes, leader.dbs_count, leader.mbs_count)
    }
}
