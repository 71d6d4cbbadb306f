//! Genetic search over chain-partition genomes.
//!
//! Generational GA with elitism, tournament selection on the
//! configured (basis, penalty) fitness, path-level crossover with a
//! fitter leader, and swap mutation. Solution quality is always
//! tracked as raw node surplus over valid (no negative residual)
//! candidates, independent of the selection fitness.

use rand::Rng;
use serde::Serialize;

use super::fitness::{evaluate, penalty_constant, FitnessBasis, GaSetting, PenaltyMode, Solution};
use super::genome::Genome;
use super::graph::BackhaulGraph;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_fraction: f64,
    pub tournament_size: usize,
    pub setting: GaSetting,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 400,
            generations: 400,
            crossover_rate: 0.3,
            mutation_rate: 0.2,
            elite_fraction: 0.1,
            tournament_size: 3,
            setting: GaSetting {
                basis: FitnessBasis::Node,
                penalty: PenaltyMode::Value,
            },
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("population must be at least 2".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::Config("tournament_size must be positive".into()));
        }
        for (name, v) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
            ("elite_fraction", self.elite_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Per-generation trace entry.
#[derive(Debug, Clone, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best selection fitness within the generation.
    pub best_selection: f64,
    /// Mean selection fitness within the generation.
    pub mean_selection: f64,
    /// Best raw node surplus among valid solutions found so far, if any.
    pub best_f_node: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaOutcome {
    /// Best valid solution by raw node surplus over the whole run, if
    /// the search ever saw one.
    pub best: Option<Solution>,
    /// Best valid solution still present in the final population.
    ///
    /// Under a value penalty any valid individual outranks every
    /// invalid one, so elitism keeps it and `retained` matches `best`.
    /// Without a penalty, valid individuals can be displaced by
    /// higher-scoring invalid ones and lost; success probabilities are
    /// therefore reported on `retained`, the solution the search can
    /// actually hand back at termination.
    pub retained: Option<Solution>,
    /// Generation at which `best` was first reached.
    pub found_at: Option<usize>,
    pub trace: Vec<GenerationStats>,
    pub evaluations: usize,
}

struct Individual {
    genome: Genome,
    solution: Solution,
    selection: f64,
}

fn score(genome: Genome, graph: &BackhaulGraph, setting: GaSetting, p_const: f64) -> Individual {
    let solution = evaluate(graph, &genome);
    let selection = solution.selection_fitness(setting, p_const);
    Individual {
        genome,
        solution,
        selection,
    }
}

fn tournament<'a, R: Rng>(pop: &'a [Individual], size: usize, rng: &mut R) -> &'a Individual {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..size {
        let challenger = &pop[rng.random_range(0..pop.len())];
        if challenger.selection > best.selection {
            best = challenger;
        }
    }
    best
}

pub fn run_ga(graph: &BackhaulGraph, config: &GaConfig) -> Result<GaOutcome> {
    config.validate()?;
    let m = graph.dbs_count;
    let b = graph.mbs_count;
    let p_const = penalty_constant(graph);
    let mut rng = rng_from_seed(config.seed);

    let mut population: Vec<Individual> = (0..config.population)
        .map(|_| {
            let genome = Genome::random(m, b, &mut rng);
            score(genome, graph, config.setting, p_const)
        })
        .collect();
    let mut evaluations = population.len();

    let mut best: Option<Solution> = None;
    let mut found_at: Option<usize> = None;
    let mut trace = Vec::with_capacity(config.generations + 1);
    let elite_count = ((config.elite_fraction * config.population as f64).ceil() as usize)
        .min(config.population);

    for generation in 0..=config.generations {
        for ind in &population {
            if ind.solution.valid
                && best.as_ref().is_none_or(|cur| ind.solution.f_node > cur.f_node)
            {
                best = Some(ind.solution.clone());
                found_at = Some(generation);
            }
        }
        let best_sel = population
            .iter()
            .map(|i| i.selection)
            .fold(f64::NEG_INFINITY, f64::max);
        let mean_sel =
            population.iter().map(|i| i.selection).sum::<f64>() / population.len() as f64;
        trace.push(GenerationStats {
            generation,
            best_selection: best_sel,
            mean_selection: mean_sel,
            best_f_node: best.as_ref().map(|s| s.f_node),
        });
        if generation == config.generations {
            break;
        }

        // Elites carry over untouched; index sort keeps ties stable.
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| {
            population[b]
                .selection
                .partial_cmp(&population[a].selection)
                .expect("selection fitness is never NaN")
                .then(a.cmp(&b))
        });
        let mut next: Vec<Individual> = order[..elite_count]
            .iter()
            .map(|&i| Individual {
                genome: population[i].genome.clone(),
                solution: population[i].solution.clone(),
                selection: population[i].selection,
            })
            .collect();

        while next.len() < config.population {
            let a = tournament(&population, config.tournament_size, &mut rng);
            let b_ind = tournament(&population, config.tournament_size, &mut rng);
            let (leader, follower) = if a.selection >= b_ind.selection {
                (a, b_ind)
            } else {
                (b_ind, a)
            };
            let mut children: Vec<Genome> = if rng.random_bool(config.crossover_rate) {
                vec![
                    Genome::crossover(&leader.genome, &follower.genome, &mut rng)?,
                    Genome::crossover(&leader.genome, &follower.genome, &mut rng)?,
                ]
            } else {
                vec![leader.genome.clone(), follower.genome.clone()]
            };
            children.truncate(config.population - next.len());
            for child in children {
                let child = if rng.random_bool(config.mutation_rate) {
                    child.mutate(&mut rng)
                } else {
                    child
                };
                evaluations += 1;
                next.push(score(child, graph, config.setting, p_const));
            }
        }
        population = next;
    }

    let retained = population
        .iter()
        .filter(|i| i.solution.valid)
        .max_by(|a, b| {
            a.solution
                .f_node
                .partial_cmp(&b.solution.f_node)
                .expect("f_node is never NaN")
        })
        .map(|i| i.solution.clone());

    Ok(GaOutcome {
        best,
        retained,
        found_at,
        trace,
        evaluations,
    })
}
