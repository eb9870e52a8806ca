use std::cmp::Ordering;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::operators::{gaussian_mutate, initialize_population, two_point_crossover};
use super::soga::evaluate_missing;
use super::{Chromosome, GaHyperparams, GaRng};
use crate::error::{Error, Result};

/// Weights used to pick a single solution from a front of
/// `[area, final ground-state probability]` objectives.
pub const PARETO_AREA_WEIGHT: f64 = 0.4;
pub const PARETO_PGS_WEIGHT: f64 = 0.6;

/// `a` dominates `b` under maximization.
pub fn dominates<const M: usize>(a: &[f64; M], b: &[f64; M]) -> bool {
    let mut strictly = false;
    for k in 0..M {
        if a[k] < b[k] {
            return false;
        }
        if a[k] > b[k] {
            strictly = true;
        }
    }
    strictly
}

/// Deb's fast non-dominated sort (maximization). Fronts are returned in
/// rank order with indices ascending inside each front.
pub fn fast_nondominated_sort<const M: usize>(objectives: &[[f64; M]]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            if dominates(&objectives[p], &objectives[q]) {
                dominated_by[p].push(q);
            } else if dominates(&objectives[q], &objectives[p]) {
                counts[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front`, normalized per objective by
/// the front's range. Boundary members get infinity.
pub fn crowding_distance<const M: usize>(objectives: &[[f64; M]], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        distance.iter_mut().for_each(|d| *d = f64::INFINITY);
        return distance;
    }
    for k in 0..M {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| objectives[front[a]][k].total_cmp(&objectives[front[b]][k]));
        let lo = objectives[front[order[0]]][k];
        let hi = objectives[front[order[n - 1]]][k];
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = objectives[front[order[w + 1]]][k] - objectives[front[order[w - 1]]][k];
            distance[order[w]] += gap / range;
        }
    }
    distance
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MogaRecord {
    pub generation: usize,
    pub front_size: usize,
    pub best_area: f64,
    pub best_pgs: f64,
    pub evaluations: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    /// First front of the final population, objectives `[area, pgs]`.
    pub members: Vec<Chromosome<[f64; 2]>>,
    pub history: Vec<MogaRecord>,
    pub evaluations: usize,
}

impl ParetoFront {
    pub fn objectives(&self) -> Vec<[f64; 2]> {
        self.members.iter().filter_map(|c| c.fitness).collect()
    }

    pub fn pick(&self) -> Result<&Chromosome<[f64; 2]>> {
        pick_from_front(&self.members)
    }
}

/// Member maximizing `0.4 area + 0.6 pgs`; ties prefer the larger pgs.
pub fn pick_from_front(front: &[Chromosome<[f64; 2]>]) -> Result<&Chromosome<[f64; 2]>> {
    let score = |f: &[f64; 2]| PARETO_AREA_WEIGHT * f[0] + PARETO_PGS_WEIGHT * f[1];
    let mut best: Option<(&Chromosome<[f64; 2]>, [f64; 2])> = None;
    for (i, c) in front.iter().enumerate() {
        let f = c.fitness.ok_or(Error::Unevaluated(i))?;
        best = match best {
            None => Some((c, f)),
            Some((bc, bf)) => {
                let better = match score(&f).total_cmp(&score(&bf)) {
                    Ordering::Greater => true,
                    Ordering::Equal => f[1] > bf[1],
                    Ordering::Less => false,
                };
                if better {
                    Some((c, f))
                } else {
                    Some((bc, bf))
                }
            }
        };
    }
    best.map(|(c, _)| c).ok_or(Error::EmptyFront)
}

struct Ranked {
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

fn rank_population(objectives: &[[f64; 2]]) -> (Vec<Vec<usize>>, Ranked) {
    let fronts = fast_nondominated_sort(objectives);
    let mut rank = vec![0; objectives.len()];
    let mut crowding = vec![0.0; objectives.len()];
    for (r, front) in fronts.iter().enumerate() {
        let d = crowding_distance(objectives, front);
        for (&i, di) in front.iter().zip(d) {
            rank[i] = r;
            crowding[i] = di;
        }
    }
    (fronts, Ranked { rank, crowding })
}

fn crowded_binary_tournament<R: Rng>(ranked: &Ranked, rng: &mut R) -> usize {
    let n = ranked.rank.len();
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    let better = ranked.rank[b] < ranked.rank[a]
        || (ranked.rank[b] == ranked.rank[a] && ranked.crowding[b] > ranked.crowding[a]);
    if better {
        b
    } else {
        a
    }
}

pub fn run_moga<E>(len: usize, params: &GaHyperparams, fitness: E) -> Result<ParetoFront>
where
    E: Fn(&[f64]) -> Result<[f64; 2]> + Sync,
{
    run_moga_with_observer(len, params, fitness, |_| {})
}

/// NSGA-II maximizing both objectives: crowded binary tournament, Gaussian
/// mutation, two-point crossover, elitist survival over parents plus
/// offspring.
pub fn run_moga_with_observer<E, O>(
    len: usize,
    params: &GaHyperparams,
    fitness: E,
    mut observer: O,
) -> Result<ParetoFront>
where
    E: Fn(&[f64]) -> Result<[f64; 2]> + Sync,
    O: FnMut(&MogaRecord),
{
    params.validate()?;
    if len == 0 {
        return Err(Error::InvalidArgument("chromosome length must be positive".into()));
    }
    let checked = |g: &[f64]| -> Result<[f64; 2]> {
        let f = fitness(g)?;
        if f.iter().all(|v| v.is_finite()) {
            Ok(f)
        } else {
            Err(Error::Fitness(format!("non-finite objectives {f:?}")))
        }
    };
    let n = params.population;
    let mut rng = GaRng::seed_from_u64(params.seed);
    let mut population: Vec<Chromosome<[f64; 2]>> = initialize_population(len, params, &mut rng)?;
    let mut evaluations = evaluate_missing(&mut population, &checked)?;
    let mut history = Vec::with_capacity(params.generations + 1);

    let objectives_of = |pop: &[Chromosome<[f64; 2]>]| -> Vec<[f64; 2]> {
        pop.iter().map(|c| c.fitness.expect("evaluated")).collect()
    };
    let mut objectives = objectives_of(&population);
    let (mut fronts, mut ranked) = rank_population(&objectives);

    let record = |generation: usize, fronts: &[Vec<usize>], objectives: &[[f64; 2]], evaluated, ms| {
        let first = &fronts[0];
        MogaRecord {
            generation,
            front_size: first.len(),
            best_area: first.iter().map(|&i| objectives[i][0]).fold(f64::NEG_INFINITY, f64::max),
            best_pgs: first.iter().map(|&i| objectives[i][1]).fold(f64::NEG_INFINITY, f64::max),
            evaluations: evaluated,
            wall_ms: ms,
        }
    };
    let r0 = record(0, &fronts, &objectives, evaluations, 0.0);
    observer(&r0);
    history.push(r0);

    for generation in 1..=params.generations {
        let start = Instant::now();
        let mut offspring: Vec<Chromosome<[f64; 2]>> = (0..n)
            .map(|_| population[crowded_binary_tournament(&ranked, &mut rng)].clone())
            .collect();
        for c in offspring.iter_mut() {
            gaussian_mutate(c, params, &mut rng);
        }
        if len >= 2 {
            for pair in offspring.chunks_exact_mut(2) {
                let (a, b) = pair.split_at_mut(1);
                two_point_crossover(&mut a[0], &mut b[0], params, &mut rng)?;
            }
        }
        let evaluated = evaluate_missing(&mut offspring, &checked)?;
        evaluations += evaluated;

        let mut combined = population;
        combined.extend(offspring);
        let combined_obj = objectives_of(&combined);
        let combined_fronts = fast_nondominated_sort(&combined_obj);
        let mut survivors: Vec<usize> = Vec::with_capacity(n);
        for front in &combined_fronts {
            if survivors.len() + front.len() <= n {
                survivors.extend(front);
                continue;
            }
            let d = crowding_distance(&combined_obj, front);
            let mut order: Vec<usize> = (0..front.len()).collect();
            // Stable sort keeps index order among equal distances.
            order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
            survivors.extend(order.iter().take(n - survivors.len()).map(|&k| front[k]));
            break;
        }
        let mut slots: Vec<Option<Chromosome<[f64; 2]>>> = combined.into_iter().map(Some).collect();
        population = survivors.iter().map(|&i| slots[i].take().expect("unique")).collect();

        objectives = objectives_of(&population);
        (fronts, ranked) = rank_population(&objectives);
        debug_assert!(fronts[0].iter().all(|&a| fronts[0]
            .iter()
            .all(|&b| !dominates(&objectives[a], &objectives[b]))));

        let r = record(generation, &fronts, &objectives, evaluated, start.elapsed().as_secs_f64() * 1e3);
        observer(&r);
        history.push(r);
    }

    let members = fronts[0].iter().map(|&i| population[i].clone()).collect();
    Ok(ParetoFront {
        members,
        history,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_basics() {
        assert!(dominates(&[1.0, 1.0], &[0.5, 1.0]));
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]));
        assert!(!dominates(&[1.0, 0.0], &[0.0, 1.0]));
    }

    #[test]
    fn sort_small_example() {
        let obj = [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [0.4, 0.4], [0.0, 0.0]];
        let fronts = fast_nondominated_sort(&obj);
        assert_eq!(fronts, vec![vec![0, 1, 2], vec![3], vec![4]]);
    }

    #[test]
    fn crowding_boundaries_are_infinite() {
        let obj = [[0.0, 1.0], [0.25, 0.75], [0.5, 0.5], [1.0, 0.0]];
        let d = crowding_distance(&obj, &[0, 1, 2, 3]);
        assert!(d[0].is_infinite() && d[3].is_infinite());
        assert!((d[1] - 1.0).abs() < 1e-12);
        assert!((d[2] - 1.5).abs() < 1e-12);
        // Zero range in one objective contributes nothing.
        let flat = [[0.0, 1.0], [0.5, 1.0], [1.0, 1.0]];
        let d = crowding_distance(&flat, &[0, 1, 2]);
        assert!((d[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pick_prefers_weighted_score_then_pgs() {
        let mk = |a: f64, p: f64| Chromosome { genes: vec![a, p], fitness: Some([a, p]) };
        let front = vec![mk(1.0, 0.2), mk(0.2, 0.8), mk(0.5, 0.5)];
        // Scores 0.52, 0.56, 0.5.
        assert_eq!(pick_from_front(&front).unwrap().genes, vec![0.2, 0.8]);
        let tie = vec![mk(0.6, 0.0), mk(0.0, 0.4)];
        assert_eq!(pick_from_front(&tie).unwrap().genes, vec![0.0, 0.4]);
        assert_eq!(pick_from_front(&[]), Err(Error::EmptyFront));
    }

    #[test]
    fn moga_finds_tradeoff_front() {
        // Objectives (x, 1 - x) with x = sigmoid of the first gene, plus a
        // penalty on the second gene: the front is the penalty-free curve.
        let f = |g: &[f64]| -> Result<[f64; 2]> {
            let x = 1.0 / (1.0 + (-g[0]).exp());
            let pen = g[1] * g[1];
            Ok([x - pen, 1.0 - x - pen])
        };
        let params = GaHyperparams::driving_defaults().with_seed(3).with_generations(60);
        let front = run_moga(2, &params, f).unwrap();
        assert!(!front.members.is_empty());
        for c in &front.members {
            let [a, b] = c.fitness.unwrap();
            assert!(a + b > 0.9, "{a} {b}");
        }
        let obj = front.objectives();
        for a in &obj {
            for b in &obj {
                assert!(!dominates(a, b));
            }
        }
        assert_eq!(front.history.len(), 61);
        front.pick().unwrap();
    }
}
