use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Chromosome, GaHyperparams};
use crate::error::{Error, Result};

/// `population` chromosomes with genes drawn uniformly in `[gene_min, gene_max]`.
pub fn initialize_population<F, R: Rng>(
    len: usize,
    params: &GaHyperparams,
    rng: &mut R,
) -> Result<Vec<Chromosome<F>>> {
    params.validate()?;
    Ok((0..params.population)
        .map(|_| {
            Chromosome::new(
                (0..len)
                    .map(|_| rng.random_range(params.gene_min..=params.gene_max))
                    .collect(),
            )
        })
        .collect())
}

/// With probability `mutation_prob` the individual is mutated: each gene
/// independently, with probability `gene_mutation_prob`, gets a draw from
/// `N(mutation_mean, mutation_variance)` added.
pub fn gaussian_mutate<F, R: Rng>(c: &mut Chromosome<F>, params: &GaHyperparams, rng: &mut R) {
    if !rng.random_bool(params.mutation_prob) {
        return;
    }
    let normal = Normal::new(params.mutation_mean, params.mutation_variance.sqrt())
        .expect("validated variance");
    let mut changed = false;
    for g in c.genes.iter_mut() {
        if rng.random_bool(params.gene_mutation_prob) {
            let old = *g;
            *g += normal.sample(rng);
            changed |= *g != old;
        }
    }
    if changed {
        c.fitness = None;
    }
}

/// With probability `crossover_prob`, draws two cut indices in `[0, L-1]`
/// and swaps the segment `[lo, hi)` between the parents.
pub fn two_point_crossover<F, R: Rng>(
    a: &mut Chromosome<F>,
    b: &mut Chromosome<F>,
    params: &GaHyperparams,
    rng: &mut R,
) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument(
            "two-point crossover needs at least two genes".into(),
        ));
    }
    if !rng.random_bool(params.crossover_prob) {
        return Ok(());
    }
    let last = a.len() - 1;
    let x = rng.random_range(0..=last);
    let y = rng.random_range(0..=last);
    swap_segment(a, b, x.min(y), x.max(y));
    Ok(())
}

pub(crate) fn swap_segment<F>(a: &mut Chromosome<F>, b: &mut Chromosome<F>, lo: usize, hi: usize) {
    let mut a_changed = false;
    let mut b_changed = false;
    for i in lo..hi {
        if a.genes[i] != b.genes[i] {
            std::mem::swap(&mut a.genes[i], &mut b.genes[i]);
            a_changed = true;
            b_changed = true;
        }
    }
    if a_changed {
        a.fitness = None;
    }
    if b_changed {
        b.fitness = None;
    }
}

/// `population.len()` tournaments of `tournament_size` competitors drawn
/// with replacement; the fittest competitor is copied, ties going to the
/// first drawn.
pub fn tournament_select<R: Rng>(
    population: &[Chromosome<f64>],
    params: &GaHyperparams,
    rng: &mut R,
) -> Result<Vec<Chromosome<f64>>> {
    if let Some(i) = population.iter().position(|c| c.fitness.is_none()) {
        return Err(Error::Unevaluated(i));
    }
    let n = population.len();
    let mut selected = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = rng.random_range(0..n);
        for _ in 1..params.tournament_size {
            let challenger = rng.random_range(0..n);
            if population[challenger].fitness > population[best].fitness {
                best = challenger;
            }
        }
        selected.push(population[best].clone());
    }
    Ok(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::GaRng;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn params() -> GaHyperparams {
        GaHyperparams::schedule_defaults()
    }

    #[test]
    fn initialization_shape_and_determinism() {
        let p = params().with_seed(4);
        let a: Vec<Chromosome<f64>> = initialize_population(4, &p, &mut GaRng::seed_from_u64(4)).unwrap();
        let b: Vec<Chromosome<f64>> = initialize_population(4, &p, &mut GaRng::seed_from_u64(4)).unwrap();
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|c| c.len() == 4 && !c.is_evaluated()));
        assert!(a.iter().flat_map(|c| &c.genes).all(|g| (-1.0..=1.0).contains(g)));
        assert_eq!(a, b);
        let bad = GaHyperparams { gene_min: 0.0, gene_max: 0.0, ..params() };
        assert!(initialize_population::<f64, _>(4, &bad, &mut GaRng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn mutation_limits() {
        let mut rng = GaRng::seed_from_u64(1);
        let genes = vec![0.1, -0.4, 2.0, 3.5];

        let tiny = GaHyperparams { mutation_prob: 1.0, gene_mutation_prob: 1.0, mutation_variance: 1e-30, ..params() };
        let mut c: Chromosome<f64> = Chromosome { genes: genes.clone(), fitness: Some(1.0) };
        gaussian_mutate(&mut c, &tiny, &mut rng);
        for (a, b) in c.genes.iter().zip(&genes) {
            assert!((a - b).abs() < 1e-10);
        }

        let off = GaHyperparams { mutation_prob: 0.0, ..params() };
        let mut c: Chromosome<f64> = Chromosome { genes: genes.clone(), fitness: Some(1.0) };
        gaussian_mutate(&mut c, &off, &mut rng);
        assert_eq!(c.genes, genes);
        assert_eq!(c.fitness, Some(1.0));

        let shift = GaHyperparams { mutation_mean: 5.0, ..tiny };
        let mut c: Chromosome<f64> = Chromosome { genes: genes.clone(), fitness: Some(1.0) };
        gaussian_mutate(&mut c, &shift, &mut rng);
        for (a, b) in c.genes.iter().zip(&genes) {
            assert!((a - b - 5.0).abs() < 1e-10);
        }
        assert_eq!(c.fitness, None);
    }

    #[test]
    fn crossover_segment_swap() {
        let mut a: Chromosome<f64> = Chromosome::new(vec![1.0, 2.0, 3.0, 4.0]);
        let mut b: Chromosome<f64> = Chromosome::new(vec![5.0, 6.0, 7.0, 8.0]);
        swap_segment(&mut a, &mut b, 1, 3);
        assert_eq!(a.genes, vec![1.0, 6.0, 7.0, 4.0]);
        assert_eq!(b.genes, vec![5.0, 2.0, 3.0, 8.0]);

        let mut c: Chromosome<f64> = Chromosome { genes: vec![1.0, 2.0], fitness: Some(0.3) };
        let mut d: Chromosome<f64> = Chromosome { genes: vec![3.0, 4.0], fitness: Some(0.4) };
        swap_segment(&mut c, &mut d, 1, 1);
        assert_eq!((c.genes.clone(), c.fitness), (vec![1.0, 2.0], Some(0.3)));

        let never = GaHyperparams { crossover_prob: 0.0, ..params() };
        two_point_crossover(&mut c, &mut d, &never, &mut GaRng::seed_from_u64(0)).unwrap();
        assert_eq!(c.genes, vec![1.0, 2.0]);

        let mut short: Chromosome<f64> = Chromosome::new(vec![1.0]);
        assert!(matches!(
            two_point_crossover(&mut c, &mut short, &params(), &mut GaRng::seed_from_u64(0)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn tournament_requires_fitness() {
        let pop = vec![Chromosome { genes: vec![0.0], fitness: Some(1.0) }, Chromosome::new(vec![1.0])];
        assert_eq!(
            tournament_select(&pop, &params(), &mut GaRng::seed_from_u64(0)),
            Err(Error::Unevaluated(1))
        );
    }

    #[test]
    fn full_tournament_always_finds_best() {
        let pop: Vec<Chromosome<f64>> = (0..10)
            .map(|i| Chromosome { genes: vec![i as f64], fitness: Some(if i == 7 { 10.0 } else { i as f64 * 0.1 }) })
            .collect();
        // With 200 competitors out of 10 the best is drawn with overwhelming probability.
        let p = GaHyperparams { tournament_size: 200, population: 10, ..params() };
        let out = tournament_select(&pop, &p, &mut GaRng::seed_from_u64(9)).unwrap();
        assert!(out.iter().all(|c| c.genes[0] == 7.0));
    }

    #[test]
    fn single_competitor_tournament_is_uniform() {
        // Chi-square goodness of fit over 10^4 draws from 10 distinct individuals.
        let pop: Vec<Chromosome<f64>> = (0..10)
            .map(|i| Chromosome { genes: vec![i as f64], fitness: Some(i as f64) })
            .collect();
        let p = GaHyperparams { tournament_size: 1, population: 10, ..params() };
        let mut rng = GaRng::seed_from_u64(2024);
        let mut counts = [0usize; 10];
        for _ in 0..1000 {
            for c in tournament_select(&pop, &p, &mut rng).unwrap() {
                counts[c.genes[0] as usize] += 1;
            }
        }
        let expected = 1000.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99th percentile of chi-square with 9 degrees of freedom.
        assert!(chi2 < 21.666, "chi2 = {chi2}");
    }

    #[test]
    fn equal_fitness_tournament_resamples() {
        let pop: Vec<Chromosome<f64>> = (0..5).map(|i| Chromosome { genes: vec![i as f64], fitness: Some(0.5) }).collect();
        let p = GaHyperparams { tournament_size: 3, population: 5, ..params() };
        let mut rng = GaRng::seed_from_u64(3);
        let mut seen = [false; 5];
        for _ in 0..50 {
            for c in tournament_select(&pop, &p, &mut rng).unwrap() {
                seen[c.genes[0] as usize] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn crossover_conserves_genes_per_position(
            pair in (2usize..12).prop_flat_map(|l| (
                prop::collection::vec(-10.0f64..10.0, l),
                prop::collection::vec(-10.0f64..10.0, l),
            )),
            seed in any::<u64>(),
        ) {
            let (ga, gb) = pair;
            let mut a: Chromosome<f64> = Chromosome::new(ga.clone());
            let mut b: Chromosome<f64> = Chromosome::new(gb.clone());
            let always = GaHyperparams { crossover_prob: 1.0, ..GaHyperparams::default() };
            two_point_crossover(&mut a, &mut b, &always, &mut GaRng::seed_from_u64(seed)).unwrap();
            for i in 0..ga.len() {
                let mut before = [ga[i], gb[i]];
                let mut after = [a.genes[i], b.genes[i]];
                before.sort_by(f64::total_cmp);
                after.sort_by(f64::total_cmp);
                prop_assert_eq!(before, after);
            }
        }
    }
}
