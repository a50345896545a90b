//! Genetic search over hyperparameters and topology kind.
//!
//! A genome is a flat vector of [`Gene`] values laid out according to a
//! [`SearchSpace`]. The GA driver is generic over the space and the fitness
//! function, so the same machinery runs toy problems and full ESN searches.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::ModelSpec;
use crate::init::{InitSpec, Scale};
use crate::ip::IpConfig;
use crate::numerics::RngStream;
use crate::topology::TopologyKind;

/// Legal values for one gene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeneSpec {
    /// Inclusive integer range.
    Int { lo: i64, hi: i64 },
    /// Real range, drawn uniformly or log-uniformly.
    Real { lo: f64, hi: f64, log: bool },
    /// One of a fixed list of numbers.
    Set(Vec<f64>),
    /// Either the Xavier marker or a real in `[lo, hi]`; `p_xavier` is the
    /// prior probability of the marker.
    ScaleOrX { lo: f64, hi: f64, p_xavier: f64 },
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gene {
    Int(i64),
    Real(f64),
    /// Index into a [`GeneSpec::Set`].
    Index(usize),
    Xavier,
    Flag(bool),
}

impl fmt::Display for Gene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gene::Int(v) => write!(f, "{v}"),
            Gene::Real(v) => write!(f, "{v}"),
            Gene::Index(i) => write!(f, "#{i}"),
            Gene::Xavier => f.write_str("X"),
            Gene::Flag(b) => write!(f, "{b}"),
        }
    }
}

impl GeneSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            GeneSpec::Int { lo, hi } => lo <= hi,
            GeneSpec::Real { lo, hi, log } => lo.is_finite() && hi.is_finite() && lo <= hi && (!log || *lo > 0.0),
            GeneSpec::Set(v) => !v.is_empty() && v.iter().all(|x| x.is_finite()),
            GeneSpec::ScaleOrX { lo, hi, p_xavier } => {
                lo.is_finite() && hi.is_finite() && lo <= hi && (0.0..=1.0).contains(p_xavier)
            }
            GeneSpec::Flag => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("empty or invalid gene range {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Gene {
        match *self {
            GeneSpec::Int { lo, hi } => Gene::Int(rng.random_range(lo..=hi)),
            GeneSpec::Real { lo, hi, log } => Gene::Real(sample_real(rng, lo, hi, log)),
            GeneSpec::Set(ref v) => Gene::Index(rng.random_range(0..v.len())),
            GeneSpec::ScaleOrX { lo, hi, p_xavier } => {
                if rng.random::<f64>() < p_xavier {
                    Gene::Xavier
                } else {
                    Gene::Real(sample_real(rng, lo, hi, false))
                }
            }
            GeneSpec::Flag => Gene::Flag(rng.random()),
        }
    }

    pub fn contains(&self, g: &Gene) -> bool {
        match (self, g) {
            (GeneSpec::Int { lo, hi }, Gene::Int(v)) => (lo..=hi).contains(&v),
            (GeneSpec::Real { lo, hi, .. }, Gene::Real(v)) => (lo..=hi).contains(&v),
            (GeneSpec::Set(s), Gene::Index(i)) => *i < s.len(),
            (GeneSpec::ScaleOrX { .. }, Gene::Xavier) => true,
            (GeneSpec::ScaleOrX { lo, hi, .. }, Gene::Real(v)) => (lo..=hi).contains(&v),
            (GeneSpec::Flag, Gene::Flag(_)) => true,
            _ => false,
        }
    }
}

fn sample_real<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64, log: bool) -> f64 {
    if lo == hi {
        return lo;
    }
    if log {
        let v = (rng.random_range(lo.ln()..=hi.ln())).exp();
        v.clamp(lo, hi)
    } else {
        rng.random_range(lo..=hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub genes: Vec<(String, GeneSpec)>,
}

pub type Genome = Vec<Gene>;

impl SearchSpace {
    pub fn new(genes: Vec<(String, GeneSpec)>) -> Result<Self> {
        let s = Self { genes };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.genes.is_empty() {
            return Err(Error::Parameter("search space has no genes".into()));
        }
        self.genes.iter().try_for_each(|(_, g)| g.validate())
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn contains(&self, g: &Genome) -> bool {
        g.len() == self.len() && self.genes.iter().zip(g).all(|((_, s), v)| s.contains(v))
    }

    /// `name=value` pairs, separated by `;`.
    pub fn describe(&self, g: &Genome) -> String {
        self.genes
            .iter()
            .zip(g)
            .map(|((name, spec), v)| match (spec, v) {
                (GeneSpec::Set(s), Gene::Index(i)) => format!("{name}={}", s[*i]),
                _ => format!("{name}={v}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

pub fn sample_genome<R: Rng + ?Sized>(space: &SearchSpace, rng: &mut R) -> Result<Genome> {
    space.validate()?;
    Ok(space.genes.iter().map(|(_, s)| s.sample(rng)).collect())
}

/// Uniform crossover: each gene position is swapped with probability 0.5.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<(Genome, Genome)> {
    if a.len() != b.len() {
        return Err(Error::Parameter(format!(
            "cannot cross genomes of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mut c, mut d) = (a.clone(), b.clone());
    for i in 0..a.len() {
        if rng.random::<f64>() < 0.5 {
            std::mem::swap(&mut c[i], &mut d[i]);
        }
    }
    Ok((c, d))
}

/// Resamples each gene from its prior with probability `p`.
pub fn mutate<R: Rng + ?Sized>(space: &SearchSpace, g: &Genome, p: f64, rng: &mut R) -> Genome {
    space
        .genes
        .iter()
        .zip(g)
        .map(|((_, s), v)| if rng.random::<f64>() < p { s.sample(rng) } else { *v })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_p: f64,
    pub mutation_p: f64,
    pub seed: u64,
    /// When set, an individual is chosen for mutation with probability
    /// `mutation_p` and then every gene is resampled with that same probability.
    pub per_individual_mutation: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 50,
            tournament_size: 3,
            crossover_p: 0.5,
            mutation_p: 0.1,
            seed: 0,
            per_individual_mutation: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tournament_size == 0 || self.population < self.tournament_size {
            return Err(Error::Parameter(format!(
                "need population ({}) >= tournament size ({}) >= 1",
                self.population, self.tournament_size
            )));
        }
        if self.generations == 0 {
            return Err(Error::Parameter("generations must be >= 1".into()));
        }
        for (name, p) in [("crossover_p", self.crossover_p), ("mutation_p", self.mutation_p)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    /// Mean over individuals with finite fitness; NaN when none are finite.
    pub mean_fitness: f64,
    pub best: Genome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub best: Genome,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
}

impl EvolutionResult {
    pub fn best_history(&self) -> Vec<f64> {
        self.history.iter().map(|h| h.best_fitness).collect()
    }
}

fn score<F>(fitness: &F, pop: &[Genome]) -> Vec<f64>
where
    F: Fn(&Genome) -> f64 + Sync,
{
    let clean = |g: &Genome| {
        let f = fitness(g);
        if f.is_finite() {
            f
        } else {
            f64::INFINITY
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        pop.par_iter().map(clean).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        pop.iter().map(clean).collect()
    }
}

fn argmin(f: &[f64]) -> usize {
    // first index wins ties, so the result is independent of evaluation order
    let mut best = 0;
    for (i, &v) in f.iter().enumerate() {
        if v < f[best] {
            best = i;
        }
    }
    best
}

fn tournament<R: Rng + ?Sized>(fit: &[f64], k: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fit.len());
    for _ in 1..k {
        let c = rng.random_range(0..fit.len());
        if fit[c] < fit[best] {
            best = c;
        }
    }
    best
}

fn stats(generation: usize, pop: &[Genome], fit: &[f64]) -> GenerationStats {
    let b = argmin(fit);
    let finite: Vec<f64> = fit.iter().copied().filter(|v| v.is_finite()).collect();
    let mean = if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    GenerationStats {
        generation,
        best_fitness: fit[b],
        mean_fitness: mean,
        best: pop[b].clone(),
    }
}

/// Runs the GA and returns the best genome seen. Generation 0 is the random
/// initial population, so the total budget is `population * generations`
/// fitness calls minus the re-used elites.
///
/// Non-finite fitness values are treated as `+inf`. All randomness is drawn
/// sequentially per generation, so concurrent fitness evaluation cannot
/// change the outcome.
pub fn evolve<F>(space: &SearchSpace, fitness: F, cfg: &EvolutionConfig) -> Result<EvolutionResult>
where
    F: Fn(&Genome) -> f64 + Sync,
{
    evolve_with(space, fitness, cfg, |_| {})
}

/// [`evolve`] with a callback invoked after each generation.
pub fn evolve_with<F, C>(space: &SearchSpace, fitness: F, cfg: &EvolutionConfig, mut on_generation: C) -> Result<EvolutionResult>
where
    F: Fn(&Genome) -> f64 + Sync,
    C: FnMut(&GenerationStats),
{
    space.validate()?;
    cfg.validate()?;
    let root = RngStream::new(cfg.seed, "evolve");
    let mut init_rng = root.child("init").rng();
    let mut pop: Vec<Genome> = (0..cfg.population)
        .map(|_| sample_genome(space, &mut init_rng))
        .collect::<Result<_>>()?;
    let mut fit = score(&fitness, &pop);
    let mut history = vec![stats(0, &pop, &fit)];
    on_generation(&history[0]);

    for gen in 1..cfg.generations {
        let mut rng = root.child("gen").child(gen).rng();
        let elite = argmin(&fit);
        let mut next = Vec::with_capacity(cfg.population);
        while next.len() < cfg.population - 1 {
            let a = &pop[tournament(&fit, cfg.tournament_size, &mut rng)];
            let b = &pop[tournament(&fit, cfg.tournament_size, &mut rng)];
            let (mut c, mut d) = if rng.random::<f64>() < cfg.crossover_p {
                crossover(a, b, &mut rng)?
            } else {
                (a.clone(), b.clone())
            };
            for child in [&mut c, &mut d] {
                if cfg.per_individual_mutation {
                    if rng.random::<f64>() < cfg.mutation_p {
                        *child = mutate(space, child, cfg.mutation_p, &mut rng);
                    }
                } else {
                    *child = mutate(space, child, cfg.mutation_p, &mut rng);
                }
            }
            next.push(c);
            if next.len() < cfg.population - 1 {
                next.push(d);
            }
        }
        let mut next_fit = score(&fitness, &next);
        next.insert(0, pop[elite].clone());
        next_fit.insert(0, fit[elite]);
        pop = next;
        fit = next_fit;
        let s = stats(gen, &pop, &fit);
        on_generation(&s);
        history.push(s);
    }

    let last = history.last().expect("at least one generation");
    Ok(EvolutionResult {
        best: last.best.clone(),
        best_fitness: last.best_fitness,
        history,
    })
}

/// Best of `budget` independent samples from the prior, evaluated with the
/// same fitness. Baseline for the GA.
pub fn random_search<F>(space: &SearchSpace, fitness: F, budget: usize, seed: u64) -> Result<(Genome, f64)>
where
    F: Fn(&Genome) -> f64 + Sync,
{
    if budget == 0 {
        return Err(Error::Parameter("random search budget must be >= 1".into()));
    }
    let mut rng = RngStream::new(seed, "random-search").rng();
    let pop: Vec<Genome> = (0..budget).map(|_| sample_genome(space, &mut rng)).collect::<Result<_>>()?;
    let fit = score(&fitness, &pop);
    let b = argmin(&fit);
    Ok((pop[b].clone(), fit[b]))
}

/// Gene layout of the ESN hyperparameter space.
pub mod genes {
    pub const FAMILY: usize = 0;
    pub const WIDTH: usize = 1;
    pub const DEPTH: usize = 2;
    pub const N_R: usize = 3;
    pub const BETA: usize = 4;
    pub const ALPHA: usize = 5;
    pub const RHO_HAT: usize = 6;
    pub const SIGMA_IN: usize = 7;
    pub const SIGMA_L: usize = 8;
    pub const S_IN: usize = 9;
    pub const S_HAT_L: usize = 10;
    pub const S_L: usize = 11;
    pub const IP: usize = 12;
}

/// Ranges for the ESN hyperparameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRanges {
    pub max_width: i64,
    pub max_depth: i64,
    pub n_r: Vec<f64>,
    pub beta: (f64, f64),
    pub alpha: (f64, f64),
    pub rho_hat: (f64, f64),
    pub sigma: (f64, f64),
    pub sparsity: (f64, f64),
    pub p_xavier: f64,
}

impl Default for HyperRanges {
    fn default() -> Self {
        Self {
            max_width: 4,
            max_depth: 4,
            n_r: vec![128.0, 256.0, 512.0, 1024.0],
            beta: (1e-9, 1e-1),
            alpha: (0.1, 1.0),
            rho_hat: (0.5, 0.999),
            sigma: (0.01, 1.0),
            sparsity: (0.0, 0.9),
            p_xavier: 0.5,
        }
    }
}

impl HyperRanges {
    pub fn space(&self) -> Result<SearchSpace> {
        let real = |(lo, hi): (f64, f64)| GeneSpec::Real { lo, hi, log: false };
        let scale = |(lo, hi): (f64, f64)| GeneSpec::ScaleOrX { lo, hi, p_xavier: self.p_xavier };
        SearchSpace::new(vec![
            ("family".into(), GeneSpec::Int { lo: 0, hi: 3 }),
            ("width".into(), GeneSpec::Int { lo: 1, hi: self.max_width }),
            ("depth".into(), GeneSpec::Int { lo: 1, hi: self.max_depth }),
            ("n_r".into(), GeneSpec::Set(self.n_r.clone())),
            ("beta".into(), GeneSpec::Real { lo: self.beta.0, hi: self.beta.1, log: true }),
            ("alpha".into(), real(self.alpha)),
            ("rho_hat".into(), scale(self.rho_hat)),
            ("sigma_in".into(), scale(self.sigma)),
            ("sigma_l".into(), scale(self.sigma)),
            ("s_in".into(), real(self.sparsity)),
            ("s_hat_l".into(), real(self.sparsity)),
            ("s_l".into(), real(self.sparsity)),
            ("ip".into(), GeneSpec::Flag),
        ])
    }
}

fn as_scale(g: Gene) -> Result<Scale> {
    match g {
        Gene::Xavier => Ok(Scale::Xavier),
        Gene::Real(v) => Ok(Scale::Value(v)),
        other => Err(Error::Parameter(format!("expected a scale gene, got {other:?}"))),
    }
}

fn as_real(g: Gene) -> Result<f64> {
    match g {
        Gene::Real(v) => Ok(v),
        other => Err(Error::Parameter(format!("expected a real gene, got {other:?}"))),
    }
}

fn as_int(g: Gene) -> Result<usize> {
    match g {
        Gene::Int(v) if v >= 0 => Ok(v as usize),
        other => Err(Error::Parameter(format!("expected a non-negative integer gene, got {other:?}"))),
    }
}

/// Decodes a genome of the [`HyperRanges::space`] layout. `ip` is the
/// configuration used when the IP gene is on.
///
/// The crisscross family uses the width gene as its grid side.
pub fn decode(space: &SearchSpace, g: &Genome, ip: &IpConfig) -> Result<ModelSpec> {
    use genes::*;
    if !space.contains(g) || g.len() != 13 {
        return Err(Error::Parameter("genome does not belong to the hyperparameter space".into()));
    }
    let (width, depth) = (as_int(g[WIDTH])?, as_int(g[DEPTH])?);
    let topology = match as_int(g[FAMILY])? {
        0 => TopologyKind::Wide(width),
        1 => TopologyKind::Layered(depth),
        2 => TopologyKind::CrissCross(width),
        _ => TopologyKind::WideLayered { width, depth },
    };
    let n_r = match (&space.genes[N_R].1, g[N_R]) {
        (GeneSpec::Set(s), Gene::Index(i)) => s[i] as usize,
        _ => return Err(Error::Parameter("n_r gene must index a set".into())),
    };
    let spec = ModelSpec {
        topology,
        n_r,
        init: InitSpec {
            rho_hat: as_scale(g[RHO_HAT])?,
            sigma_in: as_scale(g[SIGMA_IN])?,
            sigma_l: as_scale(g[SIGMA_L])?,
            s_in: as_real(g[S_IN])?,
            s_hat_l: as_real(g[S_HAT_L])?,
            s_l: as_real(g[S_L])?,
            alpha: as_real(g[ALPHA])?,
        },
        beta: as_real(g[BETA])?,
        ip: match g[IP] {
            Gene::Flag(true) => Some(*ip),
            _ => None,
        },
    };
    spec.validate()?;
    Ok(spec)
}
