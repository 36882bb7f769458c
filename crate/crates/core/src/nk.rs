//! NK fitness landscapes: `X_sigma = sum_i Y_{i, (sigma_i, ..., sigma_{i+K-1})}`
//! with cyclic windows. Sites and bits are 0-based; bit `i` of a genotype
//! label is `sigma_i`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_key, CounterRng};

pub const MAX_GENOME: usize = 24;
/// Cap on `N * 2^K` table entries (256 MiB of `f64`).
pub const MAX_TABLE: usize = 1 << 25;
pub const MAX_BRW_DEPTH: usize = 20;

pub type Genotype = u32;

#[derive(Clone, Debug)]
pub struct NKLandscape {
    n: usize,
    k: usize,
    seed: u64,
    /// Row-major `n x 2^k`; column `tau` has bit `j` equal to `sigma_{i+j}`.
    table: Vec<f64>,
}

/// Builds a landscape with standard Gaussian site potentials.
pub fn build_landscape(n: usize, k: usize, seed: u64) -> Result<NKLandscape> {
    build_landscape_with(n, k, seed, &StandardNormal)
}

/// Same as [`build_landscape`] with another site-potential law.
pub fn build_landscape_with<D: Distribution<f64>>(
    n: usize,
    k: usize,
    seed: u64,
    dist: &D,
) -> Result<NKLandscape> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::domain(format!("need 1 <= K <= N, got N={n}, K={k}")));
    }
    if n > MAX_GENOME {
        return Err(Error::SizeCap {
            what: "N",
            value: n,
            max: MAX_GENOME,
        });
    }
    let cells = n << k;
    if cells > MAX_TABLE {
        return Err(Error::SizeCap {
            what: "N*2^K",
            value: cells,
            max: MAX_TABLE,
        });
    }
    let mut rng = CounterRng::new(derive_key(seed, &[n as u64, k as u64]));
    let table = (0..cells).map(|_| dist.sample(&mut rng)).collect();
    Ok(NKLandscape { n, k, seed, table })
}

impl NKLandscape {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `Y_{i, tau}`.
    #[inline]
    pub fn y(&self, site: usize, tau: usize) -> f64 {
        self.table[(site << self.k) | tau]
    }

    /// Window `(sigma_i, ..., sigma_{i+K-1})` packed as an index, by a
    /// rotate-and-mask of the label.
    #[inline]
    pub fn window(&self, sigma: Genotype, site: usize) -> usize {
        let s = sigma as u64;
        let rotated = if site == 0 {
            s
        } else {
            (s >> site) | (s << (self.n - site))
        };
        (rotated & ((1u64 << self.k) - 1)) as usize
    }

    fn check(&self, sigma: Genotype) -> Result<()> {
        if (sigma as u64) >> self.n != 0 {
            return Err(Error::domain(format!(
                "genotype {sigma:#x} has bits beyond N = {}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn fitness_of(&self, sigma: Genotype) -> Result<f64> {
        self.check(sigma)?;
        Ok(self.fitness(sigma))
    }

    #[inline]
    fn fitness(&self, sigma: Genotype) -> f64 {
        (0..self.n).map(|i| self.y(i, self.window(sigma, i))).sum()
    }

    /// Sites whose window contains bit `b`: `b-K+1, ..., b` (cyclic).
    fn sites_covering(&self, bit: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).map(move |j| (bit + self.n - j) % self.n)
    }

    /// `X_{sigma xor e_b} - X_sigma`, touching only the `K` affected sites.
    pub fn flip_delta(&self, sigma: Genotype, bit: usize) -> f64 {
        let flipped = sigma ^ (1 << bit);
        self.sites_covering(bit)
            .map(|i| self.y(i, self.window(flipped, i)) - self.y(i, self.window(sigma, i)))
            .sum()
    }

    /// Sum of `Y_{i, window_i}` over sites `k-K+1, ..., k` (cyclic): the
    /// sites whose window contains bit `k`.
    pub fn window_partial_sum(&self, sigma: Genotype, k: usize) -> Result<f64> {
        self.check(sigma)?;
        if k >= self.n {
            return Err(Error::IndexOutOfRange(format!(
                "site {k} with N = {}",
                self.n
            )));
        }
        Ok(self
            .sites_covering(k)
            .map(|i| self.y(i, self.window(sigma, i)))
            .sum())
    }
}

/// Global maximum by full scan; ties go to the smallest label.
pub fn exhaustive_max(land: &NKLandscape) -> (Genotype, f64) {
    let mut best: Genotype = 0;
    let mut best_value = land.fitness(0);
    for sigma in 1..(1u64 << land.n) as Genotype {
        let v = land.fitness(sigma);
        if v > best_value {
            best = sigma;
            best_value = v;
        }
    }
    (best, best_value)
}

/// Number of genotypes with no strictly fitter neighbor.
pub fn count_local_maxima(land: &NKLandscape) -> usize {
    (0..(1u64 << land.n) as Genotype)
        .filter(|&s| (0..land.n).all(|b| land.flip_delta(s, b) <= 0.0))
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyResult {
    pub genotype: Genotype,
    pub value: f64,
    /// Maximized block sums, one per optimized block.
    pub increments: Vec<f64>,
}

/// Blockwise greedy maximization: the first block of `K` bits is zero; each
/// following full block is chosen to maximize the sum over the `K` sites
/// whose windows end inside it (earlier bits already fixed); bits past the
/// last full block stay zero. Block ties go to the smallest pattern.
pub fn greedy_block_max(land: &NKLandscape) -> GreedyResult {
    let (n, k) = (land.n, land.k);
    let blocks = n / k;
    let mut sigma: Genotype = 0;
    let mut increments = Vec::with_capacity(blocks.saturating_sub(1));
    for j in 1..blocks {
        let start = j * k;
        let sites = (start - k + 1)..=start;
        let mut best_pattern = 0u32;
        let mut best_sum = f64::NEG_INFINITY;
        for pattern in 0..(1u32 << k) {
            let candidate = sigma | (pattern << start);
            let s: f64 = sites
                .clone()
                .map(|i| land.y(i, land.window(candidate, i)))
                .sum();
            if s > best_sum {
                best_sum = s;
                best_pattern = pattern;
            }
        }
        sigma |= best_pattern << start;
        increments.push(best_sum);
    }
    GreedyResult {
        genotype: sigma,
        value: land.fitness(sigma),
        increments,
    }
}

/// Maximum over the `2^K` leaves of a depth-`K` binary branching random
/// walk with standard Gaussian increments.
pub fn block_brw_max(k: usize, seed: u64) -> Result<f64> {
    block_brw_max_with(k, &mut CounterRng::new(derive_key(seed, &[k as u64])))
}

pub fn block_brw_max_with<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<f64> {
    Ok(brw_leaves(k, rng)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// All `2^K` root-to-leaf sums; leaf `p` follows bits of `p` from the low end.
pub fn brw_leaves<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::domain("BRW depth must be at least 1"));
    }
    if k > MAX_BRW_DEPTH {
        return Err(Error::SizeCap {
            what: "BRW depth",
            value: k,
            max: MAX_BRW_DEPTH,
        });
    }
    let mut sums = vec![0.0f64];
    for _ in 0..k {
        let width = sums.len();
        let mut next = vec![0.0; 2 * width];
        for (p, &s) in sums.iter().enumerate() {
            next[p] = s + rng.sample::<f64, _>(StandardNormal);
            next[p + width] = s + rng.sample::<f64, _>(StandardNormal);
        }
        sums = next;
    }
    Ok(sums)
}

/// BRW centering `sqrt(2 ln 2) K - 3 / (2 sqrt(2 ln 2)) ln K`.
pub fn m_k(k: usize) -> f64 {
    let c = (2.0 * std::f64::consts::LN_2).sqrt();
    c * k as f64 - 1.5 / c * (k as f64).ln()
}

/// Maximum of `count` i.i.d. `N(0, variance)` draws.
pub fn iid_gaussian_max<R: Rng + ?Sized>(count: usize, variance: f64, rng: &mut R) -> f64 {
    let sd = variance.sqrt();
    (0..count)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkRule {
    /// Uniform among strictly fitter neighbors.
    Random,
    /// Fittest neighbor; ties to the lowest bit.
    Steepest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkResult {
    pub path: Vec<Genotype>,
    pub final_fitness: f64,
    pub steps: usize,
}

pub fn adaptive_walk(
    land: &NKLandscape,
    start: Genotype,
    rule: WalkRule,
    seed: u64,
) -> Result<WalkResult> {
    land.check(start)?;
    let mut rng = CounterRng::new(seed);
    let mut sigma = start;
    let mut path = vec![start];
    let mut better = Vec::with_capacity(land.n);
    loop {
        better.clear();
        better.extend((0..land.n).filter_map(|b| {
            let d = land.flip_delta(sigma, b);
            (d > 0.0).then_some((b, d))
        }));
        if better.is_empty() {
            break;
        }
        let bit = match rule {
            WalkRule::Random => better[rng.random_range(0..better.len())].0,
            WalkRule::Steepest => {
                better
                    .iter()
                    .fold(better[0], |acc, &c| if c.1 > acc.1 { c } else { acc })
                    .0
            }
        };
        sigma ^= 1 << bit;
        path.push(sigma);
    }
    let steps = path.len() - 1;
    Ok(WalkResult {
        path,
        final_fitness: land.fitness(sigma),
        steps,
    })
}

/// The site grid `{4K i : 1 <= i <= N / 4K}` (1-based positions).
pub fn statistic_grid(n: usize, k: usize) -> Vec<usize> {
    (1..=n / (4 * k)).map(|i| 4 * k * i).collect()
}

/// `T_{sigma,k} = sum_{i=k-K+1}^{k} Y_{i, window_i}` with 1-based `k` on
/// [`statistic_grid`]; flipping bit `k` changes `X` by exactly the change
/// in `T`.
pub fn local_statistic_t(land: &NKLandscape, sigma: Genotype, k: usize) -> Result<f64> {
    if k == 0 || !k.is_multiple_of(4 * land.k) || k > land.n {
        return Err(Error::IndexOutOfRange(format!(
            "k = {k} is not on the grid 4K*i <= N (N = {}, K = {})",
            land.n, land.k
        )));
    }
    land.window_partial_sum(sigma, k - 1)
}

/// Number of grid sites with `T_{sigma,k} <= threshold`.
pub fn low_statistic_count(land: &NKLandscape, sigma: Genotype, threshold: f64) -> Result<usize> {
    let mut count = 0;
    for k in statistic_grid(land.n, land.k) {
        if local_statistic_t(land, sigma, k)? <= threshold {
            count += 1;
        }
    }
    Ok(count)
}
