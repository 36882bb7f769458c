//! Update-sequence measures and the good-path predicates.
//!
//! A path from the origin is identified with its flip sequence
//! `(a_1, ..., a_L)`, where `a_i` is the coordinate changed at step `i`.
//! Coordinates are 0-based in this module: the "first block" (the `n`
//! coordinates at which source and target differ) is `0..n`.

use std::fmt;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::analytic::PhaseConstants;
use crate::error::{Error, Result};

/// Cumulative mass at which the inverse-CDF samplers stop walking the tail.
pub const TAIL_CUTOFF: f64 = 1.0 - 1e-15;

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 || !x.is_finite() {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    Ok(())
}

fn ln_factorial(k: u32) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// `F1(k) = x^k / (k! sinh x)` on odd `k`, zero elsewhere.
pub fn pmf_f1(k: u32, x: f64) -> Result<f64> {
    check_x(x)?;
    if k.is_multiple_of(2) {
        return Ok(0.0);
    }
    Ok((k as f64 * x.ln() - ln_factorial(k) - x.sinh().ln()).exp())
}

/// `F2(k) = x^k / (k! cosh x)` on even `k`, zero elsewhere.
pub fn pmf_f2(k: u32, x: f64) -> Result<f64> {
    check_x(x)?;
    if k % 2 == 1 {
        return Ok(0.0);
    }
    if k == 0 {
        return Ok(1.0 / x.cosh());
    }
    Ok((k as f64 * x.ln() - ln_factorial(k) - x.cosh().ln()).exp())
}

/// Inverse-CDF draw from the odd (`first = 1`) or even (`first = 0`)
/// factorial-decay law; `norm` is `sinh x` or `cosh x`.
fn sample_parity_law<R: Rng + ?Sized>(rng: &mut R, x: f64, first: u32, norm: f64) -> u32 {
    let u: f64 = rng.random();
    let mut k = first;
    // x^k / k!, built incrementally
    let mut term = if first == 0 { 1.0 } else { x };
    let mut cum = term / norm;
    while cum < u && cum < TAIL_CUTOFF {
        term *= x * x / (((k + 1) * (k + 2)) as f64);
        k += 2;
        let next = cum + term / norm;
        if next == cum {
            break;
        }
        cum = next;
    }
    k
}

pub fn sample_f1<R: Rng + ?Sized>(x: f64, rng: &mut R) -> Result<u32> {
    check_x(x)?;
    Ok(sample_parity_law(rng, x, 1, x.sinh()))
}

pub fn sample_f2<R: Rng + ?Sized>(x: f64, rng: &mut R) -> Result<u32> {
    check_x(x)?;
    Ok(sample_parity_law(rng, x, 0, x.cosh()))
}

/// Per-coordinate update counts of a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyVector {
    pub counts: Vec<u32>,
    pub total: usize,
}

impl OccupancyVector {
    /// True iff coordinates `0..n` occur an odd number of times and the
    /// rest an even number of times.
    pub fn has_parities(&self, n: usize) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, &c)| (c % 2 == 1) == (i < n))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateSequence {
    pub dim: usize,
    /// Number of odd-class coordinates (the target's Hamming distance).
    pub odd: usize,
    pub entries: Vec<usize>,
    /// Timestamps in `[0, 1]` from the continuous model, sorted.
    pub positions: Option<Vec<f64>>,
}

impl UpdateSequence {
    pub fn new(dim: usize, odd: usize, entries: Vec<usize>) -> Result<Self> {
        if odd > dim {
            return Err(Error::domain(format!("need n <= N, got n={odd}, N={dim}")));
        }
        if let Some(&bad) = entries.iter().find(|&&c| c >= dim) {
            return Err(Error::MalformedSequence(format!(
                "coordinate {bad} outside 0..{dim}"
            )));
        }
        Ok(Self {
            dim,
            odd,
            entries,
            positions: None,
        })
    }

    pub fn with_positions(mut self, positions: Vec<f64>) -> Result<Self> {
        if positions.len() != self.entries.len() {
            return Err(Error::MalformedSequence(format!(
                "{} positions for {} entries",
                positions.len(),
                self.entries.len()
            )));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::MalformedSequence(
                "positions must increase strictly".into(),
            ));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn occupancy(&self) -> OccupancyVector {
        let mut counts = vec![0u32; self.dim];
        for &c in &self.entries {
            counts[c] += 1;
        }
        OccupancyVector {
            counts,
            total: self.entries.len(),
        }
    }

    /// Membership in the set of sequences ending at the target.
    pub fn reaches_target(&self) -> bool {
        self.occupancy().has_parities(self.odd)
    }
}

fn check_mu_args(k: usize, n: usize, dim: usize) -> Result<()> {
    if n > dim || k >= dim {
        return Err(Error::domain(format!(
            "need k < N and n <= N, got k={k}, n={n}, N={dim}"
        )));
    }
    Ok(())
}

/// Draws from the measure on target-reaching sequences whose last update
/// is coordinate `k`: independent counts (odd law for the odd class, even
/// law otherwise, with `k`'s class flipped), a uniform arrangement of the
/// multiset, then `k` appended.
pub fn sample_mu_kn<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    dim: usize,
    x: f64,
    rng: &mut R,
) -> Result<UpdateSequence> {
    check_mu_args(k, n, dim)?;
    check_x(x)?;
    let mut entries = Vec::new();
    for i in 0..dim {
        let odd_class = (i < n) != (i == k);
        let count = if odd_class {
            sample_f1(x, rng)?
        } else {
            sample_f2(x, rng)?
        };
        entries.extend(std::iter::repeat_n(i, count as usize));
    }
    entries.shuffle(rng);
    entries.push(k);
    UpdateSequence::new(dim, n, entries)
}

/// Probability of `seq` under the measure of [`sample_mu_kn`]; depends on
/// the sequence only through its length.
pub fn pmf_mu_kn(seq: &[usize], k: usize, n: usize, dim: usize, x: f64) -> Result<f64> {
    check_mu_args(k, n, dim)?;
    check_x(x)?;
    let s = UpdateSequence::new(dim, n, seq.to_vec())?;
    if seq.last() != Some(&k) {
        return Err(Error::MalformedSequence(format!(
            "sequence must end with {k}"
        )));
    }
    if !s.reaches_target() {
        return Err(Error::MalformedSequence(
            "occupancy parities do not match the target".into(),
        ));
    }
    let ell = seq.len() as f64;
    let (sinh_pow, cosh_pow) = if k < n {
        (n as f64 - 1.0, (dim - n) as f64 + 1.0)
    } else {
        (n as f64 + 1.0, (dim - n) as f64 - 1.0)
    };
    let log =
        (ell - 1.0) * x.ln() - ln_gamma(ell) - sinh_pow * x.sinh().ln() - cosh_pow * x.cosh().ln();
    Ok(log.exp())
}

/// Continuous placement model: counts `U_i` (odd law for `i < n`, even law
/// otherwise), each copy placed uniformly on `[0, 1]`, read off in order.
pub fn sample_continuous<R: Rng + ?Sized>(
    dim: usize,
    n: usize,
    x: f64,
    rng: &mut R,
) -> Result<UpdateSequence> {
    if n == 0 || n > dim {
        return Err(Error::domain(format!(
            "need 1 <= n <= N, got n={n}, N={dim}"
        )));
    }
    check_x(x)?;
    let mut stamped: Vec<(f64, usize)> = Vec::new();
    for i in 0..dim {
        let count = if i < n {
            sample_f1(x, rng)?
        } else {
            sample_f2(x, rng)?
        };
        for _ in 0..count {
            stamped.push((rng.random::<f64>(), i));
        }
    }
    stamped.sort_by(|a, b| a.0.total_cmp(&b.0));
    // ties have probability ~2^-53 per pair; nudge so positions stay strictly increasing
    for i in 1..stamped.len() {
        if stamped[i].0 <= stamped[i - 1].0 {
            stamped[i].0 = stamped[i - 1].0.next_up();
        }
    }
    let (positions, entries): (Vec<f64>, Vec<usize>) = stamped.into_iter().unzip();
    UpdateSequence::new(dim, n, entries)?.with_positions(positions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalStats {
    /// Updates inside the interval.
    pub total: usize,
    /// Coordinates updated an odd number of times inside the interval.
    pub odd: usize,
    /// Same, restricted to the first block.
    pub odd_first_block: usize,
}

/// Counts over the closed interval `I`; `start > end` denotes the empty
/// interval.
pub fn interval_stats(
    seq: &UpdateSequence,
    interval: RangeInclusive<f64>,
) -> Result<IntervalStats> {
    let positions = seq.positions.as_ref().ok_or(Error::MissingPositions)?;
    let (a, b) = (*interval.start(), *interval.end());
    if a > b {
        return Ok(IntervalStats {
            total: 0,
            odd: 0,
            odd_first_block: 0,
        });
    }
    let lo = positions.partition_point(|&p| p < a);
    let hi = positions.partition_point(|&p| p <= b);
    let mut parity = vec![false; seq.dim];
    for &c in &seq.entries[lo..hi] {
        parity[c] = !parity[c];
    }
    let odd = parity.iter().filter(|&&p| p).count();
    let odd_first_block = parity[..seq.odd].iter().filter(|&&p| p).count();
    Ok(IntervalStats {
        total: hi - lo,
        odd,
        odd_first_block,
    })
}

/// Pairwise Hamming distances along the path of a sequence, answered from
/// stored prefix parity states.
#[derive(Clone, Debug)]
pub struct HammingProfile {
    dim: usize,
    first_block: usize,
    words: usize,
    /// `(L + 1) * words` parity bits; row `i` is the vertex `v_i`.
    states: Vec<u64>,
    /// `first_prefix[i]` = first-block updates among the first `i` steps.
    first_prefix: Vec<usize>,
}

pub fn hamming_profile(seq: &UpdateSequence) -> HammingProfile {
    let words = seq.dim.div_ceil(64).max(1);
    let len = seq.entries.len();
    let mut states = vec![0u64; (len + 1) * words];
    let mut first_prefix = Vec::with_capacity(len + 1);
    first_prefix.push(0);
    for (step, &c) in seq.entries.iter().enumerate() {
        let (prev, next) = states.split_at_mut((step + 1) * words);
        next[..words].copy_from_slice(&prev[step * words..]);
        next[c / 64] ^= 1 << (c % 64);
        first_prefix.push(first_prefix[step] + usize::from(c < seq.odd));
    }
    HammingProfile {
        dim: seq.dim,
        first_block: seq.odd,
        words,
        states,
        first_prefix,
    }
}

impl HammingProfile {
    /// Path length `L`.
    pub fn len(&self) -> usize {
        self.first_prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.states[i * self.words..(i + 1) * self.words]
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        let len = self.len();
        if i > len || j > len {
            return Err(Error::IndexOutOfRange(format!("({i}, {j}) with L = {len}")));
        }
        Ok(())
    }

    /// `H(v_i, v_j)`.
    pub fn hamming(&self, i: usize, j: usize) -> Result<usize> {
        self.check(i, j)?;
        Ok(self
            .row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// `H'(v_i, v_j)`: Hamming distance restricted to the first block.
    pub fn hamming_first_block(&self, i: usize, j: usize) -> Result<usize> {
        self.check(i, j)?;
        let mut total = 0;
        let mut remaining = self.first_block;
        for (a, b) in self.row(i).iter().zip(self.row(j)) {
            if remaining == 0 {
                break;
            }
            let mask = if remaining >= 64 {
                u64::MAX
            } else {
                (1u64 << remaining) - 1
            };
            total += ((a ^ b) & mask).count_ones() as usize;
            remaining = remaining.saturating_sub(64);
        }
        Ok(total)
    }

    /// `D(v_0, v_i)`: first-block updates among the first `i` steps.
    pub fn first_block_prefix(&self, i: usize) -> Result<usize> {
        self.check(i, 0)?;
        Ok(self.first_prefix[i])
    }

    /// `D(v_{L-i}, v_L)`: first-block updates among the last `i` steps.
    pub fn first_block_suffix(&self, i: usize) -> Result<usize> {
        self.check(i, 0)?;
        let len = self.len();
        Ok(self.first_prefix[len] - self.first_prefix[len - i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoodnessMode {
    Antipodal,
    General,
}

/// Thresholds of the good-path predicate, with every regime boundary on
/// `|i - j|` floored to an integer; a boundary value belongs to the lower
/// regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessConfig {
    pub constants: PhaseConstants,
    pub mode: GoodnessMode,
    pub dim: usize,
    pub first_block: usize,
    /// `floor(N^(1/5))`.
    pub short_range: usize,
    /// `floor(c (1/2 + eps) N)` with `c = alpha` (antipodal) or `gamma`.
    pub mid_range: usize,
    /// `floor(c (1/2 + eps2) N)`.
    pub far_range: usize,
}

impl GoodnessConfig {
    pub fn antipodal(dim: usize, epsilon: f64) -> Result<Self> {
        let constants = PhaseConstants::new(1.0, epsilon)?;
        Self::build(constants, GoodnessMode::Antipodal, dim, dim)
    }

    pub fn general(dim: usize, first_block: usize, epsilon: f64) -> Result<Self> {
        let constants = PhaseConstants::for_distance(first_block, dim, epsilon)?;
        Self::build(constants, GoodnessMode::General, dim, first_block)
    }

    pub fn new(mode: GoodnessMode, dim: usize, first_block: usize, epsilon: f64) -> Result<Self> {
        match mode {
            GoodnessMode::Antipodal if first_block != dim => Err(Error::precondition(
                "antipodal mode needs the target at Hamming distance N",
            )),
            GoodnessMode::Antipodal => Self::antipodal(dim, epsilon),
            GoodnessMode::General => Self::general(dim, first_block, epsilon),
        }
    }

    fn build(
        constants: PhaseConstants,
        mode: GoodnessMode,
        dim: usize,
        first_block: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("N must be positive"));
        }
        let n = dim as f64;
        let scale = match mode {
            GoodnessMode::Antipodal => constants.alpha,
            GoodnessMode::General => constants.gamma,
        };
        Ok(Self {
            short_range: n.powf(0.2).floor() as usize,
            mid_range: (scale * (0.5 + constants.epsilon) * n).floor() as usize,
            far_range: (scale * (0.5 + constants.epsilon2) * n).floor() as usize,
            constants,
            mode,
            dim,
            first_block,
        })
    }
}

/// The clause of the good-path predicate that failed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GoodClause {
    /// Total length outside `[alpha (1-eps) N, alpha (1+eps) N]`.
    LengthWindow,
    /// First- or second-block update count outside its window.
    BlockCounts,
    /// `H(v_i, v_j) != |i - j|` for `|i - j| = d <= 3`.
    Local(u8),
    /// `H` not in `{d, d - 2}` for `4 <= d <= N^(1/5)`.
    ShortRange,
    /// `H > (1/2 + eps1) N` in the mid range.
    MidUpper,
    /// `H < d / (alpha + eps3)` in the mid range.
    MidLower,
    /// `H < (1/2 + eps1) N` beyond the far threshold.
    FarRange,
    /// `H' > (1/2 + eps1) beta N` for `d <= gamma (1/2 + eps) N`.
    FirstBlockUpper,
    /// `H' < (1/2 + eps1) beta N` for `d` beyond the far threshold.
    FirstBlockLower,
    /// `H < 2 g(1/2) d / (gamma + eps3)` in the mid range.
    SpreadLower,
    /// First-block updates near an end exceed `delta i`.
    Drift,
}

impl GoodClause {
    pub fn label(&self) -> &'static str {
        match self {
            GoodClause::LengthWindow => "length window",
            GoodClause::BlockCounts => "block counts",
            GoodClause::Local(1) => "|i-j|=1",
            GoodClause::Local(2) => "|i-j|=2",
            GoodClause::Local(_) => "|i-j|=3",
            GoodClause::ShortRange => "4<=|i-j|<=N^(1/5)",
            GoodClause::MidUpper => "H<=(1/2+eps1)N",
            GoodClause::MidLower => "H>=|i-j|/(alpha+eps3)",
            GoodClause::FarRange => "H>=(1/2+eps1)N",
            GoodClause::FirstBlockUpper => "H'<=(1/2+eps1)betaN",
            GoodClause::FirstBlockLower => "H'>=(1/2+eps1)betaN",
            GoodClause::SpreadLower => "H>=2g(1/2)|i-j|/(gamma+eps3)",
            GoodClause::Drift => "D<=delta*i",
        }
    }
}

impl fmt::Display for GoodClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Evaluates the good-path predicate; returns `(true, None)` or `(false,
/// Some(first violated clause))`.
///
/// Clause order: length (or block counts), then `|i-j| <= 3` over the
/// whole path, then the distance profile swept by start index, then (in
/// general mode) the end drift.
pub fn is_good(seq: &UpdateSequence, cfg: &GoodnessConfig) -> Result<(bool, Option<GoodClause>)> {
    if seq.dim != cfg.dim || seq.odd != cfg.first_block {
        return Err(Error::precondition(format!(
            "sequence (N={}, n={}) does not match config (N={}, n={})",
            seq.dim, seq.odd, cfg.dim, cfg.first_block
        )));
    }
    let verdict = match cfg.mode {
        GoodnessMode::Antipodal => check_antipodal(seq, cfg),
        GoodnessMode::General => check_general(seq, cfg),
    };
    Ok(match verdict {
        None => (true, None),
        Some(clause) => (false, Some(clause)),
    })
}

fn check_local(entries: &[usize]) -> Option<GoodClause> {
    // H(v_i, v_{i+2}) = 2 iff a_{i+1} != a_{i+2}; H(v_i, v_{i+3}) = 3 iff
    // the three flips are distinct.
    if entries.windows(2).any(|w| w[0] == w[1]) {
        return Some(GoodClause::Local(2));
    }
    if entries.windows(3).any(|w| w[0] == w[2]) {
        return Some(GoodClause::Local(3));
    }
    None
}

/// Incremental parity tracker for the `O(L^2)` sweep: one generation per
/// start index avoids clearing the buffer.
struct ParitySweep {
    generation: Vec<u32>,
    odd: Vec<bool>,
    current: u32,
}

impl ParitySweep {
    fn new(dim: usize) -> Self {
        Self {
            generation: vec![u32::MAX; dim],
            odd: vec![false; dim],
            current: 0,
        }
    }

    fn restart(&mut self, generation: u32) {
        self.current = generation;
    }

    /// Toggles coordinate `c`; returns true if it became odd.
    #[inline]
    fn toggle(&mut self, c: usize) -> bool {
        if self.generation[c] != self.current {
            self.generation[c] = self.current;
            self.odd[c] = true;
        } else {
            self.odd[c] = !self.odd[c];
        }
        self.odd[c]
    }
}

fn check_antipodal(seq: &UpdateSequence, cfg: &GoodnessConfig) -> Option<GoodClause> {
    let c = &cfg.constants;
    let n = cfg.dim as f64;
    let len = seq.entries.len();
    let l = len as f64;
    if l < c.alpha * (1.0 - c.epsilon) * n || l > c.alpha * (1.0 + c.epsilon) * n {
        return Some(GoodClause::LengthWindow);
    }
    if let Some(clause) = check_local(&seq.entries) {
        return Some(clause);
    }
    let half_plus = (0.5 + c.epsilon1) * n;
    let slope = c.alpha + c.epsilon3;
    let mut sweep = ParitySweep::new(cfg.dim);
    for i in 0..len {
        sweep.restart(i as u32);
        let mut h: i64 = 0;
        for j in (i + 1)..=len {
            h += if sweep.toggle(seq.entries[j - 1]) {
                1
            } else {
                -1
            };
            let d = j - i;
            if d <= 3 {
                continue;
            }
            let hf = h as f64;
            if d <= cfg.short_range {
                if h != d as i64 && h != d as i64 - 2 {
                    return Some(GoodClause::ShortRange);
                }
            } else if d <= cfg.mid_range {
                if hf < d as f64 / slope {
                    return Some(GoodClause::MidLower);
                }
                if hf > half_plus {
                    return Some(GoodClause::MidUpper);
                }
            } else if d <= cfg.far_range {
                if hf < d as f64 / slope {
                    return Some(GoodClause::MidLower);
                }
            } else if hf < half_plus {
                return Some(GoodClause::FarRange);
            }
        }
    }
    None
}

fn check_general(seq: &UpdateSequence, cfg: &GoodnessConfig) -> Option<GoodClause> {
    let c = &cfg.constants;
    let n = cfg.dim as f64;
    let beta_n = cfg.first_block as f64;
    let len = seq.entries.len();

    let first_updates = seq.entries.iter().filter(|&&a| a < cfg.first_block).count() as f64;
    let second_updates = len as f64 - first_updates;
    let first_mean = beta_n * c.x0 / c.x0.tanh();
    let second_mean = (n - beta_n) * c.x0 * c.x0.tanh();
    let outside = |v: f64, m: f64| v < m * (1.0 - c.epsilon) || v > m * (1.0 + c.epsilon);
    if outside(first_updates, first_mean) || outside(second_updates, second_mean) {
        return Some(GoodClause::BlockCounts);
    }
    if let Some(clause) = check_local(&seq.entries) {
        return Some(clause);
    }

    let first_bound = (0.5 + c.epsilon1) * beta_n;
    let spread = 2.0 * c.g(0.5).unwrap_or(0.0) / (c.gamma + c.epsilon3);
    let mut sweep = ParitySweep::new(cfg.dim);
    for i in 0..len {
        sweep.restart(i as u32);
        let (mut h, mut h_first): (i64, i64) = (0, 0);
        for j in (i + 1)..=len {
            let coord = seq.entries[j - 1];
            let step = if sweep.toggle(coord) { 1 } else { -1 };
            h += step;
            if coord < cfg.first_block {
                h_first += step;
            }
            let d = j - i;
            if d <= 3 {
                continue;
            }
            if d <= cfg.short_range && h != d as i64 && h != d as i64 - 2 {
                return Some(GoodClause::ShortRange);
            }
            if d <= cfg.mid_range && h_first as f64 > first_bound {
                return Some(GoodClause::FirstBlockUpper);
            }
            if d > cfg.far_range && (h_first as f64) < first_bound {
                return Some(GoodClause::FirstBlockLower);
            }
            if d > cfg.short_range && d <= cfg.far_range && (h as f64) < spread * d as f64 {
                return Some(GoodClause::SpreadLower);
            }
        }
    }

    let mut head = 0usize;
    let mut tail = 0usize;
    for i in 1..=len / 2 {
        head += usize::from(seq.entries[i - 1] < cfg.first_block);
        tail += usize::from(seq.entries[len - i] < cfg.first_block);
        let bound = c.delta * i as f64;
        if head as f64 > bound || tail as f64 > bound {
            return Some(GoodClause::Drift);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn f1_f2_pmfs_normalize() {
        for &x in &[0.1, 0.5, 0.88137, 1.0, 2.0] {
            let s1: f64 = (0..60).map(|k| pmf_f1(k, x).unwrap()).sum();
            let s2: f64 = (0..60).map(|k| pmf_f2(k, x).unwrap()).sum();
            assert_abs_diff_eq!(s1, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s2, 1.0, epsilon = 1e-12);
        }
        let x0 = (1.0 + 2f64.sqrt()).ln();
        assert_abs_diff_eq!(pmf_f1(1, x0).unwrap(), x0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            pmf_f2(0, 0.4).unwrap(),
            1.0 / 0.4f64.cosh(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(pmf_f2(0, x0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
        assert_eq!(pmf_f1(2, 0.5).unwrap(), 0.0);
        assert_eq!(pmf_f2(3, 0.5).unwrap(), 0.0);
        assert!(pmf_f1(1, 0.0).is_err());
    }

    #[test]
    fn samplers_have_right_support() {
        let mut rng = CounterRng::new(11);
        for _ in 0..10_000 {
            assert_eq!(sample_f1(1.5, &mut rng).unwrap() % 2, 1);
            assert_eq!(sample_f2(1.5, &mut rng).unwrap() % 2, 0);
        }
    }

    #[test]
    fn mu_kn_pmf_examples() {
        let x = 0.5;
        assert_abs_diff_eq!(
            pmf_mu_kn(&[0], 0, 1, 1, x).unwrap(),
            1.0 / x.cosh(),
            epsilon = 1e-15
        );
        // two different sequences of equal length in S_k(n, l)
        let a = pmf_mu_kn(&[0, 0, 1, 2, 2, 1, 0], 0, 1, 3, x).unwrap();
        let b = pmf_mu_kn(&[1, 2, 2, 1, 0, 0, 0], 0, 1, 3, x).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-18);
        assert!(pmf_mu_kn(&[0, 1], 0, 1, 2, x).is_err());
        assert!(pmf_mu_kn(&[1, 0], 1, 2, 2, x).is_err());
        assert!(pmf_mu_kn(&[0, 3], 3, 1, 3, x).is_err());
    }

    #[test]
    fn mu_kn_samples_are_valid() {
        let mut rng = CounterRng::new(5);
        for trial in 0..2000 {
            let dim = 1 + trial % 5;
            let n = trial % (dim + 1);
            let k = (trial / 7) % dim;
            let s = sample_mu_kn(k, n, dim, 0.7, &mut rng).unwrap();
            assert_eq!(*s.entries.last().unwrap(), k);
            assert!(s.reaches_target());
            assert!(pmf_mu_kn(&s.entries, k, n, dim, 0.7).unwrap() > 0.0);
        }
    }

    #[test]
    fn continuous_samples_have_parities_and_sorted_stamps() {
        let mut rng = CounterRng::new(9);
        for _ in 0..200 {
            let s = sample_continuous(12, 5, 0.8, &mut rng).unwrap();
            assert!(s.reaches_target());
            let p = s.positions.as_ref().unwrap();
            assert!(p.windows(2).all(|w| w[0] < w[1]));
            assert!(p.iter().all(|&t| (0.0..=1.0).contains(&t)));
        }
        assert!(sample_continuous(3, 0, 0.5, &mut rng).is_err());
    }

    #[test]
    fn interval_stats_edges() {
        let mut rng = CounterRng::new(2);
        let s = sample_continuous(20, 20, 0.88, &mut rng).unwrap();
        let full = interval_stats(&s, 0.0..=1.0).unwrap();
        assert_eq!(full.total, s.len());
        assert_eq!(full.odd, 20);
        assert_eq!(full.odd_first_block, 20);
        let empty = interval_stats(&s, 0.6..=0.4).unwrap();
        assert_eq!(
            empty,
            IntervalStats {
                total: 0,
                odd: 0,
                odd_first_block: 0
            }
        );
        let s = sample_continuous(20, 8, 0.88, &mut rng).unwrap();
        let full = interval_stats(&s, 0.0..=1.0).unwrap();
        assert_eq!((full.odd, full.odd_first_block), (8, 8));
        let bare = UpdateSequence::new(3, 1, vec![0]).unwrap();
        assert!(matches!(
            interval_stats(&bare, 0.0..=1.0),
            Err(Error::MissingPositions)
        ));
    }

    #[test]
    fn profile_basics() {
        let s = UpdateSequence::new(4, 0, vec![1, 1]).unwrap();
        let p = hamming_profile(&s);
        assert_eq!(p.hamming(0, 2).unwrap(), 0);
        assert_eq!(p.hamming(0, 1).unwrap(), 1);
        let s = UpdateSequence::new(70, 66, (0..70).chain(0..4).collect()).unwrap();
        let p = hamming_profile(&s);
        for i in 0..s.len() {
            assert_eq!(p.hamming(i, i + 1).unwrap(), 1);
        }
        assert_eq!(p.hamming(0, 74).unwrap(), 66);
        assert_eq!(p.hamming_first_block(0, 74).unwrap(), 62);
        assert_eq!(p.first_block_prefix(70).unwrap(), 66);
        assert_eq!(p.first_block_suffix(4).unwrap(), 4);
        assert!(p.hamming(0, 75).is_err());
    }

    #[test]
    fn profile_matches_xor_simulation() {
        let mut rng = CounterRng::new(31);
        for _ in 0..200 {
            let len = rng.random_range(0..=20usize);
            let entries: Vec<usize> = (0..len).map(|_| rng.random_range(0..6)).collect();
            let s = UpdateSequence::new(6, 3, entries.clone()).unwrap();
            let p = hamming_profile(&s);
            let mut vertices = vec![0u64];
            for &c in &entries {
                let last = *vertices.last().unwrap();
                vertices.push(last ^ (1 << c));
            }
            for i in 0..=len {
                for j in 0..=len {
                    let h = p.hamming(i, j).unwrap();
                    assert_eq!(h, (vertices[i] ^ vertices[j]).count_ones() as usize);
                    assert_eq!(h % 2, i.abs_diff(j) % 2);
                    assert!(h <= i.abs_diff(j));
                    assert_eq!(
                        p.hamming_first_block(i, j).unwrap(),
                        ((vertices[i] ^ vertices[j]) & 0b111).count_ones() as usize
                    );
                }
            }
        }
    }

    fn antipodal_sequence_with_repeat(dim: usize) -> UpdateSequence {
        // each coordinate once, plus two cancelling extra flips of
        // coordinate 0 placed side by side, padded to the length window
        let cfg = GoodnessConfig::antipodal(dim, 0.05).unwrap();
        let target_len = (cfg.constants.alpha * dim as f64).round() as usize;
        let mut entries: Vec<usize> = (0..dim).collect();
        let mut c = 1;
        while entries.len() + 2 <= target_len {
            entries.push(c % dim);
            entries.push(c % dim);
            c += 1;
        }
        UpdateSequence::new(dim, dim, entries).unwrap()
    }

    #[test]
    fn repeats_fail_local_clause() {
        let s = antipodal_sequence_with_repeat(200);
        let cfg = GoodnessConfig::antipodal(200, 0.05).unwrap();
        assert_eq!(
            is_good(&s, &cfg).unwrap(),
            (false, Some(GoodClause::Local(2)))
        );
        assert_eq!(GoodClause::Local(2).to_string(), "|i-j|=2");
    }

    #[test]
    fn shortest_path_fails_length_window() {
        let dim = 500;
        let s = UpdateSequence::new(dim, dim, (0..dim).collect()).unwrap();
        let cfg = GoodnessConfig::antipodal(dim, 0.05).unwrap();
        assert_eq!(
            is_good(&s, &cfg).unwrap(),
            (false, Some(GoodClause::LengthWindow))
        );
    }

    #[test]
    fn good_sequences_are_self_avoiding() {
        let mut rng = CounterRng::new(77);
        let dim = 400;
        let cfg = GoodnessConfig::antipodal(dim, 0.05).unwrap();
        let mut goods = 0;
        for _ in 0..60 {
            let s = sample_continuous(dim, dim, cfg.constants.x0, &mut rng).unwrap();
            let (good, clause) = is_good(&s, &cfg).unwrap();
            assert_eq!(good, clause.is_none());
            if good {
                goods += 1;
                let p = hamming_profile(&s);
                for i in 0..=s.len() {
                    for j in (i + 1)..=s.len() {
                        assert!(p.hamming(i, j).unwrap() > 0);
                    }
                }
            }
        }
        assert!(goods > 0);
    }

    #[test]
    fn general_mode_checks() {
        let mut rng = CounterRng::new(8);
        let cfg = GoodnessConfig::general(300, 150, 0.05).unwrap();
        assert!(cfg.constants.delta > 0.0);
        let mut clauses = std::collections::HashSet::new();
        for _ in 0..40 {
            let s = sample_continuous(300, 150, cfg.constants.x0, &mut rng).unwrap();
            let (good, clause) = is_good(&s, &cfg).unwrap();
            assert_eq!(good, clause.is_none());
            clauses.insert(clause);
        }
        assert!(!clauses.is_empty());
        assert!(GoodnessConfig::new(GoodnessMode::Antipodal, 10, 5, 0.05).is_err());
        let s = UpdateSequence::new(10, 10, vec![0]).unwrap();
        assert!(is_good(&s, &cfg).is_err());
    }
}
