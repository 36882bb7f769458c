//! Conditioned fitness fields on `{0,1}^N` and accessibility decisions.
//!
//! Vertices are `N`-bit labels (coordinate `i` is bit `i`). The source is
//! always the all-zeros vertex and the target has its first `n` bits set.
//! The source is pinned to fitness `0`, the target to the gap `x`, and every
//! other vertex carries an independent uniform value.

use std::collections::VecDeque;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_key, draw_unit};

/// Largest dimension for accessibility simulation.
pub const MAX_SIM_DIM: usize = 30;
/// Largest dimension for exact path counting.
pub const MAX_EXACT_DIM: usize = 12;
/// Largest dimension for which a field is stored densely.
pub const MAX_DENSE_DIM: usize = 24;
/// Oracle-scale caps for sequence enumeration.
pub const MAX_ENUM_DIM: usize = 4;
pub const MAX_ENUM_LEN: usize = 8;

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    pub const ORIGIN: VertexId = VertexId(0);

    /// The vertex with coordinates `0..n` set.
    pub fn prefix(n: usize) -> Self {
        VertexId(if n >= 32 { u32::MAX } else { (1u32 << n) - 1 })
    }

    #[inline]
    pub fn flip(self, coord: usize) -> Self {
        VertexId(self.0 ^ (1 << coord))
    }

    #[inline]
    pub fn bit(self, coord: usize) -> bool {
        (self.0 >> coord) & 1 == 1
    }

    #[inline]
    pub fn hamming(self, other: VertexId) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    pub fn is_neighbor(self, other: VertexId) -> bool {
        self.hamming(other) == 1
    }
}

#[derive(Clone, Debug, PartialEq)]
enum FieldValues {
    /// Interior value of vertex `v` is draw `v` of the stream `key`.
    Hashed {
        key: u64,
    },
    Dense(Vec<f64>),
}

/// One realization of the conditioned fitness field.
#[derive(Clone, Debug, PartialEq)]
pub struct FitnessField {
    dim: usize,
    hamming: usize,
    gap: f64,
    source: VertexId,
    target: VertexId,
    values: FieldValues,
}

fn check_shape(dim: usize, hamming: usize, gap: f64) -> Result<()> {
    if dim > MAX_SIM_DIM {
        return Err(Error::SizeCap {
            what: "N",
            value: dim,
            max: MAX_SIM_DIM,
        });
    }
    if hamming == 0 || hamming > dim {
        return Err(Error::precondition(format!(
            "need 1 <= n <= N (source and target must differ), got n={hamming}, N={dim}"
        )));
    }
    if gap.is_nan() || gap <= 0.0 || gap > 1.0 {
        return Err(Error::domain(format!(
            "gap x must lie in (0, 1], got {gap}"
        )));
    }
    Ok(())
}

/// Samples a field with source `0^N` (value 0) and target `1^n 0^(N-n)`
/// (value `x`). Interior values are a pure function of `seed`, independent
/// of `x`, so fields sharing a seed differ only in their gap.
pub fn sample_field(dim: usize, hamming: usize, x: f64, seed: u64) -> Result<FitnessField> {
    check_shape(dim, hamming, x)?;
    Ok(FitnessField {
        dim,
        hamming,
        gap: x,
        source: VertexId::ORIGIN,
        target: VertexId::prefix(hamming),
        values: FieldValues::Hashed {
            key: derive_key(seed, &[dim as u64]),
        },
    })
}

impl FitnessField {
    /// Builds a dense field from explicit values for all `2^N` vertices;
    /// the source and target entries are overwritten with `0` and `x`.
    pub fn from_values(dim: usize, hamming: usize, x: f64, mut values: Vec<f64>) -> Result<Self> {
        check_shape(dim, hamming, x)?;
        if dim > MAX_DENSE_DIM {
            return Err(Error::SizeCap {
                what: "N (dense)",
                value: dim,
                max: MAX_DENSE_DIM,
            });
        }
        if values.len() != 1 << dim {
            return Err(Error::domain(format!(
                "expected {} values, got {}",
                1usize << dim,
                values.len()
            )));
        }
        let target = VertexId::prefix(hamming);
        values[0] = 0.0;
        values[target.0 as usize] = x;
        Ok(Self {
            dim,
            hamming,
            gap: x,
            source: VertexId::ORIGIN,
            target,
            values: FieldValues::Dense(values),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamming(&self) -> usize {
        self.hamming
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn target(&self) -> VertexId {
        self.target
    }

    #[inline]
    pub fn value(&self, v: VertexId) -> f64 {
        if v == self.source {
            return 0.0;
        }
        if v == self.target {
            return self.gap;
        }
        match &self.values {
            FieldValues::Hashed { key } => draw_unit(*key, v.0 as u64),
            FieldValues::Dense(vals) => vals[v.0 as usize],
        }
    }

    /// The same interior values with a different gap.
    pub fn with_gap(&self, x: f64) -> Result<Self> {
        check_shape(self.dim, self.hamming, x)?;
        let mut out = self.clone();
        out.gap = x;
        if let FieldValues::Dense(vals) = &mut out.values {
            vals[self.target.0 as usize] = x;
        }
        Ok(out)
    }

    /// All `2^N` values, endpoints included.
    pub fn materialize(&self) -> Result<Vec<f64>> {
        if self.dim > MAX_DENSE_DIM {
            return Err(Error::SizeCap {
                what: "N (dense)",
                value: self.dim,
                max: MAX_DENSE_DIM,
            });
        }
        Ok((0..1u32 << self.dim)
            .map(|v| self.value(VertexId(v)))
            .collect())
    }

    #[inline]
    fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.dim).map(move |c| v.flip(c))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessResult {
    pub accessible: bool,
    /// Vertices touched by the search, both endpoints included.
    pub visited_count: usize,
    pub path_witness: Option<Vec<VertexId>>,
}

/// Reusable search buffers; keeps allocations across trials.
#[derive(Default, Debug)]
pub struct AccessScratch {
    forward: FxHashMap<u32, u32>,
    backward: FxHashMap<u32, u32>,
    queue: VecDeque<VertexId>,
}

impl AccessScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self) {
        self.forward.clear();
        self.backward.clear();
        self.queue.clear();
    }
}

/// Decides whether an increasing path from source to target exists.
pub fn is_accessible(field: &FitnessField) -> AccessResult {
    is_accessible_with(field, &mut AccessScratch::new())
}

/// Threshold-split search. Any increasing path crosses the level
/// `theta = x/2` on exactly one edge `(a, b)` with `X_a <= theta < X_b`,
/// where `a` is reachable from the source through values `<= theta` and `b`
/// reaches the target through values `> theta`. Both sides are explored
/// separately; each stays far smaller than the full reachable set, which is
/// a macroscopic fraction of the cube near the threshold.
pub fn is_accessible_with(field: &FitnessField, scratch: &mut AccessScratch) -> AccessResult {
    scratch.reset();
    let theta = 0.5 * field.gap;
    let source = field.source;
    let target = field.target;

    // Backward set: vertices above theta that reach the target.
    scratch.backward.insert(target.0, target.0);
    scratch.queue.push_back(target);
    while let Some(v) = scratch.queue.pop_front() {
        let xv = field.value(v);
        for w in field.neighbors(v) {
            if w == source || scratch.backward.contains_key(&w.0) {
                continue;
            }
            let xw = field.value(w);
            if xw > theta && xw < xv {
                scratch.backward.insert(w.0, v.0);
                scratch.queue.push_back(w);
            }
        }
    }

    // Forward set: vertices at or below theta reachable from the source;
    // stop at the first edge into the backward set.
    scratch.forward.insert(source.0, source.0);
    scratch.queue.push_back(source);
    let mut meeting = None;
    'search: while let Some(v) = scratch.queue.pop_front() {
        let xv = field.value(v);
        for w in field.neighbors(v) {
            if scratch.backward.contains_key(&w.0) {
                meeting = Some((v, w));
                break 'search;
            }
            if scratch.forward.contains_key(&w.0) {
                continue;
            }
            let xw = field.value(w);
            if xw > xv && xw <= theta {
                scratch.forward.insert(w.0, v.0);
                scratch.queue.push_back(w);
            }
        }
    }

    let visited_count = scratch.forward.len() + scratch.backward.len();
    let path_witness = meeting.map(|(a, b)| {
        let mut head = vec![a];
        let mut cur = a.0;
        while cur != source.0 {
            cur = scratch.forward[&cur];
            head.push(VertexId(cur));
        }
        head.reverse();
        let mut cur = b.0;
        head.push(b);
        while cur != target.0 {
            cur = scratch.backward[&cur];
            head.push(VertexId(cur));
        }
        head
    });
    AccessResult {
        accessible: path_witness.is_some(),
        visited_count,
        path_witness,
    }
}

/// Plain forward BFS over increasing moves below the gap; kept as an
/// independent cross-check of [`is_accessible`].
pub fn is_accessible_bfs(field: &FitnessField) -> AccessResult {
    let mut parent: FxHashMap<u32, u32> = FxHashMap::default();
    let mut queue = VecDeque::new();
    parent.insert(field.source.0, field.source.0);
    queue.push_back(field.source);
    let mut last = None;
    while let Some(v) = queue.pop_front() {
        let xv = field.value(v);
        if v.is_neighbor(field.target) && xv < field.gap {
            last = Some(v);
            break;
        }
        for w in field.neighbors(v) {
            if w == field.target || parent.contains_key(&w.0) {
                continue;
            }
            let xw = field.value(w);
            if xw > xv && xw < field.gap {
                parent.insert(w.0, v.0);
                queue.push_back(w);
            }
        }
    }
    let path_witness = last.map(|mut v| {
        let mut path = vec![field.target, v];
        while v != field.source {
            v = VertexId(parent[&v.0]);
            path.push(v);
        }
        path.reverse();
        path
    });
    AccessResult {
        accessible: path_witness.is_some(),
        visited_count: parent.len(),
        path_witness,
    }
}

/// Exact number of increasing source-to-target paths.
///
/// Increasing paths are paths in the DAG that orients every edge towards
/// the larger value, so they are counted by one pass over the vertices in
/// increasing value order: `paths(v) = sum of paths(w)` over lower neighbors.
pub fn count_accessible_paths(field: &FitnessField) -> Result<u128> {
    if field.dim > MAX_EXACT_DIM {
        return Err(Error::SizeCap {
            what: "N (exact count)",
            value: field.dim,
            max: MAX_EXACT_DIM,
        });
    }
    let values = field.materialize()?;
    let gap = field.gap;
    let mut order: Vec<u32> = (0..values.len() as u32)
        .filter(|&v| values[v as usize] <= gap)
        .collect();
    order.sort_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]));

    let mut paths = vec![0u128; values.len()];
    paths[field.source.0 as usize] = 1;
    for &v in &order {
        let xv = values[v as usize];
        if v == field.source.0 {
            continue;
        }
        let mut acc: u128 = 0;
        for c in 0..field.dim {
            let w = (v ^ (1 << c)) as usize;
            if values[w] < xv {
                acc = acc.checked_add(paths[w]).ok_or_else(|| {
                    Error::Overflow("accessible path count exceeds 128 bits".into())
                })?;
            }
        }
        paths[v as usize] = acc;
    }
    Ok(paths[field.target.0 as usize])
}

/// All sequences in `{0..N-1}^ell` in which each of coordinates `0..n`
/// occurs an odd number of times and every other coordinate an even number
/// of times (coordinates are 0-based here).
pub fn enumerate_sequences(n: usize, dim: usize, ell: usize) -> Result<Vec<Vec<usize>>> {
    if dim > MAX_ENUM_DIM {
        return Err(Error::SizeCap {
            what: "N (enumeration)",
            value: dim,
            max: MAX_ENUM_DIM,
        });
    }
    if ell > MAX_ENUM_LEN {
        return Err(Error::SizeCap {
            what: "ell (enumeration)",
            value: ell,
            max: MAX_ENUM_LEN,
        });
    }
    if n > dim {
        return Err(Error::domain(format!("need n <= N, got n={n}, N={dim}")));
    }
    if dim == 0 {
        return Ok(if ell == 0 { vec![vec![]] } else { vec![] });
    }
    let target = VertexId::prefix(n).0;
    let total = dim.pow(ell as u32);
    let mut out = Vec::new();
    let mut seq = vec![0usize; ell];
    for code in 0..total {
        let mut rest = code;
        let mut parity = 0u32;
        for slot in seq.iter_mut() {
            *slot = rest % dim;
            rest /= dim;
            parity ^= 1 << *slot;
        }
        if parity == target {
            out.push(seq.clone());
        }
    }
    Ok(out)
}

/// Vertices visited when the flips in `seq` are applied from the origin.
pub fn walk_from_origin(seq: &[usize]) -> Vec<VertexId> {
    let mut v = VertexId::ORIGIN;
    let mut out = Vec::with_capacity(seq.len() + 1);
    out.push(v);
    for &c in seq {
        v = v.flip(c);
        out.push(v);
    }
    out
}

/// The flip sequence of a vertex path; `None` if two consecutive vertices
/// are not neighbors.
pub fn sequence_of_path(path: &[VertexId]) -> Option<Vec<usize>> {
    path.windows(2)
        .map(|w| {
            let d = w[0].0 ^ w[1].0;
            (d.count_ones() == 1).then(|| d.trailing_zeros() as usize)
        })
        .collect()
}

/// Checks an accessibility witness: starts at the source, ends at the
/// target, moves between neighbors, and strictly increases in value.
pub fn verify_witness(field: &FitnessField, path: &[VertexId]) -> bool {
    if path.first() != Some(&field.source) || path.last() != Some(&field.target) {
        return false;
    }
    let distinct: FxHashSet<u32> = path.iter().map(|v| v.0).collect();
    distinct.len() == path.len()
        && path
            .windows(2)
            .all(|w| w[0].is_neighbor(w[1]) && field.value(w[0]) < field.value(w[1]))
}
