//! Bit-sampling LSH over histogram-encoded datacubes.
//!
//! Each cell posterior becomes a `B1·B2`-bit code: the probability range
//! `[0, 1]` is split into `B1` buckets, and a bucket holding mass `m` sets
//! its first `⌊m·B2⌋` bits. Concatenated over a global cell vocabulary this
//! gives a bit vector whose Hamming distance approximates `B2` times the L1
//! distance between the cell histograms — and L1 is twice the total
//! variation. A hash function samples `k` of those bit positions; `ℓ` such
//! tables give a candidate set that is re-ranked with the exact datacube
//! distance.
//!
//! Bit vectors are never materialized during hashing: a key is assembled
//! from the stored cells alone, with absent cells reading as zero bits.

mod persist;

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datacube::{Datacube, PairFeature};
use crate::kernel::{datacube_distance, std_normal_cdf, CellPosterior, CubeKey, CubeStore};
use crate::util::splitmix64;
use crate::{Error, Result};

/// Histogram bit code for one cell: `b1` buckets of `b2` bits, set bits
/// forming a prefix within each bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCode {
    words: Vec<u64>,
    bits: usize,
}

impl CellCode {
    fn zeroed(bits: usize) -> Self {
        CellCode { words: vec![0; bits.div_ceil(64)], bits }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.bits);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn hamming(&self, other: &CellCode) -> u32 {
        debug_assert_eq!(self.bits, other.bits);
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones()).sum()
    }
}

/// Probability mass of the posterior in each of `b1` buckets over `[0, 1]`,
/// with tail mass assigned to the end buckets. A point mass lands entirely
/// in its own bucket.
pub fn bucket_masses(post: &CellPosterior, b1: usize) -> Vec<f64> {
    let mut masses = vec![0.0; b1];
    if post.is_point_mass() {
        let bucket = ((post.mean * b1 as f64).floor() as usize).min(b1 - 1);
        masses[bucket] = 1.0;
        return masses;
    }
    let sd = post.variance().sqrt();
    let cdf = |x: f64| std_normal_cdf((x - post.mean) / sd);
    let mut below = 0.0; // mass to the left of the current edge
    for (m, slot) in masses.iter_mut().enumerate() {
        let upto = if m == b1 - 1 { 1.0 } else { cdf((m + 1) as f64 / b1 as f64) };
        *slot = upto - below;
        below = upto;
    }
    masses
}

/// Turn bucket masses into the prefix bit code.
pub fn code_from_masses(masses: &[f64], b2: usize) -> CellCode {
    let b1 = masses.len();
    let mut code = CellCode::zeroed(b1 * b2);
    for (m, &mass) in masses.iter().enumerate() {
        let ones = ((mass * b2 as f64).floor() as usize).min(b2);
        for bit in 0..ones {
            code.set(m * b2 + bit);
        }
    }
    code
}

/// Histogram bit code of one cell posterior.
pub fn encode_cell(post: &CellPosterior, b1: usize, b2: usize) -> CellCode {
    debug_assert!(b1 >= 2 && b2 >= 1);
    code_from_masses(&bucket_masses(post, b1), b2)
}

/// Index parameters. `k_bits` sampled positions per hash, `tables`
/// independent hash tables, `b1 × b2` bits per encoded cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LshParams {
    pub k_bits: usize,
    pub tables: usize,
    pub b1: usize,
    pub b2: usize,
    pub seed: u64,
}

impl Default for LshParams {
    fn default() -> Self {
        LshParams { k_bits: 16, tables: 8, b1: 8, b2: 8, seed: 0 }
    }
}

/// Sampled bit positions of one hash function, grouped by vocabulary cell so
/// a key can be assembled from stored cells only.
#[derive(Debug, Clone, PartialEq, Eq)]
struct HashSpec {
    /// Global bit positions, in sampled order (defines key bit order).
    positions: Vec<u64>,
    /// (vocab cell index, [(bit offset within cell, key bit position)])
    groups: Vec<(u32, Vec<(u32, u8)>)>,
}

impl HashSpec {
    fn from_positions(positions: Vec<u64>, bits_per_cell: usize) -> Self {
        let mut by_cell: HashMap<u32, Vec<(u32, u8)>> = HashMap::new();
        for (key_bit, &pos) in positions.iter().enumerate() {
            let cell = (pos / bits_per_cell as u64) as u32;
            let offset = (pos % bits_per_cell as u64) as u32;
            by_cell.entry(cell).or_default().push((offset, key_bit as u8));
        }
        let mut groups: Vec<_> = by_cell.into_iter().collect();
        groups.sort_unstable_by_key(|(cell, _)| *cell);
        HashSpec { positions, groups }
    }
}

/// Result of an approximate top-k query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    /// `(cube key, exact distance)`, ascending by distance.
    pub hits: Vec<(CubeKey, f64)>,
    /// True when every table missed and a random sample was scanned instead.
    pub used_fallback: bool,
}

/// Bit-sampling Hamming LSH over a set of training datacubes.
///
/// Immutable after build; queries perform no mutation.
#[derive(Debug, Clone, PartialEq)]
pub struct LshIndex {
    params: LshParams,
    /// Sorted union of cells observed at build time; fixes the bit layout.
    vocab: Vec<PairFeature>,
    vocab_rank: HashMap<PairFeature, u32>,
    specs: Vec<HashSpec>,
    /// Per table: key → entry indices in insertion order.
    tables: Vec<HashMap<u64, Vec<u32>>>,
    entries: Vec<CubeKey>,
}

impl LshIndex {
    /// Build the index over training cubes. Fails when `k_bits` is zero or
    /// exceeds the total bit layout `M·B1·B2`.
    pub fn build<'a>(
        cubes: impl IntoIterator<Item = &'a Datacube>,
        params: &LshParams,
    ) -> Result<Self> {
        if params.tables == 0 {
            return Err(Error::InvalidParameter("need at least one hash table".into()));
        }
        if params.b1 < 2 || params.b2 < 1 {
            return Err(Error::InvalidParameter("need b1 >= 2 and b2 >= 1".into()));
        }
        let cubes: Vec<&Datacube> = cubes.into_iter().collect();
        if cubes.is_empty() {
            return Err(Error::InvalidParameter("cube set must be non-empty".into()));
        }

        let mut vocab: Vec<PairFeature> = cubes
            .iter()
            .flat_map(|c| c.cells().map(|(s, _)| *s))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        vocab.shrink_to_fit();
        let total_bits = vocab.len() * params.b1 * params.b2;
        if params.k_bits == 0 || params.k_bits > total_bits {
            return Err(Error::InvalidParameter(format!(
                "k_bits must lie in [1, {total_bits}], got {}",
                params.k_bits
            )));
        }
        let vocab_rank =
            vocab.iter().enumerate().map(|(r, &s)| (s, r as u32)).collect::<HashMap<_, _>>();

        // Each table's sample depends only on (seed, table index) so a longer
        // index shares its leading tables with a shorter one.
        let bits_per_cell = params.b1 * params.b2;
        let specs: Vec<HashSpec> = (0..params.tables)
            .map(|tbl| {
                let tseed = splitmix64(params.seed ^ splitmix64(0x7A31 + tbl as u64));
                let mut rng = ChaCha8Rng::seed_from_u64(tseed);
                let positions: Vec<u64> =
                    rand::seq::index::sample(&mut rng, total_bits, params.k_bits)
                        .iter()
                        .map(|p| p as u64)
                        .collect();
                HashSpec::from_positions(positions, bits_per_cell)
            })
            .collect();

        let mut index = LshIndex {
            params: *params,
            vocab,
            vocab_rank,
            specs,
            tables: vec![HashMap::new(); params.tables],
            entries: Vec::with_capacity(cubes.len()),
        };
        for cube in cubes {
            let entry = index.entries.len() as u32;
            index.entries.push(CubeKey { node: cube.center, t: cube.t });
            let keys = index.hash_cube(cube);
            for (tbl, key) in keys.into_iter().enumerate() {
                index.tables[tbl].entry(key).or_default().push(entry);
            }
        }
        Ok(index)
    }

    pub fn params(&self) -> &LshParams {
        &self.params
    }

    pub fn vocab(&self) -> &[PairFeature] {
        &self.vocab
    }

    pub fn entries(&self) -> &[CubeKey] {
        &self.entries
    }

    /// Sampled bit positions of each hash function.
    pub fn hash_positions(&self) -> Vec<&[u64]> {
        self.specs.iter().map(|s| s.positions.as_slice()).collect()
    }

    /// All `ℓ` keys of a cube, assembled from its stored cells only. Cells
    /// outside the build vocabulary contribute zero bits.
    pub fn hash_cube(&self, cube: &Datacube) -> Vec<u64> {
        let mut codes: HashMap<u32, CellCode> = HashMap::new();
        let mut keys = vec![0u64; self.specs.len()];
        for (tbl, spec) in self.specs.iter().enumerate() {
            for (cell_idx, group) in &spec.groups {
                let cell = self.vocab[*cell_idx as usize];
                let Some(counts) = cube.get(&cell) else { continue };
                let code = codes.entry(*cell_idx).or_insert_with(|| {
                    encode_cell(
                        &CellPosterior::from_counts(counts.n as f64, counts.n_plus as f64),
                        self.params.b1,
                        self.params.b2,
                    )
                });
                for &(offset, key_bit) in group {
                    if code.bit(offset as usize) {
                        keys[tbl] |= 1u64 << key_bit;
                    }
                }
            }
        }
        keys
    }

    /// Full bit vector of a cube under this index's layout. Only used by
    /// tests and diagnostics; hashing never materializes it.
    pub fn materialize_bits(&self, cube: &Datacube) -> Vec<bool> {
        let bits_per_cell = self.params.b1 * self.params.b2;
        let mut out = vec![false; self.vocab.len() * bits_per_cell];
        for (s, counts) in cube.cells() {
            let Some(&rank) = self.vocab_rank.get(s) else { continue };
            let code = encode_cell(
                &CellPosterior::from_counts(counts.n as f64, counts.n_plus as f64),
                self.params.b1,
                self.params.b2,
            );
            for off in 0..bits_per_cell {
                out[rank as usize * bits_per_cell + off] = code.bit(off);
            }
        }
        out
    }

    /// Approximate top-k nearest datacubes: gather up to `max(ℓ, top_k)`
    /// distinct cubes that share any hash key with the query (first-found
    /// order), re-rank by exact distance, and return the best `top_k`. When
    /// every table misses, a seeded random sample of `4·top_k` cubes is
    /// scanned instead and the result is flagged.
    pub fn query(
        &self,
        store: &CubeStore,
        query: &Datacube,
        top_k: usize,
        lambda: f64,
    ) -> Result<QueryResult> {
        let keys = self.hash_cube(query);
        let cap = self.params.tables.max(top_k);
        let mut seen: HashSet<u32> = HashSet::new();
        let mut candidates: Vec<u32> = Vec::new();
        'outer: for (tbl, key) in keys.iter().enumerate() {
            if let Some(bucket) = self.tables[tbl].get(key) {
                for &entry in bucket {
                    if seen.insert(entry) {
                        candidates.push(entry);
                        if candidates.len() == cap {
                            break 'outer;
                        }
                    }
                }
            }
        }

        let mut used_fallback = false;
        if candidates.is_empty() {
            used_fallback = true;
            let qseed = splitmix64(
                self.params.seed ^ splitmix64((query.center as u64) << 32 | query.t as u64),
            );
            let mut rng = ChaCha8Rng::seed_from_u64(qseed);
            let amount = (4 * top_k).min(self.entries.len());
            candidates = rand::seq::index::sample(&mut rng, self.entries.len(), amount)
                .iter()
                .map(|i| i as u32)
                .collect();
        }

        let mut hits: Vec<(CubeKey, f64)> = Vec::with_capacity(candidates.len());
        for entry in candidates {
            let key = self.entries[entry as usize];
            let cube = store.get(key.node, key.t).ok_or_else(|| {
                Error::IndexFormat(format!(
                    "index entry (node {}, t {}) not present in cube store",
                    key.node, key.t
                ))
            })?;
            hits.push((key, datacube_distance(query, cube, lambda)));
        }
        hits.sort_by(|a, b| a.1.total_cmp(&b.1));
        hits.truncate(top_k);
        Ok(QueryResult { hits, used_fallback })
    }
}
