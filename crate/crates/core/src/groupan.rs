//! Block systems of the groups generated by toy round functions.
//!
//! For an SPN with key addition modulo `2^n`, the translations act
//! regularly on `Z_{2^n}`, so every block system is the coset partition of
//! some subgroup `<2^q>`: residues modulo `2^q`. Primitivity then reduces to
//! checking whether the keyless map `rho` respects any of these `n - 1`
//! partitions. The Feistel group has no such shortcut and is searched with
//! the minimal-block closure instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ciphersim::{CipherKind, FeistelGostCipher, SpnModCipher};
use crate::error::{Error, Result};

/// Largest state width for coset partitions.
pub const MAX_PARTITION_BITS: usize = 24;

/// Largest state width for the SPN check.
pub const MAX_SPN_BITS: usize = 20;

/// Largest full state width (both halves) for the Feistel search.
pub const MAX_FEISTEL_BITS: usize = 14;

/// Number of per-key block tables kept by [`attack_demo`].
pub const ATTACK_TABLES: usize = 16;

/// Partition of `Z_{2^n}` into the `2^q` residue classes modulo `2^q`,
/// i.e. the cosets of `<2^q>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetPartition {
    q: usize,
    n: usize,
}

impl CosetPartition {
    pub fn new(q: usize, n: usize) -> Result<Self> {
        if n > MAX_PARTITION_BITS {
            return Err(Error::GuardExceeded {
                what: "partition state width",
                limit: MAX_PARTITION_BITS,
                got: n,
            });
        }
        if q == 0 || q >= n {
            return Err(Error::InvalidParameter(format!(
                "q must be in 1..={} for a nontrivial partition, got {q}",
                n.saturating_sub(1)
            )));
        }
        Ok(Self { q, n })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> u64 {
        1 << self.q
    }

    pub fn block_size(&self) -> u64 {
        1 << (self.n - self.q)
    }

    pub fn block_of(&self, x: u64) -> u64 {
        x & (self.block_count() - 1)
    }

    pub fn block(&self, b: u64) -> Vec<u64> {
        (0..self.block_size()).map(|i| (i << self.q) | b).collect()
    }

    /// Block index of every point.
    pub fn labels(&self) -> Vec<u64> {
        (0..1u64 << self.n).map(|x| self.block_of(x)).collect()
    }
}

pub fn coset_partition(q: usize, n: usize) -> Result<CosetPartition> {
    CosetPartition::new(q, n)
}

fn check_perm_len(perm: &[u64], n: usize) -> Result<()> {
    if perm.len() as u64 != 1u64 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: perm.len(),
        });
    }
    Ok(())
}

/// The first block whose image meets two blocks, with a point of it that
/// lands away from the block's representative.
fn split_block(perm: &[u64], part: &CosetPartition) -> Option<(u64, u64)> {
    (0..perm.len() as u64).find_map(|x| {
        let r = part.block_of(x);
        (part.block_of(perm[x as usize]) != part.block_of(perm[r as usize])).then_some((r, x))
    })
}

/// Whether `perm` maps every coset onto a coset.
pub fn partition_invariant_under(perm: &[u64], part: &CosetPartition) -> Result<bool> {
    check_perm_len(perm, part.n)?;
    Ok(split_block(perm, part).is_none())
}

/// Whether `perm` maps every class of an arbitrary labelled partition onto a
/// class.
pub fn labels_invariant_under(perm: &[u64], labels: &[u64]) -> bool {
    let mut image: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    let mut preimage: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    for (x, &l) in labels.iter().enumerate() {
        let il = labels[perm[x] as usize];
        if *image.entry(l).or_insert(il) != il || *preimage.entry(il).or_insert(l) != l {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrimitivityVerdict {
    Primitive,
    Imprimitive,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QWitness {
    pub q: usize,
    /// Every coset of `<2^q>` maps onto a coset.
    pub invariant: bool,
    /// `<2^q> rho = 0 rho + <2^q>`: the coset through zero maps onto a coset.
    pub theorem_condition: bool,
}

/// A nontrivial block system found by the closure search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSystem {
    /// The point joined with zero to seed the closure.
    pub seed: u64,
    pub block_size: u64,
    pub block_count: u64,
    /// Sorted points of the block containing zero.
    pub block_of_zero: Vec<u64>,
    /// Invariance under every generator, rechecked after the search.
    pub verified: bool,
}

/// Deterministic work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub points: u64,
    pub partitions_checked: u64,
    pub seeds_examined: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitivityReport {
    pub cipher: CipherKind,
    pub verdict: PrimitivityVerdict,
    /// Per-`q` checks, SPN only.
    pub witnesses: Vec<QWitness>,
    /// Closure search result, Feistel only.
    pub block_system: Option<BlockSystem>,
    pub stats: SearchStats,
    pub note: Option<String>,
}

impl PrimitivityReport {
    fn undecided(cipher: CipherKind, note: String, stats: SearchStats) -> Self {
        Self {
            cipher,
            verdict: PrimitivityVerdict::Undecided,
            witnesses: Vec::new(),
            block_system: None,
            stats,
            note: Some(note),
        }
    }

    /// `q` values whose coset partition is invariant.
    pub fn invariant_qs(&self) -> Vec<usize> {
        self.witnesses
            .iter()
            .filter(|w| w.invariant)
            .map(|w| w.q)
            .collect()
    }

    /// Internal consistency: the verdict matches the witnesses, and full
    /// invariance at `q` implies the zero-coset condition at `q`.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Precondition(msg));
        for w in &self.witnesses {
            if w.invariant && !w.theorem_condition {
                return fail(format!(
                    "q = {}: partition invariant but the zero coset condition fails",
                    w.q
                ));
            }
        }
        let found = self.witnesses.iter().any(|w| w.invariant)
            || self.block_system.as_ref().is_some_and(|b| b.verified);
        match self.verdict {
            PrimitivityVerdict::Imprimitive if !found => {
                fail("imprimitive verdict without an invariant partition".into())
            }
            PrimitivityVerdict::Primitive if found => {
                fail("primitive verdict alongside an invariant partition".into())
            }
            PrimitivityVerdict::Primitive
                if self.cipher == CipherKind::Spnmod
                    && self.witnesses.len() as u64 + 1 != u64::from(self.stats.points.trailing_zeros()) =>
            {
                fail("primitive verdict before every q was checked".into())
            }
            _ => Ok(()),
        }
    }
}

/// `rho(x) mod 2^q` depends only on `x mod 2^q`, and the zero coset maps
/// onto the coset of `rho(0)`.
fn q_witness(rho: &[u64], n: usize, q: usize) -> QWitness {
    let part = CosetPartition::new(q, n).expect("q in range");
    let target = part.block_of(rho[0]);
    let theorem_condition = (0..part.block_size())
        .all(|i| part.block_of(rho[(i << q) as usize]) == target);
    QWitness {
        q,
        invariant: split_block(rho, &part).is_none(),
        theorem_condition,
    }
}

/// Checks every coset partition `q = 1..n-1` against `rho = gamma lambda`.
pub fn spnmod_primitivity(cipher: &SpnModCipher) -> PrimitivityReport {
    let n = cipher.n();
    let stats = SearchStats {
        points: 1u64.checked_shl(n as u32).unwrap_or(0),
        ..SearchStats::default()
    };
    if n > MAX_SPN_BITS {
        return PrimitivityReport::undecided(
            CipherKind::Spnmod,
            format!("state width {n} exceeds the limit of {MAX_SPN_BITS} bits"),
            stats,
        );
    }
    if n < 2 {
        return PrimitivityReport::undecided(
            CipherKind::Spnmod,
            "no nontrivial coset partitions below two bits".into(),
            stats,
        );
    }
    let rho = cipher.rho_table().expect("width checked");
    let witnesses: Vec<QWitness> = (1..n)
        .into_par_iter()
        .map(|q| q_witness(&rho, n, q))
        .collect();
    let verdict = if witnesses.iter().any(|w| w.invariant) {
        PrimitivityVerdict::Imprimitive
    } else {
        PrimitivityVerdict::Primitive
    };
    let report = PrimitivityReport {
        cipher: CipherKind::Spnmod,
        verdict,
        stats: SearchStats {
            partitions_checked: witnesses.len() as u64,
            ..stats
        },
        witnesses,
        block_system: None,
        note: None,
    };
    report.validate().expect("coset invariance implies the zero coset condition");
    report
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Merges the classes of `a` and `b`; returns the new class size when a
    /// merge happened.
    fn union(&mut self, a: u32, b: u32) -> Option<u32> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        Some(self.size[ra as usize])
    }
}

/// The finest partition invariant under `gens` that joins `0` and `seed`,
/// as per-point labels; `None` when it is the single-block partition.
///
/// Assumes the generated group is transitive, so block sizes divide the
/// number of points and any class past half of them is everything.
pub fn minimal_block(gens: &[Vec<u64>], seed: u64) -> Option<Vec<u64>> {
    let points = gens.first().map_or(0, Vec::len);
    let half = (points / 2) as u32;
    let mut uf = UnionFind::new(points);
    let mut queue = vec![(0u32, seed as u32)];
    uf.union(0, seed as u32);
    while let Some((a, b)) = queue.pop() {
        for g in gens {
            let (ga, gb) = (g[a as usize] as u32, g[b as usize] as u32);
            if let Some(size) = uf.union(ga, gb) {
                if size > half {
                    return None;
                }
                queue.push((ga, gb));
            }
        }
    }
    Some((0..points as u32).map(|x| u64::from(uf.find(x))).collect())
}

fn block_system(labels: &[u64], seed: u64, all_gens: &[Vec<u64>]) -> BlockSystem {
    let zero = labels[0];
    let block_of_zero: Vec<u64> = (0..labels.len() as u64)
        .filter(|&x| labels[x as usize] == zero)
        .collect();
    let block_size = block_of_zero.len() as u64;
    BlockSystem {
        seed,
        block_size,
        block_count: labels.len() as u64 / block_size,
        block_of_zero,
        verified: all_gens.iter().all(|g| labels_invariant_under(g, labels)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Closure seeds to try, in increasing order.
    pub max_seeds: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_seeds: u64::MAX }
    }
}

/// Generator tables of the Feistel group on packed states `x1 | x2 << h`:
/// unit translations of each half, then `P`. With `full`, every translation
/// by a power of two is listed instead of the unit ones.
pub fn feistel_generators(cipher: &FeistelGostCipher, full: bool) -> Vec<Vec<u64>> {
    let h = cipher.half_n();
    let points = 1u64 << (2 * h);
    let steps: Vec<u64> = if full { (0..h).map(|i| 1 << i).collect() } else { vec![1] };
    let mut gens = Vec::new();
    for &e in &steps {
        for (k1, k2) in [(e, 0), (0, e)] {
            gens.push(
                (0..points)
                    .map(|v| cipher.pack(cipher.add_key(cipher.unpack(v), (k1, k2))))
                    .collect(),
            );
        }
    }
    gens.push(
        (0..points)
            .map(|v| {
                let (a, b) = cipher.unpack(v);
                cipher.pack(cipher.p(a, b))
            })
            .collect(),
    );
    gens
}

/// Searches the group generated by the half translations and `P` for a
/// nontrivial block system, one closure per nonzero seed point.
pub fn feistel_block_search(
    cipher: &FeistelGostCipher,
    budget: SearchBudget,
) -> Result<PrimitivityReport> {
    let bits = 2 * cipher.half_n();
    if bits > MAX_FEISTEL_BITS {
        return Err(Error::GuardExceeded {
            what: "Feistel state width",
            limit: MAX_FEISTEL_BITS,
            got: bits,
        });
    }
    let points = 1u64 << bits;
    let gens = feistel_generators(cipher, false);
    let seeds = (points - 1).min(budget.max_seeds);
    let found = (1..=seeds)
        .into_par_iter()
        .map(|w| minimal_block(&gens, w).map(|labels| (w, labels)))
        .find_first(Option::is_some)
        .flatten();
    let mut stats = SearchStats {
        points,
        partitions_checked: 0,
        seeds_examined: seeds,
    };
    Ok(match found {
        Some((w, labels)) => {
            stats.seeds_examined = w;
            stats.partitions_checked = w;
            let system = block_system(&labels, w, &feistel_generators(cipher, true));
            PrimitivityReport {
                cipher: CipherKind::Feistel,
                verdict: if system.verified {
                    PrimitivityVerdict::Imprimitive
                } else {
                    PrimitivityVerdict::Undecided
                },
                note: (!system.verified)
                    .then(|| "closure partition failed the generator recheck".into()),
                witnesses: Vec::new(),
                block_system: Some(system),
                stats,
            }
        }
        None if seeds < points - 1 => {
            stats.partitions_checked = seeds;
            PrimitivityReport::undecided(
                CipherKind::Feistel,
                format!("seed budget {seeds} below the {} nonzero points", points - 1),
                stats,
            )
        }
        None => {
            stats.partitions_checked = seeds;
            PrimitivityReport {
                cipher: CipherKind::Feistel,
                verdict: PrimitivityVerdict::Primitive,
                witnesses: Vec::new(),
                block_system: None,
                stats,
                note: None,
            }
        }
    })
}

/// Induced action of one keyed round on the blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyBlockTable {
    pub keys: Vec<u64>,
    /// Image block of each block under the whole key vector.
    pub block_map: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackStats {
    pub q: usize,
    pub rounds: usize,
    pub trials: u64,
    pub confirmed: u64,
    pub confirmation_rate: f64,
    pub leaked_bits: usize,
    /// Image block of each block under `rho`.
    pub rho_block_map: Vec<u64>,
    pub key_tables: Vec<KeyBlockTable>,
}

/// Encrypts random plaintexts under random round keys and checks that the
/// ciphertext coset equals the coset predicted from the plaintext coset and
/// the keys alone.
pub fn attack_demo(
    cipher: &SpnModCipher,
    part: &CosetPartition,
    rounds: usize,
    trials: u64,
    seed: u64,
) -> Result<AttackStats> {
    let n = cipher.n();
    if part.n() != n {
        return Err(Error::InvalidShape(format!(
            "partition on {} bits for a {n}-bit cipher",
            part.n()
        )));
    }
    if trials == 0 || rounds == 0 {
        return Err(Error::InvalidParameter(
            "attack needs at least one trial and one round".into(),
        ));
    }
    let rho = cipher.rho_table()?;
    if let Some((r, x)) = split_block(&rho, part) {
        return Err(Error::Precondition(format!(
            "block {r} (residue {r} mod 2^{}) is split by rho: {r} -> block {}, {x} -> block {}",
            part.q(),
            part.block_of(rho[r as usize]),
            part.block_of(rho[x as usize])
        )));
    }
    let blocks = part.block_count();
    let rho_block_map: Vec<u64> = (0..blocks).map(|b| part.block_of(rho[b as usize])).collect();
    let predict = |b: u64, keys: &[u64]| {
        keys.iter()
            .fold(b, |b, &k| part.block_of(rho_block_map[b as usize] + k))
    };

    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut confirmed = 0;
    let mut key_tables = Vec::new();
    for t in 0..trials {
        let plain = rng.gen::<u64>() & mask;
        let keys: Vec<u64> = (0..rounds).map(|_| rng.gen::<u64>() & mask).collect();
        let cipher_text = cipher.encrypt(plain, &keys);
        if part.block_of(cipher_text) == predict(part.block_of(plain), &keys) {
            confirmed += 1;
        }
        if (t as usize) < ATTACK_TABLES && part.q() <= 8 {
            key_tables.push(KeyBlockTable {
                block_map: (0..blocks).map(|b| predict(b, &keys)).collect(),
                keys,
            });
        }
    }
    Ok(AttackStats {
        q: part.q(),
        rounds,
        trials,
        confirmed,
        confirmation_rate: confirmed as f64 / trials as f64,
        leaked_bits: part.q(),
        rho_block_map,
        key_tables,
    })
}
