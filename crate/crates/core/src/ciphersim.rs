//! Toy round functions: parallel S-boxes, SPN rounds with key addition
//! modulo `2^n`, and a GOST-like Feistel round.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BlockView, PackedMatrix};
use crate::typesys::{boxplus, brick};

/// Widest S-box the table representation accepts.
pub const MAX_SBOX_BITS: usize = 16;

/// `delta` bijective S-boxes on `m`-bit bricks, brick `j` through table `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SBoxSet {
    m: usize,
    delta: usize,
    tables: Vec<Vec<u32>>,
    inverses: Vec<Vec<u32>>,
}

impl SBoxSet {
    pub fn new(m: usize, tables: Vec<Vec<u32>>) -> Result<Self> {
        if m == 0 || m > MAX_SBOX_BITS {
            return Err(Error::InvalidParameter(format!(
                "S-box width must be in 1..={MAX_SBOX_BITS}, got {m}"
            )));
        }
        if tables.is_empty() || m * tables.len() > 64 {
            return Err(Error::InvalidShape(format!(
                "{} S-boxes of {m} bits do not fit a 64-bit state",
                tables.len()
            )));
        }
        let size = 1usize << m;
        let mut inverses = Vec::with_capacity(tables.len());
        for (j, t) in tables.iter().enumerate() {
            if t.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: t.len(),
                });
            }
            let mut inv = vec![u32::MAX; size];
            for (x, &y) in t.iter().enumerate() {
                if y as usize >= size || inv[y as usize] != u32::MAX {
                    return Err(Error::InvalidParameter(format!(
                        "S-box {j} is not a bijection (value {y:#x})"
                    )));
                }
                inv[y as usize] = x as u32;
            }
            inverses.push(inv);
        }
        Ok(Self {
            m,
            delta: tables.len(),
            tables,
            inverses,
        })
    }

    pub fn identity(m: usize, delta: usize) -> Result<Self> {
        Self::new(m, vec![(0..1u32 << m).collect(); delta])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.m * self.delta
    }

    pub fn tables(&self) -> &[Vec<u32>] {
        &self.tables
    }

    /// Whether no table fixes zero.
    pub fn zero_not_fixed(&self) -> bool {
        self.tables.iter().all(|t| t[0] != 0)
    }

    pub fn apply(&self, v: u64) -> u64 {
        self.substitute(v, &self.tables)
    }

    pub fn apply_inverse(&self, v: u64) -> u64 {
        self.substitute(v, &self.inverses)
    }

    fn substitute(&self, v: u64, tables: &[Vec<u32>]) -> u64 {
        tables.iter().enumerate().fold(0, |acc, (j, t)| {
            acc | (u64::from(t[brick(v, self.m, j) as usize]) << (j * self.m))
        })
    }
}

/// Brick-wise S-box application.
pub fn apply_sbox(sboxes: &SBoxSet, v: u64) -> u64 {
    sboxes.apply(v)
}

/// Seeded Fisher-Yates tables; with `require_zero_not_fixed`, any table
/// fixing zero is reshuffled.
pub fn random_sbox_set(
    m: usize,
    delta: usize,
    seed: u64,
    require_zero_not_fixed: bool,
) -> Result<SBoxSet> {
    if m == 0 || m > MAX_SBOX_BITS {
        return Err(Error::InvalidParameter(format!(
            "S-box width must be in 1..={MAX_SBOX_BITS}, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = (0..delta)
        .map(|_| {
            let mut t: Vec<u32> = (0..1u32 << m).collect();
            t.shuffle(&mut rng);
            while require_zero_not_fixed && t[0] == 0 {
                t.shuffle(&mut rng);
            }
            t
        })
        .collect();
    SBoxSet::new(m, tables)
}

fn check_layer(sboxes: &SBoxSet, layer: &BlockView) -> Result<PackedMatrix> {
    if layer.m() != sboxes.m() || layer.delta() != sboxes.delta() {
        return Err(Error::InvalidShape(format!(
            "layer has m = {}, delta = {} but the S-boxes have m = {}, delta = {}",
            layer.m(),
            layer.delta(),
            sboxes.m(),
            sboxes.delta()
        )));
    }
    if !layer.matrix().is_invertible()? {
        return Err(Error::NotInvertible);
    }
    PackedMatrix::new(layer.matrix())
}

/// SPN whose round is `v -> ((v gamma) lambda) + k mod 2^n`.
#[derive(Clone, Debug)]
pub struct SpnModCipher {
    sboxes: SBoxSet,
    layer: BlockView,
    packed: PackedMatrix,
}

impl SpnModCipher {
    pub fn new(sboxes: SBoxSet, layer: BlockView) -> Result<Self> {
        let packed = check_layer(&sboxes, &layer)?;
        Ok(Self {
            sboxes,
            layer,
            packed,
        })
    }

    pub fn n(&self) -> usize {
        self.sboxes.n()
    }

    pub fn sboxes(&self) -> &SBoxSet {
        &self.sboxes
    }

    pub fn layer(&self) -> &BlockView {
        &self.layer
    }

    /// The keyless part `gamma lambda`.
    pub fn rho(&self, v: u64) -> u64 {
        self.packed.apply(self.sboxes.apply(v))
    }

    pub fn round(&self, v: u64, k: u64) -> u64 {
        boxplus(self.rho(v), k, self.n())
    }

    pub fn encrypt(&self, v: u64, keys: &[u64]) -> u64 {
        keys.iter().fold(v, |x, &k| self.round(x, k))
    }

    /// `rho` as a table over all `2^n` states.
    pub fn rho_table(&self) -> Result<Vec<u64>> {
        state_table(self.n(), |v| self.rho(v))
    }
}

fn state_table(n: usize, f: impl Fn(u64) -> u64) -> Result<Vec<u64>> {
    const LIMIT: usize = 24;
    if n > LIMIT {
        return Err(Error::GuardExceeded {
            what: "state table width",
            limit: LIMIT,
            got: n,
        });
    }
    Ok((0..1u64 << n).map(f).collect())
}

pub fn spnmod_round(cipher: &SpnModCipher, v: u64, k: u64) -> u64 {
    cipher.round(v, k)
}

/// Two-branch Feistel with `rho = gamma lambda` on a half of `half_n` bits.
#[derive(Clone, Debug)]
pub struct FeistelGostCipher {
    sboxes: SBoxSet,
    layer: BlockView,
    packed: PackedMatrix,
}

impl FeistelGostCipher {
    pub fn new(sboxes: SBoxSet, layer: BlockView) -> Result<Self> {
        let packed = check_layer(&sboxes, &layer)?;
        if 2 * sboxes.n() > 64 {
            return Err(Error::InvalidShape(format!(
                "two halves of {} bits exceed 64",
                sboxes.n()
            )));
        }
        Ok(Self {
            sboxes,
            layer,
            packed,
        })
    }

    pub fn half_n(&self) -> usize {
        self.sboxes.n()
    }

    pub fn sboxes(&self) -> &SBoxSet {
        &self.sboxes
    }

    pub fn layer(&self) -> &BlockView {
        &self.layer
    }

    pub fn rho(&self, x: u64) -> u64 {
        self.packed.apply(self.sboxes.apply(x))
    }

    pub fn rho_table(&self) -> Result<Vec<u64>> {
        state_table(self.half_n(), |v| self.rho(v))
    }

    /// `(x1, x2) -> (x2, x1 xor x2 rho)`.
    pub fn p(&self, x1: u64, x2: u64) -> (u64, u64) {
        (x2, x1 ^ self.rho(x2))
    }

    pub fn p_inverse(&self, y1: u64, y2: u64) -> (u64, u64) {
        (y2 ^ self.rho(y1), y1)
    }

    /// Halfwise addition of the key halves `k = (k1, k2)`.
    pub fn add_key(&self, x: (u64, u64), k: (u64, u64)) -> (u64, u64) {
        let h = self.half_n();
        (boxplus(x.0, k.0, h), boxplus(x.1, k.1, h))
    }

    /// `sigma_k P sigma_h`.
    pub fn round(&self, x: (u64, u64), k: (u64, u64), h: (u64, u64)) -> (u64, u64) {
        let (a, b) = self.add_key(x, k);
        self.add_key(self.p(a, b), h)
    }

    /// Packs `(x1, x2)` as `x1 | x2 << half_n`.
    pub fn pack(&self, x: (u64, u64)) -> u64 {
        x.0 | (x.1 << self.half_n())
    }

    pub fn unpack(&self, v: u64) -> (u64, u64) {
        let h = self.half_n();
        (v & ((1 << h) - 1), v >> h)
    }
}

pub fn feistel_round(
    cipher: &FeistelGostCipher,
    x1: u64,
    x2: u64,
    k: (u64, u64),
    h: (u64, u64),
) -> (u64, u64) {
    cipher.round((x1, x2), k, h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CipherKind {
    Spnmod,
    Feistel,
}

/// On-disk cipher description. For Feistel ciphers `m` and `delta`
/// describe one half.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CipherConfig {
    pub kind: CipherKind,
    pub m: usize,
    pub delta: usize,
    /// `builtin:<name>` or `file:<path>`.
    pub layer: String,
    pub sbox_seed: u64,
    #[serde(default)]
    pub zero_not_fixed: bool,
    /// Replace the S-boxes by identity tables.
    #[serde(default)]
    pub identity_sboxes: bool,
}

impl CipherConfig {
    pub fn sboxes(&self) -> Result<SBoxSet> {
        if self.identity_sboxes {
            SBoxSet::identity(self.m, self.delta)
        } else {
            random_sbox_set(self.m, self.delta, self.sbox_seed, self.zero_not_fixed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{identity_layer, rotation_layer};

    #[test]
    fn sbox_lookup() {
        let s = SBoxSet::new(2, vec![vec![1, 2, 3, 0]]).unwrap();
        assert_eq!(apply_sbox(&s, 0), 1);
        assert_eq!(apply_sbox(&s, 3), 0);
        let id = SBoxSet::identity(3, 2).unwrap();
        assert_eq!(id.apply(0b101_011), 0b101_011);
    }

    #[test]
    fn sbox_rejects_non_bijection() {
        assert!(SBoxSet::new(2, vec![vec![0, 0, 1, 2]]).is_err());
        assert!(SBoxSet::new(2, vec![vec![0, 1, 2]]).is_err());
        assert!(SBoxSet::new(2, vec![vec![0, 1, 2, 4]]).is_err());
    }

    #[test]
    fn random_sboxes() {
        let a = random_sbox_set(3, 4, 9, true).unwrap();
        assert_eq!(a, random_sbox_set(3, 4, 9, true).unwrap());
        assert!(a.zero_not_fixed());
        for v in 0..1 << 12 {
            assert_eq!(a.apply_inverse(a.apply(v)), v);
        }
        for t in a.tables() {
            let mut s = t.clone();
            s.sort_unstable();
            assert_eq!(s, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn spnmod_trivial_rounds() {
        let c = SpnModCipher::new(
            SBoxSet::identity(2, 2).unwrap(),
            identity_layer(2, 2).unwrap().matrix,
        )
        .unwrap();
        assert_eq!(c.round(0b1011, 0), 0b1011);
        assert_eq!(c.round(0, 0b0110), 0b0110);
        assert_eq!(c.round(0b1111, 1), 0);
    }

    #[test]
    fn spnmod_hand_trace() {
        // v = 0b0110: bricks (2, 1) -> S-boxes -> (3, 2) = 0b1011;
        // rotation by 2 swaps the bricks: 0b1110; plus 0b0011 mod 16 = 0b0001.
        let s = SBoxSet::new(2, vec![vec![1, 2, 3, 0], vec![3, 2, 1, 0]]).unwrap();
        let c = SpnModCipher::new(s, rotation_layer(4, 2, 2).unwrap().matrix).unwrap();
        assert_eq!(c.rho(0b0110), 0b1110);
        assert_eq!(spnmod_round(&c, 0b0110, 0b0011), 0b0001);
    }

    #[test]
    fn spnmod_round_is_bijective() {
        let c = SpnModCipher::new(
            random_sbox_set(3, 4, 1, false).unwrap(),
            rotation_layer(12, 3, 4).unwrap().matrix,
        )
        .unwrap();
        for k in [0u64, 1, 0xABC] {
            let mut img: Vec<u64> = (0..1 << 12).map(|v| c.round(v, k)).collect();
            img.sort_unstable();
            img.dedup();
            assert_eq!(img.len(), 1 << 12);
        }
    }

    #[test]
    fn feistel_identity_rho() {
        let c = FeistelGostCipher::new(
            SBoxSet::identity(2, 2).unwrap(),
            identity_layer(2, 2).unwrap().matrix,
        )
        .unwrap();
        assert_eq!(feistel_round(&c, 0b1001, 0b0110, (0, 0), (0, 0)), (0b0110, 0b1111));
    }

    #[test]
    fn feistel_zero_state_trace() {
        // rho(0) = c with c = 0b0101 after the S-boxes and identity layer.
        let s = SBoxSet::new(2, vec![vec![1, 0, 2, 3], vec![1, 2, 3, 0]]).unwrap();
        let c = FeistelGostCipher::new(s, identity_layer(2, 2).unwrap().matrix).unwrap();
        assert_eq!(c.rho(0), 0b0101);
        assert_eq!(c.round((0, 0), (0, 0), (0, 0)), (0, 0b0101));
        // Keys add halfwise modulo 16.
        assert_eq!(c.round((0, 0), (0, 0), (0b1111, 0b1100)), (0b1111, 0b0001));
    }

    #[test]
    fn feistel_round_is_bijective() {
        let c = FeistelGostCipher::new(
            random_sbox_set(2, 3, 4, false).unwrap(),
            rotation_layer(6, 2, 2).unwrap().matrix,
        )
        .unwrap();
        let k = (5, 17);
        let h = (63, 2);
        let mut img: Vec<u64> = (0..1u64 << 12)
            .map(|v| c.pack(c.round(c.unpack(v), k, h)))
            .collect();
        img.sort_unstable();
        img.dedup();
        assert_eq!(img.len(), 1 << 12);
        for v in 0..1u64 << 12 {
            let (a, b) = c.unpack(v);
            let (y1, y2) = c.p(a, b);
            assert_eq!(c.p_inverse(y1, y2), (a, b));
        }
    }

    #[test]
    fn config_round_trip() {
        let json = r#"{"kind":"spnmod","m":2,"delta":4,"layer":"builtin:rot:8:2:2","sbox_seed":3,"zero_not_fixed":true}"#;
        let c: CipherConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.kind, CipherKind::Spnmod);
        assert!(c.sboxes().unwrap().zero_not_fixed());
        assert!(serde_json::from_str::<CipherConfig>(r#"{"kind":"x"}"#).is_err());
    }
}
