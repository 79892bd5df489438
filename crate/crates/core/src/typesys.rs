//! Box types of subsets of F_2^n and the subgroups of (Z_{2^n}, ⊞).
//!
//! A state is an `n`-bit integer, bit 0 least significant. Brick `j`
//! (1-based) is the `m`-bit field at bits `(j-1)m .. jm-1`, so the white
//! boxes of a subgroup `<2^q>` are the low-index bricks.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest set materialized in memory.
pub const MAX_SET_LEN: usize = 1 << 20;

/// Largest bit width accepted by [`subgroup_elements`].
pub const MAX_SUBGROUP_BITS: usize = 24;

/// Largest bit width accepted by [`materialize`].
pub const MAX_MATERIALIZE_BITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoxType {
    White,
    Ruled,
    Black,
}

impl BoxType {
    /// Classifies a projection of the given cardinality onto an `m`-bit brick.
    pub fn from_cardinality(card: usize, m: usize) -> Self {
        debug_assert!(card >= 1);
        if card == 1 {
            BoxType::White
        } else if m < usize::BITS as usize && card == 1usize << m {
            BoxType::Black
        } else {
            BoxType::Ruled
        }
    }

    fn symbol(self) -> char {
        match self {
            BoxType::White => 'W',
            BoxType::Ruled => 'R',
            BoxType::Black => 'B',
        }
    }
}

/// The sequence of box types of a set, one per brick.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeVector(pub Vec<BoxType>);

impl TypeVector {
    pub fn delta(&self) -> usize {
        self.0.len()
    }

    pub fn triple(&self) -> TypeTriple {
        let count = |t| self.0.iter().filter(|&&b| b == t).count();
        TypeTriple {
            n_w: count(BoxType::White),
            n_r: count(BoxType::Ruled),
            n_b: count(BoxType::Black),
        }
    }

    /// White boxes, then at most one ruled box, then black boxes.
    pub fn is_canonical(&self) -> bool {
        let t = self.triple();
        t.n_r <= 1 && *self == t.to_vector()
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{}", b.symbol()))
    }
}

/// Count form `(n_w, n_r, n_b)` of a type with at most one ruled box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeTriple {
    pub n_w: usize,
    pub n_r: usize,
    pub n_b: usize,
}

impl TypeTriple {
    pub fn new(n_w: usize, n_r: usize, n_b: usize) -> Result<Self> {
        if n_r > 1 {
            return Err(Error::InvalidParameter(format!(
                "at most one ruled box, got {n_r}"
            )));
        }
        Ok(Self { n_w, n_r, n_b })
    }

    pub fn delta(&self) -> usize {
        self.n_w + self.n_r + self.n_b
    }

    /// `(0,0,delta)` and `(delta,0,0)`, preserved by every invertible layer.
    pub fn is_trivial(&self) -> bool {
        self.n_r == 0 && (self.n_w == 0 || self.n_b == 0)
    }

    pub fn to_vector(&self) -> TypeVector {
        let mut v = vec![BoxType::White; self.n_w];
        v.extend(std::iter::repeat(BoxType::Ruled).take(self.n_r));
        v.extend(std::iter::repeat(BoxType::Black).take(self.n_b));
        TypeVector(v)
    }

    /// Every triple allowed for `delta` bricks of width `m`, in the order
    /// non-ruled by `n_w`, then ruled by `n_w`.
    pub fn all_bounded(delta: usize, m: usize) -> Vec<TypeTriple> {
        let mut out: Vec<_> = (0..=delta)
            .map(|n_w| TypeTriple {
                n_w,
                n_r: 0,
                n_b: delta - n_w,
            })
            .collect();
        if m >= 2 {
            out.extend((0..delta).map(|n_w| TypeTriple {
                n_w,
                n_r: 1,
                n_b: delta - n_w - 1,
            }));
        }
        out
    }
}

impl fmt::Display for TypeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n_w, self.n_r, self.n_b)
    }
}

/// A finite set of `n`-bit states, kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateSet {
    n: usize,
    elems: Vec<u64>,
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl StateSet {
    pub fn new(n: usize, mut elems: Vec<u64>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!(
                "state width must be in 1..=64, got {n}"
            )));
        }
        if let Some(&e) = elems.iter().find(|&&e| e & !mask(n) != 0) {
            return Err(Error::InvalidParameter(format!(
                "state {e:#x} does not fit in {n} bits"
            )));
        }
        elems.sort_unstable();
        elems.dedup();
        if elems.len() > MAX_SET_LEN {
            return Err(Error::GuardExceeded {
                what: "set cardinality",
                limit: MAX_SET_LEN,
                got: elems.len(),
            });
        }
        Ok(Self { n, elems })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.elems
    }

    /// Membership of a state given as an integer; bits above 64 read as zero.
    pub fn contains(&self, x: u64) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.elems.iter().all(|&x| other.contains(x))
    }

    /// Image of the set under a map on states.
    pub fn map(&self, f: impl Fn(u64) -> u64) -> Result<StateSet> {
        StateSet::new(self.n, self.elems.iter().map(|&x| f(x)).collect())
    }
}

fn check_bricks(n: usize, m: usize, delta: usize) -> Result<()> {
    if m == 0 || delta == 0 || m * delta != n {
        return Err(Error::InvalidShape(format!(
            "n = {n} is not m * delta = {m} * {delta}"
        )));
    }
    Ok(())
}

/// Brick `j` (0-based) of a state.
#[inline]
pub fn brick(x: u64, m: usize, j: usize) -> u64 {
    u32::try_from(j * m)
        .ok()
        .and_then(|shift| x.checked_shr(shift))
        .unwrap_or(0)
        & mask(m)
}

/// Type of an explicit set: box `j` classified by the cardinality of the
/// projection onto brick `j`.
pub fn type_of_set(s: &StateSet, m: usize, delta: usize) -> Result<TypeVector> {
    check_bricks(s.n(), m, delta)?;
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let boxes = (0..delta)
        .map(|j| {
            let card = if m <= 20 {
                let mut seen = vec![false; 1 << m];
                let mut card = 0;
                for &x in s.as_slice() {
                    let b = brick(x, m, j) as usize;
                    if !std::mem::replace(&mut seen[b], true) {
                        card += 1;
                    }
                }
                card
            } else {
                s.as_slice()
                    .iter()
                    .map(|&x| brick(x, m, j))
                    .collect::<HashSet<_>>()
                    .len()
            };
            BoxType::from_cardinality(card, m)
        })
        .collect();
    Ok(TypeVector(boxes))
}

/// The subgroup `<2^q>` of `Z_{2^n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalSubgroup {
    pub q: usize,
    pub n: usize,
}

impl CanonicalSubgroup {
    pub fn new(q: usize, n: usize) -> Result<Self> {
        if q > n || n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= q <= n <= 64, got q = {q}, n = {n}"
            )));
        }
        Ok(Self { q, n })
    }

    /// Membership of a state given as an integer; bits above 64 read as zero.
    pub fn contains(&self, x: u64) -> bool {
        x & mask(self.q) == 0
    }

    pub fn elements(&self) -> Result<StateSet> {
        subgroup_elements(self.q, self.n)
    }
}

/// Type of `<2^q>`: `q/m` white boxes when `m | q`, otherwise a ruled box
/// at the brick holding bit `q`.
pub fn subgroup_type(q: usize, n: usize, m: usize) -> Result<TypeTriple> {
    if m == 0 || n % m != 0 || q > n {
        return Err(Error::InvalidParameter(format!(
            "need m | n and q <= n, got q = {q}, n = {n}, m = {m}"
        )));
    }
    let delta = n / m;
    let n_w = q / m;
    Ok(if q % m == 0 {
        TypeTriple {
            n_w,
            n_r: 0,
            n_b: delta - n_w,
        }
    } else {
        TypeTriple {
            n_w,
            n_r: 1,
            n_b: delta - n_w - 1,
        }
    })
}

/// All `2^{n-q}` multiples of `2^q` modulo `2^n`.
pub fn subgroup_elements(q: usize, n: usize) -> Result<StateSet> {
    if n > MAX_SUBGROUP_BITS {
        return Err(Error::GuardExceeded {
            what: "subgroup bit width",
            limit: MAX_SUBGROUP_BITS,
            got: n,
        });
    }
    if q > n {
        return Err(Error::InvalidParameter(format!("q = {q} exceeds n = {n}")));
    }
    let elems = (0..1u64 << (n - q)).map(|k| k << q).collect();
    StateSet::new(n, elems)
}

/// `(a + b) mod 2^n`.
#[inline]
pub fn boxplus(a: u64, b: u64, n: usize) -> u64 {
    a.wrapping_add(b) & mask(n)
}

/// `{s ⊞ v : s in S}`.
pub fn translate_set(s: &StateSet, v: u64) -> Result<StateSet> {
    let n = s.n();
    s.map(|x| boxplus(x, v, n))
}

/// A subset of F_2^n in product form: fixed values on the low white bricks,
/// an explicit ruled brick (optional), and unconstrained black bricks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CanonicalSetRepr", into = "CanonicalSetRepr")]
pub struct CanonicalSet {
    m: usize,
    delta: usize,
    white_values: Vec<u64>,
    ruled_content: Option<Vec<u64>>,
}

impl CanonicalSet {
    pub fn new(
        m: usize,
        delta: usize,
        white_values: Vec<u64>,
        ruled_content: Option<Vec<u64>>,
    ) -> Result<Self> {
        if m == 0 || m > 63 || delta == 0 {
            return Err(Error::InvalidShape(format!(
                "canonical sets need 1 <= m <= 63 and delta >= 1, got m = {m}, delta = {delta}"
            )));
        }
        let n_r = usize::from(ruled_content.is_some());
        if white_values.len() + n_r > delta {
            return Err(Error::InvalidShape(format!(
                "{} white and {n_r} ruled bricks exceed delta = {delta}",
                white_values.len()
            )));
        }
        if let Some(&w) = white_values.iter().find(|&&w| w & !mask(m) != 0) {
            return Err(Error::InvalidParameter(format!(
                "white value {w:#x} does not fit in {m} bits"
            )));
        }
        let ruled_content = match ruled_content {
            None => None,
            Some(mut r) => {
                r.sort_unstable();
                r.dedup();
                if r.iter().any(|&x| x & !mask(m) != 0) {
                    return Err(Error::InvalidParameter(
                        "ruled content exceeds the brick width".into(),
                    ));
                }
                if r.len() < 2 || r.len() >= 1 << m {
                    return Err(Error::InvalidParameter(format!(
                        "ruled content must have between 2 and 2^m - 1 elements, got {}",
                        r.len()
                    )));
                }
                Some(r)
            }
        };
        Ok(Self {
            m,
            delta,
            white_values,
            ruled_content,
        })
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

    pub fn white_values(&self) -> &[u64] {
        &self.white_values
    }

    pub fn ruled_content(&self) -> Option<&[u64]> {
        self.ruled_content.as_deref()
    }

    pub fn triple(&self) -> TypeTriple {
        let n_w = self.white_values.len();
        let n_r = usize::from(self.ruled_content.is_some());
        TypeTriple {
            n_w,
            n_r,
            n_b: self.delta - n_w - n_r,
        }
    }

    /// Number of elements, as `|ruled| * 2^{m n_b}`; `None` past `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        let t = self.triple();
        let ruled = self.ruled_content.as_ref().map_or(1, Vec::len) as u128;
        let shift = u32::try_from(self.m * t.n_b).ok().filter(|&s| s < 128)?;
        ruled.checked_mul(1u128 << shift)
    }

    /// Membership of a state given as an integer; bits above 64 read as zero.
    pub fn contains(&self, x: u64) -> bool {
        let m = self.m;
        if self
            .white_values
            .iter()
            .enumerate()
            .any(|(j, &w)| brick(x, m, j) != w)
        {
            return false;
        }
        match &self.ruled_content {
            Some(r) => r.binary_search(&brick(x, m, self.white_values.len())).is_ok(),
            None => true,
        }
    }
}

/// Wire form of a [`CanonicalSet`].
#[derive(Clone, Debug, Serialize, Deserialize)]
struct CanonicalSetRepr {
    white_values_hex: Vec<String>,
    ruled_content_hex: Option<Vec<String>>,
    n: usize,
    m: usize,
    delta: usize,
}

fn parse_hex(s: &str) -> std::result::Result<u64, String> {
    let digits = s.strip_prefix("0x").unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| format!("bad hex value {s:?}: {e}"))
}

impl TryFrom<CanonicalSetRepr> for CanonicalSet {
    type Error = String;

    fn try_from(r: CanonicalSetRepr) -> std::result::Result<Self, String> {
        if r.n != r.m * r.delta {
            return Err(format!("n = {} is not m * delta", r.n));
        }
        let white = r
            .white_values_hex
            .iter()
            .map(|s| parse_hex(s))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let ruled = r
            .ruled_content_hex
            .map(|v| v.iter().map(|s| parse_hex(s)).collect())
            .transpose()?;
        CanonicalSet::new(r.m, r.delta, white, ruled).map_err(|e| e.to_string())
    }
}

impl From<CanonicalSet> for CanonicalSetRepr {
    fn from(c: CanonicalSet) -> Self {
        let hex = |v: &[u64]| v.iter().map(|x| format!("{x:#x}")).collect();
        CanonicalSetRepr {
            white_values_hex: hex(&c.white_values),
            ruled_content_hex: c.ruled_content.as_deref().map(hex),
            n: c.n(),
            m: c.m,
            delta: c.delta,
        }
    }
}

/// The explicit element set of a canonical set.
pub fn materialize(c: &CanonicalSet) -> Result<StateSet> {
    let n = c.n();
    if n > MAX_MATERIALIZE_BITS {
        return Err(Error::GuardExceeded {
            what: "materialized bit width",
            limit: MAX_MATERIALIZE_BITS,
            got: n,
        });
    }
    let m = c.m();
    let n_w = c.white_values().len();
    let base = c
        .white_values()
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &w)| acc | (w << (j * m)));
    let (ruled, black_shift) = match c.ruled_content() {
        Some(r) => (r.to_vec(), (n_w + 1) * m),
        None => (vec![0], n_w * m),
    };
    let black_bits = n - black_shift;
    let mut elems = Vec::with_capacity(ruled.len() << black_bits);
    for b in 0..1u64 << black_bits {
        for &r in &ruled {
            elems.push(base | (r << (n_w * m)) | (b << black_shift));
        }
    }
    StateSet::new(n, elems)
}
