//! Concrete mixing layers as block matrices in the right-action convention.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{is_mds, lift_gf_matrix, GfField, GfMatrix};
use crate::gf2::{BitMatrix, BlockView};

/// Largest MDS order [`random_mds`] will build.
pub const MAX_RANDOM_MDS_ORDER: usize = 6;

/// Draws allowed for the rejection-sampling fallback in [`random_mds`].
pub const MDS_SEARCH_ATTEMPTS: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerDescriptor {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub provenance: String,
    /// Reduction polynomial for layers defined over `F_{2^m}`.
    pub field_modulus: Option<u32>,
    /// How the source matrix was turned into a right action, when it mattered.
    pub convention: Option<String>,
    pub matrix: BlockView,
}

impl LayerDescriptor {
    fn new(name: impl Into<String>, provenance: impl Into<String>, matrix: BlockView) -> Self {
        Self {
            name: name.into(),
            n: matrix.n(),
            m: matrix.m(),
            delta: matrix.delta(),
            provenance: provenance.into(),
            field_modulus: None,
            convention: None,
            matrix,
        }
    }

    pub fn summary(&self) -> LayerSummary {
        LayerSummary {
            name: self.name.clone(),
            n: self.n,
            m: self.m,
            delta: self.delta,
            provenance: self.provenance.clone(),
            field_modulus: self.field_modulus,
            convention: self.convention.clone(),
        }
    }
}

/// Descriptor metadata without the matrix, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerSummary {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub provenance: String,
    pub field_modulus: Option<u32>,
    pub convention: Option<String>,
}

fn view(matrix: BitMatrix, m: usize, delta: usize) -> Result<BlockView> {
    if !matrix.is_invertible()? {
        return Err(Error::NotInvertible);
    }
    BlockView::new(matrix, m, delta)
}

pub fn identity_layer(m: usize, delta: usize) -> Result<LayerDescriptor> {
    if m == 0 || delta == 0 {
        return Err(Error::InvalidShape("identity needs m, delta >= 1".into()));
    }
    let matrix = view(BitMatrix::identity(m * delta), m, delta)?;
    Ok(LayerDescriptor::new(
        "identity",
        "identity map",
        matrix,
    ))
}

/// Cyclic shift sending input bit `i` to output bit `(i + s) mod n`.
pub fn rotation_layer(n: usize, m: usize, s: usize) -> Result<LayerDescriptor> {
    if m == 0 || n == 0 || n % m != 0 {
        return Err(Error::InvalidShape(format!("m = {m} does not divide n = {n}")));
    }
    if s >= n {
        return Err(Error::InvalidParameter(format!("shift {s} not below n = {n}")));
    }
    let perm: Vec<usize> = (0..n).map(|i| (i + s) % n).collect();
    let matrix = BitMatrix::from_permutation(&perm)?;

    // Same matrix from the block form [[0, 1_{n-s}], [1_s, 0]].
    let mut block_form = BitMatrix::zeros(n, n);
    for i in 0..n - s {
        block_form.set(i, s + i, true);
    }
    for i in 0..s {
        block_form.set(n - s + i, i, true);
    }
    assert_eq!(matrix, block_form, "rotation block form disagrees");

    Ok(LayerDescriptor::new(
        format!("rot:{n}:{m}:{s}"),
        format!("cyclic rotation by {s} of a {n}-bit state"),
        view(matrix, m, n / m)?,
    ))
}

/// The 32-bit GOST round rotation (left by 11).
pub fn gost_layer() -> LayerDescriptor {
    let mut d = rotation_layer(32, 4, 11).expect("valid rotation");
    d.name = "gost".into();
    d.provenance = "GOST 28147-89 round function rotation by 11, eight 4-bit S-boxes".into();
    d
}

/// PRESENT bit permutation, 0-based images of bits 0..63.
#[rustfmt::skip]
const PRESENT_TABLE: [u8; 64] = [
     0, 16, 32, 48,  1, 17, 33, 49,  2, 18, 34, 50,  3, 19, 35, 51,
     4, 20, 36, 52,  5, 21, 37, 53,  6, 22, 38, 54,  7, 23, 39, 55,
     8, 24, 40, 56,  9, 25, 41, 57, 10, 26, 42, 58, 11, 27, 43, 59,
    12, 28, 44, 60, 13, 29, 45, 61, 14, 30, 46, 62, 15, 31, 47, 63,
];

fn present_formula(i: usize) -> usize {
    if i == 63 {
        63
    } else {
        (16 * i) % 63
    }
}

pub fn present_layer() -> LayerDescriptor {
    let perm: Vec<usize> = PRESENT_TABLE.iter().map(|&p| p as usize).collect();
    for (i, &p) in perm.iter().enumerate() {
        assert_eq!(p, present_formula(i), "PRESENT table entry {i}");
    }
    let matrix = BitMatrix::from_permutation(&perm).expect("PRESENT table is a permutation");
    LayerDescriptor::new(
        "present",
        "PRESENT pLayer, bit i to 16i mod 63 with bit 63 fixed, sixteen 4-bit S-boxes",
        view(matrix, 4, 16).expect("permutation matrices are invertible"),
    )
}

#[rustfmt::skip]
const GPIG2_ROWS: [u16; 16] = [
    0b1000_0000_0000_0000,
    0b0000_1000_0000_0000,
    0b0000_0000_1000_0000,
    0b0000_0000_0000_1000,
    0b0100_0000_0000_0000,
    0b0000_0100_0000_0000,
    0b0000_0000_0100_0000,
    0b0000_0000_0000_0100,
    0b0010_0000_0000_0000,
    0b0000_0010_0000_0000,
    0b0000_0000_0010_0000,
    0b0000_0000_0000_0010,
    0b0001_0000_0000_0000,
    0b0000_0001_0000_0000,
    0b0000_0000_0001_0000,
    0b0000_0000_0000_0001,
];

/// The 16-bit GPig2 mixing layer; rows are written left to right as
/// columns 1..16.
pub fn gpig2_layer() -> LayerDescriptor {
    let mut matrix = BitMatrix::zeros(16, 16);
    for (i, &row) in GPIG2_ROWS.iter().enumerate() {
        for j in 0..16 {
            if row >> (15 - j) & 1 == 1 {
                matrix.set(i, j, true);
            }
        }
    }
    LayerDescriptor::new(
        "gpig2",
        "GPig2 toy SPN bit transposition, four 4-bit S-boxes",
        view(matrix, 4, 4).expect("GPig2 is a permutation matrix"),
    )
}

/// Field matrix `ShiftRows^T * MixColumns^T` for a `c x c` state with
/// `c = 2^{t/2}`: block `(r, k)` is `I_{((r - k) mod c) + 1} * M^T`.
pub fn aes_like_field_matrix(t: u32, mix: &GfMatrix) -> Result<GfMatrix> {
    if t == 0 || t % 2 != 0 || t > 8 {
        return Err(Error::InvalidParameter(format!(
            "t must be a positive even number up to 8, got {t}"
        )));
    }
    let c = 1usize << (t / 2);
    if mix.n_rows() != c || mix.n_cols() != c {
        return Err(Error::InvalidShape(format!(
            "MixColumns block must be {c} x {c}, got {} x {}",
            mix.n_rows(),
            mix.n_cols()
        )));
    }
    if !is_mds(mix)? {
        return Err(Error::NotMds);
    }
    let delta = c * c;
    let mut out = GfMatrix::zeros(*mix.field(), delta, delta);
    for r in 0..c {
        for k in 0..c {
            let a = (r + c - k) % c;
            for b in 0..c {
                out.set(r * c + a, k * c + b, mix.get(b, a));
            }
        }
    }
    Ok(out)
}

/// AES-like layer with `delta = 2^t` bricks of `m` bits and MixColumns
/// block `mix`, lifted to a binary matrix.
pub fn aes_like_layer(t: u32, mix: &GfMatrix) -> Result<LayerDescriptor> {
    let field = aes_like_field_matrix(t, mix)?;
    let matrix = lift_gf_matrix(&field)?;
    let m = matrix.m();
    let mut d = LayerDescriptor::new(
        format!("aeslike:{t}:{m}"),
        "ShiftRows and MixColumns over a square state".to_string(),
        view(matrix.into_matrix(), m, 1 << t)?,
    );
    d.field_modulus = Some(mix.field().modulus());
    d.convention = Some("transposed: ShiftRows^T * MixColumns^T acting on row vectors".into());
    Ok(d)
}

/// The AES MixColumns circulant `circ(2, 3, 1, 1)` over `F_{2^8}`.
pub fn aes_mix_columns() -> GfMatrix {
    let rows = [
        vec![2, 3, 1, 1],
        vec![1, 2, 3, 1],
        vec![1, 1, 2, 3],
        vec![3, 1, 1, 2],
    ];
    GfMatrix::from_rows(GfField::aes(), &rows).expect("valid AES circulant")
}

pub fn aes_layer() -> LayerDescriptor {
    let mut d = aes_like_layer(4, &aes_mix_columns()).expect("AES MixColumns is MDS");
    d.name = "aes".into();
    d.provenance = "AES-128 ShiftRows and MixColumns, sixteen 8-bit S-boxes".into();
    d
}

/// Cauchy matrix `1 / (x_i + y_j)` from `2 * order` distinct field elements.
fn cauchy(order: usize, field: GfField, rng: &mut ChaCha8Rng) -> GfMatrix {
    let mut elems: Vec<u32> = (0..field.order()).collect();
    elems.shuffle(rng);
    let (xs, ys) = elems[..2 * order].split_at(order);
    let mut m = GfMatrix::zeros(field, order, order);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            m.set(i, j, field.inv(x ^ y).expect("x_i != y_j"));
        }
    }
    m
}

/// Seeded MDS matrix of the given order.
///
/// Uses a Cauchy matrix when the field has `2 * order` elements. The only
/// other orders that admit MDS matrices (order 3 over `F_4`, the hexacode)
/// are found by sampling matrices with nonzero entries until one passes
/// [`is_mds`].
pub fn random_mds(order: usize, field: GfField, seed: u64) -> Result<GfMatrix> {
    if order == 0 || order > MAX_RANDOM_MDS_ORDER {
        return Err(Error::OrderTooLarge {
            order,
            max: MAX_RANDOM_MDS_ORDER,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if 2 * order as u64 <= u64::from(field.order()) {
        let m = cauchy(order, field, &mut rng);
        debug_assert!(is_mds(&m)?);
        if !is_mds(&m)? {
            return Err(Error::NotMds);
        }
        return Ok(m);
    }
    // Past the Cauchy range an MDS matrix of order k needs a [2k, k] MDS code
    // of length q + 2, which over F_q with q even exists only for k = 3 or
    // k = q - 1.
    let q = u64::from(field.order());
    let k = order as u64;
    if !(2 * k == q + 2 && (k == 3 || k + 1 == q)) {
        return Err(Error::FieldTooSmall {
            m: field.m(),
            order,
        });
    }
    for _ in 0..MDS_SEARCH_ATTEMPTS {
        let entries = (0..order * order)
            .map(|_| rng.gen_range(1..field.order()))
            .collect();
        let m = GfMatrix::new(field, order, order, entries)?;
        if is_mds(&m)? {
            return Ok(m);
        }
    }
    Err(Error::FieldTooSmall {
        m: field.m(),
        order,
    })
}

/// Whether [`random_mds`] takes the Cauchy route for these parameters.
pub fn cauchy_feasible(order: usize, field: &GfField) -> bool {
    2 * order as u64 <= u64::from(field.order())
}

/// Name, parameter syntax and description of every builtin.
pub fn builtin_catalog() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("identity", "identity[:<m>:<delta>]", "identity map, shape from --m/--delta"),
        ("rot", "rot:<n>:<m>:<s>", "cyclic rotation by s"),
        ("gost", "gost", "GOST 28147-89 rotation by 11 (n=32, m=4)"),
        ("present", "present", "PRESENT pLayer (n=64, m=4)"),
        ("gpig2", "gpig2", "GPig2 bit transposition (n=16, m=4)"),
        ("aes", "aes", "AES ShiftRows and MixColumns (n=128, m=8)"),
        (
            "aeslike",
            "aeslike:<t>:<m>:<seed>",
            "AES-like layer, delta=2^t, seeded MDS block over F_{2^m}",
        ),
    ]
}

fn parse_usize(part: &str, what: &str) -> Result<usize> {
    part.parse()
        .map_err(|_| Error::InvalidParameter(format!("bad {what} {part:?}")))
}

/// Resolves a builtin name. `shape` supplies `(m, delta)` for names that do
/// not fix it and is checked against the rest.
pub fn builtin_layer(name: &str, shape: Option<(usize, usize)>) -> Result<LayerDescriptor> {
    let parts: Vec<&str> = name.split(':').collect();
    let d = match parts.as_slice() {
        ["identity"] => {
            let (m, delta) = shape.ok_or_else(|| {
                Error::InvalidParameter("identity needs a shape (--m and --delta)".into())
            })?;
            identity_layer(m, delta)?
        }
        ["identity", m, delta] => {
            identity_layer(parse_usize(m, "m")?, parse_usize(delta, "delta")?)?
        }
        ["rot", n, m, s] => rotation_layer(
            parse_usize(n, "n")?,
            parse_usize(m, "m")?,
            parse_usize(s, "shift")?,
        )?,
        ["gost"] => gost_layer(),
        ["present"] => present_layer(),
        ["gpig2"] => gpig2_layer(),
        ["aes"] => aes_layer(),
        ["aeslike", t, m, seed] => {
            let t = parse_usize(t, "t")? as u32;
            let m = parse_usize(m, "m")? as u32;
            let seed: u64 = seed
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad seed {seed:?}")))?;
            if t == 0 || t % 2 != 0 || t > 8 {
                return Err(Error::InvalidParameter(format!(
                    "t must be a positive even number up to 8, got {t}"
                )));
            }
            let field = GfField::default_for(m)?;
            let mix = random_mds(1 << (t / 2), field, seed)?;
            let mut d = aes_like_layer(t, &mix)?;
            d.name = format!("aeslike:{t}:{m}:{seed}");
            d
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown builtin layer {name:?}"
            )))
        }
    };
    if let Some((m, delta)) = shape {
        if (m, delta) != (d.m, d.delta) {
            return Err(Error::InvalidShape(format!(
                "{name} has m = {}, delta = {}, not m = {m}, delta = {delta}",
                d.m, d.delta
            )));
        }
    }
    Ok(d)
}
