//! Deciding whether a mixing layer preserves the type of some canonical set.
//!
//! A layer is *type-preserving* when some canonical set `D` of a nontrivial
//! bounded type `(n_w, n_r, n_b)` satisfies `type(D * L) = type(D)`.
//!
//! Two independent routes are provided:
//!
//! * [`classify`] works on block submatrices. The non-ruled types reduce to a
//!   zero-block test ([`check_eq2`]). For a ruled type, the white bricks force
//!   the ruled content `R` into a coset of the left kernel `K` of the ruled
//!   brick's white columns; translating `R` into `K` leaves every projection
//!   size unchanged. The remaining constraints on `R` are either monotone
//!   (black bricks full, ruled brick nonsingleton) or antitone (ruled brick
//!   not full, `R` proper), so it suffices to test the maximal antitone-valid
//!   subsets of `K`: at most `2^m` candidates.
//! * [`oracle_classify`] enumerates canonical sets explicitly, multiplies every
//!   element by the matrix and compares types.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BlockView, PackedMatrix};
use crate::typesys::{
    brick, materialize, type_of_set, BoxType, CanonicalSet, StateSet, TypeTriple, TypeVector,
    MAX_MATERIALIZE_BITS,
};

/// Largest brick width for the ruled-content search.
pub const MAX_SEARCH_M: usize = 16;

/// Largest state width for the explicit oracle.
pub const MAX_ORACLE_N: usize = 16;

/// Largest brick width the oracle can enumerate ruled contents for.
pub const MAX_ORACLE_M: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    TypePreserving,
    NonTypePreserving,
}

/// Conditions examined for one value of `n_w`.
///
/// `eq2` covers the type `(n_w, 0, delta - n_w)`; `a`..`d` cover
/// `(n_w, 1, delta - n_w - 1)`. For `n_w = 0` only `c` and `d` apply; for
/// `n_w = delta - 1` only `b` and `c`, where `c` is `L_{delta,delta} != 0`.
/// `None` marks a condition that does not apply or was not reached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n_w: usize,
    #[serde(rename = "eq2")]
    pub eq2_holds: Option<bool>,
    #[serde(rename = "a")]
    pub prop_a: Option<bool>,
    #[serde(rename = "b")]
    pub prop_b: Option<bool>,
    #[serde(rename = "c")]
    pub prop_c: Option<bool>,
    #[serde(rename = "d")]
    pub prop_d: Option<bool>,
    pub preserved: bool,
    pub witness: Option<CanonicalSet>,
}

impl ConditionReport {
    /// Whether the reported conditions alone certify preservation.
    pub fn conditions_hold(&self, delta: usize) -> bool {
        let t = |p: Option<bool>| p == Some(true);
        let ruled = if self.n_w == 0 {
            t(self.prop_c) && t(self.prop_d)
        } else if self.n_w + 1 == delta {
            t(self.prop_b) && t(self.prop_c)
        } else {
            t(self.prop_a) && t(self.prop_b) && t(self.prop_c) && t(self.prop_d)
        };
        t(self.eq2_holds) || ruled
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub fast_path_used: bool,
    /// Whether `L_{(n_w+2,1):(delta,n_w)} != 0` for every `n_w` in
    /// `1..=delta-2`, ignoring the two edge types. `None` when `delta < 3`.
    pub literal_corollary_condition: Option<bool>,
    /// Set when `delta = 1`, where no nontrivial bounded type exists.
    pub no_nontrivial_types: bool,
    pub evidence: Vec<ConditionReport>,
}

impl Verdict {
    pub fn witness(&self) -> Option<&CanonicalSet> {
        self.evidence.iter().find_map(|r| r.witness.as_ref())
    }
}

/// A linear subspace of F_2^m in echelon form, pivots at top bits.
#[derive(Clone, Debug, Default)]
struct Subspace {
    basis: Vec<u64>,
}

impl Subspace {
    fn spanned_by(vectors: impl IntoIterator<Item = u64>) -> Self {
        let mut s = Subspace::default();
        for v in vectors {
            s.insert(v);
        }
        s
    }

    fn insert(&mut self, v: u64) {
        let r = self.reduce(v);
        if r != 0 {
            self.basis.push(r);
            self.basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical representative of the coset `v + S`.
    fn reduce(&self, mut v: u64) -> u64 {
        for &b in &self.basis {
            let top = 63 - b.leading_zeros();
            if (v >> top) & 1 == 1 {
                v ^= b;
            }
        }
        v
    }

    fn elements(&self) -> Vec<u64> {
        let mut out = vec![0u64];
        for &b in &self.basis {
            let more: Vec<u64> = out.iter().map(|&x| x ^ b).collect();
            out.extend(more);
        }
        out.sort_unstable();
        out
    }
}

fn apply_rows(rows: &[u64], mut v: u64) -> u64 {
    let mut out = 0;
    while v != 0 {
        out ^= rows[v.trailing_zeros() as usize];
        v &= v - 1;
    }
    out
}

fn count_distinct(values: impl Iterator<Item = u64>) -> usize {
    let mut v: Vec<u64> = values.collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Size class of a projection `{c + r B + s : r in R, s in S}` on an
/// `m`-bit brick.
fn projection_type(m: usize, reps: usize, span_dim: usize) -> BoxType {
    if reps == 1 && span_dim == 0 {
        BoxType::White
    } else if span_dim == m || (reps as u128) << span_dim == 1u128 << m {
        BoxType::Black
    } else {
        BoxType::Ruled
    }
}

/// Type of `D * L` computed brick by brick from the block structure,
/// without enumerating `D`.
pub fn canonical_image_type(view: &BlockView, set: &CanonicalSet) -> Result<TypeVector> {
    check_compatible(view, set)?;
    let (m, delta) = (view.m(), view.delta());
    if m > 63 {
        return Err(Error::GuardExceeded {
            what: "brick width",
            limit: 63,
            got: m,
        });
    }
    let n_w = set.white_values().len();
    let ruled_brick = set.ruled_content().map(|_| n_w + 1);
    let first_black = n_w + 1 + usize::from(ruled_brick.is_some());
    let boxes = (1..=delta)
        .map(|j| {
            let offset = set
                .white_values()
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &w)| acc ^ apply_rows(&view.block_rows(i + 1, j), w));
            let span = Subspace::spanned_by(
                (first_black..=delta).flat_map(|i| view.block_rows(i, j)),
            );
            let reps = match (ruled_brick, set.ruled_content()) {
                (Some(i), Some(r)) => {
                    let rows = view.block_rows(i, j);
                    count_distinct(r.iter().map(|&x| span.reduce(offset ^ apply_rows(&rows, x))))
                }
                _ => 1,
            };
            projection_type(m, reps, span.dim())
        })
        .collect();
    Ok(TypeVector(boxes))
}

fn check_compatible(view: &BlockView, set: &CanonicalSet) -> Result<()> {
    if set.m() != view.m() || set.delta() != view.delta() {
        return Err(Error::InvalidShape(format!(
            "set has m = {}, delta = {} but the layer has m = {}, delta = {}",
            set.m(),
            set.delta(),
            view.m(),
            view.delta()
        )));
    }
    Ok(())
}

/// Type of `D * L` by applying the matrix to every element of `D`.
pub fn materialized_image_type(view: &BlockView, set: &CanonicalSet) -> Result<TypeVector> {
    check_compatible(view, set)?;
    let packed = PackedMatrix::new(view.matrix())?;
    let image = materialize(set)?.map(|x| packed.apply(x))?;
    type_of_set(&image, view.m(), view.delta())
}

/// Confirms a witness by direct type computation: by enumeration when the
/// state is small enough, otherwise brick by brick.
fn confirm_witness(view: &BlockView, set: &CanonicalSet) -> Result<bool> {
    let expected = set.triple().to_vector();
    let image = if view.n() <= MAX_MATERIALIZE_BITS {
        materialized_image_type(view, set)?
    } else {
        canonical_image_type(view, set)?
    };
    Ok(image == expected)
}

fn check_nw(view: &BlockView, n_w: usize, lo: usize, hi: usize) -> Result<()> {
    if n_w < lo || n_w > hi {
        return Err(Error::InvalidParameter(format!(
            "n_w = {n_w} outside {lo}..={hi} for delta = {}",
            view.delta()
        )));
    }
    Ok(())
}

/// Whether `L_{(n_w+1,1):(delta,n_w)} = 0`, i.e. whether the type
/// `(n_w, 0, delta - n_w)` is preserved.
pub fn check_eq2(view: &BlockView, n_w: usize) -> Result<bool> {
    check_nw(view, n_w, 1, view.delta().saturating_sub(1))?;
    Ok(view.range_is_zero(n_w + 1, 1, view.delta(), n_w))
}

/// Outcome of the ruled-content search for one `n_w`.
struct RuledSearch {
    c: bool,
    d: bool,
    content: Option<Vec<u64>>,
}

/// Searches for a ruled content `R` making `(n_w, 1, delta - n_w - 1)`
/// preserved, assuming the white output bricks are already constant on
/// every coset of the kernel.
fn search_ruled(view: &BlockView, n_w: usize) -> Result<RuledSearch> {
    let (m, delta) = (view.m(), view.delta());
    let none = RuledSearch {
        c: false,
        d: false,
        content: None,
    };
    if m < 2 {
        return Ok(none);
    }
    let ruled = n_w + 1;
    let full = 1u64 << m;

    let kernel = if n_w == 0 {
        Subspace::spanned_by((0..m).map(|k| 1u64 << k))
    } else {
        let white_cols = view.submatrix(ruled, 1, ruled, n_w)?;
        Subspace::spanned_by(
            white_cols
                .kernel_basis()
                .iter()
                .map(|v| v.to_u64().expect("kernel vectors have m <= 64 bits")),
        )
    };
    if kernel.dim() == 0 {
        return Ok(none);
    }
    let k_elems = kernel.elements();

    // Per output brick j > n_w: black-row span and the ruled brick's image rows.
    let outs: Vec<(Subspace, Vec<u64>)> = (ruled..=delta)
        .map(|j| {
            let span =
                Subspace::spanned_by((ruled + 1..=delta).flat_map(|i| view.block_rows(i, j)));
            (span, view.block_rows(ruled, j))
        })
        .collect();
    let phi = |idx: usize, r: u64| {
        let (span, rows) = &outs[idx];
        span.reduce(apply_rows(rows, r))
    };
    let quotient = |idx: usize| full >> outs[idx].0.dim();

    let evaluate = |cand: &[u64]| -> (bool, bool) {
        let ruled_reps = count_distinct(cand.iter().map(|&r| phi(0, r))) as u64;
        let ruled_card = ruled_reps << outs[0].0.dim();
        let c = ruled_card >= 2 && ruled_card < full;
        let d = (1..outs.len())
            .all(|idx| count_distinct(cand.iter().map(|&r| phi(idx, r))) as u64 == quotient(idx));
        (c, d)
    };

    let image0 = {
        let mut v: Vec<u64> = k_elems.iter().map(|&r| phi(0, r)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let kernel_is_full = k_elems.len() as u64 == full;

    let mut candidates: Vec<Vec<u64>> = Vec::new();
    if !kernel_is_full {
        // The kernel itself, as in the classical construction.
        candidates.push(k_elems.clone());
    }
    if image0.len() as u64 == quotient(0) {
        for &y in &image0 {
            candidates.push(k_elems.iter().copied().filter(|&r| phi(0, r) != y).collect());
        }
    } else if kernel_is_full {
        for &x in &k_elems {
            candidates.push(k_elems.iter().copied().filter(|&r| r != x).collect());
        }
    }

    let mut best: Option<(u8, bool, bool)> = None;
    for cand in candidates.iter().filter(|c| c.len() >= 2 && (c.len() as u64) < full) {
        let (c, d) = evaluate(cand);
        if c && d {
            return Ok(RuledSearch {
                c,
                d,
                content: Some(cand.clone()),
            });
        }
        let score = u8::from(c) + u8::from(d);
        if best.map_or(true, |(s, _, _)| score > s) {
            best = Some((score, c, d));
        }
    }
    Ok(best.map_or(none, |(_, c, d)| RuledSearch {
        c,
        d,
        content: None,
    }))
}

/// Evaluates the conditions for `n_w` in `0..delta`: the zero-block
/// condition for the non-ruled type and properties (a)-(d) for the ruled
/// type, with a confirmed witness when a type is preserved.
pub fn check_ruled_conditions(view: &BlockView, n_w: usize) -> Result<ConditionReport> {
    let (m, delta) = (view.m(), view.delta());
    check_nw(view, n_w, 0, delta - 1)?;
    if m > MAX_SEARCH_M {
        return Err(Error::GuardExceeded {
            what: "brick width for the ruled search",
            limit: MAX_SEARCH_M,
            got: m,
        });
    }
    let eq2_holds = (n_w >= 1).then(|| view.range_is_zero(n_w + 1, 1, delta, n_w));
    let last = n_w + 1 == delta;
    let prop_a = (n_w >= 1 && !last).then(|| view.range_is_zero(n_w + 2, 1, delta, n_w));
    let prop_b = (n_w >= 1).then(|| {
        let white_cols = view
            .submatrix(n_w + 1, 1, n_w + 1, n_w)
            .expect("indices checked");
        white_cols.rank() < m
    });

    let reachable = prop_a != Some(false) && prop_b != Some(false);
    let search = if reachable {
        Some(search_ruled(view, n_w)?)
    } else {
        None
    };

    let (prop_c, prop_d) = if last {
        let diag = !view.range_is_zero(delta, delta, delta, delta);
        (Some(diag), None)
    } else {
        (search.as_ref().map(|s| s.c), search.as_ref().map(|s| s.d))
    };

    let mut witness = None;
    if eq2_holds == Some(true) {
        let set = CanonicalSet::new(m, delta, vec![0; n_w], None)?;
        if confirm_witness(view, &set)? {
            witness = Some(set);
        }
    }
    if witness.is_none() {
        if let Some(content) = search.and_then(|s| s.content) {
            let set = CanonicalSet::new(m, delta, vec![0; n_w], Some(content))?;
            if confirm_witness(view, &set)? {
                witness = Some(set);
            }
        }
    }

    Ok(ConditionReport {
        n_w,
        eq2_holds,
        prop_a,
        prop_b,
        prop_c,
        prop_d,
        preserved: witness.is_some(),
        witness,
    })
}

fn require_invertible(view: &BlockView) -> Result<()> {
    if !view.matrix().is_invertible()? {
        return Err(Error::NotInvertible);
    }
    Ok(())
}

fn all_reports(view: &BlockView) -> Result<Vec<ConditionReport>> {
    (0..view.delta())
        .into_par_iter()
        .map(|n_w| check_ruled_conditions(view, n_w))
        .collect()
}

fn literal_corollary(view: &BlockView) -> Option<bool> {
    let d = view.delta();
    (d >= 3).then(|| (1..=d - 2).all(|n_w| !view.range_is_zero(n_w + 2, 1, d, n_w)))
}

/// Non-type-preserving verdict from the corner submatrices alone, when
/// `L_{(n_w+2,1):(delta,n_w)} != 0` for every `n_w` in `1..=delta-2` and both
/// edge types `(0,1,delta-1)` and `(delta-1,1,0)` fail their conditions.
/// Returns `None` when the full classification must decide.
pub fn fast_path(view: &BlockView) -> Result<Option<Verdict>> {
    let literal = literal_corollary(view);
    if literal != Some(true) {
        return Ok(None);
    }
    let d = view.delta();
    let first = check_ruled_conditions(view, 0)?;
    let last = check_ruled_conditions(view, d - 1)?;
    if first.preserved || last.preserved {
        return Ok(None);
    }
    require_invertible(view)?;
    let evidence = all_reports(view)?;
    debug_assert!(evidence.iter().all(|r| !r.preserved));
    Ok(Some(Verdict {
        kind: VerdictKind::NonTypePreserving,
        fast_path_used: true,
        literal_corollary_condition: literal,
        no_nontrivial_types: false,
        evidence,
    }))
}

/// Structural classification of an invertible layer.
pub fn classify(view: &BlockView) -> Result<Verdict> {
    require_invertible(view)?;
    if view.delta() == 1 {
        return Ok(Verdict {
            kind: VerdictKind::TypePreserving,
            fast_path_used: false,
            literal_corollary_condition: None,
            no_nontrivial_types: true,
            evidence: Vec::new(),
        });
    }
    if let Some(v) = fast_path(view)? {
        return Ok(v);
    }
    let evidence = all_reports(view)?;
    let kind = if evidence.iter().any(|r| r.preserved) {
        VerdictKind::TypePreserving
    } else {
        VerdictKind::NonTypePreserving
    };
    Ok(Verdict {
        kind,
        fast_path_used: false,
        literal_corollary_condition: literal_corollary(view),
        no_nontrivial_types: false,
        evidence,
    })
}

/// Limits for the explicit oracle, counted in canonical sets examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_sets: u64,
    /// Keep enumerating after the first witness to count every preserved set.
    pub count_all: bool,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_sets: 50_000_000,
            count_all: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSearch {
    pub triple: TypeTriple,
    pub witness: Option<CanonicalSet>,
    pub sets_examined: u64,
    /// Number of preserved sets, when the budget asked for a full count.
    pub preserved_count: Option<u64>,
}

/// Ruled contents the oracle enumerates: every proper nonsingleton subset
/// for `m <= 3`, power-of-two cardinalities for `m = 4`.
fn oracle_ruled_contents(m: usize) -> Vec<Vec<u64>> {
    let size = 1usize << m;
    let allowed = |k: usize| k >= 2 && k < size && (m <= 3 || k.is_power_of_two());
    let mut out = Vec::new();
    if m <= 3 {
        for mask in 0u32..(1 << size) {
            if allowed(mask.count_ones() as usize) {
                out.push((0..size as u64).filter(|&x| mask >> x & 1 == 1).collect());
            }
        }
    } else {
        // Subsets of a 16-element brick by increasing size.
        fn rec(start: u64, size: u64, k: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for x in start..size {
                if size - x < (k - cur.len()) as u64 {
                    break;
                }
                cur.push(x);
                rec(x + 1, size, k, cur, out);
                cur.pop();
            }
        }
        for k in (1..size).filter(|&k| allowed(k)) {
            rec(0, size as u64, k, &mut Vec::new(), &mut out);
        }
    }
    out
}

/// Searches every canonical set of the given type for one whose type is
/// preserved, by explicit enumeration.
pub fn oracle_preserved(
    view: &BlockView,
    triple: TypeTriple,
    budget: OracleBudget,
) -> Result<OracleSearch> {
    let (n, m, delta) = (view.n(), view.m(), view.delta());
    if n > MAX_ORACLE_N {
        return Err(Error::GuardExceeded {
            what: "oracle state width",
            limit: MAX_ORACLE_N,
            got: n,
        });
    }
    if triple.delta() != delta || triple.n_r > 1 {
        return Err(Error::InvalidParameter(format!(
            "type {triple} does not fit delta = {delta}"
        )));
    }
    if triple.n_r == 1 && m > MAX_ORACLE_M {
        return Err(Error::GuardExceeded {
            what: "oracle brick width",
            limit: MAX_ORACLE_M,
            got: m,
        });
    }
    if triple.n_r == 1 && m < 2 {
        return Ok(OracleSearch {
            triple,
            witness: None,
            sets_examined: 0,
            preserved_count: budget.count_all.then_some(0),
        });
    }
    let packed = PackedMatrix::new(view.matrix())?;
    let expected = triple.to_vector();
    let ruled_contents: Vec<Option<Vec<u64>>> = if triple.n_r == 1 {
        oracle_ruled_contents(m).into_iter().map(Some).collect()
    } else {
        vec![None]
    };

    let mut examined = 0u64;
    let mut count = 0u64;
    let mut witness = None;
    let n_white_assignments = 1u64 << (m * triple.n_w);
    for assignment in 0..n_white_assignments {
        let white: Vec<u64> = (0..triple.n_w).map(|j| brick(assignment, m, j)).collect();
        for ruled in &ruled_contents {
            if examined >= budget.max_sets {
                return Err(Error::BudgetExceeded {
                    budget: budget.max_sets,
                });
            }
            examined += 1;
            let set = CanonicalSet::new(m, delta, white.clone(), ruled.clone())?;
            let elems = materialize(&set)?;
            let image = StateSet::new(n, elems.as_slice().iter().map(|&x| packed.apply(x)).collect())?;
            if type_of_set(&image, m, delta)? == expected {
                count += 1;
                if witness.is_none() {
                    witness = Some(set);
                }
                if !budget.count_all {
                    return Ok(OracleSearch {
                        triple,
                        witness,
                        sets_examined: examined,
                        preserved_count: None,
                    });
                }
            }
        }
    }
    Ok(OracleSearch {
        triple,
        witness,
        sets_examined: examined,
        preserved_count: budget.count_all.then_some(count),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub kind: VerdictKind,
    pub searches: Vec<OracleSearch>,
}

impl OracleVerdict {
    pub fn witness(&self) -> Option<&CanonicalSet> {
        self.searches.iter().find_map(|s| s.witness.as_ref())
    }
}

/// Brute-force classification over every nontrivial bounded type.
pub fn oracle_classify(view: &BlockView, budget: OracleBudget) -> Result<OracleVerdict> {
    require_invertible(view)?;
    let triples: Vec<TypeTriple> = TypeTriple::all_bounded(view.delta(), view.m())
        .into_iter()
        .filter(|t| !t.is_trivial())
        .collect();
    let searches = triples
        .into_par_iter()
        .map(|t| oracle_preserved(view, t, budget))
        .collect::<Result<Vec<_>>>()?;
    let kind = if searches.iter().any(|s| s.witness.is_some()) {
        VerdictKind::TypePreserving
    } else {
        VerdictKind::NonTypePreserving
    };
    Ok(OracleVerdict { kind, searches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitMatrix;

    fn rotation(n: usize, m: usize, s: usize) -> BlockView {
        let perm: Vec<usize> = (0..n).map(|i| (i + s) % n).collect();
        BlockView::new(BitMatrix::from_permutation(&perm).unwrap(), m, n / m).unwrap()
    }

    fn block_diagonal(m: usize, delta: usize) -> BlockView {
        // Each brick rotated by one position inside itself.
        let perm: Vec<usize> = (0..m * delta)
            .map(|i| (i / m) * m + (i % m + 1) % m)
            .collect();
        BlockView::new(BitMatrix::from_permutation(&perm).unwrap(), m, delta).unwrap()
    }

    #[test]
    fn subspace_reduction_is_canonical() {
        let s = Subspace::spanned_by([0b0110, 0b0011]);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.elements(), vec![0, 0b0011, 0b0101, 0b0110]);
        for x in 0..16 {
            for e in s.elements() {
                assert_eq!(s.reduce(x), s.reduce(x ^ e));
            }
        }
    }

    #[test]
    fn eq2_on_block_diagonal_and_identity() {
        let bd = block_diagonal(2, 4);
        let id = rotation(8, 2, 0);
        for n_w in 1..4 {
            assert!(check_eq2(&bd, n_w).unwrap());
            assert!(check_eq2(&id, n_w).unwrap());
        }
    }

    #[test]
    fn eq2_fails_for_gost_rotation() {
        assert!(!check_eq2(&rotation(32, 4, 11), 1).unwrap());
    }

    #[test]
    fn eq2_rejects_out_of_range() {
        let v = rotation(6, 2, 0);
        assert!(check_eq2(&v, 0).is_err());
        assert!(check_eq2(&v, 3).is_err());
        assert!(check_ruled_conditions(&v, 3).is_err());
    }

    #[test]
    fn rotations_past_one_brick_never_satisfy_b() {
        for (m, delta) in [(2, 4), (3, 4), (4, 8)] {
            let n = m * delta;
            for s in m..=m * (delta - 1) {
                let view = rotation(n, m, s);
                for n_w in 1..=delta - 2 {
                    let r = check_ruled_conditions(&view, n_w).unwrap();
                    assert!(
                        !(r.prop_a == Some(true) && r.prop_b == Some(true)),
                        "m={m} delta={delta} s={s} n_w={n_w}: {r:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn short_rotation_satisfies_last_brick_pair() {
        let (m, delta) = (4, 8);
        for s in 1..m {
            let r = check_ruled_conditions(&rotation(32, m, s), delta - 1).unwrap();
            assert_eq!(r.prop_b, Some(true));
            assert_eq!(r.prop_c, Some(true));
            assert!(r.preserved);
        }
    }

    #[test]
    fn identity_last_brick() {
        let r = check_ruled_conditions(&rotation(6, 2, 0), 2).unwrap();
        assert_eq!(r.eq2_holds, Some(true));
        assert_eq!(r.prop_b, Some(true));
        assert_eq!(r.prop_c, Some(true));
        assert!(r.preserved);
    }

    #[test]
    fn classify_rotation_examples() {
        assert_eq!(
            classify(&rotation(32, 4, 11)).unwrap().kind,
            VerdictKind::NonTypePreserving
        );
        let id = classify(&rotation(12, 3, 0)).unwrap();
        assert_eq!(id.kind, VerdictKind::TypePreserving);
        assert!(!id.fast_path_used);
        assert_eq!(id.evidence.len(), 4);
    }

    #[test]
    fn classify_rejects_singular() {
        let view = BlockView::new(BitMatrix::zeros(4, 4), 2, 2).unwrap();
        assert_eq!(classify(&view), Err(Error::NotInvertible));
    }

    #[test]
    fn single_brick_is_vacuous() {
        let v = classify(&rotation(4, 4, 1)).unwrap();
        assert_eq!(v.kind, VerdictKind::TypePreserving);
        assert!(v.no_nontrivial_types);
        assert!(v.evidence.is_empty());
    }

    #[test]
    fn fast_path_declines_block_diagonal() {
        assert_eq!(fast_path(&block_diagonal(2, 4)).unwrap(), None);
    }

    #[test]
    fn witnesses_are_confirmed_both_ways() {
        for s in [0, 1, 5] {
            let view = rotation(6, 2, s);
            let v = classify(&view).unwrap();
            for r in &v.evidence {
                if let Some(w) = &r.witness {
                    let t = w.triple().to_vector();
                    assert_eq!(materialized_image_type(&view, w).unwrap(), t);
                    assert_eq!(canonical_image_type(&view, w).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn reports_agree_with_their_conditions() {
        for s in 0..8 {
            let view = rotation(8, 2, s);
            for r in classify(&view).unwrap().evidence {
                assert_eq!(r.preserved, r.conditions_hold(4), "s={s}: {r:?}");
            }
        }
    }

    #[test]
    fn oracle_identity_and_trivial_types() {
        let id = rotation(6, 2, 0);
        for t in TypeTriple::all_bounded(3, 2) {
            let found = oracle_preserved(&id, t, OracleBudget::default()).unwrap();
            assert!(found.witness.is_some(), "{t}");
        }
        let rot = rotation(6, 2, 2);
        let full = oracle_preserved(&rot, TypeTriple::new(0, 0, 3).unwrap(), OracleBudget::default())
            .unwrap();
        assert!(full.witness.is_some());
    }

    #[test]
    fn oracle_rotation_by_one_brick() {
        let rot = rotation(6, 2, 2);
        let t = TypeTriple::new(1, 0, 2).unwrap();
        assert!(oracle_preserved(&rot, t, OracleBudget::default())
            .unwrap()
            .witness
            .is_none());
        assert_eq!(
            oracle_classify(&rot, OracleBudget::default()).unwrap().kind,
            VerdictKind::NonTypePreserving
        );
    }

    #[test]
    fn oracle_budget_is_explicit() {
        let rot = rotation(6, 2, 2);
        let t = TypeTriple::new(1, 1, 1).unwrap();
        let budget = OracleBudget {
            max_sets: 3,
            count_all: false,
        };
        assert_eq!(
            oracle_preserved(&rot, t, budget),
            Err(Error::BudgetExceeded { budget: 3 })
        );
    }

    #[test]
    fn oracle_guard() {
        let big = rotation(20, 4, 0);
        assert!(matches!(
            oracle_classify(&big, OracleBudget::default()),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn oracle_content_counts() {
        assert_eq!(oracle_ruled_contents(2).len(), 6 + 4);
        assert_eq!(oracle_ruled_contents(3).len(), 256 - 1 - 8 - 1);
        assert_eq!(oracle_ruled_contents(4).len(), 120 + 1820 + 12870);
    }
}
