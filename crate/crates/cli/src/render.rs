//! Plain-text forms of the reports. Each mirrors the JSON result.

use std::fmt::Write;

use mixaudit_core::classifier::{OracleVerdict, Verdict};
use mixaudit_core::groupan::{AttackStats, PrimitivityReport};
use mixaudit_core::CanonicalSet;

use crate::input::LayerInfo;

fn flag(p: Option<bool>) -> &'static str {
    match p {
        Some(true) => "yes",
        Some(false) => "no",
        None => "-",
    }
}

fn list(values: &[u64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:#x}")).collect();
    format!("[{}]", items.join(", "))
}

pub fn witness(w: &CanonicalSet) -> String {
    let mut s = format!("type {} white {}", w.triple(), list(w.white_values()));
    if let Some(r) = w.ruled_content() {
        write!(s, " ruled {}", list(r)).unwrap();
    }
    s
}

pub fn layer(info: &LayerInfo) -> String {
    let mut s = format!(
        "layer {} (n = {}, m = {}, delta = {})",
        info.source, info.n, info.m, info.delta
    );
    if info.transposed {
        s.push_str(" transposed");
    }
    if let Some(b) = &info.builtin {
        write!(s, "\n  {}", b.provenance).unwrap();
        if let Some(c) = &b.convention {
            write!(s, "\n  {c}").unwrap();
        }
    }
    s
}

pub fn verdict(v: &Verdict) -> String {
    let mut s = format!("verdict: {:?}", v.kind);
    if v.fast_path_used {
        s.push_str(" (fast path)");
    }
    if v.no_nontrivial_types {
        s.push_str(" (no nontrivial types at delta = 1)");
    }
    if let Some(c) = v.literal_corollary_condition {
        write!(s, "\nblock condition on middle types: {}", flag(Some(c))).unwrap();
    }
    if !v.evidence.is_empty() {
        s.push_str("\nn_w  eq2  a    b    c    d    preserved");
        for r in &v.evidence {
            write!(
                s,
                "\n{:<4} {:<4} {:<4} {:<4} {:<4} {:<4} {}",
                r.n_w,
                flag(r.eq2_holds),
                flag(r.prop_a),
                flag(r.prop_b),
                flag(r.prop_c),
                flag(r.prop_d),
                flag(Some(r.preserved))
            )
            .unwrap();
        }
    }
    if let Some(w) = v.witness() {
        write!(s, "\nwitness: {}", witness(w)).unwrap();
    }
    s
}

pub fn oracle(o: &OracleVerdict, agree: bool) -> String {
    let mut s = format!("oracle: {:?}", o.kind);
    s.push_str("\ntype     sets       preserved");
    for t in &o.searches {
        let found = match (t.preserved_count, &t.witness) {
            (Some(c), _) => c.to_string(),
            (None, Some(_)) => "yes".into(),
            (None, None) => "no".into(),
        };
        write!(s, "\n{:<8} {:<10} {}", t.triple.to_string(), t.sets_examined, found).unwrap();
    }
    if let Some(w) = o.witness() {
        write!(s, "\nwitness: {}", witness(w)).unwrap();
    }
    write!(s, "\nagreement: {}", flag(Some(agree))).unwrap();
    s
}

pub fn primitivity(r: &PrimitivityReport) -> String {
    let mut s = format!("{:?}: {:?}", r.cipher, r.verdict);
    if !r.witnesses.is_empty() {
        s.push_str("\nq    invariant  zero coset");
        for w in &r.witnesses {
            write!(
                s,
                "\n{:<4} {:<10} {}",
                w.q,
                flag(Some(w.invariant)),
                flag(Some(w.theorem_condition))
            )
            .unwrap();
        }
    }
    if let Some(b) = &r.block_system {
        write!(
            s,
            "\nblock system from seed {:#x}: {} blocks of {}, verified {}",
            b.seed,
            b.block_count,
            b.block_size,
            flag(Some(b.verified))
        )
        .unwrap();
        let shown = &b.block_of_zero[..b.block_of_zero.len().min(16)];
        write!(s, "\nblock of zero starts {}", list(shown)).unwrap();
    }
    write!(
        s,
        "\npoints {}, partitions checked {}, seeds examined {}",
        r.stats.points, r.stats.partitions_checked, r.stats.seeds_examined
    )
    .unwrap();
    if let Some(n) = &r.note {
        write!(s, "\nnote: {n}").unwrap();
    }
    s
}

pub fn attack(a: &AttackStats) -> String {
    let mut s = format!(
        "q = {}, rounds = {}: {}/{} ciphertext cosets predicted (rate {})",
        a.q, a.rounds, a.confirmed, a.trials, a.confirmation_rate
    );
    write!(s, "\nleaked bits per plaintext: {}", a.leaked_bits).unwrap();
    if a.rho_block_map.len() <= 64 {
        write!(s, "\nrho on blocks: {:?}", a.rho_block_map).unwrap();
    }
    write!(s, "\nkey tables kept: {}", a.key_tables.len()).unwrap();
    s
}
