//! Brute-force enumeration of restricted, colored set partitions.
//!
//! Nothing here touches the recurrence engine: partitions are walked as
//! restricted-growth strings and counted with plain integers, which makes the
//! counts an independent check on the generated triangles.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{Pow, Zero};

use crate::families::FamilyDescriptor;
use crate::{Error, Result};

/// Largest `r + n` the enumerator accepts.
pub const MAX_ELEMENTS: usize = 14;

/// Partitions of `[r + n]` in which elements `1..=r` are distinguished and
/// lie in distinct blocks. Every other block must hold at least `s` elements
/// and carries weight `m^{|B|-1}` (all but its smallest element colored).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PartitionConstraint {
    pub n: usize,
    pub r: usize,
    pub m: u32,
    pub s: usize,
}

impl PartitionConstraint {
    pub fn new(n: usize, r: usize, m: u32, s: usize) -> Result<Self> {
        if m == 0 || s == 0 {
            return Err(Error::InvalidParameter(format!(
                "partition constraint needs m >= 1 and s >= 1, got m={m}, s={s}"
            )));
        }
        Ok(Self { n, r, m, s })
    }
}

struct Walker {
    r: usize,
    s: usize,
    total: usize,
    sizes: Vec<usize>,
    /// tally[(k, e)]: partitions with k free blocks holding e elements in total.
    tally: BTreeMap<(usize, usize), u64>,
}

impl Walker {
    fn visit(&mut self, element: usize) {
        let remaining = self.total - element;
        let deficit: usize =
            self.sizes[self.r..].iter().map(|&sz| self.s.saturating_sub(sz)).sum();
        if deficit > remaining {
            return;
        }
        if element == self.total {
            let k = self.sizes.len() - self.r;
            let e = self.sizes[self.r..].iter().sum();
            *self.tally.entry((k, e)).or_default() += 1;
            return;
        }
        for b in 0..self.sizes.len() {
            self.sizes[b] += 1;
            self.visit(element + 1);
            self.sizes[b] -= 1;
        }
        self.sizes.push(1);
        self.visit(element + 1);
        self.sizes.pop();
    }
}

/// Weighted count of admissible partitions keyed by the number of
/// non-distinguished blocks. Keys with zero count are omitted.
pub fn count_partitions(c: &PartitionConstraint) -> Result<BTreeMap<usize, BigUint>> {
    let total = c.r + c.n;
    if total > MAX_ELEMENTS {
        return Err(Error::SizeGuard { size: total, limit: MAX_ELEMENTS });
    }
    // The first r elements open their own blocks.
    let mut walker =
        Walker { r: c.r, s: c.s, total, sizes: vec![1; c.r], tally: BTreeMap::new() };
    walker.visit(c.r);

    let mut out: BTreeMap<usize, BigUint> = BTreeMap::new();
    for ((k, e), count) in walker.tally {
        let weight = BigUint::from(c.m).pow((e - k) as u32);
        *out.entry(k).or_insert_with(BigUint::zero) += weight * count;
    }
    Ok(out)
}

/// How a family's triangle maps onto the enumeration: row `n` of the family
/// equals the counts for `n - row_shift` free elements, with block index
/// shifted by `k_shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CombinatorialModel {
    pub r: usize,
    pub m: u32,
    pub s: usize,
    pub row_shift: usize,
    pub k_shift: usize,
}

pub fn combinatorial_model(fam: &FamilyDescriptor) -> Option<CombinatorialModel> {
    let p = |k: &str| fam.parameters.get(k).copied();
    let plain = |r: i64, m: i64, s: i64| -> Option<CombinatorialModel> {
        (r >= 0 && m >= 1 && s >= 1).then_some(CombinatorialModel {
            r: r as usize,
            m: m as u32,
            s: s as usize,
            row_shift: 0,
            k_shift: 0,
        })
    };
    match fam.name.as_str() {
        "stirling2" => plain(0, 1, 1),
        "whitney" | "type_b" => plain(p("c")?, p("m")?, 1),
        "translated_whitney" => plain(0, p("m")?, 1),
        "dowling" => plain(1, p("m")?, 1),
        "stirling_frobenius" => plain(p("m")? - 1, p("m")?, 1),
        "sheffer" if p("d")? == 1 => plain(p("a")?, 1, 1),
        "assoc_stirling" => plain(0, 1, p("s")?),
        "r_whitney_assoc" => plain(p("r")?, p("m")?, p("s")?),
        "r_stirling" => {
            let r = p("r")? as usize;
            Some(CombinatorialModel { r, m: 1, s: 1, row_shift: r, k_shift: r })
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleReport {
    Pass { rows_checked: usize },
    Mismatch { n: usize, k: usize, triangle: String, oracle: String },
    Skipped(String),
}

impl OracleReport {
    pub fn is_failure(&self) -> bool {
        matches!(self, Self::Mismatch { .. })
    }
}

/// Compares the family's triangle against enumeration for every row up to
/// `max_n`. Rows whose enumeration would exceed [`MAX_ELEMENTS`] are an error.
pub fn verify_family(fam: &FamilyDescriptor, max_n: usize) -> Result<OracleReport> {
    let Some(model) = combinatorial_model(fam) else {
        return Ok(OracleReport::Skipped(format!(
            "no combinatorial model registered for {}",
            fam.invocation()
        )));
    };
    if max_n < fam.spec.start_index() {
        return Ok(OracleReport::Pass { rows_checked: 0 });
    }
    let rows = fam.spec.triangle(max_n)?;
    let mut checked = 0;
    for row in &rows {
        if row.n < model.row_shift {
            continue;
        }
        let c = PartitionConstraint::new(row.n - model.row_shift, model.r, model.m, model.s)?;
        let counts = count_partitions(&c)?;
        let width = row.coeffs.len().max(counts.keys().max().map_or(0, |k| k + model.k_shift + 1));
        for k in 0..width {
            let tri = row.coeffs.get(k).cloned().unwrap_or_default();
            let orc = k
                .checked_sub(model.k_shift)
                .and_then(|j| counts.get(&j))
                .cloned()
                .unwrap_or_default();
            let same = tri.is_integer() && tri.numer().to_biguint().is_some_and(|t| t == orc);
            if !same {
                return Ok(OracleReport::Mismatch {
                    n: row.n,
                    k,
                    triangle: tri.to_string(),
                    oracle: orc.to_string(),
                });
            }
        }
        checked += 1;
    }
    Ok(OracleReport::Pass { rows_checked: checked })
}

/// Weighted total over all block counts.
pub fn total(counts: &BTreeMap<usize, BigUint>) -> BigUint {
    counts.values().fold(BigUint::zero(), |acc, c| acc + c)
}
