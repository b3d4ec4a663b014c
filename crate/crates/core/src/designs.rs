//! Cyclic difference packings and their nested/relative variants, cyclic
//! difference matrices, and the correspondence between FHS sets and
//! partition-type balanced nested packings.

use serde::{Deserialize, Serialize};

use crate::algebra::{crt_solve, gcd, is_prime};
use crate::correlation::{Fhs, FhsSet, Provenance};
use crate::error::{invalid, Result};

/// Multiset over `Z_n` stored as a dense residue → count map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiset {
    counts: Vec<usize>,
}

impl Multiset {
    pub fn zeros(modulus: usize) -> Self {
        Multiset {
            counts: vec![0; modulus],
        }
    }

    pub fn modulus(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, residue: usize) -> usize {
        self.counts[residue % self.counts.len()]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    fn add(&mut self, residue: usize) {
        self.counts[residue] += 1;
    }

    /// Highest multiplicity among residues accepted by `keep`; lowest residue
    /// wins ties. `None` if no residue is accepted.
    pub fn worst(&self, keep: impl Fn(usize) -> bool) -> Option<Worst> {
        let mut best: Option<Worst> = None;
        for (r, &c) in self.counts.iter().enumerate() {
            if keep(r) && best.is_none_or(|b| c > b.multiplicity) {
                best = Some(Worst {
                    residue: r,
                    multiplicity: c,
                });
            }
        }
        best
    }
}

/// A residue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Worst {
    pub residue: usize,
    pub multiplicity: usize,
}

/// `Δ(B) = {a - b : a, b ∈ B, a ≠ b}` in `Z_n`.
pub fn difference_list(block: &[usize], modulus: usize) -> Multiset {
    let mut out = Multiset::zeros(modulus);
    accumulate_differences(&mut out, block);
    out
}

fn accumulate_differences(out: &mut Multiset, block: &[usize]) {
    let n = out.modulus();
    for (i, &a) in block.iter().enumerate() {
        for (j, &b) in block.iter().enumerate() {
            if i != j {
                out.add((a + n - b) % n);
            }
        }
    }
}

/// `Δ_E(A, B) = {y - x : (x, y) ∈ A × B}` in `Z_n`.
pub fn external_difference_list(a: &[usize], b: &[usize], modulus: usize) -> Multiset {
    let mut out = Multiset::zeros(modulus);
    accumulate_external(&mut out, a, b);
    out
}

fn accumulate_external(out: &mut Multiset, a: &[usize], b: &[usize]) {
    let n = out.modulus();
    for &x in a {
        for &y in b {
            out.add((y + n - x) % n);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Plain,
    /// Blocks partition the ambient set (`Z_n`, or `Z_n ∖ mZ_n` for relative
    /// packings).
    PartitionType,
}

/// Base blocks over `Z_n`. Block order is significant: blocks of different
/// families are paired by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFamily {
    modulus: usize,
    blocks: Vec<Vec<usize>>,
    kind: FamilyKind,
}

impl BlockFamily {
    /// Each block is stored sorted; duplicates within a block are rejected.
    pub fn new(modulus: usize, blocks: Vec<Vec<usize>>, kind: FamilyKind) -> Result<Self> {
        if modulus == 0 {
            return Err(invalid("modulus must be positive"));
        }
        let mut blocks = blocks;
        for (i, b) in blocks.iter_mut().enumerate() {
            if let Some(&x) = b.iter().find(|&&x| x >= modulus) {
                return Err(invalid(format!(
                    "block {i} contains {x}, outside Z_{modulus}"
                )));
            }
            b.sort_unstable();
            if b.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("block {i} repeats an element")));
            }
        }
        Ok(BlockFamily {
            modulus,
            blocks,
            kind,
        })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// Number of blocks.
    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    /// Sorted distinct block sizes `K`.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut k: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        k.sort_unstable();
        k.dedup();
        k
    }

    /// `Δ(𝓑) = ∪ Δ(B_i)`.
    pub fn difference_list(&self) -> Multiset {
        let mut out = Multiset::zeros(self.modulus);
        for b in &self.blocks {
            accumulate_differences(&mut out, b);
        }
        out
    }

    /// `Δ_E(𝓑, 𝓑') = ∪_i Δ_E(B_i, B'_i)`.
    pub fn external_difference_list(&self, other: &BlockFamily) -> Result<Multiset> {
        if self.modulus != other.modulus || self.size() != other.size() {
            return Err(invalid(format!(
                "families differ in modulus or size: ({}, {}) vs ({}, {})",
                self.modulus,
                self.size(),
                other.modulus,
                other.size()
            )));
        }
        let mut out = Multiset::zeros(self.modulus);
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            accumulate_external(&mut out, a, b);
        }
        Ok(out)
    }

    /// Coverage count of every residue.
    fn coverage(&self) -> Vec<usize> {
        let mut cov = vec![0usize; self.modulus];
        for b in &self.blocks {
            for &x in b {
                cov[x] += 1;
            }
        }
        cov
    }

    /// First residue violating "covered exactly once iff `target(x)`".
    fn partition_defect(&self, target: impl Fn(usize) -> bool) -> Option<Worst> {
        self.coverage()
            .into_iter()
            .enumerate()
            .find(|&(x, c)| c != usize::from(target(x)))
            .map(|(x, c)| Worst {
                residue: x,
                multiplicity: c,
            })
    }

    pub fn is_partition(&self) -> bool {
        self.partition_defect(|_| true).is_none()
    }
}

/// Outcome of a packing check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdpCheck {
    pub passed: bool,
    /// Worst nonzero residue of `Δ(𝓑)`.
    pub witness: Option<Worst>,
}

/// Checks that `Δ(𝓑)` holds every nonzero residue at most `λ` times.
pub fn verify_cdp(family: &BlockFamily, lambda: usize) -> CdpCheck {
    let witness = family.difference_list().worst(|r| r != 0);
    CdpCheck {
        passed: witness.is_none_or(|w| w.multiplicity <= lambda),
        witness,
    }
}

/// Where a verifier found a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "site", rename_all = "kebab-case")]
pub enum Site {
    /// Internal differences of one family.
    Family { index: usize },
    /// External differences of an ordered family pair.
    Pair { from: usize, to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Failure {
    /// A residue occurs more than `λ` times.
    ExceedsIndex {
        site: Site,
        residue: usize,
        multiplicity: usize,
    },
    /// A difference lands in the forbidden subgroup.
    ForbiddenDifference {
        site: Site,
        residue: usize,
        multiplicity: usize,
    },
    /// A family does not partition its ambient set; `coverage` is how often
    /// `residue` is covered.
    NotPartition {
        family: usize,
        residue: usize,
        coverage: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub lambda: usize,
    /// Largest multiplicity of an admissible residue in any `Δ(𝓑_j)`.
    pub max_internal: usize,
    /// Largest multiplicity of an admissible residue in any `Δ_E(𝓑_j, 𝓑_j')`.
    pub max_external: usize,
    /// First failure in the order families, then ordered pairs.
    pub failure: Option<Failure>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    /// Smallest index this design satisfies.
    pub fn measured_index(&self) -> usize {
        self.max_internal.max(self.max_external)
    }
}

/// `{𝓑_0, ..., 𝓑_{M-1}}` over `Z_n` with index `λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bncdp {
    modulus: usize,
    families: Vec<BlockFamily>,
    pub lambda: usize,
}

impl Bncdp {
    pub fn new(families: Vec<BlockFamily>, lambda: usize) -> Result<Self> {
        let modulus = check_families(&families)?;
        Ok(Bncdp {
            modulus,
            families,
            lambda,
        })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn families(&self) -> &[BlockFamily] {
        &self.families
    }

    /// Blocks per family.
    pub fn size(&self) -> usize {
        self.families[0].size()
    }

    pub fn is_partition_type(&self) -> bool {
        self.families
            .iter()
            .all(|f| f.kind() == FamilyKind::PartitionType)
    }
}

fn check_families(families: &[BlockFamily]) -> Result<usize> {
    let first = families
        .first()
        .ok_or_else(|| invalid("a nested packing needs at least one family"))?;
    let modulus = first.modulus();
    if families.iter().any(|f| f.modulus() != modulus) {
        return Err(invalid("families are over different moduli"));
    }
    Ok(modulus)
}

fn check_equal_sizes(families: &[BlockFamily]) -> Result<()> {
    let size = families[0].size();
    if let Some(j) = families.iter().position(|f| f.size() != size) {
        return Err(invalid(format!(
            "family {j} has {} blocks, family 0 has {size}",
            families[j].size()
        )));
    }
    Ok(())
}

/// Shared engine: `forbidden(r)` residues must not occur at all, residue 0 is
/// exempt internally, every other residue may occur at most `λ` times.
fn verify_nested(
    families: &[BlockFamily],
    lambda: usize,
    forbidden: impl Fn(usize) -> bool + Sync,
    partition_target: impl Fn(usize) -> bool,
) -> Result<Verification> {
    check_equal_sizes(families)?;
    let mut failure = None;
    let mut max_internal = 0;
    for (j, fam) in families.iter().enumerate() {
        if fam.kind() == FamilyKind::PartitionType && failure.is_none() {
            if let Some(d) = fam.partition_defect(&partition_target) {
                failure = Some(Failure::NotPartition {
                    family: j,
                    residue: d.residue,
                    coverage: d.multiplicity,
                });
            }
        }
        let diffs = fam.difference_list();
        let site = Site::Family { index: j };
        let f = judge(&diffs, site, lambda, |r| r != 0, &forbidden, &mut max_internal);
        if failure.is_none() {
            failure = f;
        }
    }

    let m = families.len();
    let ordered: Vec<(usize, usize)> = (0..m)
        .flat_map(|j| (0..m).filter(move |&k| k != j).map(move |k| (j, k)))
        .collect();
    let external = |&(j, k): &(usize, usize)| -> Result<(Option<Failure>, usize)> {
        let diffs = families[j].external_difference_list(&families[k])?;
        let mut worst = 0;
        let f = judge(
            &diffs,
            Site::Pair { from: j, to: k },
            lambda,
            |_| true,
            &forbidden,
            &mut worst,
        );
        Ok((f, worst))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        ordered.par_iter().map(external).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = ordered.iter().map(external).collect();

    let mut max_external = 0;
    for r in results {
        let (f, worst) = r?;
        max_external = max_external.max(worst);
        if failure.is_none() {
            failure = f;
        }
    }
    Ok(Verification {
        lambda,
        max_internal,
        max_external,
        failure,
    })
}

fn judge(
    diffs: &Multiset,
    site: Site,
    lambda: usize,
    counted: impl Fn(usize) -> bool,
    forbidden: impl Fn(usize) -> bool,
    running_max: &mut usize,
) -> Option<Failure> {
    if let Some(w) = diffs.worst(|r| counted(r) && forbidden(r)) {
        if w.multiplicity > 0 {
            return Some(Failure::ForbiddenDifference {
                site,
                residue: w.residue,
                multiplicity: w.multiplicity,
            });
        }
    }
    let w = diffs.worst(|r| counted(r) && !forbidden(r))?;
    *running_max = (*running_max).max(w.multiplicity);
    (w.multiplicity > lambda).then_some(Failure::ExceedsIndex {
        site,
        residue: w.residue,
        multiplicity: w.multiplicity,
    })
}

/// Checks every family as a CDP of index `λ`, every ordered pair's external
/// differences against `λ`, and partition claims.
pub fn verify_bncdp(design: &Bncdp) -> Result<Verification> {
    verify_nested(&design.families, design.lambda, |_| false, |_| true)
}

/// Relative nested packing over `Z_{mg}` avoiding the subgroup `mZ_{mg}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bncrdp {
    modulus: usize,
    /// `m`: differences divisible by `m` are forbidden.
    subgroup_step: usize,
    families: Vec<BlockFamily>,
    pub lambda: usize,
}

impl Bncrdp {
    pub fn new(families: Vec<BlockFamily>, subgroup_step: usize, lambda: usize) -> Result<Self> {
        let modulus = check_families(&families)?;
        if subgroup_step == 0 || modulus % subgroup_step != 0 {
            return Err(invalid(format!(
                "subgroup step {subgroup_step} does not divide modulus {modulus}"
            )));
        }
        Ok(Bncrdp {
            modulus,
            subgroup_step,
            families,
            lambda,
        })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn subgroup_step(&self) -> usize {
        self.subgroup_step
    }

    /// `g`, the order of the forbidden subgroup.
    pub fn subgroup_order(&self) -> usize {
        self.modulus / self.subgroup_step
    }

    pub fn families(&self) -> &[BlockFamily] {
        &self.families
    }

    pub fn size(&self) -> usize {
        self.families[0].size()
    }

    pub fn is_partition_type(&self) -> bool {
        self.families
            .iter()
            .all(|f| f.kind() == FamilyKind::PartitionType)
    }

    pub fn into_families(self) -> Vec<BlockFamily> {
        self.families
    }
}

pub fn verify_bncrdp(design: &Bncrdp) -> Result<Verification> {
    let step = design.subgroup_step;
    if step == 0 || !design.modulus.is_multiple_of(step) {
        return Err(invalid(format!(
            "subgroup step {step} does not divide modulus {}",
            design.modulus
        )));
    }
    verify_nested(
        &design.families,
        design.lambda,
        |r| r % step == 0,
        |x| x % step != 0,
    )
}

/// `t × w` matrix over `Z_w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cdm {
    modulus: usize,
    rows: Vec<Vec<usize>>,
    pub normalized: bool,
    pub homogeneous: bool,
}

impl Cdm {
    pub fn new(modulus: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if modulus == 0 {
            return Err(invalid("modulus must be positive"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != modulus {
                return Err(invalid(format!(
                    "row {i} has {} entries, expected {modulus}",
                    r.len()
                )));
            }
            if let Some(&x) = r.iter().find(|&&x| x >= modulus) {
                return Err(invalid(format!("row {i} has entry {x} outside Z_{modulus}")));
            }
        }
        Ok(Cdm {
            modulus,
            rows,
            normalized: false,
            homogeneous: false,
        })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> usize {
        self.rows[row][col]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CdmFailure {
    /// `R_h - R_r` hits `residue` `count` times instead of once.
    RowPair {
        r: usize,
        h: usize,
        residue: usize,
        count: usize,
    },
    /// Flagged homogeneous but a row is not a permutation of `Z_w`.
    NotPermutation { row: usize },
    /// Flagged normalized but the first row is not zero.
    NotNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdmCheck {
    pub passed: bool,
    pub failure: Option<CdmFailure>,
}

fn covers_once(values: impl Iterator<Item = usize>, w: usize) -> Option<(usize, usize)> {
    let mut seen = vec![0usize; w];
    for v in values {
        seen[v] += 1;
    }
    seen.into_iter()
        .enumerate()
        .find(|&(_, c)| c != 1)
}

/// Pairwise difference property, plus the claims carried by the flags.
/// A homogeneous matrix must also have every row a permutation of `Z_w`.
pub fn verify_cdm(d: &Cdm) -> CdmCheck {
    let w = d.modulus;
    let fail = |f| CdmCheck {
        passed: false,
        failure: Some(f),
    };
    if d.normalized && d.rows.first().is_some_and(|r| r.iter().any(|&x| x != 0)) {
        return fail(CdmFailure::NotNormalized);
    }
    if d.homogeneous {
        for (i, row) in d.rows.iter().enumerate() {
            if covers_once(row.iter().copied(), w).is_some() {
                return fail(CdmFailure::NotPermutation { row: i });
            }
        }
    }
    for r in 0..d.rows.len() {
        for h in r + 1..d.rows.len() {
            let diffs = d.rows[h]
                .iter()
                .zip(&d.rows[r])
                .map(|(&a, &b)| (a + w - b) % w);
            if let Some((residue, count)) = covers_once(diffs, w) {
                return fail(CdmFailure::RowPair {
                    r,
                    h,
                    residue,
                    count,
                });
            }
        }
    }
    CdmCheck {
        passed: true,
        failure: None,
    }
}

fn require_valid(d: &Cdm) -> Result<()> {
    let check = verify_cdm(d);
    if let Some(f) = check.failure {
        return Err(invalid(format!("not a cyclic difference matrix: {f:?}")));
    }
    Ok(())
}

/// Subtracts row 0 from every row column-wise so the first row is zero.
pub fn normalize_cdm(d: &Cdm) -> Result<Cdm> {
    require_valid(d)?;
    let w = d.modulus;
    let Some(first) = d.rows.first() else {
        return Err(invalid("cannot normalize an empty matrix"));
    };
    let rows = d
        .rows
        .iter()
        .map(|r| r.iter().zip(first).map(|(&a, &b)| (a + w - b) % w).collect())
        .collect();
    Ok(Cdm {
        modulus: w,
        rows,
        normalized: true,
        homogeneous: false,
    })
}

/// Drops the zero row of a normalized `(w, t, 1)`-CDM, giving a homogeneous
/// `(w, t-1, 1)`-CDM.
pub fn homogenize_cdm(d: &Cdm) -> Result<Cdm> {
    if !d.normalized {
        return Err(invalid("homogenizing needs a normalized matrix"));
    }
    if d.rows.len() < 2 {
        return Err(invalid("homogenizing needs at least two rows"));
    }
    require_valid(d)?;
    Ok(Cdm {
        modulus: d.modulus,
        rows: d.rows[1..].to_vec(),
        normalized: false,
        homogeneous: true,
    })
}

/// Rows `0..rows` of the multiplication table of `Z_w`. This is a CDM exactly
/// when every difference of two row indices is a unit modulo `w`.
pub fn multiplication_table(w: usize, rows: usize) -> Result<Cdm> {
    if rows > w {
        return Err(invalid(format!("cannot take {rows} rows of Z_{w}")));
    }
    let table = (0..rows)
        .map(|i| (0..w).map(|j| i * j % w).collect())
        .collect();
    Cdm::new(w, table)
}

/// The `(p, p, 1)`-CDM given by the multiplication table of the prime field.
pub fn prime_multiplication_table(p: usize) -> Result<Cdm> {
    if !is_prime(p as u64) {
        return Err(invalid(format!("{p} is not prime")));
    }
    let mut d = multiplication_table(p, p)?;
    d.normalized = true;
    Ok(d)
}

/// Product of `(w1, t, 1)` and `(w2, t, 1)` CDMs with coprime moduli: column
/// `c` of the result combines column `c mod w1` and `c mod w2` by CRT.
pub fn cdm_product(a: &Cdm, b: &Cdm) -> Result<Cdm> {
    if a.row_count() != b.row_count() {
        return Err(invalid("CDM product needs equal row counts"));
    }
    let (w1, w2) = (a.modulus, b.modulus);
    if gcd(w1 as u64, w2 as u64) != 1 {
        return Err(invalid(format!("moduli {w1} and {w2} are not coprime")));
    }
    let w = w1 * w2;
    let rows = (0..a.row_count())
        .map(|i| {
            (0..w)
                .map(|c| {
                    crt_solve(&[
                        (a.entry(i, c % w1) as u64, w1 as u64),
                        (b.entry(i, c % w2) as u64, w2 as u64),
                    ])
                    .map(|x| x as usize)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Cdm::new(w, rows)?;
    out.normalized = a.normalized && b.normalized;
    out.homogeneous = a.homogeneous && b.homogeneous;
    Ok(out)
}

/// `B_i^j` = positions of frequency `i` in sequence `j`; blocks ordered by
/// frequency. The index is the set's claimed `λ`, or its tightest index.
pub fn fhs_set_to_bncdp(set: &FhsSet) -> Result<Bncdp> {
    let n = set.length();
    let l = set.alphabet();
    let families = set
        .sequences()
        .iter()
        .map(|s| {
            let mut blocks = vec![Vec::new(); l];
            for (t, &f) in s.symbols().iter().enumerate() {
                blocks[f as usize].push(t);
            }
            BlockFamily::new(n, blocks, FamilyKind::PartitionType)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut design = Bncdp::new(families, 0)?;
    design.lambda = match set.claimed_lambda {
        Some(l) => l,
        None => verify_bncdp(&design)?.measured_index(),
    };
    Ok(design)
}

/// Inverse of [`fhs_set_to_bncdp`]: position `t` of sequence `j` gets the
/// index of the block of `𝓑_j` containing `t`.
pub fn bncdp_to_fhs_set(design: &Bncdp) -> Result<FhsSet> {
    check_equal_sizes(&design.families)?;
    let n = design.modulus;
    let l = design.size();
    let mut sequences = Vec::with_capacity(design.families.len());
    for (j, fam) in design.families.iter().enumerate() {
        if let Some(d) = fam.partition_defect(|_| true) {
            return Err(invalid(format!(
                "family {j} is not a partition of Z_{n}: {} covered {} times",
                d.residue, d.multiplicity
            )));
        }
        let mut symbols = vec![0u32; n];
        for (i, b) in fam.blocks().iter().enumerate() {
            for &t in b {
                symbols[t] = i as u32;
            }
        }
        sequences.push(Fhs::new(symbols, l)?);
    }
    Ok(FhsSet::new(sequences)?
        .with_claim(design.lambda)
        .with_provenance(Provenance::new("bncdp")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, blocks: &[&[usize]], kind: FamilyKind) -> BlockFamily {
        BlockFamily::new(n, blocks.iter().map(|b| b.to_vec()).collect(), kind).unwrap()
    }

    #[test]
    fn difference_list_examples() {
        let d = difference_list(&[0, 1, 3], 7);
        assert_eq!(d.counts(), &[0, 1, 1, 1, 1, 1, 1]);
        assert_eq!(difference_list(&[4], 7).total(), 0);
        let d = difference_list(&[0, 2], 4);
        assert_eq!(d.count(2), 2);
        assert_eq!(d.total(), 2);
    }

    #[test]
    fn external_difference_examples() {
        assert_eq!(external_difference_list(&[0], &[0], 3).counts(), &[1, 0, 0]);
        let d = external_difference_list(&[0, 1], &[0, 1], 4);
        assert_eq!(d.counts(), &[2, 1, 0, 1]);
    }

    #[test]
    fn cdp_examples() {
        let f = fam(7, &[&[0, 1, 3]], FamilyKind::Plain);
        assert!(verify_cdp(&f, 1).passed);
        // Δ({0,1}) = {1,3}, Δ({2,3}) = {1,3}: residue 1 twice
        let f = fam(4, &[&[0, 1], &[2, 3]], FamilyKind::Plain);
        let c = verify_cdp(&f, 1);
        assert!(!c.passed);
        assert_eq!(
            c.witness,
            Some(Worst {
                residue: 1,
                multiplicity: 2
            })
        );
        assert!(verify_cdp(&f, 2).passed);
    }

    #[test]
    fn block_family_validation() {
        assert!(BlockFamily::new(4, vec![vec![0, 4]], FamilyKind::Plain).is_err());
        assert!(BlockFamily::new(4, vec![vec![1, 1]], FamilyKind::Plain).is_err());
        let f = fam(4, &[&[3, 0], &[1, 2]], FamilyKind::PartitionType);
        assert_eq!(f.blocks()[0], vec![0, 3]);
        assert!(f.is_partition());
        assert_eq!(f.block_sizes(), vec![2]);
    }

    #[test]
    fn bncdp_single_family_matches_cdp() {
        let f = fam(7, &[&[0, 1, 3], &[2], &[4], &[5], &[6]], FamilyKind::PartitionType);
        let d = Bncdp::new(vec![f.clone()], 1).unwrap();
        let v = verify_bncdp(&d).unwrap();
        assert_eq!(v.passed(), verify_cdp(&f, 1).passed);
        assert!(v.passed());
        assert_eq!(v.max_external, 0);
    }

    #[test]
    fn bncdp_detects_partition_and_size_errors() {
        let a = fam(4, &[&[0, 1], &[2]], FamilyKind::PartitionType);
        let d = Bncdp::new(vec![a], 4).unwrap();
        assert!(matches!(
            verify_bncdp(&d).unwrap().failure,
            Some(Failure::NotPartition { residue: 3, coverage: 0, .. })
        ));
        let a = fam(4, &[&[0, 1], &[2, 3]], FamilyKind::PartitionType);
        let b = fam(4, &[&[0, 1, 2, 3]], FamilyKind::PartitionType);
        let d = Bncdp::new(vec![a, b], 4).unwrap();
        assert!(verify_bncdp(&d).is_err());
    }

    #[test]
    fn bncrdp_requires_dividing_step() {
        let a = fam(6, &[&[1, 2]], FamilyKind::Plain);
        assert!(Bncrdp::new(vec![a], 4, 1).is_err());
    }

    #[test]
    fn bncrdp_forbidden_hits() {
        // Z_6 with subgroup 3Z_6 = {0, 3}; {1, 4} differs by 3
        let a = fam(6, &[&[1, 4]], FamilyKind::Plain);
        let d = Bncrdp::new(vec![a], 3, 5).unwrap();
        assert!(matches!(
            verify_bncrdp(&d).unwrap().failure,
            Some(Failure::ForbiddenDifference { residue: 3, .. })
        ));
        let a = fam(6, &[&[1, 2], &[4, 5]], FamilyKind::PartitionType);
        let d = Bncrdp::new(vec![a], 3, 2).unwrap();
        let v = verify_bncrdp(&d).unwrap();
        assert!(v.passed(), "{v:?}");
    }

    #[test]
    fn cdm_examples() {
        let d = prime_multiplication_table(5).unwrap();
        assert!(verify_cdm(&d).passed);
        let n = normalize_cdm(&d).unwrap();
        assert!(n.rows()[0].iter().all(|&x| x == 0));
        assert!(verify_cdm(&n).passed);
        let h = homogenize_cdm(&n).unwrap();
        assert_eq!(h.row_count(), 4);
        for (i, row) in h.rows().iter().enumerate() {
            let expected: Vec<usize> = (0..5).map(|j| (i + 1) * j % 5).collect();
            assert_eq!(row, &expected);
        }
        assert!(verify_cdm(&h).passed);
    }

    #[test]
    fn cdm_rejections() {
        let mut d = multiplication_table(6, 3).unwrap();
        assert!(!verify_cdm(&d).passed);
        assert!(normalize_cdm(&d).is_err());
        d = multiplication_table(5, 3).unwrap();
        assert!(homogenize_cdm(&d).is_err());
        let mut flagged = multiplication_table(5, 2).unwrap();
        flagged.homogeneous = true;
        assert_eq!(
            verify_cdm(&flagged).failure,
            Some(CdmFailure::NotPermutation { row: 0 })
        );
    }

    #[test]
    fn cdm_product_matches_direct_table() {
        let a = multiplication_table(5, 4).unwrap();
        let b = multiplication_table(7, 4).unwrap();
        let p = cdm_product(&a, &b).unwrap();
        assert_eq!(p, multiplication_table(35, 4).unwrap());
        assert!(verify_cdm(&p).passed);
        assert!(cdm_product(&a, &multiplication_table(5, 4).unwrap()).is_err());
    }

    #[test]
    fn fhs_bncdp_round_trip_small() {
        let set = FhsSet::from_rows(vec![vec![0, 1, 0]], 2).unwrap();
        let d = fhs_set_to_bncdp(&set).unwrap();
        assert_eq!(d.families()[0].blocks(), &[vec![0, 2], vec![1]]);
        let back = bncdp_to_fhs_set(&d).unwrap();
        assert_eq!(back.sequences(), set.sequences());
    }

    #[test]
    fn backward_conversion_needs_partitions() {
        let a = fam(4, &[&[0, 1], &[2]], FamilyKind::Plain);
        let d = Bncdp::new(vec![a], 2).unwrap();
        assert!(bncdp_to_fhs_set(&d).is_err());
    }
}
