//! Frequency-hopping sequences, sequence sets, and the exhaustive periodic
//! Hamming correlation engine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A sequence of `n` frequencies drawn from `{0, ..., l-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fhs {
    alphabet: usize,
    symbols: Vec<u32>,
}

impl Fhs {
    pub fn new(symbols: Vec<u32>, alphabet: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(invalid("a sequence must have positive length"));
        }
        if let Some((t, &s)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s as usize >= alphabet)
        {
            return Err(invalid(format!(
                "symbol {s} at position {t} is outside an alphabet of size {alphabet}"
            )));
        }
        Ok(Fhs { alphabet, symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    /// Occurrence count of every frequency.
    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.alphabet];
        for &s in &self.symbols {
            counts[s as usize] += 1;
        }
        counts
    }
}

/// Where a design came from: construction name, integer parameters, an
/// optional frequency label map, and digests of intermediate designs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, u64>,
    /// `labels[i]` is the original label of normalized frequency `i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intermediates: Vec<IntermediateDigest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermediateDigest {
    pub stage: String,
    pub sha256: String,
}

impl Provenance {
    pub fn new(construction: &str) -> Self {
        Provenance {
            construction: construction.to_string(),
            ..Default::default()
        }
    }

    pub fn with(mut self, key: &str, value: u64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }
}

/// `M >= 1` sequences sharing length and alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FhsSet {
    sequences: Vec<Fhs>,
    pub claimed_lambda: Option<usize>,
    pub provenance: Provenance,
}

impl FhsSet {
    pub fn new(sequences: Vec<Fhs>) -> Result<Self> {
        let first = sequences
            .first()
            .ok_or_else(|| invalid("a sequence set needs at least one sequence"))?;
        let (n, l) = (first.len(), first.alphabet());
        if let Some(j) = sequences
            .iter()
            .position(|s| s.len() != n || s.alphabet() != l)
        {
            return Err(invalid(format!(
                "sequence {j} does not share length {n} and alphabet {l}"
            )));
        }
        Ok(FhsSet {
            sequences,
            claimed_lambda: None,
            provenance: Provenance::default(),
        })
    }

    /// Builds a set from raw symbol rows over an alphabet of size `alphabet`.
    pub fn from_rows(rows: Vec<Vec<u32>>, alphabet: usize) -> Result<Self> {
        let seqs = rows
            .into_iter()
            .map(|r| Fhs::new(r, alphabet))
            .collect::<Result<Vec<_>>>()?;
        FhsSet::new(seqs)
    }

    pub fn with_claim(mut self, lambda: usize) -> Self {
        self.claimed_lambda = Some(lambda);
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn sequences(&self) -> &[Fhs] {
        &self.sequences
    }

    /// Sequence length `n`.
    pub fn length(&self) -> usize {
        self.sequences[0].len()
    }

    /// Number of sequences `M`.
    pub fn size(&self) -> usize {
        self.sequences.len()
    }

    /// Alphabet size `l`.
    pub fn alphabet(&self) -> usize {
        self.sequences[0].alphabet()
    }

    /// Largest total occurrence count of any frequency across all sequences.
    pub fn max_total_occurrences(&self) -> usize {
        let mut totals = vec![0usize; self.alphabet()];
        for s in &self.sequences {
            for (f, c) in s.histogram().into_iter().enumerate() {
                totals[f] += c;
            }
        }
        totals.into_iter().max().unwrap_or(0)
    }
}

/// `H_{X,Y}(τ) = Σ_t h[x(t), y(t+τ)]` with indices modulo `n`.
pub fn hamming_correlation(x: &Fhs, y: &Fhs, shift: usize) -> Result<usize> {
    check_pair(x, y)?;
    let n = x.len();
    if shift >= n {
        return Err(invalid(format!("shift {shift} not in [0, {n})")));
    }
    Ok(correlate(x.symbols(), y.symbols(), shift))
}

fn check_pair(x: &Fhs, y: &Fhs) -> Result<()> {
    if x.len() != y.len() || x.alphabet() != y.alphabet() {
        return Err(invalid(format!(
            "sequences differ in shape: (n={}, l={}) vs (n={}, l={})",
            x.len(),
            x.alphabet(),
            y.len(),
            y.alphabet()
        )));
    }
    Ok(())
}

#[inline]
fn correlate(x: &[u32], y: &[u32], shift: usize) -> usize {
    let n = x.len();
    let head = x[..n - shift]
        .iter()
        .zip(&y[shift..])
        .filter(|(a, b)| a == b)
        .count();
    let tail = x[n - shift..]
        .iter()
        .zip(&y[..shift])
        .filter(|(a, b)| a == b)
        .count();
    head + tail
}

fn correlation_row(x: &[u32], y: &[u32]) -> Vec<usize> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..x.len())
            .into_par_iter()
            .map(|tau| correlate(x, y, tau))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..x.len()).map(|tau| correlate(x, y, tau)).collect()
    }
}

/// `H(X) = max_{1 <= τ < n} H_{X,X}(τ)`.
pub fn max_auto(x: &Fhs) -> Result<usize> {
    if x.len() < 2 {
        return Err(invalid("autocorrelation needs length at least 2"));
    }
    let row = correlation_row(x.symbols(), x.symbols());
    Ok(row[1..].iter().copied().max().unwrap_or(0))
}

/// `H(X, Y) = max_{0 <= τ < n} H_{X,Y}(τ)`.
pub fn max_cross(x: &Fhs, y: &Fhs) -> Result<usize> {
    check_pair(x, y)?;
    Ok(correlation_row(x.symbols(), y.symbols())
        .into_iter()
        .max()
        .unwrap_or(0))
}

/// Maximum correlation of one unordered pair `(first <= second)`; equal indices
/// mean autocorrelation with `τ = 0` excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairMaximum {
    pub first: usize,
    pub second: usize,
    pub max: usize,
    /// Lowest shift attaining `max`.
    pub shift: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProfileOptions {
    /// Keep every `H_{X,Y}(τ)`, not just the maxima.
    pub full_tables: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationProfile {
    pub length: usize,
    pub sequences: usize,
    /// Pairs in order `(0,0), (0,1), ..., (0,M-1), (1,1), ...`.
    pub pairs: Vec<PairMaximum>,
    /// `H(S)`.
    pub max: usize,
    /// First pair (in `pairs` order) attaining `H(S)`.
    pub witness: PairMaximum,
    /// `tables[k][τ] = H_{X,Y}(τ)` for `pairs[k]`, when requested.
    pub tables: Option<Vec<Vec<usize>>>,
}

impl CorrelationProfile {
    /// `H(X_i)` for every sequence.
    pub fn auto_maxima(&self) -> Vec<usize> {
        self.pairs
            .iter()
            .filter(|p| p.first == p.second)
            .map(|p| p.max)
            .collect()
    }

    pub fn pair(&self, first: usize, second: usize) -> Option<&PairMaximum> {
        let (a, b) = if first <= second {
            (first, second)
        } else {
            (second, first)
        };
        self.pairs.iter().find(|p| p.first == a && p.second == b)
    }
}

pub fn set_correlation(set: &FhsSet) -> Result<CorrelationProfile> {
    set_correlation_with(set, ProfileOptions::default())
}

/// Exhaustive profile over all pairs and shifts.
pub fn set_correlation_with(set: &FhsSet, options: ProfileOptions) -> Result<CorrelationProfile> {
    let n = set.length();
    if n < 2 {
        return Err(invalid("correlation profile needs length at least 2"));
    }
    let m = set.size();
    let mut pairs = Vec::with_capacity(m * (m + 1) / 2);
    let mut tables = options.full_tables.then(Vec::new);
    for i in 0..m {
        for j in i..m {
            let x = set.sequences[i].symbols();
            let y = set.sequences[j].symbols();
            let row = correlation_row(x, y);
            let start = usize::from(i == j);
            let (shift, max) = row[start..]
                .iter()
                .enumerate()
                .fold((start, 0usize), |best, (k, &v)| {
                    if v > best.1 {
                        (k + start, v)
                    } else {
                        best
                    }
                });
            pairs.push(PairMaximum {
                first: i,
                second: j,
                max,
                shift,
            });
            if let Some(t) = tables.as_mut() {
                t.push(row);
            }
        }
    }
    let witness = *pairs
        .iter()
        .fold(None::<&PairMaximum>, |best, p| match best {
            Some(b) if b.max >= p.max => Some(b),
            _ => Some(p),
        })
        .expect("at least one pair");
    Ok(CorrelationProfile {
        length: n,
        sequences: m,
        max: witness.max,
        witness,
        pairs,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &[u32], l: usize) -> Fhs {
        Fhs::new(s.to_vec(), l).unwrap()
    }

    #[test]
    fn correlation_examples() {
        let x = seq(&[0, 1, 0, 1], 2);
        assert_eq!(hamming_correlation(&x, &x, 2).unwrap(), 4);
        assert_eq!(hamming_correlation(&x, &x, 1).unwrap(), 0);
        let a = seq(&[0, 1, 2], 3);
        let b = seq(&[1, 2, 0], 3);
        // y(t+1) = (2, 0, 1) vs x = (0, 1, 2): no agreement; τ = 2 aligns
        assert_eq!(hamming_correlation(&a, &b, 2).unwrap(), 3);
        assert_eq!(hamming_correlation(&a, &b, 0).unwrap(), 0);
        assert!(hamming_correlation(&a, &b, 3).is_err());
        assert!(hamming_correlation(&a, &seq(&[0, 1, 2], 4), 0).is_err());
    }

    #[test]
    fn max_auto_examples() {
        assert_eq!(max_auto(&seq(&[0, 1, 2, 3], 4)).unwrap(), 0);
        assert_eq!(max_auto(&seq(&[0, 0, 0], 1)).unwrap(), 3);
        assert!(max_auto(&seq(&[0], 1)).is_err());
    }

    #[test]
    fn set_examples() {
        let s = FhsSet::from_rows(vec![vec![0, 0, 0]], 1).unwrap();
        assert_eq!(set_correlation(&s).unwrap().max, 3);
        let s = FhsSet::from_rows(vec![vec![0, 1], vec![1, 0]], 2).unwrap();
        let prof = set_correlation(&s).unwrap();
        assert_eq!(prof.max, 2);
        assert_eq!(
            (prof.witness.first, prof.witness.second, prof.witness.shift),
            (0, 1, 1)
        );
    }

    #[test]
    fn rejects_inconsistent_sets() {
        assert!(FhsSet::new(vec![]).is_err());
        let a = seq(&[0, 1], 2);
        let b = seq(&[0, 1, 0], 2);
        assert!(FhsSet::new(vec![a, b]).is_err());
        assert!(Fhs::new(vec![0, 3], 3).is_err());
        assert!(Fhs::new(vec![], 3).is_err());
    }

    #[test]
    fn full_tables_are_opt_in() {
        let s = FhsSet::from_rows(vec![vec![0, 1, 1, 2], vec![2, 1, 0, 0]], 3).unwrap();
        assert!(set_correlation(&s).unwrap().tables.is_none());
        let prof = set_correlation_with(&s, ProfileOptions { full_tables: true }).unwrap();
        let tables = prof.tables.unwrap();
        assert_eq!(tables.len(), 3);
        assert_eq!(tables[0][0], 4);
    }

    #[test]
    fn occurrence_totals() {
        let s = FhsSet::from_rows(vec![vec![0, 1, 1], vec![1, 2, 0]], 3).unwrap();
        assert_eq!(s.max_total_occurrences(), 3);
    }
}
