//! Lower bounds on Hamming correlation and optimality classification.
//!
//! All bounds are evaluated with exact integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::correlation::{CorrelationProfile, FhsSet};
use crate::error::{invalid, Error, Result};

/// `⌈a / b⌉` for `b > 0`.
fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b) + i128::from(a.rem_euclid(b) != 0)
}

/// Lempel-Greenberger bound on `H(X)` for one sequence of length `n` over
/// `l` frequencies: `⌈(n-ε)(n+ε-l) / (l(n-1))⌉` with `ε = n mod l`.
pub fn lempel_greenberger(n: u64, l: u64) -> Result<u64> {
    if n < 2 {
        return Err(invalid("Lempel-Greenberger bound needs n >= 2"));
    }
    if l < 1 {
        return Err(invalid("alphabet size must be positive"));
    }
    let (n, l) = (n as i128, l as i128);
    let eps = n % l;
    let value = ceil_div((n - eps) * (n + eps - l), l * (n - 1));
    Ok(value.max(0) as u64)
}

/// The two Peng-Fan bounds on `H(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PengFan {
    /// `⌈(nM-l)n / ((nM-1)l)⌉`
    pub first: i64,
    /// `⌈(2InM - (I+1)Il) / ((nM-1)M)⌉` with `I = ⌊nM/l⌋`
    pub second: i64,
    /// `I`
    pub quotient: u64,
}

pub fn peng_fan(n: u64, m: u64, l: u64) -> Result<PengFan> {
    if l < 1 {
        return Err(invalid("alphabet size must be positive"));
    }
    if m < 1 || n * m < 2 {
        return Err(invalid("Peng-Fan bounds need M >= 1 and nM >= 2"));
    }
    let (n, m, l) = (n as i128, m as i128, l as i128);
    let nm = n * m;
    let first = ceil_div((nm - l) * n, (nm - 1) * l);
    let i = nm / l;
    let second = ceil_div(2 * i * nm - (i + 1) * i * l, (nm - 1) * m);
    Ok(PengFan {
        first: first as i64,
        second: second as i64,
        quotient: i as u64,
    })
}

/// Closed form of the second Peng-Fan bound for `M > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Simplified {
    /// `k = (n - ε) / l`
    pub k: u64,
    /// `ε = n mod l`
    pub eps: u64,
    /// `k` if `εM < l`, else `k + 1`
    pub bound: u64,
}

pub fn simplified_peng_fan(n: u64, m: u64, l: u64) -> Result<Simplified> {
    if m <= 1 {
        return Err(Error::NotApplicable(
            "simplified Peng-Fan bound needs M > 1".into(),
        ));
    }
    if l < 1 {
        return Err(invalid("alphabet size must be positive"));
    }
    let eps = n % l;
    let k = (n - eps) / l;
    let bound = if eps * m < l { k } else { k + 1 };
    Ok(Simplified { k, eps, bound })
}

/// Which bound a set meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    LempelGreenberger,
    PengFanFirst,
    PengFanSecond,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Classification {
    Optimal { certified_by: Vec<BoundKind> },
    NotOptimal,
}

impl Classification {
    pub fn is_optimal(&self) -> bool {
        matches!(self, Classification::Optimal { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub length: u64,
    pub sequences: u64,
    pub alphabet: u64,
    pub measured: u64,
    /// Per-member Lempel-Greenberger bound.
    pub lempel_greenberger: u64,
    pub peng_fan: PengFan,
    /// Present iff `M > 1`.
    pub simplified: Option<Simplified>,
    /// Whether Peng-Fan bounds take part in the verdict (`M > 1`).
    pub peng_fan_applicable: bool,
    pub classification: Classification,
}

impl Verdict {
    pub fn is_optimal(&self) -> bool {
        self.classification.is_optimal()
    }
}

/// Classifies a measured `H(S)` for parameters `(n, M, l)`.
///
/// Single sequences are judged by Lempel-Greenberger alone; sets with
/// `M > 1` by either Peng-Fan bound. A measured value below any lower
/// bound is rejected since no real set can produce it.
pub fn classify_measured(n: u64, m: u64, l: u64, measured: u64) -> Result<Verdict> {
    let lg = lempel_greenberger(n, l)?;
    let pf = peng_fan(n, m, l)?;
    let simplified = (m > 1).then(|| simplified_peng_fan(n, m, l)).transpose()?;
    let floor = lg.max(pf.first.max(pf.second).max(0) as u64);
    if measured < floor {
        return Err(invalid(format!(
            "measured H(S) = {measured} is below the lower bound {floor}; \
             profile does not belong to an ({n}, {m}, ·; {l}) set"
        )));
    }
    let mut certified = Vec::new();
    if m == 1 {
        if measured == lg {
            certified.push(BoundKind::LempelGreenberger);
        }
    } else {
        if measured as i64 == pf.first {
            certified.push(BoundKind::PengFanFirst);
        }
        if measured as i64 == pf.second {
            certified.push(BoundKind::PengFanSecond);
        }
    }
    let classification = if certified.is_empty() {
        Classification::NotOptimal
    } else {
        Classification::Optimal {
            certified_by: certified,
        }
    };
    Ok(Verdict {
        length: n,
        sequences: m,
        alphabet: l,
        measured,
        lempel_greenberger: lg,
        peng_fan: pf,
        simplified,
        peng_fan_applicable: m > 1,
        classification,
    })
}

pub fn classify(set: &FhsSet, profile: &CorrelationProfile) -> Result<Verdict> {
    if profile.length != set.length() || profile.sequences != set.size() {
        return Err(invalid(format!(
            "profile shape (n={}, M={}) does not match set (n={}, M={})",
            profile.length,
            profile.sequences,
            set.length(),
            set.size()
        )));
    }
    classify_measured(
        set.length() as u64,
        set.size() as u64,
        set.alphabet() as u64,
        profile.max as u64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lg_examples() {
        assert_eq!(lempel_greenberger(7, 7).unwrap(), 0);
        assert_eq!(lempel_greenberger(15, 4).unwrap(), 3);
        // ε = 2: ⌈(4 · 4) / (4 · 5)⌉
        assert_eq!(lempel_greenberger(6, 4).unwrap(), 1);
        assert!(lempel_greenberger(1, 4).is_err());
    }

    #[test]
    fn lg_agrees_with_floor_form_when_n_exceeds_l() {
        // ⌊n/l⌋ is the simplified single-sequence bound for n > l
        for n in 2..120u64 {
            for l in 1..n {
                let lg = lempel_greenberger(n, l).unwrap();
                assert_eq!(lg, n / l, "n={n} l={l}");
            }
        }
    }

    #[test]
    fn pf_examples() {
        assert_eq!(peng_fan(15, 2, 4).unwrap().first, 4);
        assert_eq!(peng_fan(15, 2, 4).unwrap().second, 4);
        assert_eq!(peng_fan(195, 2, 49).unwrap().second, 4);
        for (n, l) in [(10u64, 3u64), (7, 7), (30, 15)] {
            let direct = ceil_div(((n - l) * n) as i128, ((n - 1) * l) as i128);
            assert_eq!(peng_fan(n, 1, l).unwrap().first as i128, direct);
        }
        assert!(peng_fan(15, 2, 0).is_err());
    }

    #[test]
    fn simplified_examples() {
        let s = simplified_peng_fan(14, 2, 4).unwrap();
        assert_eq!((s.k, s.eps, s.bound), (3, 2, 4));
        let s = simplified_peng_fan(10, 2, 5).unwrap();
        assert_eq!((s.eps, s.bound), (0, 2));
        let s = simplified_peng_fan(15, 2, 4).unwrap();
        assert_eq!((s.eps, s.bound), (3, 4));
        assert!(matches!(
            simplified_peng_fan(15, 1, 4),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let v = classify_measured(10, 2, 5, 2).unwrap();
        assert!(v.is_optimal());
        let v = classify_measured(9, 1, 3, 9).unwrap();
        assert!(!v.is_optimal());
        let v = classify_measured(72, 2, 9, 9).unwrap();
        assert_eq!(v.classification, Classification::NotOptimal);
        let v = classify_measured(30, 1, 15, 2).unwrap();
        assert!(!v.peng_fan_applicable);
        assert_eq!(
            v.classification,
            Classification::Optimal {
                certified_by: vec![BoundKind::LempelGreenberger]
            }
        );
        assert!(classify_measured(15, 2, 4, 3).is_err());
    }

    #[test]
    fn classify_rejects_mismatched_profile() {
        let set = FhsSet::from_rows(vec![vec![0, 1, 2]], 3).unwrap();
        let other = FhsSet::from_rows(vec![vec![0, 1, 2, 0]], 3).unwrap();
        let prof = crate::correlation::set_correlation(&other).unwrap();
        assert!(classify(&set, &prof).is_err());
    }
}
