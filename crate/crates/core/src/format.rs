//! JSON design files, verification reports and CSV export.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{classify, classify_measured, Verdict};
use crate::correlation::{set_correlation, FhsSet, PairMaximum, Provenance};
use crate::designs::{
    bncdp_to_fhs_set, verify_bncdp, verify_bncrdp, verify_cdm, verify_cdp, BlockFamily, Bncdp,
    Bncrdp, Cdm, CdmFailure, FamilyKind, Failure,
};
use crate::error::{schema, Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FhsSetPayload {
    pub alphabet: usize,
    pub sequences: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyBody {
    pub kind: FamilyKind,
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFamilyPayload {
    pub modulus: usize,
    #[serde(flatten)]
    pub family: FamilyBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BncdpPayload {
    pub modulus: usize,
    pub families: Vec<FamilyBody>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BncrdpPayload {
    pub modulus: usize,
    pub subgroup_step: usize,
    pub families: Vec<FamilyBody>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdmPayload {
    pub modulus: usize,
    pub rows: Vec<Vec<usize>>,
    #[serde(default)]
    pub normalized: bool,
    #[serde(default)]
    pub homogeneous: bool,
}

/// The design itself; `kind` selects the payload shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Payload {
    FhsSet(FhsSetPayload),
    BlockFamily(BlockFamilyPayload),
    Bncdp(BncdpPayload),
    Bncrdp(BncrdpPayload),
    Cdm(CdmPayload),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::FhsSet(_) => "fhs-set",
            Payload::BlockFamily(_) => "block-family",
            Payload::Bncdp(_) => "bncdp",
            Payload::Bncrdp(_) => "bncrdp",
            Payload::Cdm(_) => "cdm",
        }
    }

    /// Hex SHA-256 of the compact JSON serialization.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("payload serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn body(f: &BlockFamily) -> FamilyBody {
    FamilyBody {
        kind: f.kind(),
        blocks: f.blocks().to_vec(),
    }
}

impl From<&FhsSet> for Payload {
    fn from(s: &FhsSet) -> Self {
        Payload::FhsSet(FhsSetPayload {
            alphabet: s.alphabet(),
            sequences: s.sequences().iter().map(|x| x.symbols().to_vec()).collect(),
        })
    }
}

impl From<&BlockFamily> for Payload {
    fn from(f: &BlockFamily) -> Self {
        Payload::BlockFamily(BlockFamilyPayload {
            modulus: f.modulus(),
            family: body(f),
        })
    }
}

impl From<&Bncdp> for Payload {
    fn from(d: &Bncdp) -> Self {
        Payload::Bncdp(BncdpPayload {
            modulus: d.modulus(),
            families: d.families().iter().map(body).collect(),
        })
    }
}

impl From<&Bncrdp> for Payload {
    fn from(d: &Bncrdp) -> Self {
        Payload::Bncrdp(BncrdpPayload {
            modulus: d.modulus(),
            subgroup_step: d.subgroup_step(),
            families: d.families().iter().map(body).collect(),
        })
    }
}

impl From<&Cdm> for Payload {
    fn from(d: &Cdm) -> Self {
        Payload::Cdm(CdmPayload {
            modulus: d.modulus(),
            rows: d.rows().to_vec(),
            normalized: d.normalized,
            homogeneous: d.homogeneous,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claimed {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    /// Shape claims such as `n`, `M`, `l`.
    #[serde(default)]
    pub parameters: BTreeMap<String, u64>,
}

/// On-disk design file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub payload: Payload,
    #[serde(default)]
    pub claimed: Claimed,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// A design file after structural validation.
#[derive(Debug, Clone)]
pub enum Design {
    FhsSet(FhsSet),
    BlockFamily(BlockFamily),
    Bncdp(Bncdp),
    Bncrdp(Bncrdp),
    Cdm(Cdm),
}

fn as_schema(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Schema(m),
        other => other,
    }
}

fn families(modulus: usize, bodies: &[FamilyBody]) -> Result<Vec<BlockFamily>> {
    if bodies.is_empty() {
        return Err(schema("a packing needs at least one family"));
    }
    bodies
        .iter()
        .map(|b| BlockFamily::new(modulus, b.blocks.clone(), b.kind))
        .collect()
}

impl DesignFile {
    fn wrap(payload: Payload, lambda: Option<usize>, params: &[(&str, u64)]) -> Self {
        DesignFile {
            schema_version: SCHEMA_VERSION,
            payload,
            claimed: Claimed {
                lambda,
                parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            },
            provenance: None,
        }
    }

    pub fn from_set(set: &FhsSet) -> Self {
        let mut f = Self::wrap(
            Payload::from(set),
            set.claimed_lambda,
            &[
                ("n", set.length() as u64),
                ("M", set.size() as u64),
                ("l", set.alphabet() as u64),
            ],
        );
        f.provenance = Some(set.provenance.clone());
        f
    }

    pub fn from_family(family: &BlockFamily, lambda: usize) -> Self {
        Self::wrap(
            Payload::from(family),
            Some(lambda),
            &[("n", family.modulus() as u64)],
        )
    }

    pub fn from_bncdp(d: &Bncdp) -> Self {
        Self::wrap(
            Payload::from(d),
            Some(d.lambda),
            &[
                ("n", d.modulus() as u64),
                ("M", d.families().len() as u64),
                ("size", d.size() as u64),
            ],
        )
    }

    pub fn from_bncrdp(d: &Bncrdp) -> Self {
        Self::wrap(
            Payload::from(d),
            Some(d.lambda),
            &[
                ("n", d.modulus() as u64),
                ("M", d.families().len() as u64),
                ("size", d.size() as u64),
                ("step", d.subgroup_step() as u64),
            ],
        )
    }

    pub fn from_cdm(d: &Cdm) -> Self {
        Self::wrap(
            Payload::from(d),
            Some(1),
            &[("w", d.modulus() as u64), ("t", d.row_count() as u64)],
        )
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// Parses JSON; malformed documents and unknown versions are schema errors.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DesignFile =
            serde_json::from_str(text).map_err(|e| schema(format!("malformed design file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("design file serializes");
        s.push('\n');
        s
    }

    /// Builds the typed design, rejecting structurally invalid payloads.
    pub fn design(&self) -> Result<Design> {
        let lambda = self.claimed.lambda.unwrap_or(0);
        let design = match &self.payload {
            Payload::FhsSet(p) => {
                if p.sequences.is_empty() {
                    return Err(schema("an FHS set needs M >= 1 sequences"));
                }
                let mut set = FhsSet::from_rows(p.sequences.clone(), p.alphabet).map_err(as_schema)?;
                set.claimed_lambda = self.claimed.lambda;
                if let Some(prov) = &self.provenance {
                    set.provenance = prov.clone();
                }
                Design::FhsSet(set)
            }
            Payload::BlockFamily(p) => Design::BlockFamily(
                BlockFamily::new(p.modulus, p.family.blocks.clone(), p.family.kind)
                    .map_err(as_schema)?,
            ),
            Payload::Bncdp(p) => Design::Bncdp(
                Bncdp::new(families(p.modulus, &p.families).map_err(as_schema)?, lambda)
                    .map_err(as_schema)?,
            ),
            Payload::Bncrdp(p) => Design::Bncrdp(
                Bncrdp::new(
                    families(p.modulus, &p.families).map_err(as_schema)?,
                    p.subgroup_step,
                    lambda,
                )
                .map_err(as_schema)?,
            ),
            Payload::Cdm(p) => {
                let mut d = Cdm::new(p.modulus, p.rows.clone()).map_err(as_schema)?;
                d.normalized = p.normalized;
                d.homogeneous = p.homogeneous;
                Design::Cdm(d)
            }
        };
        Ok(design)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub name: String,
    pub claimed: u64,
    pub measured: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSummary {
    /// `H(S)`.
    pub max: usize,
    pub witness: PairMaximum,
    /// `H(X_i)` per sequence.
    pub auto_maxima: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructuralFailure {
    Packing(Failure),
    Cdm(CdmFailure),
}

/// Result of re-verifying a design file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub content_sha256: String,
    pub kind: String,
    /// Measured shape and index (`n`, `M`, `l`, `lambda`, ...).
    pub summary: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural_failure: Option<StructuralFailure>,
    pub claims: Vec<ClaimCheck>,
    pub passed: bool,
    /// Wall-clock time; not part of the content hash.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

/// Re-verifies every claim of a design file from scratch.
pub fn verify_file(file: &DesignFile) -> Result<Report> {
    let design = file.design()?;
    let mut summary = BTreeMap::new();
    let mut profile = None;
    let mut verdict = None;
    let mut failure = None;
    let mut lambda_ok = true;

    match &design {
        Design::FhsSet(set) => {
            let prof = set_correlation(set)?;
            summary.insert("n".into(), set.length() as u64);
            summary.insert("M".into(), set.size() as u64);
            summary.insert("l".into(), set.alphabet() as u64);
            summary.insert("lambda".into(), prof.max as u64);
            if let Some(l) = file.claimed.lambda {
                lambda_ok = prof.max <= l;
            }
            verdict = classify(set, &prof).ok();
            profile = Some(ProfileSummary {
                max: prof.max,
                witness: prof.witness,
                auto_maxima: prof.auto_maxima(),
            });
        }
        Design::BlockFamily(f) => {
            summary.insert("n".into(), f.modulus() as u64);
            summary.insert("size".into(), f.size() as u64);
            let worst = f.difference_list().worst(|r| r != 0);
            let measured = worst.map_or(0, |w| w.multiplicity);
            summary.insert("lambda".into(), measured as u64);
            if let Some(l) = file.claimed.lambda {
                let check = verify_cdp(f, l);
                lambda_ok = check.passed;
                if let Some(w) = check.witness {
                    failure = Some(StructuralFailure::Packing(Failure::ExceedsIndex {
                        site: crate::designs::Site::Family { index: 0 },
                        residue: w.residue,
                        multiplicity: w.multiplicity,
                    }));
                }
            }
        }
        Design::Bncdp(d) => {
            let v = verify_bncdp(d)?;
            summary.insert("n".into(), d.modulus() as u64);
            summary.insert("M".into(), d.families().len() as u64);
            summary.insert("size".into(), d.size() as u64);
            summary.insert("lambda".into(), v.measured_index() as u64);
            if file.claimed.lambda.is_some() {
                lambda_ok = v.passed();
                failure = v.failure.map(StructuralFailure::Packing);
            }
            if d.is_partition_type() && bncdp_to_fhs_set(d).is_ok() {
                verdict = classify_measured(
                    d.modulus() as u64,
                    d.families().len() as u64,
                    d.size() as u64,
                    v.measured_index() as u64,
                )
                .ok();
            }
        }
        Design::Bncrdp(d) => {
            let v = verify_bncrdp(d)?;
            summary.insert("n".into(), d.modulus() as u64);
            summary.insert("M".into(), d.families().len() as u64);
            summary.insert("size".into(), d.size() as u64);
            summary.insert("step".into(), d.subgroup_step() as u64);
            summary.insert("lambda".into(), v.measured_index() as u64);
            lambda_ok = v.passed();
            failure = v.failure.map(StructuralFailure::Packing);
        }
        Design::Cdm(d) => {
            let c = verify_cdm(d);
            summary.insert("w".into(), d.modulus() as u64);
            summary.insert("t".into(), d.row_count() as u64);
            lambda_ok = c.passed;
            failure = c.failure.map(StructuralFailure::Cdm);
        }
    }

    let mut claims = Vec::new();
    if let Some(l) = file.claimed.lambda {
        claims.push(ClaimCheck {
            name: "lambda".into(),
            claimed: l as u64,
            measured: summary.get("lambda").copied().unwrap_or(l as u64),
            passed: lambda_ok,
        });
    }
    for (name, &claimed) in &file.claimed.parameters {
        let measured = summary.get(name).copied();
        claims.push(ClaimCheck {
            name: name.clone(),
            claimed,
            measured: measured.unwrap_or(0),
            passed: measured == Some(claimed),
        });
    }
    let passed = claims.iter().all(|c| c.passed) && failure.is_none();
    Ok(Report {
        content_sha256: file.payload.digest(),
        kind: file.payload.kind().to_string(),
        summary,
        profile,
        verdict,
        structural_failure: failure,
        claims,
        passed,
        elapsed_ms: None,
    })
}

/// CSV: a `# n=..,M=..,l=..,lambda=..` header, then one sequence per line.
pub fn to_csv(set: &FhsSet) -> String {
    let lambda = set
        .claimed_lambda
        .map_or_else(|| "?".to_string(), |l| l.to_string());
    let mut out = format!(
        "# n={},M={},l={},lambda={}\n",
        set.length(),
        set.size(),
        set.alphabet(),
        lambda
    );
    for s in set.sequences() {
        let row: Vec<String> = s.symbols().iter().map(u32::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One sequence per line, space separated, no header.
pub fn to_rows(set: &FhsSet) -> String {
    let mut out = String::new();
    for s in set.sequences() {
        let row: Vec<String> = s.symbols().iter().map(u32::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Reads the output of [`to_csv`] back.
pub fn from_csv(text: &str) -> Result<FhsSet> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .and_then(|h| h.strip_prefix("# "))
        .ok_or_else(|| schema("missing '# n=..' header"))?;
    let mut fields = BTreeMap::new();
    for kv in header.split(',') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| schema(format!("bad header field {kv:?}")))?;
        fields.insert(k.trim().to_string(), v.trim().to_string());
    }
    let num = |k: &str| -> Result<usize> {
        fields
            .get(k)
            .ok_or_else(|| schema(format!("header lacks {k}")))?
            .parse()
            .map_err(|_| schema(format!("header field {k} is not a number")))
    };
    let (n, m, l) = (num("n")?, num("M")?, num("l")?);
    let rows = lines
        .map(|line| {
            line.split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| schema(format!("bad symbol {x:?}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(schema(format!("body does not match header n={n}, M={m}")));
    }
    let mut set = FhsSet::from_rows(rows, l).map_err(as_schema)?;
    set.claimed_lambda = fields.get("lambda").and_then(|v| v.parse().ok());
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_set() -> FhsSet {
        FhsSet::from_rows(vec![vec![0, 1, 2, 0, 1], vec![1, 2, 0, 2, 0]], 3)
            .unwrap()
            .with_claim(4)
    }

    #[test]
    fn json_round_trip() {
        let set = small_set();
        let file = DesignFile::from_set(&set);
        let back = DesignFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        match back.design().unwrap() {
            Design::FhsSet(s) => assert_eq!(s.sequences(), set.sequences()),
            other => panic!("wrong kind {other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(DesignFile::from_json("{"), Err(Error::Schema(_))));
        let bad_version = r#"{"schema_version":9,"kind":"cdm","payload":{"modulus":1,"rows":[[0]]}}"#;
        assert!(matches!(DesignFile::from_json(bad_version), Err(Error::Schema(_))));
        let empty = r#"{"schema_version":1,"kind":"fhs-set","payload":{"alphabet":3,"sequences":[]}}"#;
        let f = DesignFile::from_json(empty).unwrap();
        assert!(matches!(f.design(), Err(Error::Schema(_))));
        let out_of_range = r#"{"schema_version":1,"kind":"fhs-set","payload":{"alphabet":2,"sequences":[[0,2]]}}"#;
        let f = DesignFile::from_json(out_of_range).unwrap();
        assert!(matches!(f.design(), Err(Error::Schema(_))));
        let unknown = r#"{"schema_version":1,"kind":"tree","payload":{}}"#;
        assert!(matches!(DesignFile::from_json(unknown), Err(Error::Schema(_))));
    }

    #[test]
    fn report_flags_false_claims() {
        let set = small_set();
        let mut file = DesignFile::from_set(&set);
        let honest = verify_file(&file).unwrap();
        assert!(honest.passed, "{honest:?}");
        file.claimed.lambda = Some(3);
        let r = verify_file(&file).unwrap();
        assert!(!r.passed);
        file.claimed.lambda = Some(4);
        file.claimed.parameters.insert("l".into(), 4);
        assert!(!verify_file(&file).unwrap().passed);
    }

    #[test]
    fn digest_ignores_claims_and_provenance() {
        let set = small_set();
        let a = DesignFile::from_set(&set);
        let mut b = a.clone();
        b.claimed.lambda = Some(7);
        b.provenance = None;
        assert_eq!(
            verify_file(&a).unwrap().content_sha256,
            verify_file(&b).unwrap().content_sha256
        );
    }

    #[test]
    fn csv_round_trip() {
        let set = small_set();
        let text = to_csv(&set);
        assert!(text.starts_with("# n=5,M=2,l=3,lambda=4\n"));
        let back = from_csv(&text).unwrap();
        assert_eq!(back.sequences(), set.sequences());
        assert_eq!(back.claimed_lambda, Some(4));
        assert!(from_csv("0,1\n").is_err());
        assert_eq!(to_rows(&set).lines().next(), Some("0 1 2 0 1"));
    }
}
