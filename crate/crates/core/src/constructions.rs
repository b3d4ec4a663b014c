//! Direct and recursive constructions of FHS sets and the packings behind
//! them. Every construction re-verifies its output before returning it.

use serde::{Deserialize, Serialize};

use crate::algebra::{
    build_field, crt_solve, factorize, gcd, is_prime, pow_mod, primitive_root,
    primitive_root_prime_power_stable, FieldElement, SigmaMap,
};
use crate::correlation::{Fhs, FhsSet, IntermediateDigest, Provenance};
use crate::designs::{
    bncdp_to_fhs_set, fhs_set_to_bncdp, homogenize_cdm, multiplication_table, normalize_cdm,
    verify_bncdp, verify_bncrdp, verify_cdm, BlockFamily, Bncdp, Bncrdp, Cdm, FamilyKind,
    Verification,
};
use crate::error::{invalid, unsupported, Error, Result};
use crate::format::Payload;

fn digest_of(stage: &str, payload: Payload) -> IntermediateDigest {
    IntermediateDigest {
        stage: stage.to_string(),
        sha256: payload.digest(),
    }
}

fn checked_bncdp(design: Bncdp, what: &str) -> Result<Bncdp> {
    let v = verify_bncdp(&design)?;
    match v.failure {
        None => Ok(design),
        Some(f) => Err(Error::Internal(format!("{what} failed verification: {f:?}"))),
    }
}

fn checked_bncrdp(design: Bncrdp, what: &str) -> Result<Bncrdp> {
    let v = verify_bncrdp(&design)?;
    match v.failure {
        None => Ok(design),
        Some(f) => Err(Error::Internal(format!("{what} failed verification: {f:?}"))),
    }
}

fn to_set(design: &Bncdp, provenance: Provenance) -> Result<FhsSet> {
    Ok(bncdp_to_fhs_set(design)?.with_provenance(provenance))
}

/// Construction A over `GF(p^m)` and `GF(p^u)`: the
/// `(p(p^m-1), p^{u-1}, p^{m-u+1}; p^u)` set
/// `X^a(t) = σ(α^{t mod p^m-1}) + (t mod p) + a` for `a` in
/// `R = {a_1β + ... + a_{u-1}β^{u-1}}`.
///
/// Frequencies are the elements of `GF(p^u)` numbered by lexicographic order
/// of their coefficient vectors (constant term first); `R` is enumerated in
/// increasing packed order.
pub fn construction_a(p: u32, m: u32, u: u32) -> Result<FhsSet> {
    if u <= 1 || u > m {
        return Err(invalid(format!("need 1 < u <= m, got u = {u}, m = {m}")));
    }
    let big = build_field(p, m)?;
    let small = build_field(p, u)?;
    let sigma = SigmaMap::new(&big, &small)?;
    let q1 = big.order() as u64 - 1;
    let n = p as u64 * q1;
    let images: Vec<FieldElement> = (0..q1)
        .map(|i| sigma.apply(big.exp(i)))
        .collect::<Result<_>>()?;

    // lexicographic rank of a coefficient vector, constant term most significant
    let rank = |x: FieldElement| -> u32 {
        small
            .coefficients(x)
            .iter()
            .fold(0u32, |acc, &c| acc * p + c)
    };
    let l = small.order() as usize;
    let mut sequences = Vec::new();
    for k in 0..(small.order() / p) {
        let a = FieldElement(k * p);
        let symbols = (0..n)
            .map(|t| {
                let base = small.add(images[(t % q1) as usize], small.scalar((t % p as u64) as u32));
                rank(small.add(base, a))
            })
            .collect();
        sequences.push(Fhs::new(symbols, l)?);
    }
    let mut labels: Vec<(u32, String)> = small
        .elements()
        .map(|x| (rank(x), format!("{:?}", small.coefficients(x))))
        .collect();
    labels.sort();
    let provenance = Provenance {
        labels: Some(labels.into_iter().map(|(_, s)| s).collect()),
        ..Provenance::new("a")
            .with("p", p as u64)
            .with("m", m as u64)
            .with("u", u as u64)
    };
    Ok(FhsSet::new(sequences)?
        .with_claim((p as usize).pow(m - u + 1))
        .with_provenance(provenance))
}

fn least_prime_of_odd(v: u64, name: &str) -> Result<u64> {
    if v.is_multiple_of(2) {
        return Err(invalid(format!("{name} must be odd")));
    }
    factorize(v)
        .least_prime()
        .ok_or_else(|| invalid(format!("{name} must be greater than 1")))
}

/// Partition-type `(tv, {K_0..K_{a-1}}, t)`-BNCDP of size `v` with
/// `a = ⌊(p_1 - 1)/t⌋` and blocks `B_c^u = {b + ctθ_{b+ut} : 0 <= b < t}`.
pub fn tv_bncdp(t: u64, v: u64) -> Result<Bncdp> {
    let p1 = least_prime_of_odd(v, "v")?;
    if t <= 1 || t >= p1 {
        return Err(invalid(format!(
            "need 1 < t < p_1 = {p1} (least prime divisor of v), got t = {t}"
        )));
    }
    let a = (p1 - 1) / t;
    let comps: Vec<u64> = factorize(v).prime_powers();
    let theta = (0..t * a)
        .map(|i| crt_solve(&comps.iter().map(|&q| ((i + 1) % q, q)).collect::<Vec<_>>()))
        .collect::<Result<Vec<u64>>>()?;
    let n = t * v;
    let families = (0..a)
        .map(|u| {
            let blocks = (0..v)
                .map(|c| {
                    (0..t)
                        .map(|b| ((b + c * t % n * theta[(b + u * t) as usize]) % n) as usize)
                        .collect()
                })
                .collect();
            BlockFamily::new(n as usize, blocks, FamilyKind::PartitionType)
        })
        .collect::<Result<Vec<_>>>()?;
    checked_bncdp(Bncdp::new(families, t as usize)?, "tv packing")
}

/// The `(tv, ⌊(p_1-1)/t⌋, t; v)` set for odd `v` and `1 < t < p_1`.
pub fn construct_tv(t: u64, v: u64) -> Result<FhsSet> {
    let design = tv_bncdp(t, v)?;
    to_set(&design, Provenance::new("tv").with("t", t).with("v", v))
}

/// Output of the `3p` construction.
#[derive(Debug, Clone)]
pub struct ThreeP {
    /// Partition-type `(3p, {{3,4},{3,4}}, 4)`-BNCDP of size `(3p+1)/4`.
    pub bncdp: Bncdp,
    /// The families left after deleting `Z_3 × {0}`, as a candidate
    /// `(3p, 3, {{4},{4}}, 4)`-BNCRDP.
    pub bncrdp: Bncrdp,
    /// Verification of `bncrdp`.
    pub bncrdp_check: Verification,
    pub set: FhsSet,
}

/// The block families of the `3p` construction over `Z_3 × Z_p ≅ Z_{3p}`
/// from the smallest primitive root `α` mod `p`, without verification:
/// the BNCDP (with `Z_3 × {0}` last) and the relative packing without it.
pub fn three_p_packings(p: u64) -> Result<(Bncdp, Bncrdp)> {
    if !is_prime(p) || p % 4 != 1 {
        return Err(invalid(format!("p must be a prime ≡ 1 (mod 4), got {p}")));
    }
    let alpha = primitive_root(p)?;
    let t = (p - 1) / 4;
    let n = 3 * p;
    let at = |z: u64, x: u64| -> Result<usize> {
        crt_solve(&[(z % 3, 3), (x % p, p)]).map(|r| r as usize)
    };
    let quad = |e: u64, z: u64| -> Result<Vec<usize>> {
        let x = pow_mod(alpha, e, p);
        let y = pow_mod(alpha, e + t, p);
        Ok(vec![
            at(z, x)?,
            at(z, p - x)?,
            at(z + 1, y)?,
            at(z + 1, p - y)?,
        ])
    };
    let mut first = Vec::new();
    let mut second = Vec::new();
    for i in 0..t {
        for j in 0..3u64 {
            // A_j^i = A_0^i + (j, 0); B_1^i = B_0^i + (2, 0), B_2^i = B_0^i + (1, 0)
            first.push(quad(i, j)?);
            second.push(quad(i + 1, (3 - j) % 3)?);
        }
    }
    let axis: Vec<usize> = (0..3).map(|z| at(z, 0)).collect::<Result<_>>()?;
    let relative = Bncrdp::new(
        vec![
            BlockFamily::new(n as usize, first.clone(), FamilyKind::PartitionType)?,
            BlockFamily::new(n as usize, second.clone(), FamilyKind::PartitionType)?,
        ],
        p as usize,
        4,
    )?;
    first.push(axis.clone());
    second.push(axis);
    let full = Bncdp::new(
        vec![
            BlockFamily::new(n as usize, first, FamilyKind::PartitionType)?,
            BlockFamily::new(n as usize, second, FamilyKind::PartitionType)?,
        ],
        4,
    )?;
    Ok((full, relative))
}

/// The `(3p, 2, 4; (3p+1)/4)` set for a prime `p ≡ 1 (mod 4)`.
///
/// For `p = 5` (`t = 1`) the blocks `A_1^0` and `B_1^0` overlap and the
/// families only reach index 7, so this is reported as unsupported.
pub fn construct_3p(p: u64) -> Result<ThreeP> {
    let (full, relative) = three_p_packings(p)?;
    if let Some(f) = verify_bncdp(&full)?.failure {
        return Err(unsupported(format!(
            "p = {p}: the 3p blocks do not form a packing of index 4 ({f:?})"
        )));
    }
    let relative_check = verify_bncrdp(&relative)?;
    let set = to_set(&full, Provenance::new("threep").with("p", p))?;
    Ok(ThreeP {
        bncdp: full,
        bncrdp: relative,
        bncrdp_check: relative_check,
        set,
    })
}

/// Units `g` (of order `e`) and `a` modulo `v` built by CRT from stable
/// primitive roots `g_i` of each `p_i`: `g ≡ g_i^{f_i p_i^{m_i-1}}` with
/// `f_i = (p_i - 1)/e`, and `a ≡ g_i`.
fn cyclotomic_generators(v: u64, e: u64) -> Result<(u64, u64, u64)> {
    if v.is_multiple_of(2) || v < 3 {
        return Err(invalid(format!("v must be odd and greater than 1, got {v}")));
    }
    if e < 2 {
        return Err(invalid(format!("e must be greater than 1, got {e}")));
    }
    let fact = factorize(v);
    let mut g_res = Vec::new();
    let mut a_res = Vec::new();
    let mut f = u64::MAX;
    for &(pi, mi) in &fact.factors {
        if (pi - 1) % e != 0 {
            return Err(invalid(format!("e = {e} does not divide {pi} - 1")));
        }
        let fi = (pi - 1) / e;
        f = f.min(fi);
        let q = pi.pow(mi);
        let gi = primitive_root_prime_power_stable(pi)?;
        g_res.push((pow_mod(gi, fi * pi.pow(mi - 1), q), q));
        a_res.push((gi % q, q));
    }
    Ok((crt_solve(&g_res)?, crt_solve(&a_res)?, f))
}

/// `(v, 1, {K_0..K_{f-1}}, e)`-BNCRDP of size `(v-1)/e`: family `t` has
/// blocks `B_r^t = {r a^t g^j : 0 <= j < e}` for coset representatives `r`
/// of `G = <g>` (each the least element of its coset, in increasing order).
pub fn cyclotomic_bncrdp(v: u64, e: u64) -> Result<Bncrdp> {
    let (g, a, f) = cyclotomic_generators(v, e)?;
    let mut covered = vec![false; v as usize];
    let mut reps = Vec::new();
    for x in 1..v {
        if covered[x as usize] {
            continue;
        }
        reps.push(x);
        let mut y = x;
        for _ in 0..e {
            covered[y as usize] = true;
            y = y * g % v;
        }
    }
    let families = (0..f)
        .map(|t| {
            let at = pow_mod(a, t, v);
            let blocks = reps
                .iter()
                .map(|&r| {
                    (0..e)
                        .map(|j| (r * at % v * pow_mod(g, j, v) % v) as usize)
                        .collect()
                })
                .collect();
            BlockFamily::new(v as usize, blocks, FamilyKind::PartitionType)
        })
        .collect::<Result<Vec<_>>>()?;
    checked_bncrdp(
        Bncrdp::new(families, v as usize, e as usize)?,
        "cyclotomic relative packing",
    )
}

/// Appends the block `{0}` to every family of [`cyclotomic_bncrdp`], giving a
/// partition-type BNCDP of size `(v-1)/e + 1` and the `(v, f, e; (v-1)/e+1)`
/// set.
pub fn bncdp_from_cyclotomic(v: u64, e: u64) -> Result<(Bncdp, FhsSet)> {
    let rel = cyclotomic_bncrdp(v, e)?;
    let lambda = rel.lambda;
    let families = rel
        .into_families()
        .into_iter()
        .map(|f| {
            let mut blocks = f.blocks().to_vec();
            blocks.push(vec![0]);
            BlockFamily::new(v as usize, blocks, FamilyKind::PartitionType)
        })
        .collect::<Result<Vec<_>>>()?;
    let design = checked_bncdp(Bncdp::new(families, lambda)?, "cyclotomic packing")?;
    let set = to_set(&design, Provenance::new("cyclotomic").with("v", v).with("e", e))?;
    Ok((design, set))
}

fn truncate_rows(d: &Cdm, rows: usize) -> Result<Cdm> {
    let mut out = Cdm::new(d.modulus(), d.rows()[..rows].to_vec())?;
    out.normalized = d.normalized;
    Ok(out)
}

/// Homogeneous `(w, t, 1)`-CDM for odd `w` whose least prime factor exceeds
/// `t`: rows `0..=t` of the multiplication table of each prime-power factor,
/// combined by CRT product, then normalized and stripped of the zero row.
pub fn cdm_for(w: u64, t: usize) -> Result<Cdm> {
    if t == 0 {
        return Err(invalid("a difference matrix needs at least one row"));
    }
    if w == 1 {
        let mut d = Cdm::new(1, vec![vec![0]; t])?;
        d.homogeneous = true;
        return Ok(d);
    }
    if w.is_multiple_of(2) {
        return Err(unsupported(format!("w must be odd, got {w}")));
    }
    let fact = factorize(w);
    let q1 = fact.least_prime().expect("w > 1");
    if q1 as usize <= t {
        return Err(unsupported(format!(
            "least prime factor {q1} of w = {w} must exceed t = {t}"
        )));
    }
    let mut product: Option<Cdm> = None;
    for q in fact.prime_powers() {
        let table = truncate_rows(&multiplication_table(q as usize, q as usize)?, t + 1)?;
        product = Some(match product {
            None => table,
            Some(acc) => crate::designs::cdm_product(&acc, &table)?,
        });
    }
    let full = product.expect("at least one prime factor");
    let homogeneous = homogenize_cdm(&normalize_cdm(&full)?)?;
    let check = verify_cdm(&homogeneous);
    if let Some(f) = check.failure {
        return Err(Error::Internal(format!("CDM for w = {w} failed: {f:?}")));
    }
    Ok(homogeneous)
}

/// Replaces block `i` of every family with the `w` blocks `(i, s)`: the
/// `k`-th element `a` of the stacked blocks `B_i^0, ..., B_i^{M-1}` becomes
/// `a + modulus·γ_{k,s}`.
fn stack_expand(families: &[BlockFamily], modulus: usize, cdm: &Cdm) -> Result<Vec<BlockFamily>> {
    if !cdm.homogeneous || !verify_cdm(cdm).passed {
        return Err(invalid("expansion needs a verified homogeneous CDM"));
    }
    let size = families[0].size();
    if families.iter().any(|f| f.size() != size) {
        return Err(invalid("families must have equal sizes"));
    }
    let needed = (0..size)
        .map(|i| families.iter().map(|f| f.blocks()[i].len()).sum::<usize>())
        .max()
        .unwrap_or(0);
    if cdm.row_count() < needed {
        return Err(invalid(format!(
            "CDM has {} rows but stacked blocks need {needed}",
            cdm.row_count()
        )));
    }
    let w = cdm.modulus();
    let big = modulus * w;
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::with_capacity(size * w); families.len()];
    for i in 0..size {
        for s in 0..w {
            let mut k = 0;
            for (j, fam) in families.iter().enumerate() {
                let block = fam.blocks()[i]
                    .iter()
                    .map(|&a| {
                        let x = a + modulus * cdm.entry(k, s);
                        k += 1;
                        x
                    })
                    .collect();
                out[j].push(block);
            }
        }
    }
    out.into_iter()
        .zip(families)
        .map(|(blocks, f)| BlockFamily::new(big, blocks, f.kind()))
        .collect()
}

/// Expands an `(mg, g, {K_j}, λ)`-BNCRDP of size `u` by a homogeneous
/// `(w, t, 1)`-CDM into an `(mgw, gw, {K_j}, λ)`-BNCRDP of size `uw`.
pub fn expand_bncrdp_by_cdm(design: &Bncrdp, cdm: &Cdm) -> Result<Bncrdp> {
    if !design.is_partition_type() {
        return Err(invalid(
            "expansion needs families partitioning the subgroup complement",
        ));
    }
    let families = stack_expand(design.families(), design.modulus(), cdm)?;
    checked_bncrdp(
        Bncrdp::new(families, design.subgroup_step(), design.lambda)?,
        "expanded relative packing",
    )
}

/// Fills the forbidden subgroup of a BNCRDP over `Z_{mg}` with a
/// partition-type BNCDP over `Z_g` scaled by `m`: `T_j = 𝓑_j ∪ {mA_i^j}`.
pub fn fill_bncrdp_with_bncdp(design: &Bncrdp, filler: &Bncdp) -> Result<Bncdp> {
    if design.families().len() != filler.families().len() {
        return Err(invalid(format!(
            "family counts differ: {} vs {}",
            design.families().len(),
            filler.families().len()
        )));
    }
    if filler.modulus() != design.subgroup_order() {
        return Err(invalid(format!(
            "filler is over Z_{} but the subgroup has order {}",
            filler.modulus(),
            design.subgroup_order()
        )));
    }
    if !design.is_partition_type() || !filler.is_partition_type() {
        return Err(invalid("filling needs partition-type inputs"));
    }
    if let Some(f) = verify_bncrdp(design)?.failure {
        return Err(invalid(format!("relative packing fails: {f:?}")));
    }
    if let Some(f) = verify_bncdp(filler)?.failure {
        return Err(invalid(format!("filler packing fails: {f:?}")));
    }
    let m = design.subgroup_step();
    let families = design
        .families()
        .iter()
        .zip(filler.families())
        .map(|(b, a)| {
            let mut blocks = b.blocks().to_vec();
            blocks.extend(
                a.blocks()
                    .iter()
                    .map(|blk| blk.iter().map(|&x| x * m).collect::<Vec<_>>()),
            );
            BlockFamily::new(design.modulus(), blocks, FamilyKind::PartitionType)
        })
        .collect::<Result<Vec<_>>>()?;
    let lambda = design.lambda.max(filler.lambda);
    checked_bncdp(Bncdp::new(families, lambda)?, "filled packing")
}

/// `(nw, M, λ; lw)` set from an `(n, M, λ; l)` set, for odd `w` whose least
/// prime factor exceeds the largest total occurrence count of a frequency.
pub fn expand_fhs_set_by_cdm(set: &FhsSet, w: u64) -> Result<FhsSet> {
    let t = set.max_total_occurrences();
    if w.is_multiple_of(2) {
        return Err(unsupported(format!("w must be odd, got {w}")));
    }
    let cdm = cdm_for(w, t)?;
    let design = fhs_set_to_bncdp(set)?;
    let families = stack_expand(design.families(), design.modulus(), &cdm)?;
    let expanded = checked_bncdp(Bncdp::new(families, design.lambda)?, "expanded packing")?;
    let mut provenance = Provenance::new("nv").with("w", w);
    provenance.intermediates = vec![digest_of("base", Payload::from(set))];
    to_set(&expanded, provenance)
}

/// Folds consecutive groups of `t` sequences (index order) into `⌊M/t⌋`
/// sequences of length `tn` with claimed index `tλ`.
///
/// Group members are interleaved, `Z(ti + j) = X_j(i)`: a shift `tq + r`
/// then splits into `t` full periodic correlations, each at most `λ`.
/// Plain end-to-end concatenation does not keep the bound.
pub fn concatenate_fold(set: &FhsSet, t: usize) -> Result<FhsSet> {
    if t == 0 || t > set.size() {
        return Err(invalid(format!(
            "need 1 <= t <= M = {}, got t = {t}",
            set.size()
        )));
    }
    let n = set.length();
    let sequences = set
        .sequences()
        .chunks_exact(t)
        .map(|group| {
            let symbols = (0..t * n).map(|k| group[k % t].symbols()[k / t]).collect();
            Fhs::new(symbols, set.alphabet())
        })
        .collect::<Result<Vec<_>>>()?;
    let base_lambda = match set.claimed_lambda {
        Some(l) => l,
        None => verify_bncdp(&fhs_set_to_bncdp(set)?)?.measured_index(),
    };
    let mut provenance = Provenance::new("kn").with("t", t as u64);
    provenance.intermediates = vec![digest_of("base", Payload::from(set))];
    let out = FhsSet::new(sequences)?
        .with_claim(t * base_lambda)
        .with_provenance(provenance);
    // structural check of the claim
    let design = fhs_set_to_bncdp(&out)?;
    if let Some(f) = verify_bncdp(&design)?.failure {
        return Err(Error::Internal(format!("folded set exceeds tλ: {f:?}")));
    }
    Ok(out)
}

/// Partition-type `(n, {{3,4},{3,4}}, 4)`-BNCDP for `n = 3 p_1 ⋯ p_u`
/// (primes `p_j ≡ 1 mod 4`, `25 ∤ n`), built by induction on `u`.
pub fn three_p_product_bncdp(primes: &[u64]) -> Result<Bncdp> {
    let mut ps = primes.to_vec();
    ps.sort_unstable();
    if ps.is_empty() {
        return Err(invalid("need at least one prime"));
    }
    if let Some(&bad) = ps.iter().find(|&&p| !is_prime(p) || p % 4 != 1) {
        return Err(invalid(format!("{bad} is not a prime ≡ 1 (mod 4)")));
    }
    if ps.iter().filter(|&&p| p == 5).count() > 1 {
        return Err(unsupported("n must not be divisible by 25"));
    }
    build_three_p_product(&ps)
}

fn build_three_p_product(ps: &[u64]) -> Result<Bncdp> {
    let head = construct_3p(ps[0])?;
    if ps.len() == 1 {
        return Ok(head.bncdp);
    }
    if let Some(f) = head.bncrdp_check.failure {
        return Err(unsupported(format!(
            "p_1 = {}: deleting Z_3 × {{0}} does not leave a relative packing ({f:?})",
            ps[0]
        )));
    }
    let rest: u64 = ps[1..].iter().product();
    let cdm = cdm_for(rest, 8)?;
    let expanded = expand_bncrdp_by_cdm(&head.bncrdp, &cdm)?;
    let filler = build_three_p_product(&ps[1..])?;
    fill_bncrdp_with_bncdp(&expanded, &filler)
}

/// The `(n, 2, 4; (n+1)/4)` set for `n = 3 p_1 ⋯ p_u`.
pub fn construct_3p_product(primes: &[u64]) -> Result<FhsSet> {
    let design = three_p_product_bncdp(primes)?;
    let n = design.modulus() as u64;
    let mut provenance = Provenance::new("threep-product").with("n", n);
    for (i, p) in primes.iter().enumerate() {
        provenance.parameters.insert(format!("p{}", i + 1), *p);
    }
    to_set(&design, provenance)
}

/// Parameters of the `vw` construction with derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VwParams {
    pub v: u64,
    pub e: u64,
    pub w: u64,
    pub e_prime: u64,
    /// Least prime divisor of `v`.
    pub p1: u64,
    /// Least prime divisor of `w`.
    pub q1: u64,
    /// Number of sequences `(p_1 - 1)/e`.
    pub families: u64,
}

impl VwParams {
    /// Checks `2 <= e' <= e`, `q_1 >= p_1 > 2e`, `v >= e^2` and the
    /// divisibility conditions on `e` and `e'`.
    pub fn new(v: u64, e: u64, w: u64, e_prime: u64) -> Result<Self> {
        let p1 = least_prime_of_odd(v, "v").map_err(|e| unsupported(e.to_string()))?;
        let q1 = least_prime_of_odd(w, "w").map_err(|e| unsupported(e.to_string()))?;
        if e_prime < 2 || e_prime > e {
            return Err(unsupported(format!("need 2 <= e' <= e, got e' = {e_prime}, e = {e}")));
        }
        if let Some(pi) = factorize(v).primes().find(|pi| (pi - 1) % e != 0) {
            return Err(unsupported(format!("e = {e} must divide p_i - 1 = {}", pi - 1)));
        }
        if let Some(qj) = factorize(w).primes().find(|qj| (qj - 1) % e_prime != 0) {
            return Err(unsupported(format!(
                "e' = {e_prime} must divide q_j - 1 = {}",
                qj - 1
            )));
        }
        if p1 <= 2 * e {
            let weaker = if p1 >= 2 * e { " (only p_1 >= 2e holds)" } else { "" };
            return Err(unsupported(format!(
                "need p_1 > 2e, got p_1 = {p1}, e = {e}{weaker}"
            )));
        }
        if q1 < p1 {
            return Err(unsupported(format!("need q_1 >= p_1, got q_1 = {q1}, p_1 = {p1}")));
        }
        if v < e * e {
            return Err(unsupported(format!("need v >= e^2, got v = {v}, e = {e}")));
        }
        Ok(VwParams {
            v,
            e,
            w,
            e_prime,
            p1,
            q1,
            families: (p1 - 1) / e,
        })
    }

    /// `(v-1)w/e + (w-1)/e' + 1`.
    pub fn alphabet(&self) -> u64 {
        (self.v - 1) / self.e * self.w + (self.w - 1) / self.e_prime + 1
    }
}

/// Partition-type BNCDP behind the `(vw, (p_1-1)/e, e; (v-1)w/e + (w-1)/e' + 1)`
/// set: cyclotomic BNCRDP over `Z_v`, expanded by a homogeneous
/// `(w, p_1 - 1, 1)`-CDM, filled with the first `(p_1-1)/e` families of the
/// cyclotomic BNCDP over `Z_w`.
pub fn vw_bncdp(params: &VwParams) -> Result<(Bncdp, Vec<IntermediateDigest>)> {
    let base = cyclotomic_bncrdp(params.v, params.e)?;
    let cdm = cdm_for(params.w, (params.p1 - 1) as usize)?;
    let expanded = expand_bncrdp_by_cdm(&base, &cdm)?;
    let (filler_full, _) = bncdp_from_cyclotomic(params.w, params.e_prime)?;
    let take = params.families as usize;
    if filler_full.families().len() < take {
        return Err(unsupported(format!(
            "filler has only {} families, need {take}",
            filler_full.families().len()
        )));
    }
    let filler = Bncdp::new(filler_full.families()[..take].to_vec(), filler_full.lambda)?;
    let filled = fill_bncrdp_with_bncdp(&expanded, &filler)?;
    let digests = vec![
        digest_of("cyclotomic-bncrdp", Payload::from(&base)),
        digest_of("cdm", Payload::from(&cdm)),
        digest_of("expanded-bncrdp", Payload::from(&expanded)),
        digest_of("filler-bncdp", Payload::from(&filler)),
    ];
    Ok((filled, digests))
}

pub fn construct_vw(v: u64, e: u64, w: u64, e_prime: u64) -> Result<FhsSet> {
    let params = VwParams::new(v, e, w, e_prime)?;
    let (design, digests) = vw_bncdp(&params)?;
    let mut provenance = Provenance::new("vw")
        .with("v", v)
        .with("e", e)
        .with("w", w)
        .with("e_prime", e_prime);
    provenance.intermediates = digests;
    to_set(&design, provenance)
}

/// Parameters describing the imported base design of the `qv` pipeline:
/// `p^m - 1 = ab` and a `(p'(p^m-1), p', {K_j}, p'b)`-BNCRDP of size `a`
/// with `⌊a/p'⌋` families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QvBase {
    pub p: u64,
    pub p_prime: u64,
    pub m: u32,
    pub a: u64,
    pub b: u64,
}

impl QvBase {
    pub fn field_units(&self) -> u64 {
        self.p.pow(self.m) - 1
    }

    pub fn families(&self) -> u64 {
        self.a / self.p_prime
    }
}

#[derive(Debug, Clone)]
pub struct QvOutput {
    pub bncdp: Bncdp,
    pub set: FhsSet,
    /// `p'(b+1) <= a`, the extra condition under which the result is
    /// guaranteed optimal.
    pub optimality_guaranteed: bool,
}

/// Composes an imported base BNCRDP with the `vw` construction:
/// expand the base by a homogeneous `(vw, p^m-1, 1)`-CDM, fold the `vw` set
/// by `p'`, and fill the subgroup with the folded set's packing.
pub fn pipeline_qv(
    base: Option<&Bncrdp>,
    params: QvBase,
    v: u64,
    e: u64,
    w: u64,
    e_prime: u64,
) -> Result<QvOutput> {
    let base = base.ok_or_else(|| Error::Fixture("no base design provided".into()))?;
    let QvBase { p, p_prime, m, a, b } = params;
    if !is_prime(p) || !is_prime(p_prime) {
        return Err(unsupported("p and p' must be prime"));
    }
    let units = params.field_units();
    if a * b != units {
        return Err(unsupported(format!("need p^m - 1 = ab, got {units} != {a}·{b}")));
    }
    if gcd(p_prime, units) != 1 {
        return Err(unsupported(format!("need gcd(p', p^m - 1) = 1, got gcd({p_prime}, {units}) != 1")));
    }
    if e > b {
        return Err(unsupported(format!("need e <= b, got e = {e}, b = {b}")));
    }
    let vw = VwParams::new(v, e, w, e_prime)?;
    if vw.p1 <= units {
        return Err(unsupported(format!(
            "need p^m - 1 < p_1, got {units} >= {}",
            vw.p1
        )));
    }

    let modulus = (p_prime * units) as usize;
    let big_m = params.families() as usize;
    let fixture = |msg: String| Error::Fixture(msg);
    if base.modulus() != modulus || base.subgroup_step() != units as usize {
        return Err(fixture(format!(
            "base must be over Z_{modulus} with subgroup step {units}, got Z_{} step {}",
            base.modulus(),
            base.subgroup_step()
        )));
    }
    if base.families().len() != big_m || base.size() != a as usize {
        return Err(fixture(format!(
            "base must have {big_m} families of {a} blocks, got {} of {}",
            base.families().len(),
            base.size()
        )));
    }
    if base.lambda != (p_prime * b) as usize || !base.is_partition_type() {
        return Err(fixture(format!(
            "base must be partition-type with index p'b = {}",
            p_prime * b
        )));
    }
    if let Some(f) = verify_bncrdp(base)?.failure {
        return Err(fixture(format!("base fails verification: {f:?}")));
    }

    let cdm = cdm_for(v * w, units as usize)?;
    let expanded = expand_bncrdp_by_cdm(base, &cdm)?;
    let vw_set = construct_vw(v, e, w, e_prime)?;
    let folded = concatenate_fold(&vw_set, p_prime as usize)?;
    if folded.size() < big_m {
        return Err(unsupported(format!(
            "folded vw set has {} sequences, need {big_m}",
            folded.size()
        )));
    }
    let folded_design = fhs_set_to_bncdp(&folded)?;
    let filler = Bncdp::new(folded_design.families()[..big_m].to_vec(), folded_design.lambda)?;
    let filled = fill_bncrdp_with_bncdp(&expanded, &filler)?;

    let mut provenance = Provenance::new("qv")
        .with("p", p)
        .with("p_prime", p_prime)
        .with("m", m as u64)
        .with("a", a)
        .with("b", b)
        .with("v", v)
        .with("e", e)
        .with("w", w)
        .with("e_prime", e_prime);
    provenance.intermediates = vec![
        digest_of("base-bncrdp", Payload::from(base)),
        digest_of("expanded-bncrdp", Payload::from(&expanded)),
        digest_of("filler-bncdp", Payload::from(&filler)),
    ];
    let set = to_set(&filled, provenance)?;
    Ok(QvOutput {
        bncdp: filled,
        set,
        optimality_guaranteed: p_prime * (b + 1) <= a,
    })
}

/// A construction family with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ConstructionParams {
    A { p: u32, m: u32, u: u32 },
    Tv { t: u64, v: u64 },
    Threep { p: u64 },
    Cyclotomic { v: u64, e: u64 },
    ThreepProduct { primes: Vec<u64> },
    /// Expands an FHS set base by `w`.
    Nv { w: u64 },
    Vw { v: u64, e: u64, w: u64, e_prime: u64 },
    /// Folds an FHS set base by `t`.
    Kn { t: usize },
    /// Composes an imported BNCRDP base with the `vw` construction.
    Qv { base: QvBase, v: u64, e: u64, w: u64, e_prime: u64 },
}

/// Base design handed to the families that need one.
#[derive(Debug, Clone, Copy)]
pub enum Base<'a> {
    Set(&'a FhsSet),
    Relative(&'a Bncrdp),
}

impl ConstructionParams {
    pub fn family(&self) -> &'static str {
        match self {
            ConstructionParams::A { .. } => "a",
            ConstructionParams::Tv { .. } => "tv",
            ConstructionParams::Threep { .. } => "threep",
            ConstructionParams::Cyclotomic { .. } => "cyclotomic",
            ConstructionParams::ThreepProduct { .. } => "threep-product",
            ConstructionParams::Nv { .. } => "nv",
            ConstructionParams::Vw { .. } => "vw",
            ConstructionParams::Kn { .. } => "kn",
            ConstructionParams::Qv { .. } => "qv",
        }
    }

    pub fn needs_base(&self) -> bool {
        matches!(
            self,
            ConstructionParams::Nv { .. } | ConstructionParams::Kn { .. } | ConstructionParams::Qv { .. }
        )
    }

    pub fn build(&self, base: Option<Base<'_>>) -> Result<FhsSet> {
        let set_base = || match base {
            Some(Base::Set(s)) => Ok(s),
            _ => Err(Error::Fixture(format!("{} needs an FHS set base", self.family()))),
        };
        match self {
            ConstructionParams::A { p, m, u } => construction_a(*p, *m, *u),
            ConstructionParams::Tv { t, v } => construct_tv(*t, *v),
            ConstructionParams::Threep { p } => Ok(construct_3p(*p)?.set),
            ConstructionParams::Cyclotomic { v, e } => Ok(bncdp_from_cyclotomic(*v, *e)?.1),
            ConstructionParams::ThreepProduct { primes } => construct_3p_product(primes),
            ConstructionParams::Nv { w } => expand_fhs_set_by_cdm(set_base()?, *w),
            ConstructionParams::Vw { v, e, w, e_prime } => construct_vw(*v, *e, *w, *e_prime),
            ConstructionParams::Kn { t } => concatenate_fold(set_base()?, *t),
            ConstructionParams::Qv { base: params, v, e, w, e_prime } => {
                let relative = match base {
                    Some(Base::Relative(r)) => Some(r),
                    _ => None,
                };
                Ok(pipeline_qv(relative, *params, *v, *e, *w, *e_prime)?.set)
            }
        }
    }
}

/// One row of the family catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub family: &'static str,
    pub parameters: &'static str,
    /// `(n, M, λ; l)` in terms of the parameters.
    pub output: &'static str,
    pub constraints: &'static str,
    pub base: Option<&'static str>,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            family: "a",
            parameters: "p m u",
            output: "(p(p^m-1), p^(u-1), p^(m-u+1); p^u)",
            constraints: "p prime, m >= u > 1, p^m <= 2^20",
            base: None,
        },
        CatalogEntry {
            family: "tv",
            parameters: "t v",
            output: "(tv, floor((p1-1)/t), t; v)",
            constraints: "v odd, p1 > t > 1 (p1 least prime factor of v)",
            base: None,
        },
        CatalogEntry {
            family: "threep",
            parameters: "p",
            output: "(3p, 2, 4; (3p+1)/4)",
            constraints: "p prime, p ≡ 1 (mod 4), p >= 13",
            base: None,
        },
        CatalogEntry {
            family: "cyclotomic",
            parameters: "v e",
            output: "(v, f, e; (v-1)/e + 1), f = min (p_i-1)/e",
            constraints: "v odd, e > 1, e | p_i - 1 for every prime p_i | v",
            base: None,
        },
        CatalogEntry {
            family: "threep-product",
            parameters: "p_1 .. p_u",
            output: "(n, 2, 4; (n+1)/4), n = 3 p_1 ... p_u",
            constraints: "each p_j prime ≡ 1 (mod 4), 25 ∤ n, least p_j >= 13 when u > 1",
            base: None,
        },
        CatalogEntry {
            family: "nv",
            parameters: "w",
            output: "(nw, M, λ; lw)",
            constraints: "w odd, q1 > largest total occurrence count of a frequency",
            base: Some("fhs-set"),
        },
        CatalogEntry {
            family: "vw",
            parameters: "v e w e'",
            output: "(vw, (p1-1)/e, e; (v-1)w/e + (w-1)/e' + 1)",
            constraints: "v, w odd; e | p_i - 1; e' | q_j - 1; 2 <= e' <= e; q1 >= p1 > 2e; v >= e^2",
            base: None,
        },
        CatalogEntry {
            family: "kn",
            parameters: "t",
            output: "(tn, floor(M/t), tλ; l)",
            constraints: "1 <= t <= M",
            base: Some("fhs-set"),
        },
        CatalogEntry {
            family: "qv",
            parameters: "p p' m a b v e w e'",
            output: "(p'vw(p^m-1), floor(a/p'), p'b; avw + (v-1)w/e + (w-1)/e' + 1)",
            constraints: "p^m - 1 = ab; gcd(p', p^m-1) = 1; b >= e >= e' >= 2; q1 >= p1 > p^m - 1; \
                          optimal when a >= p'(b+1)",
            base: Some("bncrdp"),
        },
    ]
}
