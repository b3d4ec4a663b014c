//! Acceptance criteria for the workspace.
//!
//! Each criterion is a plain function returning a one-line detail on
//! success or the reason it failed. [`CRITERIA`] lists them with their
//! time limits.


use fhs_core::bounds::{classify, peng_fan, simplified_peng_fan};
use fhs_core::constructions::{
    concatenate_fold, construct_3p, construct_3p_product, construct_tv, construct_vw, construction_a,
    expand_fhs_set_by_cdm, pipeline_qv, QvBase,
};
use fhs_core::correlation::{set_correlation, FhsSet};
use fhs_core::designs::{
    cdm_product, fhs_set_to_bncdp, homogenize_cdm, multiplication_table, normalize_cdm,
    prime_multiplication_table, verify_bncdp, verify_cdm, Bncdp, Cdm,
};
use fhs_core::format::{Design, DesignFile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Exhaustive `H(S)` and verdict for a set.
fn measure(set: &FhsSet) -> Result<(usize, bool), String> {
    let profile = set_correlation(set).map_err(err)?;
    let verdict = classify(set, &profile).map_err(err)?;
    Ok((profile.max, verdict.is_optimal()))
}

fn shape(set: &FhsSet, h: usize) -> String {
    format!("({},{},{};{})", set.length(), set.size(), h, set.alphabet())
}

fn expect(set: &FhsSet, n: usize, m: usize, h: usize, l: usize, optimal: bool) -> Check {
    let (measured, is_optimal) = measure(set)?;
    let got = shape(set, measured);
    ensure(
        (set.length(), set.size(), measured, set.alphabet()) == (n, m, h, l),
        || format!("expected ({n},{m},{h};{l}), got {got}"),
    )?;
    ensure(!optimal || is_optimal, || format!("{got} not classified optimal"))?;
    Ok(got)
}

pub fn criterion_1() -> Check {
    let mut seen = Vec::new();
    for (p, m, u) in [(2, 2, 2), (2, 3, 2), (3, 2, 2), (2, 4, 2), (3, 3, 2), (5, 2, 2)] {
        let set = construction_a(p, m, u).map_err(err)?;
        let (n, big_m, l) = (p * (p.pow(m) - 1), p.pow(u - 1), p.pow(u));
        let h = p.pow(m - u + 1);
        seen.push(expect(&set, n as usize, big_m as usize, h as usize, l as usize, true)?);
    }
    Ok(seen.join(" "))
}

pub fn criterion_2() -> Check {
    let mut seen = Vec::new();
    for (t, v) in [(2u64, 5u64), (3, 7), (2, 15), (4, 13), (2, 35)] {
        let set = construct_tv(t, v).map_err(err)?;
        let (h, optimal) = measure(&set)?;
        ensure(h == t as usize, || format!("tv({t},{v}): H(S) = {h}, expected {t}"))?;
        ensure((set.length() as u64).is_multiple_of(set.alphabet() as u64), || "n mod l != 0".into())?;
        ensure(optimal, || format!("tv({t},{v}) not optimal"))?;
        seen.push(shape(&set, h));
    }
    Ok(seen.join(" "))
}

pub fn criterion_3() -> Check {
    let mut seen = Vec::new();
    let mut failures = Vec::new();
    for p in [5u64, 13, 17, 29] {
        let l = ((3 * p + 1) / 4) as usize;
        match construct_3p(p) {
            Ok(out) => match expect(&out.set, 3 * p as usize, 2, 4, l, true) {
                Ok(s) => seen.push(s),
                Err(e) => failures.push(format!("p={p}: {e}")),
            },
            Err(e) => failures.push(format!("p={p}: {e}")),
        }
    }
    if failures.is_empty() {
        Ok(seen.join(" "))
    } else {
        Err(format!("{}; passing: {}", failures.join("; "), seen.join(" ")))
    }
}

pub fn criterion_4() -> Check {
    let set = construct_3p_product(&[5, 13]).map_err(|e| format!("n=195: {e}"))?;
    expect(&set, 195, 2, 4, 49, true)
}

pub fn criterion_5() -> Check {
    let set = construct_vw(25, 2, 5, 2).map_err(err)?;
    expect(&set, 125, 2, 2, 63, true)
}

fn three_p_five() -> Result<FhsSet, String> {
    construct_3p(5).map(|o| o.set).map_err(|e| format!("base p=5: {e}"))
}

pub fn criterion_6() -> Check {
    let base = three_p_five()?;
    let set = expand_fhs_set_by_cdm(&base, 11).map_err(err)?;
    expect(&set, 165, 2, 4, 44, false)
}

pub fn criterion_7() -> Check {
    let base = three_p_five()?;
    let set = concatenate_fold(&base, 2).map_err(err)?;
    let (h, _) = measure(&set)?;
    ensure(set.size() == 1 && set.length() == 30 && h <= 8, || {
        format!("fold gives {}", shape(&set, h))
    })?;
    Ok(shape(&set, h))
}

pub fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..50 {
        let n = rng.gen_range(2..=30);
        let m = rng.gen_range(1..=3);
        let l = rng.gen_range(1..=10);
        let rows: Vec<Vec<u32>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0..l as u32)).collect())
            .collect();
        let set = FhsSet::from_rows(rows, l).map_err(err)?;
        let measured = set_correlation(&set).map_err(err)?.max;
        let base = fhs_set_to_bncdp(&set).map_err(err)?;
        for lambda in [measured.checked_sub(1), Some(measured), Some(measured + 1)]
            .into_iter()
            .flatten()
        {
            let d = Bncdp::new(base.families().to_vec(), lambda).map_err(err)?;
            let passes = verify_bncdp(&d).map_err(err)?.passed();
            ensure(passes == (measured <= lambda), || {
                format!("case {case}: measured {measured}, lambda {lambda}, verifier {passes}")
            })?;
        }
    }
    Ok("50 random sets, lambda in {H-1, H, H+1}".into())
}

fn cdm_checks(label: &str, d: &Cdm) -> Result<(), String> {
    ensure(verify_cdm(d).passed, || format!("{label} fails"))?;
    let n = normalize_cdm(d).map_err(err)?;
    ensure(verify_cdm(&n).passed, || format!("{label} normalized fails"))?;
    let h = homogenize_cdm(&n).map_err(err)?;
    ensure(verify_cdm(&h).passed, || format!("{label} homogenized fails"))?;
    let mut rows = d.rows().to_vec();
    let w = d.modulus();
    rows[d.row_count() - 1][w - 1] = (rows[d.row_count() - 1][w - 1] + 1) % w;
    let bad = Cdm::new(w, rows).map_err(err)?;
    ensure(!verify_cdm(&bad).passed, || format!("{label} mutated still passes"))
}

pub fn criterion_9() -> Check {
    for p in [3usize, 5, 7, 11, 13] {
        cdm_checks(&format!("Z_{p} table"), &prime_multiplication_table(p).map_err(err)?)?;
    }
    for (a, b) in [(3usize, 5usize), (5, 7)] {
        let d = cdm_product(
            &multiplication_table(a, a).map_err(err)?,
            &multiplication_table(b, a).map_err(err)?,
        )
        .map_err(err)?;
        cdm_checks(&format!("Z_{}", a * b), &d)?;
    }
    Ok("p in {3,5,7,11,13}, w in {15,35}".into())
}

pub fn criterion_10() -> Check {
    let mut points = 0;
    for n in 1..=200u64 {
        for l in 1..=n {
            for m in 2..=8u64 {
                let second = peng_fan(n, m, l).map_err(err)?.second;
                let simplified = simplified_peng_fan(n, m, l).map_err(err)?.bound as i64;
                ensure(second == simplified, || {
                    format!("({n},{m},{l}): pf-second {second} vs simplified {simplified}")
                })?;
                points += 1;
            }
        }
    }
    Ok(format!("{points} grid points"))
}

pub fn criterion_11() -> Check {
    let text = include_str!("../../core/tests/fixtures/qv_base_30.json");
    let base = match DesignFile::from_json(text).map_err(err)?.design().map_err(err)? {
        Design::Bncrdp(d) => d,
        _ => return Err("fixture is not a bncrdp".into()),
    };
    let params = QvBase {
        p: 2,
        p_prime: 2,
        m: 4,
        a: 5,
        b: 3,
    };
    let out = pipeline_qv(Some(&base), params, 17, 2, 17, 2).map_err(err)?;
    let v = verify_bncdp(&out.bncdp).map_err(err)?;
    ensure(v.passed(), || format!("qv output fails verify_bncdp: {:?}", v.failure))?;
    let table = fhs_cli::bounds(72, 2, 9, Some(9), false).map_err(err)?.stdout;
    ensure(table.contains("measured 9: not optimal"), || {
        format!("cli bounds output: {table}")
    })?;
    Ok(format!(
        "qv {} verified; (72,2,9;9) not optimal",
        shape(&out.set, v.measured_index())
    ))
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    /// Wall-clock limit in seconds.
    pub limit_secs: u64,
    pub check: fn() -> Check,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, name: "construction A", limit_secs: 5, check: criterion_1 },
    Criterion { id: 2, name: "tv sets", limit_secs: 2, check: criterion_2 },
    Criterion { id: 3, name: "3p sets", limit_secs: 5, check: criterion_3 },
    Criterion { id: 4, name: "3p_1p_2 at n = 195", limit_secs: 60, check: criterion_4 },
    Criterion { id: 5, name: "v_1v_2 (25,2,5,2)", limit_secs: 30, check: criterion_5 },
    Criterion { id: 6, name: "nv expansion of 3p(5) by 11", limit_secs: 30, check: criterion_6 },
    Criterion { id: 7, name: "kn fold of 3p(5)", limit_secs: 1, check: criterion_7 },
    Criterion { id: 8, name: "correlation/packing equivalence", limit_secs: 10, check: criterion_8 },
    Criterion { id: 9, name: "CDM suite", limit_secs: 1, check: criterion_9 },
    Criterion { id: 10, name: "simplified bound grid", limit_secs: 10, check: criterion_10 },
    Criterion { id: 11, name: "qv fixture pipeline and (72,2,9;9)", limit_secs: 30, check: criterion_11 },
];
