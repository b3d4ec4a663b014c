use fhs_core::bounds::{classify, lempel_greenberger};
use fhs_core::constructions::*;
use fhs_core::correlation::{hamming_correlation, set_correlation, set_correlation_with, ProfileOptions};
use fhs_core::designs::*;
use fhs_core::Error;

fn measured(set: &fhs_core::correlation::FhsSet) -> usize {
    set_correlation(set).unwrap().max
}

fn shape(set: &fhs_core::correlation::FhsSet) -> (usize, usize, usize) {
    (set.length(), set.size(), set.alphabet())
}

#[test]
fn construction_a_examples() {
    for (p, m, u, want) in [(2, 2, 2, (6, 2, 4)), (2, 3, 2, (14, 2, 4)), (3, 2, 2, (24, 3, 9))] {
        let s = construction_a(p, m, u).unwrap();
        assert_eq!(shape(&s), want);
        let prof = set_correlation(&s).unwrap();
        assert_eq!(prof.max, (p as usize).pow(m - u + 1));
        assert!(classify(&s, &prof).unwrap().is_optimal());
    }
    let s = construction_a(2, 3, 2).unwrap();
    assert_eq!(fhs_core::correlation::max_auto(&s.sequences()[0]).unwrap(), 4);
}

#[test]
fn construction_a_cross_correlation_vanishes_on_field_period() {
    let (p, m) = (3u32, 2u32);
    let s = construction_a(p, m, 2).unwrap();
    let period = (p.pow(m) - 1) as usize;
    let seqs = s.sequences();
    for i in 0..seqs.len() {
        for j in 0..seqs.len() {
            if i == j {
                continue;
            }
            for tau in (0..s.length()).step_by(period) {
                assert_eq!(hamming_correlation(&seqs[i], &seqs[j], tau).unwrap(), 0);
            }
        }
    }
}

#[test]
fn construction_a_labels_cover_the_small_field() {
    let s = construction_a(2, 3, 2).unwrap();
    let labels = s.provenance.labels.clone().unwrap();
    assert_eq!(labels, vec!["[0, 0]", "[0, 1]", "[1, 0]", "[1, 1]"]);
}

#[test]
fn tv_examples() {
    for (t, v, want) in [(2, 5, (10, 2, 5)), (3, 7, (21, 2, 7)), (2, 15, (30, 1, 15))] {
        let s = construct_tv(t, v).unwrap();
        assert_eq!(shape(&s), want);
        let prof = set_correlation(&s).unwrap();
        assert_eq!(prof.max, t as usize);
        assert!(classify(&s, &prof).unwrap().is_optimal());
    }
    // single sequence case: LG certifies
    assert_eq!(lempel_greenberger(30, 15).unwrap(), 2);
}

#[test]
fn tv_internal_differences_avoid_the_subgroup() {
    let (t, v) = (3u64, 7u64);
    let d = tv_bncdp(t, v).unwrap();
    let n = (t * v) as usize;
    for f in d.families() {
        let diffs = f.difference_list();
        for r in 0..n {
            let expected = if r % t as usize == 0 { 0 } else { t as usize };
            assert_eq!(diffs.count(r), expected, "residue {r}");
        }
    }
}

#[test]
fn three_p_examples() {
    for (p, l) in [(13u64, 10usize), (17, 13), (29, 22)] {
        let out = construct_3p(p).unwrap();
        assert_eq!(shape(&out.set), (3 * p as usize, 2, l));
        assert_eq!(measured(&out.set), 4);
        assert!(out.bncrdp_check.passed(), "{:?}", out.bncrdp_check);
        assert_eq!(out.bncrdp.size(), l - 1);
    }
}

#[test]
fn three_p_fails_for_five() {
    let (full, relative) = three_p_packings(5).unwrap();
    let v = verify_bncdp(&full).unwrap();
    assert_eq!(v.measured_index(), 7);
    let set = bncdp_to_fhs_set(&full).unwrap();
    assert_eq!(measured(&set), 7);
    assert!(!verify_bncrdp(&relative).unwrap().passed());
    assert!(matches!(construct_3p(5), Err(Error::Unsupported(_))));
}

#[test]
fn three_p_relative_with_axis_hits_subgroup() {
    let out = construct_3p(13).unwrap();
    let mut families: Vec<BlockFamily> = out.bncdp.families().to_vec();
    for f in &mut families {
        *f = BlockFamily::new(39, f.blocks().to_vec(), FamilyKind::Plain).unwrap();
    }
    let d = Bncrdp::new(families, 13, 4).unwrap();
    assert!(matches!(
        verify_bncrdp(&d).unwrap().failure,
        Some(Failure::ForbiddenDifference { .. })
    ));
}

#[test]
fn cyclotomic_examples() {
    let (d, s) = bncdp_from_cyclotomic(5, 2).unwrap();
    assert_eq!(shape(&s), (5, 2, 3));
    assert_eq!(measured(&s), 2);
    assert_eq!(d.size(), 3);

    let r = cyclotomic_bncrdp(7, 3).unwrap();
    assert_eq!((r.families().len(), r.size()), (2, 2));

    let r = cyclotomic_bncrdp(15, 2).unwrap();
    assert_eq!((r.families().len(), r.size()), (1, 7));

    let (_, s) = bncdp_from_cyclotomic(13, 4).unwrap();
    assert_eq!(shape(&s), (13, 3, 4));
    let prof = set_correlation(&s).unwrap();
    assert_eq!(prof.max, 4);
    // f = 3 < e = 4: meets the index but not the bound
    assert!(!classify(&s, &prof).unwrap().is_optimal());

    let (_, single) = bncdp_from_cyclotomic(15, 2).unwrap();
    let prof = set_correlation(&single).unwrap();
    let verdict = classify(&single, &prof).unwrap();
    assert!(!verdict.peng_fan_applicable);

    assert!(matches!(cyclotomic_bncrdp(21, 4), Err(Error::InvalidInput(_))));
}

#[test]
fn cyclotomic_external_differences_are_uniform() {
    let (v, e) = (13usize, 2usize);
    let r = cyclotomic_bncrdp(v as u64, e as u64).unwrap();
    let fams = r.families();
    for a in fams {
        for b in fams {
            if std::ptr::eq(a, b) {
                continue;
            }
            let d = a.external_difference_list(b).unwrap();
            assert_eq!(d.count(0), 0);
            assert!((1..v).all(|x| d.count(x) == e));
        }
    }
}

#[test]
fn cdm_examples() {
    for (w, t) in [(5u64, 4usize), (13, 8), (35, 4), (1, 2), (9, 2), (45, 2)] {
        let d = cdm_for(w, t).unwrap();
        assert_eq!((d.modulus() as u64, d.row_count()), (w, t));
        assert!(verify_cdm(&d).passed, "w={w} t={t}");
    }
    assert!(matches!(cdm_for(35, 5), Err(Error::Unsupported(_))));
}

#[test]
fn expansion_examples() {
    let base = cyclotomic_bncrdp(5, 2).unwrap();
    let out = expand_bncrdp_by_cdm(&base, &cdm_for(7, 4).unwrap()).unwrap();
    assert_eq!((out.modulus(), out.subgroup_order(), out.size()), (35, 7, 14));
    assert_eq!(out.lambda, 2);
    for (a, b) in base.families().iter().zip(out.families()) {
        assert_eq!(a.block_sizes(), b.block_sizes());
    }

    let same = expand_bncrdp_by_cdm(&base, &cdm_for(1, 4).unwrap()).unwrap();
    assert_eq!(same.families(), base.families());

    let too_short = cdm_for(7, 3).unwrap();
    assert!(matches!(
        expand_bncrdp_by_cdm(&base, &too_short),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn fill_examples() {
    let base = cyclotomic_bncrdp(5, 2).unwrap();
    let expanded = expand_bncrdp_by_cdm(&base, &cdm_for(7, 4).unwrap()).unwrap();
    let (filler, _) = bncdp_from_cyclotomic(7, 2).unwrap();
    let filler = Bncdp::new(filler.families()[..2].to_vec(), filler.lambda).unwrap();
    let filled = fill_bncrdp_with_bncdp(&expanded, &filler).unwrap();
    assert_eq!((filled.modulus(), filled.size()), (35, 14 + 4));
    assert!(verify_bncdp(&filled).unwrap().passed());
    assert!(filled.is_partition_type());

    let one = Bncdp::new(filler.families()[..1].to_vec(), 2).unwrap();
    assert!(matches!(
        fill_bncrdp_with_bncdp(&expanded, &one),
        Err(Error::InvalidInput(_))
    ));

    // singletons: the two identical families collide at 0 in every block pair
    let singles = BlockFamily::new(7, (0..7).map(|x| vec![x]).collect(), FamilyKind::PartitionType).unwrap();
    let trivial = Bncdp::new(vec![singles.clone(), singles], 7).unwrap();
    assert!(verify_bncdp(&trivial).unwrap().passed());
    let filled = fill_bncrdp_with_bncdp(&expanded, &trivial).unwrap();
    assert_eq!(filled.lambda, 7);
}

#[test]
fn three_p_product_for_larger_primes() {
    let s = construct_3p_product(&[13, 13]).unwrap();
    assert_eq!(shape(&s), (507, 2, 127));
    let prof = set_correlation(&s).unwrap();
    assert_eq!(prof.max, 4);
    assert!(classify(&s, &prof).unwrap().is_optimal());
}

#[test]
fn three_p_product_rejections() {
    assert!(matches!(construct_3p_product(&[5, 13]), Err(Error::Unsupported(_))));
    assert!(matches!(construct_3p_product(&[5, 5]), Err(Error::Unsupported(_))));
    assert!(matches!(construct_3p_product(&[7]), Err(Error::InvalidInput(_))));
    assert!(construct_3p_product(&[]).is_err());
}

#[test]
fn nv_examples() {
    let base = construct_tv(2, 5).unwrap();
    let s = expand_fhs_set_by_cdm(&base, 7).unwrap();
    assert_eq!(shape(&s), (70, 2, 35));
    assert_eq!(measured(&s), 2);

    let base = construct_3p(13).unwrap().set;
    assert_eq!(base.max_total_occurrences(), 8);
    let s = expand_fhs_set_by_cdm(&base, 11).unwrap();
    assert_eq!(shape(&s), (429, 2, 110));
    assert_eq!(measured(&s), 4);

    let same = expand_fhs_set_by_cdm(&base, 1).unwrap();
    assert_eq!(same.sequences(), base.sequences());

    assert!(matches!(expand_fhs_set_by_cdm(&base, 7), Err(Error::Unsupported(_))));
}

#[test]
fn kn_examples() {
    let base = construct_3p(13).unwrap().set;
    let s = concatenate_fold(&base, 2).unwrap();
    assert_eq!(shape(&s), (78, 1, 10));
    assert_eq!(s.claimed_lambda, Some(8));
    assert!(measured(&s) <= 8);
    assert!(concatenate_fold(&base, 3).is_err());

    let x = base.sequences();
    let z = s.sequences()[0].symbols();
    assert_eq!(&z[..4], &[x[0].symbols()[0], x[1].symbols()[0], x[0].symbols()[1], x[1].symbols()[1]]);
}

#[test]
fn end_to_end_concatenation_breaks_the_fold_bound() {
    let base = construct_3p(13).unwrap().set;
    let x = base.sequences();
    let joined: Vec<u32> = x[0].symbols().iter().chain(x[1].symbols()).copied().collect();
    let single = fhs_core::correlation::FhsSet::from_rows(vec![joined], base.alphabet()).unwrap();
    assert!(measured(&single) > 8);
}

#[test]
fn vw_examples() {
    let s = construct_vw(25, 2, 5, 2).unwrap();
    assert_eq!(shape(&s), (125, 2, 63));
    let prof = set_correlation(&s).unwrap();
    assert_eq!(prof.max, 2);
    assert!(classify(&s, &prof).unwrap().is_optimal());
    assert_eq!(s.provenance.intermediates.len(), 4);

    let s = construct_vw(25, 2, 7, 2).unwrap();
    assert_eq!(shape(&s), (175, 2, 88));
    assert_eq!(measured(&s), 2);

    let s = construct_vw(49, 3, 7, 3).unwrap();
    assert_eq!(shape(&s), (343, 2, 115));
    assert_eq!(measured(&s), 3);
}

#[test]
fn vw_constraint_errors_are_unsupported() {
    for (v, e, w, ep) in [(25, 2, 3, 2), (9, 2, 9, 2), (25, 2, 5, 3), (13, 4, 13, 2)] {
        assert!(
            matches!(construct_vw(v, e, w, ep), Err(Error::Unsupported(_))),
            "{v} {e} {w} {ep}"
        );
    }
}

#[test]
fn full_tables_match_maxima() {
    let s = construct_tv(3, 7).unwrap();
    let prof = set_correlation_with(&s, ProfileOptions { full_tables: true }).unwrap();
    let tables = prof.tables.as_ref().unwrap();
    for (pair, table) in prof.pairs.iter().zip(tables) {
        let skip = usize::from(pair.first == pair.second);
        assert_eq!(*table[skip..].iter().max().unwrap(), pair.max);
    }
}

#[test]
fn params_dispatch() {
    let p = ConstructionParams::Tv { t: 2, v: 5 };
    assert_eq!(shape(&p.build(None).unwrap()), (10, 2, 5));
    let base = construct_tv(2, 5).unwrap();
    let nv = ConstructionParams::Nv { w: 7 };
    assert!(matches!(nv.build(None), Err(Error::Fixture(_))));
    assert_eq!(shape(&nv.build(Some(Base::Set(&base))).unwrap()), (70, 2, 35));
    let json = serde_json::to_string(&ConstructionParams::Vw { v: 25, e: 2, w: 5, e_prime: 2 }).unwrap();
    assert!(json.contains("\"family\":\"vw\""));
    assert_eq!(catalog().len(), 9);
}
