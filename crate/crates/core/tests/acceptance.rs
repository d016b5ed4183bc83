//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bylinerank::aggregate::{compute_uda_table, national_averages, staff_shares, AverageSubset};
use bylinerank::cli;
use bylinerank::compare::{assign_quartiles, quartile_of, quartile_shifts, spearman_rho, Ranking};
use bylinerank::config::RunConfig;
use bylinerank::corpus::{
    AuthorSlot, Corpus, ExclusionReason, ExclusionRules, PublicationRecord, StaffMember, Taxonomy,
};
use bylinerank::credit::{position_weights, CollaborationClass, CreditScheme, PositionRule};
use bylinerank::ids::{SdsCode, UniversityId};
use bylinerank::indicators::{
    compute_sds_table, percentile_scale, CitationBaseline, Indicator, IndicatorConfig,
    IndicatorRow, IndicatorTable,
};
use bylinerank::pipeline::{analyze, compare_pair, Level, DEFAULT_PAIRS};
use bylinerank::synth::{
    default_fields, export_corpus, generate_corpus, BylineLength, SynthParams,
};

type Outcome = Result<String, String>;
type UnitCounts = HashMap<(UniversityId, SdsCode), usize>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
/// (id = WFI rank, WFI, FI, I, WFI vs I, WFI vs FI, FI vs I)
type QuartileFixture = (usize, u8, u8, u8, u8, u8, u8);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// 1 -------------------------------------------------------------------------

fn weight_fixtures() -> Outcome {
    let scheme = CreditScheme::<f64>::default();
    let w5 =
        position_weights(5, CollaborationClass::Intramural, &scheme).map_err(|e| e.to_string())?;
    let want5 = [0.40, 1.0 / 15.0, 1.0 / 15.0, 1.0 / 15.0, 0.40];
    let w6 =
        position_weights(6, CollaborationClass::Extramural, &scheme).map_err(|e| e.to_string())?;
    let want6 = [0.30, 0.15, 0.05, 0.05, 0.15, 0.30];
    for (got, want) in [(w5.as_slice(), &want5[..]), (w6.as_slice(), &want6[..])] {
        ensure(got.len() == want.len(), || {
            format!("length {} != {}", got.len(), want.len())
        })?;
        for (g, w) in got.iter().zip(want) {
            ensure(close(*g, *w, 1e-12), || format!("{got:?} != {want:?}"))?;
        }
    }
    let exact = position_weights(
        5,
        CollaborationClass::Intramural,
        &CreditScheme::<Rational64>::default(),
    )
    .map_err(|e| e.to_string())?;
    let r = |n, d| Rational64::new(n, d);
    ensure(
        exact.as_slice() == [r(2, 5), r(1, 15), r(1, 15), r(1, 15), r(2, 5)],
        || format!("exact weights {:?}", exact.as_slice()),
    )?;
    Ok(format!(
        "n=5 intramural {w5:?}, n=6 extramural {w6:?}",
        w5 = w5.as_slice(),
        w6 = w6.as_slice()
    ))
}

// 2 -------------------------------------------------------------------------

fn weight_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut schemes = vec![CreditScheme::<f64>::default()];
    while schemes.len() < 51 {
        let intra = rng.random_range(0.0..=0.5);
        let ends = rng.random_range(0.0..=0.5);
        let adj = rng.random_range(0.0..=(0.5 - ends));
        let s = CreditScheme::Positional(PositionRule {
            intramural_end: intra,
            extramural_end: ends,
            extramural_adjacent: adj,
        });
        if s.validate().is_ok() {
            schemes.push(s);
        }
    }
    let start = Instant::now();
    let mut vectors = 0;
    for s in &schemes {
        for n in 1..=100 {
            for class in [
                CollaborationClass::Intramural,
                CollaborationClass::Extramural,
            ] {
                let w = position_weights(n, class, s).map_err(|e| e.to_string())?;
                let w = w.as_slice();
                let sum: f64 = w.iter().sum();
                ensure(close(sum, 1.0, 1e-12), || {
                    format!("n={n} {class:?} {s:?}: sum {sum}")
                })?;
                for i in 0..n {
                    ensure(close(w[i], w[n - 1 - i], 1e-12), || {
                        format!("n={n} {class:?} {s:?}: not palindromic")
                    })?;
                    ensure(w[i] >= 0.0, || format!("n={n} {class:?}: negative weight"))?;
                }
                vectors += 1;
            }
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!(
        "{vectors} vectors ({} schemes) in {took:?}",
        schemes.len()
    ))
}

// 3 -------------------------------------------------------------------------

fn small_corpus_params(seed: u64, target: f64) -> SynthParams {
    SynthParams {
        seed,
        n_universities: 24,
        fields: default_fields().into_iter().step_by(5).collect(),
        ..SynthParams::default()
    }
    .with_target_publications(target)
}

fn twenty_corpora() -> Vec<Corpus> {
    (0..20)
        .map(|i| generate_corpus(&small_corpus_params(300 + i, 5000.0)).expect("valid params"))
        .collect()
}

/// Distinct publications per unit and roster headcount, straight from the
/// raw records.
fn unit_counts(c: &Corpus) -> (UnitCounts, UnitCounts) {
    let unit_of: HashMap<_, _> = c
        .roster()
        .iter()
        .map(|m| {
            (
                m.researcher_id.clone(),
                (m.university_id.clone(), m.sds_code.clone()),
            )
        })
        .collect();
    let mut staff = HashMap::new();
    for m in c.roster() {
        *staff
            .entry((m.university_id.clone(), m.sds_code.clone()))
            .or_insert(0) += 1;
    }
    let mut pubs = HashMap::new();
    for p in c.publications() {
        let units: BTreeSet<_> = p
            .byline
            .iter()
            .filter_map(|s| s.researcher_id.as_ref().and_then(|r| unit_of.get(r)))
            .collect();
        for u in units {
            *pubs.entry(u.clone()).or_insert(0) += 1;
        }
    }
    (pubs, staff)
}

fn counting_equivalence(corpora: &[Corpus]) -> Outcome {
    let cfg = IndicatorConfig::<f64> {
        scheme: CreditScheme::Uniform,
        ..IndicatorConfig::default()
    };
    let mut units = 0;
    let mut total_pubs = 0;
    for (k, c) in corpora.iter().enumerate() {
        total_pubs += c.publications().len();
        let baseline = CitationBaseline::build(c).map_err(|e| e.to_string())?;
        let table = compute_sds_table(c, &cfg, &baseline).map_err(|e| e.to_string())?;
        let (pubs, staff) = unit_counts(c);
        for r in table.rows() {
            let (wfo, fo) = (r.values.get(Indicator::Wfo), r.values.get(Indicator::Fo));
            ensure(close(wfo, fo, 1e-12), || {
                format!(
                    "corpus {k} {}/{}: WFO {wfo} != FO {fo}",
                    r.university, r.sds
                )
            })?;
            let key = (r.university.clone(), r.sds.clone());
            let n = pubs.get(&key).copied().unwrap_or(0);
            let rs = staff[&key];
            let o_rs = r.values.get(Indicator::O) * rs as f64;
            ensure(
                close(o_rs, n as f64, 1e-9) && o_rs.round() as usize == n,
                || format!("corpus {k} {}/{}: O*RS {o_rs} != {n}", r.university, r.sds),
            )?;
            units += 1;
        }
    }
    Ok(format!(
        "{} corpora, {} publications, {units} units checked",
        corpora.len(),
        total_pubs
    ))
}

// 4 -------------------------------------------------------------------------

fn oracle_rho(x: &[f64], y: &[f64]) -> Option<f64> {
    let avg_ranks = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &a)| {
                let better = v.iter().filter(|&&b| b > a).count() as f64;
                let tied = v
                    .iter()
                    .enumerate()
                    .filter(|&(j, &b)| j != i && b == a)
                    .count() as f64;
                1.0 + better + tied / 2.0
            })
            .collect()
    };
    let (rx, ry) = (avg_ranks(x), avg_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}

fn ranking(v: &[f64]) -> Ranking<f64> {
    Ranking::new(
        "S",
        v.iter()
            .enumerate()
            .map(|(i, &x)| (UniversityId::new(format!("U{i:02}")), x))
            .collect(),
    )
}

fn spearman_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut tied, mut untied, mut degenerate) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = rng.random_range(2..=12);
        let with_ties = case % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            if with_ties {
                (0..n).map(|_| rng.random_range(0..4) as f64).collect()
            } else {
                let mut v: Vec<f64> = (0..n)
                    .map(|i| i as f64 + rng.random::<f64>() * 0.5)
                    .collect();
                v.shuffle(rng);
                v
            }
        };
        let (x, y) = (draw(&mut rng), draw(&mut rng));
        let got = spearman_rho(&ranking(&x), &ranking(&y)).ok();
        let want = oracle_rho(&x, &y);
        match (got, want) {
            (Some(g), Some(w)) => {
                worst = worst.max((g - w).abs());
                ensure(close(g, w, 1e-9), || format!("{x:?} vs {y:?}: {g} != {w}"))?;
                if !with_ties {
                    let rank = |v: &[f64], i: usize| v.iter().filter(|&&b| b > v[i]).count() as f64;
                    let d2: f64 = (0..n).map(|i| (rank(&x, i) - rank(&y, i)).powi(2)).sum();
                    let nf = n as f64;
                    let closed = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
                    ensure(close(g, closed, 1e-9), || {
                        format!("closed form {closed} != {g}")
                    })?;
                    untied += 1;
                } else {
                    tied += 1;
                }
            }
            (None, None) => degenerate += 1,
            other => return Err(format!("{x:?} vs {y:?}: definedness differs {other:?}")),
        }
    }
    Ok(format!(
        "{tied} tied + {untied} tie-free vectors agree (max |diff| {worst:.1e}); {degenerate} constant cases rejected by both"
    ))
}

// 5 -------------------------------------------------------------------------

fn quartile_fixtures() -> Outcome {
    let rows: [QuartileFixture; 16] = [
        (1, 1, 1, 1, 0, 0, 0),
        (2, 1, 1, 1, 0, 0, 0),
        (6, 1, 2, 2, 1, 1, 0),
        (7, 1, 2, 2, 1, 1, 0),
        (8, 2, 2, 2, 0, 0, 0),
        (9, 2, 1, 1, 1, 1, 0),
        (13, 2, 2, 1, 1, 0, 1),
        (14, 2, 4, 3, 1, 2, 1),
        (15, 3, 2, 2, 1, 1, 0),
        (16, 3, 3, 3, 0, 0, 0),
        (20, 3, 3, 4, 1, 0, 1),
        (21, 3, 3, 3, 0, 0, 0),
        (22, 4, 2, 3, 1, 2, 1),
        (23, 4, 4, 4, 0, 0, 0),
        (26, 4, 4, 4, 0, 0, 0),
        (27, 4, 4, 4, 0, 0, 0),
    ];
    ensure(quartile_of(7, 27) == 1, || "rank 7 of 27 not Q1".into())?;
    ensure(quartile_of(8, 27) == 2, || "rank 8 of 27 not Q2".into())?;
    for &(id, wfi, ..) in &rows {
        ensure(quartile_of(id, 27) == wfi, || {
            format!("ID{id}: quartile {} != {wfi}", quartile_of(id, 27))
        })?;
    }
    let q = |col: fn(&QuartileFixture) -> u8| {
        bylinerank::compare::QuartileAssignment(
            rows.iter()
                .map(|r| (UniversityId::new(format!("ID{}", r.0)), col(r)))
                .collect(),
        )
    };
    let (wfi, fi, i) = (q(|r| r.1), q(|r| r.2), q(|r| r.3));
    let wi = quartile_shifts(&wfi, &i).map_err(|e| e.to_string())?;
    let wf = quartile_shifts(&wfi, &fi).map_err(|e| e.to_string())?;
    let fii = quartile_shifts(&fi, &i).map_err(|e| e.to_string())?;
    for r in &rows {
        let u = UniversityId::new(format!("ID{}", r.0));
        let got = (wi[&u], wf[&u], fii[&u]);
        ensure(got == (r.4, r.5, r.6), || {
            format!("ID{}: shifts {got:?}", r.0)
        })?;
    }
    let id = |n: usize| UniversityId::new(format!("ID{n}"));
    let rows14 = (wi[&id(14)], wf[&id(14)], fii[&id(14)]);
    let rows22 = (wi[&id(22)], wf[&id(22)], fii[&id(22)]);
    ensure(rows14 == (1, 2, 1) && rows22 == (1, 2, 1), || {
        format!("{rows14:?} {rows22:?}")
    })?;

    // the same quartiles recovered from an actual 27-university ranking
    let ranked = ranking(&(0..27).map(|k| 100.0 - k as f64).collect::<Vec<_>>());
    let qa = assign_quartiles(&ranked);
    let sizes: Vec<usize> = (1..=4).map(|q| qa.members(q).len()).collect();
    ensure(sizes == [7, 7, 7, 6], || {
        format!("quartile sizes {sizes:?}")
    })?;
    Ok(format!(
        "rank 7 -> Q1, rank 8 -> Q2; ID14 {rows14:?}, ID22 {rows22:?}; sizes {sizes:?}"
    ))
}

// 6 -------------------------------------------------------------------------

fn aggregation_invariants(corpora: &[Corpus]) -> Outcome {
    let cfg = IndicatorConfig::<f64>::default();
    let mut pairs_checked = 0;
    let mut fixed_points = 0;
    let mut worst: f64 = 0.0;
    for (k, c) in corpora.iter().enumerate() {
        let baseline = CitationBaseline::build(c).map_err(|e| e.to_string())?;
        let table = compute_sds_table(c, &cfg, &baseline).map_err(|e| e.to_string())?;
        let tax = c.taxonomy();
        let universities: BTreeSet<UniversityId> =
            table.rows().iter().map(|r| r.university.clone()).collect();
        for u in &universities {
            for uda in tax.udas() {
                let shares = staff_shares::<f64>(u, uda, &table, tax);
                if shares.is_empty() {
                    continue;
                }
                let sum: f64 = shares.iter().map(|(_, w)| w).sum();
                ensure(close(sum, 1.0, 1e-12), || {
                    format!("corpus {k} {u}/{uda}: shares sum {sum}")
                })?;
                pairs_checked += 1;
            }
        }

        // a university sitting at the national mean of every field: adding
        // it leaves each mean unchanged
        let avg = national_averages(&table, AverageSubset::NonNil);
        let mut rows: Vec<IndicatorRow<f64>> = table.rows().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(600 + k as u64);
        for sds in table.fields() {
            let mut values = bylinerank::indicators::IndicatorValues([0.0; 6]);
            for ind in Indicator::ALL {
                values.set(ind, avg.get(sds, ind).unwrap_or(0.0));
            }
            rows.push(IndicatorRow {
                university: "MEAN".into(),
                sds: sds.clone(),
                staff: rng.random_range(1..=12),
                publications: 1,
                cited_publications: 1,
                values,
                percentiles: [None; 6],
            });
        }
        let t2 = IndicatorTable::from_rows(rows);
        let avg2 = national_averages(&t2, AverageSubset::NonNil);
        let uda = compute_uda_table(&t2, &avg2, tax).map_err(|e| e.to_string())?;
        for r in uda
            .rows()
            .iter()
            .filter(|r| r.university.as_str() == "MEAN")
        {
            for ind in Indicator::ALL {
                let in_use = tax
                    .sds_in(&r.uda)
                    .all(|s| avg2.get(s, ind).is_some() || t2.get(&r.university, s).is_none());
                if !in_use {
                    continue;
                }
                let v = r.values.get(ind);
                worst = worst.max((v - 1.0).abs());
                ensure(close(v, 1.0, 1e-12), || {
                    format!("corpus {k} {}: {ind} = {v}", r.uda)
                })?;
                fixed_points += 1;
            }
        }
    }
    Ok(format!(
        "{pairs_checked} (university, UDA) share vectors sum to 1; {fixed_points} fixed-point values within {worst:.1e} of 1"
    ))
}

// 7 -------------------------------------------------------------------------

/// Mean untied percentile over every strict ordering consistent with `v`.
fn enumerated_percentiles(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    if n == 1 {
        return vec![100.0];
    }
    let mut sums = vec![0.0; n];
    let mut count = 0usize;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        // p lists indices best-first; keep it if values are non-increasing
        if p.windows(2).all(|w| v[w[0]] >= v[w[1]]) {
            for (r, &i) in p.iter().enumerate() {
                sums[i] += 100.0 * (n - 1 - r) as f64 / (n - 1) as f64;
            }
            count += 1;
        }
    });
    sums.iter().map(|s| s / count as f64).collect()
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

fn percentile_contract() -> Outcome {
    let mut vectors = 0;
    for n in 1..=6usize {
        let levels = if n == 6 { 3 } else { n };
        let total = levels.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    let d = c % levels;
                    c /= levels;
                    d as f64
                })
                .collect();
            let input: Vec<(usize, f64)> = v.iter().copied().enumerate().collect();
            let got: Vec<f64> = percentile_scale(&input)
                .into_iter()
                .map(|(_, p)| p)
                .collect();
            let want = enumerated_percentiles(&v);
            for i in 0..n {
                ensure(close(got[i], want[i], 1e-9), || {
                    format!("{v:?}: {got:?} != {want:?}")
                })?;
            }
            vectors += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.random_range(2..=60);
        let mut v: Vec<f64> = (0..n)
            .map(|i| i as f64 * 1.5 + rng.random::<f64>())
            .collect();
        v.shuffle(&mut rng);
        let input: Vec<(usize, f64)> = v.iter().copied().enumerate().collect();
        let p = percentile_scale(&input);
        let mut by_value: Vec<(f64, f64)> = v.iter().copied().zip(p.iter().map(|x| x.1)).collect();
        by_value.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        ensure(by_value[0].1 == 100.0, || format!("best {}", by_value[0].1))?;
        ensure(by_value[n - 1].1 == 0.0, || {
            format!("worst {}", by_value[n - 1].1)
        })?;
        ensure(by_value.windows(2).all(|w| w[0].1 > w[1].1), || {
            "not strictly monotone".into()
        })?;
    }
    ensure(percentile_scale(&[("a", 3.0)])[0].1 == 100.0, || {
        "single value".into()
    })?;
    Ok(format!("{vectors} vectors (N <= 6) match enumeration; 200 tie-free vectors monotone with 100/0 ends"))
}

// 8 -------------------------------------------------------------------------

fn distortion_params(seed: u64) -> SynthParams {
    SynthParams {
        seed,
        n_universities: 30,
        fields: default_fields().into_iter().step_by(13).collect(),
        byline_length: BylineLength {
            min: 1,
            max: 30,
            mean: 6.0,
        },
        intramural_probability: 0.5,
        ..SynthParams::default()
    }
    .with_target_publications(2500.0)
}

fn distortion_existence() -> Outcome {
    let cfg = RunConfig::default();
    let pair = DEFAULT_PAIRS[0];
    let mut distorted = 0;
    let mut mean_len_min = f64::INFINITY;
    for seed in 0..100 {
        let c = generate_corpus(&distortion_params(800 + seed)).map_err(|e| e.to_string())?;
        let lens: Vec<usize> = c.publications().iter().map(|p| p.byline.len()).collect();
        mean_len_min = mean_len_min.min(lens.iter().sum::<usize>() as f64 / lens.len() as f64);
        let a = analyze::<f64>(&c, &cfg).map_err(|e| e.to_string())?;
        let r = compare_pair(&a, Level::Sds, pair).map_err(|e| e.to_string())?;
        let rho_below_one = r
            .scopes
            .iter()
            .any(|s| s.report.rho.is_some_and(|x| x < 1.0));
        if rho_below_one && r.pooled.pct_shifted > 0.0 {
            distorted += 1;
        }
    }
    ensure(distorted >= 95, || {
        format!("only {distorted}/100 corpora distorted")
    })?;
    ensure(mean_len_min >= 5.0, || {
        format!("mean byline length fell to {mean_len_min}")
    })?;

    let mut scopes = 0;
    for seed in 0..10 {
        let p = SynthParams {
            byline_length: BylineLength {
                min: 1,
                max: 1,
                mean: 1.0,
            },
            external_author_rate: 0.0,
            ..distortion_params(900 + seed)
        };
        let c = generate_corpus(&p).map_err(|e| e.to_string())?;
        let a = analyze::<f64>(&c, &cfg).map_err(|e| e.to_string())?;
        for r in a.sds.rows() {
            let v = r.values;
            ensure(
                v.get(Indicator::Wfo) == v.get(Indicator::Fo)
                    && v.get(Indicator::Fo) == v.get(Indicator::O),
                || format!("single-author output indicators differ: {:?}", v.0),
            )?;
            ensure(
                v.get(Indicator::Wfi) == v.get(Indicator::Fi)
                    && v.get(Indicator::Fi) == v.get(Indicator::I),
                || format!("single-author impact indicators differ: {:?}", v.0),
            )?;
        }
        for pair in DEFAULT_PAIRS {
            let r = compare_pair(&a, Level::Sds, pair).map_err(|e| e.to_string())?;
            for s in &r.scopes {
                let rep = &s.report;
                let identical = rep.rho == Some(1.0) || (rep.rho.is_none() && rep.universities < 2);
                ensure(identical, || {
                    format!("{pair} {}: rho {:?}", rep.scope, rep.rho)
                })?;
                ensure(rep.shifts.total_shift == 0 && rep.churn_pct == 0.0, || {
                    format!("{pair} {}: shifts {:?}", rep.scope, rep.shifts)
                })?;
                scopes += 1;
            }
        }
    }
    Ok(format!(
        "{distorted}/100 corpora show rho(WFI, I) < 1 and WFI-vs-I quartile shifts (min mean byline {mean_len_min:.2}); \
         single-author corpora: {scopes} scope comparisons with rho = 1 and no shifts"
    ))
}

// 9 -------------------------------------------------------------------------

fn run_all(cfg: &Path, out: &Path) -> Result<(), String> {
    let c = cfg.to_str().unwrap();
    let o = out.to_str().unwrap();
    let cmds: [&[&str]; 3] = [
        &["compute", "--config", c, "--level", "uda", "--out", o],
        &["compare", "--config", c, "--level", "sds", "--out", o],
        &["compare", "--config", c, "--level", "uda", "--out", o],
    ];
    for args in cmds {
        let code = cli::run(std::iter::once("bylinerank").chain(args.iter().copied()));
        ensure(code == 0, || format!("{args:?} exited {code}"))?;
    }
    Ok(())
}

fn dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn scale_and_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let params = SynthParams::default();
    let corpus = generate_corpus(&params).map_err(|e| e.to_string())?;
    let n_pubs = corpus.publications().len();
    let n_unis = corpus.universities().len();
    let n_sds = corpus.taxonomy().len();
    ensure(n_unis == 64 && n_sds == 65, || {
        format!("{n_unis} universities, {n_sds} fields")
    })?;
    ensure((63_000..=77_000).contains(&n_pubs), || {
        format!("{n_pubs} publications")
    })?;
    for d in ["c1", "c2"] {
        export_corpus(&corpus, &params, &tmp.path().join(d)).map_err(|e| e.to_string())?;
    }
    ensure(
        dir_files(&tmp.path().join("c1")) == dir_files(&tmp.path().join("c2")),
        || "corpus exports differ".into(),
    )?;
    let regenerated = generate_corpus(&params).map_err(|e| e.to_string())?;
    ensure(regenerated == corpus, || {
        "regenerated corpus differs".into()
    })?;

    let cfg = tmp.path().join("config.json");
    fs::write(
        &cfg,
        r#"{"inputs": {"corpus_dir": "c1", "census_date": "2009-06-30"}}"#,
    )
    .map_err(|e| e.to_string())?;
    let start = Instant::now();
    run_all(&cfg, &tmp.path().join("out1"))?;
    let took = start.elapsed();
    run_all(&cfg, &tmp.path().join("out2"))?;
    let a = dir_files(&tmp.path().join("out1"));
    let b = dir_files(&tmp.path().join("out2"));
    ensure(a.len() >= 2 + 6 * 2 + 3, || {
        format!("only {} output files", a.len())
    })?;
    for (name, bytes) in &a {
        ensure(b.get(name) == Some(bytes), || {
            format!("{name} differs between runs")
        })?;
    }
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!(
        "{n_unis} universities, {n_sds} fields, {n_pubs} publications: compute (both levels) + six pairs (both levels) in {:.1}s; {} files byte-identical across runs",
        took.as_secs_f64(),
        a.len()
    ))
}

// 10 ------------------------------------------------------------------------

fn exclusion_fixtures() -> Outcome {
    let taxonomy = Taxonomy::new(["LOW", "FEW", "EDGE", "OK"].map(|s| (s.into(), "D".into())))
        .map_err(|e| e.to_string())?;
    let mut roster = Vec::new();
    let mut publications = Vec::new();
    let mut add = |sds: &str, university: usize, publishes: bool| {
        let id = format!("{sds}-{}", roster.len());
        let uni = format!("U{university:02}");
        roster.push(StaffMember {
            researcher_id: id.as_str().into(),
            university_id: uni.as_str().into(),
            sds_code: sds.into(),
        });
        if publishes {
            publications.push(PublicationRecord {
                pub_id: format!("P{}", publications.len()).into(),
                year: 2006,
                categories: vec!["C".into()],
                citations: 1,
                byline: vec![AuthorSlot::staff(1, &id, &uni)],
            });
        }
    };
    // 10 staff over 10 universities, 4 publishing
    for u in 0..10 {
        add("LOW", u, u < 4);
    }
    // 7 universities, everyone publishing
    for u in 0..7 {
        add("FEW", u, true);
        add("FEW", u, true);
    }
    // exactly half publishing over exactly 8 universities
    for u in 0..8 {
        add("EDGE", u, u % 2 == 0);
    }
    for u in 0..9 {
        add("OK", u, true);
    }
    let corpus = Corpus::new(taxonomy, roster, publications).map_err(|e| e.to_string())?;
    let (kept, report) = corpus.apply_exclusions(&ExclusionRules::default());

    let retained: Vec<&str> = report.retained.iter().map(|s| s.as_str()).collect();
    ensure(retained == ["EDGE", "OK"], || {
        format!("retained {retained:?}")
    })?;
    let removed: BTreeMap<&str, &Vec<ExclusionReason>> = report
        .removed
        .iter()
        .map(|r| (r.sds_code.as_str(), &r.reasons))
        .collect();
    ensure(
        removed["LOW"].as_slice()
            == [ExclusionReason::LowPublishingFraction {
                fraction: 0.4,
                threshold: 0.5,
            }],
        || format!("LOW reasons {:?}", removed["LOW"]),
    )?;
    ensure(
        removed["FEW"].as_slice()
            == [ExclusionReason::TooFewUniversities {
                universities: 7,
                threshold: 8,
            }],
        || format!("FEW reasons {:?}", removed["FEW"]),
    )?;
    let kept_fields: Vec<&str> = kept.taxonomy().entries().map(|(s, _)| s.as_str()).collect();
    ensure(kept_fields == ["EDGE", "OK"], || {
        format!("taxonomy after exclusion {kept_fields:?}")
    })?;
    ensure(
        kept.roster()
            .iter()
            .all(|m| ["EDGE", "OK"].contains(&m.sds_code.as_str())),
        || "excluded staff remain".into(),
    )?;
    Ok(format!(
        "LOW (40% publishing) and FEW (7 universities) removed; retained {retained:?}"
    ))
}

fn main() {
    let corpora = twenty_corpora();
    let criteria: Vec<Criterion> = vec![
        ("weight-rule fixtures", Box::new(weight_fixtures)),
        ("weight normalization", Box::new(weight_normalization)),
        (
            "counting-mode equivalence",
            Box::new(|| counting_equivalence(&corpora)),
        ),
        ("spearman oracle", Box::new(spearman_oracle)),
        ("quartile table fixtures", Box::new(quartile_fixtures)),
        (
            "aggregation invariants",
            Box::new(|| aggregation_invariants(&corpora)),
        ),
        ("percentile contract", Box::new(percentile_contract)),
        ("distortion existence", Box::new(distortion_existence)),
        ("scale and determinism", Box::new(scale_and_determinism)),
        ("exclusion fixtures", Box::new(exclusion_fixtures)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
