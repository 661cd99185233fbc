//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hurwitz_core::census::{self, enumerate_candidates, nontrivial_partitions, CensusQuery};
use hurwitz_core::classifier::classify;
use hurwitz_core::datum::{genus_from_partitions, parse_datum, BranchDatum, Partition, Surface};
use hurwitz_core::dessin::Dessin;
use hurwitz_core::moves::{
    self, applicable_moves, construct_extreme_product, construct_min_defect_product, extreme_target,
};
use hurwitz_core::oracle::{self, Answer, Realization, SearchBudget};
use hurwitz_core::perm::{orbit_lengths, Permutation};

type Outcome = Result<String, String>;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// `(2T,S,8,4;[2,2,2,2],...,[3,5])` to a canonical datum line.
fn from_list_notation(text: &str) -> String {
    let body = text.trim().trim_start_matches('(').trim_end_matches(')');
    let (head, parts) = body.split_once(';').expect("list entry has ';'");
    let head: Vec<&str> = head.split(',').collect();
    let genus = match head[0] {
        "S" => 0,
        "T" => 1,
        g => g.trim_end_matches('T').parse().expect("genus"),
    };
    assert_eq!(head[1], "S");
    let partitions: Vec<String> = parts
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split("],[")
        .map(str::to_string)
        .collect();
    assert_eq!(partitions.len(), head[3].parse::<usize>().unwrap());
    let line = format!("g{genus}/S d={} {}", head[2], partitions.join(" "));
    parse_datum(&line).expect("golden entry is a candidate datum").to_line()
}

fn golden_lines(name: &str) -> Vec<String> {
    let text = std::fs::read_to_string(golden(name)).expect("golden file");
    let mut lines: Vec<String> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(from_list_notation)
        .collect();
    lines.sort();
    lines
}

fn hurwitz(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hurwitz"))
        .args(args)
        .output()
        .expect("run hurwitz");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn degree_twelve() -> Outcome {
    let expected = golden_lines("exceptional_d12_n3.txt");
    check(expected.len() == 15, "golden list has 15 entries")?;
    let args = ["census", "--d", "12", "--n", "3", "--len2", "--genus", "0"];
    let (code, out) = hurwitz(&args);
    check(code == 0, format!("d=12 census exit code {code}"))?;
    let mut want = String::from("# census d=12 n=3 constraint=len2,genus=0\n");
    for l in &expected {
        want.push_str(l);
        want.push('\n');
    }
    check(out == want, format!("d=12 census output differs:\n{out}"))?;
    let (_, parallel) = hurwitz(&[&args[..], &["--jobs", "4"]].concat());
    check(parallel == out, "--jobs 4 changed the output")?;
    let (code, out11) = hurwitz(&["census", "--d", "11", "--n", "3", "--len2", "--genus", "0"]);
    check(code == 0, format!("d=11 census exit code {code}"))?;
    check(
        out11 == "# census d=11 n=3 constraint=len2,genus=0\n",
        format!("d=11 lists data:\n{out11}"),
    )?;
    Ok("15 lines at d=12 match the list, none at d=11".into())
}

fn sweep(n: usize, dmax: u32) -> Result<Vec<String>, String> {
    let mut found = Vec::new();
    for d in 2..=dmax {
        let r = census::exceptional_census(&CensusQuery::new(d, n).length_two(), 1);
        check(r.unknown.is_empty(), format!("undecided at d={d}: {:?}", r.unknown))?;
        found.extend(r.exceptional);
    }
    found.sort();
    Ok(found)
}

fn listed(n: usize, dmax: u32, file: &str) -> Outcome {
    let found = sweep(n, dmax)?;
    let expected = golden_lines(file);
    check(found == expected, format!("found {found:?}, expected {expected:?}"))?;
    Ok(format!("n={n}, d<={dmax}: {}", found.join("; ")))
}

fn cross_validation() -> Outcome {
    let mut total = 0;
    for (n, dmax) in [(3, 12), (4, 8), (5, 6)] {
        for d in 2..=dmax {
            let q = CensusQuery::new(d, n);
            total += enumerate_candidates(&q.clone().length_two()).len();
            let report = census::crosscheck(&q, 1);
            check(report.is_empty(), format!("n={n} d={d}: {report:?}"))?;
        }
    }
    Ok(format!("{total} data, 0 mismatches"))
}

fn sporadic() -> Outcome {
    let items = [
        (7, "g1/S d=6 3,3 3,3 4,2", 60),
        (8, "g1/S d=8 2,2,2,2 4,4 5,3", 60),
        (9, "g1/S d=12 2,2,2,2,2,2 3,3,3,3 7,5", 60),
        (10, "g1/S d=16 2,2,2,2,2,2,2,2 3,3,3,3,3,1 8,8", 300),
        (12, "g2/S d=8 2,2,2,2 2,2,2,2 2,2,2,2 5,3", 60),
    ];
    let mut notes = Vec::new();
    for (item, line, limit) in items {
        let datum = parse_datum(line).unwrap();
        let start = Instant::now();
        let (r, nodes) = oracle::realize_counted(&datum, &SearchBudget::standard()).unwrap();
        let took = start.elapsed();
        check(
            r == Realization::NotRealizable,
            format!("item {item}: {:?}", r.answer()),
        )?;
        check(
            took < Duration::from_secs(limit),
            format!("item {item} took {took:?}"),
        )?;
        notes.push(format!("({item}) {nodes} nodes {:.2}s", took.as_secs_f64()));
    }
    Ok(notes.join(", "))
}

fn special_family() -> Outcome {
    let start = Instant::now();
    for s in 1..=6u32 {
        let line = format!("g2/S d=12 3,3,3,3 3,3,3,3 {},{}", 12 - s, s);
        let datum = parse_datum(&line).unwrap();
        match oracle::realize(&datum, &SearchBudget::standard()).unwrap() {
            Realization::Found(w) => check(oracle::verify_witness(&datum, &w), format!("bad witness for s={s}"))?,
            other => return Err(format!("s={s}: {:?}", other.answer())),
        }
    }
    let took = start.elapsed();
    check(took < Duration::from_secs(120), format!("took {took:?}"))?;
    Ok(format!("s=1..6 realized and verified in {:.2}s", took.as_secs_f64()))
}

fn prime_degree() -> Outcome {
    let mut notes = Vec::new();
    for d in [5, 7, 11] {
        let start = Instant::now();
        check(
            census::prime_degree_check(d, 3, &SearchBudget::standard(), 1),
            format!("d={d} has exceptional or undecided data"),
        )?;
        notes.push(format!("d={d} {:.1}s", start.elapsed().as_secs_f64()));
    }
    Ok(notes.join(", "))
}

// Brute force over the whole symmetric group, independent of the class
// enumerator used by the library.
fn all_permutations(d: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut current: Vec<u8> = (0..d as u8).collect();
    fn heap(k: usize, a: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            let j = if k % 2 == 0 { i } else { 0 };
            a.swap(j, k - 1);
        }
    }
    heap(d, &mut current, &mut out);
    out
}

fn cycle_lengths(p: &[u8]) -> Vec<u32> {
    let mut seen = vec![false; p.len()];
    let mut lens = Vec::new();
    for s in 0..p.len() {
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            len += 1;
        }
        if len > 0 {
            lens.push(len);
        }
    }
    lens.sort_unstable_by(|a, b| b.cmp(a));
    lens
}

fn orbit_sizes(a: &[u8], b: &[u8]) -> Vec<u32> {
    let d = a.len();
    let mut label: Vec<usize> = (0..d).collect();
    fn find(l: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while l[r] != r {
            r = l[r];
        }
        l[x] = r;
        r
    }
    for x in 0..d {
        for y in [a[x] as usize, b[x] as usize] {
            let (rx, ry) = (find(&mut label, x), find(&mut label, y));
            label[rx] = ry;
        }
    }
    let mut sizes = BTreeMap::new();
    for x in 0..d {
        *sizes.entry(find(&mut label, x)).or_insert(0u32) += 1;
    }
    let mut v: Vec<u32> = sizes.into_values().collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// (type1, type2) -> {(product type, orbits equal product type)} with θ1 fixed.
type ProductTable = BTreeMap<(Vec<u32>, Vec<u32>), BTreeSet<(Vec<u32>, bool)>>;

fn product_types(d: usize) -> ProductTable {
    let perms = all_permutations(d);
    let mut by_type: BTreeMap<Vec<u32>, Vec<&Vec<u8>>> = BTreeMap::new();
    for p in &perms {
        by_type.entry(cycle_lengths(p)).or_default().push(p);
    }
    let mut table = BTreeMap::new();
    for (t1, c1) in &by_type {
        let a = c1[0];
        for (t2, c2) in &by_type {
            let mut set = BTreeSet::new();
            for b in c2 {
                let prod: Vec<u8> = (0..d).map(|x| b[a[x] as usize]).collect();
                let ty = cycle_lengths(&prod);
                let orbits = orbit_sizes(a, b);
                set.insert((ty.clone(), orbits == ty));
            }
            table.insert((t1.clone(), t2.clone()), set);
        }
    }
    table
}

fn move_soundness() -> Outcome {
    let budget = SearchBudget::standard();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut inconclusive = 0;
    for (n, dmax) in [(3, 10), (4, 9), (5, 7)] {
        for d in 2..=dmax {
            for datum in enumerate_candidates(&CensusQuery::new(d, n)) {
                for mv in applicable_moves(&datum) {
                    let app = moves::apply(&datum, &mv).map_err(|e| format!("{mv} on {datum}: {e}"))?;
                    let report = moves::verify_move(&app, &budget);
                    check(!report.violation(), format!("{report:?}"))?;
                    inconclusive += usize::from(report.inconclusive());
                    *counts.entry(mv.name()).or_default() += 1;
                }
            }
        }
    }
    check(inconclusive == 0, format!("{inconclusive} inconclusive move checks"))?;

    let mut pairs = 0;
    for d in 2..=7usize {
        let table = product_types(d);
        for p1 in std::iter::once(Partition::trivial(d as u32)).chain(nontrivial_partitions(d as u32)) {
            for p2 in std::iter::once(Partition::trivial(d as u32)).chain(nontrivial_partitions(d as u32)) {
                let key = (p1.parts().to_vec(), p2.parts().to_vec());
                let reachable = &table[&key];
                let v = p1.defect() + p2.defect();
                if v < d as u32 {
                    pairs += 1;
                    let any = reachable
                        .iter()
                        .any(|(ty, orbits)| *orbits && d as u32 - ty.len() as u32 == v);
                    check(any, format!("brute force finds no minimal product for {p1} {p2}"))?;
                    let (a, b) = construct_min_defect_product(&p1, &p2, None)
                        .map_err(|e| format!("{p1} {p2}: {e}"))?;
                    let prod = a.compose(&b).unwrap();
                    check(
                        a.cycle_type() == p1
                            && b.cycle_type() == p2
                            && prod.defect() as u32 == v
                            && orbit_lengths(&[a.clone(), b.clone()]) == prod.cycle_type(),
                        format!("min-defect postcondition fails for {p1} {p2}"),
                    )?;
                    check(
                        reachable.contains(&(prod.cycle_type().parts().to_vec(), true)),
                        format!("{p1} {p2}: product type not in brute-force set"),
                    )?;
                }
                if v + 1 >= d as u32 {
                    pairs += 1;
                    let want = extreme_target(&p1, &p2).unwrap();
                    let brute = reachable.iter().any(|(ty, _)| ty.as_slice() == want.parts());
                    let built = construct_extreme_product(&p1, &p2);
                    match built {
                        Ok((a, b)) => check(
                            brute
                                && a.cycle_type() == p1
                                && b.cycle_type() == p2
                                && a.compose(&b).unwrap().cycle_type() == want,
                            format!("extreme postcondition fails for {p1} {p2}"),
                        )?,
                        Err(e) => {
                            check(!brute, format!("{p1} {p2}: construction failed but brute force succeeds"))?;
                            return Err(format!("{p1} {p2}: no product of type {want} exists ({e})"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{counts:?} applications, {pairs} product constructions checked"))
}

/// Non-decreasing index tuples of length `n` below `k`.
fn multisets(k: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for head in multisets(k, n - 1) {
        let from = head.last().copied().unwrap_or(0);
        for i in from..k {
            let mut t = head.clone();
            t.push(i);
            out.push(t);
        }
    }
    out
}

/// Riemann-Hurwitz in the general form for a sphere base, `χ(Θ) - Σℓ = d(2 - n)`.
fn general_rh(g: u32, d: u32, parts: &[Partition]) -> bool {
    let lhs = 2 - 2 * g as i64 - parts.iter().map(|p| p.len() as i64).sum::<i64>();
    lhs == d as i64 * (2 - parts.len() as i64)
}

fn defect_rh(g: u32, d: u32, parts: &[Partition]) -> bool {
    parts.iter().map(|p| p.defect() as i64).sum::<i64>() == 2 * (d as i64 + g as i64 - 1)
}

fn structural() -> Outcome {
    // the two Riemann-Hurwitz forms agree on every tuple
    let mut tuples = 0;
    for d in 2..=8u32 {
        let parts: Vec<Partition> = std::iter::once(Partition::trivial(d))
            .chain(nontrivial_partitions(d))
            .collect();
        for n in 1..=3usize {
            for idx in multisets(parts.len(), n) {
                let chosen: Vec<Partition> = idx.iter().map(|&i| parts[i].clone()).collect();
                for g in 0..=6 {
                    tuples += 1;
                    let a = general_rh(g, d, &chosen);
                    check(a == defect_rh(g, d, &chosen), format!("RH forms differ on g={g} d={d} {chosen:?}"))?;
                    if BranchDatum::validate(g, Surface::SPHERE, d, chosen.clone()).is_ok() {
                        check(a, "validate accepted a datum violating RH")?;
                    }
                }
            }
        }
    }

    // dessin genus from Euler's formula against the Riemann-Hurwitz genus
    let mut dessins = 0;
    for d in 2..=5usize {
        let perms = all_permutations(d);
        for a in &perms {
            for b in &perms {
                let (a, b) = (
                    Permutation::from_images(a.clone()).unwrap(),
                    Permutation::from_images(b.clone()).unwrap(),
                );
                let Ok(dessin) = Dessin::from_triple(a, b) else { continue };
                dessins += 1;
                let types = [dessin.black_valences(), dessin.white_valences(), dessin.face_lengths()];
                let g = genus_from_partitions(d as u32, &types).map_err(|e| e.to_string())?;
                check(g == dessin.genus(), format!("genus mismatch on {dessin}"))?;
            }
        }
    }
    for d in 2..=7u32 {
        for datum in enumerate_candidates(&CensusQuery::new(d, 3)) {
            if let Realization::Found(w) = oracle::realize(&datum, &SearchBudget::standard()).unwrap() {
                let dessin = Dessin::from_triple(w.theta[0].clone(), w.theta[1].clone())
                    .map_err(|e| format!("{datum}: {e}"))?;
                dessins += 1;
                check(dessin.genus() == datum.cover_genus(), format!("genus mismatch on {datum}"))?;
                check(dessin.to_datum().map_err(|e| e.to_string())? == datum, "dessin datum differs")?;
            }
        }
    }

    // verdicts do not depend on partition order or on conjugating a witness
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut pool = Vec::new();
    for (n, d) in [(3, 6), (3, 8), (3, 9), (3, 10), (4, 5), (4, 6), (5, 4)] {
        pool.extend(enumerate_candidates(&CensusQuery::new(d, n)));
    }
    let budget = SearchBudget::standard();
    let trials = 1500;
    for _ in 0..trials {
        let datum = pool.choose(&mut rng).unwrap();
        let mut order: Vec<usize> = (0..datum.n()).collect();
        order.shuffle(&mut rng);
        let shuffled = datum.reordered(&order);
        let v1 = classify(datum, Some(&budget));
        let v2 = classify(&shuffled, Some(&budget));
        check(v1.label() == v2.label(), format!("verdict changes under reordering of {datum}"))?;
        let r1 = oracle::is_realizable(datum, &budget).unwrap();
        let r2 = oracle::is_realizable(&shuffled, &budget).unwrap();
        check(r1 == r2 && r1 != Answer::Unknown, format!("oracle changes under reordering of {datum}"))?;
        if let Realization::Found(w) = oracle::realize(datum, &budget).unwrap() {
            let d = datum.degree() as usize;
            let mut images: Vec<u8> = (0..d as u8).collect();
            images.shuffle(&mut rng);
            let g = Permutation::from_images(images).unwrap();
            check(oracle::verify_witness(datum, &w.conjugated(&g)), "conjugated witness fails")?;
        }
    }
    Ok(format!(
        "{tuples} RH tuples, {dessins} dessins, {trials} invariance trials"
    ))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        ("1 degree-12 list", degree_twelve),
        ("2 four branch points", || listed(4, 8, "exceptional_n4.txt")),
        ("3 five branch points", || listed(5, 6, "exceptional_n5.txt")),
        ("4 classifier cross-validation", cross_validation),
        ("5 sporadic exceptional data", sporadic),
        ("6 realizable special family", special_family),
        ("7 prime degree", prime_degree),
        ("8 move soundness", move_soundness),
        ("9 structural invariants", structural),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|w| name.contains(w.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {name}: PASS ({secs:.1}s) {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1}s) {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
