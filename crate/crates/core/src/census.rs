//! Exhaustive census of candidate data for a fixed degree and number of
//! branch points, with oracle verdicts and classifier cross-checking.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifier::{classify, Verdict};
use crate::datum::{genus_from_partitions, BranchDatum, Partition, Surface};
use crate::oracle::{self, Answer, SearchBudget};

/// Which sphere-base data a census covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusQuery {
    pub degree: u32,
    pub n: usize,
    /// Keep only data with some partition of length 2.
    pub length_two: bool,
    /// Inclusive cover-genus window.
    pub genus: Option<(u32, u32)>,
    pub budget: SearchBudget,
}

impl CensusQuery {
    pub fn new(degree: u32, n: usize) -> Self {
        assert!(degree >= 2 && n >= 3, "census needs d >= 2 and n >= 3");
        CensusQuery {
            degree,
            n,
            length_two: false,
            genus: None,
            budget: SearchBudget::standard(),
        }
    }

    pub fn length_two(mut self) -> Self {
        self.length_two = true;
        self
    }

    pub fn genus(mut self, g: u32) -> Self {
        self.genus = Some((g, g));
        self
    }

    pub fn budget(mut self, budget: SearchBudget) -> Self {
        self.budget = budget;
        self
    }

    /// `# census d=12 n=3 constraint=len2,genus=0`
    pub fn header(&self) -> String {
        let mut constraints = Vec::new();
        if self.length_two {
            constraints.push("len2".to_string());
        }
        match self.genus {
            Some((a, b)) if a == b => constraints.push(format!("genus={a}")),
            Some((a, b)) => constraints.push(format!("genus={a}..{b}")),
            None => {}
        }
        let c = if constraints.is_empty() {
            "none".to_string()
        } else {
            constraints.join(",")
        };
        format!("# census d={} n={} constraint={}", self.degree, self.n, c)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusCounts {
    pub candidates: usize,
    pub realizable: usize,
    pub exceptional: usize,
    pub unknown: usize,
}

/// A datum on which the classifier and the oracle disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub datum: String,
    pub classifier: String,
    pub oracle: Answer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusResult {
    pub query: CensusQuery,
    /// Canonical lines of the data the oracle proved exceptional, sorted.
    pub exceptional: Vec<String>,
    /// Data whose search ran out of budget, sorted.
    pub unknown: Vec<String>,
    pub counts: CensusCounts,
    pub mismatches: Vec<Mismatch>,
}

impl CensusResult {
    pub fn is_complete(&self) -> bool {
        self.unknown.is_empty()
    }

    /// Header line followed by the exceptional data, one per line.
    pub fn to_file(&self) -> String {
        let mut out = self.query.header();
        out.push('\n');
        for line in &self.exceptional {
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let c = &self.counts;
        let _ = write!(
            s,
            "{} candidates: {} realizable, {} exceptional, {} unknown, {} mismatches",
            c.candidates,
            c.realizable,
            c.exceptional,
            c.unknown,
            self.mismatches.len()
        );
        s
    }
}

/// Non-trivial partitions of `d`, each in descending order, listed in
/// reverse lexicographic order (`[d]` first).
pub fn nontrivial_partitions(d: u32) -> Vec<Partition> {
    fn rec(remaining: u32, max: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max.min(remaining)).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut raw = Vec::new();
    rec(d, d, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(Partition::from_sorted_unchecked)
        .filter(|p| !p.is_trivial())
        .collect()
}

/// Every datum matching the query, each multiset of partitions once, sorted by
/// canonical line.
pub fn enumerate_candidates(query: &CensusQuery) -> Vec<BranchDatum> {
    let parts = nontrivial_partitions(query.degree);
    let mut out = Vec::new();
    let mut idx = vec![0usize; query.n];
    // non-decreasing index tuples = multisets
    fn rec(
        pos: usize,
        from: usize,
        idx: &mut Vec<usize>,
        parts: &[Partition],
        query: &CensusQuery,
        out: &mut Vec<BranchDatum>,
    ) {
        if pos == idx.len() {
            let chosen: Vec<Partition> = idx.iter().map(|&i| parts[i].clone()).collect();
            if query.length_two && !chosen.iter().any(|p| p.len() == 2) {
                return;
            }
            let Ok(g) = genus_from_partitions(query.degree, &chosen) else {
                return;
            };
            if let Some((lo, hi)) = query.genus {
                if g < lo || g > hi {
                    return;
                }
            }
            if let Ok(datum) = BranchDatum::validate(g, Surface::SPHERE, query.degree, chosen) {
                out.push(datum);
            }
            return;
        }
        for i in from..parts.len() {
            idx[pos] = i;
            rec(pos + 1, i, idx, parts, query, out);
        }
    }
    rec(0, 0, &mut idx, &parts, query, &mut out);
    let mut keyed: Vec<(String, BranchDatum)> =
        out.into_iter().map(|d| (d.to_line(), d)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, d)| d).collect()
}

struct Decided {
    line: String,
    oracle: Answer,
    mismatch: Option<Mismatch>,
}

fn decide<F>(datum: &BranchDatum, budget: &SearchBudget, classifier: &F) -> Decided
where
    F: Fn(&BranchDatum) -> Verdict,
{
    let answer = oracle::is_realizable(datum, budget).unwrap_or(Answer::Unknown);
    let verdict = classifier(datum);
    let disagree = matches!(
        (&verdict, answer),
        (Verdict::Realizable(_), Answer::No) | (Verdict::Exceptional { .. }, Answer::Yes)
    );
    Decided {
        line: datum.to_line(),
        oracle: answer,
        mismatch: disagree.then(|| Mismatch {
            datum: datum.to_line(),
            classifier: format!("{} ({})", verdict.label(), verdict.reason_tag()),
            oracle: answer,
        }),
    }
}

#[cfg(feature = "parallel")]
fn run_all<F>(data: &[BranchDatum], budget: &SearchBudget, jobs: usize, classifier: &F) -> Vec<Decided>
where
    F: Fn(&BranchDatum) -> Verdict + Sync,
{
    use rayon::prelude::*;
    if jobs <= 1 {
        return data.iter().map(|d| decide(d, budget, classifier)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| data.par_iter().map(|d| decide(d, budget, classifier)).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_all<F>(data: &[BranchDatum], budget: &SearchBudget, _jobs: usize, classifier: &F) -> Vec<Decided>
where
    F: Fn(&BranchDatum) -> Verdict,
{
    data.iter().map(|d| decide(d, budget, classifier)).collect()
}

/// Runs the oracle on every candidate and compares with `classifier` wherever
/// the classifier commits to an answer.
pub fn census_with<F>(query: &CensusQuery, jobs: usize, classifier: F) -> CensusResult
where
    F: Fn(&BranchDatum) -> Verdict + Sync,
{
    let data = enumerate_candidates(query);
    let decided = run_all(&data, &query.budget, jobs, &classifier);
    let mut counts = CensusCounts {
        candidates: decided.len(),
        ..Default::default()
    };
    let mut exceptional = Vec::new();
    let mut unknown = Vec::new();
    let mut mismatches = Vec::new();
    for d in decided {
        match d.oracle {
            Answer::Yes => counts.realizable += 1,
            Answer::No => {
                counts.exceptional += 1;
                exceptional.push(d.line);
            }
            Answer::Unknown => {
                counts.unknown += 1;
                unknown.push(d.line);
            }
        }
        mismatches.extend(d.mismatch);
    }
    exceptional.sort();
    unknown.sort();
    CensusResult {
        query: query.clone(),
        exceptional,
        unknown,
        counts,
        mismatches,
    }
}

pub fn exceptional_census(query: &CensusQuery, jobs: usize) -> CensusResult {
    census_with(query, jobs, |d| classify(d, None))
}

/// Classifier against oracle on every datum with a length-2 partition.
pub fn crosscheck(query: &CensusQuery, jobs: usize) -> Vec<Mismatch> {
    crosscheck_with(query, jobs, |d| classify(d, None))
}

pub fn crosscheck_with<F>(query: &CensusQuery, jobs: usize, classifier: F) -> Vec<Mismatch>
where
    F: Fn(&BranchDatum) -> Verdict + Sync,
{
    let q = CensusQuery {
        length_two: true,
        ..query.clone()
    };
    let result = census_with(&q, jobs, classifier);
    let mut out = result.mismatches;
    // an undecided datum is reported so that it cannot pass silently
    for line in result.unknown {
        out.push(Mismatch {
            datum: line,
            classifier: "-".into(),
            oracle: Answer::Unknown,
        });
    }
    out
}

/// True when the oracle proves every datum of degree `d` with `n` branch
/// points realizable. Any undecided datum makes the check fail.
pub fn prime_degree_check(d: u32, n: usize, budget: &SearchBudget, jobs: usize) -> bool {
    let result = exceptional_census(&CensusQuery::new(d, n).budget(*budget), jobs);
    result.exceptional.is_empty() && result.unknown.is_empty()
}
