//! Closed-form verdicts.
//!
//! Three results settle most data without search: a cover of a base of
//! positive genus always exists; a sphere-base datum with a partition `[d]`
//! is always realizable; and a sphere-base datum with a partition of length 2
//! is exceptional exactly when it belongs to one of thirteen families, listed
//! in [`match_families`]. Everything else is `Unknown` unless the caller
//! allows a fallback search.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datum::{BranchDatum, Partition};
use crate::oracle::{self, MonodromyWitness, Realization, SearchBudget};

/// A family of exceptional data together with the parameter values that
/// reproduce a given datum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMatch {
    #[serde(rename = "id")]
    pub family: u8,
    pub params: BTreeMap<String, u32>,
}

impl FamilyMatch {
    fn new(family: u8, params: &[(&str, u32)]) -> Self {
        FamilyMatch {
            family,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RealizableReason {
    PositiveGenusBase,
    LengthOnePartition,
    MainTheorem,
    OracleWitness(MonodromyWitness),
}

/// Where an exceptional verdict came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Theorem,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Realizable(RealizableReason),
    /// Theorem verdicts always carry at least one family; oracle verdicts carry none.
    Exceptional {
        matches: Vec<FamilyMatch>,
        source: Provenance,
    },
    Unknown,
}

impl Verdict {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Verdict::Realizable(_))
    }

    pub fn is_exceptional(&self) -> bool {
        matches!(self, Verdict::Exceptional { .. })
    }

    /// True for verdicts that did not need a search.
    pub fn is_theorem_level(&self) -> bool {
        match self {
            Verdict::Realizable(RealizableReason::OracleWitness(_)) => false,
            Verdict::Realizable(_) => true,
            Verdict::Exceptional { source, .. } => *source == Provenance::Theorem,
            Verdict::Unknown => false,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Realizable(_) => "realizable",
            Verdict::Exceptional { .. } => "exceptional",
            Verdict::Unknown => "unknown",
        }
    }

    pub fn reason_tag(&self) -> &'static str {
        match self {
            Verdict::Realizable(RealizableReason::PositiveGenusBase) => "positive-genus-base",
            Verdict::Realizable(RealizableReason::LengthOnePartition) => "length-one-partition",
            Verdict::Realizable(RealizableReason::MainTheorem) => "length-two-theorem",
            Verdict::Realizable(RealizableReason::OracleWitness(_)) => "oracle-witness",
            Verdict::Exceptional {
                source: Provenance::Theorem,
                ..
            } => "length-two-family",
            Verdict::Exceptional {
                source: Provenance::Oracle,
                ..
            } => "oracle-exhausted",
            Verdict::Unknown => "undecided",
        }
    }
}

/// JSON form of a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub datum: String,
    pub verdict: String,
    pub reason: String,
    pub families: Vec<FamilyMatch>,
    pub witness: Option<Vec<String>>,
}

impl VerdictReport {
    pub fn new(datum: &BranchDatum, verdict: &Verdict) -> Self {
        let families = match verdict {
            Verdict::Exceptional { matches, .. } => matches.clone(),
            _ => Vec::new(),
        };
        let witness = match verdict {
            Verdict::Realizable(RealizableReason::OracleWitness(w)) => {
                Some(w.theta.iter().map(|t| t.to_string()).collect())
            }
            _ => None,
        };
        VerdictReport {
            datum: datum.to_line(),
            verdict: verdict.label().to_string(),
            reason: verdict.reason_tag().to_string(),
            families,
            witness,
        }
    }

    /// One-line human form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {} ({})", self.datum, self.verdict, self.reason);
        for f in &self.families {
            let params: Vec<String> = f.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("; family {}", f.family));
            if !params.is_empty() {
                out.push_str(&format!(" [{}]", params.join(", ")));
            }
        }
        if let Some(w) = &self.witness {
            out.push_str(&format!("; witness {}", w.join(" ")));
        }
        out
    }
}

fn twos(count: u32) -> Partition {
    Partition::uniform(2, count)
}

fn with_ones(mut big: Vec<u32>, degree: u32) -> Option<Partition> {
    let used: u32 = big.iter().sum();
    if used > degree {
        return None;
    }
    big.extend(std::iter::repeat_n(1, (degree - used) as usize));
    Partition::new(big).ok()
}

fn pair(a: u32, b: u32) -> Partition {
    Partition::new(vec![a, b]).expect("positive entries")
}

fn same(datum: &[Partition], template: Vec<Partition>) -> bool {
    let mut t = template;
    t.sort_by(Partition::canonical_cmp);
    datum == t.as_slice()
}

/// Every exceptional family the datum belongs to, with its parameters.
///
/// Families (sphere base; 1-entries are whatever makes the sum equal `d`):
///
/// | id | genus | d | partitions | range |
/// |----|-------|---|------------|-------|
/// | 1 | 0 | 12 | `[2⁶] [1³,3³] [6,6]` | |
/// | 2 | 0 | 2k | `[2ᵏ] [2ᵏ] [s,2k−s]` | k ≥ 2, s ≠ k |
/// | 3 | 0 | 2k | `[2ᵏ] [1,2ᵏ⁻²,3] [k,k]` | k ≥ 2 |
/// | 4 | 0 | 4k+2 | `[2²ᵏ⁺¹] [1²ᵏ⁻¹,k+1,k+2] [2k+1,2k+1]` | k ≥ 1 |
/// | 5 | 0 | 4k | `[2²ᵏ] [1²ᵏ⁻²,k+1,k+1] [2k−1,2k+1]` | k ≥ 2 |
/// | 6 | 0 | kh | `[hᵏ] [1,...,1,k+1] [ph,(k−p)h]` | h,k ≥ 2, 0 < p < k |
/// | 7 | 1 | 6 | `[3,3] [3,3] [2,4]` | |
/// | 8 | 1 | 8 | `[2⁴] [4,4] [3,5]` | |
/// | 9 | 1 | 12 | `[2⁶] [3⁴] [5,7]` | |
/// | 10 | 1 | 16 | `[2⁸] [1,3⁵] [8,8]` | |
/// | 11 | 1 | 2k | `[2ᵏ] [2ᵏ⁻⁴,3,5] [k,k]` | k ≥ 5 |
/// | 12 | 2 | 8 | `[2⁴] [2⁴] [2⁴] [3,5]` | n = 4 |
/// | 13 | n−3 | 4 | `[2,2]ⁿ⁻¹ [1,3]` | n ≥ 3 |
///
/// Some data sit in more than one family; all matches are returned, ordered by id.
/// Symmetric parameters (`s` in 2, `p` in 6) are reported as the smaller choice.
pub fn match_families(datum: &BranchDatum) -> Vec<FamilyMatch> {
    let mut out = Vec::new();
    if !datum.base().is_sphere() {
        return out;
    }
    let d = datum.degree();
    let n = datum.n();
    let g = datum.cover_genus();
    let ps = datum.canonical_partitions();
    let p = |e: &[u32]| Partition::new(e.to_vec()).expect("template");

    if n == 3 && g == 0 {
        if d == 12 && same(&ps, vec![twos(6), p(&[3, 3, 3, 1, 1, 1]), pair(6, 6)]) {
            out.push(FamilyMatch::new(1, &[]));
        }
        if d % 2 == 0 && d >= 4 {
            let k = d / 2;
            for s in 1..k {
                if same(&ps, vec![twos(k), twos(k), pair(s, d - s)]) {
                    out.push(FamilyMatch::new(2, &[("k", k), ("s", s)]));
                }
            }
            let mut mid = vec![3];
            mid.extend(std::iter::repeat_n(2, (k - 2) as usize));
            if let Some(mid) = with_ones(mid, d) {
                if same(&ps, vec![twos(k), mid, pair(k, k)]) {
                    out.push(FamilyMatch::new(3, &[("k", k)]));
                }
            }
        }
        if d % 4 == 2 && d >= 6 {
            let k = (d - 2) / 4;
            if let Some(mid) = with_ones(vec![k + 2, k + 1], d) {
                if same(&ps, vec![twos(2 * k + 1), mid, pair(2 * k + 1, 2 * k + 1)]) {
                    out.push(FamilyMatch::new(4, &[("k", k)]));
                }
            }
        }
        if d % 4 == 0 && d >= 8 {
            let k = d / 4;
            if let Some(mid) = with_ones(vec![k + 1, k + 1], d) {
                if same(&ps, vec![twos(2 * k), mid, pair(2 * k - 1, 2 * k + 1)]) {
                    out.push(FamilyMatch::new(5, &[("k", k)]));
                }
            }
        }
        for h in 2..=d / 2 {
            if d % h != 0 {
                continue;
            }
            let k = d / h;
            if k < 2 {
                continue;
            }
            let Some(mid) = with_ones(vec![k + 1], d) else {
                continue;
            };
            for q in 1..=k / 2 {
                let template = vec![Partition::uniform(h, k), mid.clone(), pair(q * h, (k - q) * h)];
                if same(&ps, template) {
                    out.push(FamilyMatch::new(6, &[("h", h), ("k", k), ("p", q)]));
                }
            }
        }
    }

    if n == 3 && g == 1 {
        let sporadic: [(u8, u32, Vec<Partition>); 4] = [
            (7, 6, vec![p(&[3, 3]), p(&[3, 3]), pair(2, 4)]),
            (8, 8, vec![twos(4), p(&[4, 4]), pair(3, 5)]),
            (9, 12, vec![twos(6), p(&[3, 3, 3, 3]), pair(5, 7)]),
            (10, 16, vec![twos(8), p(&[3, 3, 3, 3, 3, 1]), pair(8, 8)]),
        ];
        for (id, deg, template) in sporadic {
            if d == deg && same(&ps, template) {
                out.push(FamilyMatch::new(id, &[]));
            }
        }
        if d % 2 == 0 && d >= 10 {
            let k = d / 2;
            let mut mid = vec![5, 3];
            mid.extend(std::iter::repeat_n(2, (k - 4) as usize));
            if same(&ps, vec![twos(k), p(&mid), pair(k, k)]) {
                out.push(FamilyMatch::new(11, &[("k", k)]));
            }
        }
    }

    if n == 4 && g == 2 && d == 8 && same(&ps, vec![twos(4), twos(4), twos(4), pair(3, 5)]) {
        out.push(FamilyMatch::new(12, &[]));
    }

    if d == 4 && n >= 3 && g as usize + 3 == n {
        let mut template = vec![p(&[2, 2]); n - 1];
        template.push(pair(1, 3));
        if same(&ps, template) {
            out.push(FamilyMatch::new(13, &[("n", n as u32)]));
        }
    }
    out
}

/// Decision pipeline: positive-genus base, then a length-1 partition, then the
/// length-2 family list. Outside those, `Unknown` unless a fallback budget is
/// given, in which case the oracle decides and its verdict is tagged as such.
pub fn classify(datum: &BranchDatum, fallback: Option<&SearchBudget>) -> Verdict {
    if !datum.base().is_sphere() {
        return Verdict::Realizable(RealizableReason::PositiveGenusBase);
    }
    if datum.has_length(1) {
        return Verdict::Realizable(RealizableReason::LengthOnePartition);
    }
    if datum.has_length(2) {
        let matches = match_families(datum);
        return if matches.is_empty() {
            Verdict::Realizable(RealizableReason::MainTheorem)
        } else {
            Verdict::Exceptional {
                matches,
                source: Provenance::Theorem,
            }
        };
    }
    let Some(budget) = fallback else {
        return Verdict::Unknown;
    };
    match oracle::realize(datum, budget) {
        Ok(Realization::Found(w)) => Verdict::Realizable(RealizableReason::OracleWitness(w)),
        Ok(Realization::NotRealizable) => Verdict::Exceptional {
            matches: Vec::new(),
            source: Provenance::Oracle,
        },
        Ok(Realization::BudgetExceeded) | Err(_) => Verdict::Unknown,
    }
}
