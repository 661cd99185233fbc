//! Partitions, candidate branch data and the canonical datum line format.
//!
//! A datum line looks like `g1/S d=6 3,3 3,3 2,4`: cover genus, base surface,
//! degree, then one comma-separated partition per branch point.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A partition of a positive integer, entries kept in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition from entries in any order. Zero entries are rejected.
    pub fn new(mut parts: Vec<u32>) -> Result<Self, DatumError> {
        if parts.is_empty() {
            return Err(DatumError::EmptyPartition);
        }
        if parts.contains(&0) {
            return Err(DatumError::ZeroEntry);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    /// `[1, 1, ..., 1]` of the given degree.
    pub fn trivial(degree: u32) -> Self {
        Partition {
            parts: vec![1; degree as usize],
        }
    }

    /// `[m, m, ..., m]` with `count` entries.
    pub fn uniform(m: u32, count: u32) -> Self {
        Partition {
            parts: vec![m; count as usize],
        }
    }

    pub(crate) fn from_sorted_unchecked(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Partition { parts }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn degree(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of entries.
    pub fn len(&self) -> u32 {
        self.parts.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Defect: degree minus length.
    pub fn defect(&self) -> u32 {
        self.degree() - self.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.iter().all(|&p| p == 1)
    }

    pub fn max_entry(&self) -> u32 {
        self.parts[0]
    }

    pub fn count_of(&self, entry: u32) -> usize {
        self.parts.iter().filter(|&&p| p == entry).count()
    }

    pub fn contains(&self, entry: u32) -> bool {
        self.parts.contains(&entry)
    }

    /// Union of the two multisets of entries.
    pub fn juxtapose(&self, other: &Partition) -> Partition {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    /// Removes one occurrence of each listed entry and returns what is left,
    /// still in descending order. `None` if some entry is missing.
    pub fn remove_entries(&self, entries: &[u32]) -> Option<Vec<u32>> {
        let mut parts = self.parts.clone();
        for e in entries {
            let pos = parts.iter().position(|p| p == e)?;
            parts.remove(pos);
        }
        Some(parts)
    }

    /// Multiplicity vector: `m[i]` is the number of entries equal to `i`.
    pub fn multiplicities(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.degree() as usize + 1];
        for &p in &self.parts {
            m[p as usize] += 1;
        }
        m
    }

    /// Canonical comparison used when sorting partition lists: longer partitions
    /// first, then lexicographic on the (descending) entries.
    pub fn canonical_cmp(&self, other: &Partition) -> Ordering {
        other
            .parts
            .len()
            .cmp(&self.parts.len())
            .then_with(|| self.parts.cmp(&other.parts))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = DatumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = Vec::new();
        let mut offset = 0;
        for tok in s.split(',') {
            let v: u32 = tok.parse().map_err(|_| DatumError::Syntax {
                position: offset,
                message: format!("expected a positive integer, found {tok:?}"),
            })?;
            if v == 0 {
                return Err(DatumError::Syntax {
                    position: offset,
                    message: "partition entries must be positive".into(),
                });
            }
            parts.push(v);
            offset += tok.len() + 1;
        }
        Partition::new(parts)
    }
}

/// Closed orientable surface used as the base of a cover. Genus 0 is the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Surface {
    pub genus: u32,
}

impl Surface {
    pub const SPHERE: Surface = Surface { genus: 0 };

    pub fn orientable(genus: u32) -> Self {
        Surface { genus }
    }

    pub fn is_sphere(&self) -> bool {
        self.genus == 0
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.genus {
            0 => f.write_str("S"),
            1 => f.write_str("T"),
            g => write!(f, "{g}T"),
        }
    }
}

impl FromStr for Surface {
    type Err = DatumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" => return Ok(Surface::SPHERE),
            "T" => return Ok(Surface::orientable(1)),
            _ => {}
        }
        if let Some(k) = s.strip_suffix('T') {
            if let Ok(g) = k.parse::<u32>() {
                return Ok(Surface::orientable(g));
            }
        }
        if s == "P" || s.strip_suffix('P').is_some_and(|k| k.parse::<u32>().is_ok()) {
            return Err(DatumError::UnsupportedBase(s.to_string()));
        }
        Err(DatumError::Syntax {
            position: 0,
            message: format!("unknown surface {s:?}"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatumError {
    #[error("partition {index} sums to {sum}, expected degree {degree}")]
    DegreeMismatch { index: usize, sum: u32, degree: u32 },
    #[error("Riemann-Hurwitz condition fails: {lhs} != {rhs}")]
    RiemannHurwitzViolation { lhs: i64, rhs: i64 },
    #[error("degenerate datum: {0}")]
    Degenerate(&'static str),
    #[error("sum of defects {0} is odd")]
    ParityViolation(u32),
    #[error("partitions force a negative cover genus ({0})")]
    NegativeGenus(i64),
    #[error("non-orientable base {0:?} is not supported")]
    UnsupportedBase(String),
    #[error("empty partition")]
    EmptyPartition,
    #[error("partition entries must be positive")]
    ZeroEntry,
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
}

/// A candidate branch datum `(g·T, base, d, n; π1, ..., πn)`.
///
/// Partition order is preserved as supplied so moves can refer to positions;
/// equality and formatting go through the canonical order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchDatum {
    cover_genus: u32,
    base: Surface,
    degree: u32,
    partitions: Vec<Partition>,
}

impl BranchDatum {
    /// Checks and normalizes raw data: trivial partitions are dropped, then the
    /// Riemann-Hurwitz condition is checked on what remains.
    pub fn validate(
        cover_genus: u32,
        base: Surface,
        degree: u32,
        partitions: Vec<Partition>,
    ) -> Result<Self, DatumError> {
        if degree < 2 {
            return Err(DatumError::Degenerate("degree must be at least 2"));
        }
        for (index, p) in partitions.iter().enumerate() {
            let sum = p.degree();
            if sum != degree {
                return Err(DatumError::DegreeMismatch { index, sum, degree });
            }
        }
        let partitions: Vec<Partition> =
            partitions.into_iter().filter(|p| !p.is_trivial()).collect();
        if partitions.is_empty() {
            return Err(DatumError::Degenerate("no non-trivial partition"));
        }
        let n = partitions.len() as i64;
        if base.is_sphere() && n <= 2 && partitions.iter().any(|p| p.len() == 2) {
            return Err(DatumError::Degenerate(
                "a length-2 partition needs at least three branch points",
            ));
        }
        let total_len: i64 = partitions.iter().map(|p| p.len() as i64).sum();
        let lhs = (2 - 2 * cover_genus as i64) - total_len;
        let rhs = degree as i64 * (base.euler_characteristic() - n);
        if lhs != rhs {
            return Err(DatumError::RiemannHurwitzViolation { lhs, rhs });
        }
        Ok(BranchDatum {
            cover_genus,
            base,
            degree,
            partitions,
        })
    }

    /// Validates a sphere-base datum whose cover genus is derived from the
    /// partitions.
    pub fn sphere(degree: u32, partitions: Vec<Partition>) -> Result<Self, DatumError> {
        for (index, p) in partitions.iter().enumerate() {
            let sum = p.degree();
            if sum != degree {
                return Err(DatumError::DegreeMismatch { index, sum, degree });
            }
        }
        let g = genus_from_partitions(degree, &partitions)?;
        Self::validate(g, Surface::SPHERE, degree, partitions)
    }

    pub fn cover_genus(&self) -> u32 {
        self.cover_genus
    }

    pub fn base(&self) -> Surface {
        self.base
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Number of branch points.
    pub fn n(&self) -> usize {
        self.partitions.len()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn partition(&self, i: usize) -> &Partition {
        &self.partitions[i]
    }

    pub fn total_defect(&self) -> u32 {
        self.partitions.iter().map(Partition::defect).sum()
    }

    pub fn has_length(&self, len: u32) -> bool {
        self.partitions.iter().any(|p| p.len() == len)
    }

    /// Partitions in canonical order.
    pub fn canonical_partitions(&self) -> Vec<Partition> {
        let mut ps = self.partitions.clone();
        ps.sort_by(Partition::canonical_cmp);
        ps
    }

    /// Same datum with the partitions rearranged canonically.
    pub fn canonicalized(&self) -> BranchDatum {
        BranchDatum {
            partitions: self.canonical_partitions(),
            ..self.clone()
        }
    }

    /// Same datum with the partitions listed in the given order of indices.
    pub fn reordered(&self, order: &[usize]) -> BranchDatum {
        assert_eq!(order.len(), self.partitions.len());
        BranchDatum {
            partitions: order.iter().map(|&i| self.partitions[i].clone()).collect(),
            ..self.clone()
        }
    }

    pub fn to_line(&self) -> String {
        format_datum(self)
    }
}

impl PartialEq for BranchDatum {
    fn eq(&self, other: &Self) -> bool {
        self.cover_genus == other.cover_genus
            && self.base == other.base
            && self.degree == other.degree
            && self.canonical_partitions() == other.canonical_partitions()
    }
}

impl Eq for BranchDatum {}

impl std::hash::Hash for BranchDatum {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.cover_genus.hash(state);
        self.base.hash(state);
        self.degree.hash(state);
        self.canonical_partitions().hash(state);
    }
}

impl fmt::Display for BranchDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_datum(self))
    }
}

impl FromStr for BranchDatum {
    type Err = DatumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_datum(s)
    }
}

/// Cover genus forced on a sphere-base datum by its partitions:
/// `Σ v(πj) = 2(d + g − 1)`.
pub fn genus_from_partitions(degree: u32, partitions: &[Partition]) -> Result<u32, DatumError> {
    let total: u32 = partitions.iter().map(Partition::defect).sum();
    if total % 2 != 0 {
        return Err(DatumError::ParityViolation(total));
    }
    let g = (total / 2) as i64 - degree as i64 + 1;
    if g < 0 {
        return Err(DatumError::NegativeGenus(g));
    }
    Ok(g as u32)
}

/// Canonical one-line form, partitions in canonical order.
pub fn format_datum(datum: &BranchDatum) -> String {
    let mut out = format!("g{}/{} d={}", datum.cover_genus, datum.base, datum.degree);
    for p in datum.canonical_partitions() {
        out.push(' ');
        out.push_str(&p.to_string());
    }
    out
}

/// Parses a datum line; anything after `#` is ignored. The result is validated.
pub fn parse_datum(text: &str) -> Result<BranchDatum, DatumError> {
    let body = text.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in body.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push((s, &body[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push((s, &body[s..]));
    }
    let syntax = |position: usize, message: String| DatumError::Syntax { position, message };

    let mut it = tokens.into_iter();
    let (pos, head) = it
        .next()
        .ok_or_else(|| syntax(0, "empty datum line".into()))?;
    let rest = head
        .strip_prefix('g')
        .ok_or_else(|| syntax(pos, "expected g<genus>/<base>".into()))?;
    let (g_str, base_str) = rest
        .split_once('/')
        .ok_or_else(|| syntax(pos, "expected '/' between genus and base".into()))?;
    let genus: u32 = g_str
        .parse()
        .map_err(|_| syntax(pos + 1, format!("bad cover genus {g_str:?}")))?;
    let base: Surface = base_str.parse().map_err(|e| match e {
        DatumError::Syntax { message, .. } => syntax(pos + 2 + g_str.len(), message),
        other => other,
    })?;

    let (pos, dtok) = it
        .next()
        .ok_or_else(|| syntax(body.len(), "expected d=<degree>".into()))?;
    let degree: u32 = dtok
        .strip_prefix("d=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| syntax(pos, format!("expected d=<degree>, found {dtok:?}")))?;

    let mut partitions = Vec::new();
    for (pos, tok) in it {
        let p: Partition = tok.parse().map_err(|e| match e {
            DatumError::Syntax { position, message } => syntax(pos + position, message),
            other => other,
        })?;
        partitions.push(p);
    }
    BranchDatum::validate(genus, base, degree, partitions)
}

/// Parses every non-blank, non-comment line of a batch.
pub fn parse_lines(text: &str) -> Vec<Result<BranchDatum, DatumError>> {
    text.lines()
        .filter(|l| {
            let t = l.split('#').next().unwrap_or("").trim();
            !t.is_empty()
        })
        .map(parse_datum)
        .collect()
}

/// Shorthand used throughout tests: `part(&[2, 2, 2])`.
pub fn part(entries: &[u32]) -> Partition {
    Partition::new(entries.to_vec()).expect("valid partition")
}
