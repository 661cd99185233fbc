//! Reduction moves `D ~> D'`: whenever `D'` is realizable so is `D`.
//!
//! T1 to T4 lower the cover genus of a three-point sphere datum with a
//! partition of length 2. A1 and A2 merge two partitions into the cycle type
//! of a product of permutations with those cycle types.
//!
//! Partition indices in the API are 0-based positions in
//! [`BranchDatum::partitions`]; the text form of a move uses 1-based indices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datum::{genus_from_partitions, BranchDatum, DatumError, Partition, Surface};
use crate::oracle::{self, Answer, SearchBudget};
use crate::perm::{canonical_rep, class_size, orbit_lengths, ClassIter, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("target is not a candidate datum: {0}")]
    InvalidTarget(DatumError),
    #[error("no product with the required cycle type exists for {0} and {1}")]
    NoProduct(Partition, Partition),
    #[error("bad move descriptor: {0}")]
    Syntax(String),
}

fn require(cond: bool, clause: &str) -> Result<(), MoveError> {
    if cond {
        Ok(())
    } else {
        Err(MoveError::PreconditionFailed(clause.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    /// A `3` in partition `i` becomes `1,1,1`. `k` is the length-2 slot.
    T1 { i: usize, k: Option<usize> },
    T2 { i: usize, j: usize, x: u32, x1: u32 },
    T3 { i: usize, j: usize, x: u32, y: u32 },
    T4 { i: usize, j: usize, x: u32, y: u32 },
    /// Optionally asks for a specific cycle type of the product.
    A1 { i: usize, j: usize, target: Option<Partition> },
    A2 { i: usize, j: usize },
}

impl Move {
    pub fn name(&self) -> &'static str {
        match self {
            Move::T1 { .. } => "T1",
            Move::T2 { .. } => "T2",
            Move::T3 { .. } => "T3",
            Move::T4 { .. } => "T4",
            Move::A1 { .. } => "A1",
            Move::A2 { .. } => "A2",
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::T1 { i, k } => {
                write!(f, "T1 i={}", i + 1)?;
                if let Some(k) = k {
                    write!(f, " k={}", k + 1)?;
                }
                Ok(())
            }
            Move::T2 { i, j, x, x1 } => write!(f, "T2 i={} j={} x={x} x1={x1}", i + 1, j + 1),
            Move::T3 { i, j, x, y } => write!(f, "T3 i={} j={} x={x} y={y}", i + 1, j + 1),
            Move::T4 { i, j, x, y } => write!(f, "T4 i={} j={} x={x} y={y}", i + 1, j + 1),
            Move::A1 { i, j, target } => {
                write!(f, "A1 i={} j={}", i + 1, j + 1)?;
                if let Some(t) = target {
                    write!(f, " pi={t}")?;
                }
                Ok(())
            }
            Move::A2 { i, j } => write!(f, "A2 i={} j={}", i + 1, j + 1),
        }
    }
}

impl FromStr for Move {
    type Err = MoveError;

    /// `T2 i=1 j=2 x=6 x1=2`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let name = words
            .next()
            .ok_or_else(|| MoveError::Syntax("empty descriptor".into()))?;
        let mut fields = BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| MoveError::Syntax(format!("expected key=value, got {w:?}")))?;
            if fields.insert(k.to_string(), v.to_string()).is_some() {
                return Err(MoveError::Syntax(format!("repeated key {k}")));
            }
        }
        let mut take = |key: &str| fields.remove(key);
        let number = |key: &str, v: Option<String>| -> Result<u32, MoveError> {
            let v = v.ok_or_else(|| MoveError::Syntax(format!("missing {key}")))?;
            v.parse()
                .map_err(|_| MoveError::Syntax(format!("{key} must be a non-negative integer")))
        };
        let index = |key: &str, v: Option<String>| -> Result<usize, MoveError> {
            match number(key, v)? {
                0 => Err(MoveError::Syntax(format!("{key} is 1-based"))),
                n => Ok(n as usize - 1),
            }
        };
        let mv = match name.to_ascii_uppercase().as_str() {
            "T1" => {
                let i = index("i", take("i"))?;
                let k = take("k").map(|v| index("k", Some(v))).transpose()?;
                Move::T1 { i, k }
            }
            "T2" => Move::T2 {
                i: index("i", take("i"))?,
                j: index("j", take("j"))?,
                x: number("x", take("x"))?,
                x1: number("x1", take("x1"))?,
            },
            "T3" | "T4" => {
                let i = index("i", take("i"))?;
                let j = index("j", take("j"))?;
                let x = number("x", take("x"))?;
                let y = number("y", take("y"))?;
                if name.eq_ignore_ascii_case("T3") {
                    Move::T3 { i, j, x, y }
                } else {
                    Move::T4 { i, j, x, y }
                }
            }
            "A1" => {
                let i = index("i", take("i"))?;
                let j = index("j", take("j"))?;
                let target = take("pi")
                    .map(|v| v.parse::<Partition>())
                    .transpose()
                    .map_err(|e| MoveError::Syntax(e.to_string()))?;
                Move::A1 { i, j, target }
            }
            "A2" => Move::A2 {
                i: index("i", take("i"))?,
                j: index("j", take("j"))?,
            },
            other => return Err(MoveError::Syntax(format!("unknown move {other:?}"))),
        };
        if let Some(k) = fields.keys().next() {
            return Err(MoveError::Syntax(format!("unexpected key {k}")));
        }
        Ok(mv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveApplication {
    pub mv: Move,
    pub source: BranchDatum,
    pub target: BranchDatum,
    /// `(θ1, θ2)` whose product has the merged cycle type, for A1 and A2.
    pub fragment: Option<(Permutation, Permutation)>,
}

fn check_index(datum: &BranchDatum, idx: usize, name: &str) -> Result<(), MoveError> {
    require(
        idx < datum.n(),
        &format!("{name}={} is out of range for n={}", idx + 1, datum.n()),
    )
}

fn distinct(a: usize, b: usize) -> Result<(), MoveError> {
    require(a != b, "partition indices must be distinct")
}

fn t_move_frame(datum: &BranchDatum) -> Result<(), MoveError> {
    require(datum.base().is_sphere(), "base is the sphere")?;
    require(datum.n() == 3, "n = 3")?;
    require(datum.cover_genus() >= 1, "g >= 1")
}

/// The slot other than `used` holding a partition of length 2.
fn length_two_slot(
    datum: &BranchDatum,
    used: &[usize],
    requested: Option<usize>,
) -> Result<usize, MoveError> {
    if let Some(k) = requested {
        check_index(datum, k, "k")?;
        require(!used.contains(&k), "k differs from the other indices")?;
        require(datum.partition(k).len() == 2, "partition k has length 2")?;
        return Ok(k);
    }
    (0..datum.n())
        .find(|k| !used.contains(k) && datum.partition(*k).len() == 2)
        .ok_or_else(|| MoveError::PreconditionFailed("a remaining partition has length 2".into()))
}

fn split_two(p: &Partition) -> (u32, u32) {
    (p.parts()[0], p.parts()[1])
}

fn build(
    genus: u32,
    degree: u32,
    slots: Vec<(usize, Partition)>,
) -> Result<BranchDatum, MoveError> {
    let mut slots = slots;
    slots.sort_by_key(|(k, _)| *k);
    BranchDatum::validate(
        genus,
        Surface::SPHERE,
        degree,
        slots.into_iter().map(|(_, p)| p).collect(),
    )
    .map_err(MoveError::InvalidTarget)
}

fn replace(p: &Partition, remove: &[u32], add: &[u32]) -> Result<Partition, MoveError> {
    let mut rest = p.remove_entries(remove).ok_or_else(|| {
        MoveError::PreconditionFailed(format!(
            "partition {p} contains {}",
            remove.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        ))
    })?;
    rest.extend(add.iter().copied().filter(|&e| e > 0));
    Partition::new(rest).map_err(MoveError::InvalidTarget)
}

pub fn apply_t1(datum: &BranchDatum, i: usize, k: Option<usize>) -> Result<MoveApplication, MoveError> {
    t_move_frame(datum)?;
    check_index(datum, i, "i")?;
    let k = length_two_slot(datum, &[i], k)?;
    let pi = datum.partition(i);
    require(pi.count_of(1) >= 2 && pi.contains(3), "partition i contains 1,1,3")?;
    let j = (0..3).find(|m| *m != i && *m != k).expect("three slots");
    let d = datum.degree();
    let target = build(
        datum.cover_genus() - 1,
        d,
        vec![
            (i, replace(pi, &[3], &[1, 1, 1])?),
            (j, datum.partition(j).clone()),
            (k, datum.partition(k).clone()),
        ],
    )?;
    Ok(MoveApplication {
        mv: Move::T1 { i, k: Some(k) },
        source: datum.clone(),
        target,
        fragment: None,
    })
}

pub fn apply_t2(
    datum: &BranchDatum,
    i: usize,
    j: usize,
    x: u32,
    x1: u32,
) -> Result<MoveApplication, MoveError> {
    t_move_frame(datum)?;
    check_index(datum, i, "i")?;
    check_index(datum, j, "j")?;
    distinct(i, j)?;
    let k = length_two_slot(datum, &[i, j], None)?;
    let d = datum.degree();
    require(x >= 4, "x >= 4")?;
    require(datum.partition(i).contains(x), "partition i contains x")?;
    require(datum.partition(j).contains(2), "partition j contains 2")?;
    let (s, t) = split_two(datum.partition(k));
    require(s >= 2 && t >= 2, "2 <= s <= d-2")?;
    require(x1 >= 1 && x1 < x - 2, "x1, x2 >= 1")?;
    let x2 = x - 2 - x1;
    let target = build(
        datum.cover_genus() - 1,
        d - 2,
        vec![
            (i, replace(datum.partition(i), &[x], &[x1, x2])?),
            (j, replace(datum.partition(j), &[2], &[])?),
            (k, Partition::new(vec![s - 1, t - 1]).map_err(MoveError::InvalidTarget)?),
        ],
    )?;
    Ok(MoveApplication {
        mv: Move::T2 { i, j, x, x1 },
        source: datum.clone(),
        target,
        fragment: None,
    })
}

pub fn apply_t3(
    datum: &BranchDatum,
    i: usize,
    j: usize,
    x: u32,
    y: u32,
) -> Result<MoveApplication, MoveError> {
    t_move_frame(datum)?;
    check_index(datum, i, "i")?;
    check_index(datum, j, "j")?;
    distinct(i, j)?;
    let k = length_two_slot(datum, &[i, j], None)?;
    let d = datum.degree();
    require(x >= 3 && y >= 3, "x, y >= 3")?;
    require(
        datum.partition(i).remove_entries(&[x, y]).is_some(),
        "partition i contains x,y",
    )?;
    require(datum.partition(j).count_of(2) >= 2, "partition j contains 2,2")?;
    let (s, t) = split_two(datum.partition(k));
    require(s >= 3 && t >= 3, "3 <= s <= d-3")?;
    let target = build(
        datum.cover_genus() - 1,
        d - 4,
        vec![
            (i, replace(datum.partition(i), &[x, y], &[x - 2, y - 2])?),
            (j, replace(datum.partition(j), &[2, 2], &[])?),
            (k, Partition::new(vec![s - 2, t - 2]).map_err(MoveError::InvalidTarget)?),
        ],
    )?;
    Ok(MoveApplication {
        mv: Move::T3 { i, j, x, y },
        source: datum.clone(),
        target,
        fragment: None,
    })
}

pub fn apply_t4(
    datum: &BranchDatum,
    i: usize,
    j: usize,
    x: u32,
    y: u32,
) -> Result<MoveApplication, MoveError> {
    t_move_frame(datum)?;
    check_index(datum, i, "i")?;
    check_index(datum, j, "j")?;
    distinct(i, j)?;
    let k = length_two_slot(datum, &[i, j], None)?;
    let d = datum.degree();
    require(x >= 4 && y >= 3, "x >= 4 and y >= 3")?;
    require(datum.partition(i).contains(x), "partition i contains x")?;
    require(datum.partition(j).contains(y), "partition j contains y")?;
    let (s, t) = split_two(datum.partition(k));
    require(s >= 2 && t >= 2, "2 <= s <= d-2")?;
    let target = build(
        datum.cover_genus() - 1,
        d - 2,
        vec![
            (i, replace(datum.partition(i), &[x], &[x - 2])?),
            (j, replace(datum.partition(j), &[y], &[y - 2])?),
            (k, Partition::new(vec![s - 1, t - 1]).map_err(MoveError::InvalidTarget)?),
        ],
    )?;
    Ok(MoveApplication {
        mv: Move::T4 { i, j, x, y },
        source: datum.clone(),
        target,
        fragment: None,
    })
}

/// First pair in enumeration order with `θ1` or `θ2` fixed to its canonical
/// representative (whichever has the larger class) and `accept` holding on the
/// pair and its product.
fn search_pair<F>(p1: &Partition, p2: &Partition, accept: F) -> Option<(Permutation, Permutation)>
where
    F: Fn(&Permutation, &Permutation, &Permutation) -> bool,
{
    let enumerate_second = class_size(p2) <= class_size(p1);
    let fixed = canonical_rep(if enumerate_second { p1 } else { p2 });
    let moving = if enumerate_second { p2 } else { p1 };
    for other in ClassIter::new(moving).expect("degree within range") {
        let (a, b) = if enumerate_second {
            (fixed.clone(), other)
        } else {
            (other, fixed.clone())
        };
        let product = a.compose(&b).expect("same degree");
        if accept(&a, &b, &product) {
            return Some((a, b));
        }
    }
    None
}

fn same_degree(p1: &Partition, p2: &Partition) -> Result<(), MoveError> {
    require(p1.degree() == p2.degree(), "partitions of the same degree")
}

/// `θ1, θ2` of types `π1, π2` with `v(θ1θ2) = v(π1) + v(π2)`, the group they
/// generate having `d - v(π1) - v(π2)` orbits whose lengths are the cycle
/// type of the product. A `target` restricts the product's cycle type.
pub fn construct_min_defect_product(
    p1: &Partition,
    p2: &Partition,
    target: Option<&Partition>,
) -> Result<(Permutation, Permutation), MoveError> {
    same_degree(p1, p2)?;
    let d = p1.degree();
    let v = p1.defect() + p2.defect();
    require(v < d, "v(pi1) + v(pi2) <= d - 1")?;
    if let Some(t) = target {
        require(t.degree() == d && t.defect() == v, "target has defect v(pi1) + v(pi2)")?;
    }
    let t = (d - v) as usize;
    search_pair(p1, p2, |a, b, product| {
        if product.defect() != v as usize {
            return false;
        }
        let ty = product.cycle_type();
        if target.is_some_and(|want| *want != ty) {
            return false;
        }
        let orbits = orbit_lengths(&[a.clone(), b.clone()]);
        orbits.len() as usize == t && orbits == ty
    })
    .ok_or_else(|| MoveError::NoProduct(p1.clone(), p2.clone()))
}

/// The cycle type that [`construct_extreme_product`] aims for.
pub fn extreme_target(p1: &Partition, p2: &Partition) -> Result<Partition, MoveError> {
    same_degree(p1, p2)?;
    let d = p1.degree();
    let v = p1.defect() + p2.defect();
    require(v + 1 >= d, "v(pi1) + v(pi2) >= d - 1")?;
    if (v + 1 - d) % 2 == 0 {
        return Ok(Partition::new(vec![d]).expect("positive"));
    }
    let all_twos = |p: &Partition| p.parts().iter().all(|&e| e == 2);
    if all_twos(p1) && all_twos(p2) {
        Ok(Partition::uniform(d / 2, 2))
    } else {
        Ok(Partition::new(vec![d - 1, 1]).expect("positive"))
    }
}

/// `θ1, θ2` of types `π1, π2` whose product is a `d`-cycle, or has type
/// `[d/2, d/2]` or `[d-1, 1]`, as dictated by the parity of `v(π1) + v(π2)`.
pub fn construct_extreme_product(
    p1: &Partition,
    p2: &Partition,
) -> Result<(Permutation, Permutation), MoveError> {
    let want = extreme_target(p1, p2)?;
    search_pair(p1, p2, |_, _, product| product.cycle_type() == want)
        .ok_or_else(|| MoveError::NoProduct(p1.clone(), p2.clone()))
}

fn a_move_frame(datum: &BranchDatum, i: usize, j: usize) -> Result<(), MoveError> {
    require(datum.base().is_sphere(), "base is the sphere")?;
    require(datum.n() >= 3, "n >= 3")?;
    check_index(datum, i, "i")?;
    check_index(datum, j, "j")?;
    distinct(i, j)
}

/// Merged partition first, then the untouched ones in their original order.
fn merged(datum: &BranchDatum, i: usize, j: usize, pi: Partition) -> Vec<Partition> {
    let mut parts = vec![pi];
    parts.extend(
        datum
            .partitions()
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != i && *m != j)
            .map(|(_, p)| p.clone()),
    );
    parts
}

pub fn apply_a1(
    datum: &BranchDatum,
    i: usize,
    j: usize,
    target: Option<&Partition>,
) -> Result<MoveApplication, MoveError> {
    a_move_frame(datum, i, j)?;
    let (a, b) = construct_min_defect_product(datum.partition(i), datum.partition(j), target)?;
    let pi = a.compose(&b).expect("same degree").cycle_type();
    let target_datum = BranchDatum::validate(
        datum.cover_genus(),
        Surface::SPHERE,
        datum.degree(),
        merged(datum, i, j, pi),
    )
    .map_err(MoveError::InvalidTarget)?;
    Ok(MoveApplication {
        mv: Move::A1 {
            i,
            j,
            target: target.cloned(),
        },
        source: datum.clone(),
        target: target_datum,
        fragment: Some((a, b)),
    })
}

pub fn apply_a2(datum: &BranchDatum, i: usize, j: usize) -> Result<MoveApplication, MoveError> {
    a_move_frame(datum, i, j)?;
    let d = datum.degree();
    require(d >= 3, "d >= 3")?;
    let rest: u32 = datum
        .partitions()
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != i && *m != j)
        .map(|(_, p)| p.defect())
        .sum();
    require(rest + 1 >= d, "remaining defects sum to at least d - 1")?;
    let (a, b) = construct_extreme_product(datum.partition(i), datum.partition(j))?;
    let pi = a.compose(&b).expect("same degree").cycle_type();
    let parts = merged(datum, i, j, pi);
    let g = genus_from_partitions(d, &parts).map_err(MoveError::InvalidTarget)?;
    let target = BranchDatum::validate(g, Surface::SPHERE, d, parts).map_err(MoveError::InvalidTarget)?;
    Ok(MoveApplication {
        mv: Move::A2 { i, j },
        source: datum.clone(),
        target,
        fragment: Some((a, b)),
    })
}

pub fn apply(datum: &BranchDatum, mv: &Move) -> Result<MoveApplication, MoveError> {
    match mv {
        Move::T1 { i, k } => apply_t1(datum, *i, *k),
        Move::T2 { i, j, x, x1 } => apply_t2(datum, *i, *j, *x, *x1),
        Move::T3 { i, j, x, y } => apply_t3(datum, *i, *j, *x, *y),
        Move::T4 { i, j, x, y } => apply_t4(datum, *i, *j, *x, *y),
        Move::A1 { i, j, target } => apply_a1(datum, *i, *j, target.as_ref()),
        Move::A2 { i, j } => apply_a2(datum, *i, *j),
    }
}

fn distinct_entries(p: &Partition) -> Vec<u32> {
    let mut e = p.parts().to_vec();
    e.dedup();
    e
}

/// Every move descriptor whose preconditions hold on `datum`, up to the
/// choice of equal entries. A1 is listed without a requested product type.
pub fn applicable_moves(datum: &BranchDatum) -> Vec<Move> {
    let n = datum.n();
    let mut out = Vec::new();
    let mut candidates = Vec::new();
    for i in 0..n {
        candidates.push(Move::T1 { i, k: None });
        for j in 0..n {
            if i == j {
                continue;
            }
            for x in distinct_entries(datum.partition(i)) {
                for x1 in 1..x.saturating_sub(2) {
                    candidates.push(Move::T2 { i, j, x, x1 });
                }
                for y in distinct_entries(datum.partition(i)) {
                    if y >= x {
                        candidates.push(Move::T3 { i, j, x, y });
                    }
                }
                for y in distinct_entries(datum.partition(j)) {
                    candidates.push(Move::T4 { i, j, x, y });
                }
            }
            if i < j {
                candidates.push(Move::A1 { i, j, target: None });
                candidates.push(Move::A2 { i, j });
            }
        }
    }
    for mv in candidates {
        if precheck(datum, &mv) && apply(datum, &mv).is_ok() {
            out.push(mv);
        }
    }
    out
}

/// Cheap filter so that enumeration does not run product searches for moves
/// whose defect bounds already fail.
fn precheck(datum: &BranchDatum, mv: &Move) -> bool {
    let d = datum.degree();
    match mv {
        Move::A1 { i, j, .. } => datum.partition(*i).defect() + datum.partition(*j).defect() < d,
        Move::A2 { i, j } => datum.partition(*i).defect() + datum.partition(*j).defect() + 1 >= d,
        _ => true,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveReport {
    pub mv: String,
    pub source: String,
    pub target: String,
    /// The target is a candidate datum and is what the move produces from
    /// the source.
    pub target_validates: bool,
    /// The A-move permutations have the claimed cycle types and product.
    pub fragment_ok: Option<bool>,
    pub target_answer: Answer,
    /// Only searched when the target is realizable.
    pub source_answer: Option<Answer>,
}

impl MoveReport {
    /// Target realizable but source not: the move is unsound.
    pub fn violation(&self) -> bool {
        !self.target_validates
            || self.fragment_ok == Some(false)
            || (self.target_answer == Answer::Yes && self.source_answer == Some(Answer::No))
    }

    pub fn inconclusive(&self) -> bool {
        self.target_answer == Answer::Unknown || self.source_answer == Some(Answer::Unknown)
    }
}

fn fragment_ok(app: &MoveApplication) -> Option<bool> {
    let (a, b) = app.fragment.as_ref()?;
    let (i, j) = match &app.mv {
        Move::A1 { i, j, .. } | Move::A2 { i, j } => (*i, *j),
        _ => return Some(false),
    };
    let product = a.compose(b).ok()?;
    Some(
        a.cycle_type() == *app.source.partition(i)
            && b.cycle_type() == *app.source.partition(j)
            && product.cycle_type() == *app.target.partition(0),
    )
}

pub fn verify_move(app: &MoveApplication, budget: &SearchBudget) -> MoveReport {
    let revalidates = BranchDatum::validate(
        app.target.cover_genus(),
        app.target.base(),
        app.target.degree(),
        app.target.partitions().to_vec(),
    )
    .is_ok();
    let reproduced = apply(&app.source, &app.mv).is_ok_and(|again| again.target == app.target);
    let target_answer = oracle::is_realizable(&app.target, budget).unwrap_or(Answer::Unknown);
    let source_answer = (target_answer == Answer::Yes)
        .then(|| oracle::is_realizable(&app.source, budget).unwrap_or(Answer::Unknown));
    MoveReport {
        mv: app.mv.to_string(),
        source: app.source.to_line(),
        target: app.target.to_line(),
        target_validates: revalidates && reproduced,
        fragment_ok: fragment_ok(app),
        target_answer,
        source_answer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::{parse_datum, part};

    fn datum(line: &str) -> BranchDatum {
        parse_datum(line).unwrap()
    }

    fn sphere(d: u32, parts: &[&[u32]]) -> BranchDatum {
        BranchDatum::sphere(d, parts.iter().map(|p| part(p)).collect()).unwrap()
    }

    fn precondition(r: Result<MoveApplication, MoveError>) -> bool {
        matches!(r, Err(MoveError::PreconditionFailed(_)))
    }

    #[test]
    fn t1_example() {
        let src = datum("g1/S d=8 3,3,1,1 2,6 4,4");
        let app = apply_t1(&src, 0, None).unwrap();
        assert_eq!(app.target, datum("g0/S d=8 3,1,1,1,1,1 6,2 4,4"));
        assert!(precondition(apply_t1(&datum("g0/S d=3 2,1 2,1 3"), 0, None)));
    }

    #[test]
    fn t1_with_h_eight() {
        // (T,S,18,3;[10,8],[3,3,1^12],[9,9])
        let src = BranchDatum::validate(
            1,
            Surface::SPHERE,
            18,
            vec![part(&[10, 8]), part(&[3, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]), part(&[9, 9])],
        )
        .unwrap();
        let app = apply_t1(&src, 1, Some(2)).unwrap();
        assert_eq!(app.target.cover_genus(), 0);
        assert_eq!(app.target.partition(1).count_of(1), 15);
    }

    #[test]
    fn t2_family_reduction() {
        for k in 3..=6u32 {
            let mut p1 = vec![2; (k - 2) as usize];
            p1.push(6);
            let p1 = part(&p1);
            let src = BranchDatum::validate(
                1,
                Surface::SPHERE,
                2 * k + 2,
                vec![p1, Partition::uniform(2, k + 1), part(&[k + 1, k + 1])],
            )
            .unwrap();
            let app = apply_t2(&src, 0, 1, 6, 2).unwrap();
            assert_eq!(app.target.degree(), 2 * k);
            assert_eq!(app.target.partition(0), &Partition::uniform(2, k));
            assert_eq!(app.target.partition(1), &Partition::uniform(2, k));
            assert_eq!(app.target.partition(2), &part(&[k, k]));
            assert!(precondition(apply_t2(&src, 0, 1, 6, 4)));
        }
    }

    #[test]
    fn t2_needs_s_at_least_two() {
        let src = datum("g1/S d=8 5,3 2,2,2,2 7,1");
        assert!(precondition(apply_t2(&src, 0, 1, 5, 1)));
    }

    #[test]
    fn t3_and_t4() {
        let src = datum("g1/S d=8 5,3 2,2,2,2 4,4");
        let app = apply_t3(&src, 0, 1, 3, 5).unwrap();
        assert_eq!(app.target, datum("g0/S d=4 3,1 2,2 2,2"));

        let src = datum("g1/S d=8 5,3 2,2,2,2 6,2");
        assert!(precondition(apply_t3(&src, 0, 1, 3, 5)));

        // (T,S,kh+2,3;[1^(kh-k-2),k+3],[h+2,h^(k-1)],[ph+1,(k-p)h+1]) with k=3, h=4, p=1
        let src = datum("g1/S d=14 6,1,1,1,1,1,1,1,1 6,4,4 5,9");
        let app = apply_t4(&src, 0, 1, 6, 6).unwrap();
        assert_eq!(app.target.to_line(), "g0/S d=12 4,1,1,1,1,1,1,1,1 4,4,4 8,4");
    }

    #[test]
    fn extreme_targets() {
        assert_eq!(extreme_target(&part(&[2, 2]), &part(&[2, 2])).unwrap(), part(&[2, 2]));
        assert_eq!(extreme_target(&part(&[3, 1]), &part(&[2, 2])).unwrap(), part(&[3, 1]));
        assert_eq!(extreme_target(&part(&[4]), &part(&[2, 1, 1])).unwrap(), part(&[3, 1]));
        assert_eq!(extreme_target(&part(&[3]), &part(&[2, 1])).unwrap(), part(&[2, 1]));
        assert_eq!(extreme_target(&part(&[3]), &part(&[3])).unwrap(), part(&[3]));
        let (a, b) = construct_extreme_product(&part(&[2, 2]), &part(&[2, 2])).unwrap();
        assert_eq!(a.compose(&b).unwrap().cycle_type(), part(&[2, 2]));
    }

    #[test]
    fn min_defect_small() {
        let (a, b) = construct_min_defect_product(&part(&[2, 1, 1]), &part(&[2, 1, 1]), None).unwrap();
        let p = a.compose(&b).unwrap();
        assert_eq!(p.defect(), 2);
        assert!(matches!(
            construct_min_defect_product(&part(&[2, 2]), &part(&[3, 1]), None),
            Err(MoveError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn a1_with_requested_product() {
        // d = 2k with k = 5: [1^7,3] and [2^5] merge into [6,2,2]
        let src = sphere(10, &[&[3, 1, 1, 1, 1, 1, 1, 1], &[2, 2, 2, 2, 2], &[10], &[9, 1]]);
        let app = apply_a1(&src, 0, 1, Some(&part(&[6, 2, 2]))).unwrap();
        assert_eq!(app.target.partition(0), &part(&[6, 2, 2]));
        assert_eq!(app.target.n(), 3);
        assert_eq!(app.target.cover_genus(), src.cover_genus());

        let src = datum("g0/S d=4 2,1,1 2,1,1 3,1 3,1");
        let app = apply_a1(&src, 0, 1, None).unwrap();
        assert_eq!(app.target.n(), 3);
        assert_eq!(app.target.partition(0).defect(), 2);

        let src = datum("g1/S d=4 2,2 2,2 2,2 3,1");
        assert!(precondition(apply_a1(&src, 0, 1, None)));
    }

    #[test]
    fn a2_on_eight_points() {
        let src = datum("g2/S d=8 2,2,2,2 2,2,2,2 2,2,2,2 5,3");
        let app = apply_a2(&src, 0, 1).unwrap();
        assert_eq!(app.target.partition(0), &part(&[4, 4]));
        assert_eq!(app.target.cover_genus(), 1);
        assert!(precondition(apply_a2(&datum("g0/S d=2 2 2"), 0, 1)));
    }

    #[test]
    fn descriptors_round_trip() {
        for text in [
            "T1 i=1 k=3",
            "T2 i=1 j=2 x=6 x1=2",
            "T3 i=2 j=1 x=3 y=4",
            "T4 i=1 j=3 x=5 y=3",
            "A1 i=1 j=2 pi=6,2,2",
            "A2 i=2 j=3",
        ] {
            let mv: Move = text.parse().unwrap();
            assert_eq!(mv.to_string(), text);
        }
        assert_eq!(
            "T2 i=1 j=2 x=6 x1=2".parse::<Move>().unwrap(),
            Move::T2 { i: 0, j: 1, x: 6, x1: 2 }
        );
        for bad in ["", "T5 i=1", "T2 i=1 j=2 x=6", "T1 i=0", "T1 i=1 z=2", "T1 i=1 i=2"] {
            assert!(bad.parse::<Move>().is_err(), "{bad}");
        }
    }

    #[test]
    fn verification() {
        let src = datum("g1/S d=8 3,3,1,1 2,6 4,4");
        let app = apply_t1(&src, 0, None).unwrap();
        let report = verify_move(&app, &SearchBudget::unlimited());
        assert!(report.target_validates);
        assert!(!report.violation());

        let mut corrupted = app.clone();
        corrupted.target = datum("g0/S d=8 2,2,2,2 2,2,2,2 5,3");
        let report = verify_move(&corrupted, &SearchBudget::unlimited());
        assert!(!report.target_validates);
        assert!(report.violation());
    }

    #[test]
    fn applicable_on_small_datum() {
        let src = datum("g1/S d=8 3,3,1,1 2,6 4,4");
        let moves = applicable_moves(&src);
        assert!(moves.contains(&Move::T1 { i: 0, k: None }));
        for mv in &moves {
            let app = apply(&src, mv).unwrap();
            assert!(!verify_move(&app, &SearchBudget::unlimited()).violation(), "{mv}");
        }
    }
}
