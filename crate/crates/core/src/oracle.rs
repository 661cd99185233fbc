//! Exhaustive monodromy search.
//!
//! A sphere-base datum is realizable exactly when there are permutations
//! `θ1, ..., θn` of `{1..d}` with `θj` of cycle type `πj`, product `θ1⋯θn = id`
//! and a transitive generated group. The search below looks for such a tuple
//! and, when none is found after exhausting the space, reports the datum as
//! not realizable.
//!
//! Search layout: the partition with the largest class is never enumerated
//! (its permutation is forced to be the inverse of the product of the others),
//! the next largest is fixed to its canonical representative (every condition
//! is invariant under simultaneous conjugation), and the remaining classes are
//! enumerated depth first, smallest class first. A partial product is dropped
//! when the transposition distance of the forced factor can no longer be
//! reached from it.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datum::{BranchDatum, Partition, Surface};
use crate::perm::{
    canonical_rep, class_size, compose_into, cycle_count, cycle_type_matches, multiplicity_bytes,
    transitive_images, ClassIter, Permutation, MAX_DEGREE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("base {0} is not the sphere; positive genus bases are settled by theorem")]
    UnsupportedBase(Surface),
    #[error("degree {0} exceeds the search limit of {MAX_DEGREE}")]
    DegreeTooLarge(u32),
}

/// Limits on a single search. Exceeding either limit yields an unknown answer.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl SearchBudget {
    pub const DEFAULT_NODES: u64 = 100_000_000;
    pub const DEFAULT_SECONDS: u64 = 300;

    pub fn unlimited() -> Self {
        SearchBudget::default()
    }

    pub fn nodes(max_nodes: u64) -> Self {
        SearchBudget {
            max_nodes: Some(max_nodes),
            max_time: None,
        }
    }

    pub fn with_time(mut self, limit: Duration) -> Self {
        self.max_time = Some(limit);
        self
    }

    /// 10⁸ nodes and 300 seconds.
    pub fn standard() -> Self {
        SearchBudget {
            max_nodes: Some(Self::DEFAULT_NODES),
            max_time: Some(Duration::from_secs(Self::DEFAULT_SECONDS)),
        }
    }
}

/// Permutations certifying that a datum is realizable, in datum order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonodromyWitness {
    pub theta: Vec<Permutation>,
}

impl MonodromyWitness {
    pub fn degree(&self) -> usize {
        self.theta.first().map_or(0, Permutation::degree)
    }

    /// Conjugates every component by `g`.
    pub fn conjugated(&self, g: &Permutation) -> MonodromyWitness {
        MonodromyWitness {
            theta: self
                .theta
                .iter()
                .map(|t| t.conjugate(g).expect("same degree"))
                .collect(),
        }
    }

    /// `theta1=(1 2)(3 4)` style lines.
    pub fn to_lines(&self) -> Vec<String> {
        self.theta
            .iter()
            .enumerate()
            .map(|(j, t)| format!("theta{}={}", j + 1, t))
            .collect()
    }

    /// Parses lines produced by [`MonodromyWitness::to_lines`].
    pub fn parse_lines(text: &str, degree: usize) -> Result<MonodromyWitness, crate::perm::PermError> {
        let mut theta = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let body = match line.split_once('=') {
                Some((_, rhs)) => rhs,
                None => line,
            };
            theta.push(Permutation::parse_cycles(body.trim(), degree)?);
        }
        Ok(MonodromyWitness { theta })
    }

    /// Image arrays, 1-based, for JSON output.
    pub fn image_arrays(&self) -> Vec<Vec<usize>> {
        self.theta
            .iter()
            .map(|t| t.images().iter().map(|&x| x as usize + 1).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Realization {
    Found(MonodromyWitness),
    NotRealizable,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl Realization {
    pub fn answer(&self) -> Answer {
        match self {
            Realization::Found(_) => Answer::Yes,
            Realization::NotRealizable => Answer::No,
            Realization::BudgetExceeded => Answer::Unknown,
        }
    }
}

/// How the search was set up for a datum.
#[derive(Debug, Clone)]
struct Plan {
    d: usize,
    /// Original partition index at each search position:
    /// fixed, enumerated levels..., forced.
    order: Vec<usize>,
    fixed: Vec<u8>,
    levels: Vec<Partition>,
    /// Sum of defects of the levels strictly after each level.
    suffix_defect: Vec<usize>,
    forced_mult: Vec<u8>,
    forced_defect: usize,
}

impl Plan {
    fn new(datum: &BranchDatum) -> Result<Plan, OracleError> {
        if !datum.base().is_sphere() {
            return Err(OracleError::UnsupportedBase(datum.base()));
        }
        let d = datum.degree();
        if d as usize > MAX_DEGREE {
            return Err(OracleError::DegreeTooLarge(d));
        }
        let d = d as usize;
        let parts = datum.partitions();
        // canonical order first, then a stable sort by class size, largest first
        let mut idx: Vec<usize> = (0..parts.len()).collect();
        idx.sort_by(|&a, &b| parts[a].canonical_cmp(&parts[b]));
        let sizes: Vec<_> = parts.iter().map(class_size).collect();
        idx.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]));

        let forced = idx[0];
        let mut order = Vec::with_capacity(parts.len());
        let fixed;
        if parts.len() >= 2 {
            fixed = canonical_rep(&parts[idx[1]]).images().to_vec();
            order.push(idx[1]);
            // remaining levels: smallest class first
            for &i in idx[2..].iter().rev() {
                order.push(i);
            }
        } else {
            fixed = Vec::new();
        }
        order.push(forced);

        let levels: Vec<Partition> = if order.len() > 2 {
            order[1..order.len() - 1]
                .iter()
                .map(|&i| parts[i].clone())
                .collect()
        } else {
            Vec::new()
        };
        let mut suffix_defect = vec![0; levels.len()];
        for k in (0..levels.len()).rev() {
            if k + 1 < levels.len() {
                suffix_defect[k] = suffix_defect[k + 1] + levels[k + 1].defect() as usize;
            }
        }
        Ok(Plan {
            d,
            order,
            fixed,
            levels,
            suffix_defect,
            forced_mult: multiplicity_bytes(&parts[forced]),
            forced_defect: parts[forced].defect() as usize,
        })
    }

    fn first_level(&self) -> Option<ClassIter> {
        self.levels
            .first()
            .map(|p| ClassIter::new(p).expect("degree checked"))
    }
}

enum Outcome {
    /// Permutations in search order, forced one last.
    Found(Vec<Vec<u8>>),
    Exhausted,
    Exceeded,
    Cancelled,
}

struct Search<'a> {
    plan: &'a Plan,
    node_limit: u64,
    deadline: Option<Instant>,
    nodes: u64,
    products: Vec<Vec<u8>>,
    thetas: Vec<Vec<u8>>,
    templates: Vec<ClassIter>,
    scratch: Vec<u8>,
    cancel: Option<(&'a AtomicUsize, usize)>,
    stopped: Option<Outcome>,
}

impl<'a> Search<'a> {
    fn new(plan: &'a Plan, budget: &SearchBudget, deadline: Option<Instant>) -> Self {
        let k = plan.levels.len();
        let mut products = vec![vec![0u8; plan.d]; k + 1];
        products[0].clone_from(&plan.fixed);
        Search {
            plan,
            node_limit: budget.max_nodes.unwrap_or(u64::MAX),
            deadline,
            nodes: 0,
            products,
            thetas: vec![vec![0u8; plan.d]; k],
            templates: plan
                .levels
                .iter()
                .map(|p| ClassIter::new(p).expect("degree checked"))
                .collect(),
            scratch: vec![0u8; plan.d + 1],
            cancel: None,
            stopped: None,
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            self.stopped = Some(Outcome::Exceeded);
            return false;
        }
        if self.nodes & 0x3ff == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.stopped = Some(Outcome::Exceeded);
                    return false;
                }
            }
            if let Some((best, mine)) = self.cancel {
                if best.load(Ordering::Acquire) < mine {
                    self.stopped = Some(Outcome::Cancelled);
                    return false;
                }
            }
        }
        true
    }

    fn run(&mut self, first: ClassIter) -> Outcome {
        if self.plan.levels.is_empty() {
            return self.run_without_levels();
        }
        if self.level(0, first) {
            let mut out = Vec::with_capacity(self.plan.order.len());
            out.push(self.plan.fixed.clone());
            out.extend(self.thetas.iter().cloned());
            let last = &self.products[self.plan.levels.len()];
            let mut inv = vec![0u8; self.plan.d];
            crate::perm::invert_into(last, &mut inv);
            out.push(inv);
            return Outcome::Found(out);
        }
        self.stopped.take().unwrap_or(Outcome::Exhausted)
    }

    /// One or two branch points: nothing to enumerate.
    fn run_without_levels(&mut self) -> Outcome {
        let plan = self.plan;
        if plan.order.len() == 1 {
            // a single permutation equal to the identity; validated data never get here
            return if plan.forced_defect == 0 && plan.d == 1 {
                Outcome::Found(vec![vec![0]])
            } else {
                Outcome::Exhausted
            };
        }
        let fixed = &plan.fixed;
        if cycle_type_matches(fixed, &plan.forced_mult, &mut self.scratch)
            && transitive_images(&[fixed], plan.d)
        {
            let mut inv = vec![0u8; plan.d];
            crate::perm::invert_into(fixed, &mut inv);
            return Outcome::Found(vec![fixed.clone(), inv]);
        }
        Outcome::Exhausted
    }

    fn level(&mut self, k: usize, mut iter: ClassIter) -> bool {
        let last = k + 1 == self.plan.levels.len();
        let reach = self.plan.suffix_defect[k];
        let target = self.plan.forced_defect;
        let d = self.plan.d;
        loop {
            if !iter.next_into(&mut self.thetas[k]) {
                return false;
            }
            if !self.tick() {
                return false;
            }
            let (head, tail) = self.products.split_at_mut(k + 1);
            compose_into(&head[k], &self.thetas[k], &mut tail[0]);
            if last {
                if cycle_type_matches(&tail[0], &self.plan.forced_mult, &mut self.scratch) {
                    let mut gens: Vec<&[u8]> = Vec::with_capacity(k + 2);
                    gens.push(&self.plan.fixed);
                    gens.extend(self.thetas.iter().map(|t| t.as_slice()));
                    if transitive_images(&gens, d) {
                        return true;
                    }
                }
            } else {
                let v = d - cycle_count(&tail[0]);
                if v + reach < target || v > target + reach {
                    continue;
                }
                let next = self.templates[k + 1].clone();
                if self.level(k + 1, next) {
                    return true;
                }
                if self.stopped.is_some() {
                    return false;
                }
            }
        }
    }
}

/// Rewrites a witness given in search order into datum order using adjacent
/// swaps `(a, b) -> (b, b⁻¹ a b)`, which keep the product, the cycle types and
/// the generated group.
fn into_datum_order(mut thetas: Vec<Permutation>, mut order: Vec<usize>) -> Vec<Permutation> {
    let n = order.len();
    for pass in 0..n {
        let mut swapped = false;
        for p in 0..n - 1 - pass.min(n - 1) {
            if order[p] > order[p + 1] {
                let a = thetas[p].clone();
                let b = thetas[p + 1].clone();
                thetas[p] = b.clone();
                thetas[p + 1] = a.conjugate(&b).expect("same degree");
                order.swap(p, p + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    thetas
}

fn finish(plan: &Plan, found: Vec<Vec<u8>>) -> MonodromyWitness {
    let thetas = found
        .into_iter()
        .map(Permutation::from_images_unchecked)
        .collect();
    MonodromyWitness {
        theta: into_datum_order(thetas, plan.order.clone()),
    }
}

/// Sequential search; also reports the number of nodes visited.
pub fn realize_counted(
    datum: &BranchDatum,
    budget: &SearchBudget,
) -> Result<(Realization, u64), OracleError> {
    let plan = Plan::new(datum)?;
    let mut search = Search::new(&plan, budget, deadline(budget));
    let first = plan
        .first_level()
        .unwrap_or_else(|| ClassIter::new(&Partition::trivial(1)).expect("trivial"));
    let outcome = search.run(first);
    let nodes = search.nodes;
    let r = match outcome {
        Outcome::Found(f) => Realization::Found(finish(&plan, f)),
        Outcome::Exhausted => Realization::NotRealizable,
        Outcome::Exceeded | Outcome::Cancelled => Realization::BudgetExceeded,
    };
    Ok((r, nodes))
}

// The clock is only read under a time limit; wasm32 has no `Instant`.
fn deadline(budget: &SearchBudget) -> Option<Instant> {
    budget.max_time.map(|t| Instant::now() + t)
}

pub fn realize(datum: &BranchDatum, budget: &SearchBudget) -> Result<Realization, OracleError> {
    realize_counted(datum, budget).map(|(r, _)| r)
}

/// Splits the first enumerated class into contiguous chunks and searches them
/// on up to `jobs` workers. The reported witness is the first one in
/// enumeration order, so the result does not depend on `jobs`.
pub fn realize_parallel(
    datum: &BranchDatum,
    budget: &SearchBudget,
    jobs: usize,
) -> Result<Realization, OracleError> {
    let plan = Plan::new(datum)?;
    let Some(first) = plan.first_level() else {
        return realize(datum, budget);
    };
    let chunks = first.split(64);
    let best = AtomicUsize::new(usize::MAX);
    let deadline = deadline(budget);
    let run_chunk = |(i, chunk): (usize, ClassIter)| -> (Outcome, u64) {
        if best.load(Ordering::Acquire) < i {
            return (Outcome::Cancelled, 0);
        }
        let mut search = Search::new(&plan, budget, deadline);
        search.cancel = Some((&best, i));
        let out = search.run(chunk);
        if matches!(out, Outcome::Found(_)) {
            best.fetch_min(i, Ordering::AcqRel);
        }
        (out, search.nodes)
    };
    let results: Vec<(Outcome, u64)> = map_chunks(chunks, jobs, run_chunk);

    let limit = budget.max_nodes.unwrap_or(u64::MAX);
    let mut spent: u64 = 0;
    for (outcome, nodes) in results {
        spent = spent.saturating_add(nodes);
        if spent > limit {
            return Ok(Realization::BudgetExceeded);
        }
        match outcome {
            Outcome::Found(f) => return Ok(Realization::Found(finish(&plan, f))),
            Outcome::Exhausted => {}
            Outcome::Exceeded | Outcome::Cancelled => return Ok(Realization::BudgetExceeded),
        }
    }
    Ok(Realization::NotRealizable)
}

#[cfg(feature = "parallel")]
fn map_chunks<F>(chunks: Vec<ClassIter>, jobs: usize, f: F) -> Vec<(Outcome, u64)>
where
    F: Fn((usize, ClassIter)) -> (Outcome, u64) + Sync + Send,
{
    use rayon::prelude::*;
    if jobs <= 1 {
        return chunks.into_iter().enumerate().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| chunks.into_par_iter().enumerate().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_chunks<F>(chunks: Vec<ClassIter>, _jobs: usize, f: F) -> Vec<(Outcome, u64)>
where
    F: Fn((usize, ClassIter)) -> (Outcome, u64),
{
    chunks.into_iter().enumerate().map(f).collect()
}

pub fn is_realizable(datum: &BranchDatum, budget: &SearchBudget) -> Result<Answer, OracleError> {
    realize(datum, budget).map(|r| r.answer())
}

/// Checks the three witness conditions: cycle types, product identity and
/// transitivity.
pub fn verify_witness(datum: &BranchDatum, witness: &MonodromyWitness) -> bool {
    let d = datum.degree() as usize;
    if witness.theta.len() != datum.n() || witness.theta.iter().any(|t| t.degree() != d) {
        return false;
    }
    let types_ok = witness
        .theta
        .iter()
        .zip(datum.partitions())
        .all(|(t, p)| &t.cycle_type() == p);
    if !types_ok {
        return false;
    }
    let mut product = Permutation::identity(d);
    for t in &witness.theta {
        product = product.compose(t).expect("same degree");
    }
    product.is_identity() && crate::perm::is_transitive(&witness.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::{parse_datum, part};

    fn datum(line: &str) -> BranchDatum {
        parse_datum(line).unwrap()
    }

    #[test]
    fn klein_four_case_is_not_realizable() {
        let d = datum("g0/S d=4 2,2 2,2 1,3");
        let (r, nodes) = realize_counted(&d, &SearchBudget::unlimited()).unwrap();
        assert_eq!(r, Realization::NotRealizable);
        assert!(nodes <= 9);
    }

    #[test]
    fn two_transpositions_make_a_three_cycle() {
        let d = datum("g0/S d=3 2,1 2,1 3");
        match realize(&d, &SearchBudget::unlimited()).unwrap() {
            Realization::Found(w) => assert!(verify_witness(&d, &w)),
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn item_seven_is_not_realizable() {
        let d = datum("g1/S d=6 3,3 3,3 2,4");
        assert_eq!(
            realize(&d, &SearchBudget::unlimited()).unwrap(),
            Realization::NotRealizable
        );
    }

    #[test]
    fn positive_genus_base_is_rejected() {
        let d = BranchDatum::validate(4, Surface::orientable(2), 2, vec![part(&[2]), part(&[2])])
            .unwrap();
        assert_eq!(
            realize(&d, &SearchBudget::unlimited()),
            Err(OracleError::UnsupportedBase(Surface::orientable(2)))
        );
    }

    #[test]
    fn two_point_data() {
        let d = BranchDatum::sphere(5, vec![part(&[5]), part(&[5])]).unwrap();
        match realize(&d, &SearchBudget::unlimited()).unwrap() {
            Realization::Found(w) => assert!(verify_witness(&d, &w)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn witnesses_come_back_in_datum_order() {
        // partitions deliberately listed so that search order differs
        let d = BranchDatum::sphere(
            6,
            vec![part(&[2, 1, 1, 1, 1]), part(&[6]), part(&[3, 3]), part(&[2, 2, 1, 1])],
        )
        .unwrap();
        match realize(&d, &SearchBudget::unlimited()).unwrap() {
            Realization::Found(w) => {
                assert!(verify_witness(&d, &w));
                for (t, p) in w.theta.iter().zip(d.partitions()) {
                    assert_eq!(&t.cycle_type(), p);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn node_budget_degrades_to_unknown() {
        let d = datum("g1/S d=16 2,2,2,2,2,2,2,2 3,3,3,3,3,1 8,8");
        assert_eq!(
            is_realizable(&d, &SearchBudget::nodes(1000)).unwrap(),
            Answer::Unknown
        );
    }

    #[test]
    fn broken_witnesses_fail_verification() {
        let d = datum("g0/S d=3 2,1 2,1 3");
        let Realization::Found(mut w) = realize(&d, &SearchBudget::unlimited()).unwrap() else {
            panic!()
        };
        w.theta[0] = Permutation::identity(3);
        assert!(!verify_witness(&d, &w));
    }

    #[test]
    fn parallel_matches_sequential() {
        for line in [
            "g0/S d=6 2,2,2 3,2,1 4,2",
            "g1/S d=6 3,3 3,3 3,3",
            "g1/S d=6 3,3 3,3 2,4",
            "g0/S d=8 2,2,2,2 2,2,2,2 5,3",
        ] {
            let d = datum(line);
            let seq = realize(&d, &SearchBudget::unlimited()).unwrap();
            for jobs in [1, 2, 3] {
                assert_eq!(
                    realize_parallel(&d, &SearchBudget::unlimited(), jobs).unwrap(),
                    seq,
                    "{line} jobs={jobs}"
                );
            }
        }
    }

    #[test]
    fn witness_lines_round_trip() {
        let d = datum("g1/S d=6 3,3 3,3 3,3");
        let Realization::Found(w) = realize(&d, &SearchBudget::unlimited()).unwrap() else {
            panic!()
        };
        let text = w.to_lines().join("\n");
        assert!(text.starts_with("theta1="));
        let back = MonodromyWitness::parse_lines(&text, 6).unwrap();
        assert_eq!(back, w);
    }
}
