//! Permutations of `{1..d}` stored as one-byte image arrays, cycle types,
//! orbits, and enumeration of conjugacy classes.
//!
//! Points are 0-based internally and 1-based in cycle notation. Products are
//! read left to right: `a.compose(&b)` applies `a` first, then `b`.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datum::Partition;

/// Largest degree handled by class enumeration (bitmask and rank widths).
pub const MAX_DEGREE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("image array is not a bijection")]
    NotBijective,
    #[error("degree {0} exceeds the supported maximum of {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("bad cycle notation at byte {position}: {message}")]
    Syntax { position: usize, message: String },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree as u8).collect(),
        }
    }

    /// From a 0-based image array.
    pub fn from_images(images: Vec<u8>) -> Result<Self, PermError> {
        if images.len() > 255 {
            return Err(PermError::DegreeTooLarge(images.len()));
        }
        let mut seen = vec![false; images.len()];
        for &i in &images {
            let i = i as usize;
            if i >= images.len() || seen[i] {
                return Err(PermError::NotBijective);
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<u8>) -> Self {
        Permutation { images }
    }

    /// From 1-based cycles; points not mentioned are fixed.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut images: Vec<u8> = (0..degree as u8).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (k, &p) in cycle.iter().enumerate() {
                if p == 0 || p > degree || touched[p - 1] {
                    return Err(PermError::NotBijective);
                }
                touched[p - 1] = true;
                let q = cycle[(k + 1) % cycle.len()];
                images[p - 1] = (q - 1) as u8;
            }
        }
        Ok(Permutation { images })
    }

    /// Parses `(1 2)(3 4)`; `()` is the identity. Commas are accepted as separators.
    pub fn parse_cycles(text: &str, degree: usize) -> Result<Self, PermError> {
        let syntax = |position: usize, message: &str| PermError::Syntax {
            position,
            message: message.to_string(),
        };
        let mut cycles = Vec::new();
        let mut current: Option<Vec<usize>> = None;
        let mut number = String::new();
        let mut number_start = 0;
        let flush = |number: &mut String, current: &mut Option<Vec<usize>>, pos: usize| {
            if number.is_empty() {
                return Ok(());
            }
            let v: usize = number.parse().map_err(|_| syntax(pos, "bad point"))?;
            number.clear();
            match current {
                Some(c) => {
                    c.push(v);
                    Ok(())
                }
                None => Err(syntax(pos, "point outside a cycle")),
            }
        };
        for (i, ch) in text.char_indices() {
            match ch {
                '(' => {
                    if current.is_some() {
                        return Err(syntax(i, "nested '('"));
                    }
                    current = Some(Vec::new());
                }
                ')' => {
                    flush(&mut number, &mut current, number_start)?;
                    let c = current.take().ok_or_else(|| syntax(i, "unmatched ')'"))?;
                    if !c.is_empty() {
                        cycles.push(c);
                    }
                }
                '0'..='9' => {
                    if number.is_empty() {
                        number_start = i;
                    }
                    number.push(ch);
                }
                ' ' | ',' | '\t' => flush(&mut number, &mut current, number_start)?,
                _ => return Err(syntax(i, "unexpected character")),
            }
        }
        if current.is_some() {
            return Err(syntax(text.len(), "unclosed '('"));
        }
        if !number.is_empty() {
            return Err(syntax(number_start, "point outside a cycle"));
        }
        Self::from_cycles(degree, &cycles).map_err(|_| syntax(0, "points repeat or exceed degree"))
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u8] {
        &self.images
    }

    pub fn image(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| i == p as usize)
    }

    /// `self` first, then `other`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch(self.degree(), other.degree()));
        }
        let mut out = vec![0u8; self.degree()];
        compose_into(&self.images, &other.images, &mut out);
        Ok(Permutation { images: out })
    }

    pub fn inverse(&self) -> Permutation {
        let mut out = vec![0u8; self.degree()];
        invert_into(&self.images, &mut out);
        Permutation { images: out }
    }

    /// `g⁻¹ · self · g`: relabels every point `x` as `g(x)`.
    pub fn conjugate(&self, g: &Permutation) -> Result<Permutation, PermError> {
        if self.degree() != g.degree() {
            return Err(PermError::DegreeMismatch(self.degree(), g.degree()));
        }
        let mut out = vec![0u8; self.degree()];
        for (x, &y) in self.images.iter().enumerate() {
            out[g.images[x] as usize] = g.images[y as usize];
        }
        Ok(Permutation { images: out })
    }

    /// Cycles with their smallest point first, ordered by that point. Fixed
    /// points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let d = self.degree();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let mut c = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                c.push(x);
                x = self.images[x] as usize;
            }
            out.push(c);
        }
        out
    }

    pub fn cycle_type(&self) -> Partition {
        Partition::new(self.cycles().iter().map(|c| c.len() as u32).collect())
            .unwrap_or_else(|_| Partition::trivial(0))
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        cycle_count(&self.images)
    }

    /// Transposition distance to the identity: degree minus cycle count.
    pub fn defect(&self) -> usize {
        self.degree() - self.cycle_count()
    }

    pub fn sign(&self) -> i8 {
        if self.defect() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for c in self.cycles() {
            if c.len() < 2 {
                continue;
            }
            any = true;
            f.write_str("(")?;
            for (k, p) in c.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", p + 1)?;
            }
            f.write_str(")")?;
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[inline]
pub(crate) fn compose_into(a: &[u8], b: &[u8], out: &mut [u8]) {
    for (o, &x) in out.iter_mut().zip(a) {
        *o = b[x as usize];
    }
}

#[inline]
pub(crate) fn invert_into(a: &[u8], out: &mut [u8]) {
    for (i, &x) in a.iter().enumerate() {
        out[x as usize] = i as u8;
    }
}

#[inline]
pub(crate) fn cycle_count(images: &[u8]) -> usize {
    let mut seen: u64 = 0;
    let mut count = 0;
    if images.len() <= 64 {
        for start in 0..images.len() {
            if seen & (1 << start) != 0 {
                continue;
            }
            count += 1;
            let mut x = start;
            while seen & (1 << x) == 0 {
                seen |= 1 << x;
                x = images[x] as usize;
            }
        }
        count
    } else {
        Permutation::from_images_unchecked(images.to_vec()).cycles().len()
    }
}

/// True when the cycle type of `images` has exactly `target[L]` cycles of each
/// length `L`. Bails out at the first surplus cycle length.
#[inline]
pub(crate) fn cycle_type_matches(images: &[u8], target: &[u8], scratch: &mut [u8]) -> bool {
    debug_assert!(images.len() <= 64);
    scratch[..target.len()].copy_from_slice(target);
    let mut seen: u64 = 0;
    for start in 0..images.len() {
        if seen & (1 << start) != 0 {
            continue;
        }
        let mut len = 0usize;
        let mut x = start;
        while seen & (1 << x) == 0 {
            seen |= 1 << x;
            x = images[x] as usize;
            len += 1;
        }
        if scratch[len] == 0 {
            return false;
        }
        scratch[len] -= 1;
    }
    true
}

/// Multiplicity vector indexed by cycle length, as bytes.
pub(crate) fn multiplicity_bytes(p: &Partition) -> Vec<u8> {
    p.multiplicities().into_iter().map(|m| m as u8).collect()
}

/// Lengths of the orbits of the group generated by `generators`, as a partition.
pub fn orbit_lengths(generators: &[Permutation]) -> Partition {
    let d = generators.first().map_or(0, Permutation::degree);
    let mut seen = vec![false; d];
    let mut lengths = Vec::new();
    let mut stack = Vec::new();
    for start in 0..d {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(x) = stack.pop() {
            size += 1;
            for g in generators {
                let y = g.images[x] as usize;
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        lengths.push(size);
    }
    Partition::new(lengths).unwrap_or_else(|_| Partition::trivial(0))
}

pub fn orbit_count(generators: &[Permutation]) -> usize {
    orbit_lengths(generators).len() as usize
}

pub fn is_transitive(generators: &[Permutation]) -> bool {
    match generators.first() {
        None => false,
        Some(g) => transitive_images(&generators.iter().map(|p| p.images()).collect::<Vec<_>>(), g.degree()),
    }
}

/// Single orbit check on raw image arrays, for the search loops.
#[inline]
pub(crate) fn transitive_images(generators: &[&[u8]], d: usize) -> bool {
    if d == 0 {
        return false;
    }
    if d > 64 {
        let gens: Vec<Permutation> = generators
            .iter()
            .map(|g| Permutation::from_images_unchecked(g.to_vec()))
            .collect();
        return orbit_count(&gens) == 1;
    }
    let full: u64 = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
    let mut reached: u64 = 1;
    let mut frontier: u64 = 1;
    while frontier != 0 {
        let mut next = 0u64;
        let mut f = frontier;
        while f != 0 {
            let x = f.trailing_zeros() as usize;
            f &= f - 1;
            for g in generators {
                next |= 1u64 << g[x];
            }
        }
        frontier = next & !reached;
        reached |= next;
        if reached == full {
            return true;
        }
    }
    reached == full
}

/// The permutation whose cycles are consecutive blocks, longest first:
/// `[3,2]` gives `(1 2 3)(4 5)`.
pub fn canonical_rep(cycle_type: &Partition) -> Permutation {
    let d = cycle_type.degree() as usize;
    let mut images = vec![0u8; d];
    let mut start = 0usize;
    for &len in cycle_type.parts() {
        let len = len as usize;
        for k in 0..len {
            images[start + k] = (start + (k + 1) % len) as u8;
        }
        start += len;
    }
    Permutation { images }
}

/// `d! / ∏ (i^{m_i} · m_i!)`.
pub fn class_size(cycle_type: &Partition) -> BigUint {
    let d = cycle_type.degree();
    let mut num = BigUint::from(1u32);
    for k in 2..=d {
        num *= k;
    }
    let mut den = BigUint::from(1u32);
    for (len, &m) in cycle_type.multiplicities().iter().enumerate().skip(1) {
        for j in 1..=m {
            den *= len as u32;
            den *= j;
        }
    }
    num / den
}

fn factorial_u128(n: usize) -> u128 {
    (2..=n as u128).product()
}

/// Permutations of `points` points with the cycle-length multiplicities in
/// `remaining` (indexed like `lengths`).
fn count_arrangements(points: usize, lengths: &[u32], remaining: &[u32]) -> u128 {
    let mut den: u128 = 1;
    for (&len, &m) in lengths.iter().zip(remaining) {
        for j in 1..=m as u128 {
            den *= len as u128 * j;
        }
    }
    factorial_u128(points) / den
}

/// Falling factorial `n (n-1) ... (n-k+1)`.
fn falling(n: usize, k: usize) -> u128 {
    (0..k).map(|i| (n - i) as u128).product()
}

/// Enumerates the conjugacy class of a cycle type, each element once.
///
/// Elements are produced in cycle-word order: the smallest unused point opens
/// the next cycle, cycle lengths are tried longest first, and the remaining
/// points of each cycle ascend lexicographically. The first element is
/// [`canonical_rep`]. Ranks index this order, so a class can be cut into
/// disjoint contiguous ranges for independent workers.
#[derive(Clone, Debug)]
pub struct ClassIter {
    d: usize,
    lengths: Vec<u32>,
    initial: Vec<u32>,
    remaining: Vec<u32>,
    word: [u8; MAX_DEGREE],
    seg_start: [u8; MAX_DEGREE],
    choice: [u8; MAX_DEGREE],
    used: u64,
    primed: bool,
    first_rank: u128,
    left: u128,
}

impl ClassIter {
    pub fn new(cycle_type: &Partition) -> Result<Self, PermError> {
        let d = cycle_type.degree() as usize;
        if d > MAX_DEGREE {
            return Err(PermError::DegreeTooLarge(d));
        }
        let mut lengths: Vec<u32> = cycle_type.parts().to_vec();
        lengths.dedup();
        let initial: Vec<u32> = lengths
            .iter()
            .map(|&l| cycle_type.count_of(l) as u32)
            .collect();
        let total = count_arrangements(d, &lengths, &initial);
        let mut it = ClassIter {
            d,
            lengths,
            remaining: initial.clone(),
            initial,
            word: [0; MAX_DEGREE],
            seg_start: [0; MAX_DEGREE],
            choice: [0; MAX_DEGREE],
            used: 0,
            primed: false,
            first_rank: 0,
            left: total,
        };
        it.seek(0);
        Ok(it)
    }

    /// Class size as a machine integer.
    pub fn total(&self) -> u128 {
        count_arrangements(self.d, &self.lengths, &self.initial)
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Elements not yet produced.
    pub fn remaining_count(&self) -> u128 {
        self.left
    }

    /// Restricts the iterator to ranks `start..end` of the class order.
    pub fn range(mut self, start: u128, end: u128) -> Self {
        let end = end.min(self.total());
        let start = start.min(end);
        self.seek(start);
        self.left = end - start;
        self
    }

    /// Cuts the remaining ranks into at most `parts` contiguous ranges, in order.
    pub fn split(&self, parts: usize) -> Vec<ClassIter> {
        let parts = parts.max(1) as u128;
        let start = self.first_rank;
        let len = self.left;
        let chunk = len.div_ceil(parts).max(1);
        let mut out = Vec::new();
        let mut s = start;
        while s < start + len {
            let e = (s + chunk).min(start + len);
            out.push(self.clone().range(s, e));
            s = e;
        }
        out
    }

    /// Positions the state at the element of the given rank (unranking).
    fn seek(&mut self, mut rank: u128) {
        self.first_rank = rank;
        self.primed = false;
        self.used = 0;
        self.remaining.clone_from(&self.initial);
        let total = self.total();
        if rank >= total || self.d == 0 {
            return;
        }
        let mut pos = 0;
        while pos < self.d {
            let unused = self.d - pos;
            let p = (!self.used).trailing_zeros() as u8;
            let mut li = 0;
            let mut sub = 0;
            for k in 0..self.lengths.len() {
                if self.remaining[k] == 0 {
                    continue;
                }
                let len = self.lengths[k] as usize;
                self.remaining[k] -= 1;
                let rest = count_arrangements(unused - len, &self.lengths, &self.remaining);
                let block = falling(unused - 1, len - 1) * rest;
                if rank < block {
                    li = k;
                    sub = rest;
                    break;
                }
                rank -= block;
                self.remaining[k] += 1;
            }
            let len = self.lengths[li] as usize;
            self.word[pos] = p;
            self.seg_start[pos] = pos as u8;
            self.choice[pos] = li as u8;
            self.used |= 1 << p;
            for t in 1..len {
                let avail = unused - t;
                let per = falling(avail - 1, len - 1 - t) * sub;
                let idx = (rank / per) as u32;
                rank %= per;
                let q = nth_unset(self.used, idx, self.d);
                self.word[pos + t] = q;
                self.seg_start[pos + t] = pos as u8;
                self.used |= 1 << q;
            }
            pos += len;
        }
        self.primed = true;
    }

    fn fill_forward(&mut self, mut pos: usize) {
        while pos < self.d {
            let prev_start = self.seg_start[pos - 1] as usize;
            let prev_len = self.lengths[self.choice[prev_start] as usize] as usize;
            let p = (!self.used).trailing_zeros() as u8;
            if pos == prev_start + prev_len {
                let li = self
                    .remaining
                    .iter()
                    .position(|&m| m > 0)
                    .expect("remaining lengths cover the unused points");
                self.remaining[li] -= 1;
                self.choice[pos] = li as u8;
                self.seg_start[pos] = pos as u8;
            } else {
                self.seg_start[pos] = prev_start as u8;
            }
            self.word[pos] = p;
            self.used |= 1 << p;
            pos += 1;
        }
    }

    fn advance(&mut self) -> bool {
        let full: u64 = if self.d == 64 { u64::MAX } else { (1u64 << self.d) - 1 };
        let mut pos = self.d;
        while pos > 0 {
            pos -= 1;
            let p = self.word[pos];
            self.used &= !(1u64 << p);
            if self.seg_start[pos] as usize == pos {
                let li = self.choice[pos] as usize;
                self.remaining[li] += 1;
                if let Some(nli) = (li + 1..self.lengths.len()).find(|&k| self.remaining[k] > 0) {
                    self.remaining[nli] -= 1;
                    self.choice[pos] = nli as u8;
                    self.used |= 1 << p;
                    self.fill_forward(pos + 1);
                    return true;
                }
            } else {
                let above = !((2u64 << p) - 1);
                let candidates = !self.used & above & full;
                if candidates != 0 {
                    let q = candidates.trailing_zeros() as u8;
                    self.word[pos] = q;
                    self.used |= 1 << q;
                    self.fill_forward(pos + 1);
                    return true;
                }
            }
        }
        false
    }

    fn write_images(&self, out: &mut [u8]) {
        let mut pos = 0;
        while pos < self.d {
            let len = self.lengths[self.choice[pos] as usize] as usize;
            for t in 0..len {
                let from = self.word[pos + t];
                let to = self.word[pos + (t + 1) % len];
                out[from as usize] = to;
            }
            pos += len;
        }
    }

    /// Writes the next element into `out` without allocating.
    #[inline]
    pub fn next_into(&mut self, out: &mut [u8]) -> bool {
        if self.left == 0 {
            return false;
        }
        if self.primed {
            self.primed = false;
        } else if !self.advance() {
            self.left = 0;
            return false;
        }
        self.left -= 1;
        self.write_images(out);
        true
    }
}

impl Iterator for ClassIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let mut buf = vec![0u8; self.d];
        if self.next_into(&mut buf) {
            Some(Permutation { images: buf })
        } else {
            None
        }
    }
}

fn nth_unset(used: u64, n: u32, d: usize) -> u8 {
    let mut seen = 0;
    for q in 0..d {
        if used & (1 << q) == 0 {
            if seen == n {
                return q as u8;
            }
            seen += 1;
        }
    }
    unreachable!("rank out of range")
}

pub fn enumerate_class(cycle_type: &Partition) -> Result<ClassIter, PermError> {
    ClassIter::new(cycle_type)
}
