//! Dessins d'enfant stored as two rotations on the edge set.
//!
//! Edges are the points `1..E`. The black rotation `σb` cycles the edges
//! around each black vertex, `σw` around each white vertex, and the faces are
//! the cycles of `(σb σw)⁻¹`, so the three permutations multiply to the
//! identity.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::datum::{BranchDatum, DatumError, Partition, Surface};
use crate::oracle::{self, Answer, OracleError, Realization, SearchBudget};
use crate::perm::{is_transitive, PermError, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DessinError {
    #[error("rotations do not generate a transitive group")]
    NotConnected,
    #[error("dessins describe three-point data, got {0} partitions")]
    WrongArity(usize),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Datum(#[from] DatumError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("syntax error: {0}")]
    Syntax(String),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Dessin {
    black: Permutation,
    white: Permutation,
}

impl Dessin {
    pub fn from_triple(black: Permutation, white: Permutation) -> Result<Dessin, DessinError> {
        if black.degree() != white.degree() {
            return Err(PermError::DegreeMismatch(black.degree(), white.degree()).into());
        }
        if !is_transitive(&[black.clone(), white.clone()]) {
            return Err(DessinError::NotConnected);
        }
        Ok(Dessin { black, white })
    }

    pub fn edge_count(&self) -> usize {
        self.black.degree()
    }

    pub fn black(&self) -> &Permutation {
        &self.black
    }

    pub fn white(&self) -> &Permutation {
        &self.white
    }

    pub fn faces(&self) -> Permutation {
        self.black.compose(&self.white).expect("same degree").inverse()
    }

    pub fn black_valences(&self) -> Partition {
        self.black.cycle_type()
    }

    pub fn white_valences(&self) -> Partition {
        self.white.cycle_type()
    }

    pub fn face_lengths(&self) -> Partition {
        self.faces().cycle_type()
    }

    /// `V - E + F`, counting black and white vertices.
    pub fn euler_characteristic(&self) -> i64 {
        (self.black.cycle_count() + self.white.cycle_count() + self.faces().cycle_count()) as i64
            - self.edge_count() as i64
    }

    pub fn genus(&self) -> u32 {
        let chi = self.euler_characteristic();
        debug_assert!(chi <= 2 && chi % 2 == 0);
        ((2 - chi) / 2) as u32
    }

    /// The three-point sphere datum read off from valences and faces.
    pub fn to_datum(&self) -> Result<BranchDatum, DessinError> {
        let datum = BranchDatum::validate(
            self.genus(),
            Surface::SPHERE,
            self.edge_count() as u32,
            vec![self.black_valences(), self.white_valences(), self.face_lengths()],
        )?;
        Ok(datum)
    }
}

impl fmt::Display for Dessin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E={} b={} w={}", self.edge_count(), self.black, self.white)
    }
}

impl fmt::Debug for Dessin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dessin {
    type Err = DessinError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let field = |key: &str| -> Result<&str, DessinError> {
            let start = s
                .find(key)
                .ok_or_else(|| DessinError::Syntax(format!("missing {key}")))?
                + key.len();
            let rest = &s[start..];
            let end = [" b=", " w="]
                .iter()
                .filter_map(|k| rest.find(k))
                .min()
                .unwrap_or(rest.len());
            Ok(rest[..end].trim())
        };
        let e: usize = field("E=")?
            .parse()
            .map_err(|_| DessinError::Syntax("bad edge count".into()))?;
        let black = Permutation::parse_cycles(field("b=")?, e)?;
        let white = Permutation::parse_cycles(field("w=")?, e)?;
        Dessin::from_triple(black, white)
    }
}

/// Decides a three-point sphere datum by looking for a dessin with the given
/// valences and face lengths. The dessin comes from an oracle witness, and
/// the result is checked against the datum before it is returned.
pub fn realizable_via_dessins(
    datum: &BranchDatum,
    budget: &SearchBudget,
) -> Result<(Answer, Option<Dessin>), DessinError> {
    if datum.n() > 3 {
        return Err(DessinError::WrongArity(datum.n()));
    }
    let d = datum.degree() as usize;
    match oracle::realize(datum, budget)? {
        Realization::Found(w) => {
            let mut theta = w.theta;
            while theta.len() < 3 {
                theta.push(Permutation::identity(d));
            }
            let dessin = Dessin::from_triple(theta[0].clone(), theta[1].clone())?;
            let back = dessin.to_datum()?;
            assert_eq!(&back, datum, "dessin does not reproduce the datum");
            Ok((Answer::Yes, Some(dessin)))
        }
        Realization::NotRealizable => Ok((Answer::No, None)),
        Realization::BudgetExceeded => Ok((Answer::Unknown, None)),
    }
}
