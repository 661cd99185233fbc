//! WebAssembly bindings for the static page in `www/`.
//!
//! Every entry point takes text and returns a JSON string; errors come back
//! as `{"error": "..."}` so the page has a single code path.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use hurwitz_core::classifier::{classify, VerdictReport};
use hurwitz_core::datum::parse_datum;
use hurwitz_core::dessin::Dessin;
use hurwitz_core::oracle::{self, Realization, SearchBudget};

/// Node limit for searches started from the page. Runs on the UI thread, so
/// it stays well below the command-line default.
pub const PAGE_NODES: u64 = 5_000_000;

#[derive(Serialize)]
struct Failure {
    error: String,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn failure(message: impl ToString) -> String {
    to_json(&Failure {
        error: message.to_string(),
    })
}

fn budget(max_nodes: u32) -> SearchBudget {
    SearchBudget::nodes(if max_nodes == 0 { PAGE_NODES } else { max_nodes as u64 })
}

/// Verdict for a datum line such as `g1/S d=6 3,3 3,3 4,2`.
#[wasm_bindgen]
pub fn classify_datum(line: &str, max_nodes: u32) -> String {
    match parse_datum(line) {
        Ok(datum) => to_json(&VerdictReport::new(&datum, &classify(&datum, Some(&budget(max_nodes))))),
        Err(e) => failure(e),
    }
}

#[derive(Serialize)]
struct Realized {
    datum: String,
    result: &'static str,
    witness: Vec<String>,
    nodes: u64,
}

/// Monodromy search with its witness in cycle notation.
#[wasm_bindgen]
pub fn realize_datum(line: &str, max_nodes: u32) -> String {
    let datum = match parse_datum(line) {
        Ok(d) => d,
        Err(e) => return failure(e),
    };
    match oracle::realize_counted(&datum, &budget(max_nodes)) {
        Ok((r, nodes)) => {
            let (result, witness) = match r {
                Realization::Found(w) => ("realizable", w.to_lines()),
                Realization::NotRealizable => ("not-realizable", Vec::new()),
                Realization::BudgetExceeded => ("budget-exceeded", Vec::new()),
            };
            to_json(&Realized {
                datum: datum.to_line(),
                result,
                witness,
                nodes,
            })
        }
        Err(e) => failure(e),
    }
}

#[derive(Serialize)]
struct DessinInfo {
    dessin: String,
    black: String,
    white: String,
    faces: String,
    genus: u32,
    datum: String,
}

/// Valences, faces and genus of a dessin given as `E=4 b=(1 2)(3 4) w=(2 3)`.
#[wasm_bindgen]
pub fn dessin_genus(text: &str) -> String {
    let dessin: Dessin = match text.parse() {
        Ok(d) => d,
        Err(e) => return failure(e),
    };
    match dessin.to_datum() {
        Ok(datum) => to_json(&DessinInfo {
            dessin: dessin.to_string(),
            black: dessin.black_valences().to_string(),
            white: dessin.white_valences().to_string(),
            faces: dessin.face_lengths().to_string(),
            genus: dessin.genus(),
            datum: datum.to_line(),
        }),
        Err(e) => failure(e),
    }
}
