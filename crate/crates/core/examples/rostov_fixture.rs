//! Writes the replay store behind the worked QuestEval audit example.
//!
//! The store answers exactly the requests the pipeline makes for the source
//! and simplification below with questions generated from the source. Answer
//! embeddings are small hand-built vectors whose greedy-match F1 values are
//! 0.89 and 0.82.
//!
//! Usage: cargo run -p simpeval-core --example rostov_fixture -- fixtures/rostov_audit.json

use std::path::PathBuf;

use simpeval_core::backends::{BackendRequest, BackendResponse, FixtureStore, QaAnswer};
use simpeval_core::embed::TokenEmbeddings;

pub const SOURCE: &str = "In the Soviet years, the Bolsheviks demolished two of Rostov's principal \
landmarks- St Alexander Nevsky cathedral (1908) and St George cathedral in Nakhichevan (1783-1807).";
pub const SIMPLIFICATION: &str = "The Bolsheviks destroyed St. Alexander Nevsky cathedral and \
St. George cathedral in Nakhichevan during the Soviet years.";

const DIM: usize = 5;

/// Unit vector with cosine `c` to axis `along`, the remainder on axis `spill`.
fn tilted(along: usize, c: f64, spill: usize) -> Vec<f64> {
    let mut v = vec![0.0; DIM];
    v[along] = c;
    v[spill] = (1.0 - c * c).sqrt();
    v
}

fn axis(i: usize) -> Vec<f64> {
    let mut v = vec![0.0; DIM];
    v[i] = 1.0;
    v
}

fn embedding(tokens: &[&str], vectors: Vec<Vec<f64>>) -> BackendResponse {
    let e = TokenEmbeddings::new(tokens.iter().map(|t| t.to_string()).collect(), vectors)
        .expect("valid embedding");
    BackendResponse::Embed {
        embeddings: vec![e],
    }
}

fn main() {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixtures/rostov_audit.json"));

    let probes: [(&str, Option<&str>, Option<&str>); 4] = [
        (
            "When did the Bolsheviks demolish St George cathedral?",
            Some("the Soviet years"),
            Some("Soviet years"),
        ),
        (
            "Who demolished St Alexander Nevsky cathedral?",
            Some("demolished"),
            Some("destroyed"),
        ),
        (
            "How many of Rostov's main landmarks were demolished?",
            Some("two"),
            None,
        ),
        (
            "What cathedral was demolished in 1908?",
            Some("Rostov"),
            None,
        ),
    ];

    let mut store = FixtureStore::new();
    store.insert(
        BackendRequest::qg(SOURCE, 10),
        BackendResponse::Qg {
            questions: probes.iter().map(|p| p.0.to_string()).collect(),
        },
    );
    let answer = |a: Option<&str>| match a {
        Some(text) => QaAnswer::answered(text),
        None => QaAnswer::unanswerable(),
    };
    for (question, on_source, on_simplification) in probes {
        store.insert(
            BackendRequest::qa(question, SOURCE),
            BackendResponse::Qa(answer(on_source)),
        );
        store.insert(
            BackendRequest::qa(question, SIMPLIFICATION),
            BackendResponse::Qa(answer(on_simplification)),
        );
    }

    // precision (0.89 + 0.95 + 0.83) / 3 and recall (0.95 + 0.83) / 2 are both 0.89
    store.insert(
        BackendRequest::embed(["Soviet years"]),
        embedding(&["soviet", "years"], vec![axis(0), axis(1)]),
    );
    store.insert(
        BackendRequest::embed(["the Soviet years"]),
        embedding(
            &["the", "soviet", "years"],
            vec![tilted(0, 0.89, 4), tilted(0, 0.95, 2), tilted(1, 0.83, 3)],
        ),
    );
    store.insert(
        BackendRequest::embed(["demolished"]),
        embedding(&["demolished"], vec![axis(0)]),
    );
    store.insert(
        BackendRequest::embed(["destroyed"]),
        embedding(&["destroyed"], vec![tilted(0, 0.82, 1)]),
    );

    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).expect("create fixture directory");
    }
    store.save(&out).expect("write fixture store");
    println!("wrote {} entries to {}", store.len(), out.display());
}
