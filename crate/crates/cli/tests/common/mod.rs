#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simpeval_core::backends::{fixture_record, SyntheticBackend};
use simpeval_core::embed::bertscore;
use simpeval_core::questeval::{questeval_score, QuestEvalBackends, QuestEvalConfig};
use simpeval_core::{Instance, Origin};

pub const ROSTOV_SOURCE: &str = "In the Soviet years, the Bolsheviks demolished two of Rostov's principal \
landmarks- St Alexander Nevsky cathedral (1908) and St George cathedral in Nakhichevan (1783-1807).";
pub const ROSTOV_SIMPLIFICATION: &str =
    "The Bolsheviks destroyed St. Alexander Nevsky cathedral and \
St. George cathedral in Nakhichevan during the Soviet years.";

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simpeval"))
}

pub fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("SIMPEVAL_BACKEND_URL")
        .output()
        .expect("spawn simpeval")
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn rostov_store() -> PathBuf {
    workspace_root().join("fixtures/rostov_audit.json")
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

const WORDS: [&str; 24] = [
    "the", "old", "river", "flows", "north", "through", "quiet", "valley", "village", "people",
    "built", "bridge", "across", "water", "during", "winter", "many", "years", "ago", "small",
    "farmers", "crossed", "often", "there",
];

fn sentence(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let len = rng.random_range(min..=max);
    let mut words: Vec<&str> = (0..len)
        .map(|_| WORDS[rng.random_range(0..WORDS.len())])
        .collect();
    let mut s = words.remove(0).to_string();
    for w in words {
        s.push(' ');
        s.push_str(w);
    }
    s.push('.');
    let mut chars = s.chars();
    let first = chars.next().unwrap().to_uppercase().collect::<String>();
    first + chars.as_str()
}

/// Deterministic corpus of `n` instances with two references each.
pub fn synthetic_instances(n: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| Instance {
            id: format!("inst{i:03}"),
            source: sentence(&mut rng, 10, 18),
            candidate: sentence(&mut rng, 5, 10),
            references: vec![sentence(&mut rng, 5, 10), sentence(&mut rng, 5, 10)],
            origin: if i % 2 == 0 {
                Origin::System
            } else {
                Origin::Human
            },
        })
        .collect()
}

/// Likert ratings from three annotators per instance and dimension.
pub fn synthetic_ratings(instances: &[Instance], seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for inst in instances {
        for dim in ["fluency", "simplicity", "meaning"] {
            for a in 0..3 {
                let score = rng.random_range(1..=5);
                out.push_str(&format!(
                    "{{\"instance_id\":\"{}\",\"dimension\":\"{dim}\",\"annotator_id\":\"w{a}\",\"score\":{score}}}\n",
                    inst.id
                ));
            }
        }
    }
    out
}

pub fn write_instances(path: &Path, instances: &[Instance]) {
    let text: String = instances.iter().map(|i| i.to_json_line() + "\n").collect();
    std::fs::write(path, text).unwrap();
}

/// Records every backend exchange the default BERTScore and QuestEval
/// settings make for `instances`.
pub fn record_synthetic_fixtures(instances: &[Instance], store: &Path) {
    let recorder = fixture_record(SyntheticBackend, store).unwrap();
    let config = QuestEvalConfig::default();
    for inst in instances {
        bertscore(&inst.candidate, &inst.references, &recorder).unwrap();
        questeval_score(
            &inst.source,
            &inst.candidate,
            &config,
            QuestEvalBackends::single(&recorder),
        )
        .unwrap();
    }
}
