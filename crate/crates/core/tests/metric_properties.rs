use std::time::Instant;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simpeval_core::backends::SyntheticBackend;
use simpeval_core::embed::{bertscore, greedy_match, TokenEmbeddings};
use simpeval_core::lexical::{bleu, fkgl_from_counts, sari};

const VOCAB: [&str; 12] = [
    "the", "a", "cat", "sat", "on", "mat", "river", "flows", "north", ",", ".", "quickly",
];

fn sentence(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let len = rng.random_range(min..=max);
    (0..len)
        .map(|_| VOCAB[rng.random_range(0..VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn bounds_identities_and_permutation_over_random_instances() {
    let started = Instant::now();
    let backend = SyntheticBackend;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let source = sentence(&mut rng, 1, 14);
        let cand = sentence(&mut rng, 1, 14);
        let k = rng.random_range(1..=4);
        let refs: Vec<String> = (0..k).map(|_| sentence(&mut rng, 1, 14)).collect();
        let mut shuffled = refs.clone();
        shuffled.shuffle(&mut rng);

        let b = bleu(&cand, &refs).unwrap().value;
        assert!((0.0..=1.0).contains(&b));
        assert_eq!(b, bleu(&cand, &shuffled).unwrap().value);
        assert_eq!(bleu(&refs[0], &refs).unwrap().value, 1.0);
        let mut dup = refs.clone();
        dup.push(refs[rng.random_range(0..refs.len())].clone());
        assert_eq!(b, bleu(&cand, &dup).unwrap().value);

        let s = sari(&source, &cand, &refs).unwrap().value;
        assert!((0.0..=100.0).contains(&s));
        assert!((s - sari(&source, &cand, &shuffled).unwrap().value).abs() < 1e-9);
        assert_eq!(
            sari(&source, &source, std::slice::from_ref(&source))
                .unwrap()
                .value,
            100.0
        );

        let f = bertscore(&cand, &refs, &backend).unwrap().value;
        assert!((0.0..=1.0).contains(&f));
        assert_eq!(f, bertscore(&cand, &shuffled, &backend).unwrap().value);
        assert_eq!(bertscore(&refs[0], &refs, &backend).unwrap().value, 1.0);
    }
    assert!(started.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn fkgl_monotone_in_each_ratio() {
    // 20 words, 30 syllables; halving sentences raises words per sentence
    assert!(fkgl_from_counts(20, 2, 30) > fkgl_from_counts(20, 4, 30));
    assert!(fkgl_from_counts(20, 2, 40) > fkgl_from_counts(20, 2, 30));
}

fn embeddings(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> TokenEmbeddings {
    let vectors: Vec<Vec<f64>> = (0..len)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            if v.iter().any(|x| *x != 0.0) {
                break v;
            }
        })
        .collect();
    TokenEmbeddings::new((0..len).map(|i| format!("t{i}")).collect(), vectors).unwrap()
}

fn brute_cos(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
}

fn brute_precision(c: &TokenEmbeddings, r: &TokenEmbeddings) -> f64 {
    let mut total = 0.0;
    for x in c.vectors() {
        let mut best = 0.0f64;
        for y in r.vectors() {
            best = best.max(brute_cos(x, y));
        }
        total += best;
    }
    total / c.len() as f64
}

#[test]
fn greedy_match_equals_brute_force_scorer() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let dim = rng.random_range(2..=4);
        let c = {
            let len = rng.random_range(1..=6);
            embeddings(&mut rng, len, dim)
        };
        let r = {
            let len = rng.random_range(1..=6);
            embeddings(&mut rng, len, dim)
        };
        let got = greedy_match(&c, &r).unwrap();
        let p = brute_precision(&c, &r);
        let rc = brute_precision(&r, &c);
        let f = if p + rc > 0.0 {
            2.0 * p * rc / (p + rc)
        } else {
            0.0
        };
        assert!((got.precision - p).abs() < 1e-12);
        assert!((got.recall - rc).abs() < 1e-12);
        assert!((got.f1 - f).abs() < 1e-12);
        let swapped = greedy_match(&r, &c).unwrap();
        assert_eq!(got.precision, swapped.recall);
    }
}

#[test]
fn appending_a_well_matched_token_never_lowers_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let c = {
            let len = rng.random_range(1..=5);
            embeddings(&mut rng, len, 3)
        };
        let r = {
            let len = rng.random_range(1..=5);
            embeddings(&mut rng, len, 3)
        };
        let before = greedy_match(&c, &r).unwrap().precision;
        // a copy of a reference vector has max cosine 1 >= any precision
        let mut tokens = c.tokens().to_vec();
        let mut vectors = c.vectors().to_vec();
        tokens.push("extra".into());
        vectors.push(r.vectors()[rng.random_range(0..r.len())].clone());
        let grown = TokenEmbeddings::new(tokens, vectors).unwrap();
        let after = greedy_match(&grown, &r).unwrap().precision;
        assert!(after >= before - 1e-15, "{after} < {before}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sari_identity_is_perfect(words in prop::collection::vec("[a-z]{1,6}", 1..12)) {
        let s = words.join(" ");
        prop_assert_eq!(sari(&s, &s, std::slice::from_ref(&s)).unwrap().value, 100.0);
    }

    #[test]
    fn bleu_exact_match_with_any_reference(
        a in prop::collection::vec("[a-z]{1,5}", 1..10),
        b in prop::collection::vec("[a-z]{1,5}", 1..10),
    ) {
        let a = a.join(" ");
        let b = b.join(" ");
        prop_assert_eq!(bleu(&b, &[a.clone(), b.clone()]).unwrap().value, 1.0);
    }
}
