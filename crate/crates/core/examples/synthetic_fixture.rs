//! Prints a synthetic corpus as raw input JSON lines.
//!
//! The CLI test fixture was produced with
//! `cargo run -p keyphrase-core --example synthetic_fixture -- 64 11`.

use keyphrase_core::synthetic::{generate, SyntheticConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let documents = args.next().and_then(|a| a.parse().ok()).unwrap_or(64);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(11);
    let corpus = generate(&SyntheticConfig {
        documents,
        seed,
        plant_oov: true,
        ..SyntheticConfig::default()
    });
    for r in corpus.raw_records() {
        let line = serde_json::json!({
            "title": r.title,
            "abstract": r.abstract_text,
            "keywords": r.keyphrases.join(";"),
        });
        println!("{line}");
    }
}
