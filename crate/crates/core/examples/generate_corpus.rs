//! Generate a small synthetic corpus and check its answer key against the
//! files. Pass an output directory, or a temporary one is used.

use std::collections::BTreeMap;

use midib_deid::corpus::{generate, self_validate, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let out = std::env::args().nth(1).map_or_else(|| tmp.path().to_path_buf(), Into::into);

    let spec = CorpusSpec { n_patients: 8, seed: 7, ..CorpusSpec::default() };
    let corpus = generate(&spec, &out)?;
    println!("{} files, {} key entries, {} burned-in boxes", corpus.files, corpus.key.len(), corpus.regions.len());

    let mut per_action = BTreeMap::new();
    for e in corpus.key.entries() {
        *per_action.entry(e.action.as_str()).or_insert(0) += 1;
    }
    for (action, n) in per_action {
        println!("  {action:<16} {n}");
    }
    println!("self-validation mismatches: {}", self_validate(&out, &corpus.key)?.len());
    Ok(())
}
