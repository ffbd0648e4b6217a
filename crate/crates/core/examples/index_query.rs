//! Build a positional index over a few sentences and list the gap windows
//! joining two words.

use pairclass::CorpusIndex;

fn main() -> pairclass::Result<()> {
    let index = CorpusIndex::from_documents(&[
        "The mason cut the stone with a chisel.",
        "Stones were cut by a mason in the old quarry.",
        "A carpenter cut the wood.",
    ]);
    println!(
        "{} documents, {} tokens, {} types, fingerprint {}",
        index.num_documents(),
        index.total_tokens(),
        index.vocabulary_size(),
        index.fingerprint()
    );
    for w in index.query_windows("mason", "stone")? {
        println!("doc {} @{:<2} {:?} {}", w.doc, w.start, w.order, w.tokens.join(" "));
    }
    Ok(())
}
