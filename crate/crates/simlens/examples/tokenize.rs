//! Tokenize a bundled fixture and print each token with its byte span.
//!
//! Run with: cargo run --example tokenize

use simlens::embedder::{load_backend, BackendConfig};
use simlens::report::fixture;

fn main() -> simlens::Result<()> {
    let fragment = fixture("bubble_sort").expect("bundled fixture");
    let backend = load_backend(&BackendConfig::stub(7))?;
    let seq = backend.tokenize(&fragment)?;

    println!("{}: {} tokens ({} code)", fragment.id, seq.len(), seq.code_token_indices().len());
    for token in &seq.tokens {
        let kind = if token.is_special { "special" } else { "code" };
        println!(
            "{:>4}  {:>7}  [{:>3}, {:>3})  {:?}",
            token.token_id, kind, token.char_span.0, token.char_span.1, token.surface
        );
    }
    Ok(())
}
