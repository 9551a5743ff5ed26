//! Carry embedding rows over to a retrained vocabulary.
//!
//! After retraining a tokenizer for a poorly covered language, pieces
//! shared with the old vocabulary keep their trained rows bit for bit;
//! only the genuinely new pieces start fresh.

use lacuna::embedding::{transfer_embeddings, EmbeddingMatrix, InitPolicy};
use lacuna::subword::{train_tokenizer, TokenizerConfig};

fn main() {
    let old = train_tokenizer(["ab ab", "cd"], &TokenizerConfig { vocab_size: 14 }).unwrap();
    let new = train_tokenizer(["ab ab", "ef"], &TokenizerConfig { vocab_size: 14 }).unwrap();

    // A toy trained matrix: every old piece has a 4-dimensional row.
    let mut matrix = EmbeddingMatrix::new(4);
    for (id, piece) in old.pieces() {
        let x = id as f32;
        matrix.rows.insert(piece.to_string(), vec![x, x / 2.0, -x, 1.0]);
    }

    let policy = InitPolicy::Gaussian { sigma: InitPolicy::DEFAULT_SIGMA, seed: 42 };
    let moved = transfer_embeddings(&old, &matrix, &new, policy).unwrap();

    for (_, piece) in new.pieces() {
        let row = &moved.rows[piece];
        let origin = if matrix.rows.get(piece).is_some_and(|r| r == row) {
            "kept"
        } else {
            "initialized"
        };
        println!("{piece:<8} {origin:>12}  {row:?}");
    }

    // The same seed always draws the same rows.
    let again = transfer_embeddings(&old, &matrix, &new, policy).unwrap();
    assert_eq!(moved, again);
    println!("\ntransfer is deterministic");
}
