//! Restore whole lost words, marked <mask>, with an n-gram scorer.
//!
//! The decoder asks the scorer for a distribution at each mask, commits
//! the best word-initial piece, then look-ahead steps extend the word
//! piece by piece until the best continuation would start a new word.

use lacuna::subword::{train_tokenizer, TokenizerConfig};
use lacuna::wordfill::{fill_word_masks, train_ngram_scorer, DecoderConfig, DEFAULT_ALPHA};

fn main() {
    let lines = [
        "puella in horto cantat",
        "puella in horto ridet",
        "servus in agro laborat",
        "puella cantat",
        "servus laborat",
    ];

    let model = train_tokenizer(lines, &TokenizerConfig { vocab_size: 50 }).unwrap();
    let sequences: Vec<Vec<u32>> = lines.iter().map(|l| model.encode(l)).collect();
    let scorer = train_ngram_scorer(&sequences, 3, DEFAULT_ALPHA, model.vocab_size()).unwrap();

    let config = DecoderConfig::default();
    for damaged in [
        "puella in <mask> cantat",
        "<mask> in agro laborat",
        "puella <mask> <mask> ridet",
    ] {
        let restored = fill_word_masks(&scorer, &model, damaged, &config).unwrap();
        println!("{damaged}");
        println!("  -> {restored}");
    }

    // More look-ahead lets one mask grow into a longer word; k = 0
    // commits exactly one piece per mask.
    let flat = DecoderConfig { k: 0, ..config };
    let restored = fill_word_masks(&scorer, &model, "servus in agro <mask>", &flat).unwrap();
    println!("k=0: servus in agro <mask> -> {restored}");
}
