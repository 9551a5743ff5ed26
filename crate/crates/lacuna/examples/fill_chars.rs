//! Restore single lost characters, marked [_] in damaged text.
//!
//! Candidates come from a frequency vocabulary bucketed by word length,
//! so only words of exactly the damaged length are scanned. When no word
//! fits a one-gap pattern, the gap is re-read as a lost space splitting
//! two shorter words.

use lacuna::charfill::{
    build_candidate_vocab, fill_masked_word, fill_sentence_chars, supports_language, MaskedWord,
};

fn main() {
    let vocab = build_candidate_vocab([
        "senatus populusque romanus",
        "senatus consultum",
        "populus romanus est",
        "in senatu",
    ]);

    for damaged in ["sen[_]tus", "p[_]pul[_]s", "roman[_]s"] {
        let pattern = MaskedWord::parse(damaged).unwrap();
        let result = fill_masked_word(&vocab, &pattern);
        println!("{damaged}");
        for (word, filled) in result.matches.iter().zip(&result.replacements) {
            println!("  {word}  (lost: {filled:?})");
        }
    }

    // No 9-letter word matches "senatus[_]n", but dropping a space gives
    // two known words.
    let pattern = MaskedWord::parse("senatus[_]in").unwrap();
    let result = fill_masked_word(&vocab, &pattern);
    println!("senatus[_]in");
    println!("  {:?} (split reading: {})", result.matches, result.used_split);

    // Whole lines: words without gaps and all whitespace pass through,
    // unresolvable gaps stay marked.
    let line = "senatus consul[_]um  populusq[_]e  xyzzy[_]";
    println!("\n{line}\n{}", fill_sentence_chars(&vocab, line));

    // Character restoration is meaningless where every glyph is a word.
    println!("\nsupported for lzh: {}", supports_language("lzh"));
}
