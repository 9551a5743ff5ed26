//! Train a subword vocabulary from raw lines, then encode and decode.
//!
//! Training starts from single characters plus their word-initial
//! variants and greedily merges the most frequent adjacent pair until
//! the vocabulary cap is hit. Encoding is maximal munch: the longest
//! known piece wins at every position.

use lacuna::subword::{train_tokenizer, SubwordModel, TokenizerConfig};

fn main() {
    let lines = [
        "puella cantat",
        "puella in horto cantat",
        "servi in horto laborant",
        "servi laborant",
        "puella cantat et servi laborant",
    ];

    let config = TokenizerConfig { vocab_size: 40 };
    let model = train_tokenizer(lines, &config).expect("enough data to merge");
    println!("vocabulary ({} pieces):", model.vocab_size());
    let pieces: Vec<&str> = model.pieces().map(|(_, p)| p).collect();
    println!("  {}", pieces.join(" "));

    for text in ["puella cantat", "pueri cantant"] {
        let ids = model.encode(text);
        let shown: Vec<&str> = ids.iter().map(|&id| model.piece(id).unwrap()).collect();
        println!("\n{text:?} -> {shown:?}");
        println!("  decoded: {:?}", model.decode(&ids).unwrap());
    }

    // Models reload from JSON exactly.
    let reloaded = SubwordModel::from_json(&model.to_json()).unwrap();
    assert_eq!(reloaded.encode("puella cantat"), model.encode("puella cantat"));

    // The per-language cap: Classical Chinese gets a larger budget.
    println!("\ndefault cap: {}", TokenizerConfig::default().vocab_size);
    println!("lzh cap:     {}", TokenizerConfig::for_language("lzh").vocab_size);
}
