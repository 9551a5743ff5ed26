//! Decide whether a language needs its own tokenizer.
//!
//! A shared multilingual vocabulary covers some historical languages
//! well and collapses on others. The policy flags a language when more
//! than 5% of its tokens come out unknown, or when the unknown piece
//! ranks among the ten most frequent pieces.

use lacuna::subword::{
    coverage_report, needs_custom_tokenizer, train_tokenizer, CoveragePolicy, TokenizerConfig,
};

fn main() {
    // Stand-in for a shared vocabulary: trained on Latin-like text only.
    let shared = train_tokenizer(
        ["puella cantat", "servi laborant", "in horto", "et tu"],
        &TokenizerConfig { vocab_size: 60 },
    )
    .unwrap();

    let policy = CoveragePolicy::default();
    let cases = [
        ("covered", vec!["puella cantat in horto", "servi laborant et tu"]),
        ("foreign script", vec!["πολλα ανθρωπος", "λογος και εργον"]),
    ];

    for (label, lines) in cases {
        let report = coverage_report(&shared, lines);
        let verdict = needs_custom_tokenizer(&report, &policy);
        println!("{label}:");
        println!("  tokens:        {}", report.total_tokens);
        println!("  unknown:       {:.2}%", 100.0 * report.unknown_fraction);
        match report.unk_rank {
            Some(rank) => println!("  unknown rank:  {rank}"),
            None => println!("  unknown rank:  none"),
        }
        println!("  needs custom tokenizer: {verdict}\n");
    }
}
