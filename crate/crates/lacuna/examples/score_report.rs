//! Score predictions per task and print the summary table.

use lacuna::corpus::parse_conllu;
use lacuna::eval::{
    render_table, score_char_fill, score_lemma, score_pos, score_word_fill, EvalReport,
};

fn main() {
    let gold = parse_conllu(
        "1\tpuella\tpuella\tNOUN\t_\t_\t_\t_\t_\t_\n\
         2\tcantat\tcanto\tVERB\t_\t_\t_\t_\t_\t_\n\
         3\t.\t.\tPUNCT\t_\t_\t_\t_\t_\t_\n\n",
    )
    .unwrap();
    let pred = parse_conllu(
        "1\tpuella\tpuella\tNOUN\t_\t_\t_\t_\t_\t_\n\
         2\tcantat\tcantare\tVERB\t_\t_\t_\t_\t_\t_\n\
         3\t.\t.\tNOUN\t_\t_\t_\t_\t_\t_\n\n",
    )
    .unwrap();

    let pos = score_pos(&gold, &pred).unwrap();
    let lemma = score_lemma(&gold, &pred).unwrap();
    println!("pos:   {}/{}", pos.correct, pos.counted);
    println!("lemma: {}/{}", lemma.correct, lemma.counted);

    // Gap filling scores only the lost material, never the copied
    // context. The unresolved second gap counts as a wrong unit.
    let chars = score_char_fill(
        &["pu[_]lla ca[_]tat", "s[_]rvus"],
        &["puella cantat", "servus"],
        &["puella camtat", "s[_]rvus"],
    )
    .unwrap();
    println!("char_fill: {}/{}", chars.correct, chars.counted);

    let words = score_word_fill(
        &["puella <mask> cantat"],
        &["puella in cantat"],
        &["puella in cantat"],
    )
    .unwrap();
    println!("word_fill: {}/{}", words.correct, words.counted);

    let report = EvalReport {
        language: "lat".to_string(),
        scores: vec![pos, lemma, chars, words],
    };
    println!("\n{}", render_table(&[report.clone()]));
    println!("{}", report.to_json());
}
