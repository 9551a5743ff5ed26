//! Tag part of speech and morphology as one combined label.
//!
//! A label is the UPOS joined with the feature set, e.g.
//! "VERB|Number=Sing|Person=3". Prediction backs off from the exact form
//! through its suffixes to the corpus-wide most frequent label.

use lacuna::corpus::parse_conllu;
use lacuna::morphotag::{decompose_label, train_tagger};

const TRAIN: &str = "\
1\tpuella\tpuella\tNOUN\t_\tCase=Nom|Gender=Fem|Number=Sing\t_\t_\t_\t_
2\tcantat\tcanto\tVERB\t_\tMood=Ind|Number=Sing|Person=3\t_\t_\t_\t_

1\tserva\tserva\tNOUN\t_\tCase=Nom|Gender=Fem|Number=Sing\t_\t_\t_\t_
2\tportat\tporto\tVERB\t_\tMood=Ind|Number=Sing|Person=3\t_\t_\t_\t_

1\tet\tet\tCCONJ\t_\t_\t_\t_\t_\t_
2\tpuella\tpuella\tNOUN\t_\tCase=Nom|Gender=Fem|Number=Sing\t_\t_\t_\t_
3\tridet\trideo\tVERB\t_\tMood=Ind|Number=Sing|Person=3\t_\t_\t_\t_

";

fn main() {
    let corpus = parse_conllu(TRAIN).unwrap();
    let tagger = train_tagger(&corpus).unwrap();

    // "laborat" is unseen; the -at suffix carries it to VERB.
    for form in ["puella", "laborat", "xyz"] {
        let label = tagger.predict_label(form);
        let parsed = decompose_label(label).unwrap();
        println!("{form:<8} {label}");
        println!("         upos {}, {} features", parsed.upos, parsed.feats.len());
    }

    // Tag a whole treebank in place and print the annotated column.
    let mut test = parse_conllu(
        "1\tpuella\t_\t_\t_\t_\t_\t_\t_\t_\n2\tcantat\t_\t_\t_\t_\t_\t_\t_\t_\n\n",
    )
    .unwrap();
    tagger.annotate_corpus(&mut test).unwrap();
    for token in test.words() {
        println!("{}\t{}\t{:?}", token.form, token.upos, token.feats);
    }
}
