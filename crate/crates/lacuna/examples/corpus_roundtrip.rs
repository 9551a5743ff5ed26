//! Parse a CoNLL-U fragment, poke at it, and write it back unchanged.

use lacuna::corpus::{language_info, parse_conllu, serialize_conllu, Element, LANGUAGES};

const SAMPLE: &str = "\
# sent_id = demo-1
# text = Arma virumque cano.
1\tArma\tarma\tNOUN\t_\tCase=Acc|Gender=Neut|Number=Plur\t4\tobj\t_\t_
2-3\tvirumque\t_\t_\t_\t_\t_\t_\t_\t_
2\tvirum\tvir\tNOUN\t_\tCase=Acc|Gender=Masc|Number=Sing\t4\tobj\t_\t_
3\tque\tque\tCCONJ\t_\t_\t2\tcc\t_\t_
4\tcano\tcano\tVERB\t_\tMood=Ind|Number=Sing|Person=1|Tense=Pres|VerbForm=Fin|Voice=Act\t0\troot\t_\tSpaceAfter=No
5\t.\t.\tPUNCT\t_\t_\t4\tpunct\t_\t_

";

fn main() {
    let corpus = parse_conllu(SAMPLE).expect("well-formed sample");

    for sentence in &corpus.sentences {
        for comment in &sentence.comments {
            println!("{comment}");
        }
        for element in &sentence.elements {
            match element {
                Element::Word(token) => {
                    println!("  {}\t{}\t{} -> {}", token.id, token.upos, token.form, token.lemma)
                }
                Element::Passthrough(raw) => {
                    let id = raw.split('\t').next().unwrap();
                    println!("  (kept verbatim: {id})");
                }
            }
        }
    }

    // The range line, the feature order, every tab: all preserved.
    let back = serialize_conllu(&corpus);
    assert_eq!(back, SAMPLE);
    println!("\nround trip: byte identical");

    println!("\nlanguage registry ({} entries):", LANGUAGES.len());
    let lat = language_info("lat").unwrap();
    println!("  lat: {}, {} training sentences", lat.name, lat.train_sentences);
    let sga = language_info("sga").unwrap();
    println!("  sga: {}, gap-fill only: {}", sga.name, sga.gap_fill_only);
}
