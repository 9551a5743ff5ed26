//! Induce edit rules from (form, lemma) pairs and lemmatize new forms.

use lacuna::corpus::parse_conllu;
use lacuna::lemma::{induce_rule, train_lemmatizer, TrainMode};

fn main() {
    // Rule induction on its own: anchor on the longest shared substring,
    // rewrite the prefix and suffix around it.
    for (form, lemma) in [("ambulavit", "ambulare"), ("dixit", "dico"), ("est", "sum")] {
        let rule = induce_rule(form, lemma).unwrap();
        println!("{form} -> {lemma}:  {}", rule.label());
    }

    // A miniature treebank; only FORM and LEMMA matter here.
    let text = "\
1\tcantavit\tcantare\t_\t_\t_\t_\t_\t_\t_
2\tportavit\tportare\t_\t_\t_\t_\t_\t_\t_
3\tamavit\tamare\t_\t_\t_\t_\t_\t_\t_
4\tpuella\tpuella\t_\t_\t_\t_\t_\t_\t_
5\tpuellam\tpuella\t_\t_\t_\t_\t_\t_\t_

";
    let corpus = parse_conllu(text).unwrap();
    let model = train_lemmatizer(&corpus, TrainMode::Rules).unwrap();

    // "laudavit" was never seen; the -avit suffix rule generalizes to it.
    println!();
    for form in ["cantavit", "laudavit", "puellam", "ignotum"] {
        println!("{form} -> {}", model.predict_form(form));
    }

    // Languages without inflection skip rules entirely and memorize
    // form -> lemma pairs.
    let dict_text = "1\t道\t道\t_\t_\t_\t_\t_\t_\t_\n\n";
    let dict_corpus = parse_conllu(dict_text).unwrap();
    let dict = train_lemmatizer(&dict_corpus, TrainMode::Dictionary).unwrap();
    println!("\ndictionary mode: 道 -> {}", dict.predict_form("道"));
}
