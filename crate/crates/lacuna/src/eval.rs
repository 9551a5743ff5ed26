//! Scoring predictions against gold annotation.
//!
//! Tagging and lemmatization are scored token by token over aligned
//! treebanks. Gap filling is scored unit by unit: a unit is one lost
//! character or one masked word, and only the lost material counts, not
//! the surrounding context the model merely copied. A per-language
//! summary averages the task accuracies without weighting.

use std::fmt;

use thiserror::Error;

use crate::charfill::{pattern_units, PatternUnit};
use crate::corpus::{Corpus, Element, TokenRecord};
use crate::subword::MASK_PIECE;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no {0} units to score")]
    NoUnits(Task),
    #[error("gold and prediction are misaligned: {0}")]
    Misaligned(String),
    #[error("no task scores to aggregate")]
    NoScores,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Pos,
    Feats,
    Lemma,
    CharFill,
    WordFill,
}

impl Task {
    /// Report order: tagging tasks first, then the gap-filling tasks.
    pub const ALL: [Task; 5] = [Task::Pos, Task::Lemma, Task::Feats, Task::CharFill, Task::WordFill];

    pub fn name(&self) -> &'static str {
        match self {
            Task::Pos => "pos",
            Task::Feats => "feats",
            Task::Lemma => "lemma",
            Task::CharFill => "char_fill",
            Task::WordFill => "word_fill",
        }
    }

    pub fn from_name(name: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Correct and counted units for one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskScore {
    pub task: Task,
    pub correct: u64,
    pub counted: u64,
}

impl TaskScore {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.counted as f64
    }
}

/// Rounds to two decimals, the resolution scores are reported at.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn zip_tokens<'a>(
    gold: &'a Corpus,
    pred: &'a Corpus,
) -> Result<Vec<(&'a TokenRecord, &'a TokenRecord)>, EvalError> {
    if gold.sentences.len() != pred.sentences.len() {
        return Err(EvalError::Misaligned(format!(
            "{} gold sentences vs {} predicted",
            gold.sentences.len(),
            pred.sentences.len()
        )));
    }
    let mut pairs = Vec::new();
    for (idx, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        let g_words: Vec<&TokenRecord> = g
            .elements
            .iter()
            .filter_map(|e| match e {
                Element::Word(t) => Some(t),
                Element::Passthrough(_) => None,
            })
            .collect();
        let p_words: Vec<&TokenRecord> = p
            .elements
            .iter()
            .filter_map(|e| match e {
                Element::Word(t) => Some(t),
                Element::Passthrough(_) => None,
            })
            .collect();
        if g_words.len() != p_words.len() {
            return Err(EvalError::Misaligned(format!(
                "sentence {}: {} gold tokens vs {} predicted",
                idx + 1,
                g_words.len(),
                p_words.len()
            )));
        }
        for (g_tok, p_tok) in g_words.into_iter().zip(p_words) {
            if g_tok.form != p_tok.form {
                return Err(EvalError::Misaligned(format!(
                    "sentence {}, token {}: form {:?} vs {:?}",
                    idx + 1,
                    g_tok.id,
                    g_tok.form,
                    p_tok.form
                )));
            }
            pairs.push((g_tok, p_tok));
        }
    }
    Ok(pairs)
}

fn score_tokens<F>(
    gold: &Corpus,
    pred: &Corpus,
    task: Task,
    matches: F,
) -> Result<TaskScore, EvalError>
where
    F: Fn(&TokenRecord, &TokenRecord) -> bool,
{
    let pairs = zip_tokens(gold, pred)?;
    if pairs.is_empty() {
        return Err(EvalError::NoUnits(task));
    }
    let correct = pairs.iter().filter(|(g, p)| matches(g, p)).count() as u64;
    Ok(TaskScore { task, correct, counted: pairs.len() as u64 })
}

/// Token accuracy of the part-of-speech column. Every token counts,
/// including ones where both sides are unannotated.
pub fn score_pos(gold: &Corpus, pred: &Corpus) -> Result<TaskScore, EvalError> {
    score_tokens(gold, pred, Task::Pos, |g, p| g.upos == p.upos)
}

/// Token accuracy of the morphological features, compared as unordered
/// name=value sets.
pub fn score_feats(gold: &Corpus, pred: &Corpus) -> Result<TaskScore, EvalError> {
    score_tokens(gold, pred, Task::Feats, |g, p| {
        let mut gf = g.feats.clone();
        let mut pf = p.feats.clone();
        gf.sort();
        pf.sort();
        gf == pf
    })
}

/// Token accuracy of the lemma column.
pub fn score_lemma(gold: &Corpus, pred: &Corpus) -> Result<TaskScore, EvalError> {
    score_tokens(gold, pred, Task::Lemma, |g, p| g.lemma == p.lemma)
}

/// Scores character gap filling. Lines align by index; within a line the
/// gap pattern of the damaged input is walked against the gold text and
/// the prediction. Each gap is one unit: correct when the predicted
/// character equals the lost one, wrong when it differs or the gap was
/// left unresolved. Untouched characters must agree on all three sides.
pub fn score_char_fill<A, B, C>(
    masked: &[A],
    gold: &[B],
    pred: &[C],
) -> Result<TaskScore, EvalError>
where
    A: AsRef<str>,
    B: AsRef<str>,
    C: AsRef<str>,
{
    if masked.len() != gold.len() || masked.len() != pred.len() {
        return Err(EvalError::Misaligned(format!(
            "{} damaged lines vs {} gold vs {} predicted",
            masked.len(),
            gold.len(),
            pred.len()
        )));
    }
    let mut correct = 0u64;
    let mut counted = 0u64;
    for (idx, ((m, g), p)) in masked.iter().zip(gold).zip(pred).enumerate() {
        let line = idx + 1;
        let mut gold_chars = g.as_ref().chars();
        let mut pred_units = pattern_units(p.as_ref()).into_iter();
        for unit in pattern_units(m.as_ref()) {
            let gold_char = gold_chars.next().ok_or_else(|| {
                EvalError::Misaligned(format!("line {line}: gold text is shorter than the input"))
            })?;
            match unit {
                PatternUnit::Literal(c) => {
                    if gold_char != c {
                        return Err(EvalError::Misaligned(format!(
                            "line {line}: input has {c:?} where gold has {gold_char:?}"
                        )));
                    }
                    match pred_units.next() {
                        Some(PatternUnit::Literal(pc)) if pc == c => {}
                        _ => {
                            return Err(EvalError::Misaligned(format!(
                                "line {line}: prediction altered an untouched character"
                            )));
                        }
                    }
                }
                PatternUnit::Gap => {
                    counted += 1;
                    match pred_units.next() {
                        Some(PatternUnit::Literal(pc)) => {
                            if pc == gold_char {
                                correct += 1;
                            }
                        }
                        // An unresolved gap stays a unit, scored wrong.
                        Some(PatternUnit::Gap) => {}
                        None => {
                            return Err(EvalError::Misaligned(format!(
                                "line {line}: prediction is shorter than the input"
                            )));
                        }
                    }
                }
            }
        }
        if gold_chars.next().is_some() {
            return Err(EvalError::Misaligned(format!(
                "line {line}: gold text is longer than the input"
            )));
        }
        if pred_units.next().is_some() {
            return Err(EvalError::Misaligned(format!(
                "line {line}: prediction is longer than the input"
            )));
        }
    }
    if counted == 0 {
        return Err(EvalError::NoUnits(Task::CharFill));
    }
    Ok(TaskScore { task: Task::CharFill, correct, counted })
}

/// Scores word gap filling. Lines align by index and split on
/// whitespace; each masked word is one unit, correct when the predicted
/// word equals the gold word. Unmasked words must agree between the
/// damaged input and the gold text.
pub fn score_word_fill<A, B, C>(
    masked: &[A],
    gold: &[B],
    pred: &[C],
) -> Result<TaskScore, EvalError>
where
    A: AsRef<str>,
    B: AsRef<str>,
    C: AsRef<str>,
{
    if masked.len() != gold.len() || masked.len() != pred.len() {
        return Err(EvalError::Misaligned(format!(
            "{} damaged lines vs {} gold vs {} predicted",
            masked.len(),
            gold.len(),
            pred.len()
        )));
    }
    let mut correct = 0u64;
    let mut counted = 0u64;
    for (idx, ((m, g), p)) in masked.iter().zip(gold).zip(pred).enumerate() {
        let line = idx + 1;
        let m_words: Vec<&str> = m.as_ref().split_whitespace().collect();
        let g_words: Vec<&str> = g.as_ref().split_whitespace().collect();
        let p_words: Vec<&str> = p.as_ref().split_whitespace().collect();
        if m_words.len() != g_words.len() || m_words.len() != p_words.len() {
            return Err(EvalError::Misaligned(format!(
                "line {line}: {} input words vs {} gold vs {} predicted",
                m_words.len(),
                g_words.len(),
                p_words.len()
            )));
        }
        for (i, mw) in m_words.iter().enumerate() {
            if *mw == MASK_PIECE {
                counted += 1;
                if p_words[i] == g_words[i] {
                    correct += 1;
                }
            } else if *mw != g_words[i] {
                return Err(EvalError::Misaligned(format!(
                    "line {line}, word {}: {mw:?} vs gold {:?}",
                    i + 1,
                    g_words[i]
                )));
            }
        }
    }
    if counted == 0 {
        return Err(EvalError::NoUnits(Task::WordFill));
    }
    Ok(TaskScore { task: Task::WordFill, correct, counted })
}

/// Unweighted mean of the task accuracies.
pub fn overall_score(scores: &[TaskScore]) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoScores);
    }
    Ok(scores.iter().map(TaskScore::accuracy).sum::<f64>() / scores.len() as f64)
}

/// Task scores for one language.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub language: String,
    pub scores: Vec<TaskScore>,
}

impl EvalReport {
    pub fn overall(&self) -> Option<f64> {
        overall_score(&self.scores).ok()
    }

    pub fn score(&self, task: Task) -> Option<&TaskScore> {
        self.scores.iter().find(|s| s.task == task)
    }

    pub fn to_json(&self) -> String {
        let tasks: Vec<serde_json::Value> = self
            .scores
            .iter()
            .map(|s| {
                serde_json::json!({
                    "task": s.task.name(),
                    "correct": s.correct,
                    "counted": s.counted,
                    "accuracy": s.accuracy(),
                })
            })
            .collect();
        let value = serde_json::json!({
            "language": self.language,
            "tasks": tasks,
            "overall": self.overall(),
        });
        let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Renders one row per language with a column per task and an unweighted
/// overall mean. Tasks a language was not scored on show as "-".
pub fn render_table(reports: &[EvalReport]) -> String {
    let mut header: Vec<String> = vec!["language".to_string()];
    header.extend(Task::ALL.iter().map(|t| t.name().to_string()));
    header.push("overall".to_string());

    let mut rows: Vec<Vec<String>> = vec![header];
    for report in reports {
        let mut row = vec![report.language.clone()];
        for task in Task::ALL {
            row.push(match report.score(task) {
                Some(s) => format!("{:.2}", round2(s.accuracy())),
                None => "-".to_string(),
            });
        }
        row.push(match report.overall() {
            Some(o) => format!("{:.2}", round2(o)),
            None => "-".to_string(),
        });
        rows.push(row);
    }

    let columns = rows[0].len();
    let mut widths = vec![0usize; columns];
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if i == 0 {
                line.push_str(cell);
                for _ in cell.chars().count()..widths[i] {
                    line.push(' ');
                }
            } else {
                for _ in cell.chars().count()..widths[i] {
                    line.push(' ');
                }
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_conllu;

    fn corpus_of(rows: &[&[(&str, &str, &str, &str)]]) -> Corpus {
        // Each row is (form, lemma, upos, feats).
        let mut text = String::new();
        for sentence in rows {
            for (i, (form, lemma, upos, feats)) in sentence.iter().enumerate() {
                let lemma = if lemma.is_empty() { "_" } else { lemma };
                let upos = if upos.is_empty() { "_" } else { upos };
                let feats = if feats.is_empty() { "_" } else { feats };
                text.push_str(&format!(
                    "{}\t{}\t{}\t{}\t_\t{}\t_\t_\t_\t_\n",
                    i + 1,
                    form,
                    lemma,
                    upos,
                    feats
                ));
            }
            text.push('\n');
        }
        parse_conllu(&text).unwrap()
    }

    #[test]
    fn task_names_roundtrip() {
        for task in Task::ALL {
            assert_eq!(Task::from_name(task.name()), Some(task));
        }
        assert_eq!(Task::from_name("spelling"), None);
    }

    #[test]
    fn pos_counts_every_token() {
        let gold = corpus_of(&[&[
            ("puella", "puella", "NOUN", ""),
            ("cantat", "canto", "VERB", ""),
            (".", ".", "PUNCT", ""),
        ]]);
        let pred = corpus_of(&[&[
            ("puella", "puella", "NOUN", ""),
            ("cantat", "canto", "NOUN", ""),
            (".", ".", "PUNCT", ""),
        ]]);
        let score = score_pos(&gold, &pred).unwrap();
        assert_eq!((score.correct, score.counted), (2, 3));
        assert!((score.accuracy() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unannotated_tokens_match_when_both_sides_are_empty() {
        let gold = corpus_of(&[&[("et", "", "", ""), ("tu", "tu", "PRON", "")]]);
        let pred = corpus_of(&[&[("et", "", "", ""), ("tu", "is", "PRON", "")]]);
        assert_eq!(score_pos(&gold, &pred).unwrap().correct, 2);
        assert_eq!(score_lemma(&gold, &pred).unwrap().correct, 1);
    }

    #[test]
    fn feats_compare_as_unordered_sets() {
        let gold = corpus_of(&[&[("portat", "porto", "VERB", "Number=Sing|Person=3")]]);
        let pred = corpus_of(&[&[("portat", "porto", "VERB", "Person=3|Number=Sing")]]);
        let score = score_feats(&gold, &pred).unwrap();
        assert_eq!((score.correct, score.counted), (1, 1));
        let wrong = corpus_of(&[&[("portat", "porto", "VERB", "Number=Plur|Person=3")]]);
        assert_eq!(score_feats(&gold, &wrong).unwrap().correct, 0);
    }

    #[test]
    fn token_scoring_demands_alignment() {
        let gold = corpus_of(&[&[("a", "a", "X", "")], &[("b", "b", "X", "")]]);
        let fewer = corpus_of(&[&[("a", "a", "X", "")]]);
        assert!(matches!(score_pos(&gold, &fewer), Err(EvalError::Misaligned(_))));
        let reshaped = corpus_of(&[&[("a", "a", "X", ""), ("b", "b", "X", "")], &[]]);
        assert!(matches!(score_pos(&gold, &reshaped), Err(EvalError::Misaligned(_))));
        let renamed = corpus_of(&[&[("a", "a", "X", "")], &[("c", "b", "X", "")]]);
        assert!(matches!(score_pos(&gold, &renamed), Err(EvalError::Misaligned(_))));
        let empty = corpus_of(&[]);
        assert_eq!(score_pos(&empty, &empty), Err(EvalError::NoUnits(Task::Pos)));
    }

    #[test]
    fn char_fill_scores_only_the_gaps() {
        let masked = ["ca[_]a ip[_]e"];
        let gold = ["casa ipse"];
        let score = score_char_fill(&masked, &gold, &["casa ipfe"]).unwrap();
        assert_eq!((score.correct, score.counted), (1, 2));
        // An unresolved gap counts as a wrong unit.
        let score = score_char_fill(&masked, &gold, &["casa ip[_]e"]).unwrap();
        assert_eq!((score.correct, score.counted), (1, 2));
        // A filled-in space can be correct when the gap hid a space.
        let score = score_char_fill(&["zz[_]q"], &["zz q"], &["zz q"]).unwrap();
        assert_eq!((score.correct, score.counted), (1, 1));
    }

    #[test]
    fn char_fill_rejects_corrupt_triples() {
        let err = score_char_fill(&["a[_]c"], &["axc"], &["abcd"]).unwrap_err();
        assert!(matches!(err, EvalError::Misaligned(_)));
        let err = score_char_fill(&["a[_]c"], &["ax"], &["abc"]).unwrap_err();
        assert!(matches!(err, EvalError::Misaligned(_)));
        let err = score_char_fill(&["a[_]c"], &["ayd"], &["abc"]).unwrap_err();
        assert!(matches!(err, EvalError::Misaligned(_)));
        let err = score_char_fill(&["a[_]c"], &["axc"], &["zbc"]).unwrap_err();
        assert!(matches!(err, EvalError::Misaligned(_)));
        let err = score_char_fill(&["a[_]c", "x"], &["axc"], &["abc"]).unwrap_err();
        assert!(matches!(err, EvalError::Misaligned(_)));
        assert_eq!(
            score_char_fill(&["abc"], &["abc"], &["abc"]),
            Err(EvalError::NoUnits(Task::CharFill))
        );
    }

    #[test]
    fn word_fill_scores_masked_positions() {
        let masked = ["he <mask> home", "she <mask> <mask>"];
        let gold = ["he walked home", "she sang today"];
        let pred = ["he walked home", "she sang loudly"];
        let score = score_word_fill(&masked, &gold, &pred).unwrap();
        assert_eq!((score.correct, score.counted), (2, 3));
    }

    #[test]
    fn word_fill_rejects_corrupt_triples() {
        let err = score_word_fill(&["a <mask>"], &["a b c"], &["a b"]).unwrap_err();
        assert!(matches!(err, EvalError::Misaligned(_)));
        let err = score_word_fill(&["x <mask>"], &["a b"], &["a b"]).unwrap_err();
        assert!(matches!(err, EvalError::Misaligned(_)));
        assert_eq!(
            score_word_fill(&["a b"], &["a b"], &["a b"]),
            Err(EvalError::NoUnits(Task::WordFill))
        );
    }

    #[test]
    fn overall_is_the_unweighted_mean() {
        let scores = [
            TaskScore { task: Task::Pos, correct: 9, counted: 10 },
            TaskScore { task: Task::Lemma, correct: 1, counted: 2 },
        ];
        assert!((overall_score(&scores).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(overall_score(&[]), Err(EvalError::NoScores));
    }

    #[test]
    fn rounding_is_to_two_decimals() {
        assert_eq!(round2(1.0 / 3.0), 0.33);
        assert_eq!(round2(2.0 / 3.0), 0.67);
        assert_eq!(round2(0.0), 0.0);
        assert_eq!(round2(1.0), 1.0);
    }

    #[test]
    fn report_renders_a_table_with_gaps() {
        let reports = [
            EvalReport {
                language: "lat".to_string(),
                scores: vec![
                    TaskScore { task: Task::Pos, correct: 96, counted: 100 },
                    TaskScore { task: Task::Lemma, correct: 97, counted: 100 },
                    TaskScore { task: Task::CharFill, correct: 66, counted: 100 },
                ],
            },
            EvalReport {
                language: "sga".to_string(),
                scores: vec![TaskScore { task: Task::CharFill, correct: 35, counted: 100 }],
            },
        ];
        let table = render_table(&reports);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0].split_whitespace().collect::<Vec<_>>(),
            ["language", "pos", "lemma", "feats", "char_fill", "word_fill", "overall"]
        );
        assert_eq!(
            lines[1].split_whitespace().collect::<Vec<_>>(),
            ["lat", "0.96", "0.97", "-", "0.66", "-", "0.86"]
        );
        assert_eq!(
            lines[2].split_whitespace().collect::<Vec<_>>(),
            ["sga", "-", "-", "-", "0.35", "-", "0.35"]
        );
    }

    #[test]
    fn report_serializes_scores_and_overall() {
        let report = EvalReport {
            language: "got".to_string(),
            scores: vec![TaskScore { task: Task::Pos, correct: 3, counted: 4 }],
        };
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(value["language"], "got");
        assert_eq!(value["tasks"][0]["task"], "pos");
        assert_eq!(value["tasks"][0]["correct"], 3);
        assert_eq!(value["tasks"][0]["counted"], 4);
        assert_eq!(value["tasks"][0]["accuracy"], 0.75);
        assert_eq!(value["overall"], 0.75);
        let empty = EvalReport { language: "got".to_string(), scores: Vec::new() };
        let value: serde_json::Value = serde_json::from_str(&empty.to_json()).unwrap();
        assert!(value["overall"].is_null());
    }
}
