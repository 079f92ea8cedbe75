//! Worked examples with published per-example scores.

use ambigqa::{PredictedExample, PredictedPair, ReferenceAnnotation, ReferencePair, SimilarityKind};

pub const CRUCIBLE: &str = "Who made the play the crucible?";
pub const CRUCIBLE_GOLD: &str = "Who wrote the play the crucible?";
pub const CRUCIBLE_PRED: &str = "Who made the play the crucible in 2012?";

pub struct Case {
    pub name: &'static str,
    pub prompt: &'static str,
    pub prediction: PredictedExample,
    pub reference: ReferenceAnnotation,
    pub kind: SimilarityKind,
    pub f1: f64,
}

fn pred(pairs: &[(&str, &str)]) -> PredictedExample {
    PredictedExample { id: "x".into(), pairs: pairs.iter().map(|&(q, a)| PredictedPair::new(q, a)).collect() }
}

fn answers_only(prompt: &str, answers: &[&str]) -> PredictedExample {
    pred(&answers.iter().map(|&a| (prompt, a)).collect::<Vec<_>>())
}

fn multi(pairs: &[(&str, &[&str])]) -> ReferenceAnnotation {
    ReferenceAnnotation::multiple(
        pairs
            .iter()
            .map(|&(q, a)| ReferencePair { question: q.into(), answers: a.iter().map(|s| s.to_string()).collect() })
            .collect(),
    )
}

const SNOW_WHITE: &str = "Where was snow white and the huntsman filmed?";

fn snow_white() -> ReferenceAnnotation {
    multi(&[
        ("Where were beach scenes for snow white and huntsman predominantly filmed?", &["Marloes Sands Beach"]),
        ("Where was principal photography for snow white and huntsman filmed?", &["United Kingdom"]),
        ("Where was castle in snow white and huntsman filmed?", &["Gateholm island"]),
    ])
}

pub fn cases() -> Vec<Case> {
    let csk = "How many times csk reached final in ipl?";
    let kelly = "Who played kelly on the drew carey show?";
    let trophies = "Who has won the most trophies man utd or liverpool?";
    vec![
        Case {
            name: "two correct answers of three gold pairs",
            prompt: SNOW_WHITE,
            prediction: pred(&[
                ("Where was snow white and huntsman principal photography filmed", "United Kingdom"),
                ("Where were beach scenes for snow white and huntsman mostly filmed", "Marloes Sands Beach"),
            ]),
            reference: snow_white(),
            kind: SimilarityKind::Answer,
            f1: 0.8,
        },
        Case {
            name: "duplicate answer earns one credit",
            prompt: SNOW_WHITE,
            prediction: pred(&[
                ("Where was snow white and the huntsman filmed in 2017?", "Marloes Sands Beach"),
                (
                    "Where was snow white and the huntsman filmed during the filming of Season 1 of the TV series?",
                    "Marloes Sands Beach",
                ),
            ]),
            reference: snow_white(),
            kind: SimilarityKind::Answer,
            f1: 0.4,
        },
        Case {
            name: "over-generation",
            prompt: csk,
            prediction: answers_only(csk, &["eight", "seven"]),
            reference: ReferenceAnnotation::single(csk, vec!["eight".into()]),
            kind: SimilarityKind::Answer,
            f1: 2.0 / 3.0,
        },
        Case {
            name: "one of four gold answers",
            prompt: kelly,
            prediction: answers_only(kelly, &["Brett Butler"]),
            reference: multi(&[
                ("Who played Kellie N. on the drew carey show?", &["Cynthia Watros"]),
                ("Who played M. Kelly on the drew carey show?", &["Jenny McCarthy"]),
                ("Who played G. Kelly on the drew carey show?", &["Brett Butler"]),
                ("Who played Kelly W. on the drew carey show?", &["Anna Gunn"]),
            ]),
            kind: SimilarityKind::Answer,
            f1: 0.4,
        },
        Case {
            name: "alias in gold answer set",
            prompt: trophies,
            prediction: answers_only(trophies, &["Manchester United"]),
            reference: multi(&[
                ("Who has won the most trophies overall man utd or liverpool?", &["Man utd", "Manchester United"]),
                ("Who has won the most FIFA and UEFA cups man utd or liverpool?", &["Liverpool"]),
            ]),
            kind: SimilarityKind::Answer,
            f1: 2.0 / 3.0,
        },
    ]
}
