#![allow(dead_code)]

use embedval::predict::{ingest_survey, IngestOptions, SurveyData};

pub const TOPICS: [&str; 24] = [
    "taxes", "immigration", "nuclear", "railways", "farming", "tourism", "banking", "mining", "fishing", "forestry",
    "shipping", "aviation", "housing", "schooling", "policing", "broadcasting", "recycling", "motorways", "pensions",
    "libraries", "museums", "hospitals", "prisons", "harbours",
];

/// Survey files where the answer depends only on the respondent's `camp`
/// and on whether the question says "support" or "oppose": camp `a`
/// answers 10 to support questions and 0 to oppose questions, camp `b` the
/// reverse. Every question has its own topic word, so polarity is the
/// only text signal shared between questions. `region` carries no signal.
pub struct SyntheticSurvey {
    pub responses: String,
    pub questions: String,
    pub scales: String,
}

pub fn synthetic_survey(n_respondents: usize) -> SyntheticSurvey {
    let mut questions = String::from("question_id,text\n");
    let mut scales = String::from("question_id,min,max\n");
    let mut qids = Vec::new();
    for (t, topic) in TOPICS.iter().enumerate() {
        let (polarity, verb) = if t % 2 == 0 { (1i32, "support") } else { (-1, "oppose") };
        let qid = format!("q{t:02}");
        questions.push_str(&format!("{qid},Do you {verb} more {topic} in your country?\n"));
        scales.push_str(&format!("{qid},0,10\n"));
        qids.push((qid, polarity));
    }
    let mut responses = String::from("idno,camp,region");
    for (q, _) in &qids {
        responses.push(',');
        responses.push_str(q);
    }
    responses.push('\n');
    let regions = ["north", "south", "east", "west"];
    for r in 0..n_respondents {
        let camp = if r % 2 == 0 { 1 } else { -1 };
        let label = if camp > 0 { "a" } else { "b" };
        responses.push_str(&format!("{},{label},{}", 1000 + r, regions[(r / 2) % 4]));
        for (_, polarity) in &qids {
            responses.push_str(&format!(",{}", 5 + 5 * camp * polarity));
        }
        responses.push('\n');
    }
    SyntheticSurvey {
        responses,
        questions,
        scales,
    }
}

pub fn background() -> Vec<String> {
    vec!["camp".into(), "region".into()]
}

pub fn synthetic_data(n_respondents: usize) -> SurveyData {
    let s = synthetic_survey(n_respondents);
    let opts = IngestOptions {
        id_column: "idno".into(),
        background: background(),
        missing_codes: vec![77.0, 88.0, 99.0],
    };
    ingest_survey(s.responses.as_bytes(), s.questions.as_bytes(), s.scales.as_bytes(), &opts).unwrap()
}
