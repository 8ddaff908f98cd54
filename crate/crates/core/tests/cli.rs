use std::path::Path;
use std::process::{Command, Output};

use embedval::config::RunConfig;
use embedval::corpus::{generate_corpus, write_corpus, Taxonomy, TemplateTable};
use embedval::pipeline::{run, Command as Cmd};
use embedval::report::ValidityReport;

fn embedval(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embedval"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gen_corpus_writes_corpus_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let out = embedval(tmp.path(), &["gen-corpus", "--seed", "5", "--out-dir", "run"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = ValidityReport::read_from(&tmp.path().join("run")).unwrap();
    assert_eq!(report.corpus.unwrap().len(), 2223);
    assert_eq!(report.metadata.command, "gen-corpus");
    assert_eq!(report.metadata.seed, 5);
    assert!(report.probe.is_none() && report.predict.is_none());
}

#[test]
fn predict_without_survey_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = embedval(tmp.path(), &["predict"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("survey"), "{}", stderr(&out));
}

#[test]
fn malformed_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "seed = \"seven\"\n").unwrap();
    let out = embedval(tmp.path(), &["gen-corpus", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn unknown_representation_name_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = embedval(tmp.path(), &["probe", "--reps", "nope"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn malformed_corpus_file_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("corpus.csv"), "id,text\n1,hello\n").unwrap();
    std::fs::write(tmp.path().join("run.toml"), "[corpus]\npath = \"corpus.csv\"\n").unwrap();
    let out = embedval(tmp.path(), &["gen-corpus", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn single_concept_corpus_is_an_infeasible_split() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus: Vec<_> = generate_corpus(&Taxonomy::shipped(), &TemplateTable::shipped(), 0)
        .unwrap()
        .into_iter()
        .filter(|q| q.concrete_id == "health_services")
        .collect();
    write_corpus(std::fs::File::create(tmp.path().join("corpus.csv")).unwrap(), &corpus).unwrap();
    std::fs::write(
        tmp.path().join("run.toml"),
        "[corpus]\npath = \"corpus.csv\"\n\n[[representation]]\nname = \"tf\"\nkind = \"tf\"\n",
    )
    .unwrap();
    let out = embedval(tmp.path(), &["probe", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn simdiff_report_round_trips_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "seed = 2\n\n[[representation]]\nname = \"tf\"\nkind = \"tf\"\n\n\
                [[representation]]\nname = \"random20\"\nkind = \"random\"\ndim = 20\n";
    let mut config = RunConfig::from_toml(text, tmp.path()).unwrap();
    config.out_dir = tmp.path().join("out");
    let report = run(Cmd::Simdiff, &config).unwrap();
    assert!(report.simdiff.is_some() && report.corpus.is_none());
    assert_eq!(ValidityReport::read_from(&config.out_dir).unwrap(), report);
}
