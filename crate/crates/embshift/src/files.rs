//! Filesystem access for term banks, templates, probe corpora and embedding stores.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use embshift_core::embstore::{EmbeddingKey, EmbeddingStore};
use embshift_core::seqgen::{parse_templates, EncoderTemplate, ProbeSequence};
use embshift_core::termbank::TermBank;
use embshift_core::Severity;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_term_bank(path: &Path) -> Result<TermBank> {
    TermBank::parse(&read_text(path)?).map_err(|source| Error::TermBank { path: path.into(), source })
}

pub fn save_term_bank(bank: &TermBank, path: &Path) -> Result<()> {
    write_atomic(path, bank.to_tsv().as_bytes())
}

pub fn load_templates(path: &Path) -> Result<Vec<EncoderTemplate>> {
    parse_templates(&read_text(path)?).map_err(|source| Error::Templates { path: path.into(), source })
}

/// One JSON object per line, fields in declaration order.
pub fn corpus_to_jsonl(corpus: &[ProbeSequence]) -> String {
    let mut out = String::new();
    for seq in corpus {
        out.push_str(&serde_json::to_string(seq).expect("probe sequences serialize"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(corpus: &[ProbeSequence], path: &Path) -> Result<()> {
    write_atomic(path, corpus_to_jsonl(corpus).as_bytes())
}

/// Parses a corpus and rejects records whose spans do not check out.
pub fn parse_corpus(text: &str, path: &Path) -> Result<Vec<ProbeSequence>> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let corpus_err = |reason: String| Error::Corpus { path: path.into(), line: line_no, reason };
        let seq: ProbeSequence = serde_json::from_str(line).map_err(|e| corpus_err(e.to_string()))?;
        if let Some(issue) = seq.check().into_iter().find(|i| i.severity == Severity::Error) {
            return Err(corpus_err(issue.message));
        }
        if !ids.insert(seq.id.clone()) {
            return Err(corpus_err(format!("duplicate sequence id {}", seq.id)));
        }
        out.push(seq);
    }
    Ok(out)
}

pub fn read_corpus(path: &Path) -> Result<Vec<ProbeSequence>> {
    parse_corpus(&read_text(path)?, path)
}

pub fn write_store<I, V>(records: I, dim: usize, model_label: &str, path: &Path) -> Result<()>
where
    I: IntoIterator<Item = (EmbeddingKey, V)>,
    V: AsRef<[f32]>,
{
    let store = EmbeddingStore::from_records(records, dim, model_label)
        .map_err(|source| Error::Store { path: path.into(), source })?;
    save_store(&store, path)
}

pub fn save_store(store: &EmbeddingStore, path: &Path) -> Result<()> {
    write_atomic(path, &store.encode())
}

pub fn read_store(path: &Path) -> Result<EmbeddingStore> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::decode(&bytes).map_err(|source| Error::Store { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use embshift_core::seqgen::{generate_winodec, CharSpan, TermRole};

    #[test]
    fn corpus_line_field_order() {
        let bank = TermBank::parse("gender\tman\tmale\noccupation\tfirefighter\tmale\n").unwrap();
        let corpus = generate_winodec(&bank).unwrap();
        let line = corpus_to_jsonl(&corpus);
        let expected = format!(
            concat!(
                r#"{{"id":"{}","kind":"winodec","text":"The firefighter is a man. The man is a firefighter.","#,
                r#""occupation":{{"surface":"firefighter","stereotype":"male"}},"#,
                r#""gender_term":{{"surface":"man","class":"male"}},"template_id":"winodec","#,
                r#""spans":{{"occupation_1":[4,15],"gender_1":[21,24],"gender_2":[30,33],"occupation_2":[39,50]}}}}"#,
                "\n"
            ),
            corpus[0].id
        );
        assert_eq!(line, expected);
        assert_eq!(parse_corpus(&line, Path::new("x")).unwrap(), corpus);
    }

    #[test]
    fn corpus_with_bad_span_rejected() {
        let bank = TermBank::parse("gender\tman\tmale\noccupation\tfirefighter\tmale\n").unwrap();
        let mut corpus = generate_winodec(&bank).unwrap();
        corpus[0].spans.insert(TermRole::Gender1, CharSpan::new(20, 24));
        let err = parse_corpus(&corpus_to_jsonl(&corpus), Path::new("c.jsonl")).unwrap_err();
        assert!(matches!(err, Error::Corpus { line: 1, .. }), "{err}");
    }

    #[test]
    fn corpus_duplicate_id_rejected() {
        let bank = TermBank::parse("gender\tman\tmale\noccupation\tfirefighter\tmale\n").unwrap();
        let corpus = generate_winodec(&bank).unwrap();
        let text = corpus_to_jsonl(&corpus).repeat(2);
        assert!(matches!(parse_corpus(&text, Path::new("c")), Err(Error::Corpus { line: 2, .. })));
    }

    #[test]
    fn store_and_bank_files() {
        let dir = tempfile::tempdir().unwrap();
        let bank_path = dir.path().join("bank.tsv");
        let bank = TermBank::default_bank();
        save_term_bank(&bank, &bank_path).unwrap();
        assert_eq!(load_term_bank(&bank_path).unwrap(), bank);

        let store_path = dir.path().join("s.embs");
        write_store([(EmbeddingKey::new("a", TermRole::Gender), [1.0f32, 2.0])], 2, "m", &store_path).unwrap();
        assert_eq!(read_store(&store_path).unwrap().count(), 1);

        let missing = dir.path().join("nope.tsv");
        let err = load_term_bank(&missing).unwrap_err();
        assert!(err.to_string().contains("nope.tsv"));
        assert_eq!(err.exit_code(), 2);
    }
}
