//! Cosine similarity between gender-term and occupation-term vectors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embstore::EmbeddingKey;
use crate::embstore::EmbeddingStore;
use crate::seqgen::{ProbeKind, ProbeSequence, ScoreConfig};
use crate::termbank::GenderClass;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CosineError {
    #[error("vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty vectors")]
    Empty,
    #[error("zero-norm vector")]
    ZeroNorm,
}

/// `<u, v> / (|u| |v|)` accumulated in `f64`, clamped to `[-1, 1]`.
pub fn cosine<T: Copy + Into<f64>>(u: &[T], v: &[T]) -> Result<f64, CosineError> {
    if u.len() != v.len() {
        return Err(CosineError::LengthMismatch(u.len(), v.len()));
    }
    if u.is_empty() {
        return Err(CosineError::Empty);
    }
    let (mut dot, mut uu, mut vv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b): (f64, f64) = (a.into(), b.into());
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(CosineError::ZeroNorm);
    }
    Ok((dot / (libm::sqrt(uu) * libm::sqrt(vv))).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySample {
    pub seq_id: String,
    pub model_label: String,
    pub config: ScoreConfig,
    pub occupation: String,
    pub gender_class: GenderClass,
    pub stereotype: GenderClass,
    pub score: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("sequence {seq_id} is a {} probe; configuration {config} needs {} probes", kind.as_str(), config.kind().as_str())]
    KindMismatch { seq_id: String, kind: ProbeKind, config: ScoreConfig },
    #[error("no vector for {0}")]
    MissingVector(EmbeddingKey),
    #[error("cosine for sequence {seq_id}: {source}")]
    Cosine { seq_id: String, source: CosineError },
}

/// One sample per sequence, ordered by sequence id.
pub fn pair_scores(
    store: &EmbeddingStore,
    corpus: &[ProbeSequence],
    config: ScoreConfig,
) -> Result<Vec<SimilaritySample>, ScoreError> {
    let mut ordered: Vec<&ProbeSequence> = corpus.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));

    let fetch = |seq: &ProbeSequence, role| {
        store.get(&seq.id, role).ok_or_else(|| ScoreError::MissingVector(EmbeddingKey::new(seq.id.clone(), role)))
    };

    ordered
        .into_iter()
        .map(|seq| {
            if seq.kind != config.kind() {
                return Err(ScoreError::KindMismatch { seq_id: seq.id.clone(), kind: seq.kind, config });
            }
            let g = fetch(seq, config.gender_role())?;
            let o = fetch(seq, config.occupation_role())?;
            let score = cosine(g, o).map_err(|source| ScoreError::Cosine { seq_id: seq.id.clone(), source })?;
            Ok(SimilaritySample {
                seq_id: seq.id.clone(),
                model_label: store.model_label().into(),
                config,
                occupation: seq.occupation.surface.clone(),
                gender_class: seq.gender_term.class,
                stereotype: seq.occupation.stereotype,
                score,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupField {
    ModelLabel,
    Config,
    GenderClass,
    Stereotype,
    Occupation,
}

/// Values of the requested fields; unrequested fields stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub model_label: Option<String>,
    pub config: Option<ScoreConfig>,
    pub gender_class: Option<GenderClass>,
    pub stereotype: Option<GenderClass>,
    pub occupation: Option<String>,
}

impl GroupKey {
    pub fn of(sample: &SimilaritySample, fields: &[GroupField]) -> Self {
        let mut key = GroupKey::default();
        for field in fields {
            match field {
                GroupField::ModelLabel => key.model_label = Some(sample.model_label.clone()),
                GroupField::Config => key.config = Some(sample.config),
                GroupField::GenderClass => key.gender_class = Some(sample.gender_class),
                GroupField::Stereotype => key.stereotype = Some(sample.stereotype),
                GroupField::Occupation => key.occupation = Some(sample.occupation.clone()),
            }
        }
        key
    }
}

/// Partitions scores by the given fields, keeping input order inside each group.
pub fn group_samples(samples: &[SimilaritySample], fields: &[GroupField]) -> BTreeMap<GroupKey, Vec<f64>> {
    let mut groups: BTreeMap<GroupKey, Vec<f64>> = BTreeMap::new();
    for s in samples {
        groups.entry(GroupKey::of(s, fields)).or_default().push(s.score);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embstore::EmbeddingKey;
    use crate::seqgen::{default_templates, generate_encoder_pairs, generate_winodec, PairConfig};
    use crate::termbank::TermBank;
    use alloc::vec;

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[1.0f64, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0f64, 0.0], &[-2.0, 0.0]).unwrap(), -1.0);
        // 32 / sqrt(14 * 77)
        let c = cosine(&[1.0f64, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((c - 0.974_631_846_197_075_8).abs() < 1e-15, "{c}");
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(cosine(&[1.0f32], &[1.0, 2.0]), Err(CosineError::LengthMismatch(1, 2)));
        assert_eq!(cosine::<f32>(&[], &[]), Err(CosineError::Empty));
        assert_eq!(cosine(&[0.0f32, 0.0], &[1.0, 2.0]), Err(CosineError::ZeroNorm));
    }

    fn constant_store(corpus: &[ProbeSequence], label: &str) -> EmbeddingStore {
        let records = corpus.iter().flat_map(|s| {
            s.kind.roles().iter().map(move |&r| (EmbeddingKey::new(s.id.clone(), r), vec![0.3f32, -1.2, 2.0]))
        });
        EmbeddingStore::from_records(records, 3, label).unwrap()
    }

    #[test]
    fn degenerate_store_scores_one() {
        let corpus = generate_winodec(&TermBank::default_bank()).unwrap();
        let store = constant_store(&corpus, "baseline");
        let samples = pair_scores(&store, &corpus, ScoreConfig::Winodec(PairConfig::G2O2)).unwrap();
        assert_eq!(samples.len(), 4000);
        assert!(samples.iter().all(|s| (s.score - 1.0).abs() < 1e-12));
        assert!(samples.windows(2).all(|w| w[0].seq_id < w[1].seq_id));
        assert_eq!(samples.iter().filter(|s| s.gender_class == GenderClass::Female).count(), 2000);
        assert!(samples.iter().all(|s| s.model_label == "baseline"));
    }

    #[test]
    fn encoder_corpus_rejects_winodec_config() {
        let corpus = generate_encoder_pairs(&default_templates(), &TermBank::default_bank()).unwrap();
        let store = constant_store(&corpus, "m");
        let err = pair_scores(&store, &corpus, ScoreConfig::Winodec(PairConfig::G1O2)).unwrap_err();
        assert!(matches!(err, ScoreError::KindMismatch { .. }));
        assert_eq!(pair_scores(&store, &corpus, ScoreConfig::EncoderPair).unwrap().len(), 40);
    }

    #[test]
    fn missing_vector_names_key() {
        let corpus =
            generate_winodec(&TermBank::parse("gender\tman\tmale\noccupation\tnurse\tfemale\n").unwrap()).unwrap();
        let store = EmbeddingStore::from_records(
            [(EmbeddingKey::new(corpus[0].id.clone(), crate::TermRole::Gender2), [1.0f32])],
            1,
            "m",
        )
        .unwrap();
        let err = pair_scores(&store, &corpus, ScoreConfig::Winodec(PairConfig::G2O2)).unwrap_err();
        assert_eq!(
            err,
            ScoreError::MissingVector(EmbeddingKey::new(corpus[0].id.clone(), crate::TermRole::Occupation2))
        );
    }

    #[test]
    fn grouping() {
        let corpus = generate_winodec(&TermBank::default_bank()).unwrap();
        let store = constant_store(&corpus, "m");
        let samples = pair_scores(&store, &corpus, ScoreConfig::Winodec(PairConfig::G2O2)).unwrap();

        let groups = group_samples(&samples, &[GroupField::GenderClass, GroupField::Stereotype]);
        assert_eq!(groups.len(), 4);
        assert!(groups.values().all(|g| g.len() == 1000));

        let all = group_samples(&samples, &[]);
        assert_eq!(all.len(), 1);
        assert_eq!(all[&GroupKey::default()].len(), 4000);

        assert!(group_samples(&[], &[GroupField::Stereotype]).is_empty());

        let per_occ = group_samples(&samples, &[GroupField::Occupation]);
        assert_eq!(per_occ.len(), 100);
        assert!(per_occ.values().all(|g| g.len() == 40));
    }
}
