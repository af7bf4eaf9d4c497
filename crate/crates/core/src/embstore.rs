//! Binary embedding store: one vector per (sequence, term role).
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "EMBS" | version u32 | dim u32 | count u64          20-byte header
//! "#model=<label>\n"                                  model label line
//! "<seq_id>\t<role>\t<index>\n" x count               manifest
//! 0x00                                                separator
//! count x dim f32 LE, row-major                       payload
//! ```

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::issue::Issue;
use crate::seqgen::{ProbeSequence, TermRole};

pub const MAGIC: [u8; 4] = *b"EMBS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;
const MODEL_PREFIX: &str = "#model=";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmbeddingKey {
    pub seq_id: String,
    pub role: TermRole,
}

impl EmbeddingKey {
    pub fn new(seq_id: impl Into<String>, role: TermRole) -> Self {
        Self { seq_id: seq_id.into(), role }
    }
}

impl fmt::Display for EmbeddingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.seq_id, self.role)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error("bad magic {0:?}, expected \"EMBS\"")]
    BadMagic([u8; 4]),
    #[error("unsupported store version {0}")]
    UnsupportedVersion(u32),
    #[error("file shorter than the {HEADER_LEN}-byte header ({0} bytes)")]
    ShortHeader(usize),
    #[error("dimension must be at least 1")]
    ZeroDim,
    #[error("payload length mismatch: expected {expected} bytes, found {actual}")]
    LengthMismatch { expected: u64, actual: u64 },
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("non-finite value {value} at component {component} of {key}")]
    NonFinite { key: EmbeddingKey, component: usize, value: f32 },
    #[error("vector for {key} has length {found}, expected {expected}")]
    DimensionMismatch { key: EmbeddingKey, expected: usize, found: usize },
    #[error("duplicate key {0}")]
    DuplicateKey(EmbeddingKey),
    #[error("invalid {what}: {value:?}")]
    InvalidText { what: &'static str, value: String },
}

/// An immutable set of key-term vectors from one model.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    model_label: String,
    dim: usize,
    manifest: Vec<(EmbeddingKey, usize)>,
    payload: Vec<f32>,
    lookup: BTreeMap<EmbeddingKey, usize>,
}

impl PartialEq for EmbeddingStore {
    /// Bit-level equality of the payload; manifest compared in file order.
    fn eq(&self, other: &Self) -> bool {
        self.model_label == other.model_label
            && self.dim == other.dim
            && self.manifest == other.manifest
            && self.payload.len() == other.payload.len()
            && self.payload.iter().zip(&other.payload).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl EmbeddingStore {
    /// Builds a store with vectors indexed in record order.
    pub fn from_records<I, V>(records: I, dim: usize, model_label: &str) -> Result<Self, StoreError>
    where
        I: IntoIterator<Item = (EmbeddingKey, V)>,
        V: AsRef<[f32]>,
    {
        if dim == 0 {
            return Err(StoreError::ZeroDim);
        }
        if u32::try_from(dim).is_err() {
            return Err(StoreError::InvalidText { what: "dimension", value: dim.to_string() });
        }
        check_text("model label", model_label)?;
        let mut manifest = Vec::new();
        let mut payload = Vec::new();
        let mut lookup = BTreeMap::new();
        for (key, vector) in records {
            let vector = vector.as_ref();
            check_text("sequence id", &key.seq_id)?;
            if vector.len() != dim {
                return Err(StoreError::DimensionMismatch { key, expected: dim, found: vector.len() });
            }
            if let Some((component, &value)) = vector.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(StoreError::NonFinite { key, component, value });
            }
            let index = manifest.len();
            if lookup.insert(key.clone(), index).is_some() {
                return Err(StoreError::DuplicateKey(key));
            }
            manifest.push((key, index));
            payload.extend_from_slice(vector);
        }
        Ok(Self { model_label: model_label.to_string(), dim, manifest, payload, lookup })
    }

    pub fn model_label(&self) -> &str {
        &self.model_label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.manifest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.is_empty()
    }

    /// Manifest entries in file order.
    pub fn manifest(&self) -> &[(EmbeddingKey, usize)] {
        &self.manifest
    }

    pub fn vector(&self, key: &EmbeddingKey) -> Option<&[f32]> {
        self.lookup.get(key).map(|&i| self.row(i))
    }

    pub fn get(&self, seq_id: &str, role: TermRole) -> Option<&[f32]> {
        self.vector(&EmbeddingKey::new(seq_id, role))
    }

    fn row(&self, index: usize) -> &[f32] {
        &self.payload[index * self.dim..(index + 1) * self.dim]
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.manifest.len() * 32 + self.payload.len() * 4);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.manifest.len() as u64).to_le_bytes());
        out.extend_from_slice(MODEL_PREFIX.as_bytes());
        out.extend_from_slice(self.model_label.as_bytes());
        out.push(b'\n');
        for (key, index) in &self.manifest {
            out.extend_from_slice(format!("{}\t{}\t{}\n", key.seq_id, key.role, index).as_bytes());
        }
        out.push(0);
        for v in &self.payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses a store, rejecting anything that does not match the layout exactly.
    pub fn decode(bytes: &[u8]) -> Result<Self, StoreError> {
        if bytes.len() < HEADER_LEN {
            if bytes.len() >= 4 && bytes[..4] != MAGIC {
                return Err(StoreError::BadMagic(bytes[..4].try_into().unwrap()));
            }
            return Err(StoreError::ShortHeader(bytes.len()));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(StoreError::BadMagic(magic));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(StoreError::UnsupportedVersion(version));
        }
        let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if dim == 0 {
            return Err(StoreError::ZeroDim);
        }
        let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap());

        let body = &bytes[HEADER_LEN..];
        let sep =
            body.iter().position(|&b| b == 0).ok_or_else(|| StoreError::Manifest("missing 0x00 separator".into()))?;
        let text = core::str::from_utf8(&body[..sep]).map_err(|e| StoreError::Manifest(format!("not UTF-8: {e}")))?;
        let mut lines = text.split_inclusive('\n');
        let model_label = lines
            .next()
            .and_then(|l| l.strip_prefix(MODEL_PREFIX))
            .and_then(|l| l.strip_suffix('\n'))
            .ok_or_else(|| StoreError::Manifest("missing #model= line".into()))?
            .to_string();

        let mut manifest = Vec::new();
        let mut lookup = BTreeMap::new();
        let mut used = BTreeSet::new();
        for (n, line) in lines.enumerate() {
            let line = line
                .strip_suffix('\n')
                .ok_or_else(|| StoreError::Manifest(format!("entry {n} not newline-terminated")))?;
            let mut parts = line.split('\t');
            let (Some(seq_id), Some(role), Some(index), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(StoreError::Manifest(format!("entry {n}: expected seq_id<TAB>role<TAB>index")));
            };
            if seq_id.is_empty() {
                return Err(StoreError::Manifest(format!("entry {n}: empty sequence id")));
            }
            let role: TermRole = role.parse().map_err(|e| StoreError::Manifest(format!("entry {n}: {e}")))?;
            let index: u64 =
                index.parse().map_err(|_| StoreError::Manifest(format!("entry {n}: bad index {index:?}")))?;
            if index >= count {
                return Err(StoreError::Manifest(format!("entry {n}: index {index} >= count {count}")));
            }
            if !used.insert(index) {
                return Err(StoreError::Manifest(format!("entry {n}: index {index} reused")));
            }
            let key = EmbeddingKey::new(seq_id, role);
            if lookup.insert(key.clone(), index as usize).is_some() {
                return Err(StoreError::DuplicateKey(key));
            }
            manifest.push((key, index as usize));
        }
        if manifest.len() as u64 != count {
            return Err(StoreError::Manifest(format!(
                "header declares {count} vectors, manifest lists {}",
                manifest.len()
            )));
        }

        let payload_bytes = &body[sep + 1..];
        let expected = count
            .checked_mul(dim as u64)
            .and_then(|x| x.checked_mul(4))
            .ok_or_else(|| StoreError::Manifest("count x dim overflows".into()))?;
        if payload_bytes.len() as u64 != expected {
            return Err(StoreError::LengthMismatch { expected, actual: payload_bytes.len() as u64 });
        }
        let payload: Vec<f32> =
            payload_bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();

        for (key, index) in &manifest {
            let row = &payload[index * dim..(index + 1) * dim];
            if let Some((component, &value)) = row.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(StoreError::NonFinite { key: key.clone(), component, value });
            }
        }
        Ok(Self { model_label, dim, manifest, payload, lookup })
    }
}

fn check_text(what: &'static str, value: &str) -> Result<(), StoreError> {
    if value.contains(['\t', '\n', '\r', '\0']) || (what == "sequence id" && value.is_empty()) {
        return Err(StoreError::InvalidText { what, value: value.to_string() });
    }
    Ok(())
}

/// Euclidean norm in 64-bit precision.
pub fn norm(v: &[f32]) -> f64 {
    libm::sqrt(v.iter().map(|&x| f64::from(x) * f64::from(x)).sum())
}

/// Checks that the store covers exactly the roles the corpus needs, with usable vectors.
pub fn validate_store(store: &EmbeddingStore, corpus: &[ProbeSequence]) -> Vec<Issue> {
    let mut issues = Vec::new();
    let by_id: BTreeMap<&str, &ProbeSequence> = corpus.iter().map(|s| (s.id.as_str(), s)).collect();

    for (key, _) in store.manifest() {
        match by_id.get(key.seq_id.as_str()) {
            None => issues.push(Issue::error(format!("{key}: unknown sequence id"))),
            Some(seq) if !seq.kind.roles().contains(&key.role) => {
                issues.push(Issue::error(format!("{key}: role not defined for {} sequences", seq.kind.as_str())))
            }
            Some(_) => {}
        }
        let v = store.vector(key).expect("manifest key present");
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            issues.push(Issue::error(format!("{key}: non-finite entry at component {i}")));
        } else if norm(v) == 0.0 {
            issues.push(Issue::error(format!("{key}: zero-norm vector")));
        }
    }

    for seq in corpus {
        for &role in seq.kind.roles() {
            if store.get(&seq.id, role).is_none() {
                issues.push(Issue::error(format!("{}/{role}: missing vector", seq.id)));
            }
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::generate_winodec;
    use crate::termbank::TermBank;
    use alloc::vec;

    fn two_records() -> EmbeddingStore {
        EmbeddingStore::from_records(
            [
                (EmbeddingKey::new("a", TermRole::Gender1), vec![1.0f32, 2.0, 3.0, 4.0]),
                (EmbeddingKey::new("a", TermRole::Occupation2), vec![-1.0f32, 0.5, 0.25, 8.0]),
            ],
            4,
            "baseline",
        )
        .unwrap()
    }

    #[test]
    fn two_records_layout() {
        let store = two_records();
        let bytes = store.encode();
        let manifest = "#model=baseline\na\tgender_1\t0\na\toccupation_2\t1\n";
        assert_eq!(bytes.len(), HEADER_LEN + manifest.len() + 1 + 32);
        assert_eq!(&bytes[..4], b"EMBS");
        assert_eq!(&bytes[HEADER_LEN..HEADER_LEN + manifest.len()], manifest.as_bytes());
        assert_eq!(bytes[HEADER_LEN + manifest.len()], 0);
        assert_eq!(EmbeddingStore::decode(&bytes).unwrap(), store);
    }

    #[test]
    fn empty_store() {
        let store = EmbeddingStore::from_records(Vec::<(EmbeddingKey, Vec<f32>)>::new(), 8, "m").unwrap();
        let back = EmbeddingStore::decode(&store.encode()).unwrap();
        assert_eq!(back.count(), 0);
        assert_eq!(back.dim(), 8);
    }

    #[test]
    fn mixed_dims_rejected() {
        let err = EmbeddingStore::from_records(
            [
                (EmbeddingKey::new("a", TermRole::Gender), vec![1.0f32; 4]),
                (EmbeddingKey::new("b", TermRole::Gender), vec![1.0f32; 5]),
            ],
            4,
            "m",
        )
        .unwrap_err();
        assert!(matches!(err, StoreError::DimensionMismatch { expected: 4, found: 5, .. }));
    }

    #[test]
    fn duplicate_key_rejected() {
        let k = EmbeddingKey::new("a", TermRole::Gender);
        let err = EmbeddingStore::from_records([(k.clone(), [1.0f32]), (k, [2.0])], 1, "m").unwrap_err();
        assert!(matches!(err, StoreError::DuplicateKey(_)));
    }

    #[test]
    fn corruptions() {
        let good = two_records().encode();

        let mut b = good.clone();
        b[..4].copy_from_slice(b"XXXX");
        assert_eq!(EmbeddingStore::decode(&b), Err(StoreError::BadMagic(*b"XXXX")));

        let mut b = good.clone();
        b[4] = 2;
        assert_eq!(EmbeddingStore::decode(&b), Err(StoreError::UnsupportedVersion(2)));

        let b = &good[..good.len() - 6];
        assert!(matches!(EmbeddingStore::decode(b), Err(StoreError::LengthMismatch { expected: 32, actual: 26 })));

        let mut b = good.clone();
        b.push(0);
        assert!(matches!(EmbeddingStore::decode(&b), Err(StoreError::LengthMismatch { .. })));

        let mut b = good.clone();
        let at = b.len() - 4;
        b[at..].copy_from_slice(&f32::NAN.to_le_bytes());
        match EmbeddingStore::decode(&b) {
            Err(StoreError::NonFinite { key, component: 3, .. }) => {
                assert_eq!(key, EmbeddingKey::new("a", TermRole::Occupation2))
            }
            other => panic!("{other:?}"),
        }

        assert_eq!(EmbeddingStore::decode(&good[..10]), Err(StoreError::ShortHeader(10)));

        let mut b = good.clone();
        b[12] = 3;
        assert!(matches!(EmbeddingStore::decode(&b), Err(StoreError::Manifest(_))));
    }

    #[test]
    fn lookup_by_role() {
        let store = two_records();
        assert_eq!(store.get("a", TermRole::Occupation2).unwrap()[3], 8.0);
        assert!(store.get("a", TermRole::Gender2).is_none());
        assert!(store.get("b", TermRole::Gender1).is_none());
    }

    fn full_store(corpus: &[ProbeSequence]) -> Vec<(EmbeddingKey, Vec<f32>)> {
        corpus
            .iter()
            .flat_map(|s| s.kind.roles().iter().map(move |&r| (EmbeddingKey::new(s.id.clone(), r), vec![1.0f32, 0.5])))
            .collect()
    }

    #[test]
    fn validate_complete_winodec() {
        let corpus = generate_winodec(&TermBank::default_bank()).unwrap();
        let store = EmbeddingStore::from_records(full_store(&corpus), 2, "m").unwrap();
        assert_eq!(store.count(), 16_000);
        assert!(validate_store(&store, &corpus).is_empty());
    }

    #[test]
    fn validate_missing_role_and_zero_norm() {
        let corpus = generate_winodec(&TermBank::default_bank()).unwrap();
        let mut records = full_store(&corpus);
        records.retain(|(k, _)| !(k.seq_id == corpus[7].id && k.role == TermRole::Occupation2));
        let store = EmbeddingStore::from_records(records.clone(), 2, "m").unwrap();
        let issues = validate_store(&store, &corpus);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.contains("occupation_2: missing vector"));

        let mut records = full_store(&corpus);
        records[11].1 = vec![0.0, 0.0];
        let store = EmbeddingStore::from_records(records, 2, "m").unwrap();
        let issues = validate_store(&store, &corpus);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.contains("zero-norm"));
    }

    #[test]
    fn validate_unknown_and_misrouted_keys() {
        let corpus =
            generate_winodec(&TermBank::parse("gender\tman\tmale\noccupation\tnurse\tfemale\n").unwrap()).unwrap();
        let mut records = full_store(&corpus);
        records.push((EmbeddingKey::new("deadbeef", TermRole::Gender1), vec![1.0, 0.0]));
        records.push((EmbeddingKey::new(corpus[0].id.clone(), TermRole::Gender), vec![1.0, 0.0]));
        let store = EmbeddingStore::from_records(records, 2, "m").unwrap();
        let issues = validate_store(&store, &corpus);
        assert_eq!(issues.len(), 2, "{issues:?}");
    }
}
