//! Probe-corpus generation.
//!
//! Two corpora are produced from a [`TermBank`]:
//!
//! * WinoDec sequences, `"The {occupation} is a {gender}. The {gender} is a
//!   {occupation}."`, one per (occupation, gender term). The repetition lets a
//!   causal decoder see each term after the other, so the second-sentence
//!   terms carry mutual influence.
//! * Counterfactual encoder pairs: one template per occupation, instantiated
//!   once per requested gender term, identical outside the gender span.
//!
//! Every sequence carries byte spans for its term roles so extractors never
//! have to search the text themselves.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::issue::Issue;
use crate::termbank::{OccupationEntry, TermBank, TermEntry};

const DEFAULT_TEMPLATES: &str = include_str!("../data/default_encoder_templates.tsv");

/// Gender nouns used for encoder pairs unless the caller asks otherwise.
pub const DEFAULT_PAIR_GENDERS: [&str; 2] = ["man", "woman"];

pub const WINODEC_TEMPLATE_ID: &str = "winodec";
pub const WINODEC_AGREE_TEMPLATE_ID: &str = "winodec-agree";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermRole {
    #[serde(rename = "occupation_1")]
    Occupation1,
    #[serde(rename = "gender_1")]
    Gender1,
    #[serde(rename = "gender_2")]
    Gender2,
    #[serde(rename = "occupation_2")]
    Occupation2,
    Gender,
    Occupation,
}

impl TermRole {
    pub const WINODEC: [TermRole; 4] =
        [TermRole::Occupation1, TermRole::Gender1, TermRole::Gender2, TermRole::Occupation2];
    pub const ENCODER: [TermRole; 2] = [TermRole::Gender, TermRole::Occupation];

    pub fn as_str(self) -> &'static str {
        match self {
            TermRole::Occupation1 => "occupation_1",
            TermRole::Gender1 => "gender_1",
            TermRole::Gender2 => "gender_2",
            TermRole::Occupation2 => "occupation_2",
            TermRole::Gender => "gender",
            TermRole::Occupation => "occupation",
        }
    }

    pub fn is_gender(self) -> bool {
        matches!(self, TermRole::Gender1 | TermRole::Gender2 | TermRole::Gender)
    }
}

impl fmt::Display for TermRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown term role {0:?}")]
pub struct UnknownRole(pub String);

impl FromStr for TermRole {
    type Err = UnknownRole;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "occupation_1" => TermRole::Occupation1,
            "gender_1" => TermRole::Gender1,
            "gender_2" => TermRole::Gender2,
            "occupation_2" => TermRole::Occupation2,
            "gender" => TermRole::Gender,
            "occupation" => TermRole::Occupation,
            other => return Err(UnknownRole(other.to_string())),
        })
    }
}

/// Half-open byte range `[start, end)` into a UTF-8 text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        if self.start < self.end {
            text.get(self.start..self.end)
        } else {
            None
        }
    }

    fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl From<(usize, usize)> for CharSpan {
    fn from((start, end): (usize, usize)) -> Self {
        Self { start, end }
    }
}

impl From<CharSpan> for (usize, usize) {
    fn from(span: CharSpan) -> Self {
        (span.start, span.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Winodec,
    EncoderPair,
}

impl ProbeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeKind::Winodec => "winodec",
            ProbeKind::EncoderPair => "encoder_pair",
        }
    }

    pub fn roles(self) -> &'static [TermRole] {
        match self {
            ProbeKind::Winodec => &TermRole::WINODEC,
            ProbeKind::EncoderPair => &TermRole::ENCODER,
        }
    }
}

/// One generated probe with its term spans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeSequence {
    pub id: String,
    pub kind: ProbeKind,
    pub text: String,
    pub occupation: OccupationEntry,
    pub gender_term: TermEntry,
    pub template_id: String,
    pub spans: BTreeMap<TermRole, CharSpan>,
}

impl ProbeSequence {
    /// Checks span coverage, bounds, slice fidelity and ordering.
    pub fn check(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        if self.id != sequence_id(self.kind, &self.template_id, &self.occupation.surface, &self.gender_term.surface) {
            issues.push(Issue::warning(format!("sequence {}: id does not match its content", self.id)));
        }
        for &role in self.kind.roles() {
            let Some(span) = self.spans.get(&role) else {
                issues.push(Issue::error(format!("sequence {}: missing span for {role}", self.id)));
                continue;
            };
            let expected = if role.is_gender() { &self.gender_term.surface } else { &self.occupation.surface };
            match span.slice(&self.text) {
                None => issues.push(Issue::error(format!(
                    "sequence {}: span {role} [{}, {}) is not a valid slice of the text",
                    self.id, span.start, span.end
                ))),
                Some(s) if !s.eq_ignore_ascii_case(expected) => issues.push(Issue::error(format!(
                    "sequence {}: span {role} reads {s:?}, expected {expected:?}",
                    self.id
                ))),
                Some(_) => {}
            }
        }
        for role in self.spans.keys() {
            if !self.kind.roles().contains(role) {
                issues.push(Issue::error(format!(
                    "sequence {}: role {role} not valid for {} sequences",
                    self.id,
                    self.kind.as_str()
                )));
            }
        }
        let spans: Vec<(TermRole, CharSpan)> = self.spans.iter().map(|(r, s)| (*r, *s)).collect();
        for (i, (ra, a)) in spans.iter().enumerate() {
            for (rb, b) in &spans[i + 1..] {
                if a.overlaps(b) {
                    issues.push(Issue::error(format!("sequence {}: spans {ra} and {rb} overlap", self.id)));
                }
            }
        }
        if self.kind == ProbeKind::Winodec {
            let ordered: Vec<CharSpan> = TermRole::WINODEC.iter().filter_map(|r| self.spans.get(r).copied()).collect();
            if ordered.len() == 4 && ordered.windows(2).any(|w| w[0].end > w[1].start) {
                issues.push(Issue::error(format!("sequence {}: winodec spans out of order", self.id)));
            }
        }
        issues
    }
}

/// Which gender occurrence and which occupation occurrence are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairConfig {
    G1O1,
    G1O2,
    G2O1,
    G2O2,
}

impl PairConfig {
    pub const ALL: [PairConfig; 4] = [PairConfig::G1O1, PairConfig::G1O2, PairConfig::G2O1, PairConfig::G2O2];

    /// Both terms see each other under causal attention.
    pub fn mutual_influence(self) -> bool {
        matches!(self, PairConfig::G1O2 | PairConfig::G2O2)
    }

    pub fn gender_role(self) -> TermRole {
        match self {
            PairConfig::G1O1 | PairConfig::G1O2 => TermRole::Gender1,
            PairConfig::G2O1 | PairConfig::G2O2 => TermRole::Gender2,
        }
    }

    pub fn occupation_role(self) -> TermRole {
        match self {
            PairConfig::G1O1 | PairConfig::G2O1 => TermRole::Occupation1,
            PairConfig::G1O2 | PairConfig::G2O2 => TermRole::Occupation2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PairConfig::G1O1 => "G1_O1",
            PairConfig::G1O2 => "G1_O2",
            PairConfig::G2O1 => "G2_O1",
            PairConfig::G2O2 => "G2_O2",
        }
    }
}

/// What a similarity score pairs: a WinoDec configuration or the encoder-pair roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScoreConfig {
    Winodec(PairConfig),
    EncoderPair,
}

impl ScoreConfig {
    pub fn kind(self) -> ProbeKind {
        match self {
            ScoreConfig::Winodec(_) => ProbeKind::Winodec,
            ScoreConfig::EncoderPair => ProbeKind::EncoderPair,
        }
    }

    pub fn gender_role(self) -> TermRole {
        match self {
            ScoreConfig::Winodec(c) => c.gender_role(),
            ScoreConfig::EncoderPair => TermRole::Gender,
        }
    }

    pub fn occupation_role(self) -> TermRole {
        match self {
            ScoreConfig::Winodec(c) => c.occupation_role(),
            ScoreConfig::EncoderPair => TermRole::Occupation,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreConfig::Winodec(c) => c.as_str(),
            ScoreConfig::EncoderPair => "encoder_pair",
        }
    }
}

impl fmt::Display for ScoreConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown pair configuration {0:?}")]
pub struct UnknownConfig(pub String);

impl FromStr for ScoreConfig {
    type Err = UnknownConfig;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().replace('_', "").as_str() {
            "G1O1" => ScoreConfig::Winodec(PairConfig::G1O1),
            "G1O2" => ScoreConfig::Winodec(PairConfig::G1O2),
            "G2O1" => ScoreConfig::Winodec(PairConfig::G2O1),
            "G2O2" => ScoreConfig::Winodec(PairConfig::G2O2),
            "ENCODERPAIR" | "ENCODER" => ScoreConfig::EncoderPair,
            _ => return Err(UnknownConfig(s.to_string())),
        })
    }
}

impl Serialize for ScoreConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ScoreConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("{role}: surface {surface:?} not found (needed occurrence #{occurrence})")]
    NotFound { role: TermRole, surface: String, occurrence: usize },
    #[error("spans for {first} and {second} overlap")]
    Overlap { first: TermRole, second: TermRole },
    #[error("{0}: empty surface")]
    EmptySurface(TermRole),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqGenError {
    #[error("term bank has no {0}")]
    EmptyBank(&'static str),
    #[error("template {template_id}: expected exactly one {placeholder} placeholder, found {found}")]
    Placeholder { template_id: String, placeholder: &'static str, found: usize },
    #[error("template {template_id}: occupation {occupation:?} is not in the term bank")]
    UnknownOccupation { template_id: String, occupation: String },
    #[error("gender term {0:?} is not in the term bank")]
    UnknownGenderTerm(String),
    #[error("duplicate template id {0:?}")]
    DuplicateTemplate(String),
    #[error("templates line {line}: {reason}")]
    TemplateSyntax { line: usize, reason: String },
    #[error(transparent)]
    Span(#[from] SpanError),
}

/// Stable content-derived id: first 8 bytes of SHA-256 over the identifying fields, hex encoded.
pub fn sequence_id(kind: ProbeKind, template_id: &str, occupation: &str, gender: &str) -> String {
    let mut hasher = Sha256::new();
    for (i, part) in [kind.as_str(), template_id, occupation, gender].iter().enumerate() {
        if i > 0 {
            hasher.update([0x1f]);
        }
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArticleMode {
    /// Always "a", so counterfactual texts differ only in the terms.
    #[default]
    Fixed,
    /// "an" before a vowel letter.
    Agree,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WinodecOptions {
    pub article: ArticleMode,
}

pub fn generate_winodec(bank: &TermBank) -> Result<Vec<ProbeSequence>, SeqGenError> {
    generate_winodec_with(bank, WinodecOptions::default())
}

pub fn generate_winodec_with(bank: &TermBank, options: WinodecOptions) -> Result<Vec<ProbeSequence>, SeqGenError> {
    if bank.occupations.is_empty() {
        return Err(SeqGenError::EmptyBank("occupations"));
    }
    if bank.gender_terms.is_empty() {
        return Err(SeqGenError::EmptyBank("gender terms"));
    }
    let template_id = match options.article {
        ArticleMode::Fixed => WINODEC_TEMPLATE_ID,
        ArticleMode::Agree => WINODEC_AGREE_TEMPLATE_ID,
    };

    let mut out = Vec::with_capacity(bank.occupations.len() * bank.gender_terms.len());
    for occupation in &bank.occupations {
        for gender in &bank.gender_terms {
            let occ = occupation.surface.as_str();
            let gen = gender.surface.as_str();
            let mut b = SpanBuilder::default();
            b.lit("The ");
            b.term(TermRole::Occupation1, occ);
            b.lit(" is ");
            b.lit(article(options.article, gen));
            b.lit(" ");
            b.term(TermRole::Gender1, gen);
            b.lit(". The ");
            b.term(TermRole::Gender2, gen);
            b.lit(" is ");
            b.lit(article(options.article, occ));
            b.lit(" ");
            b.term(TermRole::Occupation2, occ);
            b.lit(".");
            out.push(ProbeSequence {
                id: sequence_id(ProbeKind::Winodec, template_id, occ, gen),
                kind: ProbeKind::Winodec,
                text: b.text,
                occupation: occupation.clone(),
                gender_term: gender.clone(),
                template_id: template_id.to_string(),
                spans: b.spans,
            });
        }
    }
    Ok(out)
}

fn article(mode: ArticleMode, next: &str) -> &'static str {
    match mode {
        ArticleMode::Agree if next.starts_with(['a', 'e', 'i', 'o', 'u']) => "an",
        _ => "a",
    }
}

#[derive(Default)]
struct SpanBuilder {
    text: String,
    spans: BTreeMap<TermRole, CharSpan>,
}

impl SpanBuilder {
    fn lit(&mut self, s: &str) {
        self.text.push_str(s);
    }

    fn term(&mut self, role: TermRole, surface: &str) {
        let start = self.text.len();
        self.text.push_str(surface);
        self.spans.insert(role, CharSpan::new(start, self.text.len()));
    }
}

/// A counterfactual template bound to one occupation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderTemplate {
    pub id: String,
    pub occupation: String,
    pub text: String,
}

impl EncoderTemplate {
    pub fn new(id: impl Into<String>, occupation: impl Into<String>, text: impl Into<String>) -> Self {
        Self { id: id.into(), occupation: occupation.into(), text: text.into() }
    }
}

/// Parses `template_id<TAB>occupation<TAB>text` records; `#` lines are comments.
pub fn parse_templates(text: &str) -> Result<Vec<EncoderTemplate>, SeqGenError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let record = raw.strip_suffix('\r').unwrap_or(raw);
        if record.trim().is_empty() || record.starts_with('#') {
            continue;
        }
        let mut fields = record.splitn(3, '\t');
        match (fields.next(), fields.next(), fields.next()) {
            (Some(id), Some(occ), Some(body)) if !id.trim().is_empty() && !occ.trim().is_empty() => {
                out.push(EncoderTemplate::new(id.trim(), occ.trim().to_lowercase(), body))
            }
            _ => {
                return Err(SeqGenError::TemplateSyntax {
                    line: idx + 1,
                    reason: "expected template_id<TAB>occupation<TAB>text".into(),
                })
            }
        }
    }
    Ok(out)
}

pub fn default_templates() -> Vec<EncoderTemplate> {
    parse_templates(DEFAULT_TEMPLATES).expect("shipped templates parse")
}

enum Piece<'a> {
    Lit(&'a str),
    Gender,
    Occupation,
}

fn split_template(t: &EncoderTemplate) -> Result<Vec<Piece<'_>>, SeqGenError> {
    const G: &str = "{gender}";
    const O: &str = "{occupation}";
    for placeholder in [G, O] {
        let found = t.text.matches(placeholder).count();
        if found != 1 {
            return Err(SeqGenError::Placeholder { template_id: t.id.clone(), placeholder, found });
        }
    }
    let mut pieces = Vec::new();
    let mut rest = t.text.as_str();
    while !rest.is_empty() {
        let g = rest.find(G);
        let o = rest.find(O);
        let (at, piece, len) = match (g, o) {
            (Some(g), Some(o)) if g < o => (g, Piece::Gender, G.len()),
            (Some(_), Some(o)) => (o, Piece::Occupation, O.len()),
            (Some(g), None) => (g, Piece::Gender, G.len()),
            (None, Some(o)) => (o, Piece::Occupation, O.len()),
            (None, None) => {
                pieces.push(Piece::Lit(rest));
                break;
            }
        };
        if at > 0 {
            pieces.push(Piece::Lit(&rest[..at]));
        }
        pieces.push(piece);
        rest = &rest[at + len..];
    }
    Ok(pieces)
}

/// Instantiates each template with the default gender nouns ("man", "woman").
pub fn generate_encoder_pairs(
    templates: &[EncoderTemplate],
    bank: &TermBank,
) -> Result<Vec<ProbeSequence>, SeqGenError> {
    generate_encoder_pairs_with(templates, bank, &DEFAULT_PAIR_GENDERS)
}

pub fn generate_encoder_pairs_with(
    templates: &[EncoderTemplate],
    bank: &TermBank,
    genders: &[&str],
) -> Result<Vec<ProbeSequence>, SeqGenError> {
    let gender_entries: Vec<&TermEntry> = genders
        .iter()
        .map(|g| bank.gender_term(g).ok_or_else(|| SeqGenError::UnknownGenderTerm(g.to_string())))
        .collect::<Result<_, _>>()?;

    let mut seen = alloc::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(templates.len() * genders.len());
    for template in templates {
        if !seen.insert(template.id.as_str()) {
            return Err(SeqGenError::DuplicateTemplate(template.id.clone()));
        }
        let pieces = split_template(template)?;
        let occupation = bank.occupation(&template.occupation).ok_or_else(|| SeqGenError::UnknownOccupation {
            template_id: template.id.clone(),
            occupation: template.occupation.clone(),
        })?;
        for gender in &gender_entries {
            let mut b = SpanBuilder::default();
            for piece in &pieces {
                match piece {
                    Piece::Lit(s) => b.lit(s),
                    Piece::Gender => b.term(TermRole::Gender, &gender.surface),
                    Piece::Occupation => b.term(TermRole::Occupation, &occupation.surface),
                }
            }
            out.push(ProbeSequence {
                id: sequence_id(ProbeKind::EncoderPair, &template.id, &occupation.surface, &gender.surface),
                kind: ProbeKind::EncoderPair,
                text: b.text,
                occupation: occupation.clone(),
                gender_term: (*gender).clone(),
                template_id: template.id.clone(),
                spans: b.spans,
            });
        }
    }
    Ok(out)
}

/// Resolves role spans by word-bounded search.
///
/// A surface requested by k roles maps, in role order, to its first k
/// occurrences that are not embedded in a longer word ("man" never matches
/// inside "woman").
pub fn locate_term_spans(
    text: &str,
    ordered_terms: &[(TermRole, &str)],
) -> Result<BTreeMap<TermRole, CharSpan>, SpanError> {
    let mut used: BTreeMap<&str, usize> = BTreeMap::new();
    let mut resolved: Vec<(TermRole, CharSpan)> = Vec::with_capacity(ordered_terms.len());
    for &(role, surface) in ordered_terms {
        if surface.is_empty() {
            return Err(SpanError::EmptySurface(role));
        }
        let occurrence = used.entry(surface).or_insert(0);
        let span = text
            .match_indices(surface)
            .filter(|(at, _)| is_word_bounded(text, *at, at + surface.len()))
            .nth(*occurrence)
            .map(|(at, _)| CharSpan::new(at, at + surface.len()))
            .ok_or_else(|| SpanError::NotFound { role, surface: surface.to_string(), occurrence: *occurrence + 1 })?;
        *occurrence += 1;
        if let Some((other, _)) = resolved.iter().find(|(_, s)| s.overlaps(&span)) {
            return Err(SpanError::Overlap { first: *other, second: role });
        }
        resolved.push((role, span));
    }
    Ok(resolved.into_iter().collect())
}

fn is_word_bounded(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::termbank::GenderClass;

    fn tiny_bank() -> TermBank {
        TermBank::parse("gender\tman\tmale\noccupation\tfirefighter\tmale\n").unwrap()
    }

    #[test]
    fn winodec_example_sentence() {
        let seqs = generate_winodec(&tiny_bank()).unwrap();
        assert_eq!(seqs.len(), 1);
        let s = &seqs[0];
        assert_eq!(s.text, "The firefighter is a man. The man is a firefighter.");
        let slices: Vec<&str> = TermRole::WINODEC.iter().map(|r| s.spans[r].slice(&s.text).unwrap()).collect();
        assert_eq!(slices, ["firefighter", "man", "man", "firefighter"]);
        assert!(s.check().is_empty());
    }

    #[test]
    fn winodec_default_bank_is_4000() {
        let seqs = generate_winodec(&TermBank::default_bank()).unwrap();
        assert_eq!(seqs.len(), 4000);
        assert!(seqs.iter().all(|s| s.check().is_empty()));
        let ids: alloc::collections::BTreeSet<_> = seqs.iter().map(|s| &s.id).collect();
        assert_eq!(ids.len(), 4000);
    }

    #[test]
    fn winodec_rejects_empty_classes() {
        let only_occ = TermBank::parse("occupation\tnurse\tfemale\n").unwrap();
        assert_eq!(generate_winodec(&only_occ), Err(SeqGenError::EmptyBank("gender terms")));
        let only_gen = TermBank::parse("gender\twoman\tfemale\n").unwrap();
        assert_eq!(generate_winodec(&only_gen), Err(SeqGenError::EmptyBank("occupations")));
    }

    #[test]
    fn winodec_order_is_occupation_major() {
        let bank = TermBank::default_bank();
        let seqs = generate_winodec(&bank).unwrap();
        assert_eq!(seqs[0].occupation, bank.occupations[0]);
        assert_eq!(seqs[1].gender_term, bank.gender_terms[1]);
        assert_eq!(seqs[40].occupation, bank.occupations[1]);
    }

    #[test]
    fn agree_mode_adjusts_article() {
        let bank = TermBank::parse("gender\tuncle\tmale\noccupation\telectrician\tmale\n").unwrap();
        let s = &generate_winodec_with(&bank, WinodecOptions { article: ArticleMode::Agree }).unwrap()[0];
        assert_eq!(s.text, "The electrician is an uncle. The uncle is an electrician.");
        assert!(s.check().is_empty());
        assert_eq!(s.template_id, WINODEC_AGREE_TEMPLATE_ID);
        let fixed = &generate_winodec(&bank).unwrap()[0];
        assert_eq!(fixed.text, "The electrician is a uncle. The uncle is a electrician.");
        assert_ne!(fixed.id, s.id);
    }

    #[test]
    fn encoder_plumber_pair() {
        let bank = TermBank::default_bank();
        let t = EncoderTemplate::new(
            "plumber-pipes",
            "plumber",
            "The {gender} works as a {occupation} fixing pipes around the neighbourhood.",
        );
        let seqs = generate_encoder_pairs(&[t], &bank).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].text, "The man works as a plumber fixing pipes around the neighbourhood.");
        assert_eq!(seqs[1].text, "The woman works as a plumber fixing pipes around the neighbourhood.");
        assert_eq!(seqs[1].gender_term.class, GenderClass::Female);
        for s in &seqs {
            assert!(s.check().is_empty());
        }
    }

    #[test]
    fn default_templates_give_40() {
        let seqs = generate_encoder_pairs(&default_templates(), &TermBank::default_bank()).unwrap();
        assert_eq!(seqs.len(), 40);
        let male_stereo = seqs.iter().filter(|s| s.occupation.stereotype == GenderClass::Male).count();
        assert_eq!(male_stereo, 20);
    }

    #[test]
    fn template_without_occupation_placeholder() {
        let t = EncoderTemplate::new("busy", "plumber", "The {gender} is busy.");
        let err = generate_encoder_pairs(&[t], &TermBank::default_bank()).unwrap_err();
        assert_eq!(err, SeqGenError::Placeholder { template_id: "busy".into(), placeholder: "{occupation}", found: 0 });
    }

    #[test]
    fn template_errors() {
        let bank = TermBank::default_bank();
        let t = EncoderTemplate::new("x", "astronaut", "The {gender} is an {occupation}.");
        assert!(matches!(generate_encoder_pairs(&[t], &bank), Err(SeqGenError::UnknownOccupation { .. })));
        let t = EncoderTemplate::new("x", "nurse", "The {gender} {gender} is a {occupation}.");
        assert!(matches!(generate_encoder_pairs(&[t], &bank), Err(SeqGenError::Placeholder { found: 2, .. })));
        let t = EncoderTemplate::new("x", "nurse", "The {gender} is a {occupation}.");
        assert!(matches!(
            generate_encoder_pairs_with(core::slice::from_ref(&t), &bank, &["person"]),
            Err(SeqGenError::UnknownGenderTerm(_))
        ));
        assert!(matches!(generate_encoder_pairs(&[t.clone(), t], &bank), Err(SeqGenError::DuplicateTemplate(_))));
    }

    #[test]
    fn occupation_before_gender_template() {
        let bank = TermBank::default_bank();
        let t = EncoderTemplate::new("x", "nurse", "{occupation} duty fell to the {gender}.");
        let seqs = generate_encoder_pairs(&[t], &bank).unwrap();
        assert_eq!(seqs[1].text, "nurse duty fell to the woman.");
        assert!(seqs.iter().all(|s| s.check().is_empty()));
    }

    #[test]
    fn parse_templates_format() {
        let ts = parse_templates("# c\nid1\tHR Specialist\tThe {gender} is an {occupation}.\n").unwrap();
        assert_eq!(ts, [EncoderTemplate::new("id1", "hr specialist", "The {gender} is an {occupation}.")]);
        assert!(matches!(parse_templates("only-one-field\n"), Err(SeqGenError::TemplateSyntax { line: 1, .. })));
        assert_eq!(default_templates().len(), 20);
    }

    #[test]
    fn locate_repeated_surface_left_to_right() {
        let spans =
            locate_term_spans("The man is a man.", &[(TermRole::Gender1, "man"), (TermRole::Gender2, "man")]).unwrap();
        assert_eq!(spans[&TermRole::Gender1], CharSpan::new(4, 7));
        assert_eq!(spans[&TermRole::Gender2], CharSpan::new(13, 16));
    }

    #[test]
    fn locate_not_found() {
        let err = locate_term_spans("The man is here.", &[(TermRole::Occupation1, "nurse")]).unwrap_err();
        assert!(matches!(err, SpanError::NotFound { role: TermRole::Occupation1, .. }));
    }

    #[test]
    fn locate_respects_word_boundaries() {
        let spans = locate_term_spans("The woman is a man.", &[(TermRole::Gender, "man")]).unwrap();
        assert_eq!(spans[&TermRole::Gender], CharSpan::new(15, 18));
        assert!(locate_term_spans("The chairman sat.", &[(TermRole::Gender, "man")]).is_err());
    }

    #[test]
    fn locate_overlap() {
        let err = locate_term_spans(
            "The hr specialist left.",
            &[(TermRole::Occupation, "hr specialist"), (TermRole::Gender, "specialist")],
        )
        .unwrap_err();
        assert_eq!(err, SpanError::Overlap { first: TermRole::Occupation, second: TermRole::Gender });
    }

    #[test]
    fn locate_agrees_with_generator() {
        for s in generate_winodec(&TermBank::default_bank()).unwrap() {
            let occ = s.occupation.surface.as_str();
            let gen = s.gender_term.surface.as_str();
            let located = locate_term_spans(
                &s.text,
                &[
                    (TermRole::Occupation1, occ),
                    (TermRole::Gender1, gen),
                    (TermRole::Gender2, gen),
                    (TermRole::Occupation2, occ),
                ],
            )
            .unwrap();
            assert_eq!(located, s.spans, "{}", s.text);
        }
    }

    #[test]
    fn pair_config_semantics() {
        let mutual: Vec<_> = PairConfig::ALL.iter().filter(|c| c.mutual_influence()).collect();
        assert_eq!(mutual, [&PairConfig::G1O2, &PairConfig::G2O2]);
        assert_eq!(PairConfig::G1O2.gender_role(), TermRole::Gender1);
        assert_eq!(PairConfig::G1O2.occupation_role(), TermRole::Occupation2);
        assert_eq!("g2o2".parse::<ScoreConfig>().unwrap(), ScoreConfig::Winodec(PairConfig::G2O2));
        assert_eq!("G1_O2".parse::<ScoreConfig>().unwrap(), ScoreConfig::Winodec(PairConfig::G1O2));
        assert!("G9".parse::<ScoreConfig>().is_err());
    }

    #[test]
    fn ids_are_stable() {
        assert_eq!(sequence_id(ProbeKind::Winodec, "winodec", "firefighter", "man").len(), 16);
        let a: Vec<_> = generate_winodec(&tiny_bank()).unwrap().into_iter().map(|s| s.id).collect();
        let b: Vec<_> = generate_winodec(&tiny_bank()).unwrap().into_iter().map(|s| s.id).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn check_flags_bad_span() {
        let mut s = generate_winodec(&tiny_bank()).unwrap().remove(0);
        s.spans.insert(TermRole::Gender2, CharSpan::new(0, 3));
        let issues = s.check();
        assert!(!issues.is_empty());
        s.spans.remove(&TermRole::Gender2);
        assert!(s.check().iter().any(|i| i.message.contains("missing span")));
    }
}
