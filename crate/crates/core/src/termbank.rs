//! Gendered terms and stereotyped occupations.
//!
//! The on-disk form is one tab-separated record per line:
//! `category<TAB>surface<TAB>class`, with `category` one of `gender` or
//! `occupation` and `class` one of `male` or `female`. Lines starting with `#`
//! are comments and blank lines are skipped. Surfaces are lowercased on load.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::issue::Issue;

const DEFAULT_BANK: &str = include_str!("../data/default_term_bank.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderClass {
    Male,
    Female,
}

impl GenderClass {
    pub const ALL: [GenderClass; 2] = [GenderClass::Male, GenderClass::Female];

    pub fn as_str(self) -> &'static str {
        match self {
            GenderClass::Male => "male",
            GenderClass::Female => "female",
        }
    }
}

impl fmt::Display for GenderClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenderClass {
    type Err = TermBankError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "male" => Ok(GenderClass::Male),
            "female" => Ok(GenderClass::Female),
            other => Err(TermBankError::UnknownClass { line: 0, label: other.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermEntry {
    pub surface: String,
    pub class: GenderClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OccupationEntry {
    pub surface: String,
    pub stereotype: GenderClass,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermBankError {
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate {category} surface {surface:?}")]
    Duplicate { line: usize, category: &'static str, surface: String },
    #[error("line {line}: unknown class label {label:?} (expected male or female)")]
    UnknownClass { line: usize, label: String },
}

/// Vocabulary driving corpus generation and result grouping.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermBank {
    pub gender_terms: Vec<TermEntry>,
    pub occupations: Vec<OccupationEntry>,
}

impl TermBank {
    /// The shipped bank: 20 terms per gender, 50 occupations per stereotype.
    pub fn default_bank() -> Self {
        Self::parse(DEFAULT_BANK).expect("shipped term bank parses")
    }

    pub fn parse(text: &str) -> Result<Self, TermBankError> {
        let mut bank = TermBank::default();
        let mut seen_gender = BTreeSet::new();
        let mut seen_occupation = BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let record = raw.strip_suffix('\r').unwrap_or(raw);
            if record.trim().is_empty() || record.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = record.split('\t').collect();
            if fields.len() != 3 {
                return Err(TermBankError::Malformed {
                    line,
                    reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            let surface = fields[1].trim().to_lowercase();
            if surface.is_empty() {
                return Err(TermBankError::Malformed { line, reason: "empty surface".into() });
            }
            let class = GenderClass::from_str(fields[2].trim())
                .map_err(|_| TermBankError::UnknownClass { line, label: fields[2].to_string() })?;
            match fields[0].trim() {
                "gender" => {
                    if !seen_gender.insert(surface.clone()) {
                        return Err(TermBankError::Duplicate { line, category: "gender", surface });
                    }
                    bank.gender_terms.push(TermEntry { surface, class });
                }
                "occupation" => {
                    if !seen_occupation.insert(surface.clone()) {
                        return Err(TermBankError::Duplicate { line, category: "occupation", surface });
                    }
                    bank.occupations.push(OccupationEntry { surface, stereotype: class });
                }
                other => return Err(TermBankError::Malformed { line, reason: format!("unknown category {other:?}") }),
            }
        }
        Ok(bank)
    }

    /// Serializes to the term-bank file format; gender terms first, then occupations.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.gender_terms {
            out.push_str(&format!("gender\t{}\t{}\n", t.surface, t.class));
        }
        for o in &self.occupations {
            out.push_str(&format!("occupation\t{}\t{}\n", o.surface, o.stereotype));
        }
        out
    }

    pub fn gender_term(&self, surface: &str) -> Option<&TermEntry> {
        self.gender_terms.iter().find(|t| t.surface == surface)
    }

    pub fn occupation(&self, surface: &str) -> Option<&OccupationEntry> {
        self.occupations.iter().find(|o| o.surface == surface)
    }

    /// Returns every violated invariant; empty means the bank is usable for generation.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Vec::new();

        let mut seen = BTreeSet::new();
        for (i, t) in self.gender_terms.iter().enumerate() {
            check_surface(&mut issues, "gender term", i, &t.surface);
            if !t.surface.is_empty() && !seen.insert(t.surface.as_str()) {
                issues.push(Issue::error(format!("gender term #{i}: duplicate surface {:?}", t.surface)));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, o) in self.occupations.iter().enumerate() {
            check_surface(&mut issues, "occupation", i, &o.surface);
            if !o.surface.is_empty() && !seen.insert(o.surface.as_str()) {
                issues.push(Issue::error(format!("occupation #{i}: duplicate surface {:?}", o.surface)));
            }
        }

        for class in GenderClass::ALL {
            if !self.gender_terms.iter().any(|t| t.class == class) {
                issues.push(Issue::error(format!("no {class} gender terms")));
            }
            if !self.occupations.iter().any(|o| o.stereotype == class) {
                issues.push(Issue::error(format!("no {class}-stereotyped occupations")));
            }
        }
        issues
    }
}

fn check_surface(issues: &mut Vec<Issue>, what: &str, idx: usize, surface: &str) {
    if surface.is_empty() {
        issues.push(Issue::error(format!("{what} #{idx}: empty surface")));
        return;
    }
    if surface.trim() != surface {
        issues.push(Issue::error(format!("{what} #{idx}: surface {surface:?} has surrounding whitespace")));
    }
    if surface.chars().any(|c| c.is_uppercase()) {
        issues.push(Issue::error(format!("{what} #{idx}: surface {surface:?} is not lowercase")));
    }
    if surface.contains(['\t', '\n', '\r']) {
        issues.push(Issue::error(format!("{what} #{idx}: surface {surface:?} contains a control separator")));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bank_sizes() {
        let bank = TermBank::default_bank();
        assert_eq!(bank.gender_terms.len(), 40);
        assert_eq!(bank.occupations.len(), 100);
        for class in GenderClass::ALL {
            assert_eq!(bank.gender_terms.iter().filter(|t| t.class == class).count(), 20);
            assert_eq!(bank.occupations.iter().filter(|o| o.stereotype == class).count(), 50);
        }
        assert!(bank.validate().is_empty());
    }

    #[test]
    fn empty_file_is_empty_bank() {
        let bank = TermBank::parse("# nothing here\n\n").unwrap();
        assert!(bank.gender_terms.is_empty() && bank.occupations.is_empty());
    }

    #[test]
    fn duplicate_surface_rejected() {
        let err = TermBank::parse("gender\tman\tmale\ngender\tman\tmale\n").unwrap_err();
        assert_eq!(err, TermBankError::Duplicate { line: 2, category: "gender", surface: "man".into() });
    }

    #[test]
    fn same_surface_in_both_categories_is_fine() {
        let bank = TermBank::parse("gender\tmaid\tfemale\noccupation\tmaid\tfemale\n").unwrap();
        assert_eq!(bank.gender_terms.len(), 1);
        assert_eq!(bank.occupations.len(), 1);
    }

    #[test]
    fn unknown_class_and_malformed() {
        assert!(matches!(TermBank::parse("gender\tman\tmasc\n"), Err(TermBankError::UnknownClass { line: 1, .. })));
        assert!(matches!(TermBank::parse("gender man male\n"), Err(TermBankError::Malformed { line: 1, .. })));
        assert!(matches!(TermBank::parse("job\tnurse\tfemale\n"), Err(TermBankError::Malformed { line: 1, .. })));
        assert!(matches!(TermBank::parse("occupation\t \tfemale\n"), Err(TermBankError::Malformed { line: 1, .. })));
    }

    #[test]
    fn lowercased_on_load() {
        let bank = TermBank::parse("occupation\tHR Specialist\tfemale\r\n").unwrap();
        assert_eq!(bank.occupations[0].surface, "hr specialist");
    }

    #[test]
    fn validate_flags_empty_surface() {
        let mut bank = TermBank::default_bank();
        bank.occupations[3].surface.clear();
        let issues = bank.validate();
        assert_eq!(issues.len(), 1, "{issues:?}");
        assert!(issues[0].message.contains("empty surface"));
    }

    #[test]
    fn validate_flags_missing_class() {
        let mut bank = TermBank::default_bank();
        bank.gender_terms.retain(|t| t.class == GenderClass::Male);
        let issues = bank.validate();
        assert_eq!(issues.len(), 1, "{issues:?}");
        assert!(issues[0].message.contains("no female gender terms"));
    }

    #[test]
    fn validate_flags_each_mutation() {
        let base = TermBank::default_bank();

        let mut b = base.clone();
        b.gender_terms[0].surface = "Man".into();
        assert_eq!(b.validate().len(), 1);

        let mut b = base.clone();
        b.occupations[0].surface = " plumber".into();
        assert_eq!(b.validate().len(), 1);

        let mut b = base.clone();
        b.occupations[1].surface = b.occupations[0].surface.clone();
        assert_eq!(b.validate().len(), 1);

        let mut b = base;
        b.occupations.retain(|o| o.stereotype == GenderClass::Female);
        assert_eq!(b.validate().len(), 1);
    }

    #[test]
    fn tsv_round_trip_on_default() {
        let bank = TermBank::default_bank();
        assert_eq!(TermBank::parse(&bank.to_tsv()).unwrap(), bank);
    }
}
