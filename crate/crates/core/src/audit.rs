//! Baseline-vs-mitigated comparison.
//!
//! For every group (stereotype class, occupation, or everything) four KS
//! tests are run over the cosine-score distributions:
//!
//! 1. female vs male terms, baseline model
//! 2. female vs male terms, mitigated model
//! 3. female terms, baseline vs mitigated
//! 4. male terms, baseline vs mitigated

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seqgen::ScoreConfig;
use crate::simengine::SimilaritySample;
use crate::stats::{kde, ks_two_sample, summarize, Bandwidth, DistSummary, KdeCurve, KsResult, StatsError};
use crate::termbank::GenderClass;
use crate::TOOL_VERSION;

pub const P_VALUE_METHOD: &str = "asymptotic two-sided Kolmogorov, effective-size corrected";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelRole {
    Baseline,
    Mitigated,
}

impl ModelRole {
    pub const ALL: [ModelRole; 2] = [ModelRole::Baseline, ModelRole::Mitigated];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelRole::Baseline => "baseline",
            ModelRole::Mitigated => "mitigated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonKind {
    FemaleVsMaleBaseline,
    FemaleVsMaleMitigated,
    FemaleBaselineVsMitigated,
    MaleBaselineVsMitigated,
}

impl ComparisonKind {
    pub const ALL: [ComparisonKind; 4] = [
        ComparisonKind::FemaleVsMaleBaseline,
        ComparisonKind::FemaleVsMaleMitigated,
        ComparisonKind::FemaleBaselineVsMitigated,
        ComparisonKind::MaleBaselineVsMitigated,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ComparisonKind::FemaleVsMaleBaseline => "female_vs_male_baseline",
            ComparisonKind::FemaleVsMaleMitigated => "female_vs_male_mitigated",
            ComparisonKind::FemaleBaselineVsMitigated => "female_baseline_vs_mitigated",
            ComparisonKind::MaleBaselineVsMitigated => "male_baseline_vs_mitigated",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ComparisonKind::FemaleVsMaleBaseline => "Female Terms vs Male Terms (Baseline)",
            ComparisonKind::FemaleVsMaleMitigated => "Female Terms vs Male Terms (Mitigated)",
            ComparisonKind::FemaleBaselineVsMitigated => "Female Terms: Baseline vs Mitigated",
            ComparisonKind::MaleBaselineVsMitigated => "Male Terms: Baseline vs Mitigated",
        }
    }

    /// The two (model, gender) cells compared, first sample first.
    pub fn cells(self) -> [(ModelRole, GenderClass); 2] {
        use GenderClass::{Female, Male};
        use ModelRole::{Baseline, Mitigated};
        match self {
            ComparisonKind::FemaleVsMaleBaseline => [(Baseline, Female), (Baseline, Male)],
            ComparisonKind::FemaleVsMaleMitigated => [(Mitigated, Female), (Mitigated, Male)],
            ComparisonKind::FemaleBaselineVsMitigated => [(Baseline, Female), (Mitigated, Female)],
            ComparisonKind::MaleBaselineVsMitigated => [(Baseline, Male), (Mitigated, Male)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    #[default]
    Stereotype,
    Occupation,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: ComparisonKind,
    pub result: KsResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub model: ModelRole,
    pub gender: GenderClass,
    pub summary: DistSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCurve {
    pub model: ModelRole,
    pub gender: GenderClass,
    pub curve: KdeCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBlock {
    pub group_label: String,
    pub rows: Vec<ComparisonRow>,
    pub summaries: Vec<CellSummary>,
    pub curves: Vec<CellCurve>,
}

impl ComparisonBlock {
    pub fn row(&self, kind: ComparisonKind) -> Option<&KsResult> {
        self.rows.iter().find(|r| r.kind == kind).map(|r| &r.result)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeOptions {
    pub grid_size: usize,
    pub bandwidth: Bandwidth,
}

impl Default for KdeOptions {
    fn default() -> Self {
        Self { grid_size: crate::stats::DEFAULT_GRID_SIZE, bandwidth: Bandwidth::Silverman }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompareOptions {
    pub group_by: GroupBy,
    pub kde: Option<KdeOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub group_by: GroupBy,
    pub kde: Option<KdeOptions>,
    pub p_value_method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub tool_version: String,
    pub corpus: String,
    pub config: ScoreConfig,
    pub baseline_label: String,
    pub mitigated_label: String,
    pub parameters: ReportParameters,
    pub blocks: Vec<ComparisonBlock>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("no samples to compare")]
    NoSamples,
    #[error("configuration mismatch: {0} vs {1}")]
    ConfigMismatch(ScoreConfig, ScoreConfig),
    #[error("group {group:?} has no {} samples for {gender} terms", model.as_str())]
    EmptyGroup { group: String, model: ModelRole, gender: GenderClass },
    #[error("group {group:?}: {source}")]
    Stats { group: String, source: StatsError },
}

fn common_config(samples: &[SimilaritySample]) -> Result<Option<ScoreConfig>, AuditError> {
    let Some(first) = samples.first() else { return Ok(None) };
    for s in samples {
        if s.config != first.config {
            return Err(AuditError::ConfigMismatch(first.config, s.config));
        }
    }
    Ok(Some(first.config))
}

fn group_label(group_by: GroupBy, s: &SimilaritySample) -> String {
    match group_by {
        GroupBy::Stereotype => match s.stereotype {
            GenderClass::Male => "Stereotypically Male Jobs".to_string(),
            GenderClass::Female => "Stereotypically Female Jobs".to_string(),
        },
        GroupBy::Occupation => s.occupation.clone(),
        GroupBy::None => "All Occupations".to_string(),
    }
}

/// Sort key giving stereotype groups male-first and occupations alphabetical.
fn group_order(group_by: GroupBy, s: &SimilaritySample) -> (u8, String) {
    match group_by {
        GroupBy::Stereotype => (s.stereotype as u8, String::new()),
        GroupBy::Occupation => (0, s.occupation.clone()),
        GroupBy::None => (0, String::new()),
    }
}

type Cells = BTreeMap<(ModelRole, GenderClass), Vec<f64>>;

pub fn compare(
    baseline: &[SimilaritySample],
    mitigated: &[SimilaritySample],
    options: CompareOptions,
) -> Result<AuditReport, AuditError> {
    let config = match (common_config(baseline)?, common_config(mitigated)?) {
        (Some(a), Some(b)) if a != b => return Err(AuditError::ConfigMismatch(a, b)),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(AuditError::NoSamples),
    };

    let mut groups: BTreeMap<(u8, String), (String, Cells)> = BTreeMap::new();
    for (model, samples) in [(ModelRole::Baseline, baseline), (ModelRole::Mitigated, mitigated)] {
        for s in samples {
            let (_, cells) = groups
                .entry(group_order(options.group_by, s))
                .or_insert_with(|| (group_label(options.group_by, s), Cells::new()));
            cells.entry((model, s.gender_class)).or_default().push(s.score);
        }
    }

    let mut blocks = Vec::with_capacity(groups.len());
    for (_, (label, cells)) in groups {
        blocks.push(build_block(label, &cells, options.kde)?);
    }

    let label_of = |samples: &[SimilaritySample]| samples.first().map(|s| s.model_label.clone()).unwrap_or_default();
    Ok(AuditReport {
        tool_version: TOOL_VERSION.to_string(),
        corpus: format!("{} ({} sequences)", config.kind().as_str(), baseline.len().max(mitigated.len())),
        config,
        baseline_label: label_of(baseline),
        mitigated_label: label_of(mitigated),
        parameters: ReportParameters {
            group_by: options.group_by,
            kde: options.kde,
            p_value_method: P_VALUE_METHOD.to_string(),
        },
        blocks,
    })
}

fn build_block(label: String, cells: &Cells, kde_opts: Option<KdeOptions>) -> Result<ComparisonBlock, AuditError> {
    let mut summaries = Vec::new();
    let mut curves = Vec::new();
    for model in ModelRole::ALL {
        for gender in GenderClass::ALL {
            let xs = cells.get(&(model, gender)).filter(|xs| !xs.is_empty()).ok_or_else(|| AuditError::EmptyGroup {
                group: label.clone(),
                model,
                gender,
            })?;
            let stats_err = |source| AuditError::Stats { group: label.clone(), source };
            summaries.push(CellSummary { model, gender, summary: summarize(xs).map_err(stats_err)? });
            if let Some(k) = kde_opts {
                curves.push(CellCurve { model, gender, curve: kde(xs, k.grid_size, k.bandwidth).map_err(stats_err)? });
            }
        }
    }
    let rows = ComparisonKind::ALL
        .iter()
        .map(|&kind| {
            let [a, b] = kind.cells();
            ks_two_sample(&cells[&a], &cells[&b])
                .map(|result| ComparisonRow { kind, result })
                .map_err(|source| AuditError::Stats { group: label.clone(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComparisonBlock { group_label: label, rows, summaries, curves })
}
