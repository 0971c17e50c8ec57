//! Question-type-aware context selection: how many passages and images
//! accompany a question.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::RankedList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestionType {
    /// Non-diagram true/false.
    #[serde(rename = "NDQ_TF")]
    NdqTf,
    /// Non-diagram multiple choice.
    #[serde(rename = "NDQ_MC")]
    NdqMc,
    /// Diagram multiple choice.
    #[serde(rename = "DQ_MC")]
    DqMc,
    #[serde(rename = "AMBIGUOUS")]
    Ambiguous,
}

impl QuestionType {
    pub const ALL: [QuestionType; 4] = [
        QuestionType::NdqTf,
        QuestionType::NdqMc,
        QuestionType::DqMc,
        QuestionType::Ambiguous,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            QuestionType::NdqTf => "NDQ_TF",
            QuestionType::NdqMc => "NDQ_MC",
            QuestionType::DqMc => "DQ_MC",
            QuestionType::Ambiguous => "AMBIGUOUS",
        }
    }

    pub fn is_diagram(&self) -> bool {
        matches!(self, QuestionType::DqMc)
    }
}

impl std::fmt::Display for QuestionType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QuestionType::ALL
            .into_iter()
            .find(|q| q.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "question type",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub ndq_passages: usize,
    pub ndq_images: usize,
    pub dq_passages: usize,
    pub dq_images: usize,
    pub fallback_passages: usize,
    pub fallback_images: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            ndq_passages: 6,
            ndq_images: 0,
            dq_passages: 0,
            dq_images: 1,
            fallback_passages: 3,
            fallback_images: 1,
        }
    }
}

impl PolicyConfig {
    /// `(passages, images)` requested for a question type.
    pub fn counts(&self, qtype: QuestionType) -> (usize, usize) {
        match qtype {
            QuestionType::NdqTf | QuestionType::NdqMc => (self.ndq_passages, self.ndq_images),
            QuestionType::DqMc => (self.dq_passages, self.dq_images),
            QuestionType::Ambiguous => (self.fallback_passages, self.fallback_images),
        }
    }
}

/// `passages=N images=M`, the command-line rendering of a policy decision.
pub fn describe_counts(qtype: QuestionType, cfg: &PolicyConfig) -> String {
    let (p, i) = cfg.counts(qtype);
    format!("passages={p} images={i}")
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ContextBundle {
    pub passages: Vec<String>,
    pub images: Vec<String>,
}

/// Takes the top passages and images for `qtype`, in rank order. Fewer are
/// returned when a ranking is shorter than requested.
pub fn select_context(
    qtype: QuestionType,
    ranked_text: &RankedList,
    ranked_images: &RankedList,
    cfg: &PolicyConfig,
) -> ContextBundle {
    let (np, ni) = cfg.counts(qtype);
    let take =
        |r: &RankedList, n: usize| r.entries.iter().take(n).map(|e| e.doc_id.clone()).collect();
    ContextBundle {
        passages: take(ranked_text, np),
        images: take(ranked_images, ni),
    }
}

/// One cell of the context-quantity ablation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AblationConfig {
    pub name: &'static str,
    pub passages: usize,
    pub images: usize,
    pub optimal: bool,
}

const ABLATION_GRID: [AblationConfig; 5] = [
    AblationConfig {
        name: "3P-3Images",
        passages: 3,
        images: 3,
        optimal: false,
    },
    AblationConfig {
        name: "3P-1Image",
        passages: 3,
        images: 1,
        optimal: false,
    },
    AblationConfig {
        name: "6P-1Image",
        passages: 6,
        images: 1,
        optimal: false,
    },
    AblationConfig {
        name: "1P-1Image",
        passages: 1,
        images: 1,
        optimal: false,
    },
    AblationConfig {
        name: "0P-1Image",
        passages: 0,
        images: 1,
        optimal: true,
    },
];

pub fn policy_table() -> &'static [AblationConfig] {
    &ABLATION_GRID
}

/// Looks up an ablation cell. `3P\1Image` and `3P/1Image` spellings are accepted.
pub fn lookup_ablation(name: &str) -> Result<AblationConfig> {
    let norm = name.trim().replace(['\\', '/', ' '], "-");
    ABLATION_GRID
        .iter()
        .find(|c| c.name.eq_ignore_ascii_case(&norm))
        .copied()
        .ok_or_else(|| Error::Unknown {
            kind: "ablation configuration",
            name: name.to_string(),
        })
}
