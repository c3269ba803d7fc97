//! Subjective-score analytics: DSCQS difference scores, DMOS
//! aggregation, BT.500 observer screening, one-way ANOVA, and pairwise
//! significance matrices.

mod anova;
mod fdist;
mod scores;
mod screening;

pub use anova::{anova_one_way, significance_matrix, AnovaOutcome};
pub use fdist::{f_cdf, f_survival, ln_gamma, reg_inc_beta};
pub use scores::{compute_dmos, difference_scores, quality_from_dmos};
pub use screening::{screen_subjects, ScreeningReport, SubjectScreening};

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubjectiveError {
    #[error("score {value} from subject {subject_id:?} is outside [0, 100]")]
    ScoreOutOfRange { subject_id: String, value: f64 },
    #[error("subject {subject_id:?} rated {point} more than once")]
    DuplicateTrial { subject_id: String, point: String },
    #[error("need at least {need} subjects, got {got}")]
    FewSubjects { need: usize, got: usize },
    #[error("ANOVA group has {got} values, needs at least 2")]
    SmallGroup { got: usize },
    #[error("codecs do not cover the same points: {0}")]
    CoverageMismatch(String),
}

/// One DSCQS trial: a subject's 0-100 ratings of the hidden reference
/// and the distorted presentation of one rate point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScore {
    pub subject_id: String,
    pub sequence: String,
    pub codec: String,
    pub rate_index: String,
    pub score_reference: f64,
    pub score_distorted: f64,
}

/// Identifies one presented rate point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId {
    pub sequence: String,
    pub codec: String,
    pub rate_index: String,
}

impl std::fmt::Display for PointId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.sequence, self.codec, self.rate_index)
    }
}

/// Difference scores keyed by point, then by subject. BTreeMaps keep
/// iteration order deterministic, which downstream CSV output relies on.
pub type DiffTable = BTreeMap<PointId, BTreeMap<String, f64>>;

#[derive(Debug, Clone)]
pub struct DmosRecord {
    pub sequence: String,
    pub codec: String,
    pub rate_index: String,
    pub dmos: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stdev: f64,
    pub n_subjects: usize,
    pub diff_scores: Vec<f64>,
}

/// Aggregated significance outcome for one ordered codec pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceCell {
    pub codec_pair: (String, String),
    pub n_significant: usize,
    pub n_total: usize,
    /// Points where the first codec was significantly better (lower DMOS).
    pub wins: usize,
    pub losses: usize,
}

impl SignificanceCell {
    /// Renders like "5/36, (5/0)" or "2/36, (1/-1)": significant count
    /// over evaluated points, then wins over negated losses.
    pub fn render(&self) -> String {
        format!(
            "{}/{}, ({}/{})",
            self.n_significant,
            self.n_total,
            self.wins,
            -(self.losses as i64)
        )
    }
}
