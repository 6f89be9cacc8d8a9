//! Both goodness-of-fit frameworks applied to one record/simulation pair.

use serde::{Deserialize, Serialize};

use crate::anderson::{score_traces, AndersonConfig, AndersonScores, Im, QualityLevel};
use crate::error::Result;
use crate::signal::{align_records, ByComponent, Record3C};
use crate::tfgof::{tf_gof, TfConfig, TfGof, TfSummary};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GofConfig {
    pub anderson: AndersonConfig,
    pub tf: TfConfig,
}

/// Scalar and band-resolved scores for one pair, without the TF maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairGof {
    pub tf: ByComponent<TfSummary>,
    pub anderson: ByComponent<AndersonScores>,
}

impl PairGof {
    /// Every emitted score on the 0–10 scale, in a fixed order.
    pub fn all_scores(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (_, s) in self.tf.iter() {
            out.extend([s.eg, s.pg]);
        }
        for (_, a) in self.anderson.iter() {
            for b in &a.bands {
                if let Some(v) = &b.scores {
                    out.extend(v);
                }
            }
            for (_, g) in &a.aggregates {
                out.extend([g.max, g.mean, g.min]);
            }
        }
        out
    }

    /// Lowest quality level across every emitted score.
    pub fn worst_quality(&self) -> QualityLevel {
        self.all_scores()
            .into_iter()
            .map(QualityLevel::from_score)
            .min()
            .unwrap_or(QualityLevel::Excellent)
    }
}

/// Mean-over-bands Anderson score of one measure.
pub fn im_mean(scores: &AndersonScores, im: Im) -> f64 {
    scores.aggregate(im).mean
}

/// Aligns the records onto a common grid and scores them with both methods.
/// The time-frequency maps are returned alongside the summary.
pub fn evaluate_pair(
    rec: &Record3C,
    sim: &Record3C,
    cfg: &GofConfig,
) -> Result<(PairGof, ByComponent<TfGof>)> {
    let (rec, sim) = align_records(rec, sim)?;
    let tf = ByComponent::try_build(|c| tf_gof(rec.component(c), sim.component(c), &cfg.tf))?;
    let anderson = ByComponent::try_build(|c| {
        score_traces(rec.component(c), sim.component(c), &cfg.anderson)
    })?;
    let summary = PairGof {
        tf: ByComponent {
            ew: tf.ew.summary(),
            ns: tf.ns.summary(),
            ud: tf.ud.summary(),
        },
        anderson,
    };
    Ok((summary, tf))
}
