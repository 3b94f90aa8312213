//! COI over consecutive time slices.

use serde::{Deserialize, Serialize};

use crate::agents::{run_triplet_pipeline_with, AgentSystem};
use crate::agents::review::DeferredReviewer;
use crate::coi::{coi_with, SliceBounds};
use crate::csn::{build_csn, MissingCohesion};
use crate::model::TimeSlice;
use crate::CoiReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub bounds: SliceBounds,
    pub comments: usize,
    /// `None` for an empty slice or a failed one.
    pub report: Option<CoiReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One independent pipeline run, network and index per non-empty slice. A
/// failing slice records its error and the series continues. Review items are
/// left unresolved.
pub fn coi_series(slices: &[TimeSlice], system: &AgentSystem, missing: MissingCohesion) -> Vec<SeriesPoint> {
    let mut system = system.clone();
    system.checkpoint_path = None;
    system.review_path = None;
    slices
        .iter()
        .map(|slice| {
            let bounds = SliceBounds {
                start: slice.start,
                end: slice.end,
            };
            let mut point = SeriesPoint {
                bounds,
                comments: slice.comments.len(),
                report: None,
                error: None,
            };
            if slice.comments.is_empty() {
                return point;
            }
            match slice_report(slice, &system, missing) {
                Ok(mut r) => {
                    r.slice_bounds = Some(bounds);
                    point.report = Some(r);
                }
                Err(e) => {
                    tracing::warn!(start = %slice.start, error = %e, "slice failed");
                    point.error = Some(e);
                }
            }
            point
        })
        .collect()
}

fn slice_report(slice: &TimeSlice, system: &AgentSystem, missing: MissingCohesion) -> Result<CoiReport, String> {
    let out = run_triplet_pipeline_with(&slice.comments, system, &mut DeferredReviewer).map_err(|e| e.to_string())?;
    let csn = build_csn(&out.triplets, &out.background.subgroups, system.config().seed).map_err(|e| e.to_string())?;
    coi_with(&csn, missing).map_err(|e| e.to_string())
}
