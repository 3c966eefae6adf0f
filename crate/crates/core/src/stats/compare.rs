//! Group comparison of saliency scores: per (factor[, class], structure)
//! medians over non-zero scores plus a Mann-Whitney test. Subjects whose
//! scores are zero for a cell are excluded from that cell, and a cell
//! whose group has no non-zero scores renders as N/A.

use super::rank::mann_whitney_u;
use super::summary::{summarize, SummaryStats};
use crate::camscore::CamScoreRecord;
use crate::raster::StructureKind;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupCompareRow {
    pub factor: String,
    /// Risk-factor level when the comparison is stratified by class.
    pub class: Option<String>,
    pub structure: StructureKind,
    pub group_a: String,
    pub group_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub summary_a: Option<SummaryStats>,
    pub summary_b: Option<SummaryStats>,
    pub u_statistic: Option<f64>,
    pub p_value: Option<f64>,
}

/// Compare scores between exactly two groups of subjects.
///
/// `grouping` maps subject ids to group names; `classes` optionally maps
/// (subject_id, factor) to a level for stratified rows.
pub fn group_compare_cam(
    records: &[CamScoreRecord],
    grouping: &HashMap<String, String>,
    classes: Option<&HashMap<(String, String), String>>,
) -> Result<Vec<GroupCompareRow>> {
    let mut groups: BTreeSet<&str> = grouping.values().map(|s| s.as_str()).collect();
    if groups.len() != 2 {
        return Err(Error::EmptyGroup(format!(
            "need exactly two groups, found {}",
            groups.len()
        )));
    }
    let group_a = groups.pop_first().unwrap().to_string();
    let group_b = groups.pop_first().unwrap().to_string();

    // cell key -> (scores_a, scores_b), non-zero scores only
    type Cell = (Vec<f64>, Vec<f64>);
    let mut cells: BTreeMap<(String, Option<String>, usize), Cell> = BTreeMap::new();
    for r in records {
        let Some(score) = r.score else { continue };
        let Some(group) = grouping.get(&r.subject_id) else {
            continue;
        };
        let class = classes.and_then(|m| {
            m.get(&(r.subject_id.clone(), r.factor.clone())).cloned()
        });
        let sidx = StructureKind::ALL
            .iter()
            .position(|&s| s == r.structure)
            .unwrap();
        let cell = cells
            .entry((r.factor.clone(), class, sidx))
            .or_default();
        if score > 0.0 {
            if *group == group_a {
                cell.0.push(score);
            } else {
                cell.1.push(score);
            }
        }
    }

    let rows = cells
        .into_iter()
        .map(|((factor, class, sidx), (a, b))| {
            let (u, p) = if !a.is_empty() && !b.is_empty() {
                let t = mann_whitney_u(&a, &b)?;
                (Some(t.statistic), Some(t.p_value))
            } else {
                (None, None)
            };
            Ok(GroupCompareRow {
                factor,
                class,
                structure: StructureKind::ALL[sidx],
                group_a: group_a.clone(),
                group_b: group_b.clone(),
                n_a: a.len(),
                n_b: b.len(),
                summary_a: (!a.is_empty()).then(|| summarize(&a)),
                summary_b: (!b.is_empty()).then(|| summarize(&b)),
                u_statistic: u,
                p_value: p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}
