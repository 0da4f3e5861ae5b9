//! Non-parametric metafrontier analysis: every group evaluated against every
//! group frontier, the non-concave metafrontier as the per-DMU minimum over
//! group frontiers, and the concave one as the full-reference run.

use serde::Serialize;

use crate::data::DeaData;
use crate::error::{DeaError, Result};
use crate::model::radial::{model_basic, BasicOptions};

/// Named partition of DMU indices; groups are disjoint, their union may be a
/// subset of the data.
#[derive(Clone, Debug, Serialize)]
pub struct Grouping {
    pub names: Vec<String>,
    pub groups: Vec<Vec<usize>>,
}

impl Grouping {
    pub fn new(names: Vec<String>, groups: Vec<Vec<usize>>) -> Result<Self> {
        if names.len() != groups.len() || groups.is_empty() {
            return Err(DeaError::InvalidParameter(
                "grouping needs one name per group and at least one group".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for g in &groups {
            if g.is_empty() {
                return Err(DeaError::InvalidParameter("empty group".into()));
            }
            for &j in g {
                if !seen.insert(j) {
                    return Err(DeaError::InvalidParameter(format!(
                        "DMU {j} appears in more than one group"
                    )));
                }
            }
        }
        Ok(Grouping { names, groups })
    }

    pub fn all_members(&self) -> Vec<usize> {
        self.groups.iter().flatten().copied().collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MetafrontierResult {
    pub grouping: Grouping,
    pub dmunames: Vec<String>,
    /// Evaluated DMUs, in group order.
    pub dmu_order: Vec<usize>,
    /// `blocks[eg][rg]` holds the scores of group `eg`'s DMUs against group
    /// `rg`'s frontier, parallel to `grouping.groups[eg]`.
    pub blocks: Vec<Vec<Vec<Option<f64>>>>,
    /// Per evaluated DMU: minimum over group frontiers, NAs removed.
    pub nonconcave: Vec<Option<f64>>,
    /// Per evaluated DMU: score against all DMUs pooled.
    pub concave: Vec<Option<f64>>,
}

/// Run the basic radial model for every (evaluation group, reference group)
/// pair plus the pooled reference, and fold the minima.
pub fn metafrontier(
    data: &DeaData,
    grouping: &Grouping,
    opts: &BasicOptions,
) -> Result<MetafrontierResult> {
    let n = data.num_dmus();
    for &j in grouping.groups.iter().flatten() {
        if j >= n {
            return Err(DeaError::InvalidParameter(format!(
                "group member {j} out of range 0..{n}"
            )));
        }
    }
    let k = grouping.groups.len();
    let mut blocks: Vec<Vec<Vec<Option<f64>>>> = Vec::with_capacity(k);
    for eg in 0..k {
        let mut row = Vec::with_capacity(k);
        for rg in 0..k {
            let run = model_basic(
                data,
                &BasicOptions {
                    dmu_eval: Some(grouping.groups[eg].clone()),
                    dmu_ref: Some(grouping.groups[rg].clone()),
                    ..opts.clone()
                },
            )?;
            row.push(run.efficiencies());
        }
        blocks.push(row);
    }

    let dmu_order = grouping.all_members();
    let mut nonconcave = Vec::with_capacity(dmu_order.len());
    for (eg, group) in grouping.groups.iter().enumerate() {
        for (pos, _) in group.iter().enumerate() {
            let mut best: Option<f64> = None;
            for rg in 0..k {
                if let Some(v) = blocks[eg][rg][pos] {
                    best = Some(match best {
                        None => v,
                        Some(b) => b.min(v),
                    });
                }
            }
            nonconcave.push(best);
        }
    }

    let pooled = model_basic(
        data,
        &BasicOptions {
            dmu_eval: Some(dmu_order.clone()),
            dmu_ref: None,
            ..opts.clone()
        },
    )?;
    let concave = pooled.efficiencies();

    Ok(MetafrontierResult {
        grouping: grouping.clone(),
        dmunames: data.dmunames.clone(),
        dmu_order,
        blocks,
        nonconcave,
        concave,
    })
}
