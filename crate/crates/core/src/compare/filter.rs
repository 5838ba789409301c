use serde::{Deserialize, Serialize};

use super::{ChangeStatus, CompareError, ComparedEntity, ComparisonModel, Origin};

/// Which slices of a comparison to show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FilterMode {
    pub include_static: bool,
    pub include_dynamic: bool,
    pub diff_only: bool,
}

impl Default for FilterMode {
    fn default() -> Self {
        FilterMode { include_static: true, include_dynamic: true, diff_only: false }
    }
}

impl FilterMode {
    pub fn validate(&self) -> Result<(), CompareError> {
        if !self.include_static && !self.include_dynamic {
            return Err(CompareError::InvalidMode);
        }
        Ok(())
    }
}

fn prune(e: &ComparedEntity, mode: &FilterMode) -> Option<ComparedEntity> {
    let keep_origin = match e.origin {
        Origin::Both => true,
        Origin::Static => mode.include_static,
        Origin::Dynamic => mode.include_dynamic,
    };
    if !keep_origin {
        return None;
    }
    let children: Vec<ComparedEntity> = e.children.iter().filter_map(|c| prune(c, mode)).collect();
    if mode.diff_only && e.status == ChangeStatus::Unchanged && children.is_empty() {
        return None;
    }
    let mut out = ComparedEntity { children, ..e.clone() };
    if !mode.include_dynamic {
        out.base_instances = None;
        out.target_instances = None;
        out.base_calls = None;
        out.target_calls = None;
    }
    Some(out)
}

/// Projects a comparison onto the requested mode. Ancestors of kept
/// entities are always kept.
pub fn apply_filter(model: &ComparisonModel, mode: &FilterMode) -> Result<ComparisonModel, CompareError> {
    mode.validate()?;
    let entities = model.entities.iter().filter_map(|e| prune(e, mode)).collect();
    let edges = if mode.include_dynamic {
        model.edges.iter().filter(|e| !mode.diff_only || e.status != ChangeStatus::Unchanged).cloned().collect()
    } else {
        Vec::new()
    };
    Ok(ComparisonModel { entities, edges, ..model.clone() })
}
