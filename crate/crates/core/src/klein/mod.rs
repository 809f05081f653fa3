//! Concrete groups, semidirect products, discrete quotients and the example catalog.

mod catalog;
pub mod groups;
pub mod quaternion;
pub mod quotient;

pub use catalog::{build_catalog_entry, catalog_ids, catalog_info, CatalogEntry, CatalogInfo};
pub use groups::{GroupElement, GroupModel, SemidirectGroup, So2Group, Spin4Group};
pub use quaternion::quaternion_action;
pub use quotient::{close_under_products, IsotropySearch, QuotientPresentation};

use std::sync::Arc;

use crate::error::{GfbError, Result};

/// Group models addressable by id (`"so2"`, `"spin4"`).
pub fn group_model(id: &str) -> Result<Arc<dyn GroupModel>> {
    match id {
        "so2" => Ok(Arc::new(So2Group)),
        "spin4" => Ok(Arc::new(Spin4Group)),
        other => Err(GfbError::UnknownId(other.to_string())),
    }
}

/// `(g₁,x₁)(g₂,x₂) = (g₁g₂, g₂⁻¹·x₁ + x₂)`.
pub fn semidirect_mul(group: &SemidirectGroup, a: &GroupElement, b: &GroupElement) -> GroupElement {
    group.mul(a, b)
}
