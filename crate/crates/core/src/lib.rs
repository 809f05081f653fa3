//! Numerical toolkit for generalised frame bundles with connection.
//!
//! A generalised frame bundle is a manifold carrying a coframe `ϖ = ω ⊕ α`
//! valued in a semidirect product algebra `𝔤 ⋉ ℝⁿ` whose structure residual
//! `dϖ + ½[ϖ∧ϖ]` only has horizontal (`α∧α`) components. This crate builds
//! such coframes on box-shaped charts, checks the structure equation, integrates
//! the induced Lie algebra action, evaluates curvature invariants and probes
//! isotropy groups of the concrete locally Klein examples.
//!
//! Module map:
//!
//! * [`lie`]: structure-constant algebras, semidirect products, wedge brackets.
//! * [`forms`]: dense vector-valued differential forms at a point.
//! * [`chart`]: chart domains, coframe fields, frames, finite-difference `d`.
//! * [`cartan`]: structure residuals and the equivalent equivariance checks.
//! * [`flow`]: RK4 flows, closure detection, path actions, isotropy scans.
//! * [`curvature`]: Ω, Θ, covariant differentials, Bianchi/Ricci checks, Einstein panel.
//! * [`klein`]: group models, quotient presentations and the example catalog.

// NaN-rejecting guards are written as negated comparisons; index loops mirror tensor notation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cartan;
pub mod chart;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod forms;
pub mod klein;
pub mod lie;

pub use cartan::{CartanReport, StructureResidual};
pub use chart::{ChartDomain, CoframeField, FrameAtPoint, DEFAULT_STEP};
pub use curvature::CurvaturePanel;
pub use error::{GfbError, Result};
pub use flow::{AlgebraPath, IsotropyFinding, OrbitTrace, OrbitTypeOrdering};
pub use forms::Form;
pub use klein::{CatalogEntry, GroupElement, GroupModel, QuotientPresentation};
pub use lie::{AlgebraElement, LieAlgebra, ModelAlgebra, SemidirectData};
