//! Sphere packings whose contact graph is `G ⊕ K₂` (a graph joined with two
//! mutually tangent hub spheres).
//!
//! The pieces:
//!
//! - [`graph`]: labelled graphs, joins, forest/chordal/caterpillar checks
//!   and edge-count bounds.
//! - [`packing`]: packings, tolerance-aware contact extraction and pose
//!   normalization.
//! - [`moebius`]: Möbius transforms of points and spheres, and the
//!   normalization to standard form (unit hubs at `(0,0,±1)`, every other
//!   center on `z = 0`).
//! - [`rigidity`]: rigidity matrices, equilibrium stresses by SVD, and
//!   0-extension certificates.
//! - [`lift`], [`chain`], [`layout`]: unit pennies in the plane and their
//!   lift to spheres, tangent-circle chains around the forbidden disk, and
//!   penny layouts of trees.
//! - [`experiment`], [`svg`]: seeded Monte Carlo runs and drawings.
//!
//! Geometry is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! `f64`.

// Negated comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod experiment;
pub mod geom;
pub mod graph;
pub mod json;
pub mod layout;
pub mod lift;
pub mod linalg;
pub mod moebius;
pub mod packing;
pub mod rigidity;
pub mod sampling;
pub mod scalar;
pub mod svg;

pub use chain::{build_chain, chain_packing, close_chain_solve, ChainError, ChainResult};
pub use experiment::{montecarlo_chain, montecarlo_stressfree, ExperimentConfig, ExperimentError};
pub use geom::{Mat3, Point2, Point3, RigidMotion};
pub use graph::{maxwell_bound, penny_edge_bound, sphere_contact_bound, Graph, GraphError};
pub use layout::{heuristic_penny_layout, realize_tree_with_radii, LayoutError};
pub use lift::{lift_packing, penny_to_sphere, sphere_to_penny, LiftError, PennyRealization};
pub use moebius::{standard_form, MoebiusError, MoebiusTransform, StandardForm, Tau, TransformPipeline};
pub use packing::{Packing, PackingError, Sphere, ToleranceProfile, ValidationReport};
pub use rigidity::{is_stress_free, zero_extension_certificate, Framework, RigidityError, StressReport};
pub use scalar::Real;
pub use svg::{plot_svg, render_svg, Plot, PlotError};

pub type Packing64 = Packing<f64>;
pub type Sphere64 = Sphere<f64>;
pub type Tolerance64 = ToleranceProfile<f64>;
pub type Transform64 = MoebiusTransform<f64>;
pub type Pipeline64 = TransformPipeline<f64>;
pub type Pennies64 = PennyRealization<f64>;
pub type Chain64 = ChainResult<f64>;
