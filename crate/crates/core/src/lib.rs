//! Directional bridge counts, quadrisecants, knot diagrams and superbridge
//! bookkeeping for closed space curves.
//!
//! Geometry is generic over [`Scalar`] (`f32` or `f64`); exact work uses
//! rationals and integer Laurent polynomials. The aliases below fix `f64`.

pub mod curves;
pub mod diagram;
pub mod directional;
pub mod exact;
pub mod fixtures;
pub mod geom;
pub mod invariants;
pub mod scalar;
pub mod secants;
pub mod tolerances;
pub mod workbench;

use thiserror::Error;

pub use scalar::Scalar;
pub use tolerances::Tolerances;

pub type Point = geom::Vec3<f64>;
pub type Point2 = geom::Vec2<f64>;
pub type Curve = curves::ParametricKnot<f64>;
pub type Polygon = curves::PolygonalKnot<f64>;
pub type Direction = directional::Direction<f64>;
pub type BridgeCount = directional::BridgeCount<f64>;
pub type SphereSearchReport = directional::SphereSearchReport<f64>;
pub type PluckerLine = secants::PluckerLine<f64>;
pub type SecantLine = secants::SecantLine<f64>;
pub type Projection = diagram::PlanarProjection<f64>;
pub type Alexander = invariants::LaurentPoly<i64>;

/// Any error raised by the library, tagged by module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Curve(#[from] curves::CurveError),
    #[error(transparent)]
    Directional(#[from] directional::DirectionalError),
    #[error(transparent)]
    Secant(#[from] secants::SecantError),
    #[error(transparent)]
    Diagram(#[from] diagram::DiagramError),
    #[error(transparent)]
    Invariant(#[from] invariants::InvariantError),
    #[error(transparent)]
    Workbench(#[from] workbench::WorkbenchError),
}

impl Error {
    /// Variant name of the underlying module error, e.g. `"NotAKnot"`.
    pub fn name(&self) -> String {
        let s = self.to_string();
        s.split(':').next().unwrap_or(&s).trim().to_string()
    }
}
