//! Built-in curve and surface catalog, addressable by name from run configs.

use crate::curve::{CurveFn, CurveModel, Interval};
use crate::error::{Error, Result};
use crate::hypersurface::TwoRuled;

/// A named catalog entry: either a curve in R⁴ or a two-ruled hypersurface.
#[derive(Debug, Clone)]
pub enum CatalogEntry {
    Curve(CurveModel),
    Surface(TwoRuled),
}

pub const CATALOG_NAMES: [&str; 3] = ["paper_example", "helix4", "moment_curve"];

/// Look up a catalog entry by name.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    match name {
        "paper_example" => Ok(CatalogEntry::Surface(paper_example())),
        "helix4" => Ok(CatalogEntry::Curve(helix4())),
        "moment_curve" => Ok(CatalogEntry::Curve(moment_curve())),
        other => Err(Error::Invalid(format!(
            "unknown catalog name `{other}`; available: {CATALOG_NAMES:?}"
        ))),
    }
}

/// The cuspidal-cross-cap example surface: directors
/// X = (0, cos t, sin t, sin t + t), Y = (1, 0, 0, 0) and base curve with
/// γ' = (1 − 4t³)·X. Its singular set is {s = 0} and the singularity along
/// (0, 0, r) is a cuspidal cross cap × interval.
///
/// γ is an explicit antiderivative (all integration constants set to 0, so
/// γ(0) = (0, 24, −1, −1)); every classification quantity depends on γ only
/// through γ'.
pub fn paper_example() -> TwoRuled {
    let gamma = CurveFn::parse([
        "0",
        "sin(t) - 4*t^3*sin(t) - 12*t^2*cos(t) + 24*t*sin(t) + 24*cos(t)",
        "-cos(t) + 4*t^3*cos(t) - 12*t^2*sin(t) - 24*t*cos(t) + 24*sin(t)",
        "-cos(t) + t^2/2 + 4*t^3*cos(t) - 12*t^2*sin(t) - 24*t*cos(t) + 24*sin(t) - 4/5*t^5",
    ])
    .expect("catalog expressions parse");
    let x = CurveFn::parse(["0", "cos(t)", "sin(t)", "sin(t)+t"]).expect("catalog");
    let y = CurveFn::parse(["1", "0", "0", "0"]).expect("catalog");
    TwoRuled::from_curves(gamma, x, y, Interval::new(-0.7, 0.7))
}

/// Constant-curvature curve spanning all of R⁴ (all of l, κ₁, κ₄, κ₆ are
/// nonzero constants): (cos t, sin t, cos 2t, sin 2t).
pub fn helix4() -> CurveModel {
    CurveModel::parse(
        ["cos(t)", "sin(t)", "cos(2*t)", "sin(2*t)"],
        Interval::new(-1.5, 1.5),
    )
    .expect("catalog expressions parse")
}

/// The moment curve (t, t², t³, t⁴); all curvatures nonconstant.
pub fn moment_curve() -> CurveModel {
    CurveModel::parse(["t", "t^2", "t^3", "t^4"], Interval::new(-1.5, 1.5))
        .expect("catalog expressions parse")
}
