//! The two-ruled hypersurface f(t,s,r) = γ(t) + s·X(t) + r·Y(t): evaluation,
//! partial derivatives, family classification, frontal/front tests, and the
//! gauge pipeline raw → constrictively adapted → unit-|X'| that every
//! criterion downstream assumes.

use std::sync::Arc;

use crate::curve::{CurveFn, Interval, ScalarFn};
use crate::error::{Error, Result};
use crate::framefield::{
    adapt_directors, extract_invariants, integrate_frame, DataFn, FrameField, IntegrateOptions,
    InvariantData, ParamMap,
};
use crate::geom::{self, Mat4, Vec4};

pub use crate::geom::wedge3 as triple_wedge;

/// Gauge state of a [`TwoRuled`]'s directors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeState {
    Raw,
    Adapted,
    AdaptedUnitSpeed,
}

impl GaugeState {
    pub fn name(&self) -> &'static str {
        match self {
            GaugeState::Raw => "raw",
            GaugeState::Adapted => "adapted",
            GaugeState::AdaptedUnitSpeed => "adapted+unit-speed",
        }
    }
}

/// Record of the gauge choices made while preparing a surface.
#[derive(Debug, Clone, Default)]
pub struct GaugeInfo {
    pub theta0: Option<f64>,
    pub notes: Vec<String>,
}

/// Mapping from the raw user chart (t, s, r) into the prepared chart
/// (t̃, ŝ, r̂). The plane spanned by the directors is unchanged by
/// adaptation, so plane coordinates map by orthogonal projection onto the
/// adapted directors.
#[derive(Clone)]
pub struct ChartFromRaw {
    pub raw_x: CurveFn,
    pub raw_y: CurveFn,
    pub adapted_x: CurveFn,
    pub adapted_y: CurveFn,
    pub map: Arc<ParamMap>,
}

impl std::fmt::Debug for ChartFromRaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ChartFromRaw(..)")
    }
}

impl ChartFromRaw {
    /// Map a raw chart point to the prepared chart.
    pub fn map_point(&self, t: f64, s: f64, r: f64) -> Result<(f64, f64, f64)> {
        let xi = geom::add(
            geom::scale(self.raw_x.value(t)?, s),
            geom::scale(self.raw_y.value(t)?, r),
        );
        let s_hat = geom::dot(xi, self.adapted_x.value(t)?);
        let r_hat = geom::dot(xi, self.adapted_y.value(t)?);
        Ok((self.map.forward(t)?, s_hat, r_hat))
    }
}

/// Partial derivatives of f at a chart point, plus the normal candidate
/// f_t ∧ f_s ∧ f_r.
#[derive(Debug, Clone, Copy)]
pub struct Partials {
    pub f_t: Vec4,
    pub f_s: Vec4,
    pub f_r: Vec4,
    pub wedge: Vec4,
}

/// Plane-family classification labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyClass {
    /// dim⟨X, Y, X', Y'⟩ = 2
    Cylinder,
    /// dim = 3
    PseudoNonDegenerate,
    /// dim = 4
    NonDegenerate,
}

/// Per-grid family classification; `label` is None when the rank changes
/// across the grid, with the transition locations listed.
#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub label: Option<FamilyClass>,
    pub ranks: Vec<(f64, usize)>,
    pub transitions: Vec<f64>,
}

fn class_of_rank(rank: usize) -> Option<FamilyClass> {
    match rank {
        2 => Some(FamilyClass::Cylinder),
        3 => Some(FamilyClass::PseudoNonDegenerate),
        4 => Some(FamilyClass::NonDegenerate),
        _ => None,
    }
}

/// Frontal verdict for a two-ruled hypersurface.
#[derive(Debug, Clone)]
pub enum Frontality {
    /// b₄ ≡ 0 on the grid: the normalized X∧Y∧X' is a unit normal field.
    Frontal { max_b4: f64 },
    NotFrontal { max_b4: Option<f64>, reason: String },
    /// Cylinder windows on which the chart is an immersion.
    TriviallyRegular,
}

/// A two-ruled hypersurface with its gauge state and (once prepared) the
/// invariant data (a, δ, b₁…b₄) of its adapted unit-speed form.
#[derive(Debug, Clone)]
pub struct TwoRuled {
    pub gamma: CurveFn,
    pub x: CurveFn,
    pub y: CurveFn,
    pub domain: Interval,
    pub gauge: GaugeState,
    pub data: Option<DataFn>,
    pub chart: Option<ChartFromRaw>,
    pub gauge_info: GaugeInfo,
}

/// Quadrature/integration resolution used when preparing surfaces.
const GAUGE_NODES: usize = 4096;

impl TwoRuled {
    /// A surface from user curves, in the raw gauge.
    pub fn from_curves(gamma: CurveFn, x: CurveFn, y: CurveFn, domain: Interval) -> TwoRuled {
        TwoRuled {
            gamma,
            x,
            y,
            domain,
            gauge: GaugeState::Raw,
            data: None,
            chart: None,
            gauge_info: GaugeInfo::default(),
        }
    }

    /// Reconstruct a surface from invariant data by integrating the frame
    /// equations from the standard basis at `domain.lo`. The result is
    /// already constrictively adapted with |X'| = 1.
    pub fn from_invariants(data: &InvariantData, opts: IntegrateOptions) -> Result<TwoRuled> {
        Ok(TwoRuled::from_invariants_with_field(data, opts)?.0)
    }

    /// Same, but also expose the frame field (for oracles and exports).
    pub fn from_invariants_with_field(
        data: &InvariantData,
        opts: IntegrateOptions,
    ) -> Result<(TwoRuled, Arc<FrameField>)> {
        let dfn = data.to_fn();
        let grid = [data.domain.lo, data.domain.hi];
        let field = Arc::new(integrate_frame(
            &dfn,
            data.domain.lo,
            Mat4::IDENTITY,
            &grid,
            opts,
        )?);
        let curves = field.curves();
        let surface = TwoRuled {
            gamma: curves.gamma,
            x: curves.x,
            y: curves.y,
            domain: data.domain,
            gauge: GaugeState::AdaptedUnitSpeed,
            data: Some(dfn),
            chart: None,
            gauge_info: GaugeInfo {
                theta0: None,
                notes: vec!["reconstructed from invariant data; standard initial frame".into()],
            },
        };
        Ok((surface, field))
    }

    /// f(t, s, r) = γ(t) + s X(t) + r Y(t).
    pub fn evaluate(&self, t: f64, s: f64, r: f64) -> Result<Vec4> {
        self.domain.check(t)?;
        Ok(geom::add(
            self.gamma.value(t)?,
            geom::add(
                geom::scale(self.x.value(t)?, s),
                geom::scale(self.y.value(t)?, r),
            ),
        ))
    }

    /// Partial derivatives and the normal candidate at a chart point.
    /// Requires an adapted gauge so the structural decomposition
    /// f_t = b₁X + b₂Y + (b₃+s+ra)X' + b₄Z is meaningful.
    pub fn partials(&self, t: f64, s: f64, r: f64) -> Result<Partials> {
        if self.gauge == GaugeState::Raw {
            return Err(Error::WrongGaugeState {
                required: "adapted",
                actual: self.gauge.name(),
            });
        }
        self.domain.check(t)?;
        let gj = self.gamma.jet(t, 1)?;
        let xj = self.x.jet(t, 1)?;
        let yj = self.y.jet(t, 1)?;
        let f_t = geom::add(
            gj.deriv(1),
            geom::add(geom::scale(xj.deriv(1), s), geom::scale(yj.deriv(1), r)),
        );
        let f_s = xj.value();
        let f_r = yj.value();
        Ok(Partials {
            f_t,
            f_s,
            f_r,
            wedge: geom::wedge3(f_t, f_s, f_r),
        })
    }

    /// Unit normal direction of the frontal candidate: X ∧ Y ∧ X' normalized.
    /// Works in any gauge (the direction is gauge-free for a
    /// pseudo-non-degenerate family).
    pub fn normal_direction(&self, t: f64) -> Result<Vec4> {
        self.domain.check(t)?;
        let xj = self.x.jet(t, 1)?;
        let y = self.y.value(t)?;
        let w = geom::wedge3(xj.value(), y, xj.deriv(1));
        let n = geom::norm(w);
        if n < 1e-12 {
            return Err(Error::CriterionInapplicable {
                reason: format!("dim<X,Y,X'> < 3 at t={t}; no normal direction"),
            });
        }
        Ok(geom::scale(w, 1.0 / n))
    }

    /// det(f_t, f_s, f_r, ν): vanishes exactly on the singular set. This is
    /// an identifier of singularities in the surface's own chart.
    pub fn lambda_det(&self, t: f64, s: f64, r: f64) -> Result<f64> {
        let nu = self.normal_direction(t)?;
        let gj = self.gamma.jet(t, 1)?;
        let xj = self.x.jet(t, 1)?;
        let yj = self.y.jet(t, 1)?;
        let f_t = geom::add(
            gj.deriv(1),
            geom::add(geom::scale(xj.deriv(1), s), geom::scale(yj.deriv(1), r)),
        );
        Ok(geom::det4(f_t, xj.value(), yj.value(), nu))
    }

    /// Classify the plane family from the rank of (X, Y, X', Y') per node.
    pub fn classify_family(&self, grid: &[f64]) -> Result<FamilyReport> {
        let mut ranks = Vec::with_capacity(grid.len());
        for &t in grid {
            self.domain.check(t)?;
            let xj = self.x.jet(t, 1)?;
            let yj = self.y.jet(t, 1)?;
            let cols = [xj.value(), yj.value(), xj.deriv(1), yj.deriv(1)];
            ranks.push((t, geom::rank(&cols, 1e-9)));
        }
        let first = ranks[0].1;
        let mut transitions = Vec::new();
        for w in ranks.windows(2) {
            if w[0].1 != w[1].1 {
                transitions.push(w[1].0);
            }
        }
        let label = if transitions.is_empty() {
            class_of_rank(first)
        } else {
            None
        };
        Ok(FamilyReport {
            label,
            ranks,
            transitions,
        })
    }

    /// Prepared (adapted, unit-|X'|) form of this surface. Idempotent.
    ///
    /// Raw directors are normalized and orthogonalized first, then rotated by
    /// the gauge angle θ' = ⟨X', Y⟩, and finally the parameter is changed so
    /// |X̂'| = 1. The invariant data of the result is extracted by jets.
    pub fn prepare(&self) -> Result<TwoRuled> {
        if self.gauge == GaugeState::AdaptedUnitSpeed {
            return Ok(self.clone());
        }

        // unit-normalize X, Gram-Schmidt Y against it
        let xr = self.x.clone();
        let xn = CurveFn::new(move |t, n| xr.jet(t, n)?.normalize());
        let (xc, yr) = (xn.clone(), self.y.clone());
        let yn = CurveFn::new(move |t, n| {
            let xj = xc.jet(t, n)?;
            let yj = yr.jet(t, n)?;
            let proj = yj.dot(&xj);
            yj.sub(&xj.scale_jet(&proj)).normalize()
        });

        let adapted = adapt_directors(&xn, &yn, self.domain, 0.0, GAUGE_NODES)?;

        // unit-speed parameter from the adapted X̂
        let xa = adapted.x.clone();
        let speed = ScalarFn::new(move |t, n| {
            let xj = xa.jet(t, n + 1)?;
            let xp = xj.derivative();
            xp.dot(&xp).sqrt()
        });
        let map = Arc::new(ParamMap::build(speed, self.domain, GAUGE_NODES, 1e-9)?);

        let gamma_u = map.reparametrize_curve(&self.gamma);
        let x_u = map.reparametrize_curve(&adapted.x);
        let y_u = map.reparametrize_curve(&adapted.y);

        let (g2, x2, y2) = (gamma_u.clone(), x_u.clone(), y_u.clone());
        let data = DataFn::new(move |tt, n| extract_invariants(&g2, &x2, &y2, tt, n));

        let chart = ChartFromRaw {
            raw_x: self.x.clone(),
            raw_y: self.y.clone(),
            adapted_x: adapted.x.clone(),
            adapted_y: adapted.y.clone(),
            map: Arc::clone(&map),
        };

        let mut info = self.gauge_info.clone();
        info.theta0 = Some(adapted.theta0);
        info.notes.push(format!(
            "adapted with theta0={}, reparametrized to unit |X'| over [{}, {}]",
            adapted.theta0,
            map.target_domain().lo,
            map.target_domain().hi
        ));

        Ok(TwoRuled {
            gamma: gamma_u,
            x: x_u,
            y: y_u,
            domain: map.target_domain(),
            gauge: GaugeState::AdaptedUnitSpeed,
            data: Some(data),
            chart: Some(chart),
            gauge_info: info,
        })
    }

    /// Invariant jets (a, δ, b₁…b₄); requires the prepared state.
    pub fn invariants(&self, t: f64, order: usize) -> Result<crate::framefield::InvariantJets> {
        match &self.data {
            Some(d) => d.jets(t, order),
            None => Err(Error::WrongGaugeState {
                required: "adapted+unit-speed",
                actual: self.gauge.name(),
            }),
        }
    }

    /// Frontal test: for a pseudo-non-degenerate family, f is a two-ruled
    /// frontal iff b₄ vanishes identically (grid max), and then the
    /// normalized X∧Y∧X' is a unit normal field. Non-degenerate families are
    /// never frontal at their singular points. Cylinder windows where the
    /// chart is an immersion are reported as trivially regular.
    pub fn is_frontal(&self, grid: &[f64], tol: f64) -> Result<Frontality> {
        let family = self.classify_family(grid)?;
        match family.label {
            Some(FamilyClass::PseudoNonDegenerate) => {
                let prepared;
                let surface = if self.data.is_some() {
                    self
                } else {
                    prepared = self.prepare()?;
                    &prepared
                };
                let needs_map = self.data.is_none();
                let mut max_b4: f64 = 0.0;
                for &t in grid {
                    let tt = match (&surface.chart, needs_map) {
                        (Some(chart), true) => chart.map.forward(t)?,
                        _ => t,
                    };
                    let inv = surface.invariants(tt, 0)?;
                    max_b4 = max_b4.max(inv.b[3].value().abs());
                }
                if max_b4 <= tol {
                    Ok(Frontality::Frontal { max_b4 })
                } else {
                    Ok(Frontality::NotFrontal {
                        max_b4: Some(max_b4),
                        reason: format!("b4 not identically zero (max |b4| = {max_b4:.3e})"),
                    })
                }
            }
            Some(FamilyClass::NonDegenerate) => Ok(Frontality::NotFrontal {
                max_b4: None,
                reason: "non-degenerate family: never a frontal at a singular point".into(),
            }),
            Some(FamilyClass::Cylinder) => {
                // immersion iff γ' has a component off the (constant) plane
                let mut regular = true;
                for &t in grid {
                    let g = self.gamma.jet(t, 1)?.deriv(1);
                    let x = self.x.value(t)?;
                    let y = self.y.value(t)?;
                    if geom::norm(geom::wedge3(g, x, y)) <= tol * (1.0 + geom::norm(g)) {
                        regular = false;
                        break;
                    }
                }
                if regular {
                    Ok(Frontality::TriviallyRegular)
                } else {
                    Ok(Frontality::NotFrontal {
                        max_b4: None,
                        reason: "cylinder with singular chart points".into(),
                    })
                }
            }
            None => Ok(Frontality::NotFrontal {
                max_b4: None,
                reason: format!(
                    "family rank changes across the grid at {:?}",
                    family.transitions
                ),
            }),
        }
    }

    /// Front test at t for a pseudo-non-degenerate two-ruled frontal:
    /// X, Y, X', X'' independent there, i.e. δ(t) ≠ 0.
    pub fn is_front_at(&self, t: f64, tol: f64) -> Result<bool> {
        let inv = self.invariants(t, 0)?;
        Ok(inv.delta.value().abs() > tol)
    }
}
