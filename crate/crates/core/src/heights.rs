//! Height functions along a framed curve and the four developable two-ruled
//! frontals S₁–S₄ they sweep out.
//!
//! For a unit frame vector v = eᵢ the height function is
//! H_v(t, x) = ⟨v(t), x − γ(t)⟩; the envelope of the plane family
//! {H_v = 0} is the set {H_v = H_v' = 0}, parameterized by
//!
//! ```text
//!   S₁ = γ + (l/κ₁)e₂ + s·e₃ + r·e₄        (κ₁ ≠ 0)
//!   S₂ = γ + s·e₄ + r·(κ₄e₁ + κ₁e₃)/A₂     (A₂ = √(κ₁²+κ₄²) ≠ 0)
//!   S₃ = γ + s·e₁ + r·(κ₆e₂ + κ₄e₄)/A₃     (A₃ = √(κ₄²+κ₆²) ≠ 0)
//!   S₄ = γ + s·e₁ + r·e₂                    (κ₆ ≠ 0)
//! ```
//!
//! Each Sᵢ is a two-ruled frontal with unit normal ±eᵢ. Its invariant data
//! in the adapted unit-speed gauge has closed forms in (l, κ₁, κ₄, κ₆, θ)
//! where θ is the adaptation angle; those closed forms and the generic
//! numeric extraction are kept as two independent routes and cross-checked.

use std::sync::Arc;

use crate::curve::{frenet_frame, CurveFn, CurveModel, FrenetFrame, ScalarFn};
use crate::error::{Error, Result};
use crate::framefield::{
    extract_invariants, rotate_pair, DataFn, IntegratedScalar, InvariantJets, ParamMap,
    RotatedComponent,
};
use crate::geom::{self, Vec4};
use crate::hypersurface::{ChartFromRaw, GaugeInfo, GaugeState, TwoRuled};
use crate::jets::Jet;
use crate::singular::{classify_point, JetPoly2, SingularityReport, Stratum, Witnesses};

/// Which of the four developable frontals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiIndex {
    S1,
    S2,
    S3,
    S4,
}

impl SiIndex {
    pub fn number(&self) -> usize {
        match self {
            SiIndex::S1 => 1,
            SiIndex::S2 => 2,
            SiIndex::S3 => 3,
            SiIndex::S4 => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SiIndex::S1 => "S1",
            SiIndex::S2 => "S2",
            SiIndex::S3 => "S3",
            SiIndex::S4 => "S4",
        }
    }

    pub fn all() -> [SiIndex; 4] {
        [SiIndex::S1, SiIndex::S2, SiIndex::S3, SiIndex::S4]
    }
}

/// Height function family H_v(t, x) = ⟨eᵢ(t), x − γ(t)⟩ for a frame vector.
#[derive(Clone)]
pub struct HeightFamily {
    pub index: SiIndex,
    curve: CurveModel,
}

impl HeightFamily {
    pub fn new(curve: CurveModel, index: SiIndex) -> HeightFamily {
        HeightFamily { curve, index }
    }

    /// (H, H') at parameter t and space point x, via one jet evaluation:
    /// h(t) = ⟨eᵢ(t), x − γ(t)⟩, H = h(t), H' = h'(t).
    pub fn residual(&self, t: f64, x: Vec4) -> Result<(f64, f64)> {
        let fr = frenet_frame(&self.curve, t, 1)?;
        let e = match self.index {
            SiIndex::S1 => &fr.e1,
            SiIndex::S2 => &fr.e2,
            SiIndex::S3 => &fr.e3,
            SiIndex::S4 => &fr.e4,
        };
        let gamma = self.curve.curve.jet(t, 1)?;
        let diff = crate::jets::JetVec4::constant(x, t, 1).sub(&gamma);
        let h = e.dot(&diff);
        Ok((h.value(), h.deriv(1)))
    }
}

/// One of the developable frontals S₁–S₄ built from a framed curve, with its
/// raw chart, adaptation gauge θ, unit-speed parameter map, and the invariant
/// data along both routes (closed forms and numeric extraction).
#[derive(Clone)]
pub struct DevelopableSi {
    pub index: SiIndex,
    pub curve: CurveModel,
    /// raw-gauge surface: base + directors straight from the frame
    pub raw: TwoRuled,
    /// prepared surface: adapted, unit-|X'|, carrying the closed-form data
    pub surface: TwoRuled,
    pub theta: Arc<IntegratedScalar>,
    pub theta0: f64,
    /// worst-case margin of the θ branch condition over the build grid
    pub branch_margin: f64,
    pub map: Arc<ParamMap>,
    /// closed-form data (eq. route) in the unit-speed parameter
    pub data: DataFn,
    /// numeric extraction route in the unit-speed parameter
    pub data_extracted: DataFn,
    grid: Vec<f64>,
}

impl std::fmt::Debug for DevelopableSi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DevelopableSi({})", self.index.name())
    }
}

const SI_TOL: f64 = 1e-9;

fn theta_rate(curve: &CurveModel, index: SiIndex) -> ScalarFn {
    let c = curve.clone();
    ScalarFn::new(move |t, n| {
        let fr = frenet_frame(&c, t, n)?;
        match index {
            SiIndex::S1 => Ok(fr.kappa6),
            SiIndex::S4 => Ok(fr.kappa1),
            SiIndex::S2 => {
                // θ' = −κ₁κ₆/A₂
                let a2 = fr
                    .kappa1
                    .mul(&fr.kappa1)
                    .add(&fr.kappa4.mul(&fr.kappa4))
                    .sqrt()?;
                fr.kappa1.mul(&fr.kappa6).neg().div(&a2)
            }
            SiIndex::S3 => {
                // θ' = κ₁κ₆/A₃
                let a3 = fr
                    .kappa4
                    .mul(&fr.kappa4)
                    .add(&fr.kappa6.mul(&fr.kappa6))
                    .sqrt()?;
                fr.kappa1.mul(&fr.kappa6).div(&a3)
            }
        }
    })
}

fn raw_base(curve: &CurveModel, index: SiIndex) -> CurveFn {
    let c = curve.clone();
    match index {
        SiIndex::S1 => CurveFn::new(move |t, n| {
            let fr = frenet_frame(&c, t, n)?;
            let gamma = c.curve.jet(t, n)?;
            let coef = fr.l.div(&fr.kappa1)?;
            Ok(gamma.add(&fr.e2.scale_jet(&coef)))
        }),
        _ => CurveFn::new(move |t, n| c.curve.jet(t, n)),
    }
}

fn raw_directors(curve: &CurveModel, index: SiIndex) -> (CurveFn, CurveFn) {
    let mk = |pick: fn(&FrenetFrame) -> Result<crate::jets::JetVec4>| {
        let c = curve.clone();
        CurveFn::new(move |t, n| {
            let fr = frenet_frame(&c, t, n)?;
            pick(&fr)
        })
    };
    match index {
        SiIndex::S1 => (mk(|fr| Ok(fr.e3.clone())), mk(|fr| Ok(fr.e4.clone()))),
        SiIndex::S4 => (mk(|fr| Ok(fr.e1.clone())), mk(|fr| Ok(fr.e2.clone()))),
        SiIndex::S2 => (
            mk(|fr| Ok(fr.e4.clone())),
            mk(|fr| {
                let a2 = fr
                    .kappa1
                    .mul(&fr.kappa1)
                    .add(&fr.kappa4.mul(&fr.kappa4))
                    .sqrt()?;
                fr.e1
                    .scale_jet(&fr.kappa4)
                    .add(&fr.e3.scale_jet(&fr.kappa1))
                    .div_jet(&a2)
            }),
        ),
        SiIndex::S3 => (
            mk(|fr| Ok(fr.e1.clone())),
            mk(|fr| {
                let a3 = fr
                    .kappa4
                    .mul(&fr.kappa4)
                    .add(&fr.kappa6.mul(&fr.kappa6))
                    .sqrt()?;
                fr.e2
                    .scale_jet(&fr.kappa6)
                    .add(&fr.e4.scale_jet(&fr.kappa4))
                    .div_jet(&a3)
            }),
        ),
    }
}

/// The branch-condition margin at one node for a candidate θ value.
fn branch_quantity(index: SiIndex, fr: &FrenetFrame, theta: f64) -> f64 {
    let (k1, k4, k6) = (fr.kappa1.value(), fr.kappa4.value(), fr.kappa6.value());
    let (k1p, k4p, k6p) = (fr.kappa1.deriv(1), fr.kappa4.deriv(1), fr.kappa6.deriv(1));
    match index {
        SiIndex::S1 => theta.cos().abs(),
        SiIndex::S4 => theta.sin().abs(),
        SiIndex::S2 => {
            // |X̂₂'| = |κ₄κ₆A₂cosθ + (κ₄κ₁' − κ₁κ₄')sinθ| / A₂²
            let a2 = (k1 * k1 + k4 * k4).sqrt();
            (k4 * k6 * a2 * theta.cos() + (k4 * k1p - k1 * k4p) * theta.sin()).abs() / (a2 * a2)
        }
        SiIndex::S3 => {
            // |X̂₃'| = |κ₁κ₄A₃cosθ + (κ₄'κ₆ − κ₄κ₆')sinθ| / A₃²
            let a3 = (k4 * k4 + k6 * k6).sqrt();
            (k1 * k4 * a3 * theta.cos() + (k4p * k6 - k4 * k6p) * theta.sin()).abs() / (a3 * a3)
        }
    }
}

/// Closed-form invariant data of Sᵢ at t (in the original parameter; the
/// caller reparametrizes to unit speed). All formulas are in terms of
/// (l, κ₁, κ₄, κ₆, θ) jets; one derivative is consumed, so the output order
/// is one below the frame jets' order.
fn closed_form_data(index: SiIndex, fr: &FrenetFrame, th: &Jet) -> Result<InvariantJets> {
    let m = fr.l.order() - 1;
    let tr = |j: &Jet| j.truncate(m);
    let l = tr(&fr.l);
    let k1 = tr(&fr.kappa1);
    let k4 = tr(&fr.kappa4);
    let k6 = tr(&fr.kappa6);
    let (sin, cos) = tr(th).sin_cos();
    let zero = Jet::constant(0.0, th.base_point(), m);

    match index {
        SiIndex::S1 => {
            // a = sinθ/cosθ, δ = κ₁/|cosθκ₄|,
            // B = (lκ₄cosθ/(κ₁|cosθκ₄|), lκ₄sinθ/(κ₁|cosθκ₄|),
            //      (lκ₁' − l'κ₁)/(κ₁²(κ₄cosθ)³), 0)
            let a = sin.div(&cos)?;
            let ck4 = cos.mul(&k4);
            let abs_ck4 = ck4.abs_nonvanishing()?;
            // sign: this crate's wedge orientation makes δ the negative of
            // the displayed magnitude (verified against extraction)
            let delta = k1.div(&abs_ck4)?.neg();
            let denom = k1.mul(&abs_ck4);
            let b1 = l.mul(&k4).mul(&cos).div(&denom)?;
            let b2 = l.mul(&k4).mul(&sin).div(&denom)?;
            let num = l
                .mul(&fr.kappa1.derivative())
                .sub(&fr.l.derivative().mul(&k1));
            let b3 = num.div(&k1.mul(&k1).mul(&ck4.powi(3)?))?;
            Ok(InvariantJets {
                a,
                delta,
                b: [b1, b2, b3, zero],
            })
        }
        SiIndex::S4 => {
            // a = −cosθ/sinθ, δ = κ₆/|κ₄sinθ|,
            // B = (lcosθ/|κ₄sinθ|, lsinθ/|κ₄sinθ|, 0, 0)
            let a = cos.neg().div(&sin)?;
            let k4s = k4.mul(&sin).abs_nonvanishing()?;
            let delta = k6.div(&k4s)?.neg();
            let b1 = l.mul(&cos).div(&k4s)?;
            let b2 = l.mul(&sin).div(&k4s)?;
            Ok(InvariantJets {
                a,
                delta,
                b: [b1, b2, zero.clone(), zero],
            })
        }
        SiIndex::S2 => {
            // with D₂ = κ₄κ₁' − κ₁κ₄', B = κ₄κ₆A₂cosθ + D₂sinθ:
            // a = (κ₄κ₆A₂sinθ − D₂cosθ)/B, |X̂'| = |B|/A₂², δ = A₂³/|B|,
            // b₁ = −lκ₄sinθ/(A₂|X̂'|), b₂ = lκ₄cosθ/(A₂|X̂'|),
            // b₃ = lκ₁A₂/(B|X̂'|²)
            let k1p = fr.kappa1.derivative();
            let k4p = fr.kappa4.derivative();
            let a2 = k1.mul(&k1).add(&k4.mul(&k4)).sqrt()?;
            let d2 = k4.mul(&k1p).sub(&k1.mul(&k4p));
            let bracket = k4.mul(&k6).mul(&a2).mul(&cos).add(&d2.mul(&sin));
            let a = k4
                .mul(&k6)
                .mul(&a2)
                .mul(&sin)
                .sub(&d2.mul(&cos))
                .div(&bracket)?;
            let abs_bracket = bracket.abs_nonvanishing()?;
            let xhat_speed = abs_bracket.div(&a2.mul(&a2))?;
            let delta = a2.powi(3)?.div(&abs_bracket)?;
            let denom = a2.mul(&xhat_speed);
            let b1 = l.mul(&k4).mul(&sin).neg().div(&denom)?;
            let b2 = l.mul(&k4).mul(&cos).div(&denom)?;
            // b₃ = ⟨dγ/dt̃, dX̂/dt̃⟩ = lκ₁A₂/B (the printed |X̂'|² factor
            // does not survive the derivative computation)
            let b3 = l.mul(&k1).mul(&a2).div(&bracket)?;
            Ok(InvariantJets {
                a,
                delta,
                b: [b1, b2, b3, zero],
            })
        }
        SiIndex::S3 => {
            // with D₃ = κ₄'κ₆ − κ₄κ₆', B = κ₁κ₄A₃cosθ + D₃sinθ:
            // a = (κ₁κ₄A₃sinθ − D₃cosθ)/B, |X̂'| = |B|/A₃², δ = A₃³/|B|,
            // b₁ = lcosθ/|X̂'|, b₂ = lsinθ/|X̂'|
            let k4p = fr.kappa4.derivative();
            let k6p = fr.kappa6.derivative();
            let a3 = k4.mul(&k4).add(&k6.mul(&k6)).sqrt()?;
            let d3 = k4p.mul(&k6).sub(&k4.mul(&k6p));
            let bracket = k1.mul(&k4).mul(&a3).mul(&cos).add(&d3.mul(&sin));
            let a = k1
                .mul(&k4)
                .mul(&a3)
                .mul(&sin)
                .sub(&d3.mul(&cos))
                .div(&bracket)?;
            let abs_bracket = bracket.abs_nonvanishing()?;
            let xhat_speed = abs_bracket.div(&a3.mul(&a3))?;
            let delta = a3.powi(3)?.div(&abs_bracket)?.neg();
            let b1 = l.mul(&cos).div(&xhat_speed)?;
            let b2 = l.mul(&sin).div(&xhat_speed)?;
            Ok(InvariantJets {
                a,
                delta,
                b: [b1, b2, zero.clone(), zero],
            })
        }
    }
}

/// Build the developable frontal Sᵢ over the curve's domain.
///
/// Verifies the applicability condition and the pseudo-non-degeneracy
/// condition on `nodes` grid points, chooses θ₀ ∈ {0, π/2} by maximal branch
/// margin, integrates θ and the unit-speed parameter, and assembles the
/// invariant data along both routes.
pub fn build_si(curve: &CurveModel, index: SiIndex, nodes: usize) -> Result<DevelopableSi> {
    let grid = curve.domain.linspace(nodes.max(9));

    // applicability + pseudo-non-degeneracy per grid node
    for &t in &grid {
        let fr = frenet_frame(curve, t, 1)?;
        let (k1, k4, k6) = (fr.kappa1.value(), fr.kappa4.value(), fr.kappa6.value());
        let (k1p, k4p) = (fr.kappa1.deriv(1), fr.kappa4.deriv(1));
        let k6v = k6.abs();
        let fail = |kappa: &'static str| Error::ApplicabilityViolated {
            surface: index.name(),
            kappa,
            t,
        };
        match index {
            SiIndex::S1 => {
                if k1.abs() <= SI_TOL {
                    return Err(fail("kappa1"));
                }
                if k4.abs() <= SI_TOL {
                    return Err(fail("kappa4 (pseudo-non-degeneracy)"));
                }
            }
            SiIndex::S2 => {
                if k1.abs() <= SI_TOL && k4.abs() <= SI_TOL {
                    return Err(fail("(kappa1, kappa4)"));
                }
                if k4.abs() <= SI_TOL && (k1 * k4p).abs() <= SI_TOL {
                    return Err(fail("(kappa4, kappa1*kappa4') (pseudo-non-degeneracy)"));
                }
            }
            SiIndex::S3 => {
                if k4.abs() <= SI_TOL && k6v <= SI_TOL {
                    return Err(fail("(kappa4, kappa6)"));
                }
                if k4.abs() <= SI_TOL && (k4p * k6).abs() <= SI_TOL {
                    return Err(fail("(kappa4, kappa4'*kappa6) (pseudo-non-degeneracy)"));
                }
                let _ = k1p;
            }
            SiIndex::S4 => {
                if k6v <= SI_TOL {
                    return Err(fail("kappa6"));
                }
                if k4.abs() <= SI_TOL {
                    return Err(fail("kappa4 (pseudo-non-degeneracy)"));
                }
            }
        }
    }

    let base = raw_base(curve, index);
    let (x_raw, y_raw) = raw_directors(curve, index);
    let raw = TwoRuled::from_curves(base.clone(), x_raw.clone(), y_raw.clone(), curve.domain);

    // θ seed: the better of the two branch choices, by worst-grid margin
    let rate = theta_rate(curve, index);
    let mut best: Option<(f64, f64, Arc<IntegratedScalar>)> = None;
    for theta0 in [0.0, std::f64::consts::FRAC_PI_2] {
        let theta = Arc::new(IntegratedScalar::integrate(
            rate.clone(),
            curve.domain,
            theta0,
            4096,
        )?);
        let mut margin = f64::INFINITY;
        for &t in &grid {
            let fr = frenet_frame(curve, t, 1)?;
            margin = margin.min(branch_quantity(index, &fr, theta.value(t)?));
        }
        if best.as_ref().map(|(m, _, _)| margin > *m).unwrap_or(true) {
            best = Some((margin, theta0, theta));
        }
    }
    let (branch_margin, theta0, theta) = best.expect("two candidates were tried");
    if branch_margin <= SI_TOL {
        return Err(Error::BranchConditionViolated {
            surface: index.name(),
            condition: match index {
                SiIndex::S1 => "cos(theta) != 0",
                SiIndex::S4 => "sin(theta) != 0",
                _ => "|Xhat'| != 0",
            },
            t: curve.domain.lo,
            margin: branch_margin,
        });
    }

    let x_hat = rotate_pair(&x_raw, &y_raw, &theta, RotatedComponent::XHat);
    let y_hat = rotate_pair(&x_raw, &y_raw, &theta, RotatedComponent::YHat);

    // unit-speed parameter from the closed-form |X̂'|
    let (c2, th2) = (curve.clone(), Arc::clone(&theta));
    let speed = ScalarFn::new(move |t, n| {
        let fr = frenet_frame(&c2, t, n + 1)?;
        let th = th2.jet(t, n + 1)?;
        closed_form_data_speed(index, &fr, &th)
    });
    let map = Arc::new(ParamMap::build(speed, curve.domain, 4096, SI_TOL)?);

    // closed-form data route, in the unit-speed parameter
    let (c3, th3, map3) = (curve.clone(), Arc::clone(&theta), Arc::clone(&map));
    let data = DataFn::new(move |tt, n| {
        let t = map3.inverse(tt)?;
        let fr = frenet_frame(&c3, t, n + 1)?;
        let th = th3.jet(t, n + 1)?;
        let d = closed_form_data(index, &fr, &th)?;
        let speed = closed_form_data_speed(index, &fr, &th)?;
        Ok(InvariantJets {
            a: d.a.reparametrize(&speed, tt)?.truncate(n),
            delta: d.delta.reparametrize(&speed, tt)?.truncate(n),
            b: [
                d.b[0].reparametrize(&speed, tt)?.truncate(n),
                d.b[1].reparametrize(&speed, tt)?.truncate(n),
                d.b[2].reparametrize(&speed, tt)?.truncate(n),
                d.b[3].reparametrize(&speed, tt)?.truncate(n),
            ],
        })
    });

    // numeric extraction route
    let base_u = map.reparametrize_curve(&base);
    let x_u = map.reparametrize_curve(&x_hat);
    let y_u = map.reparametrize_curve(&y_hat);
    let (bx, xx, yx) = (base_u.clone(), x_u.clone(), y_u.clone());
    let data_extracted = DataFn::new(move |tt, n| extract_invariants(&bx, &xx, &yx, tt, n));

    let chart = ChartFromRaw {
        raw_x: x_raw.clone(),
        raw_y: y_raw.clone(),
        adapted_x: x_hat.clone(),
        adapted_y: y_hat.clone(),
        map: Arc::clone(&map),
    };
    let surface = TwoRuled {
        gamma: base_u,
        x: x_u,
        y: y_u,
        domain: map.target_domain(),
        gauge: GaugeState::AdaptedUnitSpeed,
        data: Some(data.clone()),
        chart: Some(chart),
        gauge_info: GaugeInfo {
            theta0: Some(theta0),
            notes: vec![format!(
                "{}: theta0={theta0}, branch margin {branch_margin:.3e}",
                index.name()
            )],
        },
    };

    Ok(DevelopableSi {
        index,
        curve: curve.clone(),
        raw,
        surface,
        theta,
        theta0,
        branch_margin,
        map,
        data,
        data_extracted,
        grid,
    })
}

/// |X̂ᵢ'| as a jet (closed forms; used for the unit-speed map). Output
/// order is one below the frame jets' order.
fn closed_form_data_speed(index: SiIndex, fr: &FrenetFrame, th: &Jet) -> Result<Jet> {
    let m = fr.l.order() - 1;
    let tr = |j: &Jet| j.truncate(m);
    let k1 = tr(&fr.kappa1);
    let k4 = tr(&fr.kappa4);
    let k6 = tr(&fr.kappa6);
    let (sin, cos) = tr(th).sin_cos();
    match index {
        SiIndex::S1 => cos.mul(&k4).abs_nonvanishing(),
        SiIndex::S4 => k4.mul(&sin).abs_nonvanishing(),
        SiIndex::S2 => {
            let k1p = fr.kappa1.derivative();
            let k4p = fr.kappa4.derivative();
            let a2 = k1.mul(&k1).add(&k4.mul(&k4)).sqrt()?;
            let d2 = k4.mul(&k1p).sub(&k1.mul(&k4p));
            let bracket = k4.mul(&k6).mul(&a2).mul(&cos).add(&d2.mul(&sin));
            bracket.abs_nonvanishing()?.div(&a2.mul(&a2))
        }
        SiIndex::S3 => {
            let k4p = fr.kappa4.derivative();
            let k6p = fr.kappa6.derivative();
            let a3 = k4.mul(&k4).add(&k6.mul(&k6)).sqrt()?;
            let d3 = k4p.mul(&k6).sub(&k4.mul(&k6p));
            let bracket = k1.mul(&k4).mul(&a3).mul(&cos).add(&d3.mul(&sin));
            bracket.abs_nonvanishing()?.div(&a3.mul(&a3))
        }
    }
}

impl DevelopableSi {
    /// Envelope residuals (H, H') of the defining height function at the
    /// image of the raw chart point (t, s, r). Both vanish identically on
    /// the surface.
    pub fn envelope_residual(&self, t: f64, s: f64, r: f64) -> Result<(f64, f64)> {
        let x = self.raw.evaluate(t, s, r)?;
        HeightFamily::new(self.curve.clone(), self.index).residual(t, x)
    }

    /// Worst |a_closed − a_extracted| style deviation between the two data
    /// routes at tt (unit-speed parameter), over all six functions and
    /// derivatives up to `order`.
    pub fn data_coherence(&self, tt: f64, order: usize) -> Result<f64> {
        let d1 = self.data.jets(tt, order)?;
        let d2 = self.data_extracted.jets(tt, order)?;
        let mut worst: f64 = 0.0;
        let mut cmp = |x: &Jet, y: &Jet| {
            for k in 0..=order {
                worst = worst.max((x.deriv(k) - y.deriv(k)).abs());
            }
        };
        cmp(&d1.a, &d2.a);
        cmp(&d1.delta, &d2.delta);
        for j in 0..4 {
            cmp(&d1.b[j], &d2.b[j]);
        }
        Ok(worst)
    }

    /// Unit normal of the prepared surface vs the frame vector eᵢ, up to
    /// sign: returns min(|ν − eᵢ|, |ν + eᵢ|) at the raw parameter t.
    pub fn normal_deviation(&self, t: f64) -> Result<f64> {
        let tt = self.map.forward(t)?;
        let nu = self.surface.normal_direction(tt)?;
        let fr = frenet_frame(&self.curve, t, 0)?;
        let e = match self.index {
            SiIndex::S1 => fr.e1.value(),
            SiIndex::S2 => fr.e2.value(),
            SiIndex::S3 => fr.e3.value(),
            SiIndex::S4 => fr.e4.value(),
        };
        let d1 = geom::norm(geom::sub(nu, e));
        let d2 = geom::norm(geom::add(nu, e));
        Ok(d1.min(d2))
    }

    /// Raw-gauge identifier λᵢ as coefficients (c₀, c_s, c_r) of
    /// λᵢ(t, s, r) = c₀ + c_s·s + c_r·r.
    pub fn lambda_coeffs(&self, t: f64) -> Result<(f64, f64, f64)> {
        let fr = frenet_frame(&self.curve, t, 1)?;
        let (l, lp) = (fr.l.value(), fr.l.deriv(1));
        let (k1, k4, k6) = (fr.kappa1.value(), fr.kappa4.value(), fr.kappa6.value());
        let (k1p, k4p, k6p) = (fr.kappa1.deriv(1), fr.kappa4.deriv(1), fr.kappa6.deriv(1));
        Ok(match self.index {
            // λ₁ = −sκ₄κ₁² + l'κ₁ − lκ₁'
            SiIndex::S1 => (lp * k1 - l * k1p, -k4 * k1 * k1, 0.0),
            // λ₂ = A₂(lκ₁ + sκ₄κ₆) + r(κ₁κ₄' − κ₄κ₁')
            SiIndex::S2 => {
                let a2 = (k1 * k1 + k4 * k4).sqrt();
                (a2 * l * k1, a2 * k4 * k6, k1 * k4p - k4 * k1p)
            }
            // λ₃ = sκ₁κ₄A₃ + r(κ₄κ₆' − κ₆κ₄')
            SiIndex::S3 => {
                let a3 = (k4 * k4 + k6 * k6).sqrt();
                (0.0, k1 * k4 * a3, k4 * k6p - k6 * k4p)
            }
            // λ₄ = rκ₄
            SiIndex::S4 => (0.0, 0.0, k4),
        })
    }

    /// Map a raw chart point into the prepared chart.
    pub fn map_point(&self, t: f64, s: f64, r: f64) -> Result<(f64, f64, f64)> {
        let th = self.theta.value(t)?;
        let (sin, cos) = th.sin_cos();
        Ok((
            self.map.forward(t)?,
            s * cos - r * sin,
            s * sin + r * cos,
        ))
    }

    /// Scan the singular set over the t-grid: solve λᵢ = 0 for the singular
    /// line at each node, take representatives across `window`, classify each
    /// via the general criteria on the adapted data.
    pub fn singularity_scan(
        &self,
        ts: &[f64],
        window: &[f64],
        tol: f64,
    ) -> Result<Vec<SingularityReport>> {
        let mut out = Vec::new();
        for &t in ts {
            let (c0, cs, cr) = self.lambda_coeffs(t)?;
            let scale = c0.abs().max(cs.abs()).max(cr.abs());
            if scale <= tol {
                continue; // λ vanishes identically at this node
            }
            for &w in window {
                // solve for the coordinate with the larger coefficient
                let (s, r) = if cs.abs() >= cr.abs() {
                    let r = w;
                    (-(c0 + cr * r) / cs, r)
                } else {
                    let s = w;
                    (s, -(c0 + cs * s) / cr)
                };
                let (tt, sh, rh) = self.map_point(t, s, r)?;
                let mut rep = classify_point(&self.surface, tt, sh, rh, tol)?;
                rep.raw_point = Some((t, s, r));
                rep.gauge_note = format!(
                    "{} raw chart; theta0={}, margin={:.3e}",
                    self.index.name(),
                    self.theta0,
                    self.branch_margin
                );
                out.push(rep);
            }
        }
        out.sort_by(|a, b| a.point.0.partial_cmp(&b.point.0).unwrap());
        Ok(out)
    }

    pub fn build_grid(&self) -> &[f64] {
        &self.grid
    }
}

/// The S₁ raw-gauge criteria 𝒲₁c, 𝒲₁s, 𝒲₁b at (t, r̂):
///
/// ```text
///   𝒲₁c = r̂·κ₁³κ₄²κ₆ + cosθ·Bc + sinθ·Bs
///   Bc = −2κ₄l(κ₁')² + κ₁(2κ₄κ₁'l' + l(−κ₁'κ₄' + κ₄κ₁'')) − κ₁²(κ₄³l − κ₄'l' + κ₄l'')
///   Bs = κ₁κ₄κ₆(lκ₁' − κ₁l')
///   𝒲₁s = D 𝒲₁c,  𝒲₁b = D 𝒲₁s,  D = κ₁∂t − lκ₄(cosθ∂ŝ + sinθ∂r̂)
/// ```
#[derive(Debug, Clone, Copy)]
pub struct S1Criteria {
    pub w1c: f64,
    pub w1s: f64,
    pub w1b: f64,
    pub kappa6: f64,
}

pub fn s1_criteria(si: &DevelopableSi, t: f64, r_hat: f64) -> Result<S1Criteria> {
    if si.index != SiIndex::S1 {
        return Err(Error::Invalid("s1 criteria need an S1 instance".into()));
    }
    let order = 4;
    let fr = frenet_frame(&si.curve, t, order)?;
    let th = si.theta.jet(t, order)?;
    let poly = s1_w1c_poly(&fr, &th)?;
    let w1c = poly.eval(0.0, r_hat);

    // D = κ₁∂t − lκ₄cosθ∂ŝ − lκ₄sinθ∂r̂ (our polys have no ŝ-dependence);
    // directional() truncates the coefficients as needed
    let (sin, cos) = th.sin_cos();
    let lk4 = fr.l.mul(&fr.kappa4);
    let ct = fr.kappa1.clone();
    let cs = lk4.mul(&cos).neg();
    let cr = lk4.mul(&sin).neg();
    let poly_s = poly.directional(&ct, &cs, &cr)?;
    let w1s = poly_s.eval(0.0, r_hat);
    let poly_b = poly_s.directional(&ct, &cs, &cr)?;
    let w1b = poly_b.eval(0.0, r_hat);
    Ok(S1Criteria {
        w1c,
        w1s,
        w1b,
        kappa6: fr.kappa6.value(),
    })
}

fn s1_w1c_poly(fr: &FrenetFrame, th: &Jet) -> Result<JetPoly2> {
    let m = fr.l.order() - 2; // second derivatives of the curvature jets appear
    let tr = |j: &Jet| j.truncate(m);
    let l = tr(&fr.l);
    let lp = tr(&fr.l.derivative());
    let lpp = fr.l.derivative().derivative();
    let k1 = tr(&fr.kappa1);
    let k1p = tr(&fr.kappa1.derivative());
    let k1pp = fr.kappa1.derivative().derivative();
    let k4 = tr(&fr.kappa4);
    let k4p = tr(&fr.kappa4.derivative());
    let k6 = tr(&fr.kappa6);
    let (sin, cos) = tr(th).sin_cos();

    // r̂-coefficient: κ₁³κ₄²κ₆
    let c1 = k1.powi(3)?.mul(&k4.powi(2)?).mul(&k6);

    // Bc = −2κ₄l(κ₁')² + κ₁(2κ₄κ₁'l' + l(−κ₁'κ₄' + κ₄κ₁''))
    //      − κ₁²(κ₄³l − κ₄'l' + κ₄l'')
    let bc = k4
        .mul(&l)
        .mul(&k1p.powi(2)?)
        .scale(-2.0)
        .add(&k1.mul(
            &k4.mul(&k1p).mul(&lp).scale(2.0).add(
                &l.mul(&k1p.mul(&k4p).neg().add(&k4.mul(&k1pp))),
            ),
        ))
        .sub(&k1.powi(2)?.mul(
            &k4.powi(3)?
                .mul(&l)
                .sub(&k4p.mul(&lp))
                .add(&k4.mul(&lpp)),
        ));
    // Bs = κ₁κ₄κ₆(lκ₁' − κ₁l')
    let bs = k1
        .mul(&k4)
        .mul(&k6)
        .mul(&l.mul(&k1p).sub(&k1.mul(&lp)));
    let c0 = cos.mul(&bc).add(&sin.mul(&bs));

    Ok(JetPoly2 {
        terms: vec![(0, 1, c1), (0, 0, c0)],
    })
}

/// Classification of S₁ at a raw chart point via Theorem-style raw-gauge
/// criteria: CE iff 𝒲₁c ≠ 0; SW iff 𝒲₁c = 0 ≠ 𝒲₁s; CB iff
/// 𝒲₁c = 𝒲₁s = 0, κ₆ ≠ 0 ≠ 𝒲₁b; CCR×I iff κ₁ = 0 with κ₁' ≠ 0 (handled
/// from the jets of ⟨e₁', e₁'⟩ since the frame itself degenerates there).
pub fn s1_classify(si: &DevelopableSi, t: f64, s: f64, r: f64, tol: f64) -> Result<SingularityReport> {
    if si.index != SiIndex::S1 {
        return Err(Error::Invalid("s1_classify needs an S1 instance".into()));
    }
    // κ₁ ≈ 0 routes to the cross-cap branch before the frame is touched
    let (k1_abs, k1p_abs) = s1_kappa1_witnesses(&si.curve, t)?;
    if k1_abs <= tol {
        let stratum = if k1p_abs > tol {
            Stratum::CuspidalCrossCap
        } else {
            Stratum::Unresolved
        };
        return Ok(SingularityReport {
            point: (t, s, r),
            raw_point: Some((t, s, r)),
            stratum,
            witnesses: Witnesses {
                delta: Some(k1_abs),
                delta_prime: Some(k1p_abs),
                ..Default::default()
            },
            tolerance: tol,
            gauge_note: "S1 cross-cap branch: kappa1 and kappa1' witnesses".into(),
        });
    }

    let (c0, cs, _) = si.lambda_coeffs(t)?;
    let lambda = c0 + cs * s;
    let scale = c0.abs().max(cs.abs() * (1.0 + s.abs()));
    if lambda.abs() > tol * (1.0 + scale) * 10.0 {
        return Err(Error::NotSingular { lambda });
    }

    let th = si.theta.value(t)?;
    let r_hat = s * th.sin() + r * th.cos();
    let cv = s1_criteria(si, t, r_hat)?;
    let stratum = if cv.w1c.abs() > tol {
        Stratum::CuspidalEdge
    } else if cv.w1s.abs() > tol {
        Stratum::SwallowtailB
    } else if cv.kappa6.abs() > tol && cv.w1b.abs() > tol {
        Stratum::CuspidalButterfly
    } else {
        Stratum::Unresolved
    };
    Ok(SingularityReport {
        point: (t, s, r),
        raw_point: Some((t, s, r)),
        stratum,
        witnesses: Witnesses {
            lambda: Some(lambda),
            eta_lambda: Some(cv.w1c),
            q1: Some(cv.w1s),
            q2: Some(cv.w1b),
            ..Default::default()
        },
        tolerance: tol,
        gauge_note: format!("S1 raw-gauge criteria at r_hat={r_hat}"),
    })
}

/// |κ₁| and |κ₁'| witnesses usable across κ₁ = 0, from the jets of
/// k₂ = ⟨e₁', e₁'⟩ = κ₁²: |κ₁| = √k₂ and, at a zero, |κ₁'| = √(k₂''/2).
pub fn s1_kappa1_witnesses(curve: &CurveModel, t: f64) -> Result<(f64, f64)> {
    let gamma = curve.curve.jet(t, 4)?;
    let gp = gamma.derivative();
    let l = gp.dot(&gp).sqrt()?;
    let e1 = gp.div_jet(&l)?;
    let e1p = e1.derivative();
    let k2 = e1p.dot(&e1p);
    let k1 = k2.value().max(0.0).sqrt();
    let k1p = if k1 > 1e-6 {
        // smooth branch: (√k₂)' = k₂'/(2√k₂)
        (k2.deriv(1) / (2.0 * k1)).abs()
    } else {
        (k2.deriv(2).max(0.0) / 2.0).sqrt()
    };
    Ok((k1, k1p))
}

/// Developable type of S₁ itself: cylinder type iff κ₆ ≡ 0; cone type iff
/// f₁cone ≡ 0 (grid residuals at `tol`); generic otherwise.
#[derive(Debug, Clone)]
pub struct S1ConeReport {
    pub label: crate::striction::SurfaceType,
    /// max |κ₆|
    pub cylinder_residual: f64,
    /// max |f₁cone|
    pub cone_residual: f64,
    pub grid: Vec<f64>,
}

pub fn s1_cone_test(si: &DevelopableSi, grid: &[f64], tol: f64) -> Result<S1ConeReport> {
    if si.index != SiIndex::S1 {
        return Err(Error::Invalid("s1_cone_test needs an S1 instance".into()));
    }
    let mut cyl: f64 = 0.0;
    let mut cone: f64 = 0.0;
    for &t in grid {
        let fr = frenet_frame(&si.curve, t, 3)?;
        cyl = cyl.max(fr.kappa6.value().abs());
        cone = cone.max(f1cone(&fr).abs());
    }
    let label = if cyl <= tol {
        crate::striction::SurfaceType::CylinderType
    } else if cone <= tol {
        crate::striction::SurfaceType::ConeType
    } else {
        crate::striction::SurfaceType::Generic
    };
    Ok(S1ConeReport {
        label,
        cylinder_residual: cyl,
        cone_residual: cone,
        grid: grid.to_vec(),
    })
}

/// The cone-type criterion polynomial of S₁, written exactly as displayed,
/// grouped by the l, l', l'', l''' blocks.
pub fn f1cone(fr: &FrenetFrame) -> f64 {
    let l = fr.l.value();
    let (lp, lpp, lppp) = (fr.l.deriv(1), fr.l.deriv(2), fr.l.deriv(3));
    let k1 = fr.kappa1.value();
    let (k1p, k1pp, k1ppp) = (fr.kappa1.deriv(1), fr.kappa1.deriv(2), fr.kappa1.deriv(3));
    let k4 = fr.kappa4.value();
    let (k4p, k4pp) = (fr.kappa4.deriv(1), fr.kappa4.deriv(2));
    let k6 = fr.kappa6.value();
    let k6p = fr.kappa6.deriv(1);

    let block_l = k1.powi(3) * k4.powi(3) * (k6 * k4p - k4 * k6p)
        + k1.powi(2)
            * (-k1p * k4.powi(4) * k6 - 2.0 * k1p * k4p.powi(2) * k6 - k1p * k4 * k4p * k6p
                + k1p * k4 * k4pp * k6
                - k1p * k4.powi(2) * k6.powi(3)
                + 2.0 * k1pp * k4 * k4p * k6
                + k1pp * k4.powi(2) * k6p
                - k1ppp * k4.powi(2) * k6)
        + k1 * (-4.0 * k1p.powi(2) * k4 * k4p * k6 - 2.0 * k1p.powi(2) * k4.powi(2) * k6p
            + 6.0 * k1p * k1pp * k4.powi(2) * k6)
        - 6.0 * k1p.powi(3) * k4.powi(2) * k6;

    let block_lp = k1
        * (k1.powi(2)
            * (k4.powi(4) * k6
                + k4.powi(2) * k6.powi(3)
                + 2.0 * k6 * k4p.powi(2)
                + k4 * k4p * k6p
                - k4 * k4pp * k6)
            + k1 * k4 * (4.0 * k1p * k4p * k6 + 2.0 * k1p * k4 * k6p - 3.0 * k1pp * k4 * k6)
            + 6.0 * k1p.powi(2) * k4.powi(2) * k6);

    let block_lpp = k1.powi(2) * k4 * (k1 * (2.0 * k4p * k6 + k4 * k6p) + 3.0 * k1p * k4 * k6);

    let block_lppp = k1.powi(3) * k4.powi(2) * k6;

    l * block_l + lp * block_lp - lpp * block_lpp + lppp * block_lppp
}

/// 𝒲₁s restricted to {λ₁ = 0, 𝒲₁c = 0}: for each t solve 𝒲₁c(t, r̂) = 0
/// for r̂ (κ₆ ≠ 0 required) and evaluate 𝒲₁s there. Its zero set matches
/// f₁cone's up to a nonvanishing multiple.
pub fn s1_w1s_on_locus(si: &DevelopableSi, t: f64) -> Result<f64> {
    let order = 4;
    let fr = frenet_frame(&si.curve, t, order)?;
    if fr.kappa6.value().abs() <= 1e-12 {
        return Err(Error::CriterionInapplicable {
            reason: format!("kappa6 = 0 at t={t}: W1c has no r-root"),
        });
    }
    let th = si.theta.jet(t, order)?;
    let poly = s1_w1c_poly(&fr, &th)?;
    // 𝒲₁c = c0 + c1·r̂
    let c1 = poly
        .terms
        .iter()
        .find(|(i, j, _)| *i == 0 && *j == 1)
        .map(|(_, _, c)| c.value())
        .unwrap_or(0.0);
    let c0 = poly
        .terms
        .iter()
        .find(|(i, j, _)| *i == 0 && *j == 0)
        .map(|(_, _, c)| c.value())
        .unwrap_or(0.0);
    let r_star = -c0 / c1;
    Ok(s1_criteria(si, t, r_star)?.w1s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Interval;
    use approx::assert_relative_eq;

    fn helix() -> CurveModel {
        CurveModel::parse(
            ["cos(t)", "sin(t)", "cos(2*t)", "sin(2*t)"],
            Interval::new(-0.6, 0.6),
        )
        .unwrap()
    }

    #[test]
    fn helix_has_all_four_surfaces() {
        let c = helix();
        for index in SiIndex::all() {
            let si = build_si(&c, index, 17).unwrap();
            assert!(si.branch_margin > 1e-3, "{}: margin", index.name());
        }
    }

    #[test]
    fn envelope_residuals_vanish() {
        let c = helix();
        for index in SiIndex::all() {
            let si = build_si(&c, index, 17).unwrap();
            for &(t, s, r) in &[(0.0, 0.3, -0.8), (0.25, -1.2, 0.4), (-0.4, 2.0, 1.0)] {
                let (h, hp) = si.envelope_residual(t, s, r).unwrap();
                assert!(
                    h.abs() < 1e-9 && hp.abs() < 1e-9,
                    "{} at ({t},{s},{r}): H={h:.2e}, H'={hp:.2e}",
                    index.name()
                );
            }
        }
    }

    #[test]
    fn closed_form_data_matches_extraction() {
        let c = helix();
        for index in SiIndex::all() {
            let si = build_si(&c, index, 17).unwrap();
            let dom = si.map.target_domain();
            for k in 1..6 {
                let tt = dom.lo + (dom.hi - dom.lo) * (k as f64) / 6.0;
                let dev = si.data_coherence(tt, 1).unwrap();
                assert!(dev < 1e-6, "{} at tt={tt}: deviation {dev:.3e}", index.name());
            }
        }
    }

    #[test]
    fn normals_are_frame_vectors() {
        let c = helix();
        for index in SiIndex::all() {
            let si = build_si(&c, index, 17).unwrap();
            for &t in &[-0.4, 0.0, 0.5] {
                let dev = si.normal_deviation(t).unwrap();
                assert!(dev < 1e-8, "{} at t={t}: normal deviation {dev:.3e}", index.name());
            }
        }
    }

    #[test]
    fn s4_singular_set_is_r_zero() {
        let c = helix();
        let si = build_si(&c, SiIndex::S4, 17).unwrap();
        let (c0, cs, cr) = si.lambda_coeffs(0.2).unwrap();
        assert_relative_eq!(c0, 0.0, epsilon = 1e-12);
        assert_relative_eq!(cs, 0.0, epsilon = 1e-12);
        assert!(cr.abs() > 0.1); // κ₄
    }

    #[test]
    fn s3_singular_set_with_constant_curvatures() {
        // constant curvatures: λ₃ = sκ₁κ₄A₃ → singular set {s = 0}
        let c = helix();
        let si = build_si(&c, SiIndex::S3, 17).unwrap();
        let (c0, cs, cr) = si.lambda_coeffs(0.1).unwrap();
        assert_relative_eq!(c0, 0.0, epsilon = 1e-10);
        assert!(cs.abs() > 0.1);
        assert!(cr.abs() < 1e-10);
    }

    #[test]
    fn s1_constant_curvature_criteria() {
        // constant curvatures: 𝒲₁c = r̂κ₁³κ₄²κ₆ − cosθ·κ₁²κ₄³l, CE away
        // from its root r* = cosθ·l·κ₄/(κ₁κ₆)
        let c = helix();
        let si = build_si(&c, SiIndex::S1, 17).unwrap();
        let t = 0.2;
        let fr = frenet_frame(&c, t, 1).unwrap();
        let (l, k1, k4, k6) = (
            fr.l.value(),
            fr.kappa1.value(),
            fr.kappa4.value(),
            fr.kappa6.value(),
        );
        let th = si.theta.value(t).unwrap();
        let r_star = th.cos() * l * k4 / (k1 * k6);
        let cv = s1_criteria(&si, t, r_star).unwrap();
        assert!(cv.w1c.abs() < 1e-9, "W1c at its root: {:.3e}", cv.w1c);
        let cv2 = s1_criteria(&si, t, r_star + 1.0).unwrap();
        let predicted = k1.powi(3) * k4 * k4 * k6;
        assert_relative_eq!(cv2.w1c - cv.w1c, predicted, max_relative = 1e-9);
    }

    #[test]
    fn s1_cone_test_constant_curvatures() {
        // every f₁cone summand carries a derivative factor: cone type
        let c = helix();
        let si = build_si(&c, SiIndex::S1, 17).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| -0.5 + 0.1 * i as f64).collect();
        let rep = s1_cone_test(&si, &grid, 1e-8).unwrap();
        assert_eq!(rep.label, crate::striction::SurfaceType::ConeType);
        assert!(rep.cone_residual < 1e-10, "residual {:.3e}", rep.cone_residual);
        assert!(rep.cylinder_residual > 0.1); // κ₆ ≠ 0
    }

    #[test]
    fn s1_raw_and_general_classification_agree() {
        let c = helix();
        let si = build_si(&c, SiIndex::S1, 17).unwrap();
        let t = 0.15;
        let (c0, cs, _) = si.lambda_coeffs(t).unwrap();
        for r in [-1.0, -0.2, 0.5, 1.3] {
            let s = -c0 / cs;
            let raw = s1_classify(&si, t, s, r, 1e-9).unwrap();
            let (tt, sh, rh) = si.map_point(t, s, r).unwrap();
            let gen = classify_point(&si.surface, tt, sh, rh, 1e-9).unwrap();
            assert!(
                raw.stratum.same_type(&gen.stratum),
                "at r={r}: raw {:?} vs general {:?}",
                raw.stratum,
                gen.stratum
            );
        }
    }

    #[test]
    fn s1_ccr_branch_on_synthetic_kappa1_zero() {
        // a planar-inflection curve with κ₁ = |t| near 0: e₁ = (cos(t²/2), sin(t²/2), ..)
        // extended to stay 4-dimensional away from the test point
        let c = CurveModel::parse(
            ["t", "t^3/6", "t^4/12", "t^5/20"],
            Interval::new(-0.5, 0.5),
        )
        .unwrap();
        // γ' = (1, t²/2, t³/3, t⁴/4): e₁' vanishes at t = 0 like t
        let (k1, k1p) = s1_kappa1_witnesses(&c, 0.0).unwrap();
        assert!(k1 < 1e-9, "kappa1 = {k1}");
        assert!(k1p > 0.1, "kappa1' = {k1p}");
    }

    #[test]
    fn singularity_scan_labels_s4() {
        let c = helix();
        let si = build_si(&c, SiIndex::S4, 17).unwrap();
        let ts = [-0.3, 0.0, 0.3];
        let window = [-0.5, 0.0, 0.5];
        let reports = si.singularity_scan(&ts, &window, 1e-9).unwrap();
        assert_eq!(reports.len(), 9);
        for rep in &reports {
            // the singular line {r = 0} is a cuspidal edge except where it
            // crosses the base curve (s = 0): there ηλ = r̂·a' vanishes and
            // the swallowtail criterion takes over
            let s = rep.raw_point.unwrap().1;
            let expect = if s == 0.0 {
                Stratum::SwallowtailB
            } else {
                Stratum::CuspidalEdge
            };
            assert_eq!(rep.stratum, expect, "{rep:?}");
        }
    }
}
