//! Curves in R^4, the Frenet-type frame with curvature functions
//! (l, κ₁, κ₄, κ₆), and osculation-type diagnostics.
//!
//! The frame construction follows the staged recipe: γ' = l·e₁ with l = |γ'|,
//! e₁' = κ₁·e₂ with κ₁ = |e₁'|, e₂' + κ₁e₁ = κ₄·e₃ with κ₄ the norm,
//! e₄ = e₁ ∧ e₂ ∧ e₃ and κ₆ = ⟨e₃', e₄⟩. Every stage is evaluated on jets,
//! so the returned frame carries exact derivatives of all four curvatures.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::ExprAst;
use crate::geom::{self, Vec4};
use crate::jets::{jet_wedge3, Jet, JetVec4};

/// Inclusive parameter interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(lo < hi, "empty interval");
        Interval { lo, hi }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo - 1e-12 && t <= self.hi + 1e-12
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                t,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Uniform grid with n ≥ 2 nodes including both endpoints.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2);
        let h = self.length() / (n - 1) as f64;
        (0..n).map(|i| self.lo + h * i as f64).collect()
    }
}

/// Jet-evaluable scalar function of t.
#[derive(Clone)]
pub struct ScalarFn(Arc<dyn Fn(f64, usize) -> Result<Jet> + Send + Sync>);

impl ScalarFn {
    pub fn new(f: impl Fn(f64, usize) -> Result<Jet> + Send + Sync + 'static) -> ScalarFn {
        ScalarFn(Arc::new(f))
    }

    pub fn from_expr(ast: ExprAst) -> ScalarFn {
        ScalarFn::new(move |t, n| ast.eval_jet(t, n))
    }

    pub fn constant(c: f64) -> ScalarFn {
        ScalarFn::new(move |t, n| Ok(Jet::constant(c, t, n)))
    }

    pub fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        (self.0)(t, order)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t, 0)?.value())
    }
}

impl std::fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ScalarFn(..)")
    }
}

/// Jet-evaluable map t ↦ R^4.
#[derive(Clone)]
pub struct CurveFn(Arc<dyn Fn(f64, usize) -> Result<JetVec4> + Send + Sync>);

impl CurveFn {
    pub fn new(f: impl Fn(f64, usize) -> Result<JetVec4> + Send + Sync + 'static) -> CurveFn {
        CurveFn(Arc::new(f))
    }

    pub fn from_exprs(components: [ExprAst; 4]) -> CurveFn {
        CurveFn::new(move |t, n| {
            Ok(JetVec4::new([
                components[0].eval_jet(t, n)?,
                components[1].eval_jet(t, n)?,
                components[2].eval_jet(t, n)?,
                components[3].eval_jet(t, n)?,
            ]))
        })
    }

    pub fn parse(sources: [&str; 4]) -> Result<CurveFn> {
        Ok(CurveFn::from_exprs([
            crate::expr::parse(sources[0])?,
            crate::expr::parse(sources[1])?,
            crate::expr::parse(sources[2])?,
            crate::expr::parse(sources[3])?,
        ]))
    }

    pub fn constant(v: Vec4) -> CurveFn {
        CurveFn::new(move |t, n| Ok(JetVec4::constant(v, t, n)))
    }

    pub fn jet(&self, t: f64, order: usize) -> Result<JetVec4> {
        (self.0)(t, order)
    }

    pub fn value(&self, t: f64) -> Result<Vec4> {
        Ok(self.jet(t, 0)?.value())
    }
}

impl std::fmt::Debug for CurveFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CurveFn(..)")
    }
}

/// A curve model: jet-evaluable components over a parameter interval.
#[derive(Debug, Clone)]
pub struct CurveModel {
    pub curve: CurveFn,
    pub domain: Interval,
}

impl CurveModel {
    pub fn new(curve: CurveFn, domain: Interval) -> CurveModel {
        CurveModel { curve, domain }
    }

    pub fn parse(sources: [&str; 4], domain: Interval) -> Result<CurveModel> {
        Ok(CurveModel::new(CurveFn::parse(sources)?, domain))
    }
}

/// Degeneracy tolerance for the staged frame construction.
pub const FRAME_TOL: f64 = 1e-9;

/// Frenet-type frame data at a point: unit vectors e₁…e₄ and the curvature
/// jets (l, κ₁, κ₄, κ₆) to the requested order.
#[derive(Debug, Clone)]
pub struct FrenetFrame {
    pub t: f64,
    pub e1: JetVec4,
    pub e2: JetVec4,
    pub e3: JetVec4,
    pub e4: JetVec4,
    pub l: Jet,
    pub kappa1: Jet,
    pub kappa4: Jet,
    pub kappa6: Jet,
}

impl FrenetFrame {
    pub fn e_values(&self) -> [Vec4; 4] {
        [
            self.e1.value(),
            self.e2.value(),
            self.e3.value(),
            self.e4.value(),
        ]
    }
}

/// Compute the Frenet-type frame along `curve` at `t`, with curvature jets to
/// `order`. Fails with the offending stage when an assumption degenerates:
/// stage 1 is γ' ≠ 0, stage 2 is e₁' ≠ 0, stage 3 is e₂' + κ₁e₁ ≠ 0.
pub fn frenet_frame(curve: &CurveModel, t: f64, order: usize) -> Result<FrenetFrame> {
    curve.domain.check(t)?;
    // each normalization stage costs one to two orders of jet depth
    let gamma = curve.curve.jet(t, order + 4)?;
    frenet_frame_from_jet(&gamma, t, order)
}

pub(crate) fn frenet_frame_from_jet(gamma: &JetVec4, t: f64, order: usize) -> Result<FrenetFrame> {
    let degenerate = |stage: u8, detail: &str| Error::FrameDegenerate {
        t,
        stage,
        detail: detail.to_string(),
    };

    let gp = gamma.derivative();
    let l2 = gp.dot(&gp);
    if l2.value().sqrt() <= FRAME_TOL {
        return Err(degenerate(1, "gamma' = 0"));
    }
    let l = l2.sqrt().expect("positive by the stage-1 check");
    let e1 = gp.div_jet(&l)?;

    let e1p = e1.derivative();
    let k1sq = e1p.dot(&e1p);
    if k1sq.value().sqrt() <= FRAME_TOL {
        return Err(degenerate(2, "e1' = 0 (kappa1 vanishes)"));
    }
    let kappa1 = k1sq.sqrt().expect("positive by the stage-2 check");
    let e2 = e1p.div_jet(&kappa1)?;

    let m = e2.order() - 1;
    let v3 = e2
        .derivative()
        .add(&e1.truncate(m).scale_jet(&kappa1.truncate(m)));
    let k4sq = v3.dot(&v3);
    if k4sq.value().sqrt() <= FRAME_TOL {
        return Err(degenerate(3, "e2' + kappa1*e1 = 0 (kappa4 vanishes)"));
    }
    let kappa4 = k4sq.sqrt().expect("positive by the stage-3 check");
    let e3 = v3.div_jet(&kappa4)?;

    let e4 = jet_wedge3(
        &e1.truncate(order + 1),
        &e2.truncate(order + 1),
        &e3.truncate(order + 1),
    );
    let kappa6 = e3.derivative().truncate(order).dot(&e4.truncate(order));

    Ok(FrenetFrame {
        t,
        e1: e1.truncate(order),
        e2: e2.truncate(order),
        e3: e3.truncate(order),
        e4: e4.truncate(order),
        l: l.truncate(order),
        kappa1: kappa1.truncate(order),
        kappa4: kappa4.truncate(order),
        kappa6: kappa6.truncate(order),
    })
}

/// Osculation type of a curve at t, decided from the rank of the derivative
/// matrix (γ', γ'', …, γ⁽ᵐ⁾) with m = `max_order`.
///
/// The defining condition quantifies over all derivative orders; numerically
/// we truncate at `max_order` (default 8 in callers) and report the rank seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsculationType {
    /// rank 4
    Finite,
    /// rank 3
    PseudoFinite,
    /// rank r < 3
    Rank(usize),
}

pub fn osculation_type(curve: &CurveModel, t: f64, max_order: usize) -> Result<OsculationType> {
    curve.domain.check(t)?;
    let jet = curve.curve.jet(t, max_order)?;
    let cols: Vec<Vec4> = (1..=max_order).map(|k| jet.deriv(k)).collect();
    Ok(match geom::rank(&cols, 1e-9) {
        4 => OsculationType::Finite,
        3 => OsculationType::PseudoFinite,
        r => OsculationType::Rank(r),
    })
}
