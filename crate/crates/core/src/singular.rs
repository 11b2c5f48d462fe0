//! Singularity identification and classification for pseudo-non-degenerate
//! two-ruled frontals: the identifier λ = b₃ + s + r·a, the null vector field
//! η = ∂t − b₁∂s − b₂∂r, iterated η-derivatives, and the pointwise decision
//! table for cuspidal edge / swallowtail / cuspidal butterfly / Whitney
//! umbrella × interval / cuspidal cross cap × interval.
//!
//! Every criterion is computed along two independent routes wherever the
//! theory provides them: closed forms in the data derivatives, and direct
//! jet differentiation along the η characteristic. The closed forms are
//!
//! ```text
//!   ηλ  = r·a' − a·b₂ − b₁ + b₃'
//!   q₀  = ηηλ = r·a'' − a·b₂' − 2a'·b₂ − b₁' + b₃''
//!   q₁  = a(b₂a'' − a'b₂') + (b₁ − b₃')a'' − 2b₂(a')² − a'b₁' + a'b₃''
//!   q₂  = a(b₂a''' − a'b₂'') + (b₁ − b₃')a''' − 3b₂a'a'' − 3(a')²b₂'
//!         + a'(−b₁'' + b₃''')
//! ```
//!
//! with q₁ = a'·ηηλ and q₂ = a'·ηηηλ on the locus r = (a·b₂ + b₁ − b₃')/a'.

use crate::error::{Error, Result};
use crate::framefield::{DataFn, InvariantJets};
use crate::geom::{self, Vec4};
use crate::hypersurface::TwoRuled;
use crate::jets::Jet;
use crate::striction::omega_jet;

/// Polynomial in the plane coordinates (s, r) with jet coefficients in t.
/// This is the carrier for λ and its iterated η-derivatives: η maps such
/// polynomials to such polynomials, consuming one jet order per application.
#[derive(Debug, Clone)]
pub struct JetPoly2 {
    /// (s-degree, r-degree, coefficient jet)
    pub terms: Vec<(u32, u32, Jet)>,
}

impl JetPoly2 {
    /// Smallest coefficient order; the zero polynomial is unconstrained.
    pub fn order(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, _, j)| j.order())
            .min()
            .unwrap_or(usize::MAX)
    }

    /// Evaluate at (s, r) using the coefficient values.
    pub fn eval(&self, s: f64, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(i, j, c)| c.value() * s.powi(*i as i32) * r.powi(*j as i32))
            .sum()
    }

    fn map_coeffs(&self, f: impl Fn(&Jet) -> Jet) -> JetPoly2 {
        JetPoly2 {
            terms: self.terms.iter().map(|(i, j, c)| (*i, *j, f(c))).collect(),
        }
    }

    fn add(&self, other: &JetPoly2) -> JetPoly2 {
        let order = self.order().min(other.order());
        let mut terms: Vec<(u32, u32, Jet)> = Vec::new();
        for (i, j, c) in self.terms.iter().chain(other.terms.iter()) {
            let c = c.truncate(order.min(c.order()));
            if let Some(slot) = terms.iter_mut().find(|(a, b, _)| a == i && b == j) {
                slot.2 = slot.2.add(&c);
            } else {
                terms.push((*i, *j, c));
            }
        }
        JetPoly2 { terms }
    }

    /// Apply the first-order operator ct·∂t + cs·∂s + cr·∂r. Consumes one
    /// jet order.
    pub fn directional(&self, ct: &Jet, cs: &Jet, cr: &Jet) -> Result<JetPoly2> {
        let n = self.order();
        if n == 0 {
            return Err(Error::JetOrderInsufficient {
                needed: 1,
                available: 0,
            });
        }
        let m = n - 1;
        let dt = self.map_coeffs(|c| c.derivative().mul(&ct.truncate(m)));
        let ds = JetPoly2 {
            terms: self
                .terms
                .iter()
                .filter(|(i, _, _)| *i > 0)
                .map(|(i, j, c)| {
                    (
                        i - 1,
                        *j,
                        c.truncate(m).mul(&cs.truncate(m)).scale(*i as f64),
                    )
                })
                .collect(),
        };
        let dr = JetPoly2 {
            terms: self
                .terms
                .iter()
                .filter(|(_, j, _)| *j > 0)
                .map(|(i, j, c)| {
                    (
                        *i,
                        j - 1,
                        c.truncate(m).mul(&cr.truncate(m)).scale(*j as f64),
                    )
                })
                .collect(),
        };
        Ok(dt.add(&ds).add(&dr))
    }

    /// Apply η = ∂t − b₁∂s − b₂∂r. Consumes one jet order.
    pub fn eta(&self, b1: &Jet, b2: &Jet) -> Result<JetPoly2> {
        let n = self.order();
        if n == 0 {
            return Err(Error::JetOrderInsufficient {
                needed: 1,
                available: 0,
            });
        }
        let m = n - 1;
        let one = Jet::constant(1.0, b1.base_point(), m);
        self.directional(&one, &b1.neg(), &b2.neg())
    }
}

/// The identifier λ(t,s,r) = b₃ + s + r·a as a [`JetPoly2`], and the null
/// vector field coefficients (1, −b₁, −b₂).
#[derive(Debug, Clone)]
pub struct LambdaEta {
    pub lambda: JetPoly2,
    pub eta: (f64, Jet, Jet),
}

/// λ and η for a prepared two-ruled frontal at order `order`.
/// Errors if the surface carries no invariant data or is not a frontal
/// (grid check is the caller's job; here we only need the data).
pub fn lambda_eta(data: &DataFn, t: f64, order: usize) -> Result<LambdaEta> {
    let d = data.jets(t, order)?;
    let lambda = JetPoly2 {
        terms: vec![
            (0, 0, d.b[2].clone()),
            (1, 0, Jet::constant(1.0, t, order)),
            (0, 1, d.a.clone()),
        ],
    };
    Ok(LambdaEta {
        lambda,
        eta: (1.0, d.b[0].neg(), d.b[1].neg()),
    })
}

/// Iterated η-derivatives of λ at a point, by jet composition along the η
/// characteristic: (ηλ, ηηλ, ηηηλ).
pub fn eta_derivatives(data: &DataFn, t: f64, s: f64, r: f64, order: usize) -> Result<[f64; 3]> {
    let need = order.max(4);
    let le = lambda_eta(data, t, need)?;
    let d = data.jets(t, need)?;
    let l1 = le.lambda.eta(&d.b[0], &d.b[1])?;
    let l2 = l1.eta(&d.b[0], &d.b[1])?;
    let l3 = l2.eta(&d.b[0], &d.b[1])?;
    Ok([l1.eval(s, r), l2.eval(s, r), l3.eval(s, r)])
}

/// Closed-form criterion quantities at (t, r), straight from the data jets.
#[derive(Debug, Clone, Copy)]
pub struct CriterionValues {
    /// ηλ = r·a' − a·b₂ − b₁ + b₃'
    pub eta_lambda: f64,
    /// q₀ = r·a'' − a·b₂' − 2a'b₂ − b₁' + b₃''
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    /// the swallowtail locus radius (a·b₂ + b₁ − b₃')/a', when a' ≠ 0
    pub locus_r: Option<f64>,
    pub a_prime: f64,
}

pub fn criterion_values(d: &InvariantJets, r: f64) -> Result<CriterionValues> {
    if d.a.order() < 3 || d.b[2].order() < 3 {
        return Err(Error::JetOrderInsufficient {
            needed: 3,
            available: d.a.order(),
        });
    }
    let (a, ap, app, appp) = (d.a.value(), d.a.deriv(1), d.a.deriv(2), d.a.deriv(3));
    let (b1, b1p, b1pp) = (d.b[0].value(), d.b[0].deriv(1), d.b[0].deriv(2));
    let (b2, b2p, b2pp) = (d.b[1].value(), d.b[1].deriv(1), d.b[1].deriv(2));
    let (b3p, b3pp, b3ppp) = (d.b[2].deriv(1), d.b[2].deriv(2), d.b[2].deriv(3));

    let eta_lambda = r * ap - a * b2 - b1 + b3p;
    let q0 = -a * b2p + r * app - 2.0 * b2 * ap - b1p + b3pp;
    let q1 = a * (b2 * app - ap * b2p) + (b1 - b3p) * app - 2.0 * b2 * ap * ap - ap * b1p
        + ap * b3pp;
    let q2 = a * (b2 * appp - ap * b2pp) + (b1 - b3p) * appp
        - 3.0 * b2 * ap * app
        - 3.0 * ap * ap * b2p
        + ap * (-b1pp + b3ppp);
    let locus_r = if ap != 0.0 {
        Some((a * b2 + b1 - b3p) / ap)
    } else {
        None
    };
    Ok(CriterionValues {
        eta_lambda,
        q0,
        q1,
        q2,
        locus_r,
        a_prime: ap,
    })
}

/// Stratum labels for the classified singularities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratum {
    Regular,
    /// cuspidal edge
    CuspidalEdge,
    /// swallowtail via the a' = 0 branch (q₀ witness)
    SwallowtailA,
    /// swallowtail via the a' ≠ 0 branch (q₁ witness)
    SwallowtailB,
    CuspidalButterfly,
    /// cuspidal cross cap × interval (frontal, non-front)
    CuspidalCrossCap,
    /// Whitney umbrella × interval (non-frontal)
    WhitneyUmbrella,
    Unresolved,
}

impl Stratum {
    pub fn label(&self) -> &'static str {
        match self {
            Stratum::Regular => "regular",
            Stratum::CuspidalEdge => "CE",
            Stratum::SwallowtailA => "SW_A",
            Stratum::SwallowtailB => "SW_B",
            Stratum::CuspidalButterfly => "CB",
            Stratum::CuspidalCrossCap => "CCR_I",
            Stratum::WhitneyUmbrella => "WU_I",
            Stratum::Unresolved => "unresolved",
        }
    }

    /// Equality up to the swallowtail sub-branch.
    pub fn same_type(&self, other: &Stratum) -> bool {
        let fold = |s: &Stratum| match s {
            Stratum::SwallowtailA | Stratum::SwallowtailB => Stratum::SwallowtailB,
            other => *other,
        };
        fold(self) == fold(other)
    }
}

/// Criterion values recorded alongside every classification.
#[derive(Debug, Clone, Copy, Default)]
pub struct Witnesses {
    pub lambda: Option<f64>,
    pub eta_lambda: Option<f64>,
    pub q0: Option<f64>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub delta: Option<f64>,
    pub delta_prime: Option<f64>,
    pub b4: Option<f64>,
    pub b4_prime: Option<f64>,
    pub psi_bar: Option<f64>,
}

/// One classified point: chart location, stratum, and the witnesses that
/// justified the label.
#[derive(Debug, Clone)]
pub struct SingularityReport {
    /// point in the chart used for classification (adapted unit-speed)
    pub point: (f64, f64, f64),
    /// the same point in the caller's original chart, when it differs
    pub raw_point: Option<(f64, f64, f64)>,
    pub stratum: Stratum,
    pub witnesses: Witnesses,
    pub tolerance: f64,
    pub gauge_note: String,
}

/// Classify a singular point of a front by the decision table:
/// CE if |ηλ| > τ; else SW_A on the a'=0 branch with q₀ ≠ 0; else SW_B on
/// the locus r = (ab₂+b₁−b₃')/a' with q₁ ≠ 0; else CB there with q₂ ≠ 0;
/// else unresolved. The caller must have checked λ ≈ 0 and δ ≠ 0.
pub fn classify_front_point(
    data: &DataFn,
    t: f64,
    s: f64,
    r: f64,
    tol: f64,
) -> Result<SingularityReport> {
    let d = data.jets(t, 4)?;
    let lambda = d.b[2].value() + s + r * d.a.value();
    if lambda.abs() > tol {
        return Err(Error::NotSingular { lambda });
    }
    let delta = d.delta.value();
    if delta.abs() <= tol {
        return Err(Error::NotAFront { t, delta });
    }
    let cv = criterion_values(&d, r)?;
    let mut w = Witnesses {
        lambda: Some(lambda),
        eta_lambda: Some(cv.eta_lambda),
        q0: Some(cv.q0),
        q1: Some(cv.q1),
        q2: Some(cv.q2),
        delta: Some(delta),
        delta_prime: Some(d.delta.deriv(1)),
        b4: Some(d.b[3].value()),
        ..Default::default()
    };

    let stratum = if cv.eta_lambda.abs() > tol {
        Stratum::CuspidalEdge
    } else if cv.a_prime.abs() <= tol {
        // branch (A): a' = 0
        let lin = -d.a.value() * d.b[1].value() - d.b[0].value() + d.b[2].deriv(1);
        if lin.abs() <= tol && cv.q0.abs() > tol {
            Stratum::SwallowtailA
        } else {
            Stratum::Unresolved
        }
    } else {
        // branch (B): a' ≠ 0, on the locus r = (ab₂ + b₁ − b₃')/a'
        let on_locus = cv
            .locus_r
            .map(|lr| (r - lr).abs() <= tol * (1.0 + r.abs()))
            .unwrap_or(false);
        if on_locus && cv.q1.abs() > tol {
            Stratum::SwallowtailB
        } else if on_locus && cv.q1.abs() <= tol && cv.q2.abs() > tol {
            Stratum::CuspidalButterfly
        } else {
            Stratum::Unresolved
        }
    };
    if stratum == Stratum::Unresolved {
        w.psi_bar = None;
    }
    Ok(SingularityReport {
        point: (t, s, r),
        raw_point: None,
        stratum,
        witnesses: w,
        tolerance: tol,
        gauge_note: String::new(),
    })
}

/// Whitney umbrella × interval test at a singular-configuration point
/// (λ(p) ≈ 0): WU × I iff b₄(t) ≠ 0 and b₄'(t) ≠ 0. Cross-checked against
/// the determinant tests det(f_s, f_r, f_{st}, f_{tt}) and
/// det(f_s, f_r, f_{rt}, f_{tt}) computed with jets of f.
pub fn whitney_test(f: &TwoRuled, t: f64, s: f64, r: f64, tol: f64) -> Result<SingularityReport> {
    let data = f.data.as_ref().ok_or(Error::WrongGaugeState {
        required: "adapted+unit-speed",
        actual: f.gauge.name(),
    })?;
    let d = data.jets(t, 1)?;
    let lambda = d.b[2].value() + s + r * d.a.value();
    if lambda.abs() > tol * 10.0 {
        return Err(Error::NotSingular { lambda });
    }
    let b4 = d.b[3].value();
    let b4p = d.b[3].deriv(1);

    // independent route: raw 4x4 determinants from jets of f
    let gj = f.gamma.jet(t, 2)?;
    let xj = f.x.jet(t, 2)?;
    let yj = f.y.jet(t, 2)?;
    let f_s = xj.value();
    let f_r = yj.value();
    let f_st = xj.deriv(1);
    let f_rt = yj.deriv(1);
    let f_tt = geom::add(
        gj.deriv(2),
        geom::add(geom::scale(xj.deriv(2), s), geom::scale(yj.deriv(2), r)),
    );
    let det_s = geom::det4(f_s, f_r, f_st, f_tt);
    let det_r = geom::det4(f_s, f_r, f_rt, f_tt);
    let det_says = det_s.abs() > tol || det_r.abs() > tol;
    let b_says = b4p.abs() > tol;
    if det_says != b_says {
        return Err(Error::CriterionInapplicable {
            reason: format!(
                "determinant route (|det_s|={:.3e}, |det_r|={:.3e}) disagrees with b4'={:.3e}",
                det_s.abs(),
                det_r.abs(),
                b4p
            ),
        });
    }

    let stratum = if b4.abs() > tol && b4p.abs() > tol {
        Stratum::WhitneyUmbrella
    } else {
        Stratum::Unresolved
    };
    Ok(SingularityReport {
        point: (t, s, r),
        raw_point: None,
        stratum,
        witnesses: Witnesses {
            lambda: Some(lambda),
            b4: Some(b4),
            b4_prime: Some(b4p),
            ..Default::default()
        },
        tolerance: tol,
        gauge_note: format!("det_s={det_s:.6e}, det_r={det_r:.6e}"),
    })
}

/// The adapted-triple function ψ̄ = det(ξ₁f, ξ₂f, ν, ην) restricted to the
/// singular graph s = −b₃ − r·a, with ξ₁ = ∂t − (b₃' + r·a')∂s and
/// ξ₂ = −a∂s + ∂r, together with its tangential derivatives (ξ₁ψ̄, ξ₂ψ̄).
#[derive(Debug, Clone, Copy)]
pub struct PsiBar {
    pub value: f64,
    pub xi1_derivative: f64,
    pub xi2_derivative: f64,
}

/// Compute ψ̄ at a point of the singular set (given by t and r; s is the
/// graph value). ν is the frame normal Z and ην = Z' by jets.
pub fn crosscap_psi(f: &TwoRuled, t: f64, r: f64) -> Result<PsiBar> {
    // ψ̄(t, r) = ψ̄₀(t) + r·ψ̄₁(t) is linear in r on the singular graph
    // (ξ₁f = γ' − b₃X' − (b₃'+ra')X, Y' = aX' absorbs the rest), so both
    // tangential derivatives come from two jet evaluations.
    let psi_jets = |tt: f64, order: usize| -> Result<(Jet, Jet)> {
        let n = order + 2;
        let gj = f.gamma.jet(tt, n)?;
        let xj = f.x.jet(tt, n)?;
        let yj = f.y.jet(tt, n)?;
        let data = f.data.as_ref().ok_or(Error::WrongGaugeState {
            required: "adapted+unit-speed",
            actual: f.gauge.name(),
        })?;
        let d = data.jets(tt, n)?;

        let m = order;
        let xp = xj.derivative(); // order n−1 = m+1
        let gp = gj.derivative();
        // ν = X∧Y∧X' (unit for the adapted gauge), ην = ν'
        let nu_full = crate::jets::jet_wedge3(&xj.truncate(m + 1), &yj.truncate(m + 1), &xp);
        let nu = nu_full.truncate(m);
        let eta_nu = nu_full.derivative();

        // ξ₁f restricted to the graph: u0 + r·u1
        let u0 = gp
            .truncate(m)
            .sub(&xp.truncate(m).scale_jet(&d.b[2].truncate(m)))
            .sub(&xj.truncate(m).scale_jet(&d.b[2].derivative().truncate(m)));
        let u1 = xj
            .truncate(m)
            .scale_jet(&d.a.derivative().truncate(m))
            .neg();
        // ξ₂f = −aX + Y
        let xi2 = yj
            .truncate(m)
            .sub(&xj.truncate(m).scale_jet(&d.a.truncate(m)));

        let psi0 = crate::jets::jet_det4(&u0, &xi2, &nu, &eta_nu);
        let psi1 = crate::jets::jet_det4(&u1, &xi2, &nu, &eta_nu);
        Ok((psi0, psi1))
    };

    let (psi0, psi1) = psi_jets(t, 1)?;
    Ok(PsiBar {
        value: psi0.value() + r * psi1.value(),
        // ξ₁ along the graph is d/dt at fixed r; ξ₂ is d/dr
        xi1_derivative: psi0.deriv(1) + r * psi1.deriv(1),
        xi2_derivative: psi1.value(),
    })
}

/// Cuspidal cross cap × interval classification at a singular point, with
/// both routes: the ψ̄ test (ψ̄ = 0, (ξ₁ψ̄, ξ₂ψ̄) ≠ 0) and the theorem
/// shortcut (δ = 0, δ' ≠ 0). The routes must agree.
pub fn crosscap_classify(
    f: &TwoRuled,
    t: f64,
    s: f64,
    r: f64,
    tol: f64,
) -> Result<SingularityReport> {
    let data = f.data.as_ref().ok_or(Error::WrongGaugeState {
        required: "adapted+unit-speed",
        actual: f.gauge.name(),
    })?;
    let d = data.jets(t, 2)?;
    let lambda = d.b[2].value() + s + r * d.a.value();
    if lambda.abs() > tol * 10.0 {
        return Err(Error::NotSingular { lambda });
    }
    let cv = criterion_values(&data.jets(t, 4)?, r)?;
    if cv.eta_lambda.abs() <= tol {
        return Err(Error::CriterionInapplicable {
            reason: format!(
                "criterion requires ηλ ≠ 0; got {:.3e} at t={t}",
                cv.eta_lambda
            ),
        });
    }
    let psi = crosscap_psi(f, t, r)?;
    let psi_route = psi.value.abs() <= tol
        && (psi.xi1_derivative.abs() > tol || psi.xi2_derivative.abs() > tol);
    let delta = d.delta.value();
    let delta_prime = d.delta.deriv(1);
    let delta_route = delta.abs() <= tol && delta_prime.abs() > tol;
    if psi_route != delta_route {
        return Err(Error::CriterionInapplicable {
            reason: format!(
                "ψ̄ route ({psi_route}) disagrees with (δ, δ') route ({delta_route}): \
                 ψ̄={:.3e}, dψ̄=({:.3e}, {:.3e}), δ={delta:.3e}, δ'={delta_prime:.3e}",
                psi.value, psi.xi1_derivative, psi.xi2_derivative
            ),
        });
    }
    let stratum = if delta_route {
        Stratum::CuspidalCrossCap
    } else {
        Stratum::Unresolved
    };
    Ok(SingularityReport {
        point: (t, s, r),
        raw_point: None,
        stratum,
        witnesses: Witnesses {
            lambda: Some(lambda),
            eta_lambda: Some(cv.eta_lambda),
            delta: Some(delta),
            delta_prime: Some(delta_prime),
            b4: Some(d.b[3].value()),
            psi_bar: Some(psi.value),
            ..Default::default()
        },
        tolerance: tol,
        gauge_note: format!(
            "xi1_psi={:.6e}, xi2_psi={:.6e}",
            psi.xi1_derivative, psi.xi2_derivative
        ),
    })
}

/// Unified pointwise classification of a prepared two-ruled hypersurface at
/// an adapted-chart point: dispatches between regular, front strata
/// (CE/SW/CB), the cross-cap test (frontal, non-front) and the Whitney test
/// (non-frontal).
pub fn classify_point(f: &TwoRuled, t: f64, s: f64, r: f64, tol: f64) -> Result<SingularityReport> {
    let data = f.data.as_ref().ok_or(Error::WrongGaugeState {
        required: "adapted+unit-speed",
        actual: f.gauge.name(),
    })?;
    let d = data.jets(t, 1)?;
    let lambda = d.b[2].value() + s + r * d.a.value();
    let b4 = d.b[3].value();
    if lambda.abs() > tol || b4.abs() > tol {
        // b4(t) ≠ 0 means f_t has a Z-component: the point is regular
        return Ok(SingularityReport {
            point: (t, s, r),
            raw_point: None,
            stratum: Stratum::Regular,
            witnesses: Witnesses {
                lambda: Some(lambda),
                b4: Some(b4),
                ..Default::default()
            },
            tolerance: tol,
            gauge_note: String::new(),
        });
    }
    // singular configuration; frontal iff b4 vanishes identically nearby —
    // probe b4' to distinguish the Whitney transition from a true frontal
    let b4p = d.b[3].deriv(1);
    if b4p.abs() > tol {
        return whitney_test(f, t, s, r, tol);
    }
    let delta = data.jets(t, 0)?.delta.value();
    if delta.abs() > tol {
        classify_front_point(data, t, s, r, tol)
    } else {
        crosscap_classify(f, t, s, r, tol)
    }
}

/// Parametrization of the singular set of a frontal: for each grid t, the
/// chart line s = −b₃ − r·a; and the second singular set S₂, the points with
/// r = ω/a' where a' ≠ 0.
#[derive(Debug, Clone)]
pub struct SingularSets {
    /// (t, b₃, a): the line s = −b₃ − r·a
    pub lines: Vec<(f64, f64, f64)>,
    /// (t, s, r) with r = ω/a', s = −b₃ − aω/a'
    pub second: Vec<(f64, f64, f64)>,
}

pub fn singular_sets(data: &DataFn, grid: &[f64], a_prime_tol: f64) -> Result<SingularSets> {
    let mut lines = Vec::with_capacity(grid.len());
    let mut second = Vec::new();
    for &t in grid {
        let d = data.jets(t, 2)?;
        lines.push((t, d.b[2].value(), d.a.value()));
        let ap = d.a.deriv(1);
        if ap.abs() > a_prime_tol {
            let w = omega_jet(&d.a, &d.b, 1).value();
            let r = w / ap;
            let s = -d.b[2].value() - d.a.value() * r;
            second.push((t, s, r));
        }
    }
    Ok(SingularSets { lines, second })
}

/// Raw-chart singular line of a surface with a normal direction: λ in the
/// surface's own chart is linear, λ(t,s,r) = c₀ + c_s·s + c_r·r; returns the
/// coefficients. Solving λ = 0 locates singular candidates in the raw chart.
pub fn raw_singular_line(f: &TwoRuled, t: f64) -> Result<(f64, f64, f64)> {
    let nu = f.normal_direction(t)?;
    let gj = f.gamma.jet(t, 1)?;
    let xj = f.x.jet(t, 1)?;
    let yj = f.y.jet(t, 1)?;
    let (x, y) = (xj.value(), yj.value());
    let c0 = geom::det4(gj.deriv(1), x, y, nu);
    let cs = geom::det4(xj.deriv(1), x, y, nu);
    let cr = geom::det4(yj.deriv(1), x, y, nu);
    Ok((c0, cs, cr))
}

/// Convenience: the normal candidate as a value for report output.
pub fn normal_at(f: &TwoRuled, t: f64) -> Result<Vec4> {
    f.normal_direction(t)
}
