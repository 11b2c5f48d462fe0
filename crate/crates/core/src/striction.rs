//! Striction geometry: striction curves of ruled surfaces, striction
//! surfaces and second striction curves of pseudo-non-degenerate two-ruled
//! hypersurfaces, developable-type classification, and the adjacent-ruling
//! distance oracle.
//!
//! For a prepared surface with invariants (a, δ, B), the striction surface is
//! the graph s(t,r) = −a·r − b₃ inside the chart, parameterized as
//! σ₁(t,r) = γ̃ + r·X̃ with γ̃ = γ − b₃X and X̃ = (−aX + Y)/√(a²+1). Where
//! a' ≠ 0 the striction curve of σ₁ exists: σ₂ = γ̃ + (ω√(a²+1)/a')·X̃ with
//! ω = a·b₂ + b₁ − b₃'.

use crate::curve::CurveFn;
use crate::error::{Error, Result};
use crate::framefield::DataFn;
use crate::geom::{self, Mat4, Vec4};
use crate::hypersurface::TwoRuled;
use crate::jets::Jet;

/// Striction curve of the ruled surface γ + sX: s(t) = −⟨γ',X'⟩/⟨X',X'⟩.
/// The director must be unit and non-cylindrical (X' ≠ 0) at the queried t.
pub fn ruled_striction(gamma: &CurveFn, x: &CurveFn, t: f64) -> Result<(f64, Vec4)> {
    let xj = x.jet(t, 1)?;
    let xp = xj.deriv(1);
    let sq = geom::dot(xp, xp);
    if sq.sqrt() <= 1e-9 {
        return Err(Error::Cylindrical(format!(
            "X' = 0 at t={t}: any s(t) gives a striction curve"
        )));
    }
    let gp = gamma.jet(t, 1)?.deriv(1);
    let s = -geom::dot(gp, xp) / sq;
    let sigma = geom::add(gamma.value(t)?, geom::scale(xj.value(), s));
    Ok((s, sigma))
}

/// ω = a·b₂ + b₁ − b₃' as a jet; consumes one data order for b₃'.
pub fn omega(data: &DataFn, t: f64, order: usize) -> Result<Jet> {
    let d = data.jets(t, order + 1)?;
    Ok(omega_jet(&d.a, &d.b, order))
}

pub(crate) fn omega_jet(a: &Jet, b: &[Jet; 4], order: usize) -> Jet {
    a.truncate(order)
        .mul(&b[1].truncate(order))
        .add(&b[0].truncate(order))
        .sub(&b[2].derivative().truncate(order))
}

/// The striction surface σ₁(t, r) = γ̃(t) + r·X̃(t) of a prepared surface,
/// together with the chart form s(t, r) = −a(t)·r − b₃(t).
#[derive(Clone)]
pub struct StrictionSurface {
    /// γ̃ = γ − b₃X
    pub base: CurveFn,
    /// X̃ = (−aX + Y)/√(a²+1), unit
    pub director: CurveFn,
    data: DataFn,
}

impl std::fmt::Debug for StrictionSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("StrictionSurface(..)")
    }
}

impl StrictionSurface {
    pub fn evaluate(&self, t: f64, r: f64) -> Result<Vec4> {
        Ok(geom::add(
            self.base.value(t)?,
            geom::scale(self.director.value(t)?, r),
        ))
    }

    /// Chart coordinates of the striction plane line: s(t, r) = −a·r − b₃.
    pub fn chart_s(&self, t: f64, r: f64) -> Result<f64> {
        let d = self.data.jets(t, 0)?;
        Ok(-d.a.value() * r - d.b[2].value())
    }
}

/// Build the striction surface of a prepared pseudo-non-degenerate surface.
pub fn striction_surface(f: &TwoRuled) -> Result<StrictionSurface> {
    let data = f.data.clone().ok_or(Error::WrongGaugeState {
        required: "adapted+unit-speed",
        actual: f.gauge.name(),
    })?;

    let (g, x, d1) = (f.gamma.clone(), f.x.clone(), data.clone());
    let base = CurveFn::new(move |t, n| {
        let gj = g.jet(t, n)?;
        let xj = x.jet(t, n)?;
        let b3 = d1.jets(t, n)?.b[2].clone();
        Ok(gj.sub(&xj.scale_jet(&b3)))
    });

    let (x2, y2, d2) = (f.x.clone(), f.y.clone(), data.clone());
    let director = CurveFn::new(move |t, n| {
        let a = d2.jets(t, n)?.a.clone();
        let xj = x2.jet(t, n)?;
        let yj = y2.jet(t, n)?;
        xj.scale_jet(&a.neg()).add(&yj).normalize()
    });

    Ok(StrictionSurface {
        base,
        director,
        data,
    })
}

/// Second striction curve σ₂ of a prepared surface, where a' ≠ 0.
#[derive(Clone)]
pub struct SecondStrictionCurve {
    surface: StrictionSurface,
    data: DataFn,
    /// tolerance below which a' counts as vanishing
    pub a_prime_tol: f64,
}

impl std::fmt::Debug for SecondStrictionCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecondStrictionCurve(..)")
    }
}

impl SecondStrictionCurve {
    /// σ₂(t) = γ̃ + (ω(a²+1)^{1/2}/a')·X̃ (closed form).
    pub fn evaluate(&self, t: f64) -> Result<Vec4> {
        let d = self.data.jets(t, 1)?;
        let ap = d.a.deriv(1);
        if ap.abs() <= self.a_prime_tol {
            return Err(Error::Cylindrical(format!(
                "a' = {ap:.3e} at t={t}: cylinder-type locus, second striction undefined"
            )));
        }
        let w = omega(&self.data, t, 0)?.value();
        let coef = w * (d.a.value() * d.a.value() + 1.0).sqrt() / ap;
        Ok(geom::add(
            self.surface.base.value(t)?,
            geom::scale(self.surface.director.value(t)?, coef),
        ))
    }

    /// The same point via the ruled-striction formula applied to σ₁:
    /// r(t) = −⟨γ̃', X̃'⟩/⟨X̃', X̃'⟩. Used as the independent cross-check.
    pub fn evaluate_by_ruled_formula(&self, t: f64) -> Result<Vec4> {
        let (_, sigma) = ruled_striction(&self.surface.base, &self.surface.director, t)?;
        Ok(sigma)
    }

    /// Plane radius ω/a' of the second singular set line at t.
    pub fn chart_r(&self, t: f64) -> Result<f64> {
        let d = self.data.jets(t, 1)?;
        let ap = d.a.deriv(1);
        if ap.abs() <= self.a_prime_tol {
            return Err(Error::Cylindrical(format!("a' vanishes at t={t}")));
        }
        Ok(omega(&self.data, t, 0)?.value() / ap)
    }
}

pub fn second_striction(f: &TwoRuled) -> Result<SecondStrictionCurve> {
    let surface = striction_surface(f)?;
    let data = surface.data.clone();
    Ok(SecondStrictionCurve {
        surface,
        data,
        a_prime_tol: 1e-9,
    })
}

/// Developable type of the striction surface.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceType {
    CylinderType,
    ConeType,
    TangentDevelopableType,
    Generic,
    /// a' has isolated zero crossings inside an otherwise cone-like family;
    /// the type is undefined there.
    Mixed { a_prime_zeros: Vec<f64> },
}

/// Residuals behind a [`SurfaceType`] verdict, all grid maxima.
#[derive(Debug, Clone)]
pub struct SurfaceTypeReport {
    pub label: SurfaceType,
    /// max |a'|
    pub cylinder_residual: f64,
    /// max |a''ω − a'(ω' + a'b₂)|
    pub cone_residual: f64,
    /// max(|ω|, |b₄|)
    pub tangent_residual: f64,
    /// min |a'|
    pub min_a_prime: f64,
    pub grid: Vec<f64>,
    pub tolerance: f64,
}

/// Classify the striction surface on a grid: cylinder type iff a' ≡ 0; cone
/// type iff a' ≠ 0 and a''ω − a'(ω' + a'b₂) ≡ 0; tangent developable type
/// iff ω ≡ b₄ ≡ 0. Identities are grid max-residual tests at `tol`; when
/// several hold the priority is cylinder > cone > tangent developable.
pub fn surface_type(f: &TwoRuled, grid: &[f64], tol: f64) -> Result<SurfaceTypeReport> {
    let data = f.data.clone().ok_or(Error::WrongGaugeState {
        required: "adapted+unit-speed",
        actual: f.gauge.name(),
    })?;
    let mut cyl: f64 = 0.0;
    let mut cone: f64 = 0.0;
    let mut tan: f64 = 0.0;
    let mut min_ap = f64::INFINITY;
    let mut ap_signs: Vec<(f64, f64)> = Vec::new();
    for &t in grid {
        let d = data.jets(t, 2)?;
        let w = omega(&data, t, 1)?;
        let ap = d.a.deriv(1);
        let app = d.a.deriv(2);
        cyl = cyl.max(ap.abs());
        min_ap = min_ap.min(ap.abs());
        cone = cone.max((app * w.value() - ap * (w.deriv(1) + ap * d.b[1].value())).abs());
        tan = tan.max(w.value().abs()).max(d.b[3].value().abs());
        ap_signs.push((t, ap));
    }
    let label = if cyl <= tol {
        SurfaceType::CylinderType
    } else if cone <= tol {
        if min_ap > tol {
            SurfaceType::ConeType
        } else {
            // cone identity holds but a' crosses zero: undefined locus
            let zeros = ap_signs
                .windows(2)
                .filter(|w| w[0].1 * w[1].1 <= 0.0)
                .map(|w| 0.5 * (w[0].0 + w[1].0))
                .collect();
            SurfaceType::Mixed {
                a_prime_zeros: zeros,
            }
        }
    } else if tan <= tol {
        SurfaceType::TangentDevelopableType
    } else {
        SurfaceType::Generic
    };
    Ok(SurfaceTypeReport {
        label,
        cylinder_residual: cyl,
        cone_residual: cone,
        tangent_residual: tan,
        min_a_prime: min_ap,
        grid: grid.to_vec(),
        tolerance: tol,
    })
}

/// Minimizer of the squared distance between points on the rulings at t0 and
/// t0 + ε.
#[derive(Debug, Clone, Copy)]
pub struct AdjacentMinimizer {
    pub s1: f64,
    pub r1: f64,
    pub s2: f64,
    pub r2: f64,
    /// d(ε, ·) at the minimizer
    pub distance_sq_half: f64,
}

/// Minimize d(ε, s₁, s₂, r₁, r₂) = |f(t₀,s₁,r₁) − f(t₀+ε,s₂,r₂)|²/2 over the
/// four plane coordinates. d is a quadratic form, so the minimizer solves
/// the 4x4 normal equations exactly; the minimum-norm solution is returned
/// when they are singular (the pseudo-non-degenerate case).
pub fn adjacent_distance_oracle(f: &TwoRuled, t0: f64, eps: f64) -> Result<AdjacentMinimizer> {
    if !(1e-4..=1e-1).contains(&eps) {
        return Err(Error::Invalid(format!(
            "eps = {eps} outside [1e-4, 1e-1]"
        )));
    }
    let x0 = f.x.value(t0)?;
    let y0 = f.y.value(t0)?;
    let x1 = f.x.value(t0 + eps)?;
    let y1 = f.y.value(t0 + eps)?;
    let dg = geom::sub(f.gamma.value(t0)?, f.gamma.value(t0 + eps)?);
    // d = |dg + C u|²/2, columns of C: (X0, Y0, −X1, −Y1)
    let cols = [x0, y0, geom::scale(x1, -1.0), geom::scale(y1, -1.0)];
    let mut normal = Mat4::zero();
    for i in 0..4 {
        for j in 0..4 {
            normal.0[i][j] = geom::dot(cols[i], cols[j]);
        }
    }
    let rhs: Vec4 = std::array::from_fn(|i| -geom::dot(cols[i], dg));
    let u = geom::pinv_solve_sym(&normal, rhs, 1e-12);
    let mut diff = dg;
    for i in 0..4 {
        diff = geom::add(diff, geom::scale(cols[i], u[i]));
    }
    Ok(AdjacentMinimizer {
        s1: u[0],
        r1: u[1],
        s2: u[2],
        r2: u[3],
        distance_sq_half: geom::dot(diff, diff) / 2.0,
    })
}
