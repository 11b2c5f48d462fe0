//! Reconstruction of the orthonormal frame {X, Y, X', Z} and base curve γ
//! from the invariant functions (a, δ, b₁…b₄), gauge adaptation of director
//! pairs, and extraction of invariants from given curves.
//!
//! The frame solves W' = A(t)·W with rows (X, Y, X', Z) and
//!
//! ```text
//!         ( 0   0   1   0 )
//!     A = ( 0   0   a   0 )
//!         (-1  -a   0  -δ )
//!         ( 0   0   δ   0 )
//! ```
//!
//! where δ = −det(X, Y, X', X''). The δ signs are the ones consistent with
//! this crate's wedge orientation (e₁∧e₂∧e₃ = +e₄): they keep Z = X∧Y∧X'
//! an identity along the flow. A ∈ 𝔬(4), so the exact flow is orthogonal;
//! the integrator projects back onto the orthogonal group after every step
//! to remove secular drift. The base curve integrates γ' = b₁X + b₂Y + b₃X'
//! + b₄Z alongside.

use std::sync::Arc;

use crate::curve::{CurveFn, Interval, ScalarFn};
use crate::error::{Error, Result};
use crate::expr::ExprAst;
use crate::geom::{self, Mat4, Vec4};
use crate::jets::{binom_row, jet_det4, jet_wedge3, Jet, JetVec4};

/// The invariant quintuple (a, δ, b₁, b₂, b₃) plus b₄ as expressions of t.
/// b₄ ≡ 0 flags the frontal case.
#[derive(Debug, Clone)]
pub struct InvariantData {
    pub a: ExprAst,
    pub delta: ExprAst,
    pub b: [ExprAst; 4],
    pub domain: Interval,
}

impl InvariantData {
    pub fn parse(a: &str, delta: &str, b: [&str; 4], domain: Interval) -> Result<InvariantData> {
        Ok(InvariantData {
            a: crate::expr::parse(a)?,
            delta: crate::expr::parse(delta)?,
            b: [
                crate::expr::parse(b[0])?,
                crate::expr::parse(b[1])?,
                crate::expr::parse(b[2])?,
                crate::expr::parse(b[3])?,
            ],
            domain,
        })
    }

    pub fn jets(&self, t: f64, order: usize) -> Result<InvariantJets> {
        Ok(InvariantJets {
            a: self.a.eval_jet(t, order)?,
            delta: self.delta.eval_jet(t, order)?,
            b: [
                self.b[0].eval_jet(t, order)?,
                self.b[1].eval_jet(t, order)?,
                self.b[2].eval_jet(t, order)?,
                self.b[3].eval_jet(t, order)?,
            ],
        })
    }

    pub fn to_fn(&self) -> DataFn {
        let data = self.clone();
        DataFn::new(move |t, n| data.jets(t, n))
    }
}

/// Jets of the invariant functions at one parameter value.
#[derive(Debug, Clone)]
pub struct InvariantJets {
    pub a: Jet,
    pub delta: Jet,
    pub b: [Jet; 4],
}

/// Jet-evaluable source of invariant data.
#[derive(Clone)]
pub struct DataFn(Arc<dyn Fn(f64, usize) -> Result<InvariantJets> + Send + Sync>);

impl DataFn {
    pub fn new(f: impl Fn(f64, usize) -> Result<InvariantJets> + Send + Sync + 'static) -> DataFn {
        DataFn(Arc::new(f))
    }

    pub fn jets(&self, t: f64, order: usize) -> Result<InvariantJets> {
        (self.0)(t, order)
    }
}

impl std::fmt::Debug for DataFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("DataFn(..)")
    }
}

/// The 𝔬(4) coefficient matrix of the frame equations for given values of a
/// and δ (see the module docs for the sign convention).
pub fn structure_matrix(a: f64, delta: f64) -> Mat4 {
    Mat4([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, a, 0.0],
        [-1.0, -a, 0.0, -delta],
        [0.0, 0.0, delta, 0.0],
    ])
}

/// Options for [`integrate_frame`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    /// Target step size for the one-step method.
    pub substep: f64,
    /// Re-orthonormalize after every step (polar projection).
    pub project: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            substep: 1e-3,
            project: true,
        }
    }
}

/// Numerically integrated orthonormal frame field with its base curve.
///
/// Node values are stored at integration resolution together with their exact
/// ODE derivatives; dense output is cubic Hermite, and jets at arbitrary t are
/// rebuilt from the structure equations (derivatives of the frame are exact
/// functions of the frame values and the data jets).
#[derive(Debug)]
pub struct FrameField {
    ts: Vec<f64>,
    ws: Vec<Mat4>,
    wds: Vec<Mat4>,
    gs: Vec<Vec4>,
    gds: Vec<Vec4>,
    pub data: DataFn,
    pub domain: Interval,
}

fn rhs(data: &DataFn, t: f64, w: &Mat4) -> Result<(Mat4, Vec4)> {
    let d = data.jets(t, 0)?;
    let a = structure_matrix(d.a.value(), d.delta.value());
    let wd = a.mul(w);
    let mut gd = [0.0; 4];
    for i in 0..4 {
        gd = geom::add(gd, geom::scale(w.row(i), d.b[i].value()));
    }
    Ok((wd, gd))
}

fn rk4_step(data: &DataFn, t: f64, h: f64, w: &Mat4, g: Vec4) -> Result<(Mat4, Vec4)> {
    let (k1w, k1g) = rhs(data, t, w)?;
    let (k2w, k2g) = rhs(data, t + h / 2.0, &w.add(&k1w.scale(h / 2.0)))?;
    let (k3w, k3g) = rhs(data, t + h / 2.0, &w.add(&k2w.scale(h / 2.0)))?;
    let (k4w, k4g) = rhs(data, t + h, &w.add(&k3w.scale(h)))?;
    let wn = w.add(
        &k1w.add(&k2w.scale(2.0))
            .add(&k3w.scale(2.0))
            .add(&k4w)
            .scale(h / 6.0),
    );
    let gn = geom::add(
        g,
        geom::scale(
            geom::add(
                geom::add(k1g, geom::scale(k2g, 2.0)),
                geom::add(geom::scale(k3g, 2.0), k4g),
            ),
            h / 6.0,
        ),
    );
    Ok((wn, gn))
}

/// Integrate the frame equations from an orthonormal initial frame at t0 over
/// the span of `grid`, re-orthonormalizing each step. γ starts at the origin.
pub fn integrate_frame(
    data: &DataFn,
    t0: f64,
    initial: Mat4,
    grid: &[f64],
    opts: IntegrateOptions,
) -> Result<FrameField> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty grid".into()));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Invalid("grid must be strictly increasing".into()));
    }
    let defect = initial.orthogonality_defect();
    if defect > 1e-12 {
        return Err(Error::NonOrthonormalFrame { residual: defect });
    }
    if !(opts.substep.is_finite() && opts.substep > 1e-12) {
        return Err(Error::StepUnderflow { t: t0 });
    }
    let (lo, hi) = (grid[0], *grid.last().unwrap());
    if t0 < lo - 1e-12 || t0 > hi + 1e-12 {
        return Err(Error::OutOfDomain { t: t0, lo, hi });
    }

    // March from t0 toward one end, recording every substep node.
    let march = |target: f64| -> Result<(Vec<f64>, Vec<Mat4>, Vec<Vec4>)> {
        let mut ts = vec![t0];
        let mut ws = vec![initial];
        let mut gs = vec![[0.0; 4]];
        let span = (target - t0).abs();
        if span < 1e-15 {
            return Ok((ts, ws, gs));
        }
        let nsteps = (span / opts.substep).ceil() as usize;
        let h = (target - t0) / nsteps as f64;
        let mut w = initial;
        let mut g = [0.0; 4];
        for k in 0..nsteps {
            let t = t0 + h * k as f64;
            let (wn, gn) = rk4_step(data, t, h, &w, g)?;
            w = if opts.project {
                wn.polar_orthonormalize()
            } else {
                wn
            };
            g = gn;
            ts.push(t0 + h * (k + 1) as f64);
            ws.push(w);
            gs.push(g);
        }
        Ok((ts, ws, gs))
    };

    let (mut ts, mut ws, mut gs) = if t0 > lo + 1e-15 {
        let (lts, lws, lgs) = march(lo)?;
        // reverse the backward march, dropping the duplicated t0 node
        let mut ts: Vec<f64> = lts.into_iter().rev().collect();
        let mut ws: Vec<Mat4> = lws.into_iter().rev().collect();
        let mut gs: Vec<Vec4> = lgs.into_iter().rev().collect();
        ts.pop();
        ws.pop();
        gs.pop();
        (ts, ws, gs)
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    let (rts, rws, rgs) = march(hi)?;
    ts.extend(rts);
    ws.extend(rws);
    gs.extend(rgs);

    let mut wds = Vec::with_capacity(ts.len());
    let mut gds = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let (wd, gd) = rhs(data, t, &ws[i])?;
        wds.push(wd);
        gds.push(gd);
    }

    let domain = if ts.len() == 1 {
        Interval {
            lo: ts[0],
            hi: ts[0],
        }
    } else {
        Interval::new(ts[0], *ts.last().unwrap())
    };
    Ok(FrameField {
        ts,
        ws,
        wds,
        gs,
        gds,
        data: data.clone(),
        domain,
    })
}

fn hermite(u: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * h * d0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * h * d1
}

impl FrameField {
    pub fn nodes(&self) -> &[f64] {
        &self.ts
    }

    pub fn frame_at_node(&self, i: usize) -> Mat4 {
        self.ws[i]
    }

    pub fn gamma_at_node(&self, i: usize) -> Vec4 {
        self.gs[i]
    }

    fn locate(&self, t: f64) -> Result<usize> {
        if t < self.ts[0] - 1e-12 || t > self.ts[self.ts.len() - 1] + 1e-12 {
            return Err(Error::OutOfDomain {
                t,
                lo: self.ts[0],
                hi: self.ts[self.ts.len() - 1],
            });
        }
        let i = self.ts.partition_point(|&x| x <= t);
        Ok(i.clamp(1, self.ts.len().max(2) - 1) - 1)
    }

    /// Dense output: frame matrix and base point by cubic Hermite.
    pub fn state_at(&self, t: f64) -> Result<(Mat4, Vec4)> {
        if self.ts.len() == 1 {
            return if (t - self.ts[0]).abs() < 1e-12 {
                Ok((self.ws[0], self.gs[0]))
            } else {
                Err(Error::OutOfDomain {
                    t,
                    lo: self.ts[0],
                    hi: self.ts[0],
                })
            };
        }
        let i = self.locate(t)?;
        if (t - self.ts[i]).abs() < 1e-14 {
            return Ok((self.ws[i], self.gs[i]));
        }
        let h = self.ts[i + 1] - self.ts[i];
        let u = (t - self.ts[i]) / h;
        let mut w = Mat4::zero();
        let mut g = [0.0; 4];
        for r in 0..4 {
            for c in 0..4 {
                w.0[r][c] = hermite(
                    u,
                    h,
                    self.ws[i].0[r][c],
                    self.wds[i].0[r][c],
                    self.ws[i + 1].0[r][c],
                    self.wds[i + 1].0[r][c],
                );
            }
            g[r] = hermite(
                u,
                h,
                self.gs[i][r],
                self.gds[i][r],
                self.gs[i + 1][r],
                self.gds[i + 1][r],
            );
        }
        Ok((w, g))
    }

    /// Derivative matrices W, W', …, W⁽ⁿ⁾ at t, rebuilt from the structure
    /// equations: W⁽ᵏ⁺¹⁾ = Σᵢ C(k,i) A⁽ⁱ⁾ W⁽ᵏ⁻ⁱ⁾ with A's entries taken from
    /// the data jets. Only the value W(t) comes from interpolation.
    pub fn frame_derivs(&self, t: f64, order: usize) -> Result<Vec<Mat4>> {
        let (w0, _) = self.state_at(t)?;
        let mut derivs = vec![w0];
        if order == 0 {
            return Ok(derivs);
        }
        let d = self.data.jets(t, order - 1)?;
        let a_derivs: Vec<Mat4> = (0..order)
            .map(|i| {
                let mut m = Mat4([
                    [0.0, 0.0, 0.0, 0.0],
                    [0.0, 0.0, d.a.deriv(i), 0.0],
                    [0.0, -d.a.deriv(i), 0.0, -d.delta.deriv(i)],
                    [0.0, 0.0, d.delta.deriv(i), 0.0],
                ]);
                if i == 0 {
                    m.0[0][2] = 1.0;
                    m.0[2][0] = -1.0;
                }
                m
            })
            .collect();
        for k in 0..order {
            let row = binom_row(k);
            let mut next = Mat4::zero();
            for i in 0..=k {
                next = next.add(&a_derivs[i].mul(&derivs[k - i]).scale(row[i]));
            }
            derivs.push(next);
        }
        Ok(derivs)
    }

    /// Derivatives γ, γ', …, γ⁽ⁿ⁾ at t via γ⁽ᵏ⁺¹⁾ = Σⱼ Σᵢ C(k,i) bⱼ⁽ⁱ⁾ Wⱼ⁽ᵏ⁻ⁱ⁾.
    pub fn gamma_derivs(&self, t: f64, order: usize) -> Result<Vec<Vec4>> {
        let (_, g0) = self.state_at(t)?;
        if order == 0 {
            return Ok(vec![g0]);
        }
        let w = self.frame_derivs(t, order - 1)?;
        let d = self.data.jets(t, order - 1)?;
        let mut derivs = vec![g0];
        for k in 0..order {
            let row = binom_row(k);
            let mut next = [0.0; 4];
            for j in 0..4 {
                for i in 0..=k {
                    next = geom::add(next, geom::scale(w[k - i].row(j), row[i] * d.b[j].deriv(i)));
                }
            }
            derivs.push(next);
        }
        Ok(derivs)
    }

    fn row_jet(derivs: &[Mat4], row: usize, t: f64) -> JetVec4 {
        JetVec4::new(std::array::from_fn(|c| {
            Jet::from_derivatives(t, derivs.iter().map(|m| m.0[row][c]).collect())
        }))
    }

    /// Jet-evaluable curves (X, Y, X', Z, γ) backed by this field.
    pub fn curves(self: &Arc<Self>) -> FrameCurves {
        let mk_row = |row: usize| {
            let field = Arc::clone(self);
            CurveFn::new(move |t, n| {
                let d = field.frame_derivs(t, n)?;
                Ok(FrameField::row_jet(&d, row, t))
            })
        };
        let field = Arc::clone(self);
        let gamma = CurveFn::new(move |t, n| {
            let d = field.gamma_derivs(t, n)?;
            Ok(JetVec4::new(std::array::from_fn(|c| {
                Jet::from_derivatives(t, d.iter().map(|v| v[c]).collect())
            })))
        });
        FrameCurves {
            x: mk_row(0),
            y: mk_row(1),
            xp: mk_row(2),
            z: mk_row(3),
            gamma,
        }
    }

    /// Worst orthonormality defect over all stored nodes.
    pub fn max_orthogonality_defect(&self) -> f64 {
        self.ws
            .iter()
            .map(|w| w.orthogonality_defect())
            .fold(0.0, f64::max)
    }

    /// Invariants recovered from the stored frames by high-order finite
    /// differences, with no reference to the data that built the field.
    /// Needs 3 nodes on each side of `i`.
    pub fn extract_invariants_fd(&self, i: usize) -> Option<ExtractedInvariants> {
        if i < 3 || i + 3 >= self.ts.len() {
            return None;
        }
        let h = self.ts[i + 1] - self.ts[i];
        // 6th-order centered stencils
        let d1 = |f: &dyn Fn(usize) -> f64| {
            (f(i + 3) - 9.0 * f(i + 2) + 45.0 * f(i + 1) - 45.0 * f(i - 1) + 9.0 * f(i - 2)
                - f(i - 3))
                / (60.0 * h)
        };
        let d2 = |f: &dyn Fn(usize) -> f64| {
            (2.0 * f(i + 3) - 27.0 * f(i + 2) + 270.0 * f(i + 1) - 490.0 * f(i)
                + 270.0 * f(i - 1)
                - 27.0 * f(i - 2)
                + 2.0 * f(i - 3))
                / (180.0 * h * h)
        };
        let row_d1 = |r: usize| -> Vec4 { std::array::from_fn(|c| d1(&|k| self.ws[k].0[r][c])) };
        let row_d2 = |r: usize| -> Vec4 { std::array::from_fn(|c| d2(&|k| self.ws[k].0[r][c])) };
        let x = self.ws[i].row(0);
        let y = self.ws[i].row(1);
        let xp_fd = row_d1(0);
        let xpp_fd = row_d2(0);
        let yp_fd = row_d1(1);
        let gp_fd: Vec4 = std::array::from_fn(|c| d1(&|k| self.gs[k][c]));
        let z = geom::wedge3(x, y, geom::normalize(xp_fd));
        let sq = geom::dot(xp_fd, xp_fd);
        Some(ExtractedInvariants {
            t: self.ts[i],
            a: geom::dot(yp_fd, xp_fd) / sq,
            delta: -geom::det4(x, y, xp_fd, xpp_fd) / sq.sqrt().powi(3),
            b: [
                geom::dot(gp_fd, x),
                geom::dot(gp_fd, y),
                geom::dot(gp_fd, xp_fd) / sq,
                geom::dot(gp_fd, z),
            ],
        })
    }
}

/// Jet-evaluable rows of a [`FrameField`].
#[derive(Debug, Clone)]
pub struct FrameCurves {
    pub x: CurveFn,
    pub y: CurveFn,
    pub xp: CurveFn,
    pub z: CurveFn,
    pub gamma: CurveFn,
}

/// Invariants recovered numerically at a grid node.
#[derive(Debug, Clone, Copy)]
pub struct ExtractedInvariants {
    pub t: f64,
    pub a: f64,
    pub delta: f64,
    pub b: [f64; 4],
}

/// A scalar defined by quadrature of a jet-evaluable rate: θ(t) with
/// θ' = rate. Values are integrated once on a dense grid; jets at any t use
/// the stored value plus the exact rate jets.
#[derive(Debug, Clone)]
pub struct IntegratedScalar {
    ts: Vec<f64>,
    vals: Vec<f64>,
    rates: Vec<f64>,
    pub rate: ScalarFn,
}

impl IntegratedScalar {
    /// Integrate rate over `domain` from value `y0` at `domain.lo`, with at
    /// least `min_nodes` nodes.
    pub fn integrate(
        rate: ScalarFn,
        domain: Interval,
        y0: f64,
        min_nodes: usize,
    ) -> Result<IntegratedScalar> {
        let n = min_nodes.max(64);
        let ts = domain.linspace(n);
        let h = ts[1] - ts[0];
        let mut vals = Vec::with_capacity(n);
        let mut rates = Vec::with_capacity(n);
        let mut y = y0;
        vals.push(y);
        rates.push(rate.value(ts[0])?);
        for k in 0..n - 1 {
            let t = ts[k];
            let k1 = rate.value(t)?;
            let k2 = rate.value(t + h / 2.0)?;
            let k4 = rate.value(t + h)?;
            y += h / 6.0 * (k1 + 4.0 * k2 + k4);
            vals.push(y);
            rates.push(k4);
        }
        Ok(IntegratedScalar {
            ts,
            vals,
            rates,
            rate,
        })
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.ts[0], *self.ts.last().unwrap())
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.domain().check(t)?;
        let i = self
            .ts
            .partition_point(|&x| x <= t)
            .clamp(1, self.ts.len() - 1)
            - 1;
        if (t - self.ts[i]).abs() < 1e-14 {
            return Ok(self.vals[i]);
        }
        let h = self.ts[i + 1] - self.ts[i];
        let u = (t - self.ts[i]) / h;
        Ok(hermite(
            u,
            h,
            self.vals[i],
            self.rates[i],
            self.vals[i + 1],
            self.rates[i + 1],
        ))
    }

    pub fn jet(&self, t: f64, order: usize) -> Result<Jet> {
        let v0 = self.value(t)?;
        if order == 0 {
            return Ok(Jet::constant(v0, t, 0));
        }
        let r = self.rate.jet(t, order - 1)?;
        let mut coeffs = vec![v0];
        coeffs.extend_from_slice(r.coeffs());
        Ok(Jet::from_derivatives(t, coeffs))
    }

    pub fn as_scalar_fn(self: &Arc<Self>) -> ScalarFn {
        let me = Arc::clone(self);
        ScalarFn::new(move |t, n| me.jet(t, n))
    }
}

/// Monotone parameter change t̃ = τ(t) with τ' = speed > 0, supporting the
/// inverse map and reparametrized jets. τ(domain.lo) = 0.
#[derive(Debug)]
pub struct ParamMap {
    map: IntegratedScalar,
}

impl ParamMap {
    /// Build τ(t) = ∫ speed dt. Refuses if speed drops to `min_speed` or
    /// below anywhere on the quadrature grid.
    pub fn build(
        speed: ScalarFn,
        domain: Interval,
        min_nodes: usize,
        min_speed: f64,
    ) -> Result<ParamMap> {
        let map = IntegratedScalar::integrate(speed, domain, 0.0, min_nodes)?;
        for (&t, &r) in map.ts.iter().zip(&map.rates) {
            if r <= min_speed {
                return Err(Error::SpeedVanishes { t, speed: r });
            }
        }
        Ok(ParamMap { map })
    }

    pub fn source_domain(&self) -> Interval {
        self.map.domain()
    }

    pub fn target_domain(&self) -> Interval {
        Interval::new(self.map.vals[0], *self.map.vals.last().unwrap())
    }

    pub fn forward(&self, t: f64) -> Result<f64> {
        self.map.value(t)
    }

    /// Monotone inverse by bisection, then a Newton polish with the rate.
    pub fn inverse(&self, tt: f64) -> Result<f64> {
        let dom = self.source_domain();
        let tgt = self.target_domain();
        if tt < tgt.lo - 1e-9 || tt > tgt.hi + 1e-9 {
            return Err(Error::OutOfDomain {
                t: tt,
                lo: tgt.lo,
                hi: tgt.hi,
            });
        }
        let (mut lo, mut hi) = (dom.lo, dom.hi);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if self.map.value(mid)? < tt {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..2 {
            let f = self.map.value(t)? - tt;
            let r = self.map.rate.value(t)?;
            t = (t - f / r).clamp(dom.lo, dom.hi);
        }
        Ok(t)
    }

    pub fn speed_jet(&self, t: f64, order: usize) -> Result<Jet> {
        self.map.rate.jet(t, order)
    }

    /// Wrap a curve of t as a curve of t̃.
    pub fn reparametrize_curve(self: &Arc<Self>, c: &CurveFn) -> CurveFn {
        let map = Arc::clone(self);
        let inner = c.clone();
        CurveFn::new(move |tt, n| {
            let t = map.inverse(tt)?;
            let g = inner.jet(t, n)?;
            if n == 0 {
                return Ok(JetVec4::constant(g.value(), tt, 0));
            }
            let speed = map.speed_jet(t, n - 1)?;
            g.reparametrize(&speed, tt)
        })
    }

    /// Wrap a scalar of t as a scalar of t̃.
    pub fn reparametrize_scalar(self: &Arc<Self>, s: &ScalarFn) -> ScalarFn {
        let map = Arc::clone(self);
        let inner = s.clone();
        ScalarFn::new(move |tt, n| {
            let t = map.inverse(tt)?;
            let g = inner.jet(t, n)?;
            if n == 0 {
                return Ok(Jet::constant(g.value(), tt, 0));
            }
            let speed = map.speed_jet(t, n - 1)?;
            g.reparametrize(&speed, tt)
        })
    }
}

/// Verify that the pair (X, Y) is unit and orthogonal at t, within `tol`.
fn check_unit_orthogonal(x: &JetVec4, y: &JetVec4, t: f64, tol: f64) -> Result<()> {
    let checks: [(&'static str, f64); 3] = [
        ("|X|-1", x.dot(x).value().sqrt() - 1.0),
        ("|Y|-1", y.dot(y).value().sqrt() - 1.0),
        ("<X,Y>", x.dot(y).value()),
    ];
    for (what, residual) in checks {
        if residual.abs() > tol {
            return Err(Error::GaugeViolated {
                t,
                what,
                residual: residual.abs(),
            });
        }
    }
    Ok(())
}

/// Result of [`adapt_directors`]: the rotated pair and its gauge angle.
#[derive(Debug, Clone)]
pub struct AdaptedDirectors {
    pub x: CurveFn,
    pub y: CurveFn,
    pub theta: Arc<IntegratedScalar>,
    pub theta0: f64,
}

/// Rotate a unit orthogonal pair (X, Y) into a constrictively adapted pair
/// (⟨X̂', Ŷ⟩ = ⟨X̂, Ŷ'⟩ = 0) by the angle θ with θ'(t) = ⟨X'(t), Y(t)⟩,
/// θ(domain.lo) = θ0:
///
/// ```text
///   X̂ = cos θ · X − sin θ · Y,    Ŷ = sin θ · X + cos θ · Y.
/// ```
pub fn adapt_directors(
    x: &CurveFn,
    y: &CurveFn,
    domain: Interval,
    theta0: f64,
    min_nodes: usize,
) -> Result<AdaptedDirectors> {
    for &t in domain.linspace(17).iter() {
        let xj = x.jet(t, 1)?;
        let yj = y.jet(t, 1)?;
        check_unit_orthogonal(&xj, &yj, t, 1e-8)?;
    }
    let (xr, yr) = (x.clone(), y.clone());
    let rate = ScalarFn::new(move |t, n| {
        let xj = xr.jet(t, n + 1)?;
        let yj = yr.jet(t, n + 1)?;
        Ok(xj.derivative().dot(&yj.truncate(n)))
    });
    let theta = Arc::new(IntegratedScalar::integrate(rate, domain, theta0, min_nodes)?);

    Ok(AdaptedDirectors {
        x: rotate_pair(x, y, &theta, RotatedComponent::XHat),
        y: rotate_pair(x, y, &theta, RotatedComponent::YHat),
        theta,
        theta0,
    })
}

#[derive(Clone, Copy)]
pub enum RotatedComponent {
    /// cosθ·X − sinθ·Y
    XHat,
    /// sinθ·X + cosθ·Y
    YHat,
}

/// One component of the θ-rotated director pair as a jet-evaluable curve.
pub fn rotate_pair(
    x: &CurveFn,
    y: &CurveFn,
    theta: &Arc<IntegratedScalar>,
    which: RotatedComponent,
) -> CurveFn {
    let (xc, yc) = (x.clone(), y.clone());
    let th = Arc::clone(theta);
    CurveFn::new(move |t, n| {
        let tj = th.jet(t, n)?;
        let (s, c) = tj.sin_cos();
        let xj = xc.jet(t, n)?;
        let yj = yc.jet(t, n)?;
        Ok(match which {
            RotatedComponent::XHat => xj.scale_jet(&c).sub(&yj.scale_jet(&s)),
            RotatedComponent::YHat => xj.scale_jet(&s).add(&yj.scale_jet(&c)),
        })
    })
}

/// Extract the invariants (a, δ, b₁…b₄) as jets at t from a constrictively
/// adapted, unit-|X'| triple (γ, X, Y):
///
///   a = ⟨Y', X'⟩,  δ = −det(X, Y, X', X''),
///   b₁ = ⟨γ', X⟩, b₂ = ⟨γ', Y⟩, b₃ = ⟨γ', X'⟩/⟨X', X'⟩, b₄ = ⟨γ', Z⟩,
///
/// with Z = X ∧ Y ∧ X'. The gauge preconditions are verified at t and a
/// `GaugeViolated` error names the worst residual if they fail.
pub fn extract_invariants(
    gamma: &CurveFn,
    x: &CurveFn,
    y: &CurveFn,
    t: f64,
    order: usize,
) -> Result<InvariantJets> {
    let n = order + 2;
    let xj = x.jet(t, n)?;
    let yj = y.jet(t, n)?;
    let gj = gamma.jet(t, n)?;

    check_unit_orthogonal(&xj, &yj, t, 1e-8)?;
    let xp = xj.derivative();
    let yp = yj.derivative();
    let gauge: [(&'static str, f64); 3] = [
        ("<X',Y>", xp.dot(&yj.truncate(n - 1)).value()),
        ("<X,Y'>", xj.truncate(n - 1).dot(&yp).value()),
        ("|X'|-1", xp.dot(&xp).value().sqrt() - 1.0),
    ];
    for (what, residual) in gauge {
        if residual.abs() > 1e-8 {
            return Err(Error::GaugeViolated {
                t,
                what,
                residual: residual.abs(),
            });
        }
    }

    let m = n - 2; // order available after two derivatives
    let a = yp.truncate(m + 1).dot(&xp.truncate(m + 1)).truncate(order);
    let xpp = xp.derivative();
    let delta = jet_det4(
        &xj.truncate(m),
        &yj.truncate(m),
        &xp.truncate(m),
        &xpp.truncate(m),
    )
    .neg()
    .truncate(order);

    let gp = gj.derivative();
    let k = n - 1;
    let z = jet_wedge3(&xj.truncate(k), &yj.truncate(k), &xp.truncate(k));
    let b1 = gp.dot(&xj.truncate(k)).truncate(order);
    let b2 = gp.dot(&yj.truncate(k)).truncate(order);
    // normalized form keeps b3 valid before exact unit-speed reparametrization
    let b3 = gp
        .dot(&xp.truncate(k))
        .div(&xp.truncate(k).dot(&xp.truncate(k)))?
        .truncate(order);
    let b4 = gp.dot(&z).truncate(order);

    Ok(InvariantJets {
        a,
        delta,
        b: [b1, b2, b3, b4],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn const_data(a: f64, delta: f64, b: [f64; 4]) -> DataFn {
        DataFn::new(move |t, n| {
            Ok(InvariantJets {
                a: Jet::constant(a, t, n),
                delta: Jet::constant(delta, t, n),
                b: [
                    Jet::constant(b[0], t, n),
                    Jet::constant(b[1], t, n),
                    Jet::constant(b[2], t, n),
                    Jet::constant(b[3], t, n),
                ],
            })
        })
    }

    #[test]
    fn constant_coefficients_match_matrix_exponential() {
        let data = const_data(0.0, 1.0, [0.0; 4]);
        let grid: Vec<f64> = (0..8).map(|i| 0.1 * i as f64).collect();
        let field = integrate_frame(&data, 0.0, Mat4::IDENTITY, &grid, Default::default()).unwrap();
        let t = 0.7;
        let (w, _) = field.state_at(t).unwrap();
        let expected = structure_matrix(0.0, 1.0).scale(t).exp();
        let diff = w.sub(&expected).max_abs();
        assert!(diff < 1e-10, "diff {diff}");
    }

    #[test]
    fn rotation_block_closed_form() {
        // a=0, δ=0, B=(1,0,0,0): X rotates into X', γ traces the circle.
        let data = const_data(0.0, 0.0, [1.0, 0.0, 0.0, 0.0]);
        let grid: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        let field = integrate_frame(&data, 0.0, Mat4::IDENTITY, &grid, Default::default()).unwrap();
        let t = 1.0;
        let (w, g) = field.state_at(t).unwrap();
        // X(t) = cos t X0 + sin t Xp0 = (cos t, 0, sin t, 0)
        assert_relative_eq!(w.0[0][0], t.cos(), epsilon = 1e-10);
        assert_relative_eq!(w.0[0][2], t.sin(), epsilon = 1e-10);
        // Y and Z constant
        assert_relative_eq!(w.0[1][1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.0[3][3], 1.0, epsilon = 1e-12);
        // γ(t) = sin t X0 + (1 − cos t) Xp0
        assert_relative_eq!(g[0], t.sin(), epsilon = 1e-10);
        assert_relative_eq!(g[2], 1.0 - t.cos(), epsilon = 1e-10);
    }

    #[test]
    fn single_node_grid_returns_initial() {
        let data = const_data(0.3, -0.2, [1.0, 2.0, 3.0, 4.0]);
        let field =
            integrate_frame(&data, 0.5, Mat4::IDENTITY, &[0.5], Default::default()).unwrap();
        assert_eq!(field.nodes().len(), 1);
        assert_eq!(field.frame_at_node(0), Mat4::IDENTITY);
        assert_eq!(field.gamma_at_node(0), [0.0; 4]);
    }

    #[test]
    fn rejects_non_orthonormal_initial() {
        let data = const_data(0.0, 0.0, [0.0; 4]);
        let mut bad = Mat4::IDENTITY;
        bad.0[0][1] = 0.1;
        assert!(matches!(
            integrate_frame(&data, 0.0, bad, &[0.0, 1.0], Default::default()),
            Err(Error::NonOrthonormalFrame { .. })
        ));
    }

    #[test]
    fn drift_small_without_projection_tiny_with() {
        let data = InvariantData::parse(
            "sin(t)",
            "cos(2*t)",
            ["1", "t", "0", "0"],
            Interval::new(0.0, 1.0),
        )
        .unwrap()
        .to_fn();
        let grid: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        let raw = integrate_frame(
            &data,
            0.0,
            Mat4::IDENTITY,
            &grid,
            IntegrateOptions {
                substep: 1e-3,
                project: false,
            },
        )
        .unwrap();
        assert!(raw.max_orthogonality_defect() < 1e-6);
        let proj = integrate_frame(&data, 0.0, Mat4::IDENTITY, &grid, Default::default()).unwrap();
        assert!(proj.max_orthogonality_defect() < 1e-12);
    }

    #[test]
    fn integrations_from_two_initial_frames_differ_by_an_isometry() {
        let data = InvariantData::parse("t", "1", ["1", "0", "t", "0"], Interval::new(0.0, 1.0))
            .unwrap()
            .to_fn();
        let grid: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        let c = 0.6f64;
        let (s, co) = (c.sin(), c.cos());
        let m = Mat4([
            [co, s, 0.0, 0.0],
            [-s, co, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]);
        let f1 = integrate_frame(&data, 0.0, Mat4::IDENTITY, &grid, Default::default()).unwrap();
        let f2 = integrate_frame(&data, 0.0, m, &grid, Default::default()).unwrap();
        // W2(t) = W1(t) · M with M = W1(0)⁻¹ W2(0) = W2(0)
        for &t in &[0.25, 0.8] {
            let (w1, _) = f1.state_at(t).unwrap();
            let (w2, _) = f2.state_at(t).unwrap();
            let diff = w1.mul(&m).sub(&w2).max_abs();
            assert!(diff < 1e-8, "diff {diff}");
        }
    }

    #[test]
    fn frame_jets_match_structure_equations() {
        let data = InvariantData::parse(
            "sin(t)",
            "1+t",
            ["1", "0", "0", "0"],
            Interval::new(0.0, 1.0),
        )
        .unwrap()
        .to_fn();
        let grid: Vec<f64> = (0..=4).map(|i| 0.25 * i as f64).collect();
        let field = Arc::new(
            integrate_frame(&data, 0.0, Mat4::IDENTITY, &grid, Default::default()).unwrap(),
        );
        let curves = field.curves();
        let t = 0.4;
        let x = curves.x.jet(t, 3).unwrap();
        let xp = curves.xp.jet(t, 3).unwrap();
        // the X' row is the derivative of the X row
        for c in 0..4 {
            assert_relative_eq!(x.c[c].deriv(1), xp.c[c].value(), epsilon = 1e-10);
            assert_relative_eq!(x.c[c].deriv(2), xp.c[c].deriv(1), epsilon = 1e-10);
        }
        // γ' = b1 X with b1 = 1
        let g = curves.gamma.jet(t, 2).unwrap();
        for c in 0..4 {
            assert_relative_eq!(g.c[c].deriv(1), x.c[c].value(), epsilon = 1e-10);
        }
    }

    #[test]
    fn round_trip_extracts_input_data() {
        let data = InvariantData::parse(
            "0.5*sin(2*t)",
            "cos(t)",
            ["1", "0.3*t", "sin(t)", "0.1"],
            Interval::new(0.0, 1.0),
        )
        .unwrap();
        let dfn = data.to_fn();
        let grid: Vec<f64> = (0..=100).map(|i| 0.01 * i as f64).collect();
        let field = integrate_frame(&dfn, 0.0, Mat4::IDENTITY, &grid, Default::default()).unwrap();
        let mut worst: f64 = 0.0;
        for i in (10..field.nodes().len() - 10).step_by(37) {
            let got = field.extract_invariants_fd(i).unwrap();
            let want = data.jets(got.t, 0).unwrap();
            worst = worst
                .max((got.a - want.a.value()).abs())
                .max((got.delta - want.delta.value()).abs());
            for j in 0..4 {
                worst = worst.max((got.b[j] - want.b[j].value()).abs());
            }
        }
        assert!(worst < 1e-6, "worst residual {worst}");
    }

    #[test]
    fn adapt_already_adapted_pair_is_identity() {
        let x = CurveFn::constant(geom::E1);
        let y = CurveFn::constant(geom::E2);
        let adapted = adapt_directors(&x, &y, Interval::new(0.0, 1.0), 0.0, 64).unwrap();
        let xa = adapted.x.value(0.7).unwrap();
        let ya = adapted.y.value(0.7).unwrap();
        for i in 0..4 {
            assert_relative_eq!(xa[i], geom::E1[i], epsilon = 1e-12);
            assert_relative_eq!(ya[i], geom::E2[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn adapted_pair_satisfies_the_gauge() {
        let x = CurveFn::parse(["cos(t)", "sin(t)", "0", "0"]).unwrap();
        let y = CurveFn::parse(["0", "0", "cos(3*t)", "sin(3*t)"]).unwrap();
        let adapted = adapt_directors(&x, &y, Interval::new(0.0, 1.0), 0.0, 2048).unwrap();
        for &t in &[0.1, 0.5, 0.9] {
            let xj = adapted.x.jet(t, 1).unwrap();
            let yj = adapted.y.jet(t, 1).unwrap();
            let r1 = xj.derivative().dot(&yj.truncate(0)).value();
            let r2 = xj.truncate(0).dot(&yj.derivative()).value();
            assert!(r1.abs() < 1e-8, "<X',Y> = {r1}");
            assert!(r2.abs() < 1e-8, "<X,Y'> = {r2}");
        }
    }

    #[test]
    fn parammap_linear_rescale() {
        let speed = ScalarFn::constant(2.0);
        let map = Arc::new(ParamMap::build(speed, Interval::new(0.0, 1.0), 256, 1e-9).unwrap());
        assert_relative_eq!(map.forward(0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(map.inverse(1.0).unwrap(), 0.5, epsilon = 1e-10);
        let c = CurveFn::parse(["t", "t^2", "0", "0"]).unwrap();
        let cr = map.reparametrize_curve(&c);
        // at t̃ = 1 (t = 0.5): d(t)/dt̃ = 1/2
        let j = cr.jet(1.0, 2).unwrap();
        assert_relative_eq!(j.c[0].value(), 0.5, epsilon = 1e-10);
        assert_relative_eq!(j.c[0].deriv(1), 0.5, epsilon = 1e-10);
        assert_relative_eq!(j.c[1].deriv(1), 2.0 * 0.5 * 0.5, epsilon = 1e-10);
    }

    #[test]
    fn extract_invariants_on_synthetic_adapted_triple() {
        // X = (cos t, sin t, 0, 0), Y = e3, γ' = 2X: a = 0, δ = 0, b = (2,0,0,0).
        let x = CurveFn::parse(["cos(t)", "sin(t)", "0", "0"]).unwrap();
        let y = CurveFn::constant(geom::E3);
        let gamma = CurveFn::parse(["2*sin(t)", "-2*cos(t)", "0", "0"]).unwrap();
        let inv = extract_invariants(&gamma, &x, &y, 0.3, 2).unwrap();
        assert_relative_eq!(inv.a.value(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(inv.b[0].value(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(inv.b[1].value(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(inv.b[2].value(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(inv.b[3].value(), 0.0, epsilon = 1e-12);
        // X'' = -X: repeated direction in det(X,Y,X',X'') → δ = 0
        assert_relative_eq!(inv.delta.value(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn extract_rejects_gauge_violation() {
        let x = CurveFn::parse(["2*cos(t)", "2*sin(t)", "0", "0"]).unwrap(); // |X| = 2
        let y = CurveFn::constant(geom::E3);
        let gamma = CurveFn::constant([0.0; 4]);
        assert!(matches!(
            extract_invariants(&gamma, &x, &y, 0.0, 1),
            Err(Error::GaugeViolated { .. })
        ));
    }
}
