//! Truncated Taylor (jet) arithmetic storing raw derivative values.
//!
//! A [`Jet`] of order n at base point t0 carries (f(t0), f'(t0), …, f⁽ⁿ⁾(t0)).
//! Coefficients are stored as derivatives, not Taylor coefficients, so the
//! closed-form criteria elsewhere in the crate read exactly like their
//! displayed formulas. Arithmetic propagates derivatives exactly through the
//! operation set (Leibniz rule for products, recurrences for the elementary
//! functions), so all composite derivatives are exact up to rounding.

use crate::error::{Error, Result};
use crate::geom::Vec4;

/// Truncated Taylor expansion of a scalar function at a point, stored as
/// derivative values `(f, f', …, f⁽ⁿ⁾)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    t0: f64,
    coeffs: Vec<f64>,
}

pub(crate) fn binom_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0; k + 1];
    for i in 1..=k {
        row[i] = row[i - 1] * ((k - i + 1) as f64) / (i as f64);
    }
    row
}

impl Jet {
    /// Jet of the constant function c.
    pub fn constant(c: f64, t0: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Jet { t0, coeffs }
    }

    /// Jet of the identity map t ↦ t. Order 0 is rejected: it cannot carry
    /// the derivative that makes the variable a variable.
    pub fn variable(t0: f64, order: usize) -> Result<Jet> {
        if order == 0 {
            return Err(Error::OrderZeroVariable);
        }
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = t0;
        coeffs[1] = 1.0;
        Ok(Jet { t0, coeffs })
    }

    pub fn from_derivatives(t0: f64, coeffs: Vec<f64>) -> Jet {
        assert!(!coeffs.is_empty());
        Jet { t0, coeffs }
    }

    pub fn base_point(&self) -> f64 {
        self.t0
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value f(t0).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// k-th derivative value f⁽ᵏ⁾(t0).
    pub fn deriv(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn check_compatible(&self, other: &Jet) {
        assert_eq!(
            self.coeffs.len(),
            other.coeffs.len(),
            "jet arithmetic requires equal orders"
        );
        assert!(
            self.t0 == other.t0,
            "jet arithmetic requires equal base points ({} vs {})",
            self.t0,
            other.t0
        );
    }

    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order());
        Jet {
            t0: self.t0,
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// Jet of f', one order lower.
    pub fn derivative(&self) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        Jet {
            t0: self.t0,
            coeffs: self.coeffs[1..].to_vec(),
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            t0: self.t0,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            t0: self.t0,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        Jet {
            t0: self.t0,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        Jet {
            t0: self.t0,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Leibniz product: (fg)⁽ᵏ⁾ = Σ C(k,i) f⁽ⁱ⁾ g⁽ᵏ⁻ⁱ⁾.
    pub fn mul(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let n = self.order();
        let mut coeffs = vec![0.0; n + 1];
        for k in 0..=n {
            let row = binom_row(k);
            let mut s = 0.0;
            for i in 0..=k {
                s += row[i] * self.coeffs[i] * other.coeffs[k - i];
            }
            coeffs[k] = s;
        }
        Jet { t0: self.t0, coeffs }
    }

    /// Quotient rule solved recursively from f = h·g.
    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other);
        if other.coeffs[0] == 0.0 {
            return Err(Error::PoleAtEvaluationPoint {
                context: String::new(),
            });
        }
        let n = self.order();
        let mut h = vec![0.0; n + 1];
        for k in 0..=n {
            let row = binom_row(k);
            let mut s = self.coeffs[k];
            for i in 0..k {
                s -= row[i] * h[i] * other.coeffs[k - i];
            }
            h[k] = s / other.coeffs[0];
        }
        Ok(Jet {
            t0: self.t0,
            coeffs: h,
        })
    }

    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(1.0, self.t0, self.order()).div(self)
    }

    /// Integer power by repeated multiplication; negative powers via the
    /// reciprocal (pole if the value vanishes).
    pub fn powi(&self, exp: i32) -> Result<Jet> {
        if exp < 0 {
            return self.powi(-exp)?.recip();
        }
        let mut acc = Jet::constant(1.0, self.t0, self.order());
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// sin and cos propagated jointly through s' = c·f', c' = −s·f'.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.order();
        let mut s = vec![0.0; n + 1];
        let mut c = vec![0.0; n + 1];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 0..n {
            let row = binom_row(k);
            let mut ds = 0.0;
            let mut dc = 0.0;
            for i in 0..=k {
                ds += row[i] * c[i] * self.coeffs[k - i + 1];
                dc -= row[i] * s[i] * self.coeffs[k - i + 1];
            }
            s[k + 1] = ds;
            c[k + 1] = dc;
        }
        (
            Jet {
                t0: self.t0,
                coeffs: s,
            },
            Jet {
                t0: self.t0,
                coeffs: c,
            },
        )
    }

    pub fn sin(&self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }

    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut h = vec![0.0; n + 1];
        h[0] = self.coeffs[0].exp();
        for k in 0..n {
            let row = binom_row(k);
            let mut d = 0.0;
            for i in 0..=k {
                d += row[i] * h[i] * self.coeffs[k - i + 1];
            }
            h[k + 1] = d;
        }
        Jet {
            t0: self.t0,
            coeffs: h,
        }
    }

    /// Square root, solved from g² = f. Requires value > 0.
    pub fn sqrt(&self) -> Result<Jet> {
        if self.coeffs[0] <= 0.0 {
            return Err(Error::DerivativeUndefined {
                function: "sqrt",
                context: format!("value {}", self.coeffs[0]),
            });
        }
        let n = self.order();
        let mut g = vec![0.0; n + 1];
        g[0] = self.coeffs[0].sqrt();
        for k in 1..=n {
            let row = binom_row(k);
            let mut s = self.coeffs[k];
            for i in 1..k {
                s -= row[i] * g[i] * g[k - i];
            }
            g[k] = s / (2.0 * g[0]);
        }
        Ok(Jet {
            t0: self.t0,
            coeffs: g,
        })
    }

    /// |f| away from zero: sign-carrying copy. At zero the derivative does not
    /// exist and the caller must re-choose its gauge.
    pub fn abs_nonvanishing(&self) -> Result<Jet> {
        if self.coeffs[0] == 0.0 {
            return Err(Error::DerivativeUndefined {
                function: "abs",
                context: "value 0".to_string(),
            });
        }
        Ok(if self.coeffs[0] < 0.0 {
            self.neg()
        } else {
            self.clone()
        })
    }

    /// Jet of g∘τ⁻¹ at τ(t0), where `self` is the jet of g in t and `speed`
    /// the jet of τ' in t (nonvanishing). Uses d/dt̃ = (1/τ')·d/dt repeatedly;
    /// each application consumes one order.
    pub fn reparametrize(&self, speed: &Jet, new_base: f64) -> Result<Jet> {
        let n = self.order();
        assert!(speed.order() + 1 >= n, "speed jet order too low");
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(self.coeffs[0]);
        let mut u = self.clone();
        for _ in 0..n {
            let m = u.order() - 1;
            u = u.derivative().div(&speed.truncate(m))?;
            coeffs.push(u.value());
        }
        Ok(Jet {
            t0: new_base,
            coeffs,
        })
    }

    /// Evaluate the truncated Taylor polynomial at t.
    pub fn poly_eval(&self, t: f64) -> f64 {
        let dt = t - self.t0;
        let mut acc = 0.0;
        for k in (0..=self.order()).rev() {
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            acc = acc * dt + self.coeffs[k] / fact;
        }
        acc
    }
}

/// Four jets sharing a base point and order: a jet-valued point/vector in R^4.
#[derive(Debug, Clone, PartialEq)]
pub struct JetVec4 {
    pub c: [Jet; 4],
}

impl JetVec4 {
    pub fn new(c: [Jet; 4]) -> JetVec4 {
        let (t0, n) = (c[0].base_point(), c[0].order());
        assert!(c.iter().all(|j| j.base_point() == t0 && j.order() == n));
        JetVec4 { c }
    }

    pub fn constant(v: Vec4, t0: f64, order: usize) -> JetVec4 {
        JetVec4 {
            c: [
                Jet::constant(v[0], t0, order),
                Jet::constant(v[1], t0, order),
                Jet::constant(v[2], t0, order),
                Jet::constant(v[3], t0, order),
            ],
        }
    }

    pub fn order(&self) -> usize {
        self.c[0].order()
    }

    pub fn base_point(&self) -> f64 {
        self.c[0].base_point()
    }

    pub fn value(&self) -> Vec4 {
        [
            self.c[0].value(),
            self.c[1].value(),
            self.c[2].value(),
            self.c[3].value(),
        ]
    }

    /// Vector of k-th derivative values.
    pub fn deriv(&self, k: usize) -> Vec4 {
        [
            self.c[0].deriv(k),
            self.c[1].deriv(k),
            self.c[2].deriv(k),
            self.c[3].deriv(k),
        ]
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetVec4 {
        JetVec4 {
            c: [f(&self.c[0]), f(&self.c[1]), f(&self.c[2]), f(&self.c[3])],
        }
    }

    pub fn truncate(&self, order: usize) -> JetVec4 {
        self.map(|j| j.truncate(order))
    }

    pub fn derivative(&self) -> JetVec4 {
        self.map(|j| j.derivative())
    }

    pub fn neg(&self) -> JetVec4 {
        self.map(|j| j.neg())
    }

    pub fn add(&self, o: &JetVec4) -> JetVec4 {
        JetVec4 {
            c: [
                self.c[0].add(&o.c[0]),
                self.c[1].add(&o.c[1]),
                self.c[2].add(&o.c[2]),
                self.c[3].add(&o.c[3]),
            ],
        }
    }

    pub fn sub(&self, o: &JetVec4) -> JetVec4 {
        JetVec4 {
            c: [
                self.c[0].sub(&o.c[0]),
                self.c[1].sub(&o.c[1]),
                self.c[2].sub(&o.c[2]),
                self.c[3].sub(&o.c[3]),
            ],
        }
    }

    pub fn scale_jet(&self, s: &Jet) -> JetVec4 {
        self.map(|j| j.mul(s))
    }

    pub fn scale(&self, s: f64) -> JetVec4 {
        self.map(|j| j.scale(s))
    }

    pub fn dot(&self, o: &JetVec4) -> Jet {
        let mut acc = self.c[0].mul(&o.c[0]);
        for i in 1..4 {
            acc = acc.add(&self.c[i].mul(&o.c[i]));
        }
        acc
    }

    pub fn norm(&self) -> Result<Jet> {
        self.dot(self).sqrt()
    }

    pub fn normalize(&self) -> Result<JetVec4> {
        let n = self.norm()?;
        let inv = n.recip()?;
        Ok(self.scale_jet(&inv))
    }

    pub fn div_jet(&self, s: &Jet) -> Result<JetVec4> {
        Ok(JetVec4 {
            c: [
                self.c[0].div(s)?,
                self.c[1].div(s)?,
                self.c[2].div(s)?,
                self.c[3].div(s)?,
            ],
        })
    }

    /// Jet of g∘τ⁻¹ componentwise; see [`Jet::reparametrize`].
    pub fn reparametrize(&self, speed: &Jet, new_base: f64) -> Result<JetVec4> {
        Ok(JetVec4 {
            c: [
                self.c[0].reparametrize(speed, new_base)?,
                self.c[1].reparametrize(speed, new_base)?,
                self.c[2].reparametrize(speed, new_base)?,
                self.c[3].reparametrize(speed, new_base)?,
            ],
        })
    }
}

fn jet_det3(m: [[&Jet; 3]; 3]) -> Jet {
    let a = m[1][1].mul(m[2][2]).sub(&m[1][2].mul(m[2][1]));
    let b = m[1][0].mul(m[2][2]).sub(&m[1][2].mul(m[2][0]));
    let c = m[1][0].mul(m[2][1]).sub(&m[1][1].mul(m[2][0]));
    m[0][0].mul(&a).sub(&m[0][1].mul(&b)).add(&m[0][2].mul(&c))
}

fn jet_minor3(u: &JetVec4, v: &JetVec4, w: &JetVec4, drop: usize) -> Jet {
    let cols: Vec<usize> = (0..4).filter(|&c| c != drop).collect();
    jet_det3([
        [&u.c[cols[0]], &u.c[cols[1]], &u.c[cols[2]]],
        [&v.c[cols[0]], &v.c[cols[1]], &v.c[cols[2]]],
        [&w.c[cols[0]], &w.c[cols[1]], &w.c[cols[2]]],
    ])
}

/// Jet-valued triple exterior product, same orientation as [`crate::geom::wedge3`].
pub fn jet_wedge3(u: &JetVec4, v: &JetVec4, w: &JetVec4) -> JetVec4 {
    JetVec4 {
        c: [
            jet_minor3(u, v, w, 0).neg(),
            jet_minor3(u, v, w, 1),
            jet_minor3(u, v, w, 2).neg(),
            jet_minor3(u, v, w, 3),
        ],
    }
}

/// Jet of det(a, b, c, d) (rows).
pub fn jet_det4(a: &JetVec4, b: &JetVec4, c: &JetVec4, d: &JetVec4) -> Jet {
    jet_wedge3(a, b, c).dot(d)
}
