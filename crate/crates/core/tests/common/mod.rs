//! Shared fixtures and oracles for the integration suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strictio_core::expr::ExprAst;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central finite differences of order k (2nd-order accurate), the
/// independent derivative oracle.
pub fn central_diff(f: &dyn Fn(f64) -> f64, t: f64, k: usize, h: f64) -> f64 {
    match k {
        0 => f(t),
        1 => (f(t + h) - f(t - h)) / (2.0 * h),
        2 => (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h),
        3 => (f(t + 2.0 * h) - 2.0 * f(t + h) + 2.0 * f(t - h) - f(t - 2.0 * h))
            / (2.0 * h * h * h),
        _ => panic!("central stencil not tabulated for k={k}"),
    }
}

/// A random oscillatory expression with derivative scales ~ c^k, suitable
/// for finite-difference comparison in f64.
pub fn random_expression(rng: &mut ChaCha8Rng) -> (ExprAst, f64) {
    use ExprAst::*;
    let c1: f64 = rng.gen_range(4.0..6.0);
    let d1: f64 = rng.gen_range(0.0..6.28);
    let c2: f64 = rng.gen_range(4.0..6.0);
    let d2: f64 = rng.gen_range(0.0..6.28);
    let alpha: f64 = rng.gen_range(0.5..2.0);
    let t0: f64 = rng.gen_range(-1.0..1.0);

    let lin = |c: f64, d: f64| {
        Box::new(Add(
            Box::new(Mul(Box::new(Const(c)), Box::new(Var))),
            Box::new(Const(d)),
        ))
    };
    let ast = match rng.gen_range(0..5) {
        0 => Mul(
            Box::new(Sin(lin(c1, d1))),
            Box::new(Add(Box::new(Const(alpha)), Box::new(Var))),
        ),
        1 => Add(
            Box::new(Cos(lin(c1, d1))),
            Box::new(Mul(Box::new(Sin(lin(c2, d2))), Box::new(Const(alpha)))),
        ),
        2 => Mul(
            Box::new(Exp(Box::new(Mul(Box::new(Const(0.3)), Box::new(Var))))),
            Box::new(Sin(lin(c1, d1))),
        ),
        3 => Div(
            Box::new(Sin(lin(c1, d1))),
            Box::new(Add(
                Box::new(PowInt(Box::new(Var), 2)),
                Box::new(Const(2.0 + alpha)),
            )),
        ),
        _ => Mul(
            Box::new(Sqrt(Box::new(Add(
                Box::new(Const(4.0)),
                Box::new(Sin(lin(c1, d1))),
            )))),
            Box::new(Cos(lin(c2, d2))),
        ),
    };
    (ast, t0)
}
