//! Cross-module invariants: independent-oracle checks (finite differences,
//! a reference expression evaluator, brute-force geometry) and property
//! tests over randomized inputs.

mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;

use common::{central_diff, random_expression, rng};
use strictio_core::catalog;
use strictio_core::curve::{frenet_frame, osculation_type, CurveFn, CurveModel, Interval};
use strictio_core::expr::{self, ExprAst};
use strictio_core::framefield::{integrate_frame, DataFn, InvariantData, InvariantJets};
use strictio_core::geom::{self, Mat4};
use strictio_core::hypersurface::{Frontality, TwoRuled};
use strictio_core::jets::Jet;
use strictio_core::singular::{criterion_values, eta_derivatives};
use strictio_core::striction::{adjacent_distance_oracle, second_striction, striction_surface};

// ---------------------------------------------------------------- jets

#[test]
fn jet_coefficients_match_finite_differences() {
    // fixed corpus of 20 random expressions; k-th jet coefficient vs the
    // k-th central difference at h = 1e-4, relative error ≤ 1e-5 for k ≤ 3
    let mut r = rng(0x1207);
    let mut corpus = Vec::new();
    while corpus.len() < 20 {
        let (ast, t0) = random_expression(&mut r);
        let Ok(jet) = ast.eval_jet(t0, 6) else {
            continue;
        };
        // keep draws whose derivative magnitudes carry the c^k scale, so the
        // relative comparison is meaningful in f64
        let scale_ok = (1..=3).all(|k| jet.deriv(k).abs() > 0.2 * 4.0f64.powi(k as i32));
        if scale_ok && jet.value().abs() < 50.0 {
            corpus.push((ast, t0, jet));
        }
    }
    for (ast, t0, jet) in corpus {
        let f = |t: f64| ast.eval_f64(t).unwrap();
        for k in 1..=3 {
            let fd = central_diff(&f, t0, k, 1e-4);
            let rel = (fd - jet.deriv(k)).abs() / jet.deriv(k).abs();
            assert!(
                rel <= 1e-5,
                "`{ast}` at t0={t0}, k={k}: jet {}, fd {fd}, rel {rel:.3e}",
                jet.deriv(k)
            );
        }
    }
}

proptest! {
    #[test]
    fn jets_are_exact_on_polynomials(
        coeffs in proptest::collection::vec(-3.0f64..3.0, 1..7),
        t0 in -2.0f64..2.0,
    ) {
        // n-jet of a degree-≤n polynomial reproduces every derivative
        let n = 6;
        let t = Jet::variable(t0, n).unwrap();
        let mut jet = Jet::constant(0.0, t0, n);
        for (i, &a) in coeffs.iter().enumerate() {
            jet = jet.add(&t.powi(i as i32).unwrap().scale(a));
        }
        for k in 0..=n {
            let mut expect = 0.0;
            for (i, &a) in coeffs.iter().enumerate() {
                if i >= k {
                    let falling: f64 = (i - k + 1..=i).map(|x| x as f64).product();
                    expect += a * falling * t0.powi((i - k) as i32);
                }
            }
            let got = jet.deriv(k);
            let tol = 1e-13 * expect.abs().max(1.0);
            prop_assert!((got - expect).abs() <= tol,
                "k={}: got {}, expect {}", k, got, expect);
        }
    }

    #[test]
    fn wedge_is_orthogonal_and_antisymmetric(
        u in proptest::array::uniform4(-3.0f64..3.0),
        v in proptest::array::uniform4(-3.0f64..3.0),
        w in proptest::array::uniform4(-3.0f64..3.0),
    ) {
        let z = geom::wedge3(u, v, w);
        let scale = geom::norm(u) * geom::norm(v) * geom::norm(w);
        prop_assert!(geom::dot(z, u).abs() <= 1e-12 * scale.max(1.0));
        prop_assert!(geom::dot(z, v).abs() <= 1e-12 * scale.max(1.0));
        prop_assert!(geom::dot(z, w).abs() <= 1e-12 * scale.max(1.0));
        let zs = geom::wedge3(v, u, w);
        for i in 0..4 {
            prop_assert!((z[i] + zs[i]).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}

// ---------------------------------------------------------------- expr

/// Reference evaluator: a direct recursive-descent evaluation of the source,
/// independent of the library's parser and AST.
mod reference_eval {
    pub fn eval(src: &str, t: f64) -> Result<f64, String> {
        let chars: Vec<char> = src.chars().collect();
        let mut pos = 0;
        let v = sum(&chars, &mut pos, t)?;
        if pos != chars.len() {
            return Err(format!("trailing input at {pos}"));
        }
        Ok(v)
    }

    fn skip_ws(c: &[char], p: &mut usize) {
        while *p < c.len() && c[*p].is_whitespace() {
            *p += 1;
        }
    }

    fn sum(c: &[char], p: &mut usize, t: f64) -> Result<f64, String> {
        let mut acc = term(c, p, t)?;
        loop {
            skip_ws(c, p);
            match c.get(*p) {
                Some('+') => {
                    *p += 1;
                    acc += term(c, p, t)?;
                }
                Some('-') => {
                    *p += 1;
                    acc -= term(c, p, t)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(c: &[char], p: &mut usize, t: f64) -> Result<f64, String> {
        let mut acc = unary(c, p, t)?;
        loop {
            skip_ws(c, p);
            match c.get(*p) {
                Some('*') => {
                    *p += 1;
                    acc *= unary(c, p, t)?;
                }
                Some('/') => {
                    *p += 1;
                    let d = unary(c, p, t)?;
                    if d == 0.0 {
                        return Err("division by zero".into());
                    }
                    acc /= d;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(c: &[char], p: &mut usize, t: f64) -> Result<f64, String> {
        skip_ws(c, p);
        if c.get(*p) == Some(&'-') {
            *p += 1;
            Ok(-unary(c, p, t)?)
        } else {
            power(c, p, t)
        }
    }

    fn power(c: &[char], p: &mut usize, t: f64) -> Result<f64, String> {
        let mut base = atom(c, p, t)?;
        loop {
            skip_ws(c, p);
            if c.get(*p) == Some(&'^') {
                *p += 1;
                skip_ws(c, p);
                let neg = if c.get(*p) == Some(&'-') {
                    *p += 1;
                    true
                } else {
                    false
                };
                let start = *p;
                while *p < c.len() && c[*p].is_ascii_digit() {
                    *p += 1;
                }
                let digits: String = c[start..*p].iter().collect();
                let e: i32 = digits.parse().map_err(|_| "bad exponent".to_string())?;
                let e = if neg { -e } else { e };
                if e < 0 && base == 0.0 {
                    return Err("pole".into());
                }
                base = base.powi(e);
            } else {
                return Ok(base);
            }
        }
    }

    fn atom(c: &[char], p: &mut usize, t: f64) -> Result<f64, String> {
        skip_ws(c, p);
        match c.get(*p) {
            Some('(') => {
                *p += 1;
                let v = sum(c, p, t)?;
                skip_ws(c, p);
                if c.get(*p) != Some(&')') {
                    return Err("expected )".into());
                }
                *p += 1;
                Ok(v)
            }
            Some(ch) if ch.is_ascii_digit() || *ch == '.' => {
                let start = *p;
                while *p < c.len() && (c[*p].is_ascii_digit() || c[*p] == '.') {
                    *p += 1;
                }
                if c.get(*p) == Some(&'e') || c.get(*p) == Some(&'E') {
                    let save = *p;
                    *p += 1;
                    if matches!(c.get(*p), Some('+') | Some('-')) {
                        *p += 1;
                    }
                    if c.get(*p).map(|d| d.is_ascii_digit()).unwrap_or(false) {
                        while *p < c.len() && c[*p].is_ascii_digit() {
                            *p += 1;
                        }
                    } else {
                        *p = save;
                    }
                }
                let text: String = c[start..*p].iter().collect();
                text.parse().map_err(|_| format!("bad number `{text}`"))
            }
            Some(ch) if ch.is_ascii_alphabetic() => {
                let start = *p;
                while *p < c.len() && (c[*p].is_ascii_alphanumeric() || c[*p] == '_') {
                    *p += 1;
                }
                let name: String = c[start..*p].iter().collect();
                match name.as_str() {
                    "t" => Ok(t),
                    "pi" => Ok(std::f64::consts::PI),
                    "sin" | "cos" | "sqrt" | "exp" => {
                        skip_ws(c, p);
                        if c.get(*p) != Some(&'(') {
                            return Err("expected (".into());
                        }
                        *p += 1;
                        let v = sum(c, p, t)?;
                        skip_ws(c, p);
                        if c.get(*p) != Some(&')') {
                            return Err("expected )".into());
                        }
                        *p += 1;
                        match name.as_str() {
                            "sin" => Ok(v.sin()),
                            "cos" => Ok(v.cos()),
                            "exp" => Ok(v.exp()),
                            _ => {
                                if v <= 0.0 {
                                    Err("sqrt of nonpositive".into())
                                } else {
                                    Ok(v.sqrt())
                                }
                            }
                        }
                    }
                    other => Err(format!("unknown identifier {other}")),
                }
            }
            other => Err(format!("unexpected {other:?}")),
        }
    }
}

fn random_source(r: &mut rand_chacha::ChaCha8Rng, depth: usize) -> String {
    if depth == 0 {
        return match r.gen_range(0..4) {
            0 => format!("{}", r.gen_range(0..20)),
            1 => format!("{:.3}", r.gen_range(0.1..9.0)),
            2 => "t".to_string(),
            _ => "pi".to_string(),
        };
    }
    let a = random_source(r, depth - 1);
    let b = random_source(r, depth - 1);
    match r.gen_range(0..9) {
        0 => format!("{a}+{b}"),
        1 => format!("{a}-{b}"),
        2 => format!("{a}*{b}"),
        3 => format!("({a})/({b}+20)"),
        4 => format!("-({a})"),
        5 => format!("({a})^{}", r.gen_range(0..4)),
        6 => format!("sin({a})"),
        7 => format!("cos({a})"),
        _ => format!("({a})"),
    }
}

#[test]
fn parser_agrees_with_reference_evaluator_on_fuzzed_sources() {
    let mut r = rng(0x5eed);
    let mut checked = 0;
    while checked < 1000 {
        let src = random_source(&mut r, 4);
        let t: f64 = r.gen_range(-2.0..2.0);
        let ours = expr::parse(&src)
            .unwrap_or_else(|e| panic!("`{src}` failed to parse: {e}"))
            .eval_f64(t);
        let reference = reference_eval::eval(&src, t);
        match (ours, reference) {
            (Ok(a), Ok(b)) => {
                let tol = 1e-12 * a.abs().max(1.0);
                assert!(
                    (a - b).abs() <= tol || (a.is_nan() && b.is_nan()),
                    "`{src}` at t={t}: ours {a}, reference {b}"
                );
                checked += 1;
            }
            (Err(_), Err(_)) => checked += 1, // both reject (pole etc.)
            (a, b) => panic!("`{src}` at t={t}: disagreement ours {a:?}, reference {b:?}"),
        }
    }
}

fn arb_ast() -> impl Strategy<Value = ExprAst> {
    let leaf = prop_oneof![
        (0.0f64..10.0).prop_map(ExprAst::Const),
        Just(ExprAst::Var),
        Just(ExprAst::Pi),
    ];
    leaf.prop_recursive(4, 48, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprAst::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprAst::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprAst::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprAst::Div(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| ExprAst::Neg(Box::new(a))),
            (inner.clone(), -4i32..5)
                .prop_map(|(a, e)| ExprAst::PowInt(Box::new(a), e)),
            inner.clone().prop_map(|a| ExprAst::Sin(Box::new(a))),
            inner.clone().prop_map(|a| ExprAst::Cos(Box::new(a))),
            inner.clone().prop_map(|a| ExprAst::Sqrt(Box::new(a))),
            inner.prop_map(|a| ExprAst::Exp(Box::new(a))),
        ]
    })
}

proptest! {
    #[test]
    fn printing_roundtrips_the_ast(ast in arb_ast()) {
        let printed = ast.to_string();
        let reparsed = expr::parse(&printed)
            .unwrap_or_else(|e| panic!("`{printed}` failed to reparse: {e}"));
        prop_assert_eq!(reparsed, ast);
    }
}

// ---------------------------------------------------------------- curve

#[test]
fn frenet_serret_residual_on_catalog_curves() {
    // assemble the coefficient matrix K and check ‖E' − K·E‖ ≤ 1e-8 at 50
    // sample points per curve, all derivatives via jets
    for curve in [catalog::helix4(), catalog::moment_curve()] {
        let dom = Interval::new(curve.domain.lo * 0.9, curve.domain.hi * 0.9);
        for &t in dom.linspace(50).iter() {
            let fr = frenet_frame(&curve, t, 1).unwrap();
            let (k1, k4, k6) = (fr.kappa1.value(), fr.kappa4.value(), fr.kappa6.value());
            let e = [&fr.e1, &fr.e2, &fr.e3, &fr.e4];
            let k = [
                [0.0, k1, 0.0, 0.0],
                [-k1, 0.0, k4, 0.0],
                [0.0, -k4, 0.0, k6],
                [0.0, 0.0, -k6, 0.0],
            ];
            let mut resid: f64 = 0.0;
            for i in 0..4 {
                let mut want = [0.0; 4];
                for j in 0..4 {
                    want = geom::add(want, geom::scale(e[j].value(), k[i][j]));
                }
                resid = resid.max(geom::norm(geom::sub(e[i].deriv(1), want)));
            }
            assert!(resid <= 1e-8, "t={t}: residual {resid:.3e}");
        }
    }
}

#[test]
fn kappa6_sign_consistency() {
    // e3' = −κ₄e2 + κ₆e4: the e2-component must be −κ₄ exactly
    for curve in [catalog::helix4(), catalog::moment_curve()] {
        for &t in &[-1.0, -0.3, 0.2, 0.9] {
            let fr = frenet_frame(&curve, t, 1).unwrap();
            let e3p = fr.e3.deriv(1);
            let along_e2 = geom::dot(e3p, fr.e2.value());
            assert!(
                (along_e2 + fr.kappa4.value()).abs() <= 1e-9,
                "t={t}: <e3',e2> = {along_e2}, kappa4 = {}",
                fr.kappa4.value()
            );
        }
    }
}

#[test]
fn osculation_type_is_reparametrization_invariant() {
    // labels agree at corresponding points under t → t³ + t
    let pairs = [
        (
            ["t", "t^2", "t^3", "t^4"],
            ["t^3+t", "(t^3+t)^2", "(t^3+t)^3", "(t^3+t)^4"],
        ),
        (
            ["t", "t^2", "t^3", "0"],
            ["t^3+t", "(t^3+t)^2", "(t^3+t)^3", "0"],
        ),
    ];
    for (orig, reparam) in pairs {
        let c1 = CurveModel::parse(orig, Interval::new(-1.0, 1.0)).unwrap();
        let c2 = CurveModel::parse(reparam, Interval::new(-1.0, 1.0)).unwrap();
        for &t in &[-0.6, 0.0, 0.5] {
            // c2 at parameter t sits at c1's parameter t³+t
            let l1 = osculation_type(&c1, t * t * t + t, 8).unwrap();
            let l2 = osculation_type(&c2, t, 8).unwrap();
            assert_eq!(l1, l2, "labels differ at t={t}");
        }
    }
}

// ---------------------------------------------------------------- framefield

#[test]
fn round_trip_on_random_smooth_data() {
    // extract ∘ integrate reproduces 10 random smooth inputs ≤ 1e-6
    let mut r = rng(0xf00d);
    for run in 0..10 {
        let coef = |r: &mut rand_chacha::ChaCha8Rng| -> String {
            format!(
                "{:.4}+{:.4}*sin({:.4}*t+{:.4})",
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(0.5..2.0),
                r.gen_range(0.0..3.0)
            )
        };
        let fields: Vec<String> = (0..6).map(|_| coef(&mut r)).collect();
        let data = InvariantData::parse(
            &fields[0],
            &fields[1],
            [&fields[2], &fields[3], &fields[4], &fields[5]],
            Interval::new(0.0, 1.0),
        )
        .unwrap();
        let dfn = data.to_fn();
        let grid: Vec<f64> = (0..=100).map(|i| 0.01 * i as f64).collect();
        let field = integrate_frame(&dfn, 0.0, Mat4::IDENTITY, &grid, Default::default()).unwrap();
        let n = field.nodes().len();
        let mut worst: f64 = 0.0;
        for i in (4..n - 4).step_by(53) {
            let got = field.extract_invariants_fd(i).unwrap();
            let want = data.jets(got.t, 0).unwrap();
            worst = worst
                .max((got.a - want.a.value()).abs())
                .max((got.delta - want.delta.value()).abs());
            for j in 0..4 {
                worst = worst.max((got.b[j] - want.b[j].value()).abs());
            }
        }
        assert!(worst <= 1e-6, "run {run}: worst residual {worst:.3e}");
    }
}

// ---------------------------------------------------------------- hypersurface

fn prepared_fixture() -> TwoRuled {
    let data = InvariantData::parse(
        "0.4*sin(t)",
        "1",
        ["1", "0.3", "0.2*t", "0"],
        Interval::new(0.0, 1.0),
    )
    .unwrap();
    TwoRuled::from_invariants(&data, Default::default()).unwrap()
}

#[test]
fn partials_match_finite_differences_of_evaluate() {
    let f = prepared_fixture();
    let mut r = rng(0xabc);
    for _ in 0..25 {
        let t = r.gen_range(0.1..0.9);
        let s = r.gen_range(-1.0..1.0);
        let rr = r.gen_range(-1.0..1.0);
        let p = f.partials(t, s, rr).unwrap();
        let h = 1e-5;
        let ft_fd = geom::scale(
            geom::sub(
                f.evaluate(t + h, s, rr).unwrap(),
                f.evaluate(t - h, s, rr).unwrap(),
            ),
            1.0 / (2.0 * h),
        );
        for i in 0..4 {
            let err = (p.f_t[i] - ft_fd[i]).abs();
            assert!(err <= 1e-6 * (1.0 + p.f_t[i].abs()), "f_t err {err:.3e}");
        }
    }
}

#[test]
fn frontal_normal_annihilates_the_differential() {
    let f = prepared_fixture();
    let grid: Vec<f64> = (0..=20).map(|i| 0.05 * i as f64).collect();
    match f.is_frontal(&grid, 1e-9).unwrap() {
        Frontality::Frontal { .. } => {}
        other => panic!("fixture should be frontal, got {other:?}"),
    }
    let mut r = rng(0xdef);
    for _ in 0..100 {
        let t = r.gen_range(0.05..0.95);
        let s = r.gen_range(-2.0..2.0);
        let rr = r.gen_range(-2.0..2.0);
        let nu = f.normal_direction(t).unwrap();
        let p = f.partials(t, s, rr).unwrap();
        for v in [p.f_t, p.f_s, p.f_r] {
            assert!(geom::dot(v, nu).abs() <= 1e-8 * (1.0 + geom::norm(v)));
        }
    }
}

#[test]
fn family_label_invariant_under_swap_and_reparametrization() {
    // swapping (X, Y) and regular reparametrization keep the label
    let x = CurveFn::parse(["cos(t)", "sin(t)", "0", "0"]).unwrap();
    let y = CurveFn::constant(geom::E3);
    let gamma = CurveFn::constant([0.0; 4]);
    let grid: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
    let f = TwoRuled::from_curves(gamma.clone(), x.clone(), y.clone(), Interval::new(0.0, 1.0));
    let swapped = TwoRuled::from_curves(gamma.clone(), y, x, Interval::new(0.0, 1.0));
    let label = f.classify_family(&grid).unwrap().label;
    assert_eq!(label, swapped.classify_family(&grid).unwrap().label);

    // t → t³ + t on a sub-window
    let xr = CurveFn::parse(["cos(t^3+t)", "sin(t^3+t)", "0", "0"]).unwrap();
    let reparam = TwoRuled::from_curves(
        CurveFn::constant([0.0; 4]),
        xr,
        CurveFn::constant(geom::E3),
        Interval::new(0.0, 0.7),
    );
    let grid2: Vec<f64> = (0..=10).map(|i| 0.07 * i as f64).collect();
    assert_eq!(label, reparam.classify_family(&grid2).unwrap().label);
}

// ---------------------------------------------------------------- striction

#[test]
fn striction_surface_sections_are_striction_curves() {
    // 20 random smooth sections k(t): the curve γ̃ + k(t)X̃ kills ⟨·,X'⟩
    let f = prepared_fixture();
    let ss = striction_surface(&f).unwrap();
    let mut r = rng(0xca11);
    for _ in 0..20 {
        let (a0, a1, w): (f64, f64, f64) = (
            r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
            r.gen_range(0.5..2.0),
        );
        for &t in &[0.15, 0.45, 0.85] {
            let k = a0 + a1 * (w * t).sin();
            let kp = a1 * w * (w * t).cos();
            let bj = ss.base.jet(t, 1).unwrap();
            let dj = ss.director.jet(t, 1).unwrap();
            // (γ̃ + kX̃)' = γ̃' + k'X̃ + kX̃'
            let sec = geom::add(
                bj.deriv(1),
                geom::add(geom::scale(dj.value(), kp), geom::scale(dj.deriv(1), k)),
            );
            let xp = f.x.jet(t, 1).unwrap().deriv(1);
            let resid = geom::dot(sec, xp);
            assert!(resid.abs() <= 1e-7, "residual {resid:.3e}");
        }
    }
}

#[test]
fn adjacent_ruling_oracle_has_first_order_convergence() {
    // the minimizer's plane line tends to s + a·r + b₃ = 0 with slope ≥ 0.9
    let f = prepared_fixture();
    let t0 = 0.37;
    let d = f.invariants(t0, 0).unwrap();
    let (a, b3) = (d.a.value(), d.b[2].value());
    let mut pts = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3f64] {
        let m = adjacent_distance_oracle(&f, t0, eps.max(1e-4)).unwrap();
        let resid = (m.s2 + a * m.r2 + b3).abs();
        pts.push((eps.ln(), resid.ln()));
    }
    let slope = fit_slope(&pts);
    assert!(slope >= 0.9, "slope {slope}");
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn second_striction_image_equals_second_singular_set_image() {
    let data = InvariantData::parse("t", "1", ["1", "0.2", "0.1", "0"], Interval::new(0.5, 1.5))
        .unwrap();
    let f = TwoRuled::from_invariants(&data, Default::default()).unwrap();
    let s2 = second_striction(&f).unwrap();
    let sets =
        strictio_core::singular::singular_sets(f.data.as_ref().unwrap(), &[0.7, 1.0, 1.3], 1e-9)
            .unwrap();
    for (t, s, rr) in sets.second {
        let via_surface = f.evaluate(t, s, rr).unwrap();
        let via_curve = s2.evaluate(t).unwrap();
        let d = geom::norm(geom::sub(via_surface, via_curve));
        assert!(d <= 1e-7, "t={t}: distance {d:.3e}");
    }
}

// ---------------------------------------------------------------- singular

#[test]
fn criteria_closed_forms_match_eta_derivatives_at_random_singular_points() {
    // 200 random polynomial data sets; on the singular set the closed forms
    // agree with the jet route: ηλ in sign and value, q₁ = a'·ηηλ and
    // q₂ = a'·ηηηλ on the swallowtail locus
    let mut r = rng(0xc0de);
    let mut checked = 0;
    let mut q1_mismatches = 0;
    while checked < 200 {
        let poly = |r: &mut rand_chacha::ChaCha8Rng| -> String {
            format!(
                "{:.3}+{:.3}*t+{:.3}*t^2+{:.3}*t^3",
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0)
            )
        };
        let fields: Vec<String> = (0..5).map(|_| poly(&mut r)).collect();
        let data = InvariantData::parse(
            &fields[0],
            "1",
            [&fields[1], &fields[2], &fields[3], "0"],
            Interval::new(-1.0, 1.0),
        )
        .unwrap()
        .to_fn();
        let t = r.gen_range(-0.9..0.9);
        let rr = r.gen_range(-2.0..2.0);
        let d: InvariantJets = data.jets(t, 4).unwrap();
        let s = -d.b[2].value() - rr * d.a.value(); // singular point
        let etas = eta_derivatives(&data, t, s, rr, 4).unwrap();
        let cv = criterion_values(&d, rr).unwrap();
        assert!(
            (etas[0] - cv.eta_lambda).abs() <= 1e-9 * (1.0 + cv.eta_lambda.abs()),
            "eta-lambda mismatch: {} vs {}",
            etas[0],
            cv.eta_lambda
        );
        assert_eq!(etas[0].signum(), cv.eta_lambda.signum());

        if cv.a_prime.abs() > 0.05 {
            let lr = cv.locus_r.unwrap();
            if lr.abs() < 10.0 {
                let s_on = -d.b[2].value() - lr * d.a.value();
                let etas_on = eta_derivatives(&data, t, s_on, lr, 4).unwrap();
                let cv_on = criterion_values(&d, lr).unwrap();
                let scale = 1.0 + cv_on.q1.abs();
                if (cv_on.q1 - cv_on.a_prime * etas_on[1]).abs() > 1e-8 * scale {
                    q1_mismatches += 1;
                }
                let scale2 = 1.0 + cv_on.q2.abs();
                assert!(
                    (cv_on.q2 - cv_on.a_prime * etas_on[2]).abs() <= 1e-8 * scale2,
                    "q2 mismatch"
                );
            }
        }
        checked += 1;
    }
    assert_eq!(q1_mismatches, 0, "q1-vs-etaeta mismatch rate must be 0");
}

#[test]
fn second_singular_set_matches_striction_curve_through_the_surface() {
    // f(S₂(f)) lands on the second striction curve
    let f = prepared_fixture();
    let s2 = second_striction(&f).unwrap();
    for &t in &[0.2, 0.5, 0.8] {
        let rr = s2.chart_r(t).unwrap();
        let d = f.invariants(t, 0).unwrap();
        let s = -d.b[2].value() - d.a.value() * rr;
        let on_surface = f.evaluate(t, s, rr).unwrap();
        let on_curve = s2.evaluate(t).unwrap();
        let dist = geom::norm(geom::sub(on_surface, on_curve));
        assert!(dist <= 1e-7, "t={t}: {dist:.3e}");
    }
}

// ---------------------------------------------------------------- heights

#[test]
fn envelope_property_on_catalog_curve() {
    use strictio_core::heights::{build_si, SiIndex};
    let c = CurveModel::parse(
        ["cos(t)", "sin(t)", "cos(2*t)", "sin(2*t)"],
        Interval::new(-0.5, 0.5),
    )
    .unwrap();
    let mut r = rng(0x4e1);
    for index in SiIndex::all() {
        let si = build_si(&c, index, 17).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let t = r.gen_range(-0.45..0.45);
            let s = r.gen_range(-2.0..2.0);
            let rr = r.gen_range(-2.0..2.0);
            let (h, hp) = si.envelope_residual(t, s, rr).unwrap();
            worst = worst.max(h.abs()).max(hp.abs());
        }
        assert!(worst <= 1e-8, "{}: worst residual {worst:.3e}", index.name());
    }
}

// keep the compiler aware that the shared Arc import is exercised
#[allow(dead_code)]
fn _types(_: Arc<DataFn>) {}
