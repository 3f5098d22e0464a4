//! Property tests for the exterior engine: algebraic identities of wedge,
//! exterior derivative, pullback, and evaluation — checked against
//! independent brute-force oracles where one exists.

use proptest::prelude::*;

use leafwise::exterior::{
    Chart, ChartMap, DifferentialForm, Domain, Field, IndexSet, ScalarField, TangentVector,
};

const DIM: usize = 4;

fn chart() -> Chart {
    Chart::new("prop4", &["t", "x", "y", "z"], Domain::All).unwrap()
}

/// Random low-degree polynomial in the chart coordinates.
fn poly_field(chart: &Chart, coeffs: &[(f64, [u8; DIM])]) -> ScalarField {
    let mut acc = Field::zero();
    for (c, exps) in coeffs {
        let mut term = Field::constant(*c);
        for (i, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                term = term.mul(&Field::coord(i));
            }
        }
        acc = acc.add(&term);
    }
    ScalarField::new(chart.clone(), acc)
}

fn arb_poly() -> impl Strategy<Value = Vec<(f64, [u8; DIM])>> {
    prop::collection::vec(
        (
            -2.0f64..2.0,
            prop::array::uniform4(0u8..3u8),
        ),
        1..4,
    )
}

type FormSpec = Vec<(u8, Vec<(f64, [u8; DIM])>)>;

fn arb_form(degree: usize) -> impl Strategy<Value = FormSpec> {
    let indices: Vec<u8> = (0u8..16)
        .filter(|m| m.count_ones() as usize == degree)
        .collect();
    prop::collection::vec(
        (prop::sample::select(indices), arb_poly()),
        1..4,
    )
}

fn build_form(chart: &Chart, degree: usize, spec: &FormSpec) -> DifferentialForm {
    let mut form = DifferentialForm::zero(chart, degree);
    for (mask, coeffs) in spec {
        form.accumulate(IndexSet(*mask), poly_field(chart, coeffs));
    }
    form
}

fn arb_point() -> impl Strategy<Value = [f64; DIM]> {
    prop::array::uniform4(-1.5f64..1.5)
}

/// Independent shuffle-sum oracle for (a∧b)(v₁,…,v_{k+l}).
fn wedge_eval_bruteforce(
    a: &DifferentialForm,
    b: &DifferentialForm,
    vectors: &[TangentVector],
) -> f64 {
    let k = a.degree();
    let l = b.degree();
    assert_eq!(vectors.len(), k + l);
    let n = k + l;
    let mut total = 0.0;
    // iterate over k-subsets of {0..n} as bitmasks
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let left: Vec<TangentVector> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| vectors[i].clone())
            .collect();
        let right: Vec<TangentVector> = (0..n)
            .filter(|i| mask & (1 << i) == 0)
            .map(|i| vectors[i].clone())
            .collect();
        // shuffle sign: inversions between the two ordered blocks
        let mut inv = 0u32;
        for i in 0..n {
            if mask & (1 << i) == 0 {
                inv += (mask >> (i + 1)).count_ones();
            }
        }
        let sign = if inv.is_multiple_of(2) { 1.0 } else { -1.0 };
        let va = if k == 0 { 1.0 } else { a.evaluate(&left).unwrap() };
        let vb = if l == 0 { 1.0 } else { b.evaluate(&right).unwrap() };
        total += sign * va * vb;
    }
    total
}

fn coordinate_vectors(chart: &Chart, p: &[f64]) -> Vec<TangentVector> {
    (0..DIM)
        .map(|i| TangentVector::coordinate(chart, p, i).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_matches_the_shuffle_oracle(
        sa in arb_form(1),
        sb in arb_form(2),
        p in arb_point(),
        comps in prop::array::uniform3(prop::array::uniform4(-1.0f64..1.0)),
    ) {
        let c = chart();
        let a = build_form(&c, 1, &sa);
        let b = build_form(&c, 2, &sb);
        let w = a.wedge(&b).unwrap();
        let vectors: Vec<TangentVector> = comps
            .iter()
            .map(|v| TangentVector::new(&c, &p, v).unwrap())
            .collect();
        let direct = w.evaluate(&vectors).unwrap();
        let oracle = wedge_eval_bruteforce(&a, &b, &vectors);
        prop_assert!((direct - oracle).abs() < 1e-10 * (1.0 + oracle.abs()));
    }

    #[test]
    fn wedge_anticommutes_with_degree_sign(
        sa in arb_form(1),
        sb in arb_form(1),
        p in arb_point(),
    ) {
        let c = chart();
        let a = build_form(&c, 1, &sa);
        let b = build_form(&c, 1, &sb);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        // odd·odd: a∧b = −b∧a
        let pts = vec![p.to_vec()];
        prop_assert!(ab.max_coeff_diff(&ba.scale(-1.0), &pts).unwrap() < 1e-12);
    }

    #[test]
    fn even_degree_commutes(
        sa in arb_form(2),
        sb in arb_form(2),
        p in arb_point(),
    ) {
        let c = chart();
        let a = build_form(&c, 2, &sa);
        let b = build_form(&c, 2, &sb);
        let pts = vec![p.to_vec()];
        prop_assert!(
            a.wedge(&b).unwrap().max_coeff_diff(&b.wedge(&a).unwrap(), &pts).unwrap() < 1e-12
        );
    }

    #[test]
    fn wedge_is_associative(
        sa in arb_form(1),
        sb in arb_form(1),
        sc in arb_form(1),
        p in arb_point(),
    ) {
        let c = chart();
        let a = build_form(&c, 1, &sa);
        let b = build_form(&c, 1, &sb);
        let d = build_form(&c, 1, &sc);
        let left = a.wedge(&b).unwrap().wedge(&d).unwrap();
        let right = a.wedge(&b.wedge(&d).unwrap()).unwrap();
        let pts = vec![p.to_vec()];
        prop_assert!(left.max_coeff_diff(&right, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn d_squared_vanishes(sa in arb_form(1), p in arb_point()) {
        let c = chart();
        let a = build_form(&c, 1, &sa);
        let dda = a.exterior_derivative().unwrap().exterior_derivative().unwrap();
        let vs = coordinate_vectors(&c, &p);
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                for k in (j + 1)..DIM {
                    let v = dda
                        .evaluate(&[vs[i].clone(), vs[j].clone(), vs[k].clone()])
                        .unwrap();
                    prop_assert!(v.abs() < 1e-8, "dd != 0: {v}");
                }
            }
        }
    }

    #[test]
    fn evaluation_is_alternating(
        sa in arb_form(2),
        p in arb_point(),
        u in prop::array::uniform4(-1.0f64..1.0),
        v in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let c = chart();
        let a = build_form(&c, 2, &sa);
        let tu = TangentVector::new(&c, &p, &u).unwrap();
        let tv = TangentVector::new(&c, &p, &v).unwrap();
        let uv = a.evaluate(&[tu.clone(), tv.clone()]).unwrap();
        let vu = a.evaluate(&[tv, tu.clone()]).unwrap();
        prop_assert!((uv + vu).abs() < 1e-11 * (1.0 + uv.abs()));
        let uu = a.evaluate(&[tu.clone(), tu]).unwrap();
        prop_assert!(uu.abs() < 1e-11);
    }

    #[test]
    fn pullback_is_functorial_and_natural(
        sa in arb_form(1),
        shift in prop::array::uniform4(-1.0f64..1.0),
        p in arb_point(),
    ) {
        let c = chart();
        let a = build_form(&c, 1, &sa);
        // φ: nonlinear shear, ψ: translation
        let comps = vec![
            ScalarField::new(c.clone(), Field::coord(0).add(&Field::coord(1).powi(2))),
            ScalarField::coord(&c, 1),
            ScalarField::new(c.clone(), Field::coord(2).mul(&Field::coord(0).sin().add(&Field::constant(2.0)))),
            ScalarField::coord(&c, 3),
        ];
        let phi = ChartMap::new(&c, &c, comps).unwrap();
        let psi = ChartMap::translation(&c, &shift).unwrap();
        let composite = phi.then(&psi).unwrap();
        let pts = vec![p.to_vec()];

        let via_composite = DifferentialForm::pullback(&composite, &a).unwrap();
        let via_steps =
            DifferentialForm::pullback(&phi, &DifferentialForm::pullback(&psi, &a).unwrap())
                .unwrap();
        prop_assert!(via_composite.max_coeff_diff(&via_steps, &pts).unwrap() < 1e-8);

        let d_then_pull = DifferentialForm::pullback(&phi, &a.exterior_derivative().unwrap()).unwrap();
        let pull_then_d = DifferentialForm::pullback(&phi, &a).unwrap().exterior_derivative().unwrap();
        prop_assert!(d_then_pull.max_coeff_diff(&pull_then_d, &pts).unwrap() < 1e-8);
    }

    #[test]
    fn dual_derivatives_match_central_differences(
        coeffs in arb_poly(),
        p in arb_point(),
    ) {
        let c = chart();
        // wrap the polynomial in transcendentals to exercise chain rules
        let base = poly_field(&c, &coeffs);
        let f = ScalarField::new(
            c.clone(),
            base.field().sin().add(&base.field().scale(0.1).exp()),
        );
        for i in 0..DIM {
            let (_, exact) = f.eval_with_partial(&p, i);
            let h = 1e-5;
            let mut hi = p;
            let mut lo = p;
            hi[i] += h;
            lo[i] -= h;
            let approx = (f.eval(&hi) - f.eval(&lo)) / (2.0 * h);
            prop_assert!(
                (exact - approx).abs() <= 1e-6 * exact.abs().max(1.0),
                "partial {i}: {exact} vs {approx}"
            );
        }
    }
}
