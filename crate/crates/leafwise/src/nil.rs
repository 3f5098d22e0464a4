//! Heisenberg nil-manifold models Nil³(c₁) and the Kodaira–Thurston chart.
//!
//! A nil-manifold is presented on its universal cover ℝ³ ∋ (x, y, z) with
//! deck data: γ₂ and γ₃ are pure 2π-translations of y and z, while γ₁
//! translates x by 2π and shears z. The connection form is
//!
//! ```text
//!     ζ = dz + a·x·dy,   a = −c₁ / 2π,   dζ = a dx∧dy.
//! ```
//!
//! Invariance of ζ under γ₁ forces the shear: pulling back under
//! (x, y, z) ↦ (x + 2π, y, z + s(y)) gives ζ + (s′(y) + 2π a) dy, so
//! s(y) = −2π a y = c₁ y is the unique choice. That shear also reproduces
//! the lattice relation [γ₁, γ₂] = γ₃^{c₁}.

use crate::error::{Error, Result};
use crate::exterior::{
    Chart, ChartMap, DifferentialForm, Domain, Field, IndexSet, ScalarField, TangentVector,
};
use crate::report::VerificationReport;

/// Connection-form normalization for Euler class `c1`: dζ = a dx∧dy.
pub fn connection_constant(c1: i64) -> f64 {
    -(c1 as f64) / (2.0 * std::f64::consts::PI)
}

/// Nil³(c₁) on its universal cover, with the three deck generators.
#[derive(Debug, Clone)]
pub struct NilChart {
    c1: i64,
    chart: Chart,
    deck: Vec<ChartMap>,
}

/// Builds ζ = dz + a·x·dy on any chart that contains (x, y, z) coordinates
/// at the given indices. Shared by the 3-dimensional nil charts and the
/// 4-dimensional cylinder charts.
pub(crate) fn zeta_on(chart: &Chart, x: usize, y: usize, z: usize, c1: i64) -> DifferentialForm {
    let a = connection_constant(c1);
    let mut zeta = DifferentialForm::zero(chart, 1);
    zeta.set_coefficient(
        IndexSet::from_indices(&[z]).expect("z index"),
        ScalarField::constant(chart, 1.0),
    );
    zeta.set_coefficient(
        IndexSet::from_indices(&[y]).expect("y index"),
        ScalarField::new(chart.clone(), Field::coord(x).scale(a)),
    );
    zeta
}

/// Deck generators on a chart containing (x, y, z) at the given indices:
/// γ₁ = x-translation with the c₁-shear of z, γ₂ and γ₃ pure translations.
pub(crate) fn deck_maps_on(chart: &Chart, x: usize, y: usize, z: usize, c1: i64) -> Vec<ChartMap> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut comps1: Vec<ScalarField> = (0..chart.dim()).map(|i| ScalarField::coord(chart, i)).collect();
    comps1[x] = ScalarField::new(chart.clone(), Field::coord(x).add(&Field::constant(two_pi)));
    comps1[z] = ScalarField::new(
        chart.clone(),
        Field::coord(z).add(&Field::coord(y).scale(c1 as f64)),
    );
    let gamma1 = ChartMap::new(chart, chart, comps1).expect("deck map");

    let mut off2 = vec![0.0; chart.dim()];
    off2[y] = two_pi;
    let gamma2 = ChartMap::translation(chart, &off2).expect("deck map");

    let mut off3 = vec![0.0; chart.dim()];
    off3[z] = two_pi;
    let gamma3 = ChartMap::translation(chart, &off3).expect("deck map");

    vec![gamma1, gamma2, gamma3]
}

impl NilChart {
    pub fn new(c1: i64) -> Result<NilChart> {
        if c1 == 0 {
            // still constructible: dζ = 0, the degenerate torus bundle;
            // contact_check is expected to fail on it
        }
        let chart = Chart::new(&format!("nil_c{c1}"), &["x", "y", "z"], Domain::All)?;
        let deck = deck_maps_on(&chart, 0, 1, 2, c1);
        Ok(NilChart { c1, chart, deck })
    }

    pub fn c1(&self) -> i64 {
        self.c1
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn deck(&self) -> &[ChartMap] {
        &self.deck
    }

    /// ζ = dz + (−c₁/2π)·x·dy, invariant under all three deck maps.
    pub fn connection_form(&self) -> DifferentialForm {
        zeta_on(&self.chart, 0, 1, 2, self.c1)
    }

    /// ζ∧dζ on (∂x, ∂y, ∂z) must be a nonzero constant of fixed sign.
    pub fn contact_check(&self, samples: usize, seed: u64) -> Result<VerificationReport> {
        let zeta = self.connection_form();
        let volume = zeta.wedge(&zeta.exterior_derivative()?)?;
        let expected = connection_constant(self.c1);
        let mut rng = crate::suite::sample_rng(seed, "nil.contact");
        let mut min_abs = f64::INFINITY;
        let mut max_dev: f64 = 0.0;
        let mut sign_ok = true;
        for _ in 0..samples {
            let p = crate::suite::uniform_point(&mut rng, 3, 2.0 * std::f64::consts::PI);
            let frame = [
                TangentVector::coordinate(&self.chart, &p, 0)?,
                TangentVector::coordinate(&self.chart, &p, 1)?,
                TangentVector::coordinate(&self.chart, &p, 2)?,
            ];
            let v = volume.evaluate(&frame)?;
            min_abs = min_abs.min(v.abs());
            max_dev = max_dev.max((v - expected).abs());
            if v == 0.0 || v.signum() != expected.signum() {
                sign_ok = false;
            }
        }
        let mut report = VerificationReport::new(
            &format!("nil.contact.c{}", self.c1),
            "zeta^dzeta on (dx,dy,dz) is the nonzero constant -c1/2pi",
            samples,
            max_dev,
            1e-10,
        );
        report.require(sign_ok && min_abs > 0.0, "fixed_sign_nonzero");
        report.note_f64("min_abs_value", min_abs);
        report.note_f64("expected_constant", expected);
        Ok(report)
    }

    /// Midpoint quadrature of dζ/(−2π) over the fundamental domain
    /// x, y ∈ [0, 2π); returns the Euler class c₁ up to roundoff.
    pub fn euler_class_integral(&self, grid: usize) -> Result<f64> {
        let dzeta = self.connection_form().exterior_derivative()?;
        let idx = IndexSet::from_indices(&[0, 1]).expect("dx^dy");
        let coeff = dzeta.coefficient(idx);
        let two_pi = 2.0 * std::f64::consts::PI;
        let h = two_pi / grid as f64;
        let mut total = 0.0;
        for i in 0..grid {
            let x = (i as f64 + 0.5) * h;
            let mut row = 0.0;
            for j in 0..grid {
                let y = (j as f64 + 0.5) * h;
                row += coeff.eval(&[x, y, 0.0]);
            }
            total += row;
        }
        Ok(total * h * h / -two_pi)
    }
}

/// The Kodaira–Thurston cylinder chart (τ, x, y, z): the nil factor carries
/// the c₁ = −3 data and the τ-deck realizes the homothety quotient.
#[derive(Debug, Clone)]
pub struct KTChart {
    chart: Chart,
    c1: i64,
    tau_period: f64,
    deck: Vec<ChartMap>,
}

impl KTChart {
    pub fn new() -> Result<KTChart> {
        KTChart::with_c1("kt", -3)
    }

    /// Same cylinder layout over a different Euler class; used for the
    /// product end of the complement side, where c₁ = −9.
    pub fn with_c1(name: &str, c1: i64) -> Result<KTChart> {
        let chart = Chart::new(name, &["tau", "x", "y", "z"], Domain::All)?;
        let tau_period = std::f64::consts::PI;
        let mut deck = Vec::new();
        deck.push(ChartMap::translation(&chart, &[tau_period, 0.0, 0.0, 0.0])?);
        deck.extend(deck_maps_on(&chart, 1, 2, 3, c1));
        Ok(KTChart {
            chart,
            c1,
            tau_period,
            deck,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn c1(&self) -> i64 {
        self.c1
    }

    pub fn tau_period(&self) -> f64 {
        self.tau_period
    }

    /// τ-deck first, then the three nil deck maps.
    pub fn deck(&self) -> &[ChartMap] {
        &self.deck
    }

    pub fn connection_form(&self) -> DifferentialForm {
        zeta_on(&self.chart, 1, 2, 3, self.c1)
    }

    /// The fiber-rotation flow acts by z-translation.
    pub fn fiber_translation(&self, t: f64) -> ChartMap {
        ChartMap::translation(&self.chart, &[0.0, 0.0, 0.0, t]).expect("translation")
    }
}

/// β = λ dτ∧dx + μ dy∧ζ on a Kodaira–Thurston cylinder chart.
pub fn kt_symplectic_form(kt: &KTChart, lambda: f64, mu: f64) -> Result<DifferentialForm> {
    if lambda == 0.0 || mu == 0.0 {
        return Err(Error::InvalidParameter(
            "kt_symplectic_form requires nonzero lambda and mu".into(),
        ));
    }
    let c = kt.chart();
    let dtau = DifferentialForm::coordinate_named(c, "tau");
    let dx = DifferentialForm::coordinate_named(c, "x");
    let dy = DifferentialForm::coordinate_named(c, "y");
    let zeta = kt.connection_form();
    dtau.wedge(&dx)?
        .scale(lambda)
        .add(&dy.wedge(&zeta)?.scale(mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::{sample_rng, uniform_point};

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn connection_structure_equation() {
        // dζ(∂x,∂y) = 3/2π for c₁ = −3, 9/2π for c₁ = −9
        for (c1, expected) in [(-3i64, 3.0 / TWO_PI), (-9, 9.0 / TWO_PI)] {
            let n = NilChart::new(c1).unwrap();
            let dzeta = n.connection_form().exterior_derivative().unwrap();
            let p = [0.7, -1.3, 2.9];
            let ex = TangentVector::coordinate(n.chart(), &p, 0).unwrap();
            let ey = TangentVector::coordinate(n.chart(), &p, 1).unwrap();
            let got = dzeta.evaluate(&[ex, ey]).unwrap();
            assert!((got - expected).abs() < 1e-15, "c1={c1}: {got} vs {expected}");
        }
    }

    #[test]
    fn zeta_is_deck_invariant() {
        let n = NilChart::new(-3).unwrap();
        let zeta = n.connection_form();
        let mut rng = sample_rng(11, "test.deck");
        let pts: Vec<Vec<f64>> = (0..100).map(|_| uniform_point(&mut rng, 3, TWO_PI)).collect();
        for gamma in n.deck() {
            let pulled = DifferentialForm::pullback(gamma, &zeta).unwrap();
            assert!(zeta.max_coeff_diff(&pulled, &pts).unwrap() < 1e-12);
        }
    }

    #[test]
    fn deck_commutator_is_central_power() {
        // γ₁γ₂γ₁⁻¹γ₂⁻¹ = γ₃^{c₁} on the cover
        let n = NilChart::new(-3).unwrap();
        let p = [0.3, 1.4, -0.9];
        let g1 = &n.deck()[0];
        let g2 = &n.deck()[1];
        let fwd = g2.apply(&g1.apply(&p));
        let rev = g1.apply(&g2.apply(&p));
        // difference is a pure z-shift by 2π c₁
        assert!((fwd[0] - rev[0]).abs() < 1e-12);
        assert!((fwd[1] - rev[1]).abs() < 1e-12);
        assert!(((fwd[2] - rev[2]).abs() - TWO_PI * 3.0).abs() < 1e-12);
    }

    #[test]
    fn pullback_functoriality_on_deck_maps() {
        // the named deck maps: composite pullback equals iterated pullback,
        // and pullback commutes with d, on a z-weighted test form
        let n = NilChart::new(-3).unwrap();
        let c = n.chart();
        let z = ScalarField::coord_named(c, "z");
        let form = DifferentialForm::coordinate_named(c, "x")
            .scalar_mul(&ScalarField::new(c.clone(), z.field().sin()));
        let g1 = &n.deck()[0];
        let g2 = &n.deck()[1];
        let composite = g1.then(g2).unwrap();
        let mut rng = sample_rng(23, "test.deck.functorial");
        let pts: Vec<Vec<f64>> = (0..50).map(|_| uniform_point(&mut rng, 3, TWO_PI)).collect();
        let via_composite = DifferentialForm::pullback(&composite, &form).unwrap();
        let via_steps =
            DifferentialForm::pullback(g1, &DifferentialForm::pullback(g2, &form).unwrap())
                .unwrap();
        assert!(via_composite.max_coeff_diff(&via_steps, &pts).unwrap() < 1e-8);
        let d_then = DifferentialForm::pullback(g1, &form.exterior_derivative().unwrap()).unwrap();
        let then_d = DifferentialForm::pullback(g1, &form)
            .unwrap()
            .exterior_derivative()
            .unwrap();
        assert!(d_then.max_coeff_diff(&then_d, &pts).unwrap() < 1e-8);
    }

    #[test]
    fn contact_check_passes_for_links_and_fails_flat() {
        let n = NilChart::new(-3).unwrap();
        let r = n.contact_check(200, 5).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.note_value("min_abs_value").unwrap() - 3.0 / TWO_PI).abs() < 1e-12);

        let n9 = NilChart::new(-9).unwrap();
        let r9 = n9.contact_check(200, 5).unwrap();
        assert!(r9.passed);
        assert!((r9.note_value("min_abs_value").unwrap() - 9.0 / TWO_PI).abs() < 1e-12);

        let flat = NilChart::new(0).unwrap();
        let rf = flat.contact_check(50, 5).unwrap();
        assert!(!rf.passed);
        assert_eq!(rf.note_value("min_abs_value").unwrap(), 0.0);
    }

    #[test]
    fn euler_class_integral_recovers_c1() {
        for c1 in [-3i64, -9, -2, -1] {
            let n = NilChart::new(c1).unwrap();
            let got = n.euler_class_integral(128).unwrap();
            assert!((got - c1 as f64).abs() < 1e-9, "c1={c1}: {got}");
        }
    }

    #[test]
    fn derivative_of_the_growth_primitive() {
        // d(e^τ ζ) = e^τ dτ∧ζ + e^τ·(3/2π) dx∧dy on the c₁ = −3 cylinder
        let kt = KTChart::new().unwrap();
        let c = kt.chart();
        let exp_tau = ScalarField::new(c.clone(), crate::exterior::Field::coord(0).exp());
        let d = kt
            .connection_form()
            .scalar_mul(&exp_tau)
            .exterior_derivative()
            .unwrap();
        let p = [0.8f64, 1.3, -0.4, 2.1];
        let e = p[0].exp();
        let idx = |a: usize, b: usize| IndexSet::from_indices(&[a, b]).unwrap();
        assert!((d.coefficient(idx(0, 3)).eval(&p) - e).abs() < 1e-12); // dτ∧dz
        assert!(
            (d.coefficient(idx(1, 2)).eval(&p) - e * 3.0 / TWO_PI).abs() < 1e-12 // dx∧dy
        );
        // dτ∧dy carries the x-weighted connection coefficient
        assert!(
            (d.coefficient(idx(0, 2)).eval(&p) - e * 3.0 / TWO_PI * p[1]).abs() < 1e-12
        );
    }

    #[test]
    fn kt_form_is_closed_with_constant_pfaffian() {
        let kt = KTChart::new().unwrap();
        let beta = kt_symplectic_form(&kt, 10.0, 0.05).unwrap();
        let dbeta = beta.exterior_derivative().unwrap();
        let mut rng = sample_rng(3, "test.kt");
        for _ in 0..50 {
            let p = uniform_point(&mut rng, 4, TWO_PI);
            for (_, f) in dbeta.coefficients() {
                assert!(f.eval(&p).abs() < 1e-12);
            }
            let frame = [
                TangentVector::coordinate(kt.chart(), &p, 0).unwrap(),
                TangentVector::coordinate(kt.chart(), &p, 1).unwrap(),
                TangentVector::coordinate(kt.chart(), &p, 2).unwrap(),
                TangentVector::coordinate(kt.chart(), &p, 3).unwrap(),
            ];
            let pf = beta.pfaffian4(&p, &frame).unwrap();
            assert!((pf - 0.5).abs() < 1e-12); // λμ = 10·0.05
        }
    }

    #[test]
    fn kt_form_rejects_degenerate_scale() {
        let kt = KTChart::new().unwrap();
        assert!(kt_symplectic_form(&kt, 2.0, 0.0).is_err());
        assert!(kt_symplectic_form(&kt, 0.0, 1.0).is_err());
    }

    #[test]
    fn kt_form_deck_and_fiber_invariance() {
        let kt = KTChart::new().unwrap();
        let beta = kt_symplectic_form(&kt, 10.0, 0.05).unwrap();
        let mut rng = sample_rng(9, "test.kt.deck");
        let pts: Vec<Vec<f64>> = (0..100).map(|_| uniform_point(&mut rng, 4, TWO_PI)).collect();
        for gamma in kt.deck() {
            let pulled = DifferentialForm::pullback(gamma, &beta).unwrap();
            assert!(beta.max_coeff_diff(&pulled, &pts).unwrap() < 1e-12);
        }
        for t in [0.3, 1.0, 4.5] {
            let rot = kt.fiber_translation(t);
            let pulled = DifferentialForm::pullback(&rot, &beta).unwrap();
            assert!(beta.max_coeff_diff(&pulled, &pts).unwrap() < 1e-12);
        }
    }
}
