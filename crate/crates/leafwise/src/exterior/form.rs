//! Differential forms on a chart, stored sparsely by increasing multi-index.

use std::collections::BTreeMap;

use smallvec::SmallVec;

use super::chart::{Chart, ChartMap, ScalarField, TangentVector};
use super::expr::MAX_DIM;
use crate::error::{Error, Result};

/// An increasing multi-index over at most 8 coordinates, packed as a bitmask.
/// Bitmask order coincides with lexicographic order on increasing tuples of
/// equal length, so `BTreeMap<IndexSet, _>` iterates deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexSet(pub u8);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_indices(indices: &[usize]) -> Option<IndexSet> {
        let mut mask = 0u8;
        let mut prev: Option<usize> = None;
        for &i in indices {
            if i >= MAX_DIM || prev.is_some_and(|p| p >= i) {
                return None;
            }
            mask |= 1 << i;
            prev = Some(i);
        }
        Some(IndexSet(mask))
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn indices(self) -> SmallVec<[usize; MAX_DIM]> {
        (0..MAX_DIM).filter(|&i| self.contains(i)).collect()
    }

    /// Union with sign of the shuffle sorting the concatenation, or `None`
    /// when the index sets intersect.
    pub fn merge(self, other: IndexSet) -> Option<(IndexSet, f64)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut inversions = 0u32;
        for i in 0..MAX_DIM {
            if other.contains(i) {
                inversions += (self.0 >> (i + 1)).count_ones();
            }
        }
        let sign = if inversions.is_multiple_of(2) { 1.0 } else { -1.0 };
        Some((IndexSet(self.0 | other.0), sign))
    }

    /// Insert one index, returning the sign (−1)^{#existing indices below i}.
    pub fn insert(self, i: usize) -> Option<(IndexSet, f64)> {
        self.merge(IndexSet(1 << i))
    }
}

/// A degree-k form on a chart; absent multi-index means zero coefficient.
#[derive(Debug, Clone)]
pub struct DifferentialForm {
    chart: Chart,
    degree: usize,
    coeffs: BTreeMap<IndexSet, ScalarField>,
}

impl DifferentialForm {
    pub fn zero(chart: &Chart, degree: usize) -> DifferentialForm {
        DifferentialForm {
            chart: chart.clone(),
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_scalar(f: ScalarField) -> DifferentialForm {
        let chart = f.chart().clone();
        let mut form = DifferentialForm::zero(&chart, 0);
        form.set_coefficient(IndexSet::EMPTY, f);
        form
    }

    /// The coordinate one-form dxᵢ.
    pub fn coordinate(chart: &Chart, i: usize) -> DifferentialForm {
        assert!(i < chart.dim());
        let mut form = DifferentialForm::zero(chart, 1);
        form.set_coefficient(IndexSet(1 << i), ScalarField::constant(chart, 1.0));
        form
    }

    pub fn coordinate_named(chart: &Chart, name: &str) -> DifferentialForm {
        let i = chart
            .coord_index(name)
            .unwrap_or_else(|| panic!("no coordinate `{name}` on chart `{}`", chart.name()));
        DifferentialForm::coordinate(chart, i)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (IndexSet, &ScalarField)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn coefficient(&self, idx: IndexSet) -> ScalarField {
        self.coeffs
            .get(&idx)
            .cloned()
            .unwrap_or_else(|| ScalarField::constant(&self.chart, 0.0))
    }

    pub fn set_coefficient(&mut self, idx: IndexSet, f: ScalarField) {
        assert_eq!(idx.degree(), self.degree, "multi-index degree mismatch");
        assert!(self.chart == *f.chart(), "coefficient chart mismatch");
        if f.is_zero_const() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, f);
        }
    }

    pub fn accumulate(&mut self, idx: IndexSet, f: ScalarField) {
        let sum = self.coefficient(idx).add(&f);
        self.set_coefficient(idx, sum);
    }

    pub fn add(&self, o: &DifferentialForm) -> Result<DifferentialForm> {
        self.chart.expect_same(&o.chart)?;
        if self.degree != o.degree {
            return Err(Error::DegreeRange {
                degree: o.degree,
                dim: self.degree,
            });
        }
        let mut out = self.clone();
        for (idx, f) in o.coefficients() {
            out.accumulate(idx, f.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> DifferentialForm {
        let mut out = DifferentialForm::zero(&self.chart, self.degree);
        for (idx, f) in self.coefficients() {
            out.set_coefficient(idx, f.scale(c));
        }
        out
    }

    /// Multiply by a degree-0 field.
    pub fn scalar_mul(&self, s: &ScalarField) -> DifferentialForm {
        assert!(self.chart == *s.chart());
        let mut out = DifferentialForm::zero(&self.chart, self.degree);
        for (idx, f) in self.coefficients() {
            out.set_coefficient(idx, f.mul(s));
        }
        out
    }

    /// Exterior product, coefficients assembled by signed shuffle.
    pub fn wedge(&self, o: &DifferentialForm) -> Result<DifferentialForm> {
        self.chart.expect_same(&o.chart)?;
        let degree = self.degree + o.degree;
        let mut out = DifferentialForm::zero(&self.chart, degree);
        if degree > self.chart.dim() {
            // above top degree everything is identically zero
            return Ok(out);
        }
        for (ia, fa) in self.coefficients() {
            for (ib, fb) in o.coefficients() {
                if let Some((idx, sign)) = ia.merge(ib) {
                    out.accumulate(idx, fa.mul(fb).scale(sign));
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative; coefficients are signed sums of exact partials
    /// obtained by dual-number evaluation.
    pub fn exterior_derivative(&self) -> Result<DifferentialForm> {
        let dim = self.chart.dim();
        if self.degree >= dim {
            return Err(Error::DegreeRange {
                degree: self.degree,
                dim,
            });
        }
        let mut out = DifferentialForm::zero(&self.chart, self.degree + 1);
        for (idx, f) in self.coefficients() {
            for i in 0..dim {
                // d(f dx_I) = Σᵢ ∂ᵢf dxᵢ∧dx_I; the merge sign reorders
                // dxᵢ into its increasing slot
                if let Some((didx, sign)) = IndexSet(1 << i).merge(idx) {
                    out.accumulate(didx, f.partial(i).scale(sign));
                }
            }
        }
        Ok(out)
    }

    /// Pull back along a chart map: coefficients are composed with the map
    /// and multiplied into wedges of the component differentials.
    pub fn pullback(map: &ChartMap, form: &DifferentialForm) -> Result<DifferentialForm> {
        map.target.expect_same(&form.chart)?;
        let src = &map.source;
        let mut out = DifferentialForm::zero(src, form.degree);
        if form.degree > src.dim() {
            return Ok(out);
        }
        // differentials dφ_t = Σ_j ∂φ_t/∂x_j dx_j of the target components
        let comps = map.components();
        let dphi: Vec<DifferentialForm> = comps
            .iter()
            .map(|c| {
                let mut one = DifferentialForm::zero(src, 1);
                for j in 0..src.dim() {
                    one.accumulate(IndexSet(1 << j), c.partial(j));
                }
                one
            })
            .collect();
        for (idx, f) in form.coefficients() {
            let pulled_coeff = ScalarField::new(src.clone(), f.field().compose(map.component_exprs()));
            let mut term = DifferentialForm::from_scalar(pulled_coeff);
            for t in idx.indices() {
                term = term.wedge(&dphi[t])?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Interior product with a vector field given by its component fields:
    /// (ι_X ω)_J = Σ_i sign(i, J) X^i ω_{{i}∪J}.
    pub fn contract(&self, components: &[ScalarField]) -> Result<DifferentialForm> {
        if self.degree == 0 {
            return Err(Error::DegreeRange {
                degree: 0,
                dim: self.chart.dim(),
            });
        }
        if components.len() != self.chart.dim() {
            return Err(Error::VectorCount {
                expected: self.chart.dim(),
                found: components.len(),
            });
        }
        for c in components {
            self.chart.expect_same(c.chart())?;
        }
        let mut out = DifferentialForm::zero(&self.chart, self.degree - 1);
        for (idx, f) in self.coefficients() {
            for i in idx.indices() {
                // removing dxᵢ from slot s of the increasing tuple costs
                // (−1)^s, the same sign its insertion would
                let rest = IndexSet(idx.0 & !(1 << i));
                let (_, sign) = IndexSet(1 << i)
                    .merge(rest)
                    .expect("index was removed from the set");
                out.accumulate(rest, f.mul(&components[i]).scale(sign));
            }
        }
        Ok(out)
    }

    /// Multilinear alternating value on `degree` tangent vectors at a shared
    /// base point.
    pub fn evaluate(&self, vectors: &[TangentVector]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::VectorCount {
                expected: self.degree,
                found: vectors.len(),
            });
        }
        if self.degree == 0 {
            return Err(Error::VectorCount {
                expected: 1,
                found: 0,
            });
        }
        let base = &vectors[0].base;
        for v in vectors {
            self.chart.expect_same(&v.chart)?;
            if v.base != *base {
                return Err(Error::BasePointMismatch);
            }
        }
        self.chart.check_point(base)?;
        let rows: Vec<&[f64]> = vectors.iter().map(|v| v.components.as_slice()).collect();
        Ok(self.evaluate_on_rows(base, &rows))
    }

    /// Value of a degree-0 form at a point.
    pub fn evaluate_scalar(&self, p: &[f64]) -> Result<f64> {
        if self.degree != 0 {
            return Err(Error::VectorCount {
                expected: self.degree,
                found: 0,
            });
        }
        self.chart.check_point(p)?;
        Ok(self.coefficient(IndexSet::EMPTY).eval(p))
    }

    /// Unvalidated fast path: rows are vector components in chart order.
    pub fn evaluate_on_rows(&self, p: &[f64], rows: &[&[f64]]) -> f64 {
        let mut total = 0.0;
        for (idx, f) in self.coefficients() {
            let cols = idx.indices();
            let det = minor_det(rows, &cols);
            if det != 0.0 {
                total += f.eval(p) * det;
            }
        }
        total
    }

    /// Pfaffian of the 2-form's Gram matrix on a 4-frame of a 4-dimensional
    /// chart; nonzero exactly where the form is non-degenerate.
    pub fn pfaffian4(&self, p: &[f64], frame: &[TangentVector; 4]) -> Result<f64> {
        if self.degree != 2 || self.chart.dim() != 4 {
            return Err(Error::DegreeRange {
                degree: self.degree,
                dim: self.chart.dim(),
            });
        }
        self.chart.check_point(p)?;
        for v in frame.iter() {
            self.chart.expect_same(&v.chart)?;
            if v.base != p {
                return Err(Error::BasePointMismatch);
            }
        }
        let rows: Vec<&[f64]> = frame.iter().map(|v| v.components.as_slice()).collect();
        let det = minor_det(&rows, &[0, 1, 2, 3]);
        if det.abs() < 1e-12 {
            return Err(Error::DegenerateFrame { det });
        }
        let b = |i: usize, j: usize| self.evaluate_on_rows(p, &[rows[i], rows[j]]);
        Ok(b(0, 1) * b(2, 3) - b(0, 2) * b(1, 3) + b(0, 3) * b(1, 2))
    }

    /// Max absolute coefficient difference over sample points, with the
    /// union of both sparsity patterns.
    pub fn max_coeff_diff(&self, o: &DifferentialForm, points: &[Vec<f64>]) -> Result<f64> {
        self.chart.expect_same(&o.chart)?;
        let mut keys: Vec<IndexSet> = self.coeffs.keys().chain(o.coeffs.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        let mut worst: f64 = 0.0;
        for p in points {
            for &k in &keys {
                let d = (self.coefficient(k).eval(p) - o.coefficient(k).eval(p)).abs();
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }
}

/// Determinant of the square minor `rows × cols`, by Gaussian elimination
/// with partial pivoting on a stack copy.
fn minor_det(rows: &[&[f64]], cols: &[usize]) -> f64 {
    let n = rows.len();
    debug_assert_eq!(n, cols.len());
    match n {
        0 => return 1.0,
        1 => return rows[0][cols[0]],
        2 => {
            return rows[0][cols[0]] * rows[1][cols[1]] - rows[0][cols[1]] * rows[1][cols[0]];
        }
        _ => {}
    }
    let mut m = [[0.0f64; MAX_DIM]; MAX_DIM];
    for (i, r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            m[i][j] = r[c];
        }
    }
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if m[i][k].abs() > m[piv][k].abs() {
                piv = i;
            }
        }
        if m[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let factor = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= factor * m[k][j];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::chart::Domain;
    use crate::exterior::expr::Field;

    fn chart4() -> Chart {
        Chart::new("c4", &["t", "x", "y", "z"], Domain::All).unwrap()
    }

    fn dx(c: &Chart, name: &str) -> DifferentialForm {
        DifferentialForm::coordinate_named(c, name)
    }

    #[test]
    fn merge_signs() {
        let a = IndexSet::from_indices(&[0]).unwrap();
        let b = IndexSet::from_indices(&[1]).unwrap();
        assert_eq!(a.merge(b).unwrap().1, 1.0);
        assert_eq!(b.merge(a).unwrap().1, -1.0);
        assert!(a.merge(a).is_none());
        let c = IndexSet::from_indices(&[1, 3]).unwrap();
        let d = IndexSet::from_indices(&[0, 2]).unwrap();
        // sorting (1,3,0,2) needs the transpositions (1,0), (3,0), (3,2)
        assert_eq!(c.merge(d).unwrap().1, -1.0);
    }

    #[test]
    fn wedge_of_repeated_coordinate_vanishes() {
        let c = chart4();
        let w = dx(&c, "x").wedge(&dx(&c, "x")).unwrap();
        assert_eq!(w.coefficients().count(), 0);
    }

    #[test]
    fn wedge_square_of_split_form() {
        // (λ dt∧dx + μ dy∧dz)² = 2λμ dt∧dx∧dy∧dz, treating the fourth
        // coordinate as an independent one-form. Expansion by hand: cross
        // terms double, squares vanish on repeated indices.
        let c = chart4();
        let (lambda, mu) = (3.0, 0.25);
        let beta = dx(&c, "t")
            .wedge(&dx(&c, "x"))
            .unwrap()
            .scale(lambda)
            .add(&dx(&c, "y").wedge(&dx(&c, "z")).unwrap().scale(mu))
            .unwrap();
        let sq = beta.wedge(&beta).unwrap();
        let top = IndexSet::from_indices(&[0, 1, 2, 3]).unwrap();
        let got = sq.coefficient(top).eval(&[0.3, -0.2, 0.9, 2.0]);
        assert!((got - 2.0 * lambda * mu).abs() < 1e-14);
    }

    #[test]
    fn evaluate_is_antisymmetric() {
        let c = chart4();
        let w = dx(&c, "x").wedge(&dx(&c, "y")).unwrap();
        let base = [0.0, 0.0, 0.0, 0.0];
        let ex = TangentVector::coordinate(&c, &base, 1).unwrap();
        let ey = TangentVector::coordinate(&c, &base, 2).unwrap();
        assert_eq!(w.evaluate(&[ex.clone(), ey.clone()]).unwrap(), 1.0);
        assert_eq!(w.evaluate(&[ey, ex]).unwrap(), -1.0);
    }

    #[test]
    fn exterior_derivative_of_x_dy() {
        // d(x dy) = dx∧dy
        let c = chart4();
        let form = dx(&c, "y").scalar_mul(&ScalarField::coord_named(&c, "x"));
        let d = form.exterior_derivative().unwrap();
        let idx = IndexSet::from_indices(&[1, 2]).unwrap();
        assert!((d.coefficient(idx).eval(&[0.0, 5.0, 7.0, 1.0]) - 1.0).abs() < 1e-15);
        assert_eq!(d.coefficients().count(), 1);
    }

    #[test]
    fn d_squared_vanishes_pointwise() {
        let c = chart4();
        // messy 1-form with transcendental coefficients
        let t = ScalarField::coord_named(&c, "t");
        let x = ScalarField::coord_named(&c, "x");
        let y = ScalarField::coord_named(&c, "y");
        let coeff = ScalarField::new(
            c.clone(),
            t.field().mul(x.field()).exp().mul(&y.field().sin()),
        );
        let form = dx(&c, "x")
            .scalar_mul(&coeff)
            .add(&dx(&c, "z").scalar_mul(&x.mul(&y)))
            .unwrap();
        let dd = form
            .exterior_derivative()
            .unwrap()
            .exterior_derivative()
            .unwrap();
        let p = [0.4, -0.7, 1.2, 0.3];
        for (_, f) in dd.coefficients() {
            assert!(f.eval(&p).abs() < 1e-12);
        }
    }

    #[test]
    fn pullback_of_identity_is_identity() {
        let c = chart4();
        let form = dx(&c, "t")
            .wedge(&dx(&c, "x"))
            .unwrap()
            .scalar_mul(&ScalarField::coord_named(&c, "y"));
        let id = ChartMap::identity(&c);
        let pulled = DifferentialForm::pullback(&id, &form).unwrap();
        let pts = vec![vec![0.1, 0.2, 0.3, 0.4], vec![-1.0, 2.0, 0.5, 0.0]];
        assert!(form.max_coeff_diff(&pulled, &pts).unwrap() < 1e-15);
    }

    #[test]
    fn pullback_commutes_with_d() {
        let c = chart4();
        let x = ScalarField::coord_named(&c, "x");
        let y = ScalarField::coord_named(&c, "y");
        let form = dx(&c, "y").scalar_mul(&ScalarField::new(
            c.clone(),
            x.field().mul(x.field()).add(&y.field().cos()),
        ));
        // nonlinear map (t,x,y,z) -> (t, x+y², y, z)
        let comps = vec![
            ScalarField::coord(&c, 0),
            ScalarField::new(c.clone(), Field::coord(1).add(&Field::coord(2).powi(2))),
            ScalarField::coord(&c, 2),
            ScalarField::coord(&c, 3),
        ];
        let phi = ChartMap::new(&c, &c, comps).unwrap();
        let lhs = DifferentialForm::pullback(&phi, &form.exterior_derivative().unwrap()).unwrap();
        let rhs = DifferentialForm::pullback(&phi, &form)
            .unwrap()
            .exterior_derivative()
            .unwrap();
        let pts = vec![vec![0.3, 0.1, -0.4, 0.9], vec![1.0, -0.2, 0.7, 0.0]];
        assert!(lhs.max_coeff_diff(&rhs, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn contraction_matches_direct_evaluation() {
        let c = chart4();
        let x = ScalarField::coord_named(&c, "x");
        let y = ScalarField::coord_named(&c, "y");
        let form = dx(&c, "t")
            .wedge(&dx(&c, "x"))
            .unwrap()
            .scalar_mul(&y)
            .add(&dx(&c, "y").wedge(&dx(&c, "z")).unwrap().scalar_mul(&x))
            .unwrap();
        // field X = (y, 1, t, x)
        let comps = vec![
            ScalarField::coord_named(&c, "y"),
            ScalarField::constant(&c, 1.0),
            ScalarField::coord_named(&c, "t"),
            ScalarField::coord_named(&c, "x"),
        ];
        let contracted = form.contract(&comps).unwrap();
        let p = [0.3, -0.8, 1.2, 0.5];
        for i in 0..4 {
            let xv = TangentVector::new(
                &c,
                &p,
                &[p[2], 1.0, p[0], p[1]],
            )
            .unwrap();
            let ei = TangentVector::coordinate(&c, &p, i).unwrap();
            let direct = form.evaluate(&[xv, ei.clone()]).unwrap();
            let via = contracted.evaluate(&[ei]).unwrap();
            assert!((direct - via).abs() < 1e-14, "slot {i}: {direct} vs {via}");
        }
    }

    #[test]
    fn pfaffian_of_the_kaehler_block_form() {
        // 2(da∧db + dc∧dd) on the complex-plane-pair frame has Pfaffian 4
        let c = Chart::new("c2pair", &["a", "b", "cc", "d"], Domain::All).unwrap();
        let form = DifferentialForm::coordinate(&c, 0)
            .wedge(&DifferentialForm::coordinate(&c, 1))
            .unwrap()
            .add(
                &DifferentialForm::coordinate(&c, 2)
                    .wedge(&DifferentialForm::coordinate(&c, 3))
                    .unwrap(),
            )
            .unwrap()
            .scale(2.0);
        let base = [0.3, -0.7, 1.1, 0.2];
        let frame = [
            TangentVector::coordinate(&c, &base, 0).unwrap(),
            TangentVector::coordinate(&c, &base, 1).unwrap(),
            TangentVector::coordinate(&c, &base, 2).unwrap(),
            TangentVector::coordinate(&c, &base, 3).unwrap(),
        ];
        assert_eq!(form.pfaffian4(&base, &frame).unwrap(), 4.0);
    }

    #[test]
    fn pfaffian_of_rank_two_form_vanishes() {
        let c = chart4();
        let w = dx(&c, "t").wedge(&dx(&c, "x")).unwrap();
        let base = [0.0; 4];
        let frame = [
            TangentVector::coordinate(&c, &base, 0).unwrap(),
            TangentVector::coordinate(&c, &base, 1).unwrap(),
            TangentVector::coordinate(&c, &base, 2).unwrap(),
            TangentVector::coordinate(&c, &base, 3).unwrap(),
        ];
        assert_eq!(w.pfaffian4(&base, &frame).unwrap(), 0.0);
    }

    #[test]
    fn pfaffian_rejects_degenerate_frame() {
        let c = chart4();
        let w = dx(&c, "t").wedge(&dx(&c, "x")).unwrap();
        let base = [0.0; 4];
        let v = TangentVector::new(&c, &base, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let frame = [
            v.clone(),
            v.clone(),
            TangentVector::coordinate(&c, &base, 2).unwrap(),
            TangentVector::coordinate(&c, &base, 3).unwrap(),
        ];
        assert!(matches!(
            w.pfaffian4(&base, &frame),
            Err(Error::DegenerateFrame { .. })
        ));
    }
}
