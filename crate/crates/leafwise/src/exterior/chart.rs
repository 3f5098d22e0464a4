//! Charts, scalar fields bound to a chart, tangent vectors and chart maps.

use std::sync::Arc;

use super::expr::{Expr, Field, MAX_DIM};
use crate::error::{Error, Result};

/// Open-set membership for a chart's domain.
#[derive(Debug, Clone)]
pub enum Domain {
    All,
    /// Open box; use infinities for half-open directions.
    Box(Vec<(f64, f64)>),
}

impl Domain {
    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Domain::All => true,
            Domain::Box(ranges) => ranges
                .iter()
                .zip(p)
                .all(|((lo, hi), x)| x > lo && x < hi),
        }
    }
}

#[derive(Debug)]
struct ChartData {
    name: String,
    coords: Vec<String>,
    domain: Domain,
}

/// An open chart of ℝⁿ (n ≤ 8) with named coordinates.
///
/// Charts compare by name and dimension; two handles to the same logical
/// chart built in different places are interchangeable.
#[derive(Debug, Clone)]
pub struct Chart {
    data: Arc<ChartData>,
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        self.data.name == other.data.name && self.data.coords.len() == other.data.coords.len()
    }
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], domain: Domain) -> Result<Chart> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::DimensionLimit { dim: coords.len() });
        }
        for (i, a) in coords.iter().enumerate() {
            if coords[..i].contains(a) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate coordinate name `{a}` on chart `{name}`"
                )));
            }
        }
        Ok(Chart {
            data: Arc::new(ChartData {
                name: name.to_string(),
                coords: coords.iter().map(|s| s.to_string()).collect(),
                domain,
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.data.name
    }

    pub fn dim(&self) -> usize {
        self.data.coords.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.data.coords
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.data.coords.iter().position(|c| c == name)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && self.data.domain.contains(p)
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                chart: self.name().to_string(),
            })
        }
    }

    pub(crate) fn expect_same(&self, other: &Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                expected: self.name().to_string(),
                found: other.name().to_string(),
            })
        }
    }
}

/// A smooth real-valued map on a chart, with exact first derivatives through
/// dual-number evaluation.
#[derive(Debug, Clone)]
pub struct ScalarField {
    chart: Chart,
    field: Field,
}

impl ScalarField {
    pub fn new(chart: Chart, field: Field) -> ScalarField {
        ScalarField { chart, field }
    }

    pub fn constant(chart: &Chart, c: f64) -> ScalarField {
        ScalarField::new(chart.clone(), Field::constant(c))
    }

    pub fn coord(chart: &Chart, i: usize) -> ScalarField {
        assert!(i < chart.dim(), "coordinate index out of range");
        ScalarField::new(chart.clone(), Field::coord(i))
    }

    pub fn coord_named(chart: &Chart, name: &str) -> ScalarField {
        let i = chart
            .coord_index(name)
            .unwrap_or_else(|| panic!("no coordinate `{name}` on chart `{}`", chart.name()));
        ScalarField::coord(chart, i)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.field.eval_f64(p)
    }

    /// Value and exact partial derivative in coordinate direction `i`.
    pub fn eval_with_partial(&self, p: &[f64], i: usize) -> (f64, f64) {
        self.field.eval_with_partial(p, i)
    }

    pub fn partial(&self, i: usize) -> ScalarField {
        ScalarField::new(self.chart.clone(), self.field.partial(i))
    }

    pub fn is_zero_const(&self) -> bool {
        self.field.is_zero_const()
    }

    fn same_chart(&self, o: &ScalarField) {
        assert!(
            self.chart == o.chart,
            "scalar fields live on different charts: `{}` vs `{}`",
            self.chart.name(),
            o.chart.name()
        );
    }

    pub fn add(&self, o: &ScalarField) -> ScalarField {
        self.same_chart(o);
        ScalarField::new(self.chart.clone(), self.field.add(&o.field))
    }

    pub fn sub(&self, o: &ScalarField) -> ScalarField {
        self.same_chart(o);
        ScalarField::new(self.chart.clone(), self.field.sub(&o.field))
    }

    pub fn mul(&self, o: &ScalarField) -> ScalarField {
        self.same_chart(o);
        ScalarField::new(self.chart.clone(), self.field.mul(&o.field))
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        ScalarField::new(self.chart.clone(), self.field.scale(c))
    }
}

/// A tangent vector at a base point of a chart.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub chart: Chart,
    pub base: Vec<f64>,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(chart: &Chart, base: &[f64], components: &[f64]) -> Result<TangentVector> {
        chart.check_point(base)?;
        if components.len() != chart.dim() {
            return Err(Error::VectorCount {
                expected: chart.dim(),
                found: components.len(),
            });
        }
        Ok(TangentVector {
            chart: chart.clone(),
            base: base.to_vec(),
            components: components.to_vec(),
        })
    }

    /// The i-th coordinate frame vector ∂/∂xᵢ at `base`.
    pub fn coordinate(chart: &Chart, base: &[f64], i: usize) -> Result<TangentVector> {
        let mut c = vec![0.0; chart.dim()];
        c[i] = 1.0;
        TangentVector::new(chart, base, &c)
    }
}

/// A smooth map between charts, given by target-coordinate component fields
/// on the source chart.
#[derive(Debug, Clone)]
pub struct ChartMap {
    pub source: Chart,
    pub target: Chart,
    comps: Vec<ScalarField>,
    comp_exprs: Arc<Vec<Arc<Expr>>>,
}

impl ChartMap {
    pub fn new(source: &Chart, target: &Chart, comps: Vec<ScalarField>) -> Result<ChartMap> {
        if comps.len() != target.dim() {
            return Err(Error::VectorCount {
                expected: target.dim(),
                found: comps.len(),
            });
        }
        for c in &comps {
            source.expect_same(c.chart())?;
        }
        let comp_exprs = Arc::new(comps.iter().map(|c| c.field().0.clone()).collect());
        Ok(ChartMap {
            source: source.clone(),
            target: target.clone(),
            comps,
            comp_exprs,
        })
    }

    pub fn identity(chart: &Chart) -> ChartMap {
        let comps = (0..chart.dim()).map(|i| ScalarField::coord(chart, i)).collect();
        ChartMap::new(chart, chart, comps).expect("identity map is well-formed")
    }

    /// Translation by constant offsets within one chart.
    pub fn translation(chart: &Chart, offsets: &[f64]) -> Result<ChartMap> {
        if offsets.len() != chart.dim() {
            return Err(Error::VectorCount {
                expected: chart.dim(),
                found: offsets.len(),
            });
        }
        let comps = offsets
            .iter()
            .enumerate()
            .map(|(i, &c)| ScalarField::new(chart.clone(), Field::coord(i).add(&Field::constant(c))))
            .collect();
        ChartMap::new(chart, chart, comps)
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub(crate) fn component_exprs(&self) -> &Arc<Vec<Arc<Expr>>> {
        &self.comp_exprs
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval(p)).collect()
    }

    /// `other ∘ self`: first apply `self`, then `other`.
    pub fn then(&self, other: &ChartMap) -> Result<ChartMap> {
        self.target.expect_same(&other.source)?;
        let comps = other
            .comps
            .iter()
            .map(|c| {
                ScalarField::new(self.source.clone(), c.field().compose(&self.comp_exprs))
            })
            .collect();
        ChartMap::new(&self.source, &other.target, comps)
    }

    /// Pull a scalar field on the target back to the source.
    pub fn pull_scalar(&self, f: &ScalarField) -> Result<ScalarField> {
        self.target.expect_same(f.chart())?;
        Ok(ScalarField::new(
            self.source.clone(),
            f.field().compose(&self.comp_exprs),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> Chart {
        Chart::new("plane", &["x", "y"], Domain::All).unwrap()
    }

    #[test]
    fn chart_rejects_bad_coordinates() {
        assert!(Chart::new("c", &["x", "x"], Domain::All).is_err());
        assert!(Chart::new("c", &["a", "b", "c", "d", "e", "f", "g", "h", "i"], Domain::All).is_err());
    }

    #[test]
    fn domain_box_is_open() {
        let c = Chart::new("line", &["t"], Domain::Box(vec![(0.0, 1.0)])).unwrap();
        assert!(c.contains(&[0.5]));
        assert!(!c.contains(&[0.0]));
        assert!(!c.contains(&[1.0]));
    }

    #[test]
    fn chart_map_composition_matches_pointwise() {
        let c = plane();
        let shift = ChartMap::translation(&c, &[1.0, 0.0]).unwrap();
        let swap = ChartMap::new(
            &c,
            &c,
            vec![ScalarField::coord(&c, 1), ScalarField::coord(&c, 0)],
        )
        .unwrap();
        let comp = shift.then(&swap).unwrap();
        let p = [2.0, 5.0];
        let via_comp = comp.apply(&p);
        let via_steps = swap.apply(&shift.apply(&p));
        assert_eq!(via_comp, via_steps);
    }

    #[test]
    fn pull_scalar_composes() {
        let c = plane();
        let shift = ChartMap::translation(&c, &[0.0, 3.0]).unwrap();
        let f = ScalarField::coord(&c, 1).mul(&ScalarField::coord(&c, 0));
        let g = shift.pull_scalar(&f).unwrap();
        assert!((g.eval(&[2.0, 1.0]) - 2.0 * 4.0).abs() < 1e-15);
    }

    #[test]
    fn tangent_vector_requires_domain_membership() {
        let c = Chart::new("line", &["t"], Domain::Box(vec![(0.0, 1.0)])).unwrap();
        assert!(TangentVector::new(&c, &[2.0], &[1.0]).is_err());
        assert!(TangentVector::new(&c, &[0.5], &[1.0]).is_ok());
    }
}
