//! Weighted-homogeneous hypersurfaces in ℂ³: evaluation, link sampling,
//! Newton retraction onto fibers, the weighted Hopf action, product
//! coordinates of the end, and the Milnor-fibration regularity check.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::Real;
use crate::report::VerificationReport;
use crate::suite::sample_rng;

/// Complex scalar over any [`Real`] backing type, so analytic formulas can
/// be pushed through dual numbers for exact directional derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Cx<S> {
    pub re: S,
    pub im: S,
}

#[allow(clippy::should_implement_trait)]
impl<S: Real> Cx<S> {
    pub fn new(re: S, im: S) -> Self {
        Cx { re, im }
    }

    pub fn of(re: f64, im: f64) -> Self {
        Cx::new(S::from_f64(re), S::from_f64(im))
    }

    pub fn zero() -> Self {
        Cx::of(0.0, 0.0)
    }

    pub fn one() -> Self {
        Cx::of(1.0, 0.0)
    }

    pub fn unit(theta: S) -> Self {
        Cx::new(theta.cos(), theta.sin())
    }

    pub fn conj(self) -> Self {
        Cx::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> S {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> S {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: S) -> Self {
        Cx::new(self.re * s, self.im * s)
    }

    pub fn add(self, o: Self) -> Self {
        Cx::new(self.re + o.re, self.im + o.im)
    }

    pub fn sub(self, o: Self) -> Self {
        Cx::new(self.re - o.re, self.im - o.im)
    }

    pub fn mul(self, o: Self) -> Self {
        Cx::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    pub fn powu(self, n: u32) -> Self {
        let mut acc = Cx::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn primal(self) -> Cx<f64> {
        Cx::new(self.re.primal(), self.im.primal())
    }
}

pub type C64 = Cx<f64>;

/// The three simple-elliptic polynomial types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyName {
    E6,
    E7,
    E8,
}

impl std::str::FromStr for PolyName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E6" => Ok(PolyName::E6),
            "E7" => Ok(PolyName::E7),
            "E8" => Ok(PolyName::E8),
            other => Err(format!("unknown polynomial `{other}` (expected E6, E7 or E8)")),
        }
    }
}

impl std::fmt::Display for PolyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolyName::E6 => write!(f, "E6"),
            PolyName::E7 => write!(f, "E7"),
            PolyName::E8 => write!(f, "E8"),
        }
    }
}

/// A weighted-homogeneous sum of coordinate powers
/// f(Z) = Σⱼ cⱼ Zⱼ^{eⱼ} with f(λ^{w₀}Z₀, λ^{w₁}Z₁, λ^{w₂}Z₂) = λᵈ f(Z).
///
/// Per-variable weights are pinned by the homogeneity identity itself:
/// eⱼ·wⱼ = d for every j, so E7 (Z₀⁴+Z₁⁴+Z₂²) carries w = (1,1,2) with
/// d = 4 and E8 (Z₀⁶+Z₁³+Z₂²) carries w = (1,2,3) with d = 6.
#[derive(Debug, Clone, Copy)]
pub struct WeightedPolynomial {
    pub name: PolyName,
    pub coefficients: [f64; 3],
    pub exponents: [u32; 3],
    pub weights: [u32; 3],
    pub degree: u32,
    /// Euler class of the link as a circle bundle over its orbit curve.
    pub link_c1: i64,
}

impl WeightedPolynomial {
    pub fn by_name(name: PolyName) -> WeightedPolynomial {
        match name {
            PolyName::E6 => WeightedPolynomial {
                name,
                coefficients: [1.0; 3],
                exponents: [3, 3, 3],
                weights: [1, 1, 1],
                degree: 3,
                link_c1: -3,
            },
            PolyName::E7 => WeightedPolynomial {
                name,
                coefficients: [1.0; 3],
                exponents: [4, 4, 2],
                weights: [1, 1, 2],
                degree: 4,
                link_c1: -2,
            },
            PolyName::E8 => WeightedPolynomial {
                name,
                coefficients: [1.0; 3],
                exponents: [6, 3, 2],
                weights: [1, 2, 3],
                degree: 6,
                link_c1: -1,
            },
        }
    }

    pub fn eval<S: Real>(&self, z: &[Cx<S>; 3]) -> Cx<S> {
        let mut acc = Cx::zero();
        for j in 0..3 {
            acc = acc.add(z[j].powu(self.exponents[j]).scale(S::from_f64(self.coefficients[j])));
        }
        acc
    }

    /// Complex gradient (∂₀f, ∂₁f, ∂₂f).
    pub fn grad<S: Real>(&self, z: &[Cx<S>; 3]) -> [Cx<S>; 3] {
        std::array::from_fn(|j| {
            let e = self.exponents[j];
            z[j].powu(e - 1)
                .scale(S::from_f64(self.coefficients[j] * e as f64))
        })
    }

    /// Weighted action by a positive real scalar: Zⱼ ↦ λ^{wⱼ} Zⱼ.
    pub fn weighted_scale<S: Real>(&self, lambda: S, z: &[Cx<S>; 3]) -> [Cx<S>; 3] {
        std::array::from_fn(|j| {
            let mut s = S::one();
            for _ in 0..self.weights[j] {
                s = s * lambda;
            }
            z[j].scale(s)
        })
    }

    /// Weighted Hopf action: Zⱼ ↦ e^{i wⱼ t} Zⱼ; preserves ρ and maps
    /// F_w to F_{e^{i d t} w}.
    pub fn hopf<S: Real>(&self, t: S, z: &[Cx<S>; 3]) -> [Cx<S>; 3] {
        std::array::from_fn(|j| {
            let phase = Cx::unit(t * S::from_f64(self.weights[j] as f64));
            z[j].mul(phase)
        })
    }
}

/// A point of ℂ³ ≅ ℝ⁶ in coordinates (x₀, y₀, x₁, y₁, x₂, y₂), with the
/// Euclidean radius cached.
#[derive(Debug, Clone, Copy)]
pub struct AmbientPoint {
    pub coords: [f64; 6],
    pub rho: f64,
}

impl AmbientPoint {
    pub fn new(coords: [f64; 6]) -> AmbientPoint {
        let rho = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        AmbientPoint { coords, rho }
    }

    pub fn from_cx(z: &[C64; 3]) -> AmbientPoint {
        AmbientPoint::new([z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im])
    }

    pub fn to_cx(&self) -> [C64; 3] {
        let c = &self.coords;
        [
            Cx::new(c[0], c[1]),
            Cx::new(c[2], c[3]),
            Cx::new(c[4], c[5]),
        ]
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho * self.rho
    }

    pub fn dist(&self, o: &AmbientPoint) -> f64 {
        self.coords
            .iter()
            .zip(&o.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A point of the product end: a link base point together with τ.
#[derive(Debug, Clone, Copy)]
pub struct EndPoint {
    pub base: AmbientPoint,
    pub tau: f64,
}

impl EndPoint {
    pub fn new(poly: &WeightedPolynomial, base: AmbientPoint, tau: f64) -> Result<EndPoint> {
        let f = poly.eval(&base.to_cx()).abs();
        if f >= 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "end point base is not on the link: |f| = {f:e}"
            )));
        }
        if (base.rho - 1.0).abs() >= 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "end point base is not on the unit sphere: rho = {}",
                base.rho
            )));
        }
        Ok(EndPoint { base, tau })
    }
}

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITERS: usize = 50;

/// One complex-gradient Newton sweep toward f = w, generic over the scalar.
/// The fixed iteration count makes dual-number passes well defined.
pub fn project_fixed_iters<S: Real>(
    poly: &WeightedPolynomial,
    mut z: [Cx<S>; 3],
    w: Cx<S>,
    iters: usize,
) -> [Cx<S>; 3] {
    for _ in 0..iters {
        let fv = poly.eval(&z).sub(w);
        let g = poly.grad(&z);
        let gn2 = g[0].norm_sqr() + g[1].norm_sqr() + g[2].norm_sqr();
        // z ← z − (f − w)·conj(∇f)/|∇f|², the minimal-norm complex step
        let s = fv.scale(S::one() / gn2);
        for j in 0..3 {
            z[j] = z[j].sub(s.mul(g[j].conj()));
        }
    }
    z
}

/// Newton retraction onto the fiber F_w along the complex-gradient
/// direction; converges quadratically away from the origin.
///
/// The convergence tolerance is backward-error aware: at radius ρ the
/// monomials reach ρ^d and the attainable |f − w| floor is ~ε·Σ|zⱼ|^{eⱼ},
/// so a fixed absolute tolerance would spuriously diverge far out.
pub fn newton_project_to_fiber(
    poly: &WeightedPolynomial,
    z: &AmbientPoint,
    w: C64,
) -> Result<AmbientPoint> {
    let mut cur = z.to_cx();
    let g0 = poly.grad(&cur);
    let gnorm = (g0[0].norm_sqr() + g0[1].norm_sqr() + g0[2].norm_sqr()).sqrt();
    if gnorm <= 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "gradient too small for Newton projection: |grad f| = {gnorm:e}"
        )));
    }
    let mono_scale: f64 = (0..3)
        .map(|j| cur[j].abs().powi(poly.exponents[j] as i32))
        .sum::<f64>()
        + w.abs();
    let tol = NEWTON_TOL.max(100.0 * f64::EPSILON * mono_scale);
    for _ in 0..NEWTON_MAX_ITERS {
        let resid = poly.eval(&cur).sub(w).abs();
        if resid < tol {
            // one polishing step keeps idempotence at roundoff level
            cur = project_fixed_iters(poly, cur, w, 1);
            return Ok(AmbientPoint::from_cx(&cur));
        }
        cur = project_fixed_iters(poly, cur, w, 1);
    }
    let resid = poly.eval(&cur).sub(w).abs();
    if resid < tol {
        return Ok(AmbientPoint::from_cx(&cur));
    }
    Err(Error::NewtonDivergence {
        residual: resid,
        iterations: NEWTON_MAX_ITERS,
    })
}

/// Solve for the weighted scale λ > 0 placing `z` on the Euclidean sphere
/// of radius `rho_target`; strictly monotone in λ, Newton on log λ.
pub fn weighted_scale_to_radius(
    poly: &WeightedPolynomial,
    z: &[C64; 3],
    rho_target: f64,
) -> Result<(f64, [C64; 3])> {
    let a: [f64; 3] = std::array::from_fn(|j| z[j].norm_sqr());
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidParameter("cannot scale the origin".into()));
    }
    let target = rho_target * rho_target;
    let mut u = 0.0f64; // u = ln λ
    for _ in 0..80 {
        let mut val = 0.0;
        let mut der = 0.0;
        for j in 0..3 {
            let wj = 2.0 * poly.weights[j] as f64;
            let t = (wj * u).exp() * a[j];
            val += t;
            der += wj * t;
        }
        let step = (val.ln() - target.ln()) * val / der;
        u -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let lambda = u.exp();
    Ok((lambda, poly.weighted_scale(lambda, z)))
}

/// Generic-scalar version of the weighted scale solve, with a fixed Newton
/// sweep so dual passes through it stay well defined. The solve seeds from
/// the primal value and converges quadratically, so the dual parts carry
/// the exact derivative of λ(z).
pub fn weighted_scale_to_radius_generic<S: Real>(
    poly: &WeightedPolynomial,
    z: &[Cx<S>; 3],
    rho_target: f64,
) -> [Cx<S>; 3] {
    let a: [S; 3] = std::array::from_fn(|j| z[j].norm_sqr());
    let target_ln = S::from_f64((rho_target * rho_target).ln());
    let mut u = S::zero();
    for _ in 0..60 {
        let mut val = S::zero();
        let mut der = S::zero();
        for j in 0..3 {
            let wj = S::from_f64(2.0 * poly.weights[j] as f64);
            let t = (wj * u).exp() * a[j];
            val = val + t;
            der = der + wj * t;
        }
        u = u - (val.ln() - target_ln) * val / der;
    }
    let lambda = u.exp();
    std::array::from_fn(|j| {
        let mut s = S::one();
        for _ in 0..poly.weights[j] {
            s = s * lambda;
        }
        z[j].scale(s)
    })
}

/// Gauss–Newton projection onto {f = w} ∩ {ρ̄ = rho_bar}: three real
/// constraints, minimal-norm steps via the 3×3 normal equations.
pub fn project_to_fiber_sphere(
    poly: &WeightedPolynomial,
    z: &AmbientPoint,
    w: C64,
    rho_bar: f64,
) -> Result<AmbientPoint> {
    let mut p = z.coords;
    for _ in 0..60 {
        let zc = [
            Cx::new(p[0], p[1]),
            Cx::new(p[2], p[3]),
            Cx::new(p[4], p[5]),
        ];
        let fv = poly.eval(&zc).sub(w);
        let rb: f64 = p.iter().map(|c| c * c).sum();
        let r = [fv.re, fv.im, rb - rho_bar];
        let rn = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if rn < 1e-14 {
            return Ok(AmbientPoint::new(p));
        }
        let g = poly.grad(&zc);
        // rows: d(Re f), d(Im f), d(ρ̄) over the 6 real coordinates
        let mut jac = [[0.0f64; 6]; 3];
        for j in 0..3 {
            jac[0][2 * j] = g[j].re;
            jac[0][2 * j + 1] = -g[j].im;
            jac[1][2 * j] = g[j].im;
            jac[1][2 * j + 1] = g[j].re;
        }
        for i in 0..6 {
            jac[2][i] = 2.0 * p[i];
        }
        let mut jjt = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                jjt[i][k] = (0..6).map(|c| jac[i][c] * jac[k][c]).sum();
            }
        }
        let s = solve3(&jjt, &r).ok_or(Error::NewtonDivergence {
            residual: rn,
            iterations: 60,
        })?;
        for c in 0..6 {
            let delta: f64 = (0..3).map(|i| jac[i][c] * s[i]).sum();
            p[c] -= delta;
        }
    }
    let out = AmbientPoint::new(p);
    let resid = poly.eval(&out.to_cx()).sub(w).abs() + (out.rho_bar() - rho_bar).abs();
    if resid < 1e-12 {
        Ok(out)
    } else {
        Err(Error::NewtonDivergence {
            residual: resid,
            iterations: 60,
        })
    }
}

fn solve3(m: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let cof = |r1: usize, r2: usize, c1: usize, c2: usize| {
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    let x = [
        (b[0] * cof(1, 2, 1, 2) - b[1] * cof(0, 2, 1, 2) + b[2] * cof(0, 1, 1, 2)) * inv_det,
        (-(b[0] * cof(1, 2, 0, 2)) + b[1] * cof(0, 2, 0, 2) - b[2] * cof(0, 1, 0, 2)) * inv_det,
        (b[0] * cof(1, 2, 0, 1) - b[1] * cof(0, 2, 0, 1) + b[2] * cof(0, 1, 0, 1)) * inv_det,
    ];
    Some(x)
}

/// Hyperplane guard: the root-solve branch degenerates when the first two
/// monomials nearly cancel; such draws are rejected and resampled.
const BRANCH_GUARD: f64 = 1e-3;

/// Deterministic link sampling: draw (Z₀, Z₁), solve the last coordinate on
/// a seed-indexed root branch, weighted-normalize onto the unit sphere and
/// polish with Gauss–Newton.
pub fn sample_link(
    poly: &WeightedPolynomial,
    count: usize,
    seed: u64,
) -> Result<Vec<AmbientPoint>> {
    let mut rng = sample_rng(seed, &format!("milnor.sample_link.{}", poly.name));
    let mut out = Vec::with_capacity(count);
    let mut budget = 200usize * count.max(1);
    while out.len() < count {
        if budget == 0 {
            return Err(Error::SamplingFailure(format!(
                "link sampling retry budget exhausted after {} points",
                out.len()
            )));
        }
        budget -= 1;
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            Cx::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
        };
        let z0 = draw(&mut rng);
        let z1 = draw(&mut rng);
        let branch: u32 = rng.random_range(0..poly.exponents[2]);
        let rhs = poly.eval(&[z0, z1, Cx::zero()]);
        let rhs = Cx::new(-rhs.re, -rhs.im);
        if rhs.abs() < BRANCH_GUARD {
            continue;
        }
        // seed-indexed root branch of Z₂^{e₂} = rhs
        let e2 = poly.exponents[2] as f64;
        let r = rhs.abs().powf(1.0 / e2);
        let phi = (rhs.im.atan2(rhs.re) + 2.0 * std::f64::consts::PI * branch as f64) / e2;
        let z2 = Cx::new(r * phi.cos(), r * phi.sin());
        let z = [z0, z1, z2];
        let Ok((_, on_sphere)) = weighted_scale_to_radius(poly, &z, 1.0) else {
            continue;
        };
        let Ok(p) = project_to_fiber_sphere(poly, &AmbientPoint::from_cx(&on_sphere), Cx::zero(), 1.0)
        else {
            continue;
        };
        let f_res = poly.eval(&p.to_cx()).abs();
        if f_res < 1e-12 && (p.rho - 1.0).abs() < 1e-12 {
            out.push(p);
        }
    }
    Ok(out)
}

/// Ambient realization of a product-coordinate end point on F_{e^{iθ}}:
/// scale the base to radius e^{τ/2}, then retract onto the fiber.
pub fn end_to_ambient(
    poly: &WeightedPolynomial,
    e: &EndPoint,
    theta: f64,
    epsilon: f64,
) -> Result<AmbientPoint> {
    let tau_min = -(2.0 / 3.0) * epsilon.ln();
    if e.tau <= tau_min {
        return Err(Error::InvalidParameter(format!(
            "tau = {} is below the product-coordinate floor {tau_min}",
            e.tau
        )));
    }
    let rho = (e.tau / 2.0).exp();
    let (_, scaled) = weighted_scale_to_radius(poly, &e.base.to_cx(), rho)?;
    newton_project_to_fiber(poly, &AmbientPoint::from_cx(&scaled), Cx::unit(theta))
}

/// The weighted Hopf action on an ambient point.
pub fn hopf_action(poly: &WeightedPolynomial, t: f64, z: &AmbientPoint) -> AmbientPoint {
    AmbientPoint::from_cx(&poly.hopf(t, &z.to_cx()))
}

/// Real 6-gradient of arg∘f at `p`, from the analytic complex gradient.
pub fn arg_f_gradient(poly: &WeightedPolynomial, p: &[f64; 6]) -> [f64; 6] {
    let z = [
        Cx::new(p[0], p[1]),
        Cx::new(p[2], p[3]),
        Cx::new(p[4], p[5]),
    ];
    let f = poly.eval(&z);
    let g = poly.grad(&z);
    let n2 = f.norm_sqr();
    let mut out = [0.0f64; 6];
    for j in 0..3 {
        // ∂(arg f)/∂xⱼ = Im(conj f ∂ⱼf)/|f|², ∂/∂yⱼ = Re(conj f ∂ⱼf)/|f|²
        let cf = f.conj().mul(g[j]);
        out[2 * j] = cf.im / n2;
        out[2 * j + 1] = cf.re / n2;
    }
    out
}

/// Minimum norm over the sample band of the S⁵-tangential differential of
/// arg∘f; the Milnor fibration has no critical points there, so the norm
/// must stay above the configured floor.
pub fn milnor_regularity_check(
    poly: &WeightedPolynomial,
    band: (f64, f64),
    samples: usize,
    seed: u64,
    floor: f64,
) -> Result<VerificationReport> {
    let (lo, hi) = band;
    if lo <= 0.0 || hi <= lo {
        return Err(Error::InvalidParameter(format!(
            "regularity band ({lo}, {hi}) must exclude the origin and be ordered"
        )));
    }
    let bases = sample_link(poly, samples, seed)?;
    let mut rng = sample_rng(seed, &format!("milnor.regularity.{}", poly.name));
    let mut min_norm = f64::INFINITY;
    let mut used = 0usize;
    for base in &bases {
        // target |f| log-uniform inside the band, short of the outer edge
        let u: f64 = rng.random();
        let r = lo * ((0.98 * hi / lo).powf(u));
        let theta = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
        let Some(p) = band_point(poly, base, Cx::new(r * theta.cos(), r * theta.sin())) else {
            continue;
        };
        let fv = poly.eval(&p.to_cx()).abs();
        if fv <= 0.0 || fv > hi {
            continue;
        }
        let grad = arg_f_gradient(poly, &p.coords);
        // project onto the sphere's tangent space
        let radial: f64 = grad
            .iter()
            .zip(&p.coords)
            .map(|(g, c)| g * c)
            .sum::<f64>()
            / p.rho_bar();
        let mut norm2 = 0.0;
        for i in 0..6 {
            let t = grad[i] - radial * p.coords[i];
            norm2 += t * t;
        }
        min_norm = min_norm.min(norm2.sqrt());
        used += 1;
    }
    if used < samples / 2 {
        return Err(Error::SamplingFailure(format!(
            "regularity band sampling kept only {used}/{samples} points"
        )));
    }
    let mut report = VerificationReport::new(
        &format!("milnor.regularity.{}", poly.name),
        "the S5-tangential differential of arg(f) stays bounded away from zero on the tube band",
        used,
        0.0,
        1.0,
    );
    report.require(min_norm > floor, "min_norm_above_floor");
    report.note_f64("min_norm", min_norm);
    report.note_f64("floor", floor);
    report.note_f64("band_lo", lo);
    report.note_f64("band_hi", hi);
    Ok(report)
}

/// S⁵ point near the link with f-value ≈ target: retract, renormalize,
/// repeat; the final renormalization leaves |ρ−1| at roundoff and moves
/// |f| by a factor 1 + O(|target|).
fn band_point(poly: &WeightedPolynomial, base: &AmbientPoint, target: C64) -> Option<AmbientPoint> {
    let mut p = *base;
    for _ in 0..3 {
        p = newton_project_to_fiber(poly, &p, target).ok()?;
        let (_, scaled) = weighted_scale_to_radius(poly, &p.to_cx(), 1.0).ok()?;
        p = AmbientPoint::from_cx(&scaled);
    }
    Some(p)
}

/// Sup tubular displacement between the weighted-rescaled fiber band
/// and the cone band, for each rescaling factor; the graph function decays
/// like R^{-d}, so the log-log slope recovers −d.
pub fn convergence_law(
    poly: &WeightedPolynomial,
    radii: &[f64],
    samples: usize,
    seed: u64,
    slope_tol: f64,
) -> Result<VerificationReport> {
    let bases = sample_link(poly, samples, seed)?;
    let mut rng = sample_rng(seed, &format!("milnor.convergence.{}", poly.name));
    let band_top = std::f64::consts::PI.exp(); // cone band ρ ∈ [1, e^π]
    let mut base_pts = Vec::with_capacity(bases.len());
    for b in &bases {
        let rho = 1.0 + rng.random::<f64>() * (band_top - 1.0);
        let (_, scaled) = weighted_scale_to_radius(poly, &b.to_cx(), rho)?;
        base_pts.push(AmbientPoint::from_cx(&scaled));
    }
    let mut sups = Vec::with_capacity(radii.len());
    for &r in radii {
        let w = Cx::new(r.powi(-(poly.degree as i32)), 0.0);
        let mut sup = 0.0f64;
        for p in &base_pts {
            let q = newton_project_to_fiber(poly, p, w)?;
            sup = sup.max(q.dist(p));
        }
        sups.push(sup);
    }
    let monotone = sups.windows(2).all(|w| w[1] < w[0]);
    let slope = log_log_slope(radii, &sups);
    let expected = -(poly.degree as f64);
    let mut report = VerificationReport::new(
        &format!("milnor.convergence.{}", poly.name),
        "sup tubular displacement of the rescaled unit-value fiber band from the cone band decays with log-log slope -d",
        samples,
        (slope - expected).abs(),
        slope_tol,
    );
    report.require(monotone, "monotone_decrease");
    report.note_f64("slope", slope);
    report.note_f64("expected_slope", expected);
    for (r, s) in radii.iter().zip(&sups) {
        report.note_f64(&format!("sup_displacement_r{r}"), *s);
    }
    Ok(report)
}

pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
