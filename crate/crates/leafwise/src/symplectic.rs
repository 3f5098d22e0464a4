//! The convex symplectic structure of ℂ³ and of the fibers: the standard
//! form β* = 2Σ dxⱼ∧dyⱼ with primitive λ* = Σ(xⱼdyⱼ − yⱼdxⱼ), fiber
//! frames, the Liouville field and its symplectization flow, and the
//! cutoff re-embedding that interpolates a fiber band into the cone.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{
    smooth_step, Chart, DifferentialForm, Domain, Dual, IndexSet, Real, ScalarField, TangentVector,
};
use crate::milnor::{
    newton_project_to_fiber, project_fixed_iters, sample_link, weighted_scale_to_radius,
    AmbientPoint, Cx, WeightedPolynomial, C64,
};
use crate::report::VerificationReport;
use crate::suite::{sample_rng, uniform_in};

/// ℂ³ ≅ ℝ⁶ in coordinates (x₀, y₀, x₁, y₁, x₂, y₂).
pub fn ambient_chart() -> Chart {
    Chart::new("ambient6", &["x0", "y0", "x1", "y1", "x2", "y2"], Domain::All)
        .expect("ambient chart is well-formed")
}

/// β* = 2(dx₀∧dy₀ + dx₁∧dy₁ + dx₂∧dy₂).
pub fn beta_star(chart: &Chart) -> DifferentialForm {
    let mut f = DifferentialForm::zero(chart, 2);
    for j in 0..3 {
        f.set_coefficient(
            IndexSet::from_indices(&[2 * j, 2 * j + 1]).expect("pair"),
            ScalarField::constant(chart, 2.0),
        );
    }
    f
}

/// λ* = Σⱼ (xⱼ dyⱼ − yⱼ dxⱼ); dλ* = β*.
pub fn lambda_star(chart: &Chart) -> DifferentialForm {
    let mut f = DifferentialForm::zero(chart, 1);
    for j in 0..3 {
        f.set_coefficient(
            IndexSet::from_indices(&[2 * j + 1]).expect("dy"),
            ScalarField::coord(chart, 2 * j),
        );
        f.set_coefficient(
            IndexSet::from_indices(&[2 * j]).expect("dx"),
            ScalarField::coord(chart, 2 * j + 1).scale(-1.0),
        );
    }
    f
}

/// λ* on a raw tangent direction: Σ Im(conj(zⱼ)·vⱼ).
pub fn lambda_star_value<S: Real>(z: &[Cx<S>; 3], v: &[Cx<S>; 3]) -> S {
    let mut acc = S::zero();
    for j in 0..3 {
        acc = acc + z[j].conj().mul(v[j]).im;
    }
    acc
}

/// β* on raw tangent directions: 2 Σ Im(conj(uⱼ)·vⱼ).
pub fn beta_star_value<S: Real>(u: &[Cx<S>; 3], v: &[Cx<S>; 3]) -> S {
    let mut acc = S::zero();
    for j in 0..3 {
        acc = acc + u[j].conj().mul(v[j]).im;
    }
    acc + acc
}

/// The ambient Liouville field X = ½ Σ (xⱼ∂xⱼ + yⱼ∂yⱼ), the unique field
/// with ι_X β* = λ*; satisfies X·ρ̄ = ρ̄.
pub fn liouville_field(z: &AmbientPoint) -> Result<TangentVector> {
    if z.rho == 0.0 {
        return Err(Error::InvalidParameter(
            "the Liouville field check excludes the origin".into(),
        ));
    }
    let chart = ambient_chart();
    let components: Vec<f64> = z.coords.iter().map(|c| 0.5 * c).collect();
    TangentVector::new(&chart, &z.coords, &components)
}

/// Tangential part of the ambient Liouville field along a fiber: the
/// Hermitian projection of z/2 onto ker df. On a complex submanifold of
/// Kähler ℂ³ the symplectic and metric orthogonals of the tangent space
/// agree, so this is exactly the Liouville field of the restricted form.
pub fn tangent_liouville<S: Real>(poly: &WeightedPolynomial, z: &[Cx<S>; 3]) -> [Cx<S>; 3] {
    let half = S::from_f64(0.5);
    let x: [Cx<S>; 3] = std::array::from_fn(|j| z[j].scale(half));
    let g = poly.grad(z);
    let gn2 = g[0].norm_sqr() + g[1].norm_sqr() + g[2].norm_sqr();
    // df(x) = Σ ∂ⱼf xⱼ; the normal direction is conj(∇f)
    let mut dfx = Cx::zero();
    for j in 0..3 {
        dfx = dfx.add(g[j].mul(x[j]));
    }
    let s = dfx.scale(S::one() / gn2);
    std::array::from_fn(|j| x[j].sub(s.mul(g[j].conj())))
}

/// Four orthonormal real vectors spanning the tangent space of a fiber,
/// J-adapted (u, Ju, u′, Ju′) so the induced orientation is the complex one.
#[derive(Debug, Clone)]
pub struct FiberFrame {
    pub base: AmbientPoint,
    pub vectors: [[f64; 6]; 4],
}

fn cx_to_real6(v: &[C64; 3]) -> [f64; 6] {
    [v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im]
}

fn real6_to_cx(v: &[f64; 6]) -> [C64; 3] {
    [
        Cx::new(v[0], v[1]),
        Cx::new(v[2], v[3]),
        Cx::new(v[4], v[5]),
    ]
}

impl FiberFrame {
    /// Complex Gram–Schmidt on the projected coordinate frame, deterministic
    /// column order; candidates that lose too much norm are skipped.
    pub fn at(poly: &WeightedPolynomial, base: &AmbientPoint) -> Result<FiberFrame> {
        let z = base.to_cx();
        let g = poly.grad(&z);
        let gn = (g[0].norm_sqr() + g[1].norm_sqr() + g[2].norm_sqr()).sqrt();
        if gn <= 1e-8 {
            return Err(Error::InvalidParameter(
                "gradient vanishes; no fiber frame at this point".into(),
            ));
        }
        let n: [C64; 3] = std::array::from_fn(|j| g[j].conj().scale(1.0 / gn));
        let mut picked: Vec<[C64; 3]> = Vec::with_capacity(2);
        for axis in 0..3 {
            if picked.len() == 2 {
                break;
            }
            let mut v: [C64; 3] = [Cx::zero(); 3];
            v[axis] = Cx::one();
            // remove the complex normal component, then earlier columns;
            // a second pass refines away the cancellation error that a
            // small surviving norm would otherwise amplify
            for _ in 0..2 {
                let hn = hermitian_dot(&v, &n);
                for j in 0..3 {
                    v[j] = v[j].sub(hn.mul(n[j]));
                }
                for u in &picked {
                    let hu = hermitian_dot(&v, u);
                    for j in 0..3 {
                        v[j] = v[j].sub(hu.mul(u[j]));
                    }
                }
            }
            let norm = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
            if norm < 1e-4 {
                continue;
            }
            for j in 0..3 {
                v[j] = v[j].scale(1.0 / norm);
            }
            picked.push(v);
        }
        if picked.len() < 2 {
            return Err(Error::IllConditionedFrame { cond: f64::INFINITY });
        }
        let ju = |u: &[C64; 3]| -> [C64; 3] { std::array::from_fn(|j| u[j].mul(Cx::new(0.0, 1.0))) };
        let vectors = [
            cx_to_real6(&picked[0]),
            cx_to_real6(&ju(&picked[0])),
            cx_to_real6(&picked[1]),
            cx_to_real6(&ju(&picked[1])),
        ];
        let frame = FiberFrame {
            base: *base,
            vectors,
        };
        frame.validate(poly)?;
        Ok(frame)
    }

    /// Explicit constructor, enforcing the tangency and Gram invariants.
    pub fn from_vectors(
        poly: &WeightedPolynomial,
        base: &AmbientPoint,
        vectors: [[f64; 6]; 4],
    ) -> Result<FiberFrame> {
        let frame = FiberFrame {
            base: *base,
            vectors,
        };
        frame.validate(poly)?;
        Ok(frame)
    }

    pub fn validate(&self, poly: &WeightedPolynomial) -> Result<()> {
        let z = self.base.to_cx();
        let g = poly.grad(&z);
        for v in &self.vectors {
            let vc = real6_to_cx(v);
            let mut df = Cx::zero();
            for j in 0..3 {
                df = df.add(g[j].mul(vc[j]));
            }
            if df.abs() >= 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "frame vector is not tangent to the fiber: |df(v)| = {:e}",
                    df.abs()
                )));
            }
        }
        for i in 0..4 {
            for k in i..4 {
                let dot: f64 = self.vectors[i]
                    .iter()
                    .zip(&self.vectors[k])
                    .map(|(a, b)| a * b)
                    .sum();
                let expect = if i == k { 1.0 } else { 0.0 };
                if (dot - expect).abs() >= 1e-10 {
                    return Err(Error::IllConditionedFrame {
                        cond: (dot - expect).abs(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn vectors_cx(&self) -> [[C64; 3]; 4] {
        std::array::from_fn(|i| real6_to_cx(&self.vectors[i]))
    }
}

fn hermitian_dot(a: &[C64; 3], b: &[C64; 3]) -> C64 {
    let mut acc = Cx::zero();
    for j in 0..3 {
        acc = acc.add(a[j].mul(b[j].conj()));
    }
    acc
}

/// Gram matrix of a 2-form on a fiber frame; its Pfaffian certifies
/// symplecticity of the restriction at the base point.
pub fn restrict_to_fiber(
    form: &DifferentialForm,
    frame: &FiberFrame,
) -> Result<[[f64; 4]; 4]> {
    if form.degree() != 2 {
        return Err(Error::DegreeRange {
            degree: form.degree(),
            dim: form.chart().dim(),
        });
    }
    let mut m = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            let v = form.evaluate_on_rows(
                &frame.base.coords,
                &[&frame.vectors[i], &frame.vectors[j]],
            );
            m[i][j] = v;
            m[j][i] = -v;
        }
    }
    Ok(m)
}

pub fn pfaffian_4x4(m: &[[f64; 4]; 4]) -> f64 {
    m[0][1] * m[2][3] - m[0][2] * m[1][3] + m[0][3] * m[1][2]
}

/// ι_X β* = λ* and X·ρ̄ = ρ̄ at sampled points, through the form engine.
pub fn liouville_identity_check(samples: usize, seed: u64) -> Result<VerificationReport> {
    let chart = ambient_chart();
    let beta = beta_star(&chart);
    let lambda = lambda_star(&chart);
    let mut rng = sample_rng(seed, "symplectic.liouville");
    let mut max_resid: f64 = 0.0;
    let mut max_radial: f64 = 0.0;
    let mut n = 0usize;
    while n < samples {
        let coords: Vec<f64> = (0..6).map(|_| uniform_in(&mut rng, -2.0, 2.0)).collect();
        let p = AmbientPoint::new(coords.clone().try_into().expect("six coordinates"));
        if p.rho < 0.1 {
            continue;
        }
        n += 1;
        let x = liouville_field(&p)?;
        for i in 0..6 {
            let e = TangentVector::coordinate(&chart, &coords, i)?;
            let contraction = beta.evaluate(&[x.clone(), e.clone()])?;
            let reference = lambda.evaluate(&[e])?;
            max_resid = max_resid.max((contraction - reference).abs());
        }
        // X·ρ̄ = ρ̄: the radial derivative of ρ̄ along X
        let x_rho: f64 = p.coords.iter().zip(&x.components).map(|(c, v)| 2.0 * c * v).sum();
        max_radial = max_radial.max((x_rho - p.rho_bar()).abs() / p.rho_bar());
    }
    let mut report = VerificationReport::new(
        "symplectic.liouville",
        "contraction of beta* with the radial half-Euler field reproduces lambda*, and X.rhobar = rhobar",
        samples,
        max_resid,
        1e-12,
    );
    report.note_f64("max_radial_relative_error", max_radial);
    report.require(max_radial < 1e-12, "radial_derivative");
    Ok(report)
}

/// Deterministic base points on F₁ ∩ {ρ̄ = ρ̄*}.
pub fn sample_fiber_sphere(
    poly: &WeightedPolynomial,
    rho_bar_star: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<AmbientPoint>> {
    let links = sample_link(poly, count, seed)?;
    let mut out = Vec::with_capacity(count);
    for p in links {
        let (_, scaled) = weighted_scale_to_radius(poly, &p.to_cx(), rho_bar_star.sqrt())?;
        let q = crate::milnor::project_to_fiber_sphere(
            poly,
            &AmbientPoint::from_cx(&scaled),
            Cx::one(),
            rho_bar_star,
        )?;
        out.push(q);
    }
    Ok(out)
}

struct FlowState {
    z: [C64; 3],
    frame: [[C64; 3]; 4],
}

fn flow_rhs(poly: &WeightedPolynomial, s: &FlowState) -> FlowState {
    let xdot = tangent_liouville(poly, &s.z);
    let frame = std::array::from_fn(|i| {
        // DX(z)·v by one dual pass through the tangential Liouville field
        let v = &s.frame[i];
        let zd: [Cx<Dual<f64>>; 3] = std::array::from_fn(|j| {
            Cx::new(
                Dual::new(s.z[j].re, v[j].re),
                Dual::new(s.z[j].im, v[j].im),
            )
        });
        let out = tangent_liouville(poly, &zd);
        std::array::from_fn(|j| Cx::new(out[j].re.eps, out[j].im.eps))
    });
    FlowState {
        z: xdot,
        frame,
    }
}

fn state_axpy(s: &FlowState, k: &FlowState, h: f64) -> FlowState {
    FlowState {
        z: std::array::from_fn(|j| s.z[j].add(k.z[j].scale(h))),
        frame: std::array::from_fn(|i| std::array::from_fn(|j| s.frame[i][j].add(k.frame[i][j].scale(h)))),
    }
}

fn rk4_step(poly: &WeightedPolynomial, s: &FlowState, h: f64) -> FlowState {
    let k1 = flow_rhs(poly, s);
    let k2 = flow_rhs(poly, &state_axpy(s, &k1, h / 2.0));
    let k3 = flow_rhs(poly, &state_axpy(s, &k2, h / 2.0));
    let k4 = flow_rhs(poly, &state_axpy(s, &k3, h));
    let mut out = state_axpy(s, &k1, h / 6.0);
    out = state_axpy(&out, &k2, h / 3.0);
    out = state_axpy(&out, &k3, h / 3.0);
    state_axpy(&out, &k4, h / 6.0)
}

#[derive(Debug, Clone, Copy)]
pub struct FlowDiagnostics {
    pub routine_reprojections: usize,
    pub drift_reprojections: usize,
}

/// Flow a fiber point and its tangent frame for time T along the tangential
/// Liouville field; the fiber constraint is polished every
/// `reproject_every` steps and whenever |f − 1| drifts past 1e−8.
fn flow_with_frame(
    poly: &WeightedPolynomial,
    start: &AmbientPoint,
    frame: &FiberFrame,
    time: f64,
    step: f64,
    reproject_every: usize,
    diag: &mut FlowDiagnostics,
) -> Result<FlowState> {
    let mut s = FlowState {
        z: start.to_cx(),
        frame: frame.vectors_cx(),
    };
    let n_steps = (time.abs() / step).round().max(1.0) as usize;
    let h = time / n_steps as f64;
    for i in 0..n_steps {
        s = rk4_step(poly, &s, h);
        let drift = poly.eval(&s.z).sub(Cx::one()).abs();
        if drift > 1e-8 {
            s.z = newton_project_to_fiber(poly, &AmbientPoint::from_cx(&s.z), Cx::one())?.to_cx();
            diag.drift_reprojections += 1;
        } else if reproject_every > 0 && (i + 1) % reproject_every == 0 {
            s.z = project_fixed_iters(poly, s.z, Cx::one(), 2);
            diag.routine_reprojections += 1;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct SymplectizationOutcome {
    pub max_rel_err: f64,
    pub max_transport_err: f64,
    pub diagnostics: FlowDiagnostics,
}

/// Flow base points of M = F₁ ∩ {ρ̄ = ρ̄*} for time log ϱ and test
/// Ψ*λ* = ϱ·(λ*|_M) on transported frames, plus Ψ*(ϱ∂ϱ) = X by a
/// central difference in log ϱ at the endpoint.
pub fn symplectization_identification(
    poly: &WeightedPolynomial,
    rho_bar_star: f64,
    varrho: f64,
    base_points: usize,
    step: f64,
    reproject_every: usize,
    seed: u64,
) -> Result<SymplectizationOutcome> {
    symplectization_identification_scaled(
        poly,
        rho_bar_star,
        varrho,
        base_points,
        step,
        reproject_every,
        seed,
        1.0,
    )
}

/// Same check with the integrated field scaled by `field_scale`. A scale
/// of 1 is the true flow; any other value breaks the rescaling identity by
/// roughly `|scale − 1|·log(varrho)` and exists for fault-injection tests.
#[allow(clippy::too_many_arguments)]
pub fn symplectization_identification_scaled(
    poly: &WeightedPolynomial,
    rho_bar_star: f64,
    varrho: f64,
    base_points: usize,
    step: f64,
    reproject_every: usize,
    seed: u64,
    field_scale: f64,
) -> Result<SymplectizationOutcome> {
    if rho_bar_star <= 1.0 {
        return Err(Error::InvalidParameter(
            "rho_bar_star must exceed 1".into(),
        ));
    }
    let bases = sample_fiber_sphere(poly, rho_bar_star, base_points, seed)?;
    let time = varrho.ln() * field_scale;
    let mut diag = FlowDiagnostics {
        routine_reprojections: 0,
        drift_reprojections: 0,
    };
    let mut max_rel: f64 = 0.0;
    let mut max_transport: f64 = 0.0;
    for p in &bases {
        let frame = FiberFrame::at(poly, p)?;
        let end = flow_with_frame(poly, p, &frame, time, step, reproject_every, &mut diag)?;
        let z0 = p.to_cx();
        for (i, v0) in frame.vectors_cx().iter().enumerate() {
            let lhs = lambda_star_value(&end.z, &end.frame[i]);
            let rhs = varrho * lambda_star_value(&z0, v0);
            let rel = (lhs - rhs).abs() / rhs.abs().max(1.0);
            max_rel = max_rel.max(rel);
        }
        // central difference of the trajectory in s = log ϱ at the endpoint
        let delta = 1e-4;
        let plus = rk4_step(poly, &end, delta);
        let minus = rk4_step(poly, &end, -delta);
        let x_end = tangent_liouville(poly, &end.z);
        let mut scale = 0.0f64;
        let mut err = 0.0f64;
        for j in 0..3 {
            let d = plus.z[j].sub(minus.z[j]).scale(1.0 / (2.0 * delta));
            err = err.max(d.sub(x_end[j]).abs());
            scale = scale.max(x_end[j].abs());
        }
        max_transport = max_transport.max(err / scale.max(1.0));
    }
    Ok(SymplectizationOutcome {
        max_rel_err: max_rel,
        max_transport_err: max_transport,
        diagnostics: diag,
    })
}

/// Identity error at a coarse step and at half that step; fourth-order
/// integration means halving must shrink the error at least eightfold.
pub fn symplectization_order_check(
    poly: &WeightedPolynomial,
    rho_bar_star: f64,
    varrho: f64,
    base_points: usize,
    coarse_step: f64,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let coarse = symplectization_identification(
        poly,
        rho_bar_star,
        varrho,
        base_points,
        coarse_step,
        0,
        seed,
    )?;
    let fine = symplectization_identification(
        poly,
        rho_bar_star,
        varrho,
        base_points,
        coarse_step / 2.0,
        0,
        seed,
    )?;
    let ratio = coarse.max_rel_err / fine.max_rel_err.max(1e-300);
    Ok((coarse.max_rel_err, fine.max_rel_err, ratio))
}

/// C⁰/C¹ distance of the rescaled pulled-back contact data of
/// F₁ ∩ {ρ̄ = ρ̄*} from the link's contact data, per ladder entry. The
/// sequence must not increase as ρ̄* grows.
pub fn contact_closeness(
    poly: &WeightedPolynomial,
    ladder: &[f64],
    base_points: usize,
    seed: u64,
) -> Result<Vec<(f64, f64, f64)>> {
    let links = sample_link(poly, base_points, seed)?;
    let mut out = Vec::with_capacity(ladder.len());
    for &rbs in ladder {
        let mut c0: f64 = 0.0;
        let mut c1: f64 = 0.0;
        for p in &links {
            let frame = link_tangent_frame(poly, p)?;
            // transport the frame through the graph identification by a
            // dual pass: scale to the sphere of ρ̄*, then project onto
            // {f = 1, ρ̄ = ρ̄*}
            let mut moved: Vec<[Cx<Dual<f64>>; 3]> = Vec::with_capacity(3);
            let mut moved_base: Option<[C64; 3]> = None;
            for v in &frame {
                let zd: [Cx<Dual<f64>>; 3] = std::array::from_fn(|j| {
                    Cx::new(
                        Dual::new(p.coords[2 * j], v[2 * j]),
                        Dual::new(p.coords[2 * j + 1], v[2 * j + 1]),
                    )
                });
                let img = graph_identification(poly, &zd, rbs);
                moved_base = Some(std::array::from_fn(|j| img[j].primal()));
                moved.push(img);
            }
            let zi = moved_base.expect("at least one frame vector");
            let vi: Vec<[C64; 3]> = moved
                .iter()
                .map(|m| std::array::from_fn(|j| Cx::new(m[j].re.eps, m[j].im.eps)))
                .collect();
            let z0 = p.to_cx();
            let v0: Vec<[C64; 3]> = frame.iter().map(real6_to_cx).collect();
            for i in 0..3 {
                let lhs = lambda_star_value(&zi, &vi[i]) / rbs;
                let rhs = lambda_star_value(&z0, &v0[i]);
                c0 = c0.max((lhs - rhs).abs());
                for k in i + 1..3 {
                    let lb = beta_star_value(&vi[i], &vi[k]) / rbs;
                    let rb = beta_star_value(&v0[i], &v0[k]);
                    c1 = c1.max((lb - rb).abs());
                }
            }
        }
        out.push((rbs, c0, c1));
    }
    Ok(out)
}

/// Scale toward radius sqrt(ρ̄*), then Gauss–Newton onto {f = 1, ρ̄ = ρ̄*};
/// fixed iteration counts keep the dual pass well defined.
fn graph_identification<S: Real>(
    poly: &WeightedPolynomial,
    z: &[Cx<S>; 3],
    rho_bar_star: f64,
) -> [Cx<S>; 3] {
    let mut cur = crate::milnor::weighted_scale_to_radius_generic(poly, z, rho_bar_star.sqrt());
    // Gauss–Newton with the 3×3 normal equations, generic scalar
    for _ in 0..40 {
        let fv = poly.eval(&cur).sub(Cx::one());
        let mut rb = S::zero();
        for j in 0..3 {
            rb = rb + cur[j].norm_sqr();
        }
        let resid = [fv.re, fv.im, rb - S::from_f64(rho_bar_star)];
        let g = poly.grad(&cur);
        let mut jac = [[S::zero(); 6]; 3];
        for j in 0..3 {
            jac[0][2 * j] = g[j].re;
            jac[0][2 * j + 1] = -g[j].im;
            jac[1][2 * j] = g[j].im;
            jac[1][2 * j + 1] = g[j].re;
            jac[2][2 * j] = cur[j].re + cur[j].re;
            jac[2][2 * j + 1] = cur[j].im + cur[j].im;
        }
        let mut jjt = [[S::zero(); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = S::zero();
                for c in 0..6 {
                    acc = acc + jac[a][c] * jac[b][c];
                }
                jjt[a][b] = acc;
            }
        }
        let sol = solve3_generic(&jjt, &resid);
        let mut delta = [S::zero(); 6];
        for c in 0..6 {
            let mut acc = S::zero();
            for a in 0..3 {
                acc = acc + jac[a][c] * sol[a];
            }
            delta[c] = acc;
        }
        for j in 0..3 {
            cur[j] = Cx::new(cur[j].re - delta[2 * j], cur[j].im - delta[2 * j + 1]);
        }
    }
    cur
}

fn solve3_generic<S: Real>(m: &[[S; 3]; 3], b: &[S; 3]) -> [S; 3] {
    let cof = |r1: usize, r2: usize, c1: usize, c2: usize| {
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    let inv = S::one() / det;
    [
        (b[0] * cof(1, 2, 1, 2) - b[1] * cof(0, 2, 1, 2) + b[2] * cof(0, 1, 1, 2)) * inv,
        (-(b[0] * cof(1, 2, 0, 2)) + b[1] * cof(0, 2, 0, 2) - b[2] * cof(0, 1, 0, 2)) * inv,
        (b[0] * cof(1, 2, 0, 1) - b[1] * cof(0, 2, 0, 1) + b[2] * cof(0, 1, 0, 1)) * inv,
    ]
}

/// Orthonormal 3-frame tangent to the link (ker df ∩ ker dρ̄).
fn link_tangent_frame(poly: &WeightedPolynomial, p: &AmbientPoint) -> Result<Vec<[f64; 6]>> {
    let z = p.to_cx();
    let g = poly.grad(&z);
    let mut constraints: Vec<[f64; 6]> = Vec::with_capacity(3);
    let mut row_re = [0.0; 6];
    let mut row_im = [0.0; 6];
    for j in 0..3 {
        row_re[2 * j] = g[j].re;
        row_re[2 * j + 1] = -g[j].im;
        row_im[2 * j] = g[j].im;
        row_im[2 * j + 1] = g[j].re;
    }
    constraints.push(row_re);
    constraints.push(row_im);
    constraints.push(std::array::from_fn(|i| 2.0 * p.coords[i]));
    orthonormalize(&mut constraints, 1e-10)?;
    let mut frame = Vec::with_capacity(3);
    for axis in 0..6 {
        if frame.len() == 3 {
            break;
        }
        let mut v = [0.0f64; 6];
        v[axis] = 1.0;
        for c in constraints.iter().chain(frame.iter()) {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            for i in 0..6 {
                v[i] -= d * c[i];
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-4 {
            continue;
        }
        for x in &mut v {
            *x /= norm;
        }
        frame.push(v);
    }
    if frame.len() < 3 {
        return Err(Error::IllConditionedFrame { cond: f64::INFINITY });
    }
    Ok(frame)
}

fn orthonormalize(rows: &mut Vec<[f64; 6]>, tol: f64) -> Result<()> {
    let mut out: Vec<[f64; 6]> = Vec::with_capacity(rows.len());
    for r in rows.iter() {
        let mut v = *r;
        for u in &out {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for i in 0..6 {
                v[i] -= d * u[i];
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < tol {
            return Err(Error::IllConditionedFrame { cond: 1.0 / norm });
        }
        for x in &mut v {
            *x /= norm;
        }
        out.push(v);
    }
    *rows = out;
    Ok(())
}

// ---------------------------------------------------------------------------
// Re-embedding: interpolate the fiber band into the cone with one cutoff.
// ---------------------------------------------------------------------------

/// Which of the three defining formulas applies at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    Identity,
    Interpolation,
    Projection,
}

/// The cutoff re-embedding at scale R: a point Z of the fiber band is
/// retracted onto the fiber of value ψ(ρ(Z)/R)·f(Z), where ψ descends from
/// 1 to 0 across [2, 3] of the rescaled radius. Where ψ ≡ 1 this is the
/// identity and where ψ ≡ 0 it is the retraction onto the cone, so the
/// piece overlaps agree by construction.
#[derive(Debug, Clone)]
pub struct Reembedding {
    pub poly: WeightedPolynomial,
    pub r: f64,
    pub psi_lo: f64,
    pub psi_hi: f64,
}

impl Reembedding {
    pub fn new(poly: WeightedPolynomial, r: f64) -> Reembedding {
        Reembedding {
            poly,
            r,
            psi_lo: 2.0,
            psi_hi: 3.0,
        }
    }

    fn psi<S: Real>(&self, rho_scaled: S) -> S {
        let t = (rho_scaled - S::from_f64(self.psi_lo))
            / S::from_f64(self.psi_hi - self.psi_lo);
        S::one() - smooth_step(t)
    }

    pub fn piece(&self, z: &AmbientPoint) -> Piece {
        let l = z.rho / self.r;
        if l <= self.psi_lo {
            Piece::Identity
        } else if l >= self.psi_hi {
            Piece::Projection
        } else {
            Piece::Interpolation
        }
    }

    /// Target value of the retraction: ψ(ρ(z)/R)·f(z), read off the
    /// starting point and held fixed during the Newton sweep.
    pub fn target<S: Real>(&self, z: &[Cx<S>; 3]) -> Cx<S> {
        let mut rho2 = S::zero();
        for j in 0..3 {
            rho2 = rho2 + z[j].norm_sqr();
        }
        let rho_scaled = rho2.sqrt() / S::from_f64(self.r);
        self.poly.eval(z).scale(self.psi(rho_scaled))
    }

    pub fn apply_generic<S: Real>(&self, z: &[Cx<S>; 3], iters: usize) -> [Cx<S>; 3] {
        project_fixed_iters(&self.poly, *z, self.target(z), iters)
    }

    pub fn apply(&self, z: &AmbientPoint) -> Result<AmbientPoint> {
        let zc = z.to_cx();
        let target = self.target(&zc);
        let out = project_fixed_iters(&self.poly, zc, target, 24);
        let p = AmbientPoint::from_cx(&out);
        // the fixed sweep must have converged onto the target fiber; the
        // attainable floor scales with the monomial magnitudes
        let resid = self.poly.eval(&out).sub(target).abs();
        let mono_scale: f64 = (0..3)
            .map(|j| out[j].abs().powi(self.poly.exponents[j] as i32))
            .sum();
        let tol = 1e-12f64.max(100.0 * f64::EPSILON * mono_scale);
        if resid > tol {
            return Err(Error::NewtonDivergence {
                residual: resid,
                iterations: 24,
            });
        }
        Ok(p)
    }
}

#[derive(Debug, Clone)]
pub struct ReembeddingCertificate {
    pub r: f64,
    pub sup_graph_height: f64,
    pub min_pfaffian: f64,
    pub max_overlap_mismatch: f64,
    pub max_equivariance_err: f64,
    pub failing_sample: Option<[f64; 6]>,
}

/// Sample the fiber band, apply the re-embedding and certify: piece
/// agreement on overlaps, positive restricted Pfaffian (frames transported
/// by a dual pass), and ℤ/d Hopf equivariance.
pub fn certify_reembedding(
    poly: &WeightedPolynomial,
    r: f64,
    samples: usize,
    seed: u64,
    graph_height_threshold: f64,
) -> Result<ReembeddingCertificate> {
    let emb = Reembedding::new(*poly, r);
    let links = sample_link(poly, samples, seed)?;
    let mut rng = sample_rng(seed, "symplectic.reembed.band");
    let band_top = std::f64::consts::PI.exp();
    let mut sup_height: f64 = 0.0;
    let mut min_pf = f64::INFINITY;
    let mut max_overlap: f64 = 0.0;
    let mut max_equiv: f64 = 0.0;
    let mut failing: Option<[f64; 6]> = None;
    let hopf_t = 2.0 * std::f64::consts::PI / poly.degree as f64;

    // graph-height precondition, measured on the rescaled unit band
    let w0 = r.powi(-(poly.degree as i32));
    for p in links.iter().take(samples.min(200)) {
        let rho = 1.0 + rng.random::<f64>() * (band_top - 1.0);
        let (_, scaled) = weighted_scale_to_radius(poly, &p.to_cx(), rho)?;
        let base = AmbientPoint::from_cx(&scaled);
        let lifted = newton_project_to_fiber(poly, &base, Cx::new(w0, 0.0))?;
        sup_height = sup_height.max(lifted.dist(&base));
    }
    if sup_height >= graph_height_threshold {
        return Err(Error::ConstructionFailure(format!(
            "scale R = {r} leaves graph height {sup_height:e} above the threshold {graph_height_threshold:e}"
        )));
    }

    for p in &links {
        // fiber-band point at a radius spanning all three pieces
        let rho = r * (1.0 + rng.random::<f64>() * (band_top - 1.0));
        let (_, scaled) = weighted_scale_to_radius(poly, &p.to_cx(), rho)?;
        let z = newton_project_to_fiber(poly, &AmbientPoint::from_cx(&scaled), Cx::one())?;
        let image = emb.apply(&z)?;

        match emb.piece(&z) {
            Piece::Identity => {
                max_overlap = max_overlap.max(image.dist(&z));
            }
            Piece::Projection => {
                let down = newton_project_to_fiber(poly, &z, Cx::zero())?;
                max_overlap = max_overlap.max(image.dist(&down));
            }
            Piece::Interpolation => {}
        }

        // restricted Pfaffian on the transported fiber frame
        let frame = FiberFrame::at(poly, &z)?;
        let mut m = [[0.0f64; 4]; 4];
        let mut pushed: Vec<[C64; 3]> = Vec::with_capacity(4);
        for v in frame.vectors.iter() {
            let zd: [Cx<Dual<f64>>; 3] = std::array::from_fn(|j| {
                Cx::new(
                    Dual::new(z.coords[2 * j], v[2 * j]),
                    Dual::new(z.coords[2 * j + 1], v[2 * j + 1]),
                )
            });
            let out = emb.apply_generic(&zd, 26);
            pushed.push(std::array::from_fn(|j| Cx::new(out[j].re.eps, out[j].im.eps)));
        }
        for i in 0..4 {
            for k in i + 1..4 {
                let v = beta_star_value(&pushed[i], &pushed[k]);
                m[i][k] = v;
                m[k][i] = -v;
            }
        }
        let pf = pfaffian_4x4(&m);
        if pf <= 0.0 && failing.is_none() {
            failing = Some(z.coords);
        }
        min_pf = min_pf.min(pf);

        // equivariance under the degree-d Hopf shift
        let hz = crate::milnor::hopf_action(poly, hopf_t, &z);
        let lhs = emb.apply(&hz)?;
        let rhs = crate::milnor::hopf_action(poly, hopf_t, &image);
        max_equiv = max_equiv.max(lhs.dist(&rhs));
    }

    Ok(ReembeddingCertificate {
        r,
        sup_graph_height: sup_height,
        min_pfaffian: min_pf,
        max_overlap_mismatch: max_overlap,
        max_equivariance_err: max_equiv,
        failing_sample: failing,
    })
}
