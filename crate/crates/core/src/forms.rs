//! Metric, curvature and characteristic-form evaluation.
//!
//! Curvature is computed numerically from [`metric_at`]: Christoffel symbols
//! by finite differences of the metric, the Riemann tensor by finite
//! differences of the Christoffel symbols. Derivatives use the 4th-order
//! central stencil with one Richardson level (6th order overall). The time
//! step shrinks near profile breakpoints so that no stencil straddles a jump
//! in a higher derivative of a profile.
//!
//! Conventions: signature `(+, −, …, −)`, coordinates `(t, x, y, z)` (or
//! `(t, θ)` on the cylinder), `R^μ_{νρσ} = ∂_ρΓ^μ_{νσ} − ∂_σΓ^μ_{νρ} +
//! Γ^μ_{λρ}Γ^λ_{νσ} − Γ^μ_{λσ}Γ^λ_{νρ}`. The degree-4 part of the Â-form is
//! `tr(Ω∧Ω)/(192π²)` with `Ω^a_b = ½ R^a_{bμν} dx^μ∧dx^ν`.

use core::f64::consts::PI;

use crate::linalg::{invert, Mat4};
use crate::models::{Jet, ModelKind, SpacetimeModel, TimeWindow};
use crate::quadrature::{gauss_legendre, integrate};
use crate::{Error, Result};

/// Integrand evaluations allowed per form integral.
pub const MAX_EVALUATIONS: usize = 20_000;

/// Default finite-difference step, `ε^{1/6}` in coordinate units.
pub fn default_step() -> f64 {
    libm::pow(f64::EPSILON, 1.0 / 6.0)
}

/// A point `(t, x)` of spacetime. On the cylinder only `x[0] = θ` is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    /// Time coordinate.
    pub t: f64,
    /// Spatial coordinates; `[0, 1)³` is a fundamental domain for the
    /// Bianchi models, `[0, L)` for the circle.
    pub x: [f64; 3],
}

impl SpacetimePoint {
    /// Point with the given time and spatial coordinates.
    pub const fn new(t: f64, x: [f64; 3]) -> Self {
        Self { t, x }
    }

    /// Centre of the unit fundamental domain at time `t`.
    pub const fn centre(t: f64) -> Self {
        Self { t, x: [0.5; 3] }
    }

    fn coord(&self, i: usize) -> f64 {
        if i == 0 {
            self.t
        } else {
            self.x[i - 1]
        }
    }

    fn shifted(&self, i: usize, by: f64) -> Self {
        let mut p = *self;
        if i == 0 {
            p.t += by;
        } else {
            p.x[i - 1] += by;
        }
        p
    }
}

/// Lorentzian metric `g_{μν}` at a point (leading `dim × dim` block used).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    dim: usize,
    g: Mat4,
}

impl MetricTensor {
    /// 2 for the cylinder, 4 for the Bianchi models.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `g_{μν}`
    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.g[mu][nu]
    }

    /// All components; entries beyond `dim` are zero.
    pub fn components(&self) -> &[[f64; 4]; 4] {
        &self.g
    }
}

/// `Γ^μ_{νρ}` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel {
    dim: usize,
    gamma: [[[f64; 4]; 4]; 4],
}

impl Christoffel {
    /// Spacetime dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^μ_{νρ}`
    pub fn get(&self, mu: usize, nu: usize, rho: usize) -> f64 {
        self.gamma[mu][nu][rho]
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Riemann tensor `R^μ_{νρσ}` in the coordinate basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    r: [[[[f64; 4]; 4]; 4]; 4],
}

impl CurvatureTensor {
    /// Spacetime dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R^μ_{νρσ}`
    pub fn get(&self, mu: usize, nu: usize, rho: usize, sigma: usize) -> f64 {
        self.r[mu][nu][rho][sigma]
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.r
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |R^μ_{νρσ} + R^μ_{νσρ}|`
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for v in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        worst = worst.max((self.r[m][v][r][s] + self.r[m][v][s][r]).abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |R^μ_{νρσ} + R^μ_{ρσν} + R^μ_{σνρ}|`
    pub fn first_bianchi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for v in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let c = self.r[m][v][r][s] + self.r[m][r][s][v] + self.r[m][s][v][r];
                        worst = worst.max(c.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Value of a form integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FormIntegral {
    /// Integral value.
    pub value: f64,
    /// Non-negative error estimate.
    pub estimated_error: f64,
    /// Integrand evaluations spent.
    pub evaluations: usize,
}

/// `g_{μν}` of the model at `p`.
pub fn metric_at(model: &SpacetimeModel, p: &SpacetimePoint) -> Result<MetricTensor> {
    let mut g = [[0.0; 4]; 4];
    g[0][0] = 1.0;
    match model {
        SpacetimeModel::Cylinder(_) => {
            g[1][1] = -1.0;
            Ok(MetricTensor { dim: 2, g })
        }
        SpacetimeModel::BianchiI(m) => {
            for (i, s) in m.scales().iter().enumerate() {
                let a = s.value(p.t);
                g[i + 1][i + 1] = -a * a;
            }
            Ok(MetricTensor { dim: 4, g })
        }
        SpacetimeModel::BianchiII(m) => {
            let a2 = sq(m.a().value(p.t));
            let b2 = sq(m.b().value(p.t));
            let [x, y, _] = p.x;
            // dt² − g_{a,b}; off-diagonal entries are half the dxdy, dxdz, dydz coefficients.
            g[1][1] = -(b2 * y * y / 4.0 + a2);
            g[2][2] = -(b2 * x * x / 4.0 + a2);
            g[3][3] = -b2;
            g[1][2] = b2 * x * y / 4.0;
            g[1][3] = -b2 * y / 2.0;
            g[2][3] = b2 * x / 2.0;
            g[2][1] = g[1][2];
            g[3][1] = g[1][3];
            g[3][2] = g[2][3];
            Ok(MetricTensor { dim: 4, g })
        }
        SpacetimeModel::SphereReference(_) => Err(unsupported("metric_at", model.kind())),
    }
}

/// Levi-Civita connection by finite differences of [`metric_at`].
pub fn christoffel_at(model: &SpacetimeModel, p: &SpacetimePoint, step: f64) -> Result<Christoffel> {
    check_step(step)?;
    let metric = metric_at(model, p)?;
    let n = metric.dim;
    let ginv = invert(&metric.g, n)?;
    // dg[l][m][v] = ∂_l g_{mv}
    let mut dg = [[[0.0; 4]; 4]; 4];
    for (l, slot) in dg.iter_mut().enumerate().take(n) {
        let h = coordinate_step(model, p, l, step);
        *slot = derivative(|q: &SpacetimePoint| Ok(metric_at(model, q)?.g), p, l, h)?;
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for m in 0..n {
        for v in 0..n {
            for r in v..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[m][l] * (dg[v][l][r] + dg[r][l][v] - dg[l][v][r]);
                }
                gamma[m][v][r] = 0.5 * s;
                gamma[m][r][v] = 0.5 * s;
            }
        }
    }
    Ok(Christoffel { dim: n, gamma })
}

/// Riemann tensor by finite differences of [`christoffel_at`].
pub fn curvature_at(model: &SpacetimeModel, p: &SpacetimePoint, step: f64) -> Result<CurvatureTensor> {
    let centre = christoffel_at(model, p, step)?;
    let n = centre.dim;
    let gm = &centre.gamma;
    // dgamma[r][m][v][s] = ∂_r Γ^m_{vs}
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for (r, slot) in dgamma.iter_mut().enumerate().take(n) {
        let h = coordinate_step(model, p, r, step);
        *slot = derivative(|q: &SpacetimePoint| Ok(christoffel_at(model, q, step)?.gamma), p, r, h)?;
    }
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for m in 0..n {
        for v in 0..n {
            for r in 0..n {
                for s in (r + 1)..n {
                    let mut val = dgamma[r][m][v][s] - dgamma[s][m][v][r];
                    for l in 0..n {
                        val += gm[m][l][r] * gm[l][v][s] - gm[m][l][s] * gm[l][v][r];
                    }
                    out[m][v][r][s] = val;
                    out[m][v][s][r] = -val;
                }
            }
        }
    }
    Ok(CurvatureTensor { dim: n, r: out })
}

/// Coefficient of `dt∧dx∧dy∧dz` in the degree-4 Â-form,
/// `(1/192π²)·¼·Σ_{μνρσ} ε(μνρσ) R^a_{bμν} R^b_{aρσ}`.
///
/// Zero for a 2-dimensional tensor: Â has no degree-2 part.
pub fn ahat_density_from_curvature(r: &CurvatureTensor) -> f64 {
    if r.dim != 4 {
        return 0.0;
    }
    let mut total = 0.0;
    for (perm, sign) in PERMUTATIONS_4 {
        let [m, v, p, s] = perm;
        let mut tr = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                tr += r.r[a][b][m][v] * r.r[b][a][p][s];
            }
        }
        total += sign * tr;
    }
    total / 4.0 / (192.0 * PI * PI)
}

/// Numerical Â density of the model at `p` (see [`ahat_density_from_curvature`]).
/// Returns 0 on the 2-dimensional cylinder.
pub fn ahat_density_at(model: &SpacetimeModel, p: &SpacetimePoint, step: f64) -> Result<f64> {
    match model {
        SpacetimeModel::Cylinder(_) => Ok(0.0),
        SpacetimeModel::SphereReference(_) => Err(unsupported("ahat_density_at", model.kind())),
        _ => Ok(ahat_density_from_curvature(&curvature_at(model, p, step)?)),
    }
}

/// Closed-form Bianchi-II density
/// `(a²bȧ² − a³bä − a³ȧḃ + a⁴b̈ − b³)(bȧ − aḃ) / (48π²a⁵)`.
pub fn ahat_density_closed_bianchi2(a: Jet, b: Jet) -> Result<f64> {
    if !(a.value > 0.0) {
        return Err(Error::domain(
            "ahat_density_closed_bianchi2",
            alloc::format!("a must be positive, got {}", a.value),
        ));
    }
    let (av, ad, add) = (a.value, a.d1, a.d2);
    let (bv, bd, bdd) = (b.value, b.d1, b.d2);
    let a2 = av * av;
    let a3 = a2 * av;
    let first = a2 * bv * ad * ad - a3 * bv * add - a3 * ad * bd + a3 * av * bdd - bv * bv * bv;
    let second = bv * ad - av * bd;
    Ok(first * second / (48.0 * PI * PI * a3 * a2))
}

/// Sign relating the orientation used to integrate over `M` to
/// `dt∧dx∧dy∧dz` (resp. `dt∧dθ`).
///
/// Bianchi-II slices are oriented so that the Heisenberg η-invariant reads
/// `b⁴/(96π²a⁴) − N`; that orientation is opposite to `dx∧dy∧dz`.
pub fn integration_orientation(kind: ModelKind) -> f64 {
    match kind {
        ModelKind::BianchiII => -1.0,
        _ => 1.0,
    }
}

/// `∫_M ch(∇^E) = (L/2π)(A₁(t₂) − A₁(t₁))` on the cylinder, from the
/// endpoint values. The estimated error is the discrepancy against direct
/// quadrature of `Ȧ₁/2π dt dθ`.
pub fn chern_flux_cylinder(model: &SpacetimeModel) -> Result<FormIntegral> {
    let SpacetimeModel::Cylinder(cyl) = model else {
        return Err(unsupported("chern_flux_cylinder", model.kind()));
    };
    let w = cyl.window();
    let l = cyl.circumference();
    let closed = l / (2.0 * PI) * (cyl.gauge().value(w.t2()) - cyl.gauge().value(w.t1()));
    let tol = 1e-13 * closed.abs().max(1.0);
    let gauge = cyl.gauge();
    // θ-integral of a θ-independent integrand is the factor L.
    let q = integrate(
        |t| Ok(l * gauge.derivative(t) / (2.0 * PI)),
        w.t1(),
        w.t2(),
        &model.breakpoints(),
        tol,
        MAX_EVALUATIONS,
    )?;
    Ok(FormIntegral {
        value: closed,
        estimated_error: (closed - q.value).abs(),
        evaluations: q.evaluations,
    })
}

/// `∫_M Â ∧ ch(∇^E)` over `[t₁, t₂] × Σ`.
///
/// On the cylinder this is the Chern flux. For the Bianchi models `E` is
/// trivial and the density is spatially homogeneous, so the integral reduces
/// to a `t`-quadrature at the centre of the unit fundamental domain.
pub fn index_form_integral(model: &SpacetimeModel, tol: f64) -> Result<FormIntegral> {
    match model {
        SpacetimeModel::Cylinder(_) => chern_flux_cylinder(model),
        SpacetimeModel::BianchiI(_) | SpacetimeModel::BianchiII(_) => {
            let w = window_of(model)?;
            let step = default_step();
            let q = integrate(
                |t| ahat_density_at(model, &SpacetimePoint::centre(t), step),
                w.t1(),
                w.t2(),
                &model.breakpoints(),
                tol,
                MAX_EVALUATIONS,
            )?;
            Ok(FormIntegral {
                value: integration_orientation(model.kind()) * q.value,
                estimated_error: q.error,
                evaluations: q.evaluations,
            })
        }
        SpacetimeModel::SphereReference(_) => Err(unsupported("index_form_integral", model.kind())),
    }
}

/// Same integral as [`index_form_integral`] without the homogeneity
/// shortcut: Gauss–Legendre with `nodes` points per spatial direction over
/// `[0, 1)³`, adaptive in `t` at each node.
pub fn form_integral_full_grid(model: &SpacetimeModel, nodes: usize, tol: f64) -> Result<FormIntegral> {
    if !matches!(model, SpacetimeModel::BianchiI(_) | SpacetimeModel::BianchiII(_)) {
        return Err(unsupported("form_integral_full_grid", model.kind()));
    }
    if nodes == 0 {
        return Err(Error::parameter("nodes", "at least one node per direction"));
    }
    let w = window_of(model)?;
    let (xs, ws) = gauss_legendre(nodes);
    let step = default_step();
    let breaks = model.breakpoints();
    let (mut value, mut error, mut evaluations) = (0.0, 0.0, 0);
    for (i, &xi) in xs.iter().enumerate() {
        for (j, &yj) in xs.iter().enumerate() {
            for (k, &zk) in xs.iter().enumerate() {
                let x = [(1.0 + xi) / 2.0, (1.0 + yj) / 2.0, (1.0 + zk) / 2.0];
                let weight = ws[i] * ws[j] * ws[k] / 8.0;
                let q = integrate(
                    |t| ahat_density_at(model, &SpacetimePoint::new(t, x), step),
                    w.t1(),
                    w.t2(),
                    &breaks,
                    tol,
                    MAX_EVALUATIONS,
                )?;
                value += weight * q.value;
                error += weight * q.error;
                evaluations += q.evaluations;
            }
        }
    }
    Ok(FormIntegral {
        value: integration_orientation(model.kind()) * value,
        estimated_error: error,
        evaluations,
    })
}

/// Closed-form `∫_M Â` for Bianchi-II with product structure at both ends,
/// `(1/192π²)(b⁴/a⁴|_{t₁} − b⁴/a⁴|_{t₂})`.
pub fn bianchi2_boundary_integral(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    (libm::pow(b1 / a1, 4.0) - libm::pow(b2 / a2, 4.0)) / (192.0 * PI * PI)
}

fn window_of(model: &SpacetimeModel) -> Result<TimeWindow> {
    model
        .window()
        .ok_or_else(|| unsupported("form integration", model.kind()))
}

fn unsupported(operation: &'static str, kind: ModelKind) -> Error {
    Error::UnsupportedModel {
        operation,
        model: kind.name(),
    }
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter("step", "finite-difference step must be positive"))
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Step along coordinate `i`. In `t` the step is capped at a fifth of the
/// distance to the nearest profile breakpoint, so the nested stencils
/// (reach 2h each) stay on one smooth piece.
fn coordinate_step(model: &SpacetimeModel, p: &SpacetimePoint, i: usize, step: f64) -> f64 {
    if i != 0 {
        return step;
    }
    let t = p.coord(0);
    let nearest = model
        .profiles()
        .iter()
        .flat_map(|(_, prof)| prof.breakpoints())
        .map(|b| (b - t).abs())
        .fold(f64::INFINITY, f64::min);
    if nearest > 0.0 && nearest < 5.0 * step {
        (nearest / 5.0).max(step * 1e-3)
    } else {
        step
    }
}

/// Derivative along coordinate `i` of an array-valued function by the
/// 4th-order central stencil at `h` and `h/2`, combined by Richardson.
fn derivative<T, F>(f: F, p: &SpacetimePoint, i: usize, h: f64) -> Result<T>
where
    T: Flat,
    F: Fn(&SpacetimePoint) -> Result<T>,
{
    let stencil = |h: f64| -> Result<T> {
        let m2 = f(&p.shifted(i, -2.0 * h))?;
        let m1 = f(&p.shifted(i, -h))?;
        let p1 = f(&p.shifted(i, h))?;
        let p2 = f(&p.shifted(i, 2.0 * h))?;
        Ok(T::combine(&[(&m2, 1.0), (&m1, -8.0), (&p1, 8.0), (&p2, -1.0)], 1.0 / (12.0 * h)))
    };
    let coarse = stencil(h)?;
    let fine = stencil(h / 2.0)?;
    Ok(T::combine(&[(&fine, 16.0), (&coarse, -1.0)], 1.0 / 15.0))
}

/// Fixed-size arrays that can be linearly combined component-wise.
trait Flat: Sized + Copy + Default {
    fn as_slice(&self) -> &[f64];
    fn as_mut_slice(&mut self) -> &mut [f64];

    fn combine(terms: &[(&Self, f64)], scale: f64) -> Self {
        let mut out = Self::default();
        let dst = out.as_mut_slice();
        for (arr, c) in terms {
            for (d, s) in dst.iter_mut().zip(arr.as_slice()) {
                *d += c * s;
            }
        }
        dst.iter_mut().for_each(|v| *v *= scale);
        out
    }
}

impl Flat for Mat4 {
    fn as_slice(&self) -> &[f64] {
        self.as_flattened()
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        self.as_flattened_mut()
    }
}

impl Flat for [[[f64; 4]; 4]; 4] {
    fn as_slice(&self) -> &[f64] {
        self.as_flattened().as_flattened()
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        self.as_flattened_mut().as_flattened_mut()
    }
}

/// The 24 permutations of `(0, 1, 2, 3)` with their signs.
const PERMUTATIONS_4: [([usize; 4], f64); 24] = [
    ([0, 1, 2, 3], 1.0),
    ([0, 1, 3, 2], -1.0),
    ([0, 2, 1, 3], -1.0),
    ([0, 2, 3, 1], 1.0),
    ([0, 3, 1, 2], 1.0),
    ([0, 3, 2, 1], -1.0),
    ([1, 0, 2, 3], -1.0),
    ([1, 0, 3, 2], 1.0),
    ([1, 2, 0, 3], 1.0),
    ([1, 2, 3, 0], -1.0),
    ([1, 3, 0, 2], -1.0),
    ([1, 3, 2, 0], 1.0),
    ([2, 0, 1, 3], 1.0),
    ([2, 0, 3, 1], -1.0),
    ([2, 1, 0, 3], -1.0),
    ([2, 1, 3, 0], 1.0),
    ([2, 3, 0, 1], 1.0),
    ([2, 3, 1, 0], -1.0),
    ([3, 0, 1, 2], -1.0),
    ([3, 0, 2, 1], 1.0),
    ([3, 1, 0, 2], 1.0),
    ([3, 1, 2, 0], -1.0),
    ([3, 2, 0, 1], -1.0),
    ([3, 2, 1, 0], 1.0),
];
