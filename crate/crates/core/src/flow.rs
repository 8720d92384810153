//! Mode-counting oracle for the cylinder.
//!
//! The spatial operator commutes with the evolution on the cylinder, so each
//! Fourier mode evolves on its own and the projector difference
//! `p_≥(∇*_{Σ₁}) − U p_≥(∇*_{Σ₂}) U⁻¹` is diagonal in the mode basis. Its
//! canonical trace is the stabilized mode sum
//! `Σ_k [1(λ_k(t₁) ≥ 0) − 1(λ_k(t₂) ≥ 0)]`, an integer with finite support.
//! [`spectral_flow`] recovers the same integer by following each branch in
//! `t` and counting signed zero crossings.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::models::{Profile, SpacetimeModel};
use crate::spectral::ZERO_MODE_TOLERANCE;
use crate::{Error, Result};

/// Largest cutoff tried by [`projector_trace`].
const MAX_CUTOFF: i64 = 1 << 40;

/// Consecutive cutoffs with equal partial sums needed to accept a trace.
pub const STABILIZATION_SPAN: u32 = 3;

/// Decoupled eigenvalue branches `λ_k(t) = s(k + σ) + A₁(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFamily {
    scale: f64,
    sigma: f64,
    gauge: Profile,
}

impl ModeFamily {
    /// Level spacing `s = 2π/L`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Mode offset `σ`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Gauge profile driving the family.
    pub fn gauge(&self) -> &Profile {
        &self.gauge
    }

    /// `λ_k(t)`
    pub fn eigenvalue(&self, k: i64, t: f64) -> f64 {
        self.level(k, self.gauge.value(t))
    }

    fn level(&self, k: i64, shift: f64) -> f64 {
        self.scale * (k as f64 + self.sigma) + shift
    }

    fn zero_tol(&self) -> f64 {
        ZERO_MODE_TOLERANCE * self.scale
    }

    /// `p_≥` membership, counting `|λ|` below the zero-mode tolerance as zero.
    fn nonnegative(&self, lambda: f64) -> bool {
        lambda >= -self.zero_tol()
    }
}

/// Mode family of a cylinder model, in the convention of the starred
/// operator (`+A₁`).
pub fn mode_family_cylinder(model: &SpacetimeModel) -> Result<ModeFamily> {
    let SpacetimeModel::Cylinder(cyl) = model else {
        return Err(Error::UnsupportedModel {
            operation: "mode_family_cylinder",
            model: model.kind().name(),
        });
    };
    Ok(ModeFamily {
        scale: 2.0 * PI / cyl.circumference(),
        sigma: cyl.spin().sigma(),
        gauge: cyl.gauge().clone(),
    })
}

/// Canonical trace of the projector difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceResult {
    /// The integer trace.
    pub value: i64,
    /// Final cutoff `K` (modes `|k| ≤ K`).
    pub cutoff_used: i64,
    /// Consecutive doublings over which the partial sum was constant.
    pub stabilization_span: u32,
    /// Some `λ_k(t_j)` was within the zero-mode tolerance; the `≥`
    /// convention decided its membership.
    pub boundary_warning: bool,
}

/// `Σ_{|k| ≤ K} [1(λ_k(t₁) ≥ 0) − 1(λ_k(t₂) ≥ 0)]`, with `K` doubled from
/// `⌈max|A₁|/s⌉ + 2` until the sum is constant over
/// [`STABILIZATION_SPAN`] consecutive cutoffs. Swapping `t1` and `t2`
/// negates the value.
pub fn projector_trace(family: &ModeFamily, t1: f64, t2: f64) -> Result<TraceResult> {
    let shift1 = family.gauge.value(t1);
    let shift2 = family.gauge.value(t2);
    if !shift1.is_finite() || !shift2.is_finite() {
        return Err(Error::parameter("gauge", "profile is not finite at the endpoints"));
    }
    let reach = libm::ceil(shift1.abs().max(shift2.abs()) / family.scale) as i64;
    let mut cutoff = reach + 2;
    let mut span = 0u32;
    let mut last: Option<i64> = None;
    let mut warning = false;
    loop {
        let mut sum = 0i64;
        for k in -cutoff..=cutoff {
            let l1 = family.level(k, shift1);
            let l2 = family.level(k, shift2);
            warning |= l1.abs() < family.zero_tol() || l2.abs() < family.zero_tol();
            sum += i64::from(family.nonnegative(l1)) - i64::from(family.nonnegative(l2));
        }
        span = if last == Some(sum) { span + 1 } else { 1 };
        last = Some(sum);
        if span >= STABILIZATION_SPAN {
            return Ok(TraceResult {
                value: sum,
                cutoff_used: cutoff,
                stabilization_span: span,
                boundary_warning: warning,
            });
        }
        if cutoff > MAX_CUTOFF {
            return Err(Error::Accuracy {
                what: "projector trace",
                best: sum as f64,
                error_estimate: f64::INFINITY,
            });
        }
        cutoff *= 2;
    }
}

/// A branch passing through zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Crossing {
    /// Mode index `k`.
    pub mode: i64,
    /// Refined crossing time.
    pub t: f64,
    /// `+1` for `≥0 → <0`, `−1` for `<0 → ≥0` (contribution to the trace).
    pub contribution: i64,
}

/// Signed crossing count and the individual crossings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowResult {
    /// Sum of the crossing contributions.
    pub value: i64,
    /// Crossings ordered by mode, then time.
    pub crossings: Vec<Crossing>,
}

const BISECTION_STEPS: usize = 200;

/// Follows every branch that can reach zero on a uniform grid of `samples`
/// times from `t1` to `t2` and counts membership changes of `p_≥`: a branch
/// leaving the non-negative half contributes `+1`, one entering it `−1`,
/// matching the sign of [`projector_trace`]. Each crossing is refined by
/// bisection; an interval whose sign pattern at quarter points changes more
/// than once is a resolution error.
pub fn spectral_flow(family: &ModeFamily, t1: f64, t2: f64, samples: usize) -> Result<FlowResult> {
    if samples < 2 {
        return Err(Error::parameter("samples", "at least two samples are required"));
    }
    let times: Vec<f64> = (0..samples)
        .map(|i| t1 + (t2 - t1) * i as f64 / (samples - 1) as f64)
        .collect();
    let shifts: Vec<f64> = times.iter().map(|&t| family.gauge.value(t)).collect();
    let (lo, hi) = shifts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::parameter("gauge", "profile is not finite on the window"));
    }
    // s(k + σ) + A = 0 needs k ∈ [−hi/s − σ, −lo/s − σ]; pad by two modes.
    let k_min = libm::floor(-hi / family.scale - family.sigma) as i64 - 2;
    let k_max = libm::ceil(-lo / family.scale - family.sigma) as i64 + 2;

    let mut crossings = Vec::new();
    for k in k_min..=k_max {
        for i in 0..samples - 1 {
            let (ta, tb) = (times[i], times[i + 1]);
            let sa = family.nonnegative(family.level(k, shifts[i]));
            let sb = family.nonnegative(family.level(k, shifts[i + 1]));
            let pattern = [0.25, 0.5, 0.75].map(|f| family.nonnegative(family.eigenvalue(k, ta + f * (tb - ta))));
            let changes = core::iter::once(sa)
                .chain(pattern)
                .chain(core::iter::once(sb))
                .collect::<Vec<_>>()
                .windows(2)
                .filter(|w| w[0] != w[1])
                .count();
            if changes > 1 {
                return Err(Error::Resolution { mode: k, t_lo: ta, t_hi: tb });
            }
            if sa != sb {
                crossings.push(Crossing {
                    mode: k,
                    t: bisect(family, k, ta, tb, sa),
                    contribution: if sa { 1 } else { -1 },
                });
            }
        }
    }
    let value = crossings.iter().map(|c| c.contribution).sum();
    Ok(FlowResult { value, crossings })
}

fn bisect(family: &ModeFamily, k: i64, mut a: f64, mut b: f64, sign_a: bool) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (a + b);
        let lambda = family.eigenvalue(k, mid);
        if lambda.abs() < family.zero_tol() || mid == a || mid == b {
            return mid;
        }
        if family.nonnegative(lambda) == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Branch values `(k, t, λ_k(t))` on a uniform grid for every branch that
/// comes within one level spacing of zero.
pub fn branch_trace(family: &ModeFamily, t1: f64, t2: f64, samples: usize) -> Vec<(i64, f64, f64)> {
    let samples = samples.max(2);
    let times: Vec<f64> = (0..samples)
        .map(|i| t1 + (t2 - t1) * i as f64 / (samples - 1) as f64)
        .collect();
    let (lo, hi) = times
        .iter()
        .map(|&t| family.gauge.value(t))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let k_min = libm::floor(-hi / family.scale - family.sigma) as i64 - 1;
    let k_max = libm::ceil(-lo / family.scale - family.sigma) as i64 + 1;
    let mut out = Vec::new();
    for k in k_min..=k_max {
        for &t in &times {
            out.push((k, t, family.eigenvalue(k, t)));
        }
    }
    out
}
