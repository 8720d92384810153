//! Model spacetimes, time profiles and the product-structure check.
//!
//! Every model is a product `ℝ × Σ` with a metric of the form
//! `dt² − g_Σ(t)` (and, for the cylinder, a gauge potential `A₁(t) dθ`).
//! All time dependence enters through [`Profile`]s. The index formula needs
//! the metric and the connection to be constant in `t` near both Cauchy
//! hypersurfaces, which is what the plateau profiles provide exactly.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Fraction of the window probed at each end when a profile has no
/// plateau of its own.
pub const DEFAULT_END_SEGMENT_FRACTION: f64 = 0.1;

/// Points per end segment used by [`validate_product_structure`].
const VALIDATION_SAMPLES: usize = 257;

/// Time interval `[t1, t2]` between the two Cauchy hypersurfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeWindow {
    t1: f64,
    t2: f64,
}

impl TimeWindow {
    /// Requires finite `t1 < t2`. An empty window is rejected here; the
    /// charge module treats `t1 = t2` separately.
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !t1.is_finite() || !t2.is_finite() {
            return Err(Error::parameter("window", "endpoints must be finite"));
        }
        if t1 >= t2 {
            return Err(Error::parameter(
                "window",
                format!("t1 < t2 required, got t1 = {t1}, t2 = {t2}"),
            ));
        }
        Ok(Self { t1, t2 })
    }

    /// Initial time.
    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Final time.
    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// `t2 - t1`.
    pub fn duration(&self) -> f64 {
        self.t2 - self.t1
    }

    /// Whether `t` lies in the closed window.
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t1 && t <= self.t2
    }
}

/// Value and first two time derivatives of a profile at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Jet {
    /// `f(t)`
    pub value: f64,
    /// `f'(t)`
    pub d1: f64,
    /// `f''(t)`
    pub d2: f64,
}

impl Jet {
    /// Builds a jet from its three components.
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }
}

/// Constant on `[t1, t1 + r·Δt]` and `[t2 − r·Δt, t2]`, quintic smoothstep in
/// between. Extended by the plateau constants outside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauProfile {
    v_start: f64,
    v_end: f64,
    window: TimeWindow,
    ramp_fraction: f64,
}

impl PlateauProfile {
    /// Value on the initial plateau.
    pub fn v_start(&self) -> f64 {
        self.v_start
    }

    /// Value on the final plateau.
    pub fn v_end(&self) -> f64 {
        self.v_end
    }

    /// Fraction of the window covered by each plateau.
    pub fn ramp_fraction(&self) -> f64 {
        self.ramp_fraction
    }

    /// Start and end of the transition.
    pub fn ramp(&self) -> (f64, f64) {
        let width = self.ramp_fraction * self.window.duration();
        (self.window.t1 + width, self.window.t2 - width)
    }

    fn jet(&self, t: f64) -> Jet {
        let (lo, hi) = self.ramp();
        if t <= lo {
            return Jet::new(self.v_start, 0.0, 0.0);
        }
        if t >= hi {
            return Jet::new(self.v_end, 0.0, 0.0);
        }
        let len = hi - lo;
        let u = (t - lo) / len;
        let dv = self.v_end - self.v_start;
        // S(u) = 10u³ − 15u⁴ + 6u⁵, S' = 30u²(1−u)², S'' = 60u(1−u)(1−2u)
        let s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        let s1 = 30.0 * u * u * (1.0 - u) * (1.0 - u);
        let s2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
        Jet::new(
            self.v_start + dv * s,
            dv * s1 / len,
            dv * s2 / (len * len),
        )
    }
}

/// Values on a uniform grid spanning the window, joined by monotone cubic
/// Hermite pieces with zero slope at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    window: TimeWindow,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl SampledProfile {
    /// Needs at least two finite samples; the first sits at `t1`, the last at `t2`.
    pub fn new(window: TimeWindow, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::parameter("values", "at least two samples are required"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parameter("values", "samples must be finite"));
        }
        let spacing = window.duration() / (values.len() - 1) as f64;
        let secants: Vec<f64> = values
            .windows(2)
            .map(|w| (w[1] - w[0]) / spacing)
            .collect();
        let mut slopes = vec![0.0; values.len()];
        for i in 1..values.len() - 1 {
            let (l, r) = (secants[i - 1], secants[i]);
            // Fritsch–Butland harmonic mean keeps each piece monotone.
            if l * r > 0.0 {
                slopes[i] = 2.0 * l * r / (l + r);
            }
        }
        Ok(Self {
            window,
            values,
            slopes,
        })
    }

    /// The samples.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn spacing(&self) -> f64 {
        self.window.duration() / (self.values.len() - 1) as f64
    }

    fn jet(&self, t: f64) -> Jet {
        let n = self.values.len();
        if t <= self.window.t1 {
            return Jet::new(self.values[0], 0.0, 0.0);
        }
        if t >= self.window.t2 {
            return Jet::new(self.values[n - 1], 0.0, 0.0);
        }
        let h = self.spacing();
        let pos = (t - self.window.t1) / h;
        let i = (libm::floor(pos) as usize).min(n - 2);
        let u = pos - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let value = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1;
        let d1 = (6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * m1;
        let d2 = (12.0 * u - 6.0) * y0
            + (6.0 * u - 4.0) * m0
            + (-12.0 * u + 6.0) * y1
            + (6.0 * u - 2.0) * m1;
        Jet::new(value, d1 / h, d2 / (h * h))
    }
}

/// `Σ cᵢ (t − origin)ⁱ`. Has no plateaus; used for jets and for
/// deliberately non-product test cases such as `A₁(t) = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialProfile {
    origin: f64,
    coefficients: Vec<f64>,
}

impl PolynomialProfile {
    /// Coefficients in increasing degree; an empty list is the zero polynomial.
    pub fn new(origin: f64, coefficients: Vec<f64>) -> Result<Self> {
        if !origin.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::parameter("coefficients", "must be finite"));
        }
        Ok(Self {
            origin,
            coefficients,
        })
    }

    /// Expansion point.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Coefficients in increasing degree.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    fn jet(&self, t: f64) -> Jet {
        let x = t - self.origin;
        let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            d2 = d2 * x + 2.0 * d1;
            d1 = d1 * x + p;
            p = p * x + c;
        }
        Jet::new(p, d1, d2)
    }
}

/// A smooth scalar function of time, evaluable with two derivatives
/// everywhere on `ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Closed-form plateau transition.
    Plateau(PlateauProfile),
    /// Interpolated samples.
    Sampled(SampledProfile),
    /// Polynomial in `t`.
    Polynomial(PolynomialProfile),
}

impl Profile {
    /// Constant profile.
    pub fn constant(value: f64) -> Self {
        Profile::Polynomial(PolynomialProfile {
            origin: 0.0,
            coefficients: vec![value],
        })
    }

    /// Value, first and second derivative at `t`.
    pub fn jet(&self, t: f64) -> Jet {
        match self {
            Profile::Plateau(p) => p.jet(t),
            Profile::Sampled(p) => p.jet(t),
            Profile::Polynomial(p) => p.jet(t),
        }
    }

    /// `f(t)`
    pub fn value(&self, t: f64) -> f64 {
        self.jet(t).value
    }

    /// `f'(t)`
    pub fn derivative(&self, t: f64) -> f64 {
        self.jet(t).d1
    }

    /// `f''(t)`
    pub fn second_derivative(&self, t: f64) -> f64 {
        self.jet(t).d2
    }

    /// Times where a derivative of order ≤ 3 may jump. Finite differences and
    /// quadrature panels must not straddle these.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::Plateau(p) => {
                let (lo, hi) = p.ramp();
                vec![lo, hi]
            }
            Profile::Sampled(p) => {
                let h = p.spacing();
                (0..p.values.len())
                    .map(|i| p.window.t1 + h * i as f64)
                    .collect()
            }
            Profile::Polynomial(_) => Vec::new(),
        }
    }

    /// The two end segments on which product structure is required.
    pub fn end_segments(&self, window: &TimeWindow) -> [(f64, f64); 2] {
        let width = match self {
            Profile::Plateau(p) => p.ramp_fraction * p.window.duration(),
            _ => DEFAULT_END_SEGMENT_FRACTION * window.duration(),
        };
        [
            (window.t1, window.t1 + width),
            (window.t2 - width, window.t2),
        ]
    }

    /// Lower bound of the profile over the window (exact for plateau and
    /// sampled profiles, sampled for polynomials).
    pub fn min_over(&self, window: &TimeWindow) -> f64 {
        match self {
            Profile::Plateau(p) => p.v_start.min(p.v_end),
            Profile::Sampled(p) => p.values.iter().copied().fold(f64::INFINITY, f64::min),
            Profile::Polynomial(p) => {
                let n = 1024;
                (0..=n)
                    .map(|i| p.jet(window.t1 + window.duration() * i as f64 / n as f64).value)
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Plateau profile from `v_start` to `v_end` across `window`; each plateau
/// covers `ramp_fraction` of the window.
pub fn plateau_profile(
    v_start: f64,
    v_end: f64,
    window: TimeWindow,
    ramp_fraction: f64,
) -> Result<Profile> {
    if !(ramp_fraction > 0.0 && ramp_fraction < 0.5) {
        return Err(Error::parameter(
            "ramp_fraction",
            format!("must lie in (0, 1/2), got {ramp_fraction}"),
        ));
    }
    if !v_start.is_finite() || !v_end.is_finite() {
        return Err(Error::parameter("plateau values", "must be finite"));
    }
    Ok(Profile::Plateau(PlateauProfile {
        v_start,
        v_end,
        window,
        ramp_fraction,
    }))
}

/// Spin structure of the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CircleSpin {
    /// Periodic spinors, σ = 0.
    Trivial,
    /// Antiperiodic spinors, σ = ½.
    Nontrivial,
}

impl CircleSpin {
    /// Mode offset σ.
    pub fn sigma(self) -> f64 {
        match self {
            CircleSpin::Trivial => 0.0,
            CircleSpin::Nontrivial => 0.5,
        }
    }
}

/// One of the 8 spin structures of the 3-torus. Index 0 is the all-periodic
/// structure, the one carrying harmonic spinors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TorusSpin(u8);

impl TorusSpin {
    /// `index` in `0..8`.
    pub fn new(index: u8) -> Result<Self> {
        if index < 8 {
            Ok(Self(index))
        } else {
            Err(Error::parameter("spin", format!("torus spin index must be < 8, got {index}")))
        }
    }

    /// Structure index.
    pub fn index(self) -> u8 {
        self.0
    }
}

/// One of the 4 spin structures of the Heisenberg nilmanifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeisenbergSpin(u8);

impl HeisenbergSpin {
    /// `index` in `0..4`.
    pub fn new(index: u8) -> Result<Self> {
        if index < 4 {
            Ok(Self(index))
        } else {
            Err(Error::parameter(
                "spin",
                format!("Heisenberg spin index must be < 4, got {index}"),
            ))
        }
    }

    /// Structure index.
    pub fn index(self) -> u8 {
        self.0
    }
}

/// Spin structure of a model's spatial slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinStructureChoice {
    /// Circle.
    Circle(CircleSpin),
    /// Flat 3-torus.
    Torus(TorusSpin),
    /// Heisenberg nilmanifold.
    Heisenberg(HeisenbergSpin),
}

/// `ℝ × S¹` with metric `dt² − dθ²`, circumference `L`, and gauge potential
/// `A = A₁(t) dθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    circumference: f64,
    spin: CircleSpin,
    gauge: Profile,
    window: TimeWindow,
}

impl Cylinder {
    /// Requires `circumference > 0`.
    pub fn new(circumference: f64, spin: CircleSpin, gauge: Profile, window: TimeWindow) -> Result<Self> {
        if !(circumference > 0.0 && circumference.is_finite()) {
            return Err(Error::parameter(
                "circumference",
                format!("must be positive and finite, got {circumference}"),
            ));
        }
        Ok(Self {
            circumference,
            spin,
            gauge,
            window,
        })
    }

    /// Circumference `L`.
    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    /// Circle spin structure.
    pub fn spin(&self) -> CircleSpin {
        self.spin
    }

    /// `A₁(t)`.
    pub fn gauge(&self) -> &Profile {
        &self.gauge
    }

    /// Time window.
    pub fn window(&self) -> TimeWindow {
        self.window
    }

    /// `(L/2π) A₁(t)`, the flux through the slice in units of the level spacing.
    pub fn reduced_flux(&self, t: f64) -> f64 {
        self.circumference / core::f64::consts::TAU * self.gauge.value(t)
    }
}

/// `ℝ × T³` with metric `dt² − a₁²(dx¹)² − a₂²(dx²)² − a₃²(dx³)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct BianchiI {
    scales: [Profile; 3],
    spin: TorusSpin,
    window: TimeWindow,
}

impl BianchiI {
    /// Scale factors must be positive on the window.
    pub fn new(scales: [Profile; 3], spin: TorusSpin, window: TimeWindow) -> Result<Self> {
        for (i, p) in scales.iter().enumerate() {
            require_positive(p, &window, ["a1", "a2", "a3"][i])?;
        }
        Ok(Self {
            scales,
            spin,
            window,
        })
    }

    /// `[a₁, a₂, a₃]`
    pub fn scales(&self) -> &[Profile; 3] {
        &self.scales
    }

    /// Torus spin structure.
    pub fn spin(&self) -> TorusSpin {
        self.spin
    }

    /// Time window.
    pub fn window(&self) -> TimeWindow {
        self.window
    }
}

/// `ℝ × Heisenberg nilmanifold` with metric `dt² − g_{a(t), b(t)}`.
///
/// `n1`, `n2` are the integer parts `N(t₁)`, `N(t₂)` of the hypersurface
/// η-invariants. They are supplied externally and only needed for absolute
/// charges.
#[derive(Debug, Clone, PartialEq)]
pub struct BianchiII {
    a: Profile,
    b: Profile,
    spin: HeisenbergSpin,
    window: TimeWindow,
    n1: Option<i64>,
    n2: Option<i64>,
}

impl BianchiII {
    /// `a` and `b` must be positive on the window.
    pub fn new(
        a: Profile,
        b: Profile,
        spin: HeisenbergSpin,
        window: TimeWindow,
        n1: Option<i64>,
        n2: Option<i64>,
    ) -> Result<Self> {
        require_positive(&a, &window, "a")?;
        require_positive(&b, &window, "b")?;
        Ok(Self {
            a,
            b,
            spin,
            window,
            n1,
            n2,
        })
    }

    /// `a(t)`
    pub fn a(&self) -> &Profile {
        &self.a
    }

    /// `b(t)`
    pub fn b(&self) -> &Profile {
        &self.b
    }

    /// Heisenberg spin structure.
    pub fn spin(&self) -> HeisenbergSpin {
        self.spin
    }

    /// Time window.
    pub fn window(&self) -> TimeWindow {
        self.window
    }

    /// `N(t₁)`, if supplied.
    pub fn n1(&self) -> Option<i64> {
        self.n1
    }

    /// `N(t₂)`, if supplied.
    pub fn n2(&self) -> Option<i64> {
        self.n2
    }
}

/// `ℝ × S^{4k−1}`: only the registered chiral charge is available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereReference {
    k: u32,
}

impl SphereReference {
    /// Requires `k ≥ 1`.
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::parameter("k", "must be a positive integer"));
        }
        Ok(Self { k })
    }

    /// Sphere dimension parameter (`S^{4k−1}`).
    pub fn k(&self) -> u32 {
        self.k
    }
}

fn require_positive(p: &Profile, window: &TimeWindow, name: &'static str) -> Result<()> {
    let min = p.min_over(window);
    if min > 0.0 && min.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(name, format!("profile must be positive on the window (min {min})")))
    }
}

/// Model discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    /// [`Cylinder`]
    Cylinder,
    /// [`BianchiI`]
    BianchiI,
    /// [`BianchiII`]
    #[cfg_attr(feature = "serde", serde(rename = "bianchi_ii"))]
    BianchiII,
    /// [`SphereReference`]
    SphereReference,
}

impl ModelKind {
    /// Stable lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cylinder => "cylinder",
            ModelKind::BianchiI => "bianchi_i",
            ModelKind::BianchiII => "bianchi_ii",
            ModelKind::SphereReference => "sphere_reference",
        }
    }
}

/// One of the supported model spacetimes.
#[derive(Debug, Clone, PartialEq)]
pub enum SpacetimeModel {
    /// Flat cylinder with electric field.
    Cylinder(Cylinder),
    /// Bianchi-I cosmology.
    BianchiI(BianchiI),
    /// Bianchi-II cosmology.
    BianchiII(BianchiII),
    /// Registered sphere value.
    SphereReference(SphereReference),
}

impl SpacetimeModel {
    /// Discriminant.
    pub fn kind(&self) -> ModelKind {
        match self {
            SpacetimeModel::Cylinder(_) => ModelKind::Cylinder,
            SpacetimeModel::BianchiI(_) => ModelKind::BianchiI,
            SpacetimeModel::BianchiII(_) => ModelKind::BianchiII,
            SpacetimeModel::SphereReference(_) => ModelKind::SphereReference,
        }
    }

    /// Spacetime dimension, `None` for the reference entry.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            SpacetimeModel::Cylinder(_) => Some(2),
            SpacetimeModel::BianchiI(_) | SpacetimeModel::BianchiII(_) => Some(4),
            SpacetimeModel::SphereReference(_) => None,
        }
    }

    /// Time window, `None` for the reference entry.
    pub fn window(&self) -> Option<TimeWindow> {
        match self {
            SpacetimeModel::Cylinder(m) => Some(m.window),
            SpacetimeModel::BianchiI(m) => Some(m.window),
            SpacetimeModel::BianchiII(m) => Some(m.window),
            SpacetimeModel::SphereReference(_) => None,
        }
    }

    /// Spin structure of the spatial slice.
    pub fn spin(&self) -> Option<SpinStructureChoice> {
        match self {
            SpacetimeModel::Cylinder(m) => Some(SpinStructureChoice::Circle(m.spin)),
            SpacetimeModel::BianchiI(m) => Some(SpinStructureChoice::Torus(m.spin)),
            SpacetimeModel::BianchiII(m) => Some(SpinStructureChoice::Heisenberg(m.spin)),
            SpacetimeModel::SphereReference(_) => None,
        }
    }

    /// Named profiles of the model.
    pub fn profiles(&self) -> Vec<(&'static str, &Profile)> {
        match self {
            SpacetimeModel::Cylinder(m) => vec![("A1", &m.gauge)],
            SpacetimeModel::BianchiI(m) => vec![
                ("a1", &m.scales[0]),
                ("a2", &m.scales[1]),
                ("a3", &m.scales[2]),
            ],
            SpacetimeModel::BianchiII(m) => vec![("a", &m.a), ("b", &m.b)],
            SpacetimeModel::SphereReference(_) => Vec::new(),
        }
    }

    /// Union of the profile breakpoints that fall inside the window, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let Some(window) = self.window() else {
            return Vec::new();
        };
        let mut out: Vec<f64> = self
            .profiles()
            .iter()
            .flat_map(|(_, p)| p.breakpoints())
            .filter(|&t| t > window.t1 && t < window.t2)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Product-structure check of one profile.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileCheck {
    /// Profile name within the model.
    pub profile: String,
    /// `max |f'|` over the initial segment.
    pub max_derivative_start: f64,
    /// `max |f'|` over the final segment.
    pub max_derivative_end: f64,
    /// Larger of the two.
    pub max_derivative: f64,
    /// `max_derivative <= tolerance`.
    pub passed: bool,
}

/// Result of [`validate_product_structure`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    /// Tolerance applied to the derivative maxima.
    pub tolerance: f64,
    /// One entry per profile.
    pub checks: Vec<ProfileCheck>,
    /// All checks passed.
    pub passed: bool,
}

/// Checks that every profile of `model` is constant (to `tol` in its first
/// derivative) on segments at both ends of the window.
pub fn validate_product_structure(model: &SpacetimeModel, tol: f64) -> ValidationReport {
    let checks: Vec<ProfileCheck> = match model.window() {
        None => Vec::new(),
        Some(window) => model
            .profiles()
            .into_iter()
            .map(|(name, profile)| {
                let [start, end] = profile.end_segments(&window);
                let max_on = |(lo, hi): (f64, f64)| {
                    (0..VALIDATION_SAMPLES)
                        .map(|i| {
                            let t = lo + (hi - lo) * i as f64 / (VALIDATION_SAMPLES - 1) as f64;
                            profile.derivative(t).abs()
                        })
                        .fold(0.0, f64::max)
                };
                let max_start = max_on(start);
                let max_end = max_on(end);
                let max = max_start.max(max_end);
                ProfileCheck {
                    profile: String::from(name),
                    max_derivative_start: max_start,
                    max_derivative_end: max_end,
                    max_derivative: max,
                    passed: max <= tol,
                }
            })
            .collect(),
    };
    let passed = checks.iter().all(|c| c.passed);
    ValidationReport {
        tolerance: tol,
        checks,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> TimeWindow {
        TimeWindow::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_plateau_is_identically_zero() {
        let p = plateau_profile(0.0, 0.0, unit(), 0.1).unwrap();
        for i in 0..=100 {
            let j = p.jet(i as f64 / 100.0);
            assert_eq!((j.value, j.d1, j.d2), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn plateau_values_on_both_segments() {
        let p = plateau_profile(0.3, 2.7, unit(), 0.2).unwrap();
        for i in 0..=20 {
            let t = 0.2 * i as f64 / 20.0;
            assert_eq!(p.value(t), 0.3);
            assert_eq!(p.value(0.8 + t), 2.7);
            assert_eq!(p.derivative(t), 0.0);
            assert_eq!(p.second_derivative(0.8 + t), 0.0);
        }
    }

    #[test]
    fn ramp_fraction_out_of_range() {
        for r in [0.0, 0.5, -0.1, 0.7, f64::NAN] {
            assert!(matches!(
                plateau_profile(0.0, 1.0, unit(), r),
                Err(Error::Parameter { name: "ramp_fraction", .. })
            ));
        }
    }

    #[test]
    fn degenerate_window_rejected() {
        assert!(TimeWindow::new(1.0, 1.0).is_err());
        assert!(TimeWindow::new(2.0, 1.0).is_err());
    }

    #[test]
    fn midpoint_derivative_matches_finite_difference() {
        let p = plateau_profile(0.0, 1.0, unit(), 0.1).unwrap();
        let h = 1e-5;
        let fd = (p.value(0.5 + h) - p.value(0.5 - h)) / (2.0 * h);
        let d = p.derivative(0.5);
        assert!(d > 0.0 && d.is_finite());
        assert!((fd - d).abs() < 1e-8, "fd {fd} vs {d}");
        // 30 u²(1-u)² at u = 1/2 over a ramp of length 0.8
        assert!((d - 1.875 / 0.8).abs() < 1e-12);
        let fd2 = (p.derivative(0.37 + h) - p.derivative(0.37 - h)) / (2.0 * h);
        assert!((fd2 - p.second_derivative(0.37)).abs() < 1e-6);
    }

    #[test]
    fn plateau_is_monotone() {
        let p = plateau_profile(-1.0, 3.0, unit(), 0.25).unwrap();
        let mut prev = p.value(0.0);
        for i in 1..=1000 {
            let v = p.value(i as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn sampled_profile_keeps_plateaus() {
        let w = unit();
        let plateau = plateau_profile(1.0, 2.0, w, 0.2).unwrap();
        let values: Vec<f64> = (0..=20).map(|i| plateau.value(i as f64 / 20.0)).collect();
        let sampled = Profile::Sampled(SampledProfile::new(w, values).unwrap());
        for i in 0..=50 {
            let t = 0.15 * i as f64 / 50.0;
            assert_eq!(sampled.derivative(t), 0.0);
            assert_eq!(sampled.value(t), 1.0);
            assert_eq!(sampled.derivative(1.0 - t), 0.0);
        }
        let report = validate_product_structure(
            &SpacetimeModel::Cylinder(
                Cylinder::new(1.0, CircleSpin::Trivial, sampled, w).unwrap(),
            ),
            0.0,
        );
        assert!(report.passed);
    }

    #[test]
    fn sampled_profile_interpolates_and_differentiates() {
        let w = TimeWindow::new(0.0, 2.0).unwrap();
        let s = SampledProfile::new(w, vec![0.0, 1.0, 4.0, 9.0, 16.0]).unwrap();
        let p = Profile::Sampled(s);
        assert_eq!(p.value(0.5), 1.0);
        assert_eq!(p.value(1.5), 9.0);
        let h = 1e-6;
        for t in [0.2, 0.7, 1.3, 1.9] {
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            assert!((fd - p.derivative(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn polynomial_jet() {
        let p = PolynomialProfile::new(1.0, vec![2.0, 3.0, 4.0]).unwrap();
        let j = Profile::Polynomial(p).jet(3.0);
        assert_eq!(j, Jet::new(2.0 + 6.0 + 16.0, 3.0 + 16.0, 8.0));
    }

    #[test]
    fn linear_gauge_fails_validation() {
        let w = unit();
        let gauge = Profile::Polynomial(PolynomialProfile::new(0.0, vec![0.0, 1.0]).unwrap());
        let model = SpacetimeModel::Cylinder(Cylinder::new(1.0, CircleSpin::Trivial, gauge, w).unwrap());
        let report = validate_product_structure(&model, 1e-12);
        assert!(!report.passed);
        assert_eq!(report.checks[0].max_derivative, 1.0);
    }

    #[test]
    fn bianchi_ii_plateaus_validate() {
        let w = unit();
        let a = plateau_profile(1.0, 1.0, w, 0.1).unwrap();
        let b = plateau_profile(1.0, 2.0, w, 0.1).unwrap();
        let m = BianchiII::new(a, b, HeisenbergSpin::new(0).unwrap(), w, None, None).unwrap();
        let report = validate_product_structure(&SpacetimeModel::BianchiII(m), 0.0);
        assert!(report.passed);
        assert!(report.checks.iter().all(|c| c.max_derivative == 0.0));
    }

    #[test]
    fn positivity_enforced() {
        let w = unit();
        let bad = plateau_profile(1.0, -0.5, w, 0.1).unwrap();
        let good = Profile::constant(1.0);
        assert!(BianchiI::new([good.clone(), bad, good], TorusSpin::new(0).unwrap(), w).is_err());
        assert!(TorusSpin::new(8).is_err());
        assert!(HeisenbergSpin::new(4).is_err());
        assert!(SphereReference::new(0).is_err());
        assert!(Cylinder::new(0.0, CircleSpin::Trivial, Profile::constant(0.0), w).is_err());
    }

    #[test]
    fn breakpoints_inside_window() {
        let w = unit();
        let a = plateau_profile(1.0, 2.0, w, 0.1).unwrap();
        let b = plateau_profile(1.0, 2.0, w, 0.25).unwrap();
        let m = SpacetimeModel::BianchiII(
            BianchiII::new(a, b, HeisenbergSpin::new(1).unwrap(), w, None, None).unwrap(),
        );
        assert_eq!(m.breakpoints(), vec![0.1, 0.25, 0.75, 0.9]);
    }
}
