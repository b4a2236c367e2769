//! Uniform and bracketing entropy integrals
//! `J(δ) = ∫₀^δ √(1 + log N(ε)) dε` and the structural properties of
//! `δ ↦ J(δ)` that the maximal inequalities lean on.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{lit, tol, Real};

/// Integration window (in `u = log(1/ε)`) beyond which the analytic
/// integrand `√(1 + log N(e^{-u})) e^{-u}` is dropped.
const TAIL_WINDOW: f64 = 60.0;

/// Model of `ε ↦ log N(ε‖F‖)` for `ε ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind<T> {
    /// `log N(ε) = log K + V log(1/ε)` on `(0, 1]`; clipped at zero beyond.
    Vc { k: T, v: T },
    /// `log N(ε) = scale · log(1 + 1/ε)`.
    Log { scale: T },
    /// Step function: `log N(ε) = v_i` for `ε ∈ (ε_{i-1}, ε_i]`, `ε_{-1} = 0`.
    Tabulated { steps: Vec<(T, T)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve<T> {
    kind: CurveKind<T>,
    description: String,
}

impl<T: Real> EntropyCurve<T> {
    pub fn vc(k: T, v: T) -> Result<Self> {
        if !(k >= T::one() && k.is_finite()) || !(v >= T::zero() && v.is_finite()) {
            return Err(Error::Parameter(format!(
                "VC curve needs K ≥ 1, V ≥ 0 (got K={k}, V={v})"
            )));
        }
        Ok(Self {
            kind: CurveKind::Vc { k, v },
            description: format!("vc(K={k}, V={v})"),
        })
    }

    /// `log N ≡ 0`, the entropy of a single function.
    pub fn singleton() -> Self {
        Self {
            kind: CurveKind::Vc {
                k: T::one(),
                v: T::zero(),
            },
            description: "singleton".into(),
        }
    }

    pub fn log(scale: T) -> Result<Self> {
        if !(scale >= T::zero() && scale.is_finite()) {
            return Err(Error::Parameter(format!(
                "log curve needs scale ≥ 0, got {scale}"
            )));
        }
        Ok(Self {
            kind: CurveKind::Log { scale },
            description: format!("log(scale={scale})"),
        })
    }

    /// Tabulated step curve; `log N` must be nonnegative and nonincreasing.
    pub fn tabulated(steps: Vec<(T, T)>) -> Result<Self> {
        let curve = Self::tabulated_unchecked(steps)?;
        if let CurveKind::Tabulated { steps } = &curve.kind {
            if steps.windows(2).any(|w| w[1].1 > w[0].1) {
                return Err(Error::Parameter(
                    "tabulated log N must be nonincreasing in ε".into(),
                ));
            }
        }
        Ok(curve)
    }

    /// Tabulated step curve without the monotonicity requirement (negative
    /// controls, user-supplied data awaiting a structure check).
    pub fn tabulated_unchecked(steps: Vec<(T, T)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Parameter(
                "tabulated curve needs at least one step".into(),
            ));
        }
        if steps.iter().any(|(e, v)| {
            !(*e > T::zero()) || !e.is_finite() || !(*v >= T::zero()) || !v.is_finite()
        }) {
            return Err(Error::Parameter(
                "tabulated steps need ε > 0 and finite log N ≥ 0".into(),
            ));
        }
        if steps.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Parameter(
                "tabulated ε breakpoints must be strictly increasing".into(),
            ));
        }
        let description = format!("tabulated({} steps)", steps.len());
        Ok(Self {
            kind: CurveKind::Tabulated { steps },
            description,
        })
    }

    /// Step curve from measured `(ε, log N(ε))` pairs.
    ///
    /// Values are first made nonincreasing by a running maximum from the
    /// right. On `(ε_{i-1}, ε_i]` the curve takes the measured value at the
    /// left end `ε_{i-1}`, an upper bound; below the smallest measured radius
    /// the smallest-radius value is extended, and that radius is reported as
    /// the lower cutoff of every integral.
    pub fn from_measured(measured: &[(T, T)]) -> Result<Self> {
        let mut pts = measured.to_vec();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite radii"));
        pts.dedup_by(|a, b| a.0 == b.0);
        if pts.is_empty() {
            return Err(Error::Parameter("no measured entropy values".into()));
        }
        for i in (0..pts.len().saturating_sub(1)).rev() {
            pts[i].1 = pts[i].1.max(pts[i + 1].1);
        }
        let mut steps = Vec::with_capacity(pts.len());
        steps.push(pts[0]);
        for i in 1..pts.len() {
            steps.push((pts[i].0, pts[i - 1].1));
        }
        let mut curve = Self::tabulated(steps)?;
        curve.description = format!("measured({} radii)", pts.len());
        Ok(curve)
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }

    pub fn kind(&self) -> &CurveKind<T> {
        &self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `log N(ε)`; tabulated curves beyond their last breakpoint are
    /// reported as uncovered.
    pub fn log_n(&self, eps: T) -> Result<T> {
        if !(eps > T::zero()) {
            return Err(Error::Parameter(format!("ε must be positive, got {eps}")));
        }
        Ok(match &self.kind {
            CurveKind::Vc { k, v } => (k.ln() - *v * eps.ln()).max(T::zero()),
            CurveKind::Log { scale } => *scale * eps.recip().ln_1p(),
            CurveKind::Tabulated { steps } => {
                let i = steps.partition_point(|(e, _)| *e < eps);
                match steps.get(i) {
                    Some((_, v)) => *v,
                    None => {
                        let (last, _) = steps[steps.len() - 1];
                        if eps <= last + last * tol::<T>(1e-12) {
                            steps[steps.len() - 1].1
                        } else {
                            return Err(Error::Coverage {
                                covered: last.to_f64().unwrap_or(f64::NAN),
                                requested: eps.to_f64().unwrap_or(f64::NAN),
                            });
                        }
                    }
                }
            }
        })
    }

    /// Largest `ε` the curve is defined at.
    pub fn coverage(&self) -> T {
        match &self.kind {
            CurveKind::Tabulated { steps } => steps[steps.len() - 1].0,
            _ => T::infinity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyIntegralResult<T> {
    pub value: T,
    /// Radius below which the integrand is extended or the tail dropped.
    pub lower_cutoff: T,
    pub quadrature_error_estimate: T,
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if !(delta > T::zero()) || delta > T::one() {
        return Err(Error::Parameter(format!(
            "δ must lie in (0, 1], got {delta}"
        )));
    }
    Ok(())
}

fn integral_core<T: Real>(curve: &EntropyCurve<T>, delta: T) -> Result<EntropyIntegralResult<T>> {
    match &curve.kind {
        CurveKind::Tabulated { steps } => tabulated_integral(steps, delta),
        // constant log N
        CurveKind::Vc { k, v } if *v == T::zero() => Ok(EntropyIntegralResult {
            value: delta * (T::one() + k.ln()).sqrt(),
            lower_cutoff: T::zero(),
            quadrature_error_estimate: T::zero(),
        }),
        _ => analytic_integral(curve, delta),
    }
}

fn tabulated_integral<T: Real>(steps: &[(T, T)], delta: T) -> Result<EntropyIntegralResult<T>> {
    let last = steps[steps.len() - 1].0;
    if delta > last + last * tol::<T>(1e-12) {
        return Err(Error::Coverage {
            covered: last.to_f64().unwrap_or(f64::NAN),
            requested: delta.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut value = T::zero();
    let mut left = T::zero();
    for &(eps, logn) in steps {
        let right = eps.min(delta);
        if right > left {
            value = value + (right - left) * (T::one() + logn).sqrt();
        }
        left = eps;
        if left >= delta {
            break;
        }
    }
    Ok(EntropyIntegralResult {
        value,
        lower_cutoff: steps[0].0,
        quadrature_error_estimate: T::zero(),
    })
}

/// Analytic curves, after `ε = e^{-u}`:
/// `J(δ) = ∫_{log(1/δ)}^∞ √(1 + log N(e^{-u})) e^{-u} du`.
fn analytic_integral<T: Real>(
    curve: &EntropyCurve<T>,
    delta: T,
) -> Result<EntropyIntegralResult<T>> {
    let u0 = delta.recip().ln();
    let u1 = u0 + lit(TAIL_WINDOW);
    let integrand = |u: T| -> T {
        let logn = match &curve.kind {
            CurveKind::Vc { k, v } => (k.ln() + *v * u).max(T::zero()),
            // log(1 + e^u) = u + log(1 + e^{-u})
            CurveKind::Log { scale } => *scale * (u + (-u).exp().ln_1p()),
            CurveKind::Tabulated { .. } => unreachable!("tabulated curves integrate exactly"),
        };
        (T::one() + logn).sqrt() * (-u).exp()
    };
    let opts = QuadOptions::default();
    let r = integrate(integrand, u0, u1, &opts)?;
    // tail beyond u1 is below √(1 + log N(e^{-u1})) e^{-u1} times a small factor
    let tail = integrand(u1) * lit(2.0);
    Ok(EntropyIntegralResult {
        value: r.value,
        lower_cutoff: (-u1).exp(),
        quadrature_error_estimate: r.error + tail,
    })
}

/// `J(δ, F, L₂)` for `δ ∈ (0, 1]` from a uniform entropy curve.
pub fn uniform_entropy_integral<T: Real>(
    curve: &EntropyCurve<T>,
    delta: T,
) -> Result<EntropyIntegralResult<T>> {
    check_delta(delta)?;
    integral_core(curve, delta)
}

/// `J_[](δ, F, ‖·‖)` for `δ ∈ (0, 1]` from a bracketing entropy curve.
pub fn bracketing_entropy_integral<T: Real>(
    curve: &EntropyCurve<T>,
    delta: T,
) -> Result<EntropyIntegralResult<T>> {
    check_delta(delta)?;
    integral_core(curve, delta)
}

/// Anything evaluable as an entropy integral `δ ↦ J(δ)`: concave,
/// nondecreasing, `J(0) = 0`.
pub trait EntropyFn<T: Real>: Send + Sync {
    fn j(&self, delta: T) -> Result<T>;

    fn describe(&self) -> String;
}

impl<T: Real> EntropyFn<T> for EntropyCurve<T> {
    fn j(&self, delta: T) -> Result<T> {
        if delta == T::zero() {
            return Ok(T::zero());
        }
        Ok(uniform_entropy_integral(self, delta)?.value)
    }

    fn describe(&self) -> String {
        self.description.clone()
    }
}

/// `J(δ) = scale · δ^exponent` on `[0, ∞)`, `exponent ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerJ<T> {
    pub scale: T,
    pub exponent: T,
}

impl<T: Real> PowerJ<T> {
    pub fn new(scale: T, exponent: T) -> Result<Self> {
        if !(scale > T::zero()) || !(exponent > T::zero() && exponent <= T::one()) {
            return Err(Error::Parameter(format!(
                "power entropy needs scale > 0 and exponent in (0, 1] (got {scale}, {exponent})"
            )));
        }
        Ok(Self { scale, exponent })
    }

    pub fn identity() -> Self {
        Self {
            scale: T::one(),
            exponent: T::one(),
        }
    }
}

impl<T: Real> EntropyFn<T> for PowerJ<T> {
    fn j(&self, delta: T) -> Result<T> {
        if delta < T::zero() {
            return Err(Error::Parameter(format!("J evaluated at negative {delta}")));
        }
        Ok(self.scale * delta.powf(self.exponent))
    }

    fn describe(&self) -> String {
        format!("{}·t^{}", self.scale, self.exponent)
    }
}

/// `J ≡ 0`, the admissible degenerate limit of the recursion lemmas.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroJ;

impl<T: Real> EntropyFn<T> for ZeroJ {
    fn j(&self, _delta: T) -> Result<T> {
        Ok(T::zero())
    }

    fn describe(&self) -> String {
        "0".into()
    }
}

/// Curve-based `J` continued past `δ = 1` with slope `√(1 + log N(1))`.
///
/// The integrand is nonincreasing, so the continuation remains concave and
/// nondecreasing; the recursion solvers need `J` on all of `(0, ∞)`.
#[derive(Debug, Clone)]
pub struct ExtendedJ<T> {
    curve: EntropyCurve<T>,
    j_one: T,
    slope: T,
}

impl<T: Real> ExtendedJ<T> {
    pub fn new(curve: EntropyCurve<T>) -> Result<Self> {
        let j_one = uniform_entropy_integral(&curve, T::one())?.value;
        let slope = (T::one() + curve.log_n(T::one())?).sqrt();
        Ok(Self {
            curve,
            j_one,
            slope,
        })
    }

    pub fn curve(&self) -> &EntropyCurve<T> {
        &self.curve
    }
}

impl<T: Real> EntropyFn<T> for ExtendedJ<T> {
    fn j(&self, delta: T) -> Result<T> {
        if delta <= T::one() {
            return self.curve.j(delta);
        }
        Ok(self.j_one + (delta - T::one()) * self.slope)
    }

    fn describe(&self) -> String {
        format!("{} (extended past 1)", self.curve.description)
    }
}

/// True when `curve` is at least the measured `log N` at every radius.
pub fn dominates<T: Real>(
    curve: &EntropyCurve<T>,
    measured: &[(T, T)],
) -> Result<Option<(T, T, T)>> {
    for &(eps, logn) in measured {
        let model = curve.log_n(eps)?;
        if model + tol::<T>(1e-12) < logn {
            return Ok(Some((eps, model, logn)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed violation (≤ 0 means slack everywhere).
    pub worst_violation: f64,
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub curve: String,
    pub tolerance: f64,
    pub properties: Vec<PropertyCheck>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

/// Violation tolerance for the structural checks.
pub const STRUCTURE_TOLERANCE: f64 = 1e-10;

const SCALE_FACTORS: [f64; 7] = [1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0];

/// Checks on `δ_grid ⊂ (0, 1]`: midpoint concavity, `J(t)/t` nonincreasing,
/// `J(Cδ) ≤ C·J(δ)` for `C ≥ 1`, subadditivity and `J(δ) ≥ δ`.
pub fn check_j_structure<T: Real>(
    j: &dyn EntropyFn<T>,
    delta_grid: &[T],
) -> Result<StructureReport> {
    let mut grid = delta_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    if grid.iter().any(|d| !(*d > T::zero()) || *d > T::one()) {
        return Err(Error::Parameter("structure grid must lie in (0, 1]".into()));
    }
    let vals: Vec<T> = grid.iter().map(|&d| j.j(d)).collect::<Result<_>>()?;
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let tolerance = STRUCTURE_TOLERANCE;
    let mut props = Vec::new();
    let mut record = |name, worst: f64, checks| {
        props.push(PropertyCheck {
            name,
            passed: worst <= tolerance,
            worst_violation: worst,
            checks,
        })
    };

    let half = lit::<T>(0.5);
    let (mut worst, mut n) = (f64::NEG_INFINITY, 0);
    for a in 0..grid.len() {
        for b in a + 1..grid.len() {
            let mid = j.j(half * (grid[a] + grid[b]))?;
            worst = worst.max(f(half * (vals[a] + vals[b]) - mid));
            n += 1;
        }
    }
    record("concavity", worst, n);

    let (mut worst, mut n) = (f64::NEG_INFINITY, 0);
    for w in 0..grid.len().saturating_sub(1) {
        worst = worst.max(f(vals[w + 1] / grid[w + 1] - vals[w] / grid[w]));
        n += 1;
    }
    record("ratio_nonincreasing", worst, n);

    let (mut worst, mut n) = (f64::NEG_INFINITY, 0);
    for (i, &d) in grid.iter().enumerate() {
        for c in SCALE_FACTORS {
            let c = lit::<T>(c);
            if c * d <= T::one() {
                worst = worst.max(f(j.j(c * d)? - c * vals[i]));
                n += 1;
            }
        }
    }
    record("scaling", worst, n);

    let (mut worst, mut n) = (f64::NEG_INFINITY, 0);
    for a in 0..grid.len() {
        for b in a..grid.len() {
            let s = grid[a] + grid[b];
            if s <= T::one() {
                worst = worst.max(f(j.j(s)? - vals[a] - vals[b]));
                n += 1;
            }
        }
    }
    record("subadditivity", worst, n);

    let (mut worst, mut n) = (f64::NEG_INFINITY, 0);
    for (i, &d) in grid.iter().enumerate() {
        worst = worst.max(f(d - vals[i]));
        n += 1;
    }
    record("dominates_identity", worst, n);

    Ok(StructureReport {
        curve: j.describe(),
        tolerance,
        properties: props,
    })
}

/// `n` equispaced points `1/n, 2/n, …, 1`.
pub fn default_structure_grid<T: Real>(n: usize) -> Vec<T> {
    (1..=n)
        .map(|k| T::from_usize(k).unwrap() / T::from_usize(n).unwrap())
        .collect()
}
