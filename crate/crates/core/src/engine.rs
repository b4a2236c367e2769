//! Bound calculators for the maximal inequalities and the devices used in
//! their proofs: the recursion lemmas, Hölder bookkeeping, the concave
//! log-modulus `k`, the Young pair `(Ψ, Ψ̄)` and auxiliary moment checks.
//!
//! Every bound is returned without its universal constant; the checkers
//! report empirical constants instead of booleans.

use crate::classes::FunctionClass;
use crate::error::{Error, Result};
use crate::integral::EntropyFn;
use crate::measure::{empirical_measure, DiscreteMeasure, SampleDraw};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{count, lit, Real};

fn nonneg<T: Real>(name: &str, x: T) -> Result<()> {
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::Parameter(format!(
            "{name} must be finite and ≥ 0, got {x}"
        )));
    }
    Ok(())
}

fn positive<T: Real>(name: &str, x: T) -> Result<()> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Parameter(format!(
            "{name} must be finite and > 0, got {x}"
        )));
    }
    Ok(())
}

fn open_unit<T: Real>(delta: T) -> Result<()> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::Parameter(format!(
            "δ must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

fn sample_size<T: Real>(n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::Parameter("n must be ≥ 1".into()));
    }
    Ok(count(n))
}

/// A bound value together with any argument clamping that was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEval<T> {
    pub value: T,
    pub clamped: bool,
}

/// `J(1)·‖F‖`.
pub fn bound_global_uniform<T: Real>(j1: T, f_norm: T) -> Result<T> {
    nonneg("J(1)", j1)?;
    nonneg("‖F‖", f_norm)?;
    Ok(j1 * f_norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L2,
    Bernstein,
}

/// `J_δ·‖F‖·(1 + J_δ/(δ²√n‖F‖))`; the norm kind only selects which size
/// measure the caller used for `J_δ` and `‖F‖`.
pub fn bound_bracketing_local<T: Real>(
    j_delta: T,
    delta: T,
    n: usize,
    f_norm: T,
    _kind: NormKind,
) -> Result<T> {
    open_unit(delta)?;
    nonneg("J(δ)", j_delta)?;
    positive("‖F‖", f_norm)?;
    let rn = sample_size::<T>(n)?.sqrt();
    Ok(j_delta * f_norm * (T::one() + j_delta / (delta * delta * rn * f_norm)))
}

/// `J(δ)·(1 + J(δ)/(δ²√n‖F‖))·‖F‖` for envelopes bounded by one.
pub fn bound_thm21<T: Real>(j_delta: T, delta: T, n: usize, f_norm: T) -> Result<T> {
    open_unit(delta)?;
    nonneg("J(δ)", j_delta)?;
    if !(f_norm > T::zero() && f_norm <= T::one()) {
        return Err(Error::Parameter(format!(
            "‖F‖ must lie in (0, 1] for a bounded envelope, got {f_norm}"
        )));
    }
    let rn = sample_size::<T>(n)?.sqrt();
    Ok(j_delta * (T::one() + j_delta / (delta * delta * rn * f_norm)) * f_norm)
}

/// `J(δ)‖F‖ + J(1/(√n‖F‖))²√n‖F‖²`, the argument clamped to 1.
pub fn bound_small_delta<T: Real>(
    j: &dyn EntropyFn<T>,
    delta: T,
    n: usize,
    f_norm: T,
) -> Result<BoundEval<T>> {
    open_unit(delta)?;
    if !(f_norm > T::zero() && f_norm <= T::one()) {
        return Err(Error::Parameter(format!(
            "‖F‖ must lie in (0, 1], got {f_norm}"
        )));
    }
    let rn = sample_size::<T>(n)?.sqrt();
    let arg = (rn * f_norm).recip();
    let clamped = arg > T::one();
    let ja = j.j(arg.min(T::one()))?;
    Ok(BoundEval {
        value: j.j(delta)? * f_norm + ja * ja * rn * f_norm * f_norm,
        clamped,
    })
}

/// `J(δ)·(1 + J(δ^{1/p})/(δ²√n)·(F_mom/F₂)^{2−1/p})^{p/(2p−1)}·F₂` with
/// `F_mom = ‖F‖_{P,(4p−2)/(p−1)}`.
pub fn bound_thm31<T: Real>(
    j: &dyn EntropyFn<T>,
    delta: T,
    n: usize,
    p: T,
    f2: T,
    fmom: T,
) -> Result<T> {
    open_unit(delta)?;
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
    }
    positive("‖F‖₂", f2)?;
    positive("‖F‖ moment", fmom)?;
    let rn = sample_size::<T>(n)?.sqrt();
    let two = lit::<T>(2.0);
    let inner = T::one()
        + j.j(delta.powf(p.recip()))? / (delta * delta * rn) * (fmom / f2).powf(two - p.recip());
    Ok(j.j(delta)? * inner.powf(p / (two * p - T::one())) * f2)
}

/// `δ·(log(1/δ))^{1/p}`.
pub fn thm32_radius<T: Real>(delta: T, p: T) -> T {
    delta * delta.recip().ln().powf(p.recip())
}

/// `c·J(δ)·(1 + J(δ(log(1/δ))^{1/p})/(δ²√n))`, radius clamped to 1.
pub fn bound_thm32<T: Real>(
    j: &dyn EntropyFn<T>,
    delta: T,
    n: usize,
    p: T,
    c: T,
) -> Result<BoundEval<T>> {
    if !(delta > T::zero() && delta < lit(0.5)) {
        return Err(Error::Parameter(format!(
            "δ must lie in (0, 1/2), got {delta}"
        )));
    }
    positive("p", p)?;
    positive("c", c)?;
    let rn = sample_size::<T>(n)?.sqrt();
    let radius = thm32_radius(delta, p);
    let clamped = radius > T::one();
    let inner = T::one() + j.j(radius.min(T::one()))? / (delta * delta * rn);
    Ok(BoundEval {
        value: c * j.j(delta)? * inner,
        clamped,
    })
}

/// Envelope moments the constant of the exponential-moment bound depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm32Moments<T> {
    pub pf2: T,
    pub pf4: T,
    pub p_exp_f: T,
    pub pg: T,
}

/// `PF²`, `PF⁴`, `P exp(F^{p+ρ})` and `PG` with `G = Ψ̄(F² log^r(2+F²))`,
/// `r = 2/p`.
pub fn thm32_moments<T: Real>(
    p_measure: &DiscreteMeasure<T>,
    envelope: &[T],
    p: T,
    rho: T,
) -> Result<Thm32Moments<T>> {
    positive("p", p)?;
    positive("ρ", rho)?;
    if envelope.len() != p_measure.weights().len() {
        return Err(Error::Parameter(
            "envelope length differs from the measure's grid".into(),
        ));
    }
    let w = p_measure.weights();
    let g = g_function(envelope, lit::<T>(2.0) / p)?;
    let mut m = Thm32Moments {
        pf2: T::zero(),
        pf4: T::zero(),
        p_exp_f: T::zero(),
        pg: T::zero(),
    };
    for (i, &f) in envelope.iter().enumerate() {
        let f2 = f * f;
        let e = f.powf(p + rho);
        if e > lit(700.0) {
            return Err(Error::Range(format!(
                "exp(F^(p+ρ)) overflows at grid point {i}"
            )));
        }
        m.pf2 = m.pf2 + w[i] * f2;
        m.pf4 = m.pf4 + w[i] * f2 * f2;
        m.p_exp_f = m.p_exp_f + w[i] * e.exp();
        m.pg = m.pg + w[i] * g[i];
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderExponents<T> {
    pub p: T,
    pub q: T,
    pub s: T,
    pub sq: T,
}

/// `q = p/(p−1)`, `s = 4 − 2/p`, and `sq = (4p−2)/(p−1)` checked against `s·q`.
pub fn holder_exponents<T: Real>(p: T) -> Result<HolderExponents<T>> {
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::Parameter(format!(
            "Hölder exponent p must exceed 1, got {p}"
        )));
    }
    let one = T::one();
    let q = p / (p - one);
    let s = lit::<T>(4.0) - lit::<T>(2.0) / p;
    let sq = (lit::<T>(4.0) * p - lit(2.0)) / (p - one);
    let gap = (s * q - sq).abs() / sq;
    let conj = (p.recip() + q.recip() - one).abs();
    let scale = lit::<T>(1e-12).max(lit::<T>(16.0) * T::epsilon());
    if gap > scale || conj > scale {
        return Err(Error::Verification(format!(
            "Hölder bookkeeping inconsistent at p={p}"
        )));
    }
    Ok(HolderExponents { p, q, s, sq })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> InequalityCheck<T> {
    pub fn slack(&self) -> T {
        self.rhs - self.lhs
    }

    /// `lhs ≤ rhs` up to `rel_tol·max(1, |rhs|)`.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs + lit::<T>(rel_tol) * self.rhs.abs().max(T::one())
    }
}

/// `σ_{n,4}⁴ ≤ σ_{n,2}^{2/p}(P_n F^{sq})^{1/q}` on one empirical draw.
pub fn holder_diameter_check<T: Real>(
    class: &FunctionClass<T>,
    draw: &SampleDraw,
    p: T,
) -> Result<InequalityCheck<T>> {
    let h = holder_exponents(p)?;
    let pn = empirical_measure(class.grid(), draw)?;
    let w = pn.weights();
    let moment = |f: &[T], e: T| -> T {
        f.iter()
            .zip(w)
            .filter(|(_, &wi)| wi > T::zero())
            .map(|(&x, &wi)| wi * x.abs().powf(e))
            .sum()
    };
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let mut s4 = T::zero();
    let mut s2 = T::zero();
    for f in class.members() {
        s4 = s4.max(moment(f.values(), four));
        s2 = s2.max(moment(f.values(), two));
    }
    let env = moment(class.envelope().values(), h.sq);
    Ok(InequalityCheck {
        lhs: s4,
        rhs: s2.powf(p.recip()) * env.powf(h.q.recip()),
    })
}

/// Inputs of the recursion `z² ≤ A² + B²·J(z^r)`.
pub struct RecursionProblem<'a, T> {
    pub j: &'a dyn EntropyFn<T>,
    pub a: T,
    pub b: T,
    pub r: T,
}

impl<T: Real> RecursionProblem<'_, T> {
    fn validate(&self) -> Result<()> {
        positive("A", self.a)?;
        positive("B", self.b)?;
        if !(self.r > T::zero() && self.r < lit(2.0)) {
            return Err(Error::Parameter(format!(
                "recursion exponent r must lie in (0, 2), got {}",
                self.r
            )));
        }
        Ok(())
    }
}

const BRACKET_DOUBLINGS: i32 = 60;
const BISECTION_REL_TOL: f64 = 1e-12;

/// Largest root of a function `g` with `g(z)/z²` increasing, `g(a/2) ≤ 0`.
fn largest_crossing<T: Real>(a: T, g: impl Fn(T) -> Result<T>) -> Result<T> {
    let mut lo = a * lit(0.5);
    if g(lo)? > T::zero() {
        return Err(Error::NonBracketing(format!(
            "recursion function positive at the lower bracket {lo}"
        )));
    }
    let mut hi = a;
    let cap = a * lit::<T>(2.0).powi(BRACKET_DOUBLINGS);
    while g(hi)? <= T::zero() {
        lo = hi;
        hi = hi + hi;
        if hi > cap {
            return Err(Error::NonBracketing(format!(
                "no sign change below 2^{BRACKET_DOUBLINGS}·A; J grows too fast"
            )));
        }
    }
    let rel = lit::<T>(BISECTION_REL_TOL).max(lit::<T>(4.0) * T::epsilon());
    while hi - lo > rel * hi {
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Largest `z` with `z² ≤ A² + B²·J(z^r)`.
pub fn solve_recursion<T: Real>(prob: &RecursionProblem<'_, T>) -> Result<T> {
    prob.validate()?;
    let (a2, b2) = (prob.a * prob.a, prob.b * prob.b);
    largest_crossing(prob.a, |z| Ok(z * z - a2 - b2 * prob.j.j(z.powf(prob.r))?))
}

/// `J(A)·(1 + J(A^r)(B/A)²)^{1/(2−r)}`.
pub fn lemma22_bound<T: Real>(prob: &RecursionProblem<'_, T>) -> Result<T> {
    prob.validate()?;
    let ba = prob.b / prob.a;
    let inner = T::one() + prob.j.j(prob.a.powf(prob.r))? * ba * ba;
    Ok(prob.j.j(prob.a)? * inner.powf((lit::<T>(2.0) - prob.r).recip()))
}

/// Concave, increasing `k` equal to `t·log^r(1/t)` on `(0, t*]` and linear
/// with slope one beyond, where `t*` is the point at which the derivative of
/// `t·log^r(1/t)` has decreased to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcaveLogModulus<T> {
    pub r: T,
    pub t_star: T,
    /// `k(t) = t + intercept` for `t ≥ t*`.
    pub intercept: T,
}

pub fn make_concave_log_modulus<T: Real>(r: T) -> Result<ConcaveLogModulus<T>> {
    positive("r", r)?;
    // Solve h(L) = L^{r-1}(L - r) = 1 for L = log(1/t*); h increases on (max(r-1, 0), ∞).
    let h = |l: T| l.powf(r - T::one()) * (l - r) - T::one();
    let floor = (r - T::one()).max(T::zero());
    let mut lo = floor;
    let mut hi = floor + T::one();
    while h(hi) <= T::zero() {
        lo = hi;
        hi = hi + hi;
        if !hi.is_finite() {
            return Err(Error::NonBracketing(
                "log-modulus breakpoint not bracketed".into(),
            ));
        }
    }
    for _ in 0..400 {
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l = lit::<T>(0.5) * (lo + hi);
    if !(l > floor) {
        return Err(Error::Verification(format!(
            "breakpoint log(1/t*)={l} outside the concavity region (> {floor})"
        )));
    }
    let t_star = (-l).exp();
    let k_star = t_star * l.powf(r);
    Ok(ConcaveLogModulus {
        r,
        t_star,
        intercept: k_star - t_star,
    })
}

impl<T: Real> ConcaveLogModulus<T> {
    pub fn k(&self, t: T) -> T {
        if t <= T::zero() {
            T::zero()
        } else if t <= self.t_star {
            t * t.recip().ln().powf(self.r)
        } else {
            t + self.intercept
        }
    }

    /// `ℓ^r(t) = k(t)/t`.
    pub fn ell_r(&self, t: T) -> T {
        self.k(t) / t
    }

    /// `ℓ(t) = (k(t)/t)^{1/r}`.
    pub fn ell(&self, t: T) -> T {
        self.ell_r(t).powf(self.r.recip())
    }

    /// Grid checks of monotonicity, midpoint concavity, `k(Cz) ≤ C·k(z)` and
    /// two-sided comparability with the identity; returns the worst violation
    /// of each (nonpositive when satisfied) and the comparability range.
    pub fn check_shape(&self, grid: &[T], factors: &[T]) -> ModulusShape<T> {
        let mut s = ModulusShape {
            increasing: T::neg_infinity(),
            concavity: T::neg_infinity(),
            scaling: T::neg_infinity(),
            ratio_min: T::infinity(),
            ratio_max: T::zero(),
        };
        let half = lit::<T>(0.5);
        for (i, &t) in grid.iter().enumerate() {
            let ratio = self.ell_r(t);
            s.ratio_min = s.ratio_min.min(ratio);
            s.ratio_max = s.ratio_max.max(ratio);
            if let Some(&u) = grid.get(i + 1) {
                s.increasing = s.increasing.max(self.k(t) - self.k(u));
                let mid = self.k(half * (t + u));
                s.concavity = s.concavity.max(half * (self.k(t) + self.k(u)) - mid);
            }
            for &c in factors {
                s.scaling = s.scaling.max(self.k(c * t) - c * self.k(t));
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusShape<T> {
    pub increasing: T,
    pub concavity: T,
    pub scaling: T,
    pub ratio_min: T,
    pub ratio_max: T,
}

/// Largest `z` with `z² ≤ A² + B²·J(k(z))`.
pub fn solve_recursion_log<T: Real>(
    j: &dyn EntropyFn<T>,
    k: &ConcaveLogModulus<T>,
    a: T,
    b: T,
) -> Result<T> {
    positive("A", a)?;
    positive("B", b)?;
    let (a2, b2) = (a * a, b * b);
    largest_crossing(a, |z| Ok(z * z - a2 - b2 * j.j(k.k(z))?))
}

/// `J(A)·(1 + J(k(A))(B/A)²)`.
pub fn lemma33_bound<T: Real>(
    j: &dyn EntropyFn<T>,
    k: &ConcaveLogModulus<T>,
    a: T,
    b: T,
) -> Result<T> {
    positive("A", a)?;
    positive("B", b)?;
    let ba = b / a;
    Ok(j.j(a)? * (T::one() + j.j(k.k(a))? * ba * ba))
}

/// `ψ(f) = log^r(1+f)` and its inverse `ψ̄(g) = e^{g^{1/r}} − 1`, with
/// primitives computed by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoungPair<T> {
    pub r: T,
}

/// Exponent beyond which `ψ̄` is reported as overflowing.
const EXP_LIMIT: f64 = 700.0;

impl<T: Real> YoungPair<T> {
    pub fn new(r: T) -> Result<Self> {
        positive("r", r)?;
        Ok(Self { r })
    }

    pub fn psi(&self, f: T) -> T {
        f.ln_1p().powf(self.r)
    }

    pub fn psi_bar(&self, g: T) -> Result<T> {
        let e = g.powf(self.r.recip());
        if e > lit(EXP_LIMIT) {
            return Err(Error::Range(format!("ψ̄({g}) overflows")));
        }
        Ok(e.exp_m1())
    }

    fn quad_opts() -> QuadOptions {
        QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_intervals: 4000,
        }
    }

    /// `Ψ(f) = ∫₀^f ψ`.
    pub fn big_psi(&self, f: T) -> Result<T> {
        nonneg("f", f)?;
        let opts = QuadOptions {
            abs_tol: Self::quad_opts().abs_tol * f.to_f64().unwrap_or(1.0).max(1.0),
            ..Self::quad_opts()
        };
        Ok(integrate(|s| self.psi(s), T::zero(), f, &opts)?.value)
    }

    /// `Ψ̄(g) = ∫₀^g ψ̄`.
    pub fn big_psi_bar(&self, g: T) -> Result<T> {
        nonneg("g", g)?;
        self.psi_bar(g)?;
        Ok(integrate(
            |s| self.psi_bar(s).unwrap_or(T::nan()),
            T::zero(),
            g,
            &Self::quad_opts(),
        )?
        .value)
    }
}

/// Both sides of Young's inequality `f·g ≤ Ψ(f) + Ψ̄(g)`.
pub fn young_pair_check<T: Real>(y: &YoungPair<T>, f: T, g: T) -> Result<InequalityCheck<T>> {
    nonneg("f", f)?;
    nonneg("g", g)?;
    Ok(InequalityCheck {
        lhs: f * g,
        rhs: y.big_psi(f)? + y.big_psi_bar(g)?,
    })
}

/// `max [log(2 + t/C)/ℓ(C)] / log(2 + t)` over the product grid.
pub fn boundlog_check<T: Real>(r: T, t_grid: &[T], c_grid: &[T]) -> Result<T> {
    let k = make_concave_log_modulus(r)?;
    if t_grid.iter().chain(c_grid).any(|x| !(*x > T::zero())) {
        return Err(Error::Parameter("grids must be positive".into()));
    }
    let two = lit::<T>(2.0);
    let mut worst = T::zero();
    for &c in c_grid {
        let ell = k.ell(c);
        for &t in t_grid {
            worst = worst.max((two + t / c).ln() / ell / (two + t).ln());
        }
    }
    Ok(worst)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * count::<T>(i) / count::<T>(n - 1)).exp())
        .collect()
}

/// `G = Ψ̄(F² log^r(2 + F²))` pointwise.
pub fn g_function<T: Real>(envelope: &[T], r: T) -> Result<Vec<T>> {
    let y = YoungPair::new(r)?;
    envelope
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let f2 = f * f;
            let arg = f2 * (lit::<T>(2.0) + f2).ln().powf(r);
            y.big_psi_bar(arg).map_err(|e| match e {
                Error::Range(_) => Error::Range(format!("Ψ̄ overflows at grid point {i} (F={f})")),
                other => other,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourthMomentReport<T> {
    pub max_ratio: T,
    pub argmax: usize,
    pub lhs: T,
    pub rhs: T,
    pub png: T,
}

/// `max_f P_n f⁴ / [k(P_n f²)(1 + P_n G)]` on one draw, `0/0` read as `0`.
pub fn fourth_moment_bound_check<T: Real>(
    class: &FunctionClass<T>,
    p: &DiscreteMeasure<T>,
    draw: &SampleDraw,
    r: T,
) -> Result<FourthMomentReport<T>> {
    if p.grid().points() != class.grid().points() {
        return Err(Error::Parameter(
            "measure and class live on different grids".into(),
        ));
    }
    let k = make_concave_log_modulus(r)?;
    let g = g_function(class.envelope().values(), r)?;
    let pn = empirical_measure(class.grid(), draw)?;
    let w = pn.weights();
    let png: T = w.iter().zip(&g).map(|(&wi, &gi)| wi * gi).sum();
    let mut report = FourthMomentReport {
        max_ratio: T::zero(),
        argmax: 0,
        lhs: T::zero(),
        rhs: T::zero(),
        png,
    };
    for (idx, f) in class.members().iter().enumerate() {
        let (mut m2, mut m4) = (T::zero(), T::zero());
        for (&x, &wi) in f.values().iter().zip(w) {
            let x2 = x * x;
            m2 = m2 + wi * x2;
            m4 = m4 + wi * x2 * x2;
        }
        let rhs = k.k(m2) * (T::one() + png);
        let ratio = if m4 == T::zero() { T::zero() } else { m4 / rhs };
        if ratio > report.max_ratio {
            report = FourthMomentReport {
                max_ratio: ratio,
                argmax: idx,
                lhs: m4,
                rhs,
                png,
            };
        }
    }
    Ok(report)
}

/// One point of a recursion-lemma sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaSweepRow {
    pub exponent: f64,
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub z_max: f64,
    pub j_z: f64,
    pub bound: f64,
    pub ratio: f64,
}

pub const SWEEP_J_EXPONENTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const SWEEP_A: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
pub const SWEEP_B22: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
pub const SWEEP_R22: [f64; 3] = [0.5, 1.0, 1.5];
pub const SWEEP_B33: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const SWEEP_R33: [f64; 3] = [0.5, 1.0, 2.0];

/// `J(z_max)/J(A)[1+J(A^r)(B/A)²]^{1/(2−r)}` over `J = t^a` and the
/// sweep grids.
pub fn lemma22_sweep() -> Result<Vec<LemmaSweepRow>> {
    use crate::integral::PowerJ;
    let mut rows = Vec::new();
    for &e in &SWEEP_J_EXPONENTS {
        let j = PowerJ::new(1.0, e)?;
        for &r in &SWEEP_R22 {
            for &a in &SWEEP_A {
                for &b in &SWEEP_B22 {
                    let prob = RecursionProblem { j: &j, a, b, r };
                    let z = solve_recursion(&prob)?;
                    let bound = lemma22_bound(&prob)?;
                    let jz = j.j(z)?;
                    rows.push(LemmaSweepRow {
                        exponent: e,
                        a,
                        b,
                        r,
                        z_max: z,
                        j_z: jz,
                        bound,
                        ratio: jz / bound,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// `J(z_max)/J(A)[1+J(k(A))(B/A)²]` over `J = t^a`, log-moduli of order `r`
/// and the sweep grids.
pub fn lemma33_sweep() -> Result<Vec<LemmaSweepRow>> {
    use crate::integral::PowerJ;
    let mut rows = Vec::new();
    for &e in &SWEEP_J_EXPONENTS {
        let j = PowerJ::new(1.0, e)?;
        for &r in &SWEEP_R33 {
            let k = make_concave_log_modulus(r)?;
            for &a in &SWEEP_A {
                for &b in &SWEEP_B33 {
                    let z = solve_recursion_log(&j, &k, a, b)?;
                    let bound = lemma33_bound(&j, &k, a, b)?;
                    let jz = j.j(z)?;
                    rows.push(LemmaSweepRow {
                        exponent: e,
                        a,
                        b,
                        r,
                        z_max: z,
                        j_z: jz,
                        bound,
                        ratio: jz / bound,
                    });
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral::{PowerJ, ZeroJ};
    use approx::assert_relative_eq;

    #[test]
    fn simple_bounds() {
        assert_eq!(bound_global_uniform(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(bound_global_uniform(2.5, 0.4).unwrap(), 1.0);
        let v = bound_bracketing_local(0.5, 0.1, 100, 1.0, NormKind::L2).unwrap();
        assert_relative_eq!(v, 3.0, epsilon = 1e-12);
        assert_relative_eq!(
            bound_thm21(0.5, 0.1, 100, 1.0).unwrap(),
            3.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            bound_thm21(0.2, 0.2, 25, 1.0).unwrap(),
            0.4,
            epsilon = 1e-12
        );
        assert!(bound_thm21(0.5, 0.1, 100, 1.5).is_err());
        assert!(bound_bracketing_local(0.5, 1.0, 100, 1.0, NormKind::Bernstein).is_err());
        let big: f64 =
            bound_bracketing_local(0.5, 0.1, 1_000_000_000_000, 1.0, NormKind::L2).unwrap();
        assert!((big - 0.5).abs() < 1e-3);
    }

    #[test]
    fn curve_bounds() {
        let id = PowerJ::identity();
        let b = bound_small_delta(&id, 0.01, 100, 1.0).unwrap();
        assert_relative_eq!(b.value, 0.11, epsilon = 1e-12);
        assert!(!b.clamped);
        // (0.25, p=2, n=16, F₂=Fmom=1) → 0.25·3^{2/3}
        let v = bound_thm31(&id, 0.25, 16, 2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 0.25 * 3f64.powf(2.0 / 3.0), epsilon = 1e-12);
        assert!(bound_thm31(&id, 0.25, 16, 1.0, 1.0, 1.0).is_err());
        let e = (-1.0f64).exp();
        assert_relative_eq!(thm32_radius(e, 1.0), e, epsilon = 1e-15);
        assert!(bound_thm32(&id, 0.5, 16, 2.0, 1.0).is_err());
        assert!(bound_thm32(&id, 0.3, 16, 2.0, 1.0).unwrap().value > 0.0);
    }

    #[test]
    fn holder() {
        let h = holder_exponents(2.0).unwrap();
        assert_eq!((h.q, h.s, h.sq), (2.0, 3.0, 6.0));
        let h = holder_exponents(3.0).unwrap();
        assert_relative_eq!(h.q, 1.5, epsilon = 1e-15);
        assert_relative_eq!(h.sq, 5.0, epsilon = 1e-14);
        assert!(holder_exponents(1.0).is_err());
        assert!(holder_exponents(1.0 + 1e-9).unwrap().sq > 1e9);
    }

    #[test]
    fn recursion_closed_forms() {
        let id = PowerJ::identity();
        let prob = RecursionProblem {
            j: &id,
            a: 1.0,
            b: 1.0,
            r: 1.0,
        };
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((solve_recursion(&prob).unwrap() - golden).abs() < 1e-10);
        assert_relative_eq!(lemma22_bound(&prob).unwrap(), 2.0, epsilon = 1e-15);
        let zero = RecursionProblem::<f64> {
            j: &ZeroJ,
            a: 0.7,
            b: 3.0,
            r: 1.0,
        };
        assert!((solve_recursion(&zero).unwrap() - 0.7).abs() < 1e-11);
        let tiny = RecursionProblem {
            j: &id,
            a: 0.7,
            b: 1e-9,
            r: 1.0,
        };
        assert!((solve_recursion(&tiny).unwrap() - 0.7).abs() < 1e-10);
        assert!(solve_recursion(&RecursionProblem {
            j: &id,
            a: 1.0,
            b: 1.0,
            r: 2.0
        })
        .is_err());
    }

    struct Quadratic;
    impl EntropyFn<f64> for Quadratic {
        fn j(&self, d: f64) -> Result<f64> {
            Ok(d * d * 10.0)
        }
        fn describe(&self) -> String {
            "10t²".into()
        }
    }

    #[test]
    fn non_bracketing_is_reported() {
        let prob = RecursionProblem {
            j: &Quadratic,
            a: 1.0,
            b: 1.0,
            r: 1.5,
        };
        assert!(matches!(
            solve_recursion(&prob),
            Err(Error::NonBracketing(_))
        ));
    }

    #[test]
    fn log_modulus_breakpoints() {
        let k1 = make_concave_log_modulus(1.0).unwrap();
        assert!((k1.t_star - (-2.0f64).exp()).abs() < 1e-12);
        assert!((k1.k(k1.t_star) - 2.0 * (-2.0f64).exp()).abs() < 1e-12);
        let k2 = make_concave_log_modulus(2.0).unwrap();
        assert!((k2.t_star - (-(1.0 + 2f64.sqrt())).exp()).abs() < 1e-12);
        let kh = make_concave_log_modulus(0.5).unwrap();
        let root = (1.0 + 3f64.sqrt()) / 2.0;
        assert!((kh.t_star - (-(root * root)).exp()).abs() < 1e-12);
        for k in [k1, k2, kh] {
            let g = log_grid(1e-8, 100.0, 400);
            let s = k.check_shape(&g, &[1.0, 1.5, 2.0, 10.0]);
            assert!(
                s.increasing < 0.0 && s.concavity <= 1e-12 && s.scaling <= 1e-12,
                "{s:?}"
            );
            assert!(s.ratio_min >= 1.0);
        }
    }

    #[test]
    fn young_pair() {
        for r in [0.5f64, 1.0, 2.0] {
            let y = YoungPair::new(r).unwrap();
            for x in [0.0f64, 0.1, 1.0, 7.5, 40.0] {
                assert!((y.psi_bar(y.psi(x)).unwrap() - x).abs() <= 1e-12 * x.max(1.0));
            }
            let c = young_pair_check(&y, 0.0, 0.0).unwrap();
            assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
            for f in [0.3, 2.0, 9.0] {
                let c = young_pair_check(&y, f, y.psi(f)).unwrap();
                assert!(
                    (c.lhs - c.rhs).abs() < 1e-8 * c.rhs.max(1.0),
                    "r={r} f={f} {c:?}"
                );
            }
            assert!(young_pair_check(&y, 3.0, 0.1).unwrap().holds(1e-9));
        }
        assert!(matches!(
            YoungPair::new(1.0).unwrap().big_psi_bar(800.0),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn boundlog_limits() {
        let g = log_grid(1e-6f64, 1e6, 49);
        let c = boundlog_check(1.0, &g, &g).unwrap();
        assert!(
            c.is_finite() && c >= 1.0 / make_concave_log_modulus(1.0).unwrap().ell(1.0) - 1e-12
        );
    }

    #[test]
    fn lemma_sweeps_are_finite() {
        for row in lemma22_sweep()
            .unwrap()
            .iter()
            .chain(lemma33_sweep().unwrap().iter())
        {
            assert!(row.ratio.is_finite() && row.ratio > 0.0, "{row:?}");
        }
        let id = PowerJ::identity();
        let k = make_concave_log_modulus(1.0).unwrap();
        // on the linear branch with J = id the recursion is quadratic
        let (a, b) = (0.4f64, 2.0f64);
        let z = solve_recursion_log(&id, &k, a, b).unwrap();
        let want = (b * b + (b.powi(4) + 4.0 * (a * a + b * b * k.intercept)).sqrt()) / 2.0;
        assert!((z - want).abs() < 1e-10 * want);
    }
}
