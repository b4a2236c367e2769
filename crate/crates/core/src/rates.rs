//! Rates of convergence from entropy integrals: modulus functions, the
//! fixed-point rate solver, and an isotonic-regression demonstration whose
//! empirical rate is compared with the solver's prediction.

use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use crate::classes::make_monotone_class;
use crate::error::{Error, Result};
use crate::integral::EntropyFn;
use crate::measure::{DiscreteMeasure, Grid, GridFunction};
use crate::montecarlo::{ols, run_indexed, SlopeFit};
use crate::scalar::{count, lit, Real};
use crate::seed::{noise_rng, replication_seed};

type Phi<T> = Arc<dyn Fn(T) -> Result<T> + Send + Sync>;

/// `δ ↦ φ_n(δ)` with `φ_n(δ)/δ^α` nonincreasing for a declared `α < 2`.
#[derive(Clone)]
pub struct ModulusFunction<T> {
    phi: Phi<T>,
    alpha: T,
    provenance: String,
}

impl<T: Real> std::fmt::Debug for ModulusFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModulusFunction")
            .field("alpha", &self.alpha)
            .field("provenance", &self.provenance)
            .finish()
    }
}

/// Points of the decrease-property verification grid on `[1e-6, 1]`.
pub const VERIFICATION_POINTS: usize = 241;

impl<T: Real> ModulusFunction<T> {
    /// Wraps `phi` after checking `φ(δ)/δ^α` is nonincreasing on a
    /// log-spaced grid of `[1e-6, 1]`.
    pub fn new(phi: Phi<T>, alpha: T, provenance: impl Into<String>) -> Result<Self> {
        if !(alpha < lit(2.0)) {
            return Err(Error::Parameter(format!(
                "decrease exponent α must be < 2, got {alpha}"
            )));
        }
        let m = Self {
            phi,
            alpha,
            provenance: provenance.into(),
        };
        m.verify()?;
        Ok(m)
    }

    /// `c·δ^a`.
    pub fn power(c: T, a: T) -> Result<Self> {
        if !(c > T::zero()) || !(a >= T::zero()) {
            return Err(Error::Parameter(format!(
                "power modulus needs c > 0, a ≥ 0 (got {c}, {a})"
            )));
        }
        Self::new(
            Arc::new(move |d: T| Ok(c * d.powf(a))),
            a,
            format!("{c}·δ^{a}"),
        )
    }

    fn verify(&self) -> Result<()> {
        let grid = crate::engine::log_grid(lit::<T>(1e-6), T::one(), VERIFICATION_POINTS);
        let slack = lit::<T>(1e-12).max(lit::<T>(64.0) * T::epsilon());
        let mut prev: Option<(T, T)> = None;
        for d in grid {
            let v = self.eval(d)? / d.powf(self.alpha);
            if let Some((pd, pv)) = prev {
                if v > pv + slack * pv.abs().max(T::one()) {
                    return Err(Error::Verification(format!(
                        "φ(δ)/δ^{} increases between δ={pd} and δ={d} for {}",
                        self.alpha, self.provenance
                    )));
                }
            }
            prev = Some((d, v));
        }
        Ok(())
    }

    pub fn eval(&self, delta: T) -> Result<T> {
        let v = (self.phi)(delta)?;
        if !v.is_finite() || v < T::zero() {
            return Err(Error::Range(format!(
                "φ({delta}) = {v} is not a finite nonnegative value"
            )));
        }
        Ok(v)
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

/// `φ_n(δ) = J(δ)(1 + J(δ)/(δ²√n))`, declared with `α = 1`.
pub fn modulus_from_entropy<T: Real>(
    j: Arc<dyn EntropyFn<T>>,
    n: usize,
) -> Result<ModulusFunction<T>> {
    if n == 0 {
        return Err(Error::Parameter("n must be ≥ 1".into()));
    }
    let rn = count::<T>(n).sqrt();
    let label = format!("J(δ)(1+J(δ)/(δ²√n)) with J={}, n={n}", j.describe());
    ModulusFunction::new(
        Arc::new(move |d: T| {
            let jd = j.j(d)?;
            Ok(jd * (T::one() + jd / (d * d * rn)))
        }),
        T::one(),
        label,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSolution<T> {
    pub delta: T,
    /// `φ(1) > √n`: no `δ ≤ 1` satisfies the rate inequality.
    pub no_rate: bool,
}

/// Smallest `δ ∈ (0, 1]` with `φ_n(δ) ≤ √n δ²`.
pub fn solve_rate<T: Real>(phi: &ModulusFunction<T>, n: usize) -> Result<RateSolution<T>> {
    if n == 0 {
        return Err(Error::Parameter("n must be ≥ 1".into()));
    }
    let rn = count::<T>(n).sqrt();
    let satisfied = |d: T| -> Result<bool> { Ok(phi.eval(d)? <= rn * d * d) };
    if !satisfied(T::one())? {
        return Ok(RateSolution {
            delta: T::one(),
            no_rate: true,
        });
    }
    let mut hi = T::one();
    let mut lo = lit::<T>(0.5);
    while satisfied(lo)? {
        hi = lo;
        lo = lo * lit(0.5);
        if lo < T::min_positive_value() {
            return Err(Error::Range(format!(
                "φ vanishes too fast near 0 for {}",
                phi.provenance()
            )));
        }
    }
    loop {
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if satisfied(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RateSolution {
        delta: hi,
        no_rate: false,
    })
}

/// Smallest `δ ∈ (0, 1]` with `J(δ) ≤ √n δ²`.
pub fn rate_from_entropy<T: Real>(j: Arc<dyn EntropyFn<T>>, n: usize) -> Result<RateSolution<T>> {
    let label = j.describe();
    let phi = ModulusFunction::new(Arc::new(move |d: T| j.j(d)), T::one(), format!("J={label}"))?;
    solve_rate(&phi, n)
}

/// Nondecreasing least-squares fit by pool-adjacent-violators.
pub fn isotonic_least_squares<T: Real>(y: &[T]) -> Result<GridFunction<T>> {
    if y.is_empty() {
        return Err(Error::Parameter(
            "isotonic regression needs at least one value".into(),
        ));
    }
    // (sum, count) per pooled block
    let mut blocks: Vec<(T, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 2];
            let (s2, c2) = blocks[blocks.len() - 1];
            if s1 * count::<T>(c2) <= s2 * count::<T>(c1) {
                break;
            }
            blocks.pop();
            *blocks.last_mut().unwrap() = (s1 + s2, c1 + c2);
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (s, c) in blocks {
        let mean = s / count::<T>(c);
        out.extend(std::iter::repeat(mean).take(c));
    }
    GridFunction::new(out)
}

/// Least-squares contrast `m_θ(x, y) = (y − θ(x))²` over a finite family
/// of regression functions, with `d` the `L₂` distance under the design.
#[derive(Debug, Clone)]
pub struct ContrastModel<T> {
    pub design: DiscreteMeasure<T>,
    pub thetas: Vec<GridFunction<T>>,
    pub truth: usize,
    pub sigma: T,
}

impl<T: Real> ContrastModel<T> {
    /// Nondecreasing step functions with `levels + 1` values on an `m`-point
    /// uniform design.
    pub fn isotonic(m: usize, levels: usize, truth: usize, sigma: T) -> Result<Self> {
        let grid = Arc::new(Grid::unit(m)?);
        let class =
            make_monotone_class(Arc::clone(&grid), levels, crate::classes::DEFAULT_CLASS_CAP)?;
        if truth >= class.len() {
            return Err(Error::Parameter(format!(
                "truth index {truth} outside a family of {}",
                class.len()
            )));
        }
        Ok(Self {
            design: DiscreteMeasure::uniform(grid),
            thetas: class.members().to_vec(),
            truth,
            sigma,
        })
    }

    /// `P m_θ = Σ_x w_x (E[Y²|x] − 2θ(x)E[Y|x] + θ(x)²)` with
    /// `E[Y|x] = θ₀(x)` and `Var(Y|x) = σ²`.
    pub fn population_contrast(&self, theta: usize) -> Result<T> {
        let t0 = self.thetas[self.truth].values();
        let th = self.thetas[theta].values();
        let s2 = self.sigma * self.sigma;
        let two = lit::<T>(2.0);
        Ok(self
            .design
            .weights()
            .iter()
            .zip(t0.iter().zip(th))
            .map(|(&w, (&m, &t))| w * (m * m + s2 - two * t * m + t * t))
            .sum())
    }

    pub fn distance(&self, a: usize, b: usize) -> Result<T> {
        self.design
            .lr_distance(&self.thetas[a], &self.thetas[b], lit(2.0))
    }

    /// `min_{θ ≠ θ₀} (P m_θ − P m_θ₀)/d²(θ, θ₀)`, over the whole family.
    pub fn identifiability_constant(&self) -> Result<T> {
        let base = self.population_contrast(self.truth)?;
        let mut c = T::infinity();
        for i in 0..self.thetas.len() {
            let d = self.distance(i, self.truth)?;
            if d > T::zero() {
                c = c.min((self.population_contrast(i)? - base) / (d * d));
            }
        }
        if !(c > T::zero()) {
            return Err(Error::Verification(format!(
                "contrast is not identifiable (constant {c})"
            )));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone)]
pub struct RateExperiment<T> {
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub sigma: T,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow<T> {
    pub n: usize,
    pub mean_error: T,
    pub stderr: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport<T> {
    pub rows: Vec<RateRow<T>>,
    pub fit: Option<SlopeFit<T>>,
    /// `1.96·stderr` of the fitted slope.
    pub half_width: Option<T>,
    pub predicted_slope: T,
    pub degenerate: bool,
}

/// Fixed-design isotonic regression with truth `θ₀(x) = x` on `x_i = i/n`
/// and Gaussian noise; records the empirical `L₂` error of the fit.
pub fn empirical_rate_experiment<T: Real>(cfg: &RateExperiment<T>) -> Result<RateReport<T>> {
    if cfg.n_list.is_empty() || cfg.n_list.contains(&0) {
        return Err(Error::Parameter(
            "n list must be nonempty with positive sizes".into(),
        ));
    }
    if cfg.replications == 0 || !(cfg.sigma >= T::zero()) {
        return Err(Error::Parameter("need ≥ 1 replication and σ ≥ 0".into()));
    }
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let truth: Vec<T> = (1..=n).map(|i| count::<T>(i) / count::<T>(n)).collect();
        let errors = run_indexed(cfg.workers, cfg.replications, |r| {
            let seed = replication_seed(cfg.seed ^ ((n as u64) << 32), r as u64);
            let mut rng = noise_rng(seed);
            let y: Vec<T> = truth
                .iter()
                .map(|&t| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    t + cfg.sigma * lit::<T>(z)
                })
                .collect();
            let fit = isotonic_least_squares(&y)?;
            let ss: T = fit
                .values()
                .iter()
                .zip(&truth)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            Ok((ss / count::<T>(n)).sqrt())
        })?;
        let est = crate::montecarlo::McEstimate::from_samples(&errors);
        rows.push(RateRow {
            n,
            mean_error: est.mean,
            stderr: est.stderr,
        });
    }
    let degenerate = rows.iter().any(|r| !(r.mean_error > T::zero()));
    let fit = if degenerate {
        None
    } else {
        let xs: Vec<T> = rows.iter().map(|r| count::<T>(r.n).ln()).collect();
        let ys: Vec<T> = rows.iter().map(|r| r.mean_error.ln()).collect();
        ols(&xs, &ys)
    };
    Ok(RateReport {
        half_width: fit.map(|f| lit::<T>(1.96) * f.stderr),
        fit,
        predicted_slope: predicted_monotone_slope()?,
        degenerate,
        rows,
    })
}

/// Slope of `log δ_n` against `log n` from the rate solver with the
/// monotone-class entropy `J(δ) = δ^{1/2}`.
pub fn predicted_monotone_slope<T: Real>() -> Result<T> {
    let j: Arc<dyn EntropyFn<T>> = Arc::new(crate::integral::PowerJ::new(T::one(), lit(0.5))?);
    let (n1, n2) = (100usize, 10_000usize);
    let d1 = rate_from_entropy(Arc::clone(&j), n1)?.delta;
    let d2 = rate_from_entropy(j, n2)?.delta;
    Ok((d2 / d1).ln() / (count::<T>(n2) / count::<T>(n1)).ln())
}
