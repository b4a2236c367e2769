//! Monte Carlo estimates of `E‖G_n‖_F` and friends, and empirical checks of
//! the maximal inequalities against their computed bounds.
//!
//! Replication `i` always uses seed `master ^ i`, so every estimate is a
//! pure function of the configuration. Replications run on an explicit rayon
//! pool and are reduced in index order; the worker count never changes a
//! result bit.

use rayon::prelude::*;

use crate::classes::{square_class, variance_restrict, FunctionClass};
use crate::covering::{measured_log_covering, CandidateFamily, CoverOptions};
use crate::engine::{bound_small_delta, bound_thm21, bound_thm31, bound_thm32, holder_exponents};
use crate::error::{Error, Result};
use crate::integral::{EntropyCurve, EntropyFn};
use crate::measure::{
    sup_abs_from_counts, sup_abs_symmetrized_from_signed, DiscreteMeasure, SignVector,
};
use crate::scalar::{count, lit, Real};
use crate::seed::replication_seed;

#[derive(Debug, Clone)]
pub struct McConfig<T> {
    pub measure: DiscreteMeasure<T>,
    pub class: FunctionClass<T>,
    pub n_grid: Vec<usize>,
    pub delta_grid: Vec<T>,
    pub replications: usize,
    pub master_seed: u64,
    pub workers: usize,
}

impl<T: Real> McConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Parameter(
                "at least two replications are needed for a standard error".into(),
            ));
        }
        if self.n_grid.is_empty() || self.delta_grid.is_empty() {
            return Err(Error::Parameter("n and δ grids must be nonempty".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::Parameter("sample sizes must be ≥ 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Parameter("worker count must be ≥ 1".into()));
        }
        self.measure.ensure_same_grid(self.class.grid().len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub replications: usize,
}

impl<T: Real> McEstimate<T> {
    /// Sample mean and `s/√R`, summed in index order.
    pub fn from_samples(xs: &[T]) -> Self {
        let r = count::<T>(xs.len());
        let mean = xs.iter().copied().sum::<T>() / r;
        let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
        let var = if xs.len() > 1 {
            ss / (r - T::one())
        } else {
            T::zero()
        };
        Self {
            mean,
            stderr: (var / r).sqrt(),
            replications: xs.len(),
        }
    }
}

/// Runs `f(i)` for `i = 0..r` on a pool of `workers` threads, in index order.
pub fn run_indexed<X, F>(workers: usize, r: usize, f: F) -> Result<Vec<X>>
where
    X: Send,
    F: Fn(usize) -> Result<X> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..r).into_par_iter().map(&f).collect())
}

/// Per-replication sufficient statistics: sample multiplicities and signed
/// multiplicities `Σ_{i: X_i = j} ε_i`.
struct Replicate {
    counts: Vec<usize>,
    signed: Vec<i64>,
}

fn replicate<T: Real>(
    p: &DiscreteMeasure<T>,
    n: usize,
    seed: u64,
    with_signs: bool,
) -> Result<Replicate> {
    let draw = p.draw_sample(n, seed)?;
    let mut signed = vec![0i64; p.len()];
    if with_signs {
        let e = SignVector::draw(n, seed);
        for (&i, &s) in draw.indices().iter().zip(e.signs()) {
            signed[i] += s as i64;
        }
    }
    Ok(Replicate {
        counts: draw.counts(),
        signed,
    })
}

fn restricted<T: Real>(cfg: &McConfig<T>, delta: T) -> Result<FunctionClass<T>> {
    cfg.validate()?;
    variance_restrict(&cfg.class, &cfg.measure, delta)
}

/// Monte Carlo `E‖G_n‖_{F_δ}` over the `δ`-restricted class.
pub fn estimate_sup_mean<T: Real>(cfg: &McConfig<T>, n: usize, delta: T) -> Result<McEstimate<T>> {
    let class = restricted(cfg, delta)?;
    let xs = run_indexed(cfg.workers, cfg.replications, |i| {
        let rep = replicate(
            &cfg.measure,
            n,
            replication_seed(cfg.master_seed, i as u64),
            false,
        )?;
        Ok(sup_abs_from_counts(&rep.counts, n, &class, &cfg.measure))
    })?;
    Ok(McEstimate::from_samples(&xs))
}

/// Monte Carlo `E‖G_n°‖_{F_δ}` with independent Rademacher signs.
pub fn estimate_symmetrized_sup_mean<T: Real>(
    cfg: &McConfig<T>,
    n: usize,
    delta: T,
) -> Result<McEstimate<T>> {
    let class = restricted(cfg, delta)?;
    let xs = run_indexed(cfg.workers, cfg.replications, |i| {
        let rep = replicate(
            &cfg.measure,
            n,
            replication_seed(cfg.master_seed, i as u64),
            true,
        )?;
        Ok(sup_abs_symmetrized_from_signed(&rep.signed, n, &class))
    })?;
    Ok(McEstimate::from_samples(&xs))
}

/// Number of standard errors tolerated before an MC comparison is a violation.
pub const STDERR_ALLOWANCE: f64 = 3.0;

/// `E[lhs] ≤ factor·E[rhs]` judged on paired replications.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedCheck<T> {
    pub name: &'static str,
    pub lhs: McEstimate<T>,
    pub factor: T,
    pub rhs: McEstimate<T>,
    /// Mean and standard error of `lhs_i − factor·rhs_i`.
    pub diff: McEstimate<T>,
    pub asserted: bool,
}

impl<T: Real> PairedCheck<T> {
    fn new(name: &'static str, lhs: &[T], factor: T, rhs: &[T], asserted: bool) -> Self {
        let d: Vec<T> = lhs.iter().zip(rhs).map(|(&a, &b)| a - factor * b).collect();
        Self {
            name,
            lhs: McEstimate::from_samples(lhs),
            factor,
            rhs: McEstimate::from_samples(rhs),
            diff: McEstimate::from_samples(&d),
            asserted,
        }
    }

    /// `rhs·factor − lhs`, negative when violated on average.
    pub fn slack(&self) -> T {
        -self.diff.mean
    }

    /// No violation beyond [`STDERR_ALLOWANCE`] standard errors.
    pub fn holds(&self) -> bool {
        self.diff.mean <= lit::<T>(STDERR_ALLOWANCE) * self.diff.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport<T> {
    pub n: usize,
    pub delta: T,
    pub links: Vec<PairedCheck<T>>,
}

impl<T: Real> ChainReport<T> {
    /// All asserted links hold.
    pub fn passed(&self) -> bool {
        self.links.iter().filter(|l| l.asserted).all(|l| l.holds())
    }
}

/// Symmetrization, contraction and desymmetrization from `E‖G_n‖_{F²}` to
/// `E‖G_n‖_F`. Asserted: `E‖G_n‖_{F²} ≤ 2E‖G_n°‖_{F²}`,
/// `E‖G_n°‖_{F²} ≤ 2E‖G_n°‖_F` and the end-to-end `E‖G_n‖_{F²} ≤ 8E‖G_n‖_F`.
/// The desymmetrization link `E‖G_n°‖_F ≤ 2E‖G_n‖_F` is only reported: it
/// needs centred functions, which the classes here are not.
pub fn contraction_chain_check<T: Real>(
    cfg: &McConfig<T>,
    n: usize,
    delta: T,
) -> Result<ChainReport<T>> {
    if !cfg.class.envelope_bounded_by_one() {
        return Err(Error::Domain(
            "contraction chain requires an envelope bounded by 1".into(),
        ));
    }
    let class = restricted(cfg, delta)?;
    let squares = square_class(&class);
    let reps = run_indexed(cfg.workers, cfg.replications, |i| {
        let rep = replicate(
            &cfg.measure,
            n,
            replication_seed(cfg.master_seed, i as u64),
            true,
        )?;
        Ok([
            sup_abs_from_counts(&rep.counts, n, &squares, &cfg.measure),
            sup_abs_symmetrized_from_signed(&rep.signed, n, &squares),
            sup_abs_symmetrized_from_signed(&rep.signed, n, &class),
            sup_abs_from_counts(&rep.counts, n, &class, &cfg.measure),
        ])
    })?;
    let col = |k: usize| reps.iter().map(|r| r[k]).collect::<Vec<T>>();
    let (g_sq, s_sq, s_f, g_f) = (col(0), col(1), col(2), col(3));
    let two = lit::<T>(2.0);
    Ok(ChainReport {
        n,
        delta,
        links: vec![
            PairedCheck::new("symmetrization", &g_sq, two, &s_sq, true),
            PairedCheck::new("contraction", &s_sq, two, &s_f, true),
            PairedCheck::new("desymmetrization", &s_f, two, &g_f, false),
            PairedCheck::new("chain", &g_sq, lit(8.0), &g_f, true),
        ],
    })
}

/// `E σ_n² ≤ δ²‖F‖²_{P,2} + n^{-1/2} E‖G_n‖_{F²}` with `σ_n² = sup P_n f²`.
pub fn variance_decomposition_check<T: Real>(
    cfg: &McConfig<T>,
    n: usize,
    delta: T,
) -> Result<PairedCheck<T>> {
    let class = restricted(cfg, delta)?;
    let squares = square_class(&class);
    let pf2 = cfg.measure.abs_moment(class.envelope(), lit(2.0))?;
    let base = delta * delta * pf2;
    let root = count::<T>(n).sqrt();
    let nf = count::<T>(n);
    let reps = run_indexed(cfg.workers, cfg.replications, |i| {
        let rep = replicate(
            &cfg.measure,
            n,
            replication_seed(cfg.master_seed, i as u64),
            false,
        )?;
        let sigma2 = squares
            .members()
            .iter()
            .map(|f| {
                rep.counts
                    .iter()
                    .zip(f.values())
                    .filter(|(c, _)| **c > 0)
                    .map(|(&c, &v)| count::<T>(c) * v)
                    .sum::<T>()
                    / nf
            })
            .fold(T::zero(), T::max);
        let g = sup_abs_from_counts(&rep.counts, n, &squares, &cfg.measure);
        Ok((sigma2, base + g / root))
    })?;
    let lhs: Vec<T> = reps.iter().map(|r| r.0).collect();
    let rhs: Vec<T> = reps.iter().map(|r| r.1).collect();
    Ok(PairedCheck::new(
        "variance_decomposition",
        &lhs,
        T::one(),
        &rhs,
        true,
    ))
}

/// The bound a ratio study compares against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theorem<T> {
    /// `J(δ)(1 + J(δ)/(δ²√n‖F‖))‖F‖`, envelope at most 1.
    Thm21,
    /// `J(δ)‖F‖ + J(1/(√n‖F‖))²√n‖F‖²`, envelope at most 1.
    SmallDelta,
    /// Moment-`(4p−2)/(p−1)` envelope bound.
    Thm31 { p: T },
    /// Exponential-moment envelope bound with explicit constant `c`.
    Thm32 { p: T, c: T },
}

impl<T: Real> Theorem<T> {
    pub fn label(&self) -> String {
        match self {
            Theorem::Thm21 => "thm21".into(),
            Theorem::SmallDelta => "small_delta".into(),
            Theorem::Thm31 { p } => format!("thm31(p={p})"),
            Theorem::Thm32 { p, c } => format!("thm32(p={p},c={c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow<T> {
    pub delta: T,
    pub n: usize,
    pub class_size: usize,
    pub estimate: McEstimate<T>,
    pub bound: T,
    pub ratio: T,
    pub ratio_stderr: T,
    /// `δ²√n‖F‖ ≥` [`ASSERTION_REGIME`]; rows below are reported only.
    pub asserted: bool,
    pub clamped: bool,
}

/// Rows with `δ²√n‖F‖` below this are dominated by MC noise and reported only.
pub const ASSERTION_REGIME: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit<T> {
    pub slope: T,
    pub intercept: T,
    pub stderr: T,
    pub points: usize,
}

/// Ordinary least squares `y ≈ a + b x`; `None` with fewer than two distinct `x`.
pub fn ols<T: Real>(xs: &[T], ys: &[T]) -> Option<SlopeFit<T>> {
    let k = xs.len();
    if k < 2 || ys.len() != k {
        return None;
    }
    let kf = count::<T>(k);
    let mx = xs.iter().copied().sum::<T>() / kf;
    let my = ys.iter().copied().sum::<T>() / kf;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx == T::zero() {
        return None;
    }
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if k > 2 {
        let rss: T = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| (y - intercept - slope * x).powi(2))
            .sum();
        (rss / count::<T>(k - 2) / sxx).sqrt()
    } else {
        T::zero()
    };
    Some(SlopeFit {
        slope,
        intercept,
        stderr,
        points: k,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioStudy<T> {
    pub theorem: String,
    pub curve: String,
    pub rows: Vec<RatioRow<T>>,
    /// `(ε, model log N, measured log N)` on the δ grid.
    pub domination: Vec<(T, T, T)>,
    /// Largest ratio over asserted rows.
    pub max_ratio: T,
    /// Fit of `log ratio` against `log δ` over asserted rows with a nonzero estimate.
    pub slope: Option<SlopeFit<T>>,
}

/// MC estimate over bound on the `(δ, n)` grid. The curve must dominate the
/// measured uniform entropy of the class on the δ grid (checked against the
/// candidate family first; a violation is a configuration error).
pub fn theorem_ratio_study<T: Real>(
    cfg: &McConfig<T>,
    theorem: Theorem<T>,
    curve: &EntropyCurve<T>,
    family: &CandidateFamily<T>,
    cover: &CoverOptions,
) -> Result<RatioStudy<T>> {
    cfg.validate()?;
    let measured = measured_log_covering(&cfg.class, &cfg.delta_grid, lit(2.0), family, cover)?;
    let mut domination = Vec::with_capacity(measured.len());
    for &(eps, logn) in &measured {
        let model = curve.log_n(eps)?;
        domination.push((eps, model, logn));
        if model + lit::<T>(1e-12) < logn {
            return Err(Error::Config(format!(
                "entropy curve {} does not dominate the class at ε={eps}: model {model} < measured {logn}",
                curve.description()
            )));
        }
    }
    let two = lit::<T>(2.0);
    let f2 = cfg.measure.abs_moment(cfg.class.envelope(), two)?.sqrt();
    let bounded = cfg.class.envelope_bounded_by_one();
    let fmom = match theorem {
        Theorem::Thm31 { p } => {
            let h = holder_exponents(p)?;
            cfg.measure.lr_norm(cfg.class.envelope(), h.sq)?
        }
        _ => T::zero(),
    };
    if matches!(theorem, Theorem::Thm21 | Theorem::SmallDelta) && !bounded {
        return Err(Error::Config(format!(
            "{} requires an envelope bounded by 1",
            theorem.label()
        )));
    }
    let mut rows = Vec::new();
    for &delta in &cfg.delta_grid {
        for &n in &cfg.n_grid {
            let class = restricted(cfg, delta)?;
            let estimate = estimate_sup_mean(cfg, n, delta)?;
            // A null envelope makes every estimate exactly zero; the bounds are not defined there.
            let (bound, clamped) = if f2 == T::zero() {
                (T::zero(), false)
            } else {
                match theorem {
                    Theorem::Thm21 => (bound_thm21(curve.j(delta)?, delta, n, f2)?, false),
                    Theorem::SmallDelta => {
                        let b = bound_small_delta(curve, delta, n, f2)?;
                        (b.value, b.clamped)
                    }
                    Theorem::Thm31 { p } => (bound_thm31(curve, delta, n, p, f2, fmom)?, false),
                    Theorem::Thm32 { p, c } => {
                        let b = bound_thm32(curve, delta, n, p, c)?;
                        (b.value, b.clamped)
                    }
                }
            };
            let (ratio, ratio_stderr) = if estimate.mean == T::zero() {
                (T::zero(), T::zero())
            } else {
                (estimate.mean / bound, estimate.stderr / bound)
            };
            let regime = delta * delta * count::<T>(n).sqrt() * f2;
            rows.push(RatioRow {
                delta,
                n,
                class_size: class.len(),
                estimate,
                bound,
                ratio,
                ratio_stderr,
                asserted: regime >= lit(ASSERTION_REGIME),
                clamped,
            });
        }
    }
    let max_ratio = rows
        .iter()
        .filter(|r| r.asserted)
        .map(|r| r.ratio)
        .fold(T::zero(), T::max);
    let (xs, ys): (Vec<T>, Vec<T>) = rows
        .iter()
        .filter(|r| r.asserted && r.ratio > T::zero())
        .map(|r| (r.delta.ln(), r.ratio.ln()))
        .unzip();
    Ok(RatioStudy {
        theorem: theorem.label(),
        curve: curve.description().to_string(),
        rows,
        domination,
        max_ratio,
        slope: ols(&xs, &ys),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::make_halfline_indicators;
    use crate::measure::{Grid, GridFunction};
    use std::sync::Arc;

    fn two_point_cfg(members: Vec<Vec<f64>>, r: usize, workers: usize) -> McConfig<f64> {
        let grid = Arc::new(Grid::new(vec![0.0, 1.0]).unwrap());
        let members = members
            .into_iter()
            .map(|v| GridFunction::new(v).unwrap())
            .collect();
        McConfig {
            measure: DiscreteMeasure::uniform(Arc::clone(&grid)),
            class: FunctionClass::new(grid, members, None, "test").unwrap(),
            n_grid: vec![4],
            delta_grid: vec![1.0],
            replications: r,
            master_seed: 7,
            workers,
        }
    }

    #[test]
    fn zero_class_is_exactly_zero() {
        let cfg = two_point_cfg(vec![vec![0.0, 0.0]], 50, 2);
        let e = estimate_sup_mean(&cfg, 4, 1.0).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
        let e = estimate_symmetrized_sup_mean(&cfg, 4, 1.0).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let a = estimate_sup_mean(&two_point_cfg(vec![vec![1.0, 0.0]], 500, 1), 4, 1.0).unwrap();
        let b = estimate_sup_mean(&two_point_cfg(vec![vec![1.0, 0.0]], 500, 3), 4, 1.0).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn symmetrized_constant_matches_enumeration() {
        // E|Σε|/√4 over the 16 sign patterns is 1.5/2
        let cfg = two_point_cfg(vec![vec![1.0, 1.0]], 20_000, 2);
        let e = estimate_symmetrized_sup_mean(&cfg, 4, 1.0).unwrap();
        assert!((e.mean - 0.75).abs() < 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn stderr_halves_when_r_quadruples() {
        let e1 = estimate_sup_mean(&two_point_cfg(vec![vec![1.0, 0.0]], 2_000, 1), 4, 1.0).unwrap();
        let e4 = estimate_sup_mean(&two_point_cfg(vec![vec![1.0, 0.0]], 8_000, 1), 4, 1.0).unwrap();
        let ratio = e1.stderr / e4.stderr;
        assert!((ratio - 2.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn chain_rejects_unbounded_envelopes() {
        let cfg = two_point_cfg(vec![vec![2.0, 0.0]], 10, 1);
        assert!(matches!(
            contraction_chain_check(&cfg, 4, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn chain_and_decomposition_on_halflines() {
        let grid = Arc::new(Grid::unit(16).unwrap());
        let w: Vec<f64> = (1..=16).map(|j| j as f64).collect();
        let cfg = McConfig {
            measure: DiscreteMeasure::from_masses(Arc::clone(&grid), w).unwrap(),
            class: make_halfline_indicators(grid).scale(0.5).unwrap(),
            n_grid: vec![64],
            delta_grid: vec![0.5],
            replications: 400,
            master_seed: 3,
            workers: 2,
        };
        let rep = contraction_chain_check(&cfg, 64, 0.5).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let v = variance_decomposition_check(&cfg, 64, 0.5).unwrap();
        assert!(v.holds() && v.diff.mean <= 0.0, "{v:?}");
    }

    #[test]
    fn sup_mean_grows_with_delta() {
        let grid = Arc::new(Grid::unit(32).unwrap());
        let cfg = McConfig {
            measure: DiscreteMeasure::uniform(Arc::clone(&grid)),
            class: make_halfline_indicators(grid),
            n_grid: vec![128],
            delta_grid: vec![0.3, 0.6],
            replications: 400,
            master_seed: 11,
            workers: 1,
        };
        let a = estimate_sup_mean(&cfg, 128, 0.3).unwrap();
        let b = estimate_sup_mean(&cfg, 128, 0.6).unwrap();
        // common random numbers: the larger class has the larger supremum pathwise
        assert!(a.mean <= b.mean);
    }

    #[test]
    fn ols_recovers_a_line() {
        let xs = [0.0f64, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = ols(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(ols(&[1.0, 1.0], &[0.0, 2.0]).is_none());
    }
}
