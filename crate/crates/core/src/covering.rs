//! Covering, packing and bracketing numbers of finite function classes.
//!
//! Covers are internal: ball centers are members of the class. Balls are
//! closed, `d(f, center) ≤ ε`. Exact counts come from a depth-first search
//! that branches on the lowest uncovered member, so every branch is forced
//! to cover it; the search is capped at [`CoverOptions::exact_cap`] members.

use std::sync::Arc;

use rayon::prelude::*;

use crate::classes::FunctionClass;
use crate::error::{Error, Result};
use crate::measure::{empirical_measure, DiscreteMeasure, Grid};
use crate::scalar::{lit, tol, Real};

/// `L_r(Q)` metric on grid functions.
#[derive(Debug, Clone)]
pub struct MetricSpec<T> {
    measure: DiscreteMeasure<T>,
    r: T,
}

impl<T: Real> MetricSpec<T> {
    pub fn new(measure: DiscreteMeasure<T>, r: T) -> Result<Self> {
        if !(r >= T::one()) {
            return Err(Error::Parameter(format!("metric needs r ≥ 1, got {r}")));
        }
        Ok(Self { measure, r })
    }

    pub fn l2(measure: DiscreteMeasure<T>) -> Self {
        Self {
            measure,
            r: lit(2.0),
        }
    }

    pub fn measure(&self) -> &DiscreteMeasure<T> {
        &self.measure
    }

    pub fn r(&self) -> T {
        self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy)]
pub struct CoverOptions {
    /// Largest class for which exhaustive search is attempted.
    pub exact_cap: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self { exact_cap: 20 }
    }
}

/// Hard ceiling from the 64-bit membership masks used by the exact search.
const MASK_BITS: usize = 64;

fn within<T: Real>(d: T, eps: T) -> bool {
    d <= eps + eps * tol::<T>(1e-12)
}

/// Pairwise `L_r(Q)` distances between the class members.
pub fn distance_matrix<T: Real>(
    class: &FunctionClass<T>,
    metric: &MetricSpec<T>,
) -> Result<Vec<Vec<T>>> {
    metric.measure.ensure_same_grid(class.grid().len())?;
    let members = class.members();
    let k = members.len();
    let mut d = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = metric.measure.lr_distance_unchecked(
                members[i].values(),
                members[j].values(),
                metric.r,
            );
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if !(eps > T::zero()) {
        return Err(Error::Parameter(format!("ε must be positive, got {eps}")));
    }
    Ok(())
}

fn check_exact(size: usize, opts: &CoverOptions) -> Result<()> {
    let cap = opts.exact_cap.min(MASK_BITS);
    if size > cap {
        return Err(Error::ExactCap { size, cap });
    }
    Ok(())
}

/// Minimal number of closed `ε`-balls with centers in the class covering it.
pub fn covering_number<T: Real>(
    class: &FunctionClass<T>,
    eps: T,
    metric: &MetricSpec<T>,
    mode: CoverMode,
    opts: &CoverOptions,
) -> Result<usize> {
    check_eps(eps)?;
    if mode == CoverMode::Exact {
        check_exact(class.len(), opts)?;
    }
    let d = distance_matrix(class, metric)?;
    Ok(cover_from_distances(&d, eps, mode))
}

fn cover_from_distances<T: Real>(d: &[Vec<T>], eps: T, mode: CoverMode) -> usize {
    let k = d.len();
    let balls: Vec<Vec<usize>> = (0..k)
        .map(|c| (0..k).filter(|&j| within(d[c][j], eps)).collect())
        .collect();
    match mode {
        CoverMode::Greedy => greedy_set_cover(&balls, k),
        CoverMode::Exact => {
            let masks: Vec<u64> = balls
                .iter()
                .map(|b| b.iter().fold(0u64, |m, &j| m | (1u64 << j)))
                .collect();
            // The ball around j covers j, and ball membership is symmetric, so
            // the centers able to cover member e are exactly the ball of e.
            let candidates = |e: usize, _uncovered: u64| -> Vec<u64> {
                balls[e].iter().map(|&c| masks[c]).collect()
            };
            exact_min_cover(k, candidates)
        }
    }
}

/// Greedy set cover over `sets` of `{0, …, universe-1}`; ties go to the
/// lowest set index.
fn greedy_set_cover(sets: &[Vec<usize>], universe: usize) -> usize {
    let mut covered = vec![false; universe];
    let mut left = universe;
    let mut used = 0;
    while left > 0 {
        let mut best = 0;
        let mut best_gain = 0;
        for (i, s) in sets.iter().enumerate() {
            let gain = s.iter().filter(|&&j| !covered[j]).count();
            if gain > best_gain {
                best = i;
                best_gain = gain;
            }
        }
        debug_assert!(best_gain > 0, "sets must cover the universe");
        for &j in &sets[best] {
            if !covered[j] {
                covered[j] = true;
                left -= 1;
            }
        }
        used += 1;
    }
    used
}

/// Iterative deepening search for the fewest sets covering `0..k`.
///
/// `candidates(e, uncovered)` returns the masks that may be used to cover
/// the lowest uncovered element `e`; it must be complete (some optimal
/// solution uses one of them).
fn exact_min_cover(k: usize, candidates: impl Fn(usize, u64) -> Vec<u64>) -> usize {
    let full: u64 = if k == MASK_BITS {
        u64::MAX
    } else {
        (1u64 << k) - 1
    };
    fn dfs(uncovered: u64, depth: usize, cand: &dyn Fn(usize, u64) -> Vec<u64>) -> bool {
        if uncovered == 0 {
            return true;
        }
        if depth == 0 {
            return false;
        }
        let e = uncovered.trailing_zeros() as usize;
        let mut options = cand(e, uncovered);
        // larger new coverage first
        options.sort_by_key(|m| std::cmp::Reverse((m & uncovered).count_ones()));
        options.dedup();
        options.iter().any(|m| dfs(uncovered & !m, depth - 1, cand))
    }
    (1..=k)
        .find(|&depth| dfs(full, depth, &candidates))
        .unwrap_or(k)
}

/// Size of a maximal `ε`-separated subset (pairwise distance `> ε`), built
/// greedily in member order.
pub fn packing_number<T: Real>(
    class: &FunctionClass<T>,
    eps: T,
    metric: &MetricSpec<T>,
) -> Result<usize> {
    check_eps(eps)?;
    let d = distance_matrix(class, metric)?;
    Ok(packing_from_distances(&d, eps))
}

fn packing_from_distances<T: Real>(d: &[Vec<T>], eps: T) -> usize {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..d.len() {
        if chosen.iter().all(|&c| !within(d[i][c], eps)) {
            chosen.push(i);
        }
    }
    chosen.len()
}

/// `max_Q N(ε‖F‖_{Q,r}, C, L_r(Q))` over the supplied candidate measures.
/// A measure under which the envelope has zero norm contributes 1.
pub fn uniform_covering_number<T: Real>(
    class: &FunctionClass<T>,
    eps: T,
    r: T,
    qs: &[DiscreteMeasure<T>],
    mode: CoverMode,
    opts: &CoverOptions,
) -> Result<usize> {
    check_eps(eps)?;
    if qs.is_empty() {
        return Err(Error::Parameter("candidate measure family is empty".into()));
    }
    if mode == CoverMode::Exact {
        check_exact(class.len(), opts)?;
    }
    let counts = qs
        .par_iter()
        .map(|q| {
            let metric = MetricSpec::new(q.clone(), r)?;
            let norm = q.lr_norm(class.envelope(), r)?;
            if norm == T::zero() {
                return Ok(1);
            }
            let d = distance_matrix(class, &metric)?;
            Ok(cover_from_distances(&d, eps * norm, mode))
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(counts.into_iter().max().unwrap_or(1))
}

/// Brackets are groups of members with endpoints `l = min`, `u = max`
/// pointwise; a group is admissible when `‖u − l‖_{P,r} ≤ ε`.
struct BracketOracle<'a, T> {
    values: Vec<&'a [T]>,
    p: &'a DiscreteMeasure<T>,
    r: T,
    eps: T,
}

impl<'a, T: Real> BracketOracle<'a, T> {
    fn size(&self, lo: &[T], hi: &[T]) -> T {
        self.p.lr_distance_unchecked(hi, lo, self.r)
    }

    fn admissible_with(&self, lo: &[T], hi: &[T], j: usize) -> Option<(Vec<T>, Vec<T>)> {
        let f = self.values[j];
        let nlo: Vec<T> = lo.iter().zip(f).map(|(&a, &b)| a.min(b)).collect();
        let nhi: Vec<T> = hi.iter().zip(f).map(|(&a, &b)| a.max(b)).collect();
        within(self.size(&nlo, &nhi), self.eps).then_some((nlo, nhi))
    }

    /// Maximal admissible groups inside `uncovered` that contain `e`.
    fn maximal_groups(&self, e: usize, uncovered: u64) -> Vec<u64> {
        let pool: Vec<usize> = (0..self.values.len())
            .filter(|&j| j != e && uncovered & (1u64 << j) != 0)
            .collect();
        let mut out = Vec::new();
        let f = self.values[e].to_vec();
        self.grow(&pool, 0, 1u64 << e, f.clone(), f, &mut out);
        out
    }

    fn grow(
        &self,
        pool: &[usize],
        at: usize,
        group: u64,
        lo: Vec<T>,
        hi: Vec<T>,
        out: &mut Vec<u64>,
    ) {
        if at == pool.len() {
            let maximal = pool
                .iter()
                .filter(|&&j| group & (1u64 << j) == 0)
                .all(|&j| self.admissible_with(&lo, &hi, j).is_none());
            if maximal {
                out.push(group);
            }
            return;
        }
        let j = pool[at];
        if let Some((nlo, nhi)) = self.admissible_with(&lo, &hi, j) {
            self.grow(pool, at + 1, group | (1u64 << j), nlo, nhi, out);
        }
        self.grow(pool, at + 1, group, lo, hi, out);
    }

    fn greedy(&self) -> usize {
        let k = self.values.len();
        let mut covered = vec![false; k];
        let mut used = 0;
        while let Some(seed) = covered.iter().position(|c| !c) {
            covered[seed] = true;
            let mut lo = self.values[seed].to_vec();
            let mut hi = lo.clone();
            for j in seed + 1..k {
                if covered[j] {
                    continue;
                }
                if let Some((nlo, nhi)) = self.admissible_with(&lo, &hi, j) {
                    lo = nlo;
                    hi = nhi;
                    covered[j] = true;
                }
            }
            used += 1;
        }
        used
    }
}

/// Minimal number of brackets of `L_r(P)` size at most `ε` covering the class.
pub fn bracketing_number<T: Real>(
    class: &FunctionClass<T>,
    eps: T,
    p: &DiscreteMeasure<T>,
    r: T,
    mode: CoverMode,
    opts: &CoverOptions,
) -> Result<usize> {
    check_eps(eps)?;
    if !(r >= T::one()) {
        return Err(Error::Parameter(format!(
            "bracket norm needs r ≥ 1, got {r}"
        )));
    }
    p.ensure_same_grid(class.grid().len())?;
    let oracle = BracketOracle {
        values: class.members().iter().map(|f| f.values()).collect(),
        p,
        r,
        eps,
    };
    match mode {
        CoverMode::Greedy => Ok(oracle.greedy()),
        CoverMode::Exact => {
            check_exact(class.len(), opts)?;
            Ok(exact_min_cover(class.len(), |e, unc| {
                oracle.maximal_groups(e, unc)
            }))
        }
    }
}

/// Candidate measures standing in for "all finitely discrete `Q`".
#[derive(Debug, Clone)]
pub struct CandidateFamily<T> {
    pub measures: Vec<DiscreteMeasure<T>>,
    pub description: String,
}

/// Uniform measure, every point mass, every two-point uniform measure, and
/// `k_empirical` empirical measures of `sample_size` draws from `base`.
pub fn candidate_family<T: Real>(
    grid: &Arc<Grid<T>>,
    base: &DiscreteMeasure<T>,
    k_empirical: usize,
    sample_size: usize,
    seed: u64,
) -> Result<CandidateFamily<T>> {
    let m = grid.len();
    let mut measures = vec![DiscreteMeasure::uniform(Arc::clone(grid))];
    for j in 0..m {
        measures.push(DiscreteMeasure::point_mass(Arc::clone(grid), j)?);
    }
    for i in 0..m {
        for j in i + 1..m {
            measures.push(DiscreteMeasure::pair_uniform(Arc::clone(grid), i, j)?);
        }
    }
    for k in 0..k_empirical {
        let draw = base.draw_sample(sample_size, crate::seed::replication_seed(seed, k as u64))?;
        measures.push(empirical_measure(grid, &draw)?);
    }
    let description = format!(
        "uniform + {m} point masses + {} pair-uniform + {k_empirical} empirical(n={sample_size}, seed={seed})",
        m * m.saturating_sub(1) / 2
    );
    Ok(CandidateFamily {
        measures,
        description,
    })
}

/// One row of an entropy sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub eps: T,
    pub covering_exact: Option<usize>,
    pub covering_greedy: usize,
    pub packing: usize,
    pub bracketing: usize,
}

/// Covering (exact when the class is small enough, and greedy), packing and
/// bracketing numbers in `L_r(P)` at radii `ε·‖F‖_{P,r}`.
pub fn entropy_sweep<T: Real>(
    class: &FunctionClass<T>,
    eps_grid: &[T],
    metric: &MetricSpec<T>,
    opts: &CoverOptions,
) -> Result<Vec<SweepRow<T>>> {
    let d = distance_matrix(class, metric)?;
    let norm = metric.measure.lr_norm(class.envelope(), metric.r)?;
    let exact_ok = class.len() <= opts.exact_cap.min(MASK_BITS);
    eps_grid
        .iter()
        .map(|&eps| {
            check_eps(eps)?;
            let radius = eps * norm;
            if radius == T::zero() {
                return Ok(SweepRow {
                    eps,
                    covering_exact: exact_ok.then_some(1),
                    covering_greedy: 1,
                    packing: 1,
                    bracketing: 1,
                });
            }
            let mode = if exact_ok {
                CoverMode::Exact
            } else {
                CoverMode::Greedy
            };
            Ok(SweepRow {
                eps,
                covering_exact: exact_ok
                    .then(|| cover_from_distances(&d, radius, CoverMode::Exact)),
                covering_greedy: cover_from_distances(&d, radius, CoverMode::Greedy),
                packing: packing_from_distances(&d, radius),
                bracketing: bracketing_number(
                    class,
                    radius,
                    &metric.measure,
                    metric.r,
                    mode,
                    opts,
                )?,
            })
        })
        .collect()
}

/// Measured uniform entropy `log N` at each radius (exact when possible).
pub fn measured_log_covering<T: Real>(
    class: &FunctionClass<T>,
    eps_grid: &[T],
    r: T,
    family: &CandidateFamily<T>,
    opts: &CoverOptions,
) -> Result<Vec<(T, T)>> {
    let mode = if class.len() <= opts.exact_cap.min(MASK_BITS) {
        CoverMode::Exact
    } else {
        CoverMode::Greedy
    };
    eps_grid
        .iter()
        .map(|&eps| {
            let n = uniform_covering_number(class, eps, r, &family.measures, mode, opts)?;
            Ok((eps, T::from_usize(n).expect("count fits").ln()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{make_halfline_indicators, make_monotone_class, DEFAULT_CLASS_CAP};
    use crate::measure::GridFunction;

    fn grid(m: usize) -> Arc<Grid<f64>> {
        Arc::new(Grid::unit(m).unwrap())
    }

    fn opts() -> CoverOptions {
        CoverOptions::default()
    }

    /// Exhaustive oracle: smallest subset of centers whose balls cover everything.
    fn brute_force_cover(d: &[Vec<f64>], eps: f64) -> usize {
        let k = d.len();
        (1..=k)
            .find(|&size| {
                (0u32..(1 << k))
                    .filter(|s| s.count_ones() as usize == size)
                    .any(|s| {
                        (0..k).all(|j| (0..k).any(|c| s & (1 << c) != 0 && d[c][j] <= eps + 1e-12))
                    })
            })
            .unwrap()
    }

    #[test]
    fn singleton_and_two_point_examples() {
        let g = Arc::new(Grid::new(vec![0.0, 1.0]).unwrap());
        let q = MetricSpec::l2(DiscreteMeasure::uniform(g.clone()));
        let single = FunctionClass::new(
            g.clone(),
            vec![GridFunction::new(vec![0.3, 0.1]).unwrap()],
            None,
            "s",
        )
        .unwrap();
        for eps in [1e-6, 0.5, 3.0] {
            for mode in [CoverMode::Exact, CoverMode::Greedy] {
                assert_eq!(covering_number(&single, eps, &q, mode, &opts()).unwrap(), 1);
            }
            assert_eq!(packing_number(&single, eps, &q).unwrap(), 1);
        }
        let pair = FunctionClass::new(
            g,
            vec![
                GridFunction::new(vec![0.0, 0.0]).unwrap(),
                GridFunction::new(vec![1.0, 1.0]).unwrap(),
            ],
            None,
            "pair",
        )
        .unwrap();
        assert_eq!(
            covering_number(&pair, 0.5, &q, CoverMode::Exact, &opts()).unwrap(),
            2
        );
        assert_eq!(
            covering_number(&pair, 1.0, &q, CoverMode::Exact, &opts()).unwrap(),
            1
        );
        assert_eq!(packing_number(&pair, 0.5, &q).unwrap(), 2);
    }

    #[test]
    fn halfline_m4_matches_brute_force() {
        let g = grid(4);
        let c = make_halfline_indicators(g.clone());
        let q = MetricSpec::l2(DiscreteMeasure::uniform(g));
        let d = distance_matrix(&c, &q).unwrap();
        assert_eq!(brute_force_cover(&d, 0.5), 2);
        assert_eq!(
            covering_number(&c, 0.5, &q, CoverMode::Exact, &opts()).unwrap(),
            2
        );
        for k in 1..40 {
            let eps = k as f64 * 0.03;
            assert_eq!(
                covering_number(&c, eps, &q, CoverMode::Exact, &opts()).unwrap(),
                brute_force_cover(&d, eps),
                "ε = {eps}"
            );
        }
    }

    #[test]
    fn exact_cap_is_enforced() {
        let g = grid(30);
        let c = make_halfline_indicators(g.clone());
        let q = MetricSpec::l2(DiscreteMeasure::uniform(g));
        assert!(matches!(
            covering_number(&c, 0.3, &q, CoverMode::Exact, &opts()),
            Err(Error::ExactCap { size: 31, cap: 20 })
        ));
        assert!(covering_number(&c, 0.3, &q, CoverMode::Greedy, &opts()).is_ok());
        assert!(covering_number(&c, 0.0, &q, CoverMode::Greedy, &opts()).is_err());
    }

    #[test]
    fn sandwich_and_greedy_bounds_on_halflines() {
        let g = grid(9);
        let c = make_halfline_indicators(g.clone());
        let q = MetricSpec::l2(DiscreteMeasure::uniform(g));
        let size = c.len() as f64;
        for k in 1..=9 {
            let eps = k as f64 / 10.0;
            let exact = covering_number(&c, eps, &q, CoverMode::Exact, &opts()).unwrap();
            let greedy = covering_number(&c, eps, &q, CoverMode::Greedy, &opts()).unwrap();
            let d_eps = packing_number(&c, eps, &q).unwrap();
            let d_2eps = packing_number(&c, 2.0 * eps, &q).unwrap();
            assert!(
                d_2eps <= exact && exact <= d_eps,
                "ε={eps}: {d_2eps} ≤ {exact} ≤ {d_eps}"
            );
            assert!(exact <= greedy && greedy as f64 <= exact as f64 * (1.0 + size.ln()));
        }
    }

    #[test]
    fn bracketing_examples() {
        let g = grid(2);
        let p = DiscreteMeasure::uniform(g.clone());
        let mono = make_monotone_class(g.clone(), 1, DEFAULT_CLASS_CAP).unwrap();
        // whole class has bracket [(0,0),(1,1)] of size 1 > 0.8
        assert_eq!(
            bracketing_number(&mono, 0.8, &p, 2.0, CoverMode::Exact, &opts()).unwrap(),
            2
        );
        assert_eq!(
            bracketing_number(&mono, 1.0, &p, 2.0, CoverMode::Exact, &opts()).unwrap(),
            1
        );
        let single = FunctionClass::new(
            g,
            vec![GridFunction::new(vec![0.2, 0.4]).unwrap()],
            None,
            "s",
        )
        .unwrap();
        assert_eq!(
            bracketing_number(&single, 1e-9, &p, 2.0, CoverMode::Exact, &opts()).unwrap(),
            1
        );
    }

    /// Exhaustive partition oracle for bracketing numbers of tiny classes.
    fn brute_force_brackets(c: &FunctionClass<f64>, p: &DiscreteMeasure<f64>, eps: f64) -> usize {
        let k = c.len();
        let valid = |s: u32| {
            let mut lo = vec![f64::INFINITY; c.grid().len()];
            let mut hi = vec![f64::NEG_INFINITY; c.grid().len()];
            for j in 0..k {
                if s & (1 << j) != 0 {
                    for (x, v) in c.members()[j].values().iter().enumerate() {
                        lo[x] = lo[x].min(*v);
                        hi[x] = hi[x].max(*v);
                    }
                }
            }
            p.lr_distance_unchecked(&hi, &lo, 2.0) <= eps + 1e-12
        };
        let groups: Vec<u32> = (1u32..(1 << k)).filter(|&s| valid(s)).collect();
        let full = (1u32 << k) - 1;
        fn best(left: u32, groups: &[u32], depth: usize) -> bool {
            if left == 0 {
                return true;
            }
            if depth == 0 {
                return false;
            }
            let e = left.trailing_zeros();
            groups
                .iter()
                .filter(|&&g| g & (1 << e) != 0 && g & !left == 0)
                .any(|&g| best(left & !g, groups, depth - 1))
        }
        (1..=k).find(|&d| best(full, &groups, d)).unwrap()
    }

    #[test]
    fn bracketing_exact_matches_partition_oracle() {
        let g = grid(3);
        let p = DiscreteMeasure::new(g.clone(), vec![0.2, 0.3, 0.5]).unwrap();
        let mono = make_monotone_class(g, 2, DEFAULT_CLASS_CAP).unwrap();
        for k in 1..12 {
            let eps = k as f64 * 0.09;
            let exact = bracketing_number(&mono, eps, &p, 2.0, CoverMode::Exact, &opts()).unwrap();
            assert_eq!(exact, brute_force_brackets(&mono, &p, eps), "ε = {eps}");
            let greedy =
                bracketing_number(&mono, eps, &p, 2.0, CoverMode::Greedy, &opts()).unwrap();
            assert!(greedy >= exact);
        }
    }

    #[test]
    fn internal_covering_is_dominated_by_bracketing() {
        // Members of one bracket of size ε lie within ε of each other.
        let g = grid(4);
        let p = DiscreteMeasure::uniform(g.clone());
        let q = MetricSpec::l2(p.clone());
        for c in [
            make_halfline_indicators(g.clone()),
            make_monotone_class(g.clone(), 2, DEFAULT_CLASS_CAP).unwrap(),
        ] {
            for k in 1..10 {
                let eps = k as f64 * 0.1;
                let n = covering_number(&c, eps, &q, CoverMode::Exact, &opts()).unwrap();
                let nb = bracketing_number(&c, eps, &p, 2.0, CoverMode::Exact, &opts()).unwrap();
                assert!(n <= nb, "{}: N({eps}) = {n} > N_[] = {nb}", c.label());
            }
        }
    }

    #[test]
    fn uniform_covering_examples() {
        let g = grid(4);
        let c = make_halfline_indicators(g.clone());
        let p = DiscreteMeasure::uniform(g.clone());
        let fam = candidate_family(&g, &p, 5, 8, 3).unwrap();
        assert_eq!(fam.measures.len(), 1 + 4 + 6 + 5);
        let uni = uniform_covering_number(&c, 0.5, 2.0, &fam.measures, CoverMode::Exact, &opts())
            .unwrap();
        assert!(uni >= 2);
        for q in &fam.measures {
            let n = uniform_covering_number(
                &c,
                0.5,
                2.0,
                std::slice::from_ref(q),
                CoverMode::Exact,
                &opts(),
            )
            .unwrap();
            assert!(n <= c.len());
        }
        let single = FunctionClass::new(
            g.clone(),
            vec![GridFunction::zero(4)],
            Some(GridFunction::zero(4)),
            "0",
        )
        .unwrap();
        assert_eq!(
            uniform_covering_number(&single, 0.1, 2.0, &fam.measures, CoverMode::Exact, &opts())
                .unwrap(),
            1
        );
        assert!(uniform_covering_number(&c, 0.5, 2.0, &[], CoverMode::Exact, &opts()).is_err());
    }

    #[test]
    fn numbers_are_monotone_in_eps() {
        let g = grid(6);
        let c = make_monotone_class(g.clone(), 2, DEFAULT_CLASS_CAP).unwrap();
        let q = MetricSpec::l2(DiscreteMeasure::uniform(g));
        let eps: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
        let rows = entropy_sweep(&c, &eps, &q, &CoverOptions { exact_cap: 0 }).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].packing <= w[0].packing);
            assert!(w[1].bracketing <= w[0].bracketing);
        }
        let g = grid(5);
        let c = make_halfline_indicators(g.clone());
        let q = MetricSpec::l2(DiscreteMeasure::uniform(g));
        let rows = entropy_sweep(&c, &eps, &q, &opts()).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].covering_exact <= w[0].covering_exact);
        }
        // diameter is 1: one ball suffices from there on
        assert_eq!(rows.last().unwrap().covering_exact, Some(1));
    }
}
