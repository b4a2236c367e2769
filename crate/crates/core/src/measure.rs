//! Finitely supported probability measures on a grid, sampling, and the
//! empirical and symmetrized empirical processes.

use std::sync::Arc;

use rand::Rng;

use crate::classes::FunctionClass;
use crate::error::{Error, Result};
use crate::scalar::{count, lit, tol, Real};
use crate::seed;

/// Ordered discretization of the sample space.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    points: Vec<T>,
}

impl<T: Real> Grid<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("grid needs at least one point".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parameter("grid points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter(
                "grid points must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// `m` equispaced points `0, 1/(m-1), …, 1` (the single point `0` when `m = 1`).
    pub fn unit(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("grid size must be ≥ 1".into()));
        }
        if m == 1 {
            return Self::new(vec![T::zero()]);
        }
        let step = T::one() / count::<T>(m - 1);
        Self::new((0..m).map(|j| count::<T>(j) * step).collect())
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Real function on the grid, stored by value at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(
                "grid function values must be finite".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn constant(m: usize, c: T) -> Self {
        Self { values: vec![c; m] }
    }

    pub fn zero(m: usize) -> Self {
        Self::constant(m, T::zero())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise `a·self + b·other`.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Domain(format!(
            "grid mismatch: expected {expected} values, got {got}"
        )));
    }
    Ok(())
}

/// Probability measure supported on the points of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    grid: Arc<Grid<T>>,
    weights: Vec<T>,
}

impl<T: Real> DiscreteMeasure<T> {
    /// Weights must be nonnegative and sum to one within `1e-12`.
    pub fn new(grid: Arc<Grid<T>>, weights: Vec<T>) -> Result<Self> {
        check_len(grid.len(), weights.len())?;
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::Parameter(
                "measure weights must be finite and ≥ 0".into(),
            ));
        }
        let total: T = weights.iter().copied().sum();
        let slack = tol::<T>(1e-12).max(T::epsilon() * count(4 * weights.len()));
        if (total - T::one()).abs() > slack {
            return Err(Error::Parameter(format!(
                "measure weights sum to {total}, not 1"
            )));
        }
        Ok(Self { grid, weights })
    }

    /// Normalizes arbitrary nonnegative masses.
    pub fn from_masses(grid: Arc<Grid<T>>, masses: Vec<T>) -> Result<Self> {
        let total: T = masses.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::Parameter("total mass must be positive".into()));
        }
        Self::new(grid, masses.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(grid: Arc<Grid<T>>) -> Self {
        let m = grid.len();
        let w = T::one() / count(m);
        Self {
            grid,
            weights: vec![w; m],
        }
    }

    pub fn point_mass(grid: Arc<Grid<T>>, j: usize) -> Result<Self> {
        if j >= grid.len() {
            return Err(Error::Domain(format!("point index {j} outside grid")));
        }
        let mut weights = vec![T::zero(); grid.len()];
        weights[j] = T::one();
        Ok(Self { grid, weights })
    }

    /// Mass 1/2 at each of two distinct grid points.
    pub fn pair_uniform(grid: Arc<Grid<T>>, i: usize, j: usize) -> Result<Self> {
        if i >= grid.len() || j >= grid.len() || i == j {
            return Err(Error::Domain(format!("invalid point pair ({i}, {j})")));
        }
        let mut weights = vec![T::zero(); grid.len()];
        weights[i] = lit(0.5);
        weights[j] = lit(0.5);
        Ok(Self { grid, weights })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Pf = Σ_j w_j f_j`.
    pub fn integrate(&self, f: &GridFunction<T>) -> Result<T> {
        check_len(self.len(), f.len())?;
        Ok(self.dot(f.values()))
    }

    fn dot(&self, values: &[T]) -> T {
        self.weights.iter().zip(values).map(|(&w, &v)| w * v).sum()
    }

    /// `Q|f|^r` without the outer root.
    pub fn abs_moment(&self, f: &GridFunction<T>, r: T) -> Result<T> {
        check_len(self.len(), f.len())?;
        Ok(self
            .weights
            .iter()
            .zip(f.values())
            .filter(|(w, _)| **w > T::zero())
            .map(|(&w, &v)| w * v.abs().powf(r))
            .sum())
    }

    /// `‖f‖_{Q,r} = (Q|f|^r)^{1/r}`, for `r ≥ 1`.
    pub fn lr_norm(&self, f: &GridFunction<T>, r: T) -> Result<T> {
        if !(r >= T::one()) {
            return Err(Error::Parameter(format!("L_r norm needs r ≥ 1, got {r}")));
        }
        Ok(self.abs_moment(f, r)?.powf(r.recip()))
    }

    /// `L_r(Q)` distance between two grid functions.
    pub fn lr_distance(&self, f: &GridFunction<T>, g: &GridFunction<T>, r: T) -> Result<T> {
        check_len(f.len(), g.len())?;
        check_len(self.len(), f.len())?;
        Ok(self.lr_distance_unchecked(f.values(), g.values(), r))
    }

    pub(crate) fn lr_distance_unchecked(&self, f: &[T], g: &[T], r: T) -> T {
        let two = lit::<T>(2.0);
        let s: T = self
            .weights
            .iter()
            .zip(f.iter().zip(g))
            .filter(|(w, _)| **w > T::zero())
            .map(|(&w, (&a, &b))| {
                let d = (a - b).abs();
                if r == two {
                    w * d * d
                } else {
                    w * d.powf(r)
                }
            })
            .sum();
        if r == two {
            s.sqrt()
        } else {
            s.powf(r.recip())
        }
    }

    /// Bernstein "norm" `(2 P(e^{|f|} − 1 − |f|))^{1/2}`.
    ///
    /// Not a norm: no triangle inequality is assumed anywhere it is used.
    pub fn bernstein_norm(&self, f: &GridFunction<T>) -> Result<T> {
        check_len(self.len(), f.len())?;
        let limit = lit::<T>(700.0);
        let mut acc = T::zero();
        for (j, (&w, &v)) in self.weights.iter().zip(f.values()).enumerate() {
            let a = v.abs();
            if a > limit {
                return Err(Error::Range(format!(
                    "|f| = {a} at grid point {j} overflows exp in Bernstein norm"
                )));
            }
            acc = acc + w * expm1_minus_x(a);
        }
        Ok((lit::<T>(2.0) * acc).sqrt())
    }

    /// Inverse-CDF sampling of `n` i.i.d. grid indices.
    pub fn draw_sample(&self, n: usize, seed: u64) -> Result<SampleDraw> {
        if n == 0 {
            return Err(Error::Parameter("sample size must be ≥ 1".into()));
        }
        let cdf = self.cdf_f64();
        let last_positive = self
            .weights
            .iter()
            .rposition(|w| *w > T::zero())
            .expect("probability measure has positive mass");
        let mut rng = seed::sample_rng(seed);
        let indices = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                let j = cdf.partition_point(|&c| c <= u);
                j.min(last_positive)
            })
            .collect();
        Ok(SampleDraw {
            indices,
            grid_size: self.len(),
            seed,
        })
    }

    fn cdf_f64(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.weights
            .iter()
            .map(|w| {
                acc += w.to_f64().unwrap_or(0.0);
                acc
            })
            .collect()
    }

    pub(crate) fn ensure_same_grid(&self, m: usize) -> Result<()> {
        check_len(self.len(), m)
    }
}

/// `e^x − 1 − x` for `x ≥ 0`, accurate near zero.
fn expm1_minus_x<T: Real>(x: T) -> T {
    if x < lit(1e-3) {
        // x²/2 + x³/6 + x⁴/24 + x⁵/120
        let x2 = x * x;
        x2 * (lit::<T>(0.5)
            + x * (lit::<T>(1.0 / 6.0) + x * (lit::<T>(1.0 / 24.0) + x / lit(120.0))))
    } else {
        x.exp_m1() - x
    }
}

/// Indices of `n` observations drawn from a grid measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleDraw {
    indices: Vec<usize>,
    grid_size: usize,
    seed: u64,
}

impl SampleDraw {
    /// Wraps explicit indices (the seed is recorded as given).
    pub fn from_indices(indices: Vec<usize>, grid_size: usize, seed: u64) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Parameter("sample must be nonempty".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= grid_size) {
            return Err(Error::Domain(format!(
                "index {bad} outside grid of size {grid_size}"
            )));
        }
        Ok(Self {
            indices,
            grid_size,
            seed,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Multiplicity of each grid point in the sample.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0usize; self.grid_size];
        for &i in &self.indices {
            c[i] += 1;
        }
        c
    }

    /// Rademacher signs for this draw, from the seed's sign stream.
    pub fn rademacher(&self) -> SignVector {
        SignVector::draw(self.n(), self.seed)
    }
}

/// Independent Rademacher signs paired with a sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    signs: Vec<i8>,
    seed: u64,
}

impl SignVector {
    pub fn draw(n: usize, seed: u64) -> Self {
        let mut rng = seed::sign_rng(seed);
        let signs = (0..n)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        Self { signs, seed }
    }

    pub fn from_signs(signs: Vec<i8>, seed: u64) -> Result<Self> {
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Parameter("signs must be ±1".into()));
        }
        Ok(Self { signs, seed })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

/// `P_n` of a draw: point masses `#{i: X_i = j}/n`.
pub fn empirical_measure<T: Real>(
    grid: &Arc<Grid<T>>,
    draw: &SampleDraw,
) -> Result<DiscreteMeasure<T>> {
    check_len(grid.len(), draw.grid_size())?;
    let n = count::<T>(draw.n());
    let weights = draw
        .counts()
        .into_iter()
        .map(|c| count::<T>(c) / n)
        .collect();
    Ok(DiscreteMeasure {
        grid: Arc::clone(grid),
        weights,
    })
}

/// `G_n f = √n (P_n f − P f)`.
pub fn empirical_process<T: Real>(
    draw: &SampleDraw,
    f: &GridFunction<T>,
    p: &DiscreteMeasure<T>,
) -> Result<T> {
    check_len(p.len(), draw.grid_size())?;
    let pf = p.integrate(f)?;
    let sum: T = draw.indices().iter().map(|&i| f.values()[i]).sum();
    let n = count::<T>(draw.n());
    Ok((sum / n - pf) * n.sqrt())
}

/// `G_n° f = n^{-1/2} Σ ε_i f(X_i)`.
pub fn symmetrized_process<T: Real>(
    draw: &SampleDraw,
    signs: &SignVector,
    f: &GridFunction<T>,
) -> Result<T> {
    if draw.n() != signs.len() {
        return Err(Error::Domain(format!(
            "sample of size {} paired with {} signs",
            draw.n(),
            signs.len()
        )));
    }
    check_len(f.len(), draw.grid_size())?;
    let s: T = draw
        .indices()
        .iter()
        .zip(signs.signs())
        .map(|(&i, &e)| if e > 0 { f.values()[i] } else { -f.values()[i] })
        .sum();
    Ok(s / count::<T>(draw.n()).sqrt())
}

/// `‖G_n‖_F = max_f |G_n f|` over a finite class.
pub fn sup_abs_process<T: Real>(
    draw: &SampleDraw,
    class: &FunctionClass<T>,
    p: &DiscreteMeasure<T>,
) -> Result<T> {
    p.ensure_same_grid(class.grid().len())?;
    check_len(p.len(), draw.grid_size())?;
    let counts = draw.counts();
    Ok(sup_abs_from_counts(&counts, draw.n(), class, p))
}

/// Fast path shared with the Monte Carlo engine: `counts` are the sample
/// multiplicities per grid point.
pub(crate) fn sup_abs_from_counts<T: Real>(
    counts: &[usize],
    n: usize,
    class: &FunctionClass<T>,
    p: &DiscreteMeasure<T>,
) -> T {
    let nf = count::<T>(n);
    let root = nf.sqrt();
    class
        .members()
        .iter()
        .map(|f| {
            let mut pnf = T::zero();
            for (&c, &v) in counts.iter().zip(f.values()) {
                if c > 0 {
                    pnf = pnf + count::<T>(c) * v;
                }
            }
            let pf = p.dot(f.values());
            ((pnf / nf - pf) * root).abs()
        })
        .fold(T::zero(), T::max)
}

/// Symmetrized supremum from signed multiplicities `Σ_{i: X_i = j} ε_i`.
pub(crate) fn sup_abs_symmetrized_from_signed<T: Real>(
    signed: &[i64],
    n: usize,
    class: &FunctionClass<T>,
) -> T {
    let root = count::<T>(n).sqrt();
    class
        .members()
        .iter()
        .map(|f| {
            let mut s = T::zero();
            for (&c, &v) in signed.iter().zip(f.values()) {
                if c != 0 {
                    s = s + T::from_i64(c).expect("count fits scalar") * v;
                }
            }
            (s / root).abs()
        })
        .fold(T::zero(), T::max)
}

/// `σ_{n,r} = (max_f P_n|f|^r)^{1/r}`, the diameter of the class in `L_r(P_n)`.
pub fn class_diameter<T: Real>(draw: &SampleDraw, class: &FunctionClass<T>, r: T) -> Result<T> {
    if !(r >= T::one()) {
        return Err(Error::Parameter(format!("diameter needs r ≥ 1, got {r}")));
    }
    check_len(class.grid().len(), draw.grid_size())?;
    let pn = empirical_measure(class.grid(), draw)?;
    let mut best = T::zero();
    for f in class.members() {
        best = best.max(pn.abs_moment(f, r)?);
    }
    Ok(best.powf(r.recip()))
}
