//! Finite function classes with envelopes, and the derived classes the
//! maximal inequalities quantify over.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Grid, GridFunction};
use crate::scalar::{count, Real};

/// Default ceiling on generated class sizes.
pub const DEFAULT_CLASS_CAP: usize = 200_000;

/// A nonempty finite set of grid functions dominated by an envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionClass<T> {
    grid: Arc<Grid<T>>,
    members: Vec<GridFunction<T>>,
    envelope: GridFunction<T>,
    label: String,
}

impl<T: Real> FunctionClass<T> {
    /// Builds a class; the envelope defaults to the pointwise maximum of
    /// `|f|` over the members. A supplied envelope must dominate every member.
    pub fn new(
        grid: Arc<Grid<T>>,
        members: Vec<GridFunction<T>>,
        envelope: Option<GridFunction<T>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        if members.is_empty() {
            return Err(Error::EmptyClass(label));
        }
        let m = grid.len();
        if let Some(bad) = members.iter().position(|f| f.len() != m) {
            return Err(Error::Domain(format!(
                "member {bad} of `{label}` has {} values on a grid of {m}",
                members[bad].len()
            )));
        }
        let envelope = match envelope {
            Some(e) => {
                if e.len() != m {
                    return Err(Error::Domain(format!(
                        "envelope of `{label}` has wrong length"
                    )));
                }
                if e.values().iter().any(|v| *v < T::zero()) {
                    return Err(Error::Parameter(format!(
                        "envelope of `{label}` is negative"
                    )));
                }
                for (k, f) in members.iter().enumerate() {
                    if let Some(j) = f
                        .values()
                        .iter()
                        .zip(e.values())
                        .position(|(v, bound)| v.abs() > *bound)
                    {
                        return Err(Error::Parameter(format!(
                            "member {k} of `{label}` exceeds the envelope at grid point {j}"
                        )));
                    }
                }
                e
            }
            None => pointwise_abs_max(&members, m),
        };
        Ok(Self {
            grid,
            members,
            envelope,
            label,
        })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn members(&self) -> &[GridFunction<T>] {
        &self.members
    }

    pub fn envelope(&self) -> &GridFunction<T> {
        &self.envelope
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True when every envelope value is at most one.
    pub fn envelope_bounded_by_one(&self) -> bool {
        self.envelope.values().iter().all(|v| *v <= T::one())
    }

    /// The class `{f^k}` with envelope `F^k`.
    fn power_class(&self, k: i32, suffix: &str) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|f| f.map(|v| v.powi(k)))
            .collect::<Result<Vec<_>>>()?;
        let envelope = self.envelope.map(|v| v.powi(k))?;
        Self::new(
            Arc::clone(&self.grid),
            members,
            Some(envelope),
            format!("{}{suffix}", self.label),
        )
    }

    /// Multiplies every member and the envelope pointwise by `|w|`.
    pub fn scale_pointwise(&self, w: &GridFunction<T>, label: impl Into<String>) -> Result<Self> {
        if w.len() != self.grid.len() {
            return Err(Error::Domain("weight function has wrong length".into()));
        }
        let mul = |f: &GridFunction<T>| {
            GridFunction::new(
                f.values()
                    .iter()
                    .zip(w.values())
                    .map(|(&a, &b)| a * b.abs())
                    .collect(),
            )
        };
        let members = self.members.iter().map(mul).collect::<Result<Vec<_>>>()?;
        let envelope = mul(&self.envelope)?;
        Self::new(Arc::clone(&self.grid), members, Some(envelope), label)
    }

    /// Multiplies members and envelope by a nonnegative constant.
    pub fn scale(&self, c: T) -> Result<Self> {
        if c < T::zero() {
            return Err(Error::Parameter("scale factor must be ≥ 0".into()));
        }
        let w = GridFunction::constant(self.grid.len(), c);
        self.scale_pointwise(&w, format!("{}×{c}", self.label))
    }
}

fn pointwise_abs_max<T: Real>(members: &[GridFunction<T>], m: usize) -> GridFunction<T> {
    let mut env = vec![T::zero(); m];
    for f in members {
        for (e, v) in env.iter_mut().zip(f.values()) {
            *e = e.max(v.abs());
        }
    }
    GridFunction::new(env).expect("absolute values of finite members are finite")
}

fn lexicographic<T: Real>(a: &GridFunction<T>, b: &GridFunction<T>) -> Ordering {
    for (x, y) in a.values().iter().zip(b.values()) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// `{1{x ≤ t}: t ∈ grid ∪ {−∞}}`, envelope `≡ 1`, `m + 1` members.
pub fn make_halfline_indicators<T: Real>(grid: Arc<Grid<T>>) -> FunctionClass<T> {
    let m = grid.len();
    let mut members: Vec<GridFunction<T>> = (0..=m)
        .map(|k| {
            let v = (0..m)
                .map(|j| if j < k { T::one() } else { T::zero() })
                .collect();
            GridFunction::new(v).expect("indicator values are finite")
        })
        .collect();
    members.sort_by(lexicographic);
    FunctionClass::new(
        grid,
        members,
        Some(GridFunction::constant(m, T::one())),
        "halfline",
    )
    .expect("indicators are dominated by 1")
}

/// `{1{a < x ≤ b}}` over all grid intervals, including the empty interval.
pub fn make_interval_indicators<T: Real>(grid: Arc<Grid<T>>) -> FunctionClass<T> {
    let m = grid.len();
    let mut members = vec![GridFunction::zero(m)];
    for lo in 0..m {
        for hi in lo + 1..=m {
            let v = (0..m)
                .map(|j| {
                    if j >= lo && j < hi {
                        T::one()
                    } else {
                        T::zero()
                    }
                })
                .collect();
            members.push(GridFunction::new(v).expect("finite"));
        }
    }
    members.sort_by(lexicographic);
    FunctionClass::new(
        grid,
        members,
        Some(GridFunction::constant(m, T::one())),
        "interval",
    )
    .expect("indicators are dominated by 1")
}

/// Number of nondecreasing maps from `m` points into `levels + 1` values,
/// `C(m + L, L)`, saturating at `u128::MAX`.
pub fn monotone_class_size(m: usize, levels: usize) -> u128 {
    let k = levels.min(m) as u128;
    let total = (m + levels) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (total - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(total - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All nondecreasing step functions with values in `{0, 1/L, …, 1}`,
/// envelope `≡ 1`, in lexicographic order. Fails when `C(m+L, L) > cap`.
pub fn make_monotone_class<T: Real>(
    grid: Arc<Grid<T>>,
    levels: usize,
    cap: usize,
) -> Result<FunctionClass<T>> {
    if levels == 0 {
        return Err(Error::Parameter("monotone class needs L ≥ 1".into()));
    }
    let m = grid.len();
    let size = monotone_class_size(m, levels);
    if size > cap as u128 {
        return Err(Error::SizeCap { count: size, cap });
    }
    let scale = count::<T>(levels);
    let mut members = Vec::with_capacity(size as usize);
    let mut current = vec![0usize; m];
    enumerate_monotone(&mut current, 0, 0, levels, &mut |seq| {
        let v = seq.iter().map(|&k| count::<T>(k) / scale).collect();
        members.push(GridFunction::new(v).expect("finite"));
    });
    FunctionClass::new(
        grid,
        members,
        Some(GridFunction::constant(m, T::one())),
        format!("monotone(L={levels})"),
    )
}

fn enumerate_monotone(
    seq: &mut Vec<usize>,
    pos: usize,
    min_level: usize,
    levels: usize,
    emit: &mut impl FnMut(&[usize]),
) {
    if pos == seq.len() {
        emit(seq);
        return;
    }
    for k in min_level..=levels {
        seq[pos] = k;
        enumerate_monotone(seq, pos + 1, k, levels, emit);
    }
}

/// `{f ∈ C: P f² ≤ δ² P F²}` with the envelope unchanged.
///
/// The comparison is the non-strict `≤`. An empty subclass is reported as
/// [`Error::EmptyClass`].
pub fn variance_restrict<T: Real>(
    class: &FunctionClass<T>,
    p: &DiscreteMeasure<T>,
    delta: T,
) -> Result<FunctionClass<T>> {
    if !(delta > T::zero()) {
        return Err(Error::Parameter(format!("δ must be positive, got {delta}")));
    }
    let two = T::one() + T::one();
    let threshold = delta * delta * p.abs_moment(class.envelope(), two)?;
    let mut kept = Vec::new();
    for f in class.members() {
        if p.abs_moment(f, two)? <= threshold {
            kept.push(f.clone());
        }
    }
    let label = format!("{}|δ={delta}", class.label());
    if kept.is_empty() {
        return Err(Error::EmptyClass(label));
    }
    FunctionClass::new(
        Arc::clone(class.grid()),
        kept,
        Some(class.envelope().clone()),
        label,
    )
}

/// `{f²}` with envelope `F²`.
pub fn square_class<T: Real>(class: &FunctionClass<T>) -> FunctionClass<T> {
    class
        .power_class(2, "²")
        .expect("squares of a dominated class are dominated")
}

/// `{f⁴}` with envelope `F⁴`.
pub fn fourth_power_class<T: Real>(class: &FunctionClass<T>) -> FunctionClass<T> {
    class
        .power_class(4, "⁴")
        .expect("fourth powers of a dominated class are dominated")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: usize) -> Arc<Grid<f64>> {
        Arc::new(Grid::unit(m).unwrap())
    }

    fn gf(v: &[f64]) -> GridFunction<f64> {
        GridFunction::new(v.to_vec()).unwrap()
    }

    fn dominated(c: &FunctionClass<f64>) -> bool {
        c.members().iter().all(|f| {
            f.values()
                .iter()
                .zip(c.envelope().values())
                .all(|(v, e)| v.abs() <= *e)
        })
    }

    #[test]
    fn halfline_examples() {
        let c = make_halfline_indicators(grid(4));
        assert_eq!(c.len(), 5);
        assert_eq!(c.members()[0].values(), &[0.0; 4]);
        assert!(dominated(&c));
        assert!(c.envelope().values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn interval_class_counts() {
        // m(m+1)/2 nonempty intervals plus the empty one
        assert_eq!(make_interval_indicators(grid(5)).len(), 16);
    }

    #[test]
    fn monotone_examples() {
        let c = make_monotone_class(grid(1), 1, DEFAULT_CLASS_CAP).unwrap();
        assert_eq!(c.len(), 2);
        let c = make_monotone_class(grid(2), 1, DEFAULT_CLASS_CAP).unwrap();
        let vals: Vec<Vec<f64>> = c.members().iter().map(|f| f.values().to_vec()).collect();
        assert_eq!(vals, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let c = make_monotone_class(grid(3), 2, DEFAULT_CLASS_CAP).unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(monotone_class_size(3, 2), 10);
        assert!(c
            .members()
            .iter()
            .all(|f| f.values().windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn monotone_count_matches_enumeration() {
        for m in 1..6 {
            for l in 1..5 {
                let c = make_monotone_class(grid(m), l, DEFAULT_CLASS_CAP).unwrap();
                assert_eq!(c.len() as u128, monotone_class_size(m, l), "m={m} L={l}");
            }
        }
    }

    #[test]
    fn monotone_cap_reports_count() {
        match make_monotone_class(grid(30), 10, 1000) {
            Err(Error::SizeCap { count, cap }) => {
                assert_eq!(cap, 1000);
                assert_eq!(count, monotone_class_size(30, 10));
            }
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn envelope_must_dominate() {
        let g = grid(2);
        assert!(
            FunctionClass::new(g.clone(), vec![gf(&[1.0, 2.0])], Some(gf(&[1.0, 1.0])), "x")
                .is_err()
        );
        assert!(FunctionClass::new(g.clone(), vec![], None, "x").is_err());
        let c = FunctionClass::new(g, vec![gf(&[0.5, -2.0]), gf(&[-1.0, 0.0])], None, "x").unwrap();
        assert_eq!(c.envelope().values(), &[1.0, 2.0]);
    }

    #[test]
    fn variance_restrict_examples() {
        let g = grid(4);
        let p = DiscreteMeasure::uniform(g.clone());
        let c = make_halfline_indicators(g.clone());
        assert_eq!(variance_restrict(&c, &p, 1.0).unwrap().len(), 5);
        assert_eq!(variance_restrict(&c, &p, 3.0).unwrap().len(), 5);
        let tiny = variance_restrict(&c, &p, 1e-9).unwrap();
        assert_eq!(tiny.len(), 1);
        assert_eq!(tiny.members()[0].values(), &[0.0; 4]);
        let r = variance_restrict(&c, &p, 0.6).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.envelope(), c.envelope());
        let no_zero =
            FunctionClass::new(g.clone(), vec![gf(&[1.0, 1.0, 1.0, 1.0])], None, "one").unwrap();
        assert!(matches!(
            variance_restrict(&no_zero, &p, 0.1),
            Err(Error::EmptyClass(_))
        ));
        assert!(variance_restrict(&c, &p, 0.0).is_err());
    }

    #[test]
    fn power_classes() {
        let g = grid(2);
        let ind = make_halfline_indicators(g.clone());
        assert_eq!(square_class(&ind).members(), ind.members());
        assert_eq!(fourth_power_class(&ind).members(), ind.members());
        let c = FunctionClass::new(
            g.clone(),
            vec![gf(&[0.5, -0.5])],
            Some(gf(&[1.0, 2.0])),
            "c",
        )
        .unwrap();
        let sq = square_class(&c);
        assert_eq!(sq.members()[0].values(), &[0.25, 0.25]);
        assert_eq!(sq.envelope().values(), &[1.0, 4.0]);
        let c = FunctionClass::new(g, vec![gf(&[0.5, 0.0])], None, "c").unwrap();
        let q = fourth_power_class(&c);
        assert_eq!(q.members()[0].values(), &[0.0625, 0.0]);
        assert!(dominated(&q));
    }

    #[test]
    fn scaling_preserves_dominance() {
        let g = grid(6);
        let c = make_halfline_indicators(g.clone());
        let w = GridFunction::new(g.points().iter().map(|x| 1.0 + 2.0 * x).collect()).unwrap();
        let s = c.scale_pointwise(&w, "weighted").unwrap();
        assert!(dominated(&s));
        assert_eq!(s.envelope().values(), w.values());
        assert!(!s.envelope_bounded_by_one());
        assert!(c.scale(0.5).unwrap().envelope_bounded_by_one());
    }
}
