//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets the tolerance. Subdivision order depends only on the
//! integrand values, so repeated runs are bit-identical.

use crate::error::{Error, Result};
use crate::scalar::{lit, tol, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5]` and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = lit::<T>(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_k = fc * lit(WGK[7]);
    let mut res_g = fc * lit(WG[3]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let x = half_len * lit(XGK[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + lit::<T>(WGK[j]) * (f1 + f2);
        res_abs = res_abs + lit::<T>(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + lit::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = lit::<T>(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + lit::<T>(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half_len.abs();
    let value = res_k * half_len;
    res_abs = res_abs * scale;
    res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && err != T::zero() {
        let ratio = (lit::<T>(200.0) * err / res_asc).powf(lit(1.5));
        err = res_asc * ratio.min(T::one());
    }
    let floor = lit::<T>(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (lit::<T>(50.0) * T::epsilon()) {
        err = err.max(floor);
    }
    (value, err)
}

/// `∫_a^b f` by adaptive Gauss–Kronrod; `a ≤ b` required.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    opts: &QuadOptions,
) -> Result<QuadResult<T>> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Quadrature(format!("invalid interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        });
    }
    let (v, e) = kronrod(&f, a, b);
    let mut panels = vec![Panel {
        a,
        b,
        value: v,
        error: e,
    }];
    // requested tolerances are floored at the working precision
    let rel_tol = tol::<T>(opts.rel_tol).max(lit::<T>(64.0) * T::epsilon());
    let abs_tol = tol::<T>(opts.abs_tol);
    loop {
        let total: T = panels.iter().map(|p| p.value).sum();
        let err: T = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature("non-finite integrand value".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: total,
                error: err,
                intervals: panels.len(),
            });
        }
        if panels.len() >= opts.max_intervals {
            // accept at the roundoff limit, otherwise fail loudly
            if err <= lit::<T>(1e3) * abs_tol.max(rel_tol * total.abs()) {
                return Ok(QuadResult {
                    value: total,
                    error: err,
                    intervals: panels.len(),
                });
            }
            return Err(Error::Quadrature(format!(
                "tolerance not met after {} intervals (error estimate {err})",
                panels.len()
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        let p = panels.swap_remove(worst);
        let mid = lit::<T>(0.5) * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::Quadrature(
                "interval cannot be bisected further".into(),
            ));
        }
        let (v1, e1) = kronrod(&f, p.a, mid);
        let (v2, e2) = kronrod(&f, mid, p.b);
        panels.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
        });
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(
            |x: f64| x.powi(5) - 3.0 * x * x,
            0.0,
            2.0,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn smooth_and_peaked() {
        let o = QuadOptions::default();
        let r = integrate(|x: f64| x.exp(), 0.0, 1.0, &o).unwrap();
        assert!((r.value - (std::f64::consts::E - 1.0)).abs() < 1e-13);
        let r = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, &o).unwrap();
        let want = 2.0 * 100.0 * (100.0f64).atan();
        assert!((r.value - want).abs() < 1e-9 * want);
        assert!(r.error >= 0.0);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_invalid_intervals() {
        let o = QuadOptions::default();
        assert_eq!(integrate(|x: f64| x, 1.0, 1.0, &o).unwrap().value, 0.0);
        assert!(integrate(|x: f64| x, 1.0, 0.0, &o).is_err());
        assert!(integrate(|_x: f64| f64::NAN, 0.0, 1.0, &o).is_err());
    }

    #[test]
    fn bit_identical_reruns() {
        let f = |x: f64| (1.0 + 2.0 * (1.0 / x).ln()).sqrt();
        let o = QuadOptions::default();
        let a = integrate(f, 1e-9, 1.0, &o).unwrap();
        let b = integrate(f, 1e-9, 1.0, &o).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn single_precision() {
        let r = integrate(
            |x: f32| x * x,
            0.0,
            3.0,
            &QuadOptions {
                abs_tol: 1e-6,
                rel_tol: 1e-6,
                max_intervals: 100,
            },
        )
        .unwrap();
        assert!((r.value - 9.0).abs() < 1e-4);
    }
}
