//! Globally adaptive Gauss–Kronrod (7/15) quadrature and Gauss–Legendre rules.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // float math is inherent in core on recent toolchains
use num_traits::Float;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values an integrand may return.
pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_evaluations: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_evaluations: 200_000,
        }
    }

    pub fn with_budget(mut self, max_evaluations: usize) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(0.0, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        kronrod = kronrod + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let k = kronrod * h;
    let g = gauss * h;
    (k, (k - g).magnitude())
}

/// Adaptive integral of `f` over `[a, b]` (finite limits, `a < b` or `a > b`).
///
/// Bisects the interval with the largest error estimate until the summed
/// error is below `max(tol.abs, tol.rel·|I|)`.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(Estimate {
            value: T::default(),
            error: 0.0,
            evaluations: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("limit", if a.is_finite() { b } else { a }, "finite"));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut total = v;
    let mut total_err = e;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    loop {
        let target = tol.abs.max(tol.rel * total.magnitude());
        if total_err <= target {
            break;
        }
        if evaluations + 30 > tol.max_evaluations {
            return Err(Error::Convergence {
                estimate: total.magnitude(),
                error: total_err,
                evaluations,
            });
        }
        let seg = heap.pop().expect("heap never empties");
        let m = 0.5 * (seg.a + seg.b);
        if m == seg.a || m == seg.b {
            // Interval collapsed to adjacent floats; nothing left to refine.
            return Err(Error::Convergence {
                estimate: total.magnitude(),
                error: total_err,
                evaluations,
            });
        }
        let (v1, e1) = gk15(&mut f, seg.a, m);
        let (v2, e2) = gk15(&mut f, m, seg.b);
        evaluations += 30;
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: m,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
    // Resum from the segments to shed accumulated update round-off.
    let mut value = T::default();
    let mut error = 0.0;
    for s in heap.iter() {
        value = value + s.value;
        error += s.error;
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Adaptive integral over consecutive break points `[x0, x1, ..., xm]`.
pub fn integrate_pieces<T, F>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let mut out = Estimate {
        value: T::default(),
        error: 0.0,
        evaluations: 0,
    };
    for w in breaks.windows(2) {
        let local = Tolerance {
            abs: tol.abs / pieces,
            ..tol
        };
        let e = integrate(&mut f, w[0], w[1], local)?;
        out.value = out.value + e.value;
        out.error += e.error;
        out.evaluations += e.evaluations;
    }
    Ok(out)
}

/// The n-point Gauss–Legendre rule on [-1, 1], nodes ascending.
///
/// Newton iteration on the three-term recurrence; the middle node is exactly
/// zero for odd n and the rule is exactly mirror-symmetric.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "n >= 1"));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI_F * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-14 {
                // two polishing steps past the tolerance
                for _ in 0..2 {
                    let (p, d) = legendre_with_derivative(n, z);
                    z -= p / d;
                }
                dp = legendre_with_derivative(n, z).1;
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Grid(alloc::format!(
                "Legendre root {} of P_{} did not converge to 1e-14",
                i,
                n
            )));
        }
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
            dp = legendre_with_derivative(n, 0.0).1;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is the i-th largest root
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    Ok((x, w))
}

const PI_F: f64 = core::f64::consts::PI;

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre sum of `f` over `[a, b]` with `panels` equal panels.
pub fn composite_gauss<T, F>(mut f: F, a: f64, b: f64, panels: usize, nodes: &[f64], weights: &[f64]) -> T
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let h = (b - a) / panels as f64;
    let mut acc = T::default();
    for k in 0..panels {
        let c = a + (k as f64 + 0.5) * h;
        let mut s = T::default();
        for (x, w) in nodes.iter().zip(weights) {
            s = s + f(c + 0.5 * h * x) * *w;
        }
        acc = acc + s * (0.5 * h);
    }
    acc
}
