//! Special functions and endpoint-singularity aware quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

const I0_SERIES_MAX: f64 = 15.0;

fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < 1e-18 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// `sqrt(2πx) e^{-x} I₀(x)` from the large-argument expansion, summed up to
/// its smallest term.
fn i0_asymptotic_factor(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * x * k);
        if next >= term {
            return sum;
        }
        sum += next;
        term = next;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Modified Bessel function of the first kind of order zero.
pub fn bessel_i0(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("bessel_i0 needs x >= 0, got {x}")));
    }
    if x <= I0_SERIES_MAX {
        Ok(i0_series(x))
    } else {
        Ok(x.exp() / (2.0 * PI * x).sqrt() * i0_asymptotic_factor(x))
    }
}

/// `e^{-x} I₀(x)`, finite for every `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("bessel_i0_scaled needs x >= 0, got {x}")));
    }
    if x <= I0_SERIES_MAX {
        Ok((-x).exp() * i0_series(x))
    } else if x.is_infinite() {
        Ok(0.0)
    } else {
        Ok(i0_asymptotic_factor(x) / (2.0 * PI * x).sqrt())
    }
}

/// Laplace transform of the arcsine law on `(0, T)`: `e^{-cT/2} I₀(cT/2)`.
///
/// Requires `c >= 0` and `T > 0`; returns NaN otherwise.
pub fn arcsine_phi(c: f64, t: f64) -> f64 {
    if !(c >= 0.0 && t > 0.0) {
        return f64::NAN;
    }
    bessel_i0_scaled(0.5 * c * t).unwrap_or(f64::NAN)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// First hitting time density of zero for Brownian motion started at `a`.
pub fn hitting_density(a: f64, x: f64) -> Result<f64> {
    Ok(log_hitting_density(a, x)?.exp())
}

pub fn log_hitting_density(a: f64, x: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("x", x)?;
    Ok(a.ln() - 0.5 * (2.0 * PI).ln() - 1.5 * x.ln() - a * a / (2.0 * x))
}

/// `P(T₀ > t) = 2Φ(a/√t) - 1`.
pub fn hitting_survival(a: f64, t: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("t", t)?;
    Ok(libm::erf(a / (2.0 * t).sqrt()))
}

/// A point inside a support or window, carried with its distances to both
/// ends so densities with inverse square root blowups stay accurate there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abscissa {
    pub x: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

type Evaluator = dyn Fn(Abscissa) -> f64 + Send + Sync;

/// One-dimensional density with its support and endpoint behaviour.
#[derive(Clone)]
pub struct Density1D {
    pub lo: f64,
    pub hi: f64,
    /// `(x - lo)^{-1/2}` blowup at the lower end.
    pub singular_lo: bool,
    /// `(hi - x)^{-1/2}` blowup at the upper end.
    pub singular_hi: bool,
    /// Features spread over many scales; quadrature starts from a geometric
    /// partition towards the ends.
    pub log_scale: bool,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for Density1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density1D")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("singular_lo", &self.singular_lo)
            .field("singular_hi", &self.singular_hi)
            .field("log_scale", &self.log_scale)
            .finish()
    }
}

impl Density1D {
    pub fn new<F>(lo: f64, hi: f64, singular_lo: bool, singular_hi: bool, eval: F) -> Result<Self>
    where
        F: Fn(Abscissa) -> f64 + Send + Sync + 'static,
    {
        if !(lo.is_finite() && lo < hi) {
            return Err(invalid(format!("bad support ({lo}, {hi})")));
        }
        Ok(Self { lo, hi, singular_lo, singular_hi, log_scale: false, eval: Arc::new(eval) })
    }

    pub fn with_log_scale(mut self, on: bool) -> Self {
        self.log_scale = on;
        self
    }

    /// Density at a point given relative to the support.
    pub fn eval_at(&self, p: Abscissa) -> f64 {
        (self.eval)(p)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(self.lo < x && x < self.hi) {
            return 0.0;
        }
        self.eval_at(Abscissa { x, from_lo: x - self.lo, to_hi: self.hi - x })
    }

    /// Density at a point given relative to the window `[lo, hi]`.
    fn eval_in_window(&self, p: Abscissa, lo: f64, hi: f64) -> f64 {
        if !(self.lo <= p.x && p.x <= self.hi) {
            return 0.0;
        }
        let from_lo = p.from_lo + (lo - self.lo);
        let to_hi = if self.hi.is_infinite() { f64::INFINITY } else { p.to_hi + (self.hi - hi) };
        if from_lo <= 0.0 || to_hi <= 0.0 {
            return 0.0;
        }
        self.eval_at(Abscissa { x: p.x, from_lo, to_hi })
    }

    fn singular_at(&self, lo: f64, hi: f64) -> (bool, bool) {
        (self.singular_lo && lo == self.lo, self.singular_hi && hi == self.hi)
    }

    /// Arcsine law on `(0, T)`.
    pub fn arcsine(t: f64) -> Result<Self> {
        check_positive("T", t)?;
        Self::new(0.0, t, true, true, |p| 1.0 / (PI * (p.from_lo * p.to_hi).sqrt()))
    }

    /// Gamma(1/2, rate c) density `sqrt(c/π) g^{-1/2} e^{-cg}` on `(0, ∞)`.
    pub fn gamma_half(c: f64) -> Result<Self> {
        check_positive("c", c)?;
        let k = (c / PI).sqrt();
        Ok(Self::new(0.0, f64::INFINITY, true, false, move |p| {
            k * (-c * p.from_lo).exp() / p.from_lo.sqrt()
        })?
        .with_log_scale(true))
    }

    /// Hitting time density `f_a` on `(0, ∞)`.
    pub fn hitting(a: f64) -> Result<Self> {
        check_positive("a", a)?;
        Ok(Self::new(0.0, f64::INFINITY, false, false, move |p| {
            log_hitting_density(a, p.from_lo).map_or(0.0, f64::exp)
        })?
        .with_log_scale(true))
    }

    /// Rayleigh density `(y/A) e^{-y²/(2A)}` on `(0, ∞)`.
    pub fn rayleigh(a: f64) -> Result<Self> {
        check_positive("A", a)?;
        Self::new(0.0, f64::INFINITY, false, false, move |p| {
            p.from_lo / a * (-p.from_lo * p.from_lo / (2.0 * a)).exp()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-9, max_depth: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Describes how the window `[lo, hi]` is mapped onto `v ∈ (0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub singular_lo: bool,
    pub singular_hi: bool,
    pub log_scale: bool,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, singular_lo: false, singular_hi: false, log_scale: false }
    }

    pub fn singular(mut self, lo: bool, hi: bool) -> Self {
        self.singular_lo = lo;
        self.singular_hi = hi;
        self
    }

    pub fn log_scale(mut self, on: bool) -> Self {
        self.log_scale = on;
        self
    }

    /// Point and Jacobian for `v ∈ (0, 1)`.
    fn map(&self, v: f64) -> (Abscissa, f64) {
        let (lo, hi) = (self.lo, self.hi);
        if hi.is_infinite() {
            // lo + y², y = v/(1-v): keeps g^{-1/2} at lo and x^{-3/2} tails bounded
            let y = v / (1.0 - v);
            let from_lo = y * y;
            let jac = 2.0 * y / ((1.0 - v) * (1.0 - v));
            return (Abscissa { x: lo + from_lo, from_lo, to_hi: f64::INFINITY }, jac);
        }
        let w = hi - lo;
        let (from_lo, to_hi, jac) = match (self.singular_lo, self.singular_hi) {
            (true, true) => {
                let (s, c) = (FRAC_PI_2 * v).sin_cos();
                (w * s * s, w * c * c, w * FRAC_PI_2 * (PI * v).sin())
            }
            (true, false) => (w * v * v, w * (1.0 - v) * (1.0 + v), 2.0 * w * v),
            (false, true) => {
                let r = 1.0 - v;
                (w * v * (1.0 + r), w * r * r, 2.0 * w * r)
            }
            (false, false) => (w * v, w * (1.0 - v), w),
        };
        let x = if from_lo <= to_hi { lo + from_lo } else { hi - to_hi };
        (Abscissa { x, from_lo, to_hi }, jac)
    }

    fn initial_partition(&self) -> Vec<(f64, f64)> {
        let mut cuts = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        if self.log_scale {
            for k in 3..=24 {
                let d = (-(k as f64)).exp2();
                cuts.push(d);
                if self.hi.is_finite() {
                    cuts.push(1.0 - d);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2).map(|p| (p[0], p[1])).collect()
    }
}

#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error.total_cmp(&o.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = g(c);
    let mut fv = [0.0; 15];
    fv[7] = fc;
    for j in 0..7 {
        fv[j] = g(c - h * XGK[j]);
        fv[14 - j] = g(c + h * XGK[j]);
    }
    if fv.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature { estimate: f64::NAN, error: f64::INFINITY });
    }
    let mut rk = WGK[7] * fc;
    let mut rg = WG[3] * fc;
    let mut resabs = rk.abs();
    for j in 0..7 {
        let s = fv[j] + fv[14 - j];
        rk += WGK[j] * s;
        resabs += WGK[j] * (fv[j].abs() + fv[14 - j].abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    let mean = 0.5 * rk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let (value, resabs, resasc) = (rk * h, resabs * h.abs(), resasc * h.abs());
    let mut err = ((rk - rg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((value, err))
}

/// Globally adaptive Gauss–Kronrod 7/15 quadrature of `f` over a window,
/// after the endpoint substitution described by `win`.
pub fn integrate<F>(f: F, win: Window, opts: QuadOptions) -> Result<Quadrature>
where
    F: Fn(Abscissa) -> f64,
{
    if !(win.lo.is_finite() && win.lo < win.hi) {
        return Err(invalid(format!("bad integration window ({}, {})", win.lo, win.hi)));
    }
    let g = |v: f64| {
        let (p, jac) = win.map(v);
        if jac == 0.0 {
            return 0.0;
        }
        let y = f(p);
        if y == 0.0 { 0.0 } else { y * jac }
    };
    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err) = (0.0, 0.0);
    for (a, b) in win.initial_partition() {
        let (value, error) = gk15(&g, a, b)?;
        total += value;
        total_err += error;
        heap.push(Segment { a, b, value, error, depth: 0 });
    }
    let mut evaluations = 15 * heap.len();
    loop {
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            // re-sum to shed drift from repeated updates
            let value = heap.iter().map(|s| s.value).sum();
            let error = heap.iter().map(|s| s.error).sum();
            return Ok(Quadrature { value, error, evaluations });
        }
        let worst = heap.pop().expect("partition is never empty");
        if worst.depth >= opts.max_depth {
            return Err(Error::Quadrature { estimate: total, error: total_err });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&g, worst.a, mid)?;
        let (v2, e2) = gk15(&g, mid, worst.b)?;
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        let depth = worst.depth + 1;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1, depth });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2, depth });
    }
}

/// Integral of a density over `[lo, hi]` inside its support.
pub fn quad_singular(d: &Density1D, lo: f64, hi: f64) -> Result<f64> {
    if !(d.lo <= lo && lo < hi && hi <= d.hi) {
        return Err(invalid(format!("window ({lo}, {hi}) not inside support ({}, {})", d.lo, d.hi)));
    }
    let (sl, sh) = d.singular_at(lo, hi);
    let win = Window::new(lo, hi).singular(sl, sh).log_scale(d.log_scale);
    Ok(integrate(|p| d.eval_in_window(p, lo, hi), win, QuadOptions::default())?.value)
}

/// Integrate a functional of two densities over a common window, using the
/// union of their endpoint flags.
pub fn integrate_pair<F>(d1: &Density1D, d2: &Density1D, lo: f64, hi: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let (a1, b1) = d1.singular_at(lo, hi);
    let (a2, b2) = d2.singular_at(lo, hi);
    let win = Window::new(lo, hi)
        .singular(a1 || a2, b1 || b2)
        .log_scale(d1.log_scale || d2.log_scale);
    let q = integrate(
        |p| f(d1.eval_in_window(p, lo, hi), d2.eval_in_window(p, lo, hi)),
        win,
        QuadOptions::default(),
    )?;
    Ok(q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        for x in [0.3, 1.7, 4.2, 8.0] {
            assert!((normal_cdf(-x) - (1.0 - normal_cdf(x))).abs() < 1e-15);
        }
    }

    /// Reference I₀ from a plain 60-term series summed in descending order.
    fn i0_oracle(x: f64) -> f64 {
        let q = x * x / 4.0;
        let terms: Vec<f64> = (0..60)
            .scan(1.0, |t, k| {
                if k > 0 {
                    *t *= q / (k as f64 * k as f64);
                }
                Some(*t)
            })
            .collect();
        terms.iter().rev().sum()
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        assert_relative_eq!(bessel_i0(1.0).unwrap(), 1.266_065_877_752_008_4, max_relative = 1e-14);
        assert_relative_eq!(bessel_i0(10.0).unwrap(), 2_815.716_628_466_254, max_relative = 1e-13);
        for x in [0.5, 3.0, 7.5, 12.0, 14.9] {
            assert_relative_eq!(bessel_i0(x).unwrap(), i0_oracle(x), max_relative = 1e-13);
        }
        assert!(bessel_i0(-1.0).is_err());
    }

    #[test]
    fn bessel_crossover_is_continuous() {
        let series = i0_series(15.0);
        let asym = 15f64.exp() / (2.0 * PI * 15.0).sqrt() * i0_asymptotic_factor(15.0);
        assert!(((series - asym) / series).abs() < 1e-11, "{series} vs {asym}");
        assert_relative_eq!(bessel_i0(20.0).unwrap(), i0_oracle(20.0), max_relative = 1e-12);
        assert_relative_eq!(bessel_i0(30.0).unwrap(), i0_oracle(30.0), max_relative = 1e-12);
    }

    #[test]
    fn scaled_bessel_matches_unscaled() {
        for x in [0.0f64, 2.0, 14.0, 16.0, 40.0, 300.0] {
            let direct = (-x).exp() * bessel_i0(x).unwrap();
            assert_relative_eq!(bessel_i0_scaled(x).unwrap(), direct, max_relative = 1e-13);
        }
        let big = bessel_i0_scaled(1e12).unwrap();
        assert_relative_eq!(big, 1.0 / (2.0 * PI * 1e12).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn arcsine_phi_values() {
        assert_eq!(arcsine_phi(0.0, 3.0), 1.0);
        assert_relative_eq!(arcsine_phi(2.0, 1.0), 0.465_759_607_593_640_8, max_relative = 1e-12);
        assert_eq!(arcsine_phi(4.0, 0.5), arcsine_phi(2.0, 1.0));
        assert!(arcsine_phi(-1.0, 1.0).is_nan());
        let mut prev = 1.0;
        for k in 1..40 {
            let v = arcsine_phi(0.5 * k as f64, 1.0);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn hitting_values() {
        assert_relative_eq!(hitting_density(1.0, 1.0).unwrap(), 0.241_970_724_519_143_37, max_relative = 1e-14);
        assert_relative_eq!(hitting_survival(1.0, 1.0).unwrap(), 0.682_689_492_137_085_9, max_relative = 1e-14);
        assert!(hitting_density(0.0, 1.0).is_err());
        assert!(hitting_density(1.0, -1.0).is_err());
        assert!(hitting_survival(1.0, 0.0).is_err());
    }

    #[test]
    fn hitting_density_normalizes_under_inverse_square_substitution() {
        // x = a²/y² turns f_a into the half-normal density in y
        for a in [0.3, 1.0, 2.5] {
            let win = Window::new(0.0, f64::INFINITY);
            let q = integrate(
                |p| {
                    let y = p.from_lo;
                    if y == 0.0 {
                        return 0.0;
                    }
                    let x = a * a / (y * y);
                    hitting_density(a, x).unwrap() * 2.0 * a * a / (y * y * y)
                },
                win,
                QuadOptions::default(),
            )
            .unwrap();
            assert!((q.value - 1.0).abs() < 1e-10, "a={a}: {}", q.value);
        }
    }

    #[test]
    fn densities_normalize() {
        let cases = [
            Density1D::arcsine(1.0).unwrap(),
            Density1D::arcsine(0.01).unwrap(),
            Density1D::gamma_half(1.0).unwrap(),
            Density1D::gamma_half(250.0).unwrap(),
            Density1D::hitting(1.0).unwrap(),
            Density1D::hitting(0.1).unwrap(),
            Density1D::rayleigh(1.0).unwrap(),
            Density1D::rayleigh(4.0).unwrap(),
        ];
        for d in &cases {
            let v = quad_singular(d, d.lo, d.hi).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "{d:?}: {v}");
        }
    }

    #[test]
    fn laplace_identity_by_quadrature() {
        for (c, t) in [(2.0, 1.0), (0.5, 3.0), (40.0, 2.0), (1e4, 1.0)] {
            let d = Density1D::arcsine(t).unwrap();
            let v = integrate_pair(&d, &d, 0.0, t, |x, _| x).unwrap();
            assert!((v - 1.0).abs() < 1e-9);
            let win = Window::new(0.0, t).singular(true, true).log_scale(true);
            let q = integrate(|p| (-c * p.from_lo).exp() * d.eval_at(p), win, QuadOptions::default()).unwrap();
            assert_relative_eq!(q.value, arcsine_phi(c, t), max_relative = 1e-8);
        }
    }

    #[test]
    fn partial_windows() {
        let d = Density1D::arcsine(1.0).unwrap();
        let half = quad_singular(&d, 0.0, 0.5).unwrap();
        assert!((half - 0.5).abs() < 1e-10);
        let mid = quad_singular(&d, 0.25, 0.75).unwrap();
        let exact = 2.0 / PI * (0.75f64.sqrt().asin() - 0.25f64.sqrt().asin());
        assert!((mid - exact).abs() < 1e-10);
        assert!(quad_singular(&d, 0.5, 1.5).is_err());
    }

    #[test]
    fn non_integrable_is_an_error() {
        let win = Window::new(0.0, 1.0);
        let r = integrate(|p| 1.0 / p.from_lo, win, QuadOptions::default());
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
