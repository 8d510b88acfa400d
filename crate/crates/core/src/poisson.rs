//! Marked Poisson random sets on `(0, t) × L` with a finite mark space:
//! sampling, void probabilities, unit densities, the covariance kernel, the
//! index Gram matrix and the two-rate Cox mixture.

use nalgebra::DMatrix;
use rand::distr::{weighted::WeightedIndex, Distribution, Open01};
use rand::Rng;

use crate::closedset::{Atom, MarkedPointSet};
use crate::error::{invalid, Result};

/// Intensity `λ · Leb ⊗ η` with `η` a probability vector over marks `0..k`.
#[derive(Debug, Clone)]
pub struct PoissonModel {
    lambda: f64,
    weights: Vec<f64>,
    picker: WeightedIndex<f64>,
}

impl PoissonModel {
    pub fn new(lambda: f64, weights: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("lambda must be positive, got {lambda}")));
        }
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(invalid("mark weights must be a nonempty list of nonnegative numbers"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("mark weights sum to {total}, expected 1")));
        }
        let picker = WeightedIndex::new(&weights).map_err(|e| invalid(e.to_string()))?;
        Ok(Self { lambda, weights, picker })
    }

    /// Single-mark model.
    pub fn unmarked(lambda: f64) -> Result<Self> {
        Self::new(lambda, vec![1.0])
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_marks(&self) -> usize {
        self.weights.len()
    }

    /// `⟨a, b⟩ = Σ η(ℓ) a(ℓ) b(ℓ)`.
    pub fn inner(&self, a: &MarkFunction, b: &MarkFunction) -> f64 {
        self.weights.iter().zip(&a.values).zip(&b.values).map(|((w, x), y)| w * x * y).sum()
    }

    pub fn norm_sq(&self, a: &MarkFunction) -> f64 {
        self.inner(a, a)
    }

    fn check(&self, a: &MarkFunction) -> Result<()> {
        if a.values.len() == self.n_marks() {
            Ok(())
        } else {
            Err(invalid(format!("mark function has {} values, model has {} marks", a.values.len(), self.n_marks())))
        }
    }

    /// Model of the unit family `ν^{(a)}`: rate `λ‖a‖²`, mark weights
    /// proportional to `η a²`.
    pub fn unit_family(&self, a: &MarkFunction) -> Result<PoissonModel> {
        self.check(a)?;
        let n2 = self.norm_sq(a);
        if !(n2 > 0.0) {
            return Err(invalid("unit family of a zero mark function is the point mass at the empty set"));
        }
        let weights = self.weights.iter().zip(&a.values).map(|(w, x)| w * x * x / n2).collect();
        PoissonModel::new(self.lambda * n2, weights)
    }
}

/// Nonnegative function on the mark space.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkFunction {
    values: Vec<f64>,
}

impl MarkFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("mark function values must be finite and nonnegative"));
        }
        Ok(Self { values })
    }

    pub fn constant(c: f64, n_marks: usize) -> Result<Self> {
        Self::new(vec![c; n_marks])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Poisson variate: sequential inversion for `mean <= 30`, Hörmann's PTRS
/// transformed rejection above.
pub fn sample_poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean <= 30.0 {
        let u: f64 = rng.random();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u > cdf && p > 0.0 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        return k;
    }
    let smu = mean.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let log_mean = mean.ln();
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= -mean + k * log_mean - libm::lgamma(k + 1.0) {
            return k as u64;
        }
    }
}

/// One draw of the marked Poisson process on `(0, t)`.
pub fn sample_poisson<R: Rng + ?Sized>(m: &PoissonModel, t: f64, rng: &mut R) -> Result<MarkedPointSet> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {t}")));
    }
    let n = sample_poisson_count(m.lambda * t, rng) as usize;
    loop {
        let mut times: Vec<f64> = (0..n).map(|_| t * rng.sample::<f64, _>(Open01)).collect();
        times.sort_by(f64::total_cmp);
        if times.windows(2).any(|w| w[0] >= w[1]) || times.last().is_some_and(|&x| x >= t) {
            continue;
        }
        let atoms = times.into_iter().map(|time| Atom { time, mark: m.picker.sample(rng) }).collect();
        return MarkedPointSet::new(t, atoms);
    }
}

/// `exp(-λ t |I| η(G))`.
pub fn void_probability(m: &PoissonModel, t: f64, interval_len: f64, mark_weight: f64) -> Result<f64> {
    if !(t > 0.0) || !(0.0..=t).contains(&interval_len) || !(0.0..=1.0).contains(&mark_weight) {
        return Err(invalid(format!(
            "void probability needs t > 0, 0 <= |I| <= t, 0 <= η(G) <= 1; got t={t}, |I|={interval_len}, η(G)={mark_weight}"
        )));
    }
    Ok((-m.lambda * t * interval_len * mark_weight).exp())
}

/// `exp(λt(1 - ‖a‖²)) ∏ a(ℓ)²`, the density of `ν_t^{(a)}` against the model.
pub fn unit_density(m: &PoissonModel, a: &MarkFunction, t: f64, z: &MarkedPointSet) -> Result<f64> {
    Ok(log_unit_density(m, a, t, z)?.exp())
}

pub fn log_unit_density(m: &PoissonModel, a: &MarkFunction, t: f64, z: &MarkedPointSet) -> Result<f64> {
    m.check(a)?;
    let mut log = m.lambda * t * (1.0 - m.norm_sq(a));
    for atom in z.atoms() {
        let v = *a.values.get(atom.mark).ok_or_else(|| invalid(format!("mark {} out of range", atom.mark)))?;
        log += 2.0 * v.ln();
    }
    Ok(log)
}

/// `exp(-(λt/2) ‖a - b‖²)`.
pub fn unit_inner_product(m: &PoissonModel, a: &MarkFunction, b: &MarkFunction, t: f64) -> Result<f64> {
    m.check(a)?;
    m.check(b)?;
    let d: f64 = m.weights.iter().zip(&a.values).zip(&b.values).map(|((w, x), y)| w * (x - y) * (x - y)).sum();
    Ok((-0.5 * m.lambda * t * d).exp())
}

/// `λ(⟨a, b⟩ - ½‖a‖² - ½‖b‖²)`.
pub fn covariance_kernel(m: &PoissonModel, a: &MarkFunction, b: &MarkFunction) -> Result<f64> {
    m.check(a)?;
    m.check(b)?;
    Ok(m.lambda * (m.inner(a, b) - 0.5 * m.norm_sq(a) - 0.5 * m.norm_sq(b)))
}

/// `G_ij = λ ⟨a_i - 1, a_j - 1⟩`.
pub fn index_gram(m: &PoissonModel, fns: &[MarkFunction]) -> Result<DMatrix<f64>> {
    if fns.is_empty() {
        return Err(invalid("index Gram needs at least one function"));
    }
    for f in fns {
        m.check(f)?;
    }
    let centered: Vec<Vec<f64>> = fns.iter().map(|f| f.values.iter().map(|v| v - 1.0).collect()).collect();
    Ok(DMatrix::from_fn(fns.len(), fns.len(), |i, j| {
        m.lambda * m.weights.iter().zip(&centered[i]).zip(&centered[j]).map(|((w, x), y)| w * x * y).sum::<f64>()
    }))
}

/// Density `½ + ½ e^{-λt} 2^n` of the mixture `½P_λ + ½P_{2λ}` against `P_λ`.
pub fn cox_density(lambda: f64, t: f64, n: u64) -> f64 {
    log_cox_density(lambda, t, n).exp()
}

pub fn log_cox_density(lambda: f64, t: f64, n: u64) -> f64 {
    let x = n as f64 * std::f64::consts::LN_2 - lambda * t;
    let softplus = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    softplus - std::f64::consts::LN_2
}

/// Concatenation cocycle of the Cox mixture.
pub fn cox_delta(lambda: f64, s: f64, t: f64, n1: u64, n2: u64) -> f64 {
    (log_cox_density(lambda, s, n1) + log_cox_density(lambda, t, n2) - log_cox_density(lambda, s + t, n1 + n2)).exp()
}

/// One draw of the mixture `½P_λ + ½P_{2λ}`.
pub fn sample_cox<R: Rng + ?Sized>(m: &PoissonModel, t: f64, rng: &mut R) -> Result<MarkedPointSet> {
    if rng.random::<bool>() {
        sample_poisson(m, t, rng)
    } else {
        let doubled = PoissonModel::new(2.0 * m.lambda, m.weights.clone())?;
        sample_poisson(&doubled, t, rng)
    }
}
