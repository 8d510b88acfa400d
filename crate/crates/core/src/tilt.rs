//! Anchor-adapted logarithmic localization of the Brownian seed, its Palm
//! uniformization and vacuum normalization, and the tilted arcsine law
//! `μ_{T,c}(dg) ∝ e^{-cg} dg / (π√(g(T-g)))`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::distr::OpenClosed01;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::brownian::{arcsine_from_uniform, BrownianZeroSummary, SeedParams, ZeroSpan};
use crate::error::{invalid, Error, Result};
use crate::specfun::{arcsine_phi, hitting_survival, integrate, log_hitting_density, Density1D, QuadOptions, Window};

/// Below this normalizer the sampler switches from arcsine proposals to the
/// Gaussian envelope.
pub const DEEP_TILT: f64 = 0.01;

/// `c(x) = |ln x| / x²`.
pub fn c_of(x: f64) -> f64 {
    x.ln().abs() / (x * x)
}

/// `exp(-c(α) dm)` for a nonempty summary, 1 for the empty set.
/// `span` is `(alpha, dm)`.
pub fn localization_weight(t: f64, span: Option<(f64, f64)>) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(invalid(format!("localization needs t in (0, 1), got {t}")));
    }
    let Some((alpha, dm)) = span else { return Ok(1.0) };
    if alpha >= 1.0 {
        return Err(invalid(format!("anchor {alpha} >= 1 leaves |ln α| undefined as a rate")));
    }
    if !(alpha > 0.0 && alpha <= t && dm >= 0.0) {
        return Err(invalid(format!("need 0 < alpha <= t and dm >= 0, got alpha={alpha}, dm={dm}")));
    }
    Ok((-c_of(alpha) * dm).exp())
}

/// `e^{-βt/2}`, the overlap of the vacuum masses.
pub fn vacuum_overlap(beta: f64, t: f64) -> f64 {
    (-0.5 * beta * t).exp()
}

/// `ln Φ_c(T)` with `Φ_c(0) = 1`.
fn log_phi(c: f64, t: f64) -> f64 {
    if t <= 0.0 || c == 0.0 {
        0.0
    } else {
        arcsine_phi(c, t).ln()
    }
}

/// Tilted arcsine law on `(0, T)`.
#[derive(Debug, Clone)]
pub struct TiltedArcsine {
    t: f64,
    c: f64,
    z: f64,
    density: Density1D,
}

impl TiltedArcsine {
    /// Normalizer computed by singular quadrature.
    pub fn new(t: f64, c: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite() && c >= 0.0 && c.is_finite()) {
            return Err(invalid(format!("tilted arcsine needs T > 0 and c >= 0, got T={t}, c={c}")));
        }
        let z = v_integral(t, c, 0.0, 1.0)?;
        let k = 1.0 / (z * PI);
        let density = Density1D::new(0.0, t, true, true, move |p| k * (-c * p.from_lo).exp() / (p.from_lo * p.to_hi).sqrt())?
            .with_log_scale(c * t > 50.0);
        Ok(Self { t, c, z, density })
    }

    pub fn horizon(&self) -> f64 {
        self.t
    }

    pub fn rate(&self) -> f64 {
        self.c
    }

    /// `Z_T(c)`.
    pub fn normalizer(&self) -> f64 {
        self.z
    }

    pub fn density(&self) -> &Density1D {
        &self.density
    }

    pub fn pdf(&self, g: f64) -> f64 {
        self.density.eval(g)
    }

    /// `μ_{T,c}(G <= g)`.
    pub fn cdf(&self, g: f64) -> Result<f64> {
        if g <= 0.0 {
            return Ok(0.0);
        }
        if g >= self.t {
            return Ok(1.0);
        }
        Ok(v_integral(self.t, self.c, 0.0, uniform_of(self.t, g))? / self.z)
    }

    /// `μ_{T,c}(G > r)`, accurate far into the tail.
    pub fn tail(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(1.0);
        }
        if r >= self.t {
            return Ok(0.0);
        }
        Ok(v_integral(self.t, self.c, uniform_of(self.t, r), 1.0)? / self.z)
    }

    /// `E[G]`.
    pub fn mean(&self) -> Result<f64> {
        let (t, c) = (self.t, self.c);
        let win = Window::new(0.0, 1.0).log_scale(c * t > 50.0);
        let q = integrate(
            |p| {
                let s = (FRAC_PI_2 * p.x).sin();
                let g = t * s * s;
                g * (-c * g).exp()
            },
            win,
            QuadOptions::default(),
        )?;
        Ok(q.value / self.z)
    }
}

/// `U` with `T sin²(πU/2) = g`.
fn uniform_of(t: f64, g: f64) -> f64 {
    (g / t).sqrt().min(1.0).asin() / FRAC_PI_2
}

/// `∫_{u0}^{u1} e^{-cT sin²(πv/2)} dv`, the arcsine expectation of `e^{-cg}`
/// over the matching range of `g = T sin²(πv/2)`.
fn v_integral(t: f64, c: f64, u0: f64, u1: f64) -> Result<f64> {
    let ct = c * t;
    let win = Window::new(u0, u1).log_scale(ct > 50.0 && u0 == 0.0);
    let q = integrate(
        |p| {
            let s = (FRAC_PI_2 * p.x).sin();
            (-ct * s * s).exp()
        },
        win,
        QuadOptions::default(),
    )?;
    Ok(q.value)
}

/// Draw from `μ_{T,c}` and report the number of proposals used.
pub fn sample_tilted_arcsine_counted<R: Rng + ?Sized>(t: f64, c: f64, rng: &mut R) -> Result<(f64, u64)> {
    if !(t > 0.0 && t.is_finite() && c >= 0.0 && c.is_finite()) {
        return Err(invalid(format!("tilted arcsine needs T > 0 and c >= 0, got T={t}, c={c}")));
    }
    let z = arcsine_phi(c, t);
    if z < 1e-12 {
        return Err(Error::DegenerateTilt(z));
    }
    Ok(draw_tilted(t, c, z, rng))
}

/// Draw from `μ_{T,c}`.
pub fn sample_tilted_arcsine<R: Rng + ?Sized>(t: f64, c: f64, rng: &mut R) -> Result<f64> {
    Ok(sample_tilted_arcsine_counted(t, c, rng)?.0)
}

/// Exact draw for any `cT`. Shallow tilts use arcsine proposals accepted with
/// probability `e^{-cg}`. Deep tilts write `g = T sin²(πU/2)`; the target
/// density of `U` is `∝ exp(-cT sin²(πU/2))`, dominated by the half-Gaussian
/// `exp(-cT U²)` since `sin(πU/2) >= U` on `[0, 1]`.
pub(crate) fn draw_tilted<R: Rng + ?Sized>(t: f64, c: f64, z: f64, rng: &mut R) -> (f64, u64) {
    let ct = c * t;
    let mut proposals = 0;
    if z >= DEEP_TILT {
        loop {
            proposals += 1;
            let g = arcsine_from_uniform(t, rng.random());
            if c == 0.0 || rng.random::<f64>() < (-c * g).exp() {
                return (g, proposals);
            }
        }
    }
    let scale = (2.0 * ct).sqrt();
    loop {
        proposals += 1;
        let n: f64 = rng.sample(StandardNormal);
        let u = n.abs() / scale;
        if u >= 1.0 {
            continue;
        }
        let s = (FRAC_PI_2 * u).sin();
        if rng.random::<f64>() < (-ct * (s * s - u * u)).exp() {
            return ((t * s * s).min(t), proposals);
        }
    }
}

/// Diameter of the seed given its anchor `alpha` on horizon `t`:
/// `dm ~ μ_{t-α, c(α)}`.
pub fn sample_dm_given_anchor<R: Rng + ?Sized>(t: f64, alpha: f64, rng: &mut R) -> f64 {
    let rest = t - alpha;
    let c = c_of(alpha);
    if rest <= 0.0 || !c.is_finite() {
        return 0.0;
    }
    draw_tilted(rest, c, arcsine_phi(c, rest), rng).0.min(rest)
}

fn check_seed_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("seed horizon must lie in (0, 1], got {t}")))
    }
}

/// One draw of the normalized seed `ν_t`: empty with probability `e^{-βt}`,
/// otherwise a uniform anchor followed by a tilted arcsine diameter.
pub fn sample_seed<R: Rng + ?Sized>(p: &SeedParams, t: f64, rng: &mut R) -> Result<BrownianZeroSummary> {
    check_seed_horizon(t)?;
    if rng.random::<f64>() < (-p.beta * t).exp() {
        return Ok(BrownianZeroSummary::empty(t));
    }
    Ok(sample_seed_nonempty(t, rng))
}

/// Draw from `ν_t( · | Z ≠ ∅)`.
pub fn sample_seed_nonempty<R: Rng + ?Sized>(t: f64, rng: &mut R) -> BrownianZeroSummary {
    let u: f64 = rng.sample(OpenClosed01);
    let alpha = t * u;
    let dm = sample_dm_given_anchor(t, alpha, rng);
    BrownianZeroSummary { horizon: t, span: Some(ZeroSpan { alpha, g_last: (alpha + dm).min(t) }) }
}

/// `ln f_t` where `f_t = dν_t / dμ_t` and `μ_t` is the law of the plain
/// Brownian summary.
pub fn log_seed_density(p: &SeedParams, t: f64, z: &BrownianZeroSummary) -> Result<f64> {
    check_seed_horizon(t)?;
    if (z.horizon - t).abs() > 1e-12 * t {
        return Err(invalid(format!("summary horizon {} differs from t = {t}", z.horizon)));
    }
    let Some(span) = z.span else {
        return Ok(-p.beta * t - hitting_survival(p.a, t)?.ln());
    };
    let alpha = span.alpha;
    if !(alpha > 0.0 && alpha <= t) {
        return Err(invalid(format!("anchor {alpha} outside (0, {t}]")));
    }
    let c = c_of(alpha);
    let dm = span.g_last - alpha;
    Ok((-(-p.beta * t).exp_m1() / t).ln() - c * dm - log_hitting_density(p.a, alpha)? - log_phi(c, t - alpha))
}

pub fn seed_density(p: &SeedParams, t: f64, z: &BrownianZeroSummary) -> Result<f64> {
    Ok(log_seed_density(p, t, z)?.exp())
}

/// Anchor law of the localized tilt and the Palm weight `h_t` that makes it
/// uniform.
#[derive(Debug, Clone, Copy)]
pub struct PalmDensity {
    pub params: SeedParams,
    pub t: f64,
    /// `Z_t = E_μ[w_t]`.
    pub normalizer: f64,
    /// Mass of the empty set under the localized tilt.
    pub empty_mass: f64,
}

impl PalmDensity {
    pub fn new(params: SeedParams, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(invalid(format!("Palm density needs t in (0, 1), got {t}")));
        }
        let survival = hitting_survival(params.a, t)?;
        let win = Window::new(0.0, t).log_scale(true);
        let body = integrate(|x| Self::log_body(&params, t, x.x).exp(), win, QuadOptions::default())?.value;
        let normalizer = survival + body;
        Ok(Self { params, t, normalizer, empty_mass: survival / normalizer })
    }

    /// `ln(f_a(x) Φ_{c(x)}(t - x))`.
    fn log_body(p: &SeedParams, t: f64, x: f64) -> f64 {
        match log_hitting_density(p.a, x) {
            Ok(lf) => lf + log_phi(c_of(x), t - x),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Density of the anchor pushforward `κ_t` on `(0, t]`.
    pub fn log_kappa(&self, x: f64) -> f64 {
        Self::log_body(&self.params, self.t, x) - self.normalizer.ln()
    }

    pub fn kappa(&self, x: f64) -> f64 {
        self.log_kappa(x).exp()
    }

    /// `ln h_t(x) = ln Z_t - ln(f_a(x) Φ_{c(x)}(t - x))`.
    pub fn log_h(&self, x: f64) -> f64 {
        -self.log_kappa(x)
    }

    pub fn h(&self, x: f64) -> f64 {
        self.log_h(x).exp()
    }

    /// `∫_0^t h dκ` by quadrature.
    pub fn h_kappa_integral(&self) -> Result<f64> {
        let win = Window::new(0.0, self.t).log_scale(true);
        let q = integrate(
            |p| {
                let lk = self.log_kappa(p.x);
                if lk == f64::NEG_INFINITY { 1.0 } else { (self.log_h(p.x) + lk).exp() }
            },
            win,
            QuadOptions::default(),
        )?;
        Ok(q.value)
    }

    /// Mass of the anchor pushforward, `1 - empty_mass` up to quadrature error.
    pub fn kappa_mass(&self) -> Result<f64> {
        let win = Window::new(0.0, self.t).log_scale(true);
        Ok(integrate(|p| self.kappa(p.x), win, QuadOptions::default())?.value)
    }

    /// `C_t = μ^loc(∅) + ∫ h dκ`.
    pub fn uniformization_constant(&self) -> Result<f64> {
        Ok(self.empty_mass + self.h_kappa_integral()?)
    }
}
