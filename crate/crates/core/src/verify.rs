//! Numerical checks of every quantitative ingredient of the type III
//! construction: the tilted arcsine bounds, the bridge bound, the block
//! weights, the assembled Hellinger-smallness bound, the Kakutani product and
//! the Poisson kernel and factorization identities.
//!
//! Each check returns a [`BoundReport`] with one row per grid point plus a
//! list of global criteria (slopes, ratios, identities).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::distr::OpenClosed01;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::brownian::SeedParams;
use crate::closedset::fmt17;
use crate::distance::{hellinger_block_bound, hellinger_weighted, mc_event_prob, mc_mean, tv_densities, Block, BlockDecomposition, BlockTerm, MCEstimate};
use crate::error::{invalid, Error, Result};
use crate::poisson::{
    log_unit_density, sample_poisson, unit_inner_product, MarkFunction, PoissonModel,
};
use crate::rng::{derive_seed, par_chunks};
use crate::specfun::{integrate, Density1D, QuadOptions, Window};
use crate::stats::chi_square_homogeneity;
use crate::tilt::{c_of, sample_dm_given_anchor, sample_seed, vacuum_overlap, TiltedArcsine};

/// TV constant in `‖μ_{S,c} - w_c‖ <= min{1, C₄/(cS)}`.
pub const C4: f64 = 6.0;
/// Tail constant in `μ_{T,c}(G > r) <= min{1, C₆/(cr)}`.
pub const C6: f64 = 8.0;
/// Fiber constant of the bridge bound.
pub const C9: f64 = 25.0;

/// Bridge constant `C = max(C₁..C₁₁) = C₁₁ = C₉ (s+t)/t`.
pub fn bridge_constant(s: f64, t: f64) -> f64 {
    let c10 = (s + t) / t;
    [1.0, 1.0, 2.0, C4, 7.0, C6, 9.0, C9, c10, C9 * c10].into_iter().fold(0.0, f64::max)
}

/// Stability constant `2(s+t)(1/s ∨ 1/t)`.
pub fn stability_constant(s: f64, t: f64) -> f64 {
    2.0 * (s + t) * (1.0 / s).max(1.0 / t)
}

pub const CHECK_IDS: [&str; 10] = [
    "tv-gamma",
    "tail",
    "bridge",
    "block-weights",
    "hellinger-slope",
    "kakutani",
    "overlap",
    "diam-tail",
    "poisson-kernel",
    "poisson-factorization",
];

/// Human readable statement verified by each check.
pub fn claim_of(check_id: &str) -> Option<&'static str> {
    Some(match check_id {
        "tv-gamma" => "tilted arcsine vs Gamma(1/2, c): TV <= min{1, 6/(cS)}",
        "tail" => "tilted arcsine tail: mu_{T,c}(G > r) <= min{1, 8/(cr)}",
        "bridge" => "bridge TV bound is O(u) as lambda -> 0",
        "block-weights" => "one-block weights match to second order: |p - q| = O(u^2)",
        "hellinger-slope" => "assembled Hellinger deficit bound is O(lambda^2)",
        "kakutani" => "Kakutani product prod exp(-beta a_n t/2) -> 0 for a_n = 1/n",
        "overlap" => "linear vacuum overlap: 1 - exp(-beta t/2) >= beta t/4 on (0, 2/beta]",
        "diam-tail" => "diameter tail: nu_u(dm >= u^2 | nonempty) <= u",
        "poisson-kernel" => "Poisson unit inner product = exp(-(lambda t/2)|a - b|^2)",
        "poisson-factorization" => "Poisson unit families factorize exactly under concatenation",
        _ => return None,
    })
}

/// Least squares fit of `ln y` against `ln x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl SlopeFit {
    /// Requires at least four points, strictly decreasing positive `xs` and
    /// positive `ys`.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 4 {
            return Err(invalid("slope fit needs at least four (x, y) pairs"));
        }
        if xs.windows(2).any(|w| !(w[1] < w[0])) || xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("slope fit needs strictly decreasing positive xs and positive ys"));
        }
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
        Ok(Self { xs: xs.to_vec(), ys: ys.to_vec(), slope, intercept, r2 })
    }

    /// Error unless `r² >= min_r2`.
    pub fn gated(self, min_r2: f64) -> Result<Self> {
        if self.r2 >= min_r2 {
            Ok(self)
        } else {
            Err(Error::DegenerateFit(self.r2))
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "xs": nums(&self.xs),
            "ys": nums(&self.ys),
            "slope": num(self.slope),
            "intercept": num(self.intercept),
            "r2": num(self.r2),
        })
    }
}

/// A global pass/fail condition of a check.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

impl Criterion {
    pub fn new(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Self { name: name.into(), value, pass }
    }
}

/// One check's outcome. `margin` is positive on the passing side.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub check_id: String,
    pub claim: String,
    /// How `actual` is compared to `bound`: `le`, `ge` or `approx`.
    pub relation: String,
    pub tolerance: f64,
    pub params: Vec<BTreeMap<String, f64>>,
    pub bound: Vec<f64>,
    pub actual: Vec<f64>,
    pub stderr: Vec<f64>,
    pub pass: Vec<bool>,
    pub margin: Vec<f64>,
    pub criteria: Vec<Criterion>,
    pub fits: BTreeMap<String, SlopeFit>,
    pub notes: Vec<String>,
    pub seed: Option<u64>,
    pub n: Option<u64>,
    pub wall_time_ms: u64,
}

impl BoundReport {
    pub fn new(check_id: &str, relation: &str, tolerance: f64) -> Self {
        Self {
            check_id: check_id.to_string(),
            claim: claim_of(check_id).unwrap_or("").to_string(),
            relation: relation.to_string(),
            tolerance,
            params: vec![],
            bound: vec![],
            actual: vec![],
            stderr: vec![],
            pass: vec![],
            margin: vec![],
            criteria: vec![],
            fits: BTreeMap::new(),
            notes: vec![],
            seed: None,
            n: None,
            wall_time_ms: 0,
        }
    }

    /// Add a point whose pass flag follows from `relation`.
    pub fn push(&mut self, params: &[(&str, f64)], bound: f64, actual: f64, stderr: f64) {
        let (pass, margin) = match self.relation.as_str() {
            "le" => (actual <= bound + self.tolerance, bound + self.tolerance - actual),
            "ge" => (actual >= bound - self.tolerance, actual - bound + self.tolerance),
            _ => {
                let allowed = self.tolerance.max(0.0);
                ((actual - bound).abs() <= allowed, allowed - (actual - bound).abs())
            }
        };
        self.push_with(params, bound, actual, stderr, pass && actual.is_finite(), margin);
    }

    pub fn push_with(&mut self, params: &[(&str, f64)], bound: f64, actual: f64, stderr: f64, pass: bool, margin: f64) {
        self.params.push(params.iter().map(|(k, v)| (k.to_string(), *v)).collect());
        self.bound.push(bound);
        self.actual.push(actual);
        self.stderr.push(stderr);
        self.pass.push(pass);
        self.margin.push(if margin.is_nan() { f64::NEG_INFINITY } else { margin });
    }

    /// Record a point that could not be evaluated.
    pub fn push_failure(&mut self, params: &[(&str, f64)], bound: f64, err: &Error) {
        self.notes.push(format!("point {:?}: {err}", params));
        self.push_with(params, bound, f64::NAN, 0.0, false, f64::NEG_INFINITY);
    }

    pub fn criterion(&mut self, name: impl Into<String>, value: f64, pass: bool) {
        self.criteria.push(Criterion::new(name, value, pass));
    }

    pub fn worst_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|p| *p) && self.criteria.iter().all(|c| c.pass)
    }

    /// Indices of failing points.
    pub fn failing_points(&self) -> Vec<usize> {
        self.pass.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i).collect()
    }

    pub fn to_json(&self) -> Value {
        let params: Vec<Value> = self
            .params
            .iter()
            .map(|m| Value::Object(m.iter().map(|(k, v)| (k.clone(), num(*v))).collect::<Map<_, _>>()))
            .collect();
        let criteria: Vec<Value> = self
            .criteria
            .iter()
            .map(|c| json!({"name": c.name, "value": num(c.value), "pass": c.pass}))
            .collect();
        let mut out = json!({
            "checkId": self.check_id,
            "lemmaId": self.check_id,
            "claim": self.claim,
            "relation": self.relation,
            "tolerance": num(self.tolerance),
            "params": params,
            "bound": nums(&self.bound),
            "actual": nums(&self.actual),
            "stderr": nums(&self.stderr),
            "pass": self.pass,
            "margin": nums(&self.margin),
            "worstMargin": num(self.worst_margin()),
            "criteria": criteria,
            "allPass": self.all_pass(),
            "notes": self.notes,
            "seed": self.seed,
            "n": self.n,
            "wallTimeMs": self.wall_time_ms,
        });
        if let Some(f) = self.fits.get("main") {
            out["slope"] = num(f.slope);
            out["r2"] = num(f.r2);
        }
        out["fits"] = Value::Object(self.fits.iter().map(|(k, f)| (k.clone(), f.to_json())).collect());
        out
    }

    /// Write `<check_id>.json` and `<check_id>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let json_path = dir.join(format!("{}.json", self.check_id));
        fs::write(&json_path, serde_json::to_string_pretty(&self.to_json())? + "\n")?;
        let csv_path = dir.join(format!("{}.csv", self.check_id));
        let mut w = csv::Writer::from_path(&csv_path)?;
        let keys: Vec<String> = self.params.first().map(|m| m.keys().cloned().collect()).unwrap_or_default();
        let mut header = keys.clone();
        header.extend(["bound", "actual", "stderr", "pass", "margin"].map(String::from));
        w.write_record(&header)?;
        for i in 0..self.bound.len() {
            let mut row: Vec<String> = keys.iter().map(|k| self.params[i].get(k).map_or(String::new(), |v| fmt17(*v))).collect();
            row.push(fmt17(self.bound[i]));
            row.push(fmt17(self.actual[i]));
            row.push(fmt17(self.stderr[i]));
            row.push(self.pass[i].to_string());
            row.push(fmt17(self.margin[i]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok((json_path, csv_path))
    }
}

/// JSON number with 17 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt17(x).parse().expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `{2^{-k}}` for `k` in `lo..=hi`, decreasing.
pub fn dyadic_lambdas(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| (-(k as f64)).exp2()).collect()
}

fn timed<F: FnOnce(&mut BoundReport) -> Result<()>>(mut rep: BoundReport, f: F) -> Result<BoundReport> {
    let start = Instant::now();
    f(&mut rep)?;
    rep.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// TV distance between `μ_{S,c}` and `w_c` on `(0, ∞)`; the mass of `w_c`
/// beyond `S` enters as `½ erfc(√(cS))`.
pub fn tilted_vs_gamma_tv(c: f64, s: f64) -> Result<f64> {
    let mu = TiltedArcsine::new(s, c)?;
    let w = Density1D::gamma_half(c)?;
    let inside = tv_densities(mu.density(), &w, 0.0, s)?;
    Ok(inside + 0.5 * libm::erfc((c * s).sqrt()))
}

pub fn check_tv_gamma(grid: &[(f64, f64)]) -> Result<BoundReport> {
    if grid.is_empty() {
        return Err(invalid("tv-gamma grid is empty"));
    }
    timed(BoundReport::new("tv-gamma", "le", 0.0), |rep| {
        let rows: Vec<_> = grid.par_iter().map(|&(c, s)| (c, s, tilted_vs_gamma_tv(c, s))).collect();
        for (c, s, r) in rows {
            let bound = (C4 / (c * s)).min(1.0);
            match r {
                Ok(tv) => rep.push(&[("c", c), ("S", s)], bound, tv, 0.0),
                Err(e) => rep.push_failure(&[("c", c), ("S", s)], bound, &e),
            }
        }
        Ok(())
    })
}

pub fn check_tail(grid: &[(f64, f64, f64)]) -> Result<BoundReport> {
    if grid.is_empty() {
        return Err(invalid("tail grid is empty"));
    }
    if grid.iter().any(|&(_, t, r)| !(0.0 < r && r < t)) {
        return Err(invalid("tail grid needs 0 < r < T"));
    }
    timed(BoundReport::new("tail", "le", 0.0), |rep| {
        let rows: Vec<_> = grid
            .par_iter()
            .map(|&(c, t, r)| (c, t, r, TiltedArcsine::new(t, c).and_then(|d| d.tail(r))))
            .collect();
        for (c, t, r, v) in rows {
            let bound = if c == 0.0 { 1.0 } else { (C6 / (c * r)).min(1.0) };
            let p = [("c", c), ("T", t), ("r", r)];
            match v {
                Ok(v) => rep.push(&p, bound, v, 0.0),
                Err(e) => rep.push_failure(&p, bound, &e),
            }
        }
        Ok(())
    })
}

/// Pieces of the bridge bound at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeTerms {
    pub lambda: f64,
    pub u: f64,
    pub u1: f64,
    /// `(C/u₁)∫ 1/(c(x)u) dx`.
    pub first: f64,
    /// `(C/u₁)∫ 1/(1 + c(x)(u₁ - x)) dx`.
    pub second: f64,
    pub constant: f64,
}

impl BridgeTerms {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }
}

pub fn bridge_terms(s: f64, t: f64, lambda: f64) -> Result<BridgeTerms> {
    let (u, u1) = (lambda * (s + t), lambda * s);
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("bridge bound needs 0 < λ(s+t) < 1, got {u}")));
    }
    let constant = bridge_constant(s, t);
    let win = Window::new(0.0, u1).log_scale(true);
    let opts = QuadOptions::default();
    let first = integrate(|p| 1.0 / (c_of(p.x) * u), win, opts)?.value;
    let second = integrate(|p| 1.0 / (1.0 + c_of(p.x) * p.to_hi), win, opts)?.value;
    Ok(BridgeTerms { lambda, u, u1, first: constant * first / u1, second: constant * second / u1, constant })
}

/// `(1/u₁)∫₀^{u₁} dx/(1 + c(u₁)(u₁ - x))` by quadrature and in closed form.
pub fn bridge_second_term_frozen(u1: f64) -> Result<(f64, f64)> {
    let c1 = c_of(u1);
    let q = integrate(|p| 1.0 / (1.0 + c1 * p.to_hi), Window::new(0.0, u1).log_scale(true), QuadOptions::default())?;
    let l = u1.ln().abs();
    Ok((q.value / u1, u1 / l * (l / u1).ln_1p()))
}

pub fn check_bridge(s: f64, t: f64, lambdas: &[f64]) -> Result<BoundReport> {
    timed(BoundReport::new("bridge", "le", 0.0), |rep| {
        let terms: Vec<BridgeTerms> = lambdas.iter().map(|&l| bridge_terms(s, t, l)).collect::<Result<_>>()?;
        for bt in &terms {
            // the first term is dominated by C u₁²/(3u|ln u₁|)
            let first_cap = bt.constant * bt.u1 * bt.u1 / (3.0 * bt.u * bt.u1.ln().abs());
            let second_cap = bt.constant * {
                let l = bt.u1.ln().abs();
                bt.u1 / l * (l / bt.u1).ln_1p()
            };
            rep.push(&[("lambda", bt.lambda), ("u", bt.u)], first_cap + second_cap, bt.total(), 0.0);
        }
        let us: Vec<f64> = terms.iter().map(|b| b.u).collect();
        let rhs: Vec<f64> = terms.iter().map(BridgeTerms::total).collect();
        let fit = SlopeFit::fit(&us, &rhs)?;
        rep.criterion("slope of log RHS vs log u >= 0.9", fit.slope, fit.slope >= 0.9);
        rep.criterion("r2 >= 0.95", fit.r2, fit.r2 >= 0.95);
        rep.fits.insert("main".into(), fit);
        for w in terms.windows(2) {
            let (big, small) = (&w[0], &w[1]);
            if (small.lambda - 0.5 * big.lambda).abs() <= 1e-15 * big.lambda && big.lambda <= 2f64.powi(-8) * (1.0 + 1e-12) {
                let ratio = small.total() / big.total();
                rep.criterion(format!("halving ratio at lambda={}", fmt17(small.lambda)), ratio, (0.4..=0.65).contains(&ratio));
            }
        }
        let first_over_u: Vec<f64> = terms.iter().map(|b| b.first / b.u).collect();
        let decreasing = first_over_u.windows(2).all(|w| w[1] < w[0]);
        rep.criterion("first term / u decreases as lambda decreases", first_over_u.last().copied().unwrap_or(f64::NAN), decreasing);
        let mut worst = 0.0f64;
        for bt in &terms {
            let (quad, closed) = bridge_second_term_frozen(bt.u1)?;
            worst = worst.max(((quad - closed) / closed).abs());
        }
        rep.criterion("frozen second term matches closed form (rel 1e-6)", worst, worst <= 1e-6);
        Ok(())
    })
}

/// Block weights and Hellinger bound ingredients at one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPoint {
    pub lambda: f64,
    pub u: f64,
    pub u1: f64,
    pub u2: f64,
    /// `P(G > u₁ | α <= u₁, Z ≠ ∅)` under `ν_u`.
    pub straddle: MCEstimate,
    pub blocks: BlockDecomposition,
    /// Direct frequencies of E00, E10, E01 under `ν_u`, if requested.
    pub direct: Option<[MCEstimate; 3]>,
    pub stability: f64,
    pub bridge: f64,
    /// `ln p₀₀ - ln q₀₀`.
    pub vacuum_log_gap: f64,
}

impl BlockPoint {
    pub fn diff(&self, b: Block) -> f64 {
        let t = self.blocks.get(b);
        (t.p - t.q).abs()
    }

    /// Vacuum term + `p₁₁ + q₁₁` + one-block terms with `D = stab + bridge`.
    pub fn hellinger_total(&self) -> f64 {
        self.blocks.total()
    }
}

/// Block weights of `ν_u` against `σ = ν_{u₁} ⊗ ν_{u₂}` over a λ grid.
///
/// `p₁₀` and `p₁₁` use the exact anchor law: given `Z ≠ ∅` the anchor is
/// uniform on `(0, u)`, so only the straddle probability of the last zero
/// over `u₁` is estimated by Monte Carlo, from anchors drawn on `(0, u₁)`.
/// With `direct`, plain frequencies under `ν_u` are drawn as a cross-check.
pub fn block_sweep(p: &SeedParams, s: f64, t: f64, lambdas: &[f64], n: usize, seed: u64, direct: bool) -> Result<Vec<BlockPoint>> {
    if !(s > 0.0 && t > 0.0) {
        return Err(invalid("block sweep needs s, t > 0"));
    }
    let (beta, params) = (p.beta, *p);
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let (u1, u2) = (lambda * s, lambda * t);
            let u = u1 + u2;
            if !(u < 1.0) {
                return Err(invalid(format!("block sweep needs λ(s+t) < 1, got {u}")));
            }
            let straddle = mc_event_prob(
                n,
                derive_seed(seed, 2 * k as u64),
                |r| {
                    let a = u1 * r.sample::<f64, _>(OpenClosed01);
                    a + sample_dm_given_anchor(u, a, r)
                },
                |g| *g > u1,
            )?;
            let (log_p00, log_q00) = (-beta * u, -beta * u1 + -beta * u2);
            let nonempty = -(-beta * u).exp_m1();
            let left = u1 / u * nonempty;
            let theta = straddle.value;
            let p = [
                (log_p00.exp(), 0.0),
                (left * (1.0 - theta), left * straddle.stderr),
                (u2 / u * nonempty, 0.0),
                (left * theta, left * straddle.stderr),
            ];
            let (n1, n2) = (-(-beta * u1).exp_m1(), -(-beta * u2).exp_m1());
            let (e1, e2) = ((-beta * u1).exp(), (-beta * u2).exp());
            let q = [log_q00.exp(), n1 * e2, e1 * n2, n1 * n2];
            let stability = stability_constant(s, t) * u;
            let bridge_left = bridge_terms(s, t, lambda)?.total();
            let bridge_right = bridge_terms(t, s, lambda)?.total();
            let d10 = stability + bridge_left;
            let d01 = stability + bridge_right;
            let cond = [
                hellinger_weighted(p[0].0, q[0], 1.0),
                hellinger_block_bound(p[1].0, q[1], d10),
                hellinger_block_bound(p[2].0, q[2], d01),
                p[3].0 + q[3],
            ];
            let blocks = BlockDecomposition {
                blocks: std::array::from_fn(|i| BlockTerm { p: p[i].0, q: q[i], p_stderr: p[i].1, cond_term: cond[i] }),
            };
            let direct = if direct { Some(direct_block_frequencies(&params, u, u1, n, derive_seed(seed, 2 * k as u64 + 1))?) } else { None };
            Ok(BlockPoint {
                lambda,
                u,
                u1,
                u2,
                straddle,
                blocks,
                direct,
                stability,
                bridge: bridge_left.max(bridge_right),
                vacuum_log_gap: log_p00 - log_q00,
            })
        })
        .collect()
}

/// Frequencies of E00, E10 and E01 under `ν_u` from one pass of draws.
fn direct_block_frequencies(p: &SeedParams, u: f64, u1: f64, n: usize, seed: u64) -> Result<[MCEstimate; 3]> {
    if n < 100 {
        return Err(invalid(format!("block frequencies need n >= 100, got {n}")));
    }
    let counts = par_chunks(seed, n, |r, nk| {
        let mut c = [0u64; 3];
        for _ in 0..nk {
            let z = sample_seed(p, u, r).expect("u in (0, 1)");
            match z.span {
                None => c[0] += 1,
                Some(s) if s.g_last <= u1 => c[1] += 1,
                Some(s) if s.alpha > u1 => c[2] += 1,
                Some(_) => {}
            }
        }
        c
    });
    let mut tot = [0u64; 3];
    for c in counts {
        (0..3).for_each(|i| tot[i] += c[i]);
    }
    Ok(tot.map(|h| {
        let v = h as f64 / n as f64;
        MCEstimate { value: v, stderr: (v * (1.0 - v) / n as f64).sqrt(), n: n as u64, seed }
    }))
}

/// Explicit cap on `|p - q|` for one-block events, from the anchor law and
/// the diameter tail: `|p₁₀ - pₙ u₁/u| <= pₙ (u₁ + u)` while `p₀₁ = pₙ u₂/u`
/// exactly.
pub fn block_caps(beta: f64, pt: &BlockPoint) -> (f64, f64) {
    let nonempty = -(-beta * pt.u).exp_m1();
    let q10 = pt.blocks.get(Block::E10).q;
    let q01 = pt.blocks.get(Block::E01).q;
    let cap10 = (nonempty * pt.u1 / pt.u - q10).abs() + nonempty * (pt.u1 + pt.u);
    let cap01 = (nonempty * pt.u2 / pt.u - q01).abs();
    (cap10, cap01)
}

pub fn check_block_weights(p: &SeedParams, s: f64, t: f64, lambdas: &[f64], n: usize, seed: u64) -> Result<BoundReport> {
    let sweep = block_sweep(p, s, t, lambdas, n, seed, true)?;
    block_weights_report(p, &sweep, n, seed)
}

/// Build the block-weight report from a precomputed sweep.
pub fn block_weights_report(p: &SeedParams, sweep: &[BlockPoint], n: usize, seed: u64) -> Result<BoundReport> {
    timed(BoundReport::new("block-weights", "le", 0.0), |rep| {
        rep.seed = Some(seed);
        rep.n = Some(n as u64);
        let mut worst_direct = 0.0f64;
        for pt in sweep {
            let (cap10, cap01) = block_caps(p.beta, pt);
            let se10 = pt.blocks.get(Block::E10).p_stderr;
            let d10 = pt.diff(Block::E10);
            let d01 = pt.diff(Block::E01);
            let tol = 1e-12 * pt.u;
            rep.push_with(&[("lambda", pt.lambda), ("u", pt.u), ("block", 10.0)], cap10, d10, se10, d10 <= cap10 + 5.0 * se10, cap10 + 5.0 * se10 - d10);
            rep.push_with(&[("lambda", pt.lambda), ("u", pt.u), ("block", 1.0)], cap01, d01, 0.0, d01 <= cap01 + tol, cap01 + tol - d01);
            if let Some(direct) = &pt.direct {
                for (est, b) in direct.iter().zip([Block::E00, Block::E10, Block::E01]) {
                    let term = pt.blocks.get(b);
                    let se = (est.stderr.powi(2) + term.p_stderr.powi(2)).sqrt();
                    if se > 0.0 {
                        worst_direct = worst_direct.max((est.value - term.p).abs() / se);
                    }
                }
            }
        }
        let xs: Vec<f64> = sweep.iter().map(|b| b.lambda).collect();
        let fit10 = SlopeFit::fit(&xs, &sweep.iter().map(|b| b.diff(Block::E10)).collect::<Vec<_>>())?;
        let fit01 = SlopeFit::fit(&xs, &sweep.iter().map(|b| b.diff(Block::E01)).collect::<Vec<_>>())?;
        rep.criterion("slope |p10 - q10| in [1.7, 2.5]", fit10.slope, (1.7..=2.5).contains(&fit10.slope));
        rep.criterion("slope |p01 - q01| in [1.7, 2.5]", fit01.slope, (1.7..=2.5).contains(&fit01.slope));
        rep.criterion("r2 of E10 fit >= 0.95", fit10.r2, fit10.r2 >= 0.95);
        rep.criterion("r2 of E01 fit >= 0.95", fit01.r2, fit01.r2 >= 0.95);
        let vac = sweep.iter().map(|b| b.vacuum_log_gap.abs()).fold(0.0, f64::max);
        rep.criterion("vacuum block difference is exactly 0", vac, vac == 0.0);
        if sweep.iter().any(|b| b.direct.is_some()) {
            rep.criterion("direct frequencies agree within 4 stderr", worst_direct, worst_direct <= 4.0);
        }
        let sums_ok = sweep.iter().all(|b| b.blocks.sums_consistent(4.0));
        rep.criterion("block weights sum to 1", f64::from(u8::from(sums_ok)), sums_ok);
        rep.fits.insert("main".into(), fit10);
        rep.fits.insert("E01".into(), fit01);
        // plain frequencies carry O(√(u/n)) noise that swamps O(u²) at small λ;
        // their slope is kept for reference only
        let direct10: Option<Vec<f64>> = sweep.iter().map(|b| b.direct.map(|d| (d[1].value - b.blocks.get(Block::E10).q).abs())).collect();
        if let Some(Ok(f)) = direct10.map(|ys| SlopeFit::fit(&xs, &ys)) {
            rep.fits.insert("E10-direct".into(), f);
        }
        Ok(())
    })
}

/// Slope fit of the assembled Hellinger bound plus the fitted constant
/// `C = max total/λ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct HellingerSlope {
    pub fit: SlopeFit,
    pub constant: f64,
    pub totals: Vec<f64>,
}

pub fn hellinger_slope_from_sweep(sweep: &[BlockPoint]) -> Result<HellingerSlope> {
    if sweep.len() < 5 {
        return Err(invalid("Hellinger slope needs at least five λ values"));
    }
    let xs: Vec<f64> = sweep.iter().map(|b| b.lambda).collect();
    let totals: Vec<f64> = sweep.iter().map(BlockPoint::hellinger_total).collect();
    let fit = SlopeFit::fit(&xs, &totals)?.gated(0.95)?;
    let constant = xs.iter().zip(&totals).map(|(l, v)| v / (l * l)).fold(0.0, f64::max);
    Ok(HellingerSlope { fit, constant, totals })
}

pub fn hellinger_smallness_slope(p: &SeedParams, s: f64, t: f64, lambdas: &[f64], n: usize, seed: u64) -> Result<HellingerSlope> {
    hellinger_slope_from_sweep(&block_sweep(p, s, t, lambdas, n, seed, false)?)
}

/// Report for the Hellinger bound. A second sweep with a disjoint seed checks
/// that the fitted constant is stable to 20%.
pub fn hellinger_slope_report(sweep: &[BlockPoint], other: Option<&[BlockPoint]>, n: usize, seed: u64) -> Result<BoundReport> {
    timed(BoundReport::new("hellinger-slope", "le", 0.0), |rep| {
        rep.seed = Some(seed);
        rep.n = Some(n as u64);
        let hs = hellinger_slope_from_sweep(sweep)?;
        for (pt, total) in sweep.iter().zip(&hs.totals) {
            let bound = hs.constant * pt.lambda * pt.lambda;
            let se = pt.blocks.blocks.iter().map(|b| b.p_stderr).sum::<f64>();
            rep.push(&[("lambda", pt.lambda), ("u", pt.u)], bound, *total, se);
        }
        let vac = sweep.iter().map(|b| b.blocks.get(Block::E00).cond_term).fold(0.0, f64::max);
        rep.criterion("vacuum term is exactly 0", vac, vac == 0.0);
        rep.criterion("slope of log total vs log lambda >= 1.8", hs.fit.slope, hs.fit.slope >= 1.8);
        rep.criterion("r2 >= 0.95", hs.fit.r2, hs.fit.r2 >= 0.95);
        rep.criterion("fitted constant C", hs.constant, hs.constant.is_finite());
        if let Some(o) = other {
            let c2 = hellinger_slope_from_sweep(o)?.constant;
            let rel = (c2 / hs.constant - 1.0).abs();
            rep.criterion("C stable across disjoint seeds (20%)", rel, rel <= 0.2);
        }
        rep.fits.insert("main".into(), hs.fit);
        Ok(())
    })
}

/// Dilation sequence `aₙ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dilation {
    /// `aₙ = 1/n`.
    Harmonic,
    /// `aₙ = n^{-p}` with `p ∈ (1/2, 1]`.
    Power(f64),
}

impl Dilation {
    pub fn term(&self, n: u64) -> f64 {
        match self {
            Dilation::Harmonic => 1.0 / n as f64,
            Dilation::Power(p) => (n as f64).powf(-p),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Dilation::Harmonic => Ok(()),
            Dilation::Power(p) if *p > 0.5 && *p <= 1.0 => Ok(()),
            Dilation::Power(p) => Err(invalid(format!("n^-p needs p in (1/2, 1] for a divergent sum with square-summable terms, got {p}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KakutaniResult {
    /// `∏_{n<=N} m(aₙ t)` for `N = 1..`.
    pub partial_products: Vec<f64>,
    /// `Σ_{n<=N} aₙ`.
    pub partial_sums: Vec<f64>,
    /// `Σ_{n<=N} (1 - m(aₙ t))`.
    pub divergent_sums: Vec<f64>,
}

impl KakutaniResult {
    pub fn product(&self) -> f64 {
        *self.partial_products.last().unwrap_or(&1.0)
    }

    pub fn divergent_sum(&self) -> f64 {
        *self.divergent_sums.last().unwrap_or(&0.0)
    }
}

/// Partial products of the vacuum overlaps `m(aₙ t) = e^{-β aₙ t/2}`.
pub fn kakutani_product(beta: f64, t: f64, dilation: Dilation, n_max: usize) -> Result<KakutaniResult> {
    dilation.validate()?;
    if !(beta > 0.0 && t > 0.0) {
        return Err(invalid("Kakutani product needs beta, t > 0"));
    }
    let mut out = KakutaniResult { partial_products: vec![], partial_sums: vec![], divergent_sums: vec![] };
    let (mut prod, mut sum, mut div) = (1.0, 0.0, 0.0);
    for n in 1..=n_max as u64 {
        let a = dilation.term(n);
        let m = vacuum_overlap(beta, a * t);
        prod *= m;
        sum += a;
        div += -(-0.5 * beta * a * t).exp_m1();
        out.partial_products.push(prod);
        out.partial_sums.push(sum);
        out.divergent_sums.push(div);
    }
    Ok(out)
}

/// Smallest `N` with `Σ_{n<=N} aₙ > (2/(βt)) ln(1/eps)` and the product there.
pub fn kakutani_threshold(beta: f64, t: f64, dilation: Dilation, eps: f64, n_limit: u64) -> Result<(u64, f64)> {
    dilation.validate()?;
    let target = 2.0 / (beta * t) * (1.0 / eps).ln();
    let (mut sum, mut log_prod) = (0.0, 0.0);
    for n in 1..=n_limit {
        let a = dilation.term(n);
        sum += a;
        log_prod -= 0.5 * beta * a * t;
        if sum > target {
            return Ok((n, log_prod.exp()));
        }
    }
    Err(invalid(format!("partial sums stay below {target} up to N = {n_limit}")))
}

pub fn check_kakutani(beta: f64, t: f64, dilation: Dilation, n_max: usize) -> Result<BoundReport> {
    timed(BoundReport::new("kakutani", "approx", 1e-12), |rep| {
        let k = kakutani_product(beta, t, dilation, n_max)?;
        let mut checkpoints: Vec<usize> = vec![];
        let mut n = 1;
        while n <= n_max {
            checkpoints.push(n);
            n *= 10;
        }
        if checkpoints.last() != Some(&n_max) {
            checkpoints.push(n_max);
        }
        for &n in &checkpoints {
            // independent closed form from a reverse-order sum of aₙ
            let sum: f64 = (1..=n as u64).rev().map(|j| dilation.term(j)).sum();
            let oracle = (-0.5 * beta * t * sum).exp();
            let actual = k.partial_products[n - 1];
            rep.tolerance = 1e-12;
            rep.push_with(
                &[("N", n as f64), ("divergent_sum", k.divergent_sums[n - 1])],
                oracle,
                actual,
                0.0,
                ((actual - oracle) / oracle).abs() <= 1e-12,
                1e-12 - ((actual - oracle) / oracle).abs(),
            );
        }
        let decreasing = k.partial_products.windows(2).all(|w| w[1] < w[0]);
        rep.criterion("partial products strictly decreasing", k.product(), decreasing);
        let worst = k
            .partial_products
            .iter()
            .zip(&k.partial_sums)
            .map(|(p, s)| (p.ln() + 0.5 * beta * t * s).abs())
            .fold(0.0, f64::max);
        rep.criterion("log product = -(beta t/2) partial sum to 1e-12", worst, worst <= 1e-12);
        let ds = &k.divergent_sums;
        let growing = ds.windows(2).all(|w| w[1] > w[0]);
        rep.criterion("divergence sum increasing", k.divergent_sum(), growing);
        let (nt, prod) = kakutani_threshold(beta, t, dilation, 1e-3, 100_000_000)?;
        rep.criterion(format!("product < 1e-3 at threshold N = {nt}"), prod, prod < 1e-3);
        rep.n = Some(n_max as u64);
        Ok(())
    })
}

pub fn check_linear_overlap(beta: f64, t_grid: &[f64]) -> Result<BoundReport> {
    if t_grid.iter().any(|&t| !(t > 0.0 && t <= 2.0 / beta)) {
        return Err(invalid("overlap grid must lie in (0, 2/beta]"));
    }
    timed(BoundReport::new("overlap", "ge", 0.0), |rep| {
        for &t in t_grid {
            let lhs = -(-0.5 * beta * t).exp_m1();
            rep.push(&[("beta", beta), ("t", t)], 0.25 * beta * t, lhs, 0.0);
        }
        Ok(())
    })
}

/// `ν_u(dm >= u² | Z ≠ ∅)` estimated through `ν_u(Z ≠ ∅, dm >= u²)`.
pub fn diam_tail_estimate(p: &SeedParams, u: f64, n: usize, seed: u64) -> Result<MCEstimate> {
    let joint = mc_event_prob(n, seed, |r| sample_seed(p, u, r).expect("u in (0, 1)"), |z| !z.is_empty() && z.dm() >= u * u)?;
    let nonempty = -(-p.beta * u).exp_m1();
    Ok(MCEstimate { value: joint.value / nonempty, stderr: joint.stderr / nonempty, n: joint.n, seed })
}

pub fn check_diam_tail(p: &SeedParams, u_grid: &[f64], n: usize, seed: u64) -> Result<BoundReport> {
    if u_grid.iter().any(|&u| !(u > 0.0 && u < 1.0)) {
        return Err(invalid("diameter grid must lie in (0, 1)"));
    }
    timed(BoundReport::new("diam-tail", "le", 0.0), |rep| {
        rep.seed = Some(seed);
        rep.n = Some(n as u64);
        for (k, &u) in u_grid.iter().enumerate() {
            let e = diam_tail_estimate(p, u, n, derive_seed(seed, k as u64))?;
            rep.push_with(&[("u", u)], u, e.value, e.stderr, e.value <= u + 5.0 * e.stderr, u + 5.0 * e.stderr - e.value);
        }
        Ok(())
    })
}

/// One row of the Poisson kernel table.
#[derive(Debug, Clone)]
pub struct KernelCase {
    pub id_a: String,
    pub id_b: String,
    pub model: PoissonModel,
    pub a: MarkFunction,
    pub b: MarkFunction,
    pub t: f64,
}

pub fn default_kernel_cases() -> Result<Vec<KernelCase>> {
    let mf = |v: &[f64]| MarkFunction::new(v.to_vec());
    Ok(vec![
        KernelCase { id_a: "a1".into(), id_b: "b3".into(), model: PoissonModel::unmarked(1.0)?, a: mf(&[1.0])?, b: mf(&[3.0])?, t: 1.0 },
        KernelCase {
            id_a: "a12".into(),
            id_b: "b05_15".into(),
            model: PoissonModel::new(2.0, vec![0.5, 0.5])?,
            a: mf(&[1.0, 2.0])?,
            b: mf(&[0.5, 1.5])?,
            t: 0.5,
        },
        KernelCase {
            id_a: "a05_1_15".into(),
            id_b: "one".into(),
            model: PoissonModel::new(1.5, vec![0.2, 0.3, 0.5])?,
            a: mf(&[0.5, 1.0, 1.5])?,
            b: mf(&[1.0, 1.0, 1.0])?,
            t: 2.0,
        },
    ])
}

/// Monte Carlo `E_μ[√(f_a f_b)]` under the base Poisson model.
pub fn kernel_mc(case: &KernelCase, n: usize, seed: u64) -> Result<MCEstimate> {
    mc_mean(n, seed, |r| {
        let z = sample_poisson(&case.model, case.t, r).expect("t > 0");
        let la = log_unit_density(&case.model, &case.a, case.t, &z).expect("validated");
        let lb = log_unit_density(&case.model, &case.b, case.t, &z).expect("validated");
        (0.5 * (la + lb)).exp()
    })
}

pub fn check_poisson_kernel(cases: &[KernelCase], n: usize, seed: u64) -> Result<BoundReport> {
    timed(BoundReport::new("poisson-kernel", "approx", 0.0), |rep| {
        rep.seed = Some(seed);
        rep.n = Some(n as u64);
        for (k, case) in cases.iter().enumerate() {
            let analytic = unit_inner_product(&case.model, &case.a, &case.b, case.t)?;
            let e = kernel_mc(case, n, derive_seed(seed, k as u64))?;
            let dev = (e.value - analytic).abs();
            rep.push_with(
                &[("case", k as f64), ("lambda", case.model.lambda()), ("t", case.t)],
                analytic,
                e.value,
                e.stderr,
                dev <= 3.0 * e.stderr,
                3.0 * e.stderr - dev,
            );
        }
        Ok(())
    })
}

/// Kernel table CSV: `mark-function-id-a, mark-function-id-b, t, analytic,
/// mc_estimate, mc_stderr, n`.
pub fn write_kernel_table(path: &Path, cases: &[KernelCase], rep: &BoundReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["mark-function-id-a", "mark-function-id-b", "t", "analytic", "mc_estimate", "mc_stderr", "n"])?;
    for (i, case) in cases.iter().enumerate() {
        w.write_record([
            case.id_a.clone(),
            case.id_b.clone(),
            fmt17(case.t),
            fmt17(rep.bound[i]),
            fmt17(rep.actual[i]),
            fmt17(rep.stderr[i]),
            rep.n.unwrap_or(0).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of the exact-factorization comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationResult {
    pub chi_square_p: f64,
    pub dof: usize,
    pub mean_concat: Vec<MCEstimate>,
    pub mean_direct: Vec<MCEstimate>,
}

/// Compare `ν_s^{(a)} ⊕ ν_t^{(a)}` with `ν_{s+t}^{(a)}` through total count
/// histograms (20 cells) and per-mark count means.
pub fn poisson_factorization(model: &PoissonModel, a: &MarkFunction, s: f64, t: f64, n: usize, seed: u64) -> Result<FactorizationResult> {
    let unit = model.unit_family(a)?;
    let k = unit.n_marks();
    let tally = |seed: u64, concat: bool| {
        let parts = par_chunks(seed, n, |r, nk| {
            let mut hist = vec![0u64; 20];
            let mut marks = vec![crate::distance::Moments::default(); k];
            for _ in 0..nk {
                let z = if concat {
                    let z1 = sample_poisson(&unit, s, r).expect("s > 0");
                    let z2 = sample_poisson(&unit, t, r).expect("t > 0");
                    z1.concat(&z2)
                } else {
                    sample_poisson(&unit, s + t, r).expect("s + t > 0")
                };
                hist[z.len().min(19)] += 1;
                for (m, c) in marks.iter_mut().zip(z.mark_counts(k)) {
                    m.push(c as f64);
                }
            }
            (hist, marks)
        });
        let mut hist = vec![0u64; 20];
        let mut marks = vec![crate::distance::Moments::default(); k];
        for (h, m) in parts {
            hist.iter_mut().zip(h).for_each(|(a, b)| *a += b);
            marks = marks.into_iter().zip(m).map(|(a, b)| a.merge(b)).collect();
        }
        (hist, marks.iter().map(|m| m.estimate(seed)).collect::<Vec<_>>())
    };
    let (h1, m1) = tally(derive_seed(seed, 0), true);
    let (h2, m2) = tally(derive_seed(seed, 1), false);
    let chi = chi_square_homogeneity(&h1, &h2)?;
    Ok(FactorizationResult { chi_square_p: chi.p_value, dof: chi.dof, mean_concat: m1, mean_direct: m2 })
}

pub fn check_poisson_factorization(model: &PoissonModel, a: &MarkFunction, s: f64, t: f64, n: usize, seed: u64) -> Result<BoundReport> {
    timed(BoundReport::new("poisson-factorization", "ge", 0.0), |rep| {
        rep.seed = Some(seed);
        rep.n = Some(n as u64);
        let f = poisson_factorization(model, a, s, t, n, seed)?;
        rep.push(&[("statistic", 0.0), ("mark", -1.0)], 1e-3, f.chi_square_p, 0.0);
        for (i, (x, y)) in f.mean_concat.iter().zip(&f.mean_direct).enumerate() {
            let se = (x.stderr.powi(2) + y.stderr.powi(2)).sqrt();
            let dev = (x.value - y.value).abs();
            rep.push_with(&[("statistic", 1.0), ("mark", i as f64)], 3.0 * se, dev, se, dev <= 3.0 * se, 3.0 * se - dev);
        }
        rep.criterion(format!("chi-square p > 0.001 ({} dof)", f.dof), f.chi_square_p, f.chi_square_p > 1e-3);
        Ok(())
    })
}

/// Parameters and grids for a full verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub lambdas: Vec<f64>,
    pub s: f64,
    pub t: f64,
    pub tv_c: Vec<f64>,
    pub tv_s: Vec<f64>,
    pub tail_fractions: Vec<f64>,
    pub u_grid: Vec<f64>,
    pub overlap_t: Vec<f64>,
    pub kakutani_n: usize,
    pub seed_params: SeedParams,
    pub block_n: usize,
    pub factorization_n: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            lambdas: dyadic_lambdas(4, 9),
            s: 1.0,
            t: 1.0,
            tv_c: logspace(0.1, 100.0, 7),
            tv_s: logspace(0.01, 10.0, 7),
            tail_fractions: vec![0.25, 0.5, 0.75],
            u_grid: vec![0.02, 0.05, 0.1, 0.2, 0.4],
            overlap_t: vec![1e-4, 1e-3, 0.01, 0.1, 0.5, 1.0, 1.5, 2.0],
            kakutani_n: 1000,
            seed_params: SeedParams { a: 1.0, beta: 1.0 },
            block_n: 10_000_000,
            factorization_n: 100_000,
        }
    }
}

impl Grids {
    pub fn tv_grid(&self) -> Vec<(f64, f64)> {
        self.tv_c.iter().flat_map(|&c| self.tv_s.iter().map(move |&s| (c, s))).collect()
    }

    pub fn tail_grid(&self) -> Vec<(f64, f64, f64)> {
        self.tv_c
            .iter()
            .flat_map(|&c| self.tv_s.iter().flat_map(move |&t| self.tail_fractions.iter().map(move |&f| (c, t, f * t))))
            .collect()
    }
}

/// Run one check by id. `n` is the Monte Carlo sample size of the lighter
/// checks; block sweeps use `grids.block_n`.
pub fn run_check(id: &str, grids: &Grids, n: usize, seed: u64) -> Result<BoundReport> {
    let p = grids.seed_params;
    match id {
        "tv-gamma" => check_tv_gamma(&grids.tv_grid()),
        "tail" => check_tail(&grids.tail_grid()),
        "bridge" => check_bridge(grids.s, grids.t, &grids.lambdas),
        "block-weights" => check_block_weights(&p, grids.s, grids.t, &grids.lambdas, grids.block_n, seed),
        "hellinger-slope" => {
            let a = block_sweep(&p, grids.s, grids.t, &grids.lambdas, grids.block_n, seed, false)?;
            let b = block_sweep(&p, grids.s, grids.t, &grids.lambdas, grids.block_n, derive_seed(seed, 0xB10C), false)?;
            hellinger_slope_report(&a, Some(&b), grids.block_n, seed)
        }
        "kakutani" => check_kakutani(p.beta, 1.0, Dilation::Harmonic, grids.kakutani_n),
        "overlap" => check_linear_overlap(p.beta, &grids.overlap_t.iter().map(|t| t / p.beta).collect::<Vec<_>>()),
        "diam-tail" => check_diam_tail(&p, &grids.u_grid, n, seed),
        "poisson-kernel" => check_poisson_kernel(&default_kernel_cases()?, n, seed),
        "poisson-factorization" => {
            let m = PoissonModel::new(2.0, vec![0.3, 0.7])?;
            let a = MarkFunction::new(vec![0.5, 1.5])?;
            check_poisson_factorization(&m, &a, 0.4, 0.6, grids.factorization_n, seed)
        }
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

/// Run every check, sharing one block sweep between `block-weights` and
/// `hellinger-slope`.
pub fn run_all(ids: &[String], grids: &Grids, n: usize, seed: u64) -> Vec<(String, Result<BoundReport>)> {
    let needs_sweep = ids.iter().any(|i| i == "block-weights" || i == "hellinger-slope");
    let p = grids.seed_params;
    let sweep = needs_sweep.then(|| block_sweep(&p, grids.s, grids.t, &grids.lambdas, grids.block_n, seed, true));
    ids.iter()
        .map(|id| {
            let r = match (id.as_str(), &sweep) {
                ("block-weights", Some(Ok(sw))) => block_weights_report(&p, sw, grids.block_n, seed),
                ("hellinger-slope", Some(Ok(sw))) => {
                    block_sweep(&p, grids.s, grids.t, &grids.lambdas, grids.block_n, derive_seed(seed, 0xB10C), false)
                        .and_then(|other| hellinger_slope_report(sw, Some(&other), grids.block_n, seed))
                }
                ("block-weights" | "hellinger-slope", Some(Err(e))) => Err(invalid(format!("block sweep failed: {e}"))),
                _ => run_check(id, grids, n, seed),
            };
            (id.clone(), r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(bridge_constant(1.0, 1.0), 50.0);
        assert_eq!(bridge_constant(2.0, 1.0), 75.0);
        assert_eq!(stability_constant(1.0, 1.0), 4.0);
        assert_eq!(stability_constant(1.0, 3.0), 8.0);
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let xs = dyadic_lambdas(1, 6);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let f = SlopeFit::fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(SlopeFit::fit(&xs[..3], &ys[..3]).is_err());
        let inc: Vec<f64> = xs.iter().rev().copied().collect();
        assert!(SlopeFit::fit(&inc, &ys).is_err());
        let noisy = [1.0, 0.1, 2.0, 0.05, 3.0, 0.01];
        assert!(matches!(SlopeFit::fit(&xs, &noisy).unwrap().gated(0.95), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn kakutani_values() {
        let k = kakutani_product(1.0, 1.0, Dilation::Harmonic, 1).unwrap();
        assert!((k.product() - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert!(kakutani_product(1.0, 1.0, Dilation::Power(0.4), 10).is_err());
        let (n, prod) = kakutani_threshold(1.0, 1.0, Dilation::Harmonic, 1e-3, 10_000_000).unwrap();
        assert!(prod < 1e-3);
        let h: f64 = (1..n).map(|j| 1.0 / j as f64).sum();
        assert!(h <= 2.0 * 1000f64.ln());
    }

    #[test]
    fn overlap_examples() {
        let r = check_linear_overlap(1.0, &[2.0, 1e-3]).unwrap();
        assert!(r.all_pass());
        assert!((r.actual[0] - 0.632_120_558_828_557_7).abs() < 1e-15);
        let r = check_linear_overlap(3.0, &[2.0 / 3.0]).unwrap();
        assert!(r.all_pass());
        assert!(check_linear_overlap(1.0, &[2.5]).is_err());
        let small = 1e-8f64;
        assert!(((-(-0.5 * small).exp_m1()) / (0.25 * small) - 2.0).abs() < 1e-7);
    }

    #[test]
    fn report_json_uses_seventeen_digits() {
        let mut r = BoundReport::new("overlap", "ge", 0.0);
        r.push(&[("t", 0.1)], 0.025, 0.048_770_575_499_285_99, 0.0);
        let s = serde_json::to_string(&r.to_json()).unwrap();
        assert!(s.contains("4.8770575499285991e-2"), "{s}");
        assert!(s.contains("\"lemmaId\":\"overlap\""));
    }

    #[test]
    fn unknown_check_is_reported() {
        assert!(matches!(run_check("nope", &Grids::default(), 1000, 1), Err(Error::UnknownCheck(_))));
    }
}
