//! Closed subsets of `[0, t]` stored as finite sorted interval lists, with the
//! anchor/diameter maps and the restriction, concatenation and scaling maps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Format a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedSet {
    horizon: f64,
    intervals: Vec<(f64, f64)>,
}

impl ClosedSet {
    /// Validates sortedness, disjointness and containment in `[0, horizon]`.
    pub fn new(horizon: f64, intervals: Vec<(f64, f64)>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if !(0.0 <= lo && lo <= hi && hi <= horizon) {
                return Err(invalid(format!("interval [{lo}, {hi}] outside [0, {horizon}]")));
            }
            if i > 0 && intervals[i - 1].1 >= lo {
                return Err(invalid(format!("intervals {} and {} overlap or are unsorted", i - 1, i)));
            }
        }
        Ok(Self { horizon, intervals })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(horizon, Vec::new())
    }

    /// Finite set of points, sorted and deduplicated.
    pub fn from_points(horizon: f64, points: &[f64]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Self::new(horizon, pts.into_iter().map(|x| (x, x)).collect())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Infimum of the set, 0 for the empty set.
    pub fn anchor(&self) -> f64 {
        self.intervals.first().map_or(0.0, |iv| iv.0)
    }

    /// Supremum of the set, if nonempty.
    pub fn sup(&self) -> Option<f64> {
        self.intervals.last().map(|iv| iv.1)
    }

    /// `sup - inf`, 0 for the empty set.
    pub fn diam(&self) -> f64 {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(a), Some(b)) => b.1 - a.0,
            _ => 0.0,
        }
    }

    /// `self ∪ (s + other)` on horizon `s + t`. Intervals touching at the seam
    /// are merged.
    pub fn concat(&self, other: &ClosedSet) -> ClosedSet {
        let s = self.horizon;
        let mut out = self.intervals.clone();
        let mut rest = other.intervals.iter().map(|&(lo, hi)| (lo + s, hi + s));
        if let (Some(last), Some(&(lo2, hi2))) = (out.last_mut(), other.intervals.first()) {
            if last.1 == s && lo2 == 0.0 {
                last.1 = hi2 + s;
                rest.next();
            }
        }
        out.extend(rest);
        ClosedSet { horizon: s + other.horizon, intervals: out }
    }

    /// `(Z ∩ [a, b]) - a` on horizon `b - a`. Degenerate windows are rejected.
    pub fn restrict(&self, a: f64, b: f64) -> Result<ClosedSet> {
        if !(0.0 <= a && a < b && b <= self.horizon) {
            return Err(Error::InvalidWindow { lo: a, hi: b, horizon: self.horizon });
        }
        let intervals = self
            .intervals
            .iter()
            .filter_map(|&(lo, hi)| {
                let (l, h) = (lo.max(a), hi.min(b));
                (l <= h).then_some((l - a, h - a))
            })
            .collect();
        Ok(ClosedSet { horizon: b - a, intervals })
    }

    /// Rescale every endpoint by `new_horizon / horizon`.
    pub fn scale(&self, new_horizon: f64) -> Result<ClosedSet> {
        if !(new_horizon > 0.0 && new_horizon.is_finite()) {
            return Err(invalid(format!("new horizon must be positive, got {new_horizon}")));
        }
        let f = new_horizon / self.horizon;
        let intervals = self
            .intervals
            .iter()
            .map(|&(lo, hi)| ((lo * f).min(new_horizon), (hi * f).min(new_horizon)))
            .collect();
        Ok(ClosedSet { horizon: new_horizon, intervals })
    }
}

impl fmt::Display for ClosedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={}", fmt17(self.horizon))?;
        if self.intervals.is_empty() {
            return write!(f, ";EMPTY");
        }
        for &(lo, hi) in &self.intervals {
            write!(f, ";[{},{}]", fmt17(lo), fmt17(hi))?;
        }
        Ok(())
    }
}

impl FromStr for ClosedSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("{m}: {s:?}"));
        let mut parts = s.trim().split(';');
        let head = parts.next().ok_or_else(|| bad("missing horizon"))?;
        let horizon: f64 = head
            .strip_prefix("t=")
            .ok_or_else(|| bad("expected t=<horizon>"))?
            .parse()
            .map_err(|_| bad("bad horizon"))?;
        let rest: Vec<&str> = parts.collect();
        if rest == ["EMPTY"] {
            return ClosedSet::empty(horizon);
        }
        if rest.is_empty() {
            return Err(bad("missing intervals or EMPTY"));
        }
        let intervals = rest
            .iter()
            .map(|p| {
                let inner = p
                    .strip_prefix('[')
                    .and_then(|p| p.strip_suffix(']'))
                    .ok_or_else(|| bad("expected [lo,hi]"))?;
                let (lo, hi) = inner.split_once(',').ok_or_else(|| bad("expected [lo,hi]"))?;
                let lo: f64 = lo.trim().parse().map_err(|_| bad("bad endpoint"))?;
                let hi: f64 = hi.trim().parse().map_err(|_| bad("bad endpoint"))?;
                Ok((lo, hi))
            })
            .collect::<Result<Vec<_>>>()?;
        ClosedSet::new(horizon, intervals)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub time: f64,
    pub mark: usize,
}

/// Atoms of a marked point sample on `(0, horizon) × marks`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPointSet {
    horizon: f64,
    atoms: Vec<Atom>,
}

impl MarkedPointSet {
    pub fn new(horizon: f64, atoms: Vec<Atom>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(0.0 < a.time && a.time < horizon) {
                return Err(invalid(format!("atom time {} outside (0, {horizon})", a.time)));
            }
            if i > 0 && atoms[i - 1].time >= a.time {
                return Err(invalid("atom times must be strictly increasing"));
            }
        }
        Ok(Self { horizon, atoms })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of atoms carrying each mark in `0..n_marks`.
    pub fn mark_counts(&self, n_marks: usize) -> Vec<usize> {
        let mut c = vec![0; n_marks];
        for a in &self.atoms {
            if a.mark < n_marks {
                c[a.mark] += 1;
            }
        }
        c
    }

    /// Number of atoms with time in `[a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        self.atoms.iter().filter(|x| a <= x.time && x.time <= b).count()
    }

    /// Atoms of `self` followed by those of `other` shifted by this horizon.
    pub fn concat(&self, other: &MarkedPointSet) -> MarkedPointSet {
        let s = self.horizon;
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().map(|a| Atom { time: a.time + s, mark: a.mark }));
        MarkedPointSet { horizon: s + other.horizon, atoms }
    }

    /// Time projection as a finite closed set.
    pub fn to_closed_set(&self) -> ClosedSet {
        ClosedSet {
            horizon: self.horizon,
            intervals: self.atoms.iter().map(|a| (a.time, a.time)).collect(),
        }
    }
}
