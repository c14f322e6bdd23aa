//! Scale classes of square pairs in the special frame.
//!
//! For two squares of one generation, the centers' special-frame
//! separation defines two dyadic indices: `k` grades the vertical gap
//! (`4^{-k-1} < |dy| <= 4^{-k}`) and `j` grades the slope
//! (`4^{-j-1} < |dx/dy| <= 4^{-j}`).  Both brackets are half-open below
//! so the classes partition exactly.  Pairs with `dy = 0`, slope above
//! `1/4` (`j <= 0`), slope at or below the `4^{-(n+2)}` floor, or `k < 0`
//! carry no class and land in a degenerate bucket that is excluded from
//! bound checks.

use crate::cantor::SquareSet;
use crate::error::{Error, Result};
use crate::favard::AngleGrid;
use crate::noodle::{Noodle, ShearMap};
use crate::numeric::pow4;
use crate::projection::special_angle;
use crate::rng::StreamRng;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashSet};

/// Per-worker tally: class hits plus a degenerate count.
type ClassCounts = (BTreeMap<(i32, i32), u64>, u64);

/// Class of an unordered pair of squares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairClass {
    Class { j: i32, k: i32 },
    Degenerate,
}

/// The unique `k` with `4^{-k-1} < t <= 4^{-k}`, for `t > 0`.
///
/// A logarithm gives the first guess; the exact dyadic comparisons
/// against `4^{-k}` settle boundary cases, so values like `t = 4^{-k}`
/// land on the closed upper end with no rounding surprises.
pub fn scale_index(t: f64) -> i32 {
    debug_assert!(t > 0.0 && t.is_finite());
    let mut k = (-t.log2() / 2.0).floor() as i32;
    while t > pow4(-k) {
        k -= 1;
    }
    while t <= pow4(-k - 1) {
        k += 1;
    }
    k
}

/// Special-frame unit axes: `u` along the distinguished direction,
/// `v` perpendicular to it.
fn special_axes() -> ((f64, f64), (f64, f64)) {
    let t = special_angle();
    let u = (t.cos(), t.sin());
    ((u.0, u.1), (-u.1, u.0))
}

/// Classifies a special-frame separation `(dx, dy)` at generation `n`.
fn classify_delta(dx: f64, dy: f64, n: u32) -> PairClass {
    if dy == 0.0 {
        return PairClass::Degenerate;
    }
    let ady = dy.abs();
    let slope = (dx / dy).abs();
    if slope > 0.25 {
        return PairClass::Degenerate; // j <= 0
    }
    if slope <= pow4(-(n as i32 + 2)) {
        return PairClass::Degenerate; // slope underflow, includes dx = 0
    }
    let k = scale_index(ady);
    if k < 0 {
        return PairClass::Degenerate; // vertical gap above scale 1
    }
    let j = scale_index(slope);
    debug_assert!(j >= 1);
    PairClass::Class { j, k }
}

/// Classifies two center points (standard coordinates) at generation `n`.
fn classify_points(p: crate::Point, q: crate::Point, n: u32) -> PairClass {
    let (u, v) = special_axes();
    let d = (p.0 - q.0, p.1 - q.1);
    classify_delta(d.0 * u.0 + d.1 * u.1, d.0 * v.0 + d.1 * v.1, n)
}

/// Class of a pair of squares of the same generation.
pub fn classify_pair(
    q: &crate::cantor::CantorSquare,
    q2: &crate::cantor::CantorSquare,
) -> Result<PairClass> {
    if q.generation() != q2.generation() {
        return Err(Error::validation(format!(
            "pair classification needs equal generations, got {} and {}",
            q.generation(),
            q2.generation()
        )));
    }
    Ok(classify_points(q.center(), q2.center(), q.generation()))
}

/// How a table was produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TableMode {
    Exact,
    Sampled { samples: u64, seed: u64 },
}

/// Class counts for the pairs of one generation.
///
/// Counts are stored as raw hits plus a scale factor (1 for exact
/// tables, `total/samples` for sampled ones), so conservation holds in
/// integers.  Distorted tables may count one pair under several classes
/// and are flagged `multi`; conservation does not apply to them.
#[derive(Clone, Debug)]
pub struct PairClassTable {
    n: u32,
    hits: BTreeMap<(i32, i32), u64>,
    degenerate_hits: u64,
    total_pairs: u64,
    scale: f64,
    mode: TableMode,
    multi: bool,
}

impl PairClassTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    /// True when one pair may appear under several classes (distorted
    /// tables); conservation of totals only holds when false.
    pub fn is_multi(&self) -> bool {
        self.multi
    }

    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    /// Scaled count for class `(j, k)`; 0 when the class is empty.
    pub fn count(&self, j: i32, k: i32) -> f64 {
        self.hits.get(&(j, k)).map_or(0.0, |&h| h as f64 * self.scale)
    }

    pub fn raw_hits(&self, j: i32, k: i32) -> u64 {
        self.hits.get(&(j, k)).copied().unwrap_or(0)
    }

    pub fn degenerate(&self) -> f64 {
        self.degenerate_hits as f64 * self.scale
    }

    pub fn degenerate_hits(&self) -> u64 {
        self.degenerate_hits
    }

    /// Occupied classes with scaled counts, in (j, k) order.
    pub fn classes(&self) -> impl Iterator<Item = ((i32, i32), f64)> + '_ {
        self.hits
            .iter()
            .map(|(&jk, &h)| (jk, h as f64 * self.scale))
    }

    /// Sum of raw hits over classes plus the degenerate bucket.
    pub fn total_hits(&self) -> u64 {
        self.hits.values().sum::<u64>() + self.degenerate_hits
    }

    /// Binomial standard error of a scaled count (sampled tables only).
    pub fn standard_error(&self, j: i32, k: i32) -> Option<f64> {
        match self.mode {
            TableMode::Exact => None,
            TableMode::Sampled { samples, .. } => {
                let p = self.raw_hits(j, k) as f64 / samples as f64;
                Some(self.total_pairs as f64 * (p * (1.0 - p) / samples as f64).sqrt())
            }
        }
    }
}

fn unordered_pair_count(n_squares: u64) -> u64 {
    n_squares * (n_squares - 1) / 2
}

/// Builds the class table of all (or sampled) unordered pairs.
///
/// Exact mode enumerates the full quadratic family and is capped at
/// generation 7 (about 1.3e8 pairs); beyond that, sampled mode draws
/// distinct pairs uniformly and scales counts by `total/samples`.
pub fn pair_table(ks: &SquareSet, mode: TableMode) -> Result<PairClassTable> {
    let n = ks.generation();
    let squares = ks.squares();
    let total = unordered_pair_count(squares.len() as u64);
    match mode {
        TableMode::Exact => {
            if n > 7 {
                return Err(Error::capacity(format!(
                    "exact pair enumeration is limited to generation 7 ({} pairs at generation {n}); use sampled mode",
                    total
                )));
            }
            let rows: Vec<ClassCounts> = (0..squares.len())
                .into_par_iter()
                .map(|i| {
                    let mut hits: BTreeMap<(i32, i32), u64> = BTreeMap::new();
                    let mut degen = 0u64;
                    let ci = squares[i].center();
                    for q in &squares[i + 1..] {
                        match classify_points(ci, q.center(), n) {
                            PairClass::Class { j, k } => *hits.entry((j, k)).or_insert(0) += 1,
                            PairClass::Degenerate => degen += 1,
                        }
                    }
                    (hits, degen)
                })
                .collect();
            let mut hits: BTreeMap<(i32, i32), u64> = BTreeMap::new();
            let mut degenerate_hits = 0u64;
            for (row, degen) in rows {
                for (jk, h) in row {
                    *hits.entry(jk).or_insert(0) += h;
                }
                degenerate_hits += degen;
            }
            Ok(PairClassTable {
                n,
                hits,
                degenerate_hits,
                total_pairs: total,
                scale: 1.0,
                mode,
                multi: false,
            })
        }
        TableMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::validation("sampled mode needs at least 1 pair"));
            }
            if samples > total {
                return Err(Error::validation(format!(
                    "cannot draw {samples} distinct pairs from {total}"
                )));
            }
            let m = squares.len() as u64;
            let mut seen: HashSet<u64> = HashSet::with_capacity(samples as usize);
            let mut chosen: Vec<(u32, u32)> = Vec::with_capacity(samples as usize);
            let mut attempt = 0u64;
            while chosen.len() < samples as usize {
                let mut rng = StreamRng::new(seed, attempt);
                attempt += 1;
                let a = rng.next_index(m);
                let b = rng.next_index(m);
                if a == b {
                    continue;
                }
                let (lo, hi) = (a.min(b), a.max(b));
                if seen.insert(lo * m + hi) {
                    chosen.push((lo as u32, hi as u32));
                }
            }
            let classes: Vec<PairClass> = chosen
                .par_iter()
                .map(|&(a, b)| {
                    classify_points(
                        squares[a as usize].center(),
                        squares[b as usize].center(),
                        n,
                    )
                })
                .collect();
            let mut hits: BTreeMap<(i32, i32), u64> = BTreeMap::new();
            let mut degenerate_hits = 0u64;
            for c in classes {
                match c {
                    PairClass::Class { j, k } => *hits.entry((j, k)).or_insert(0) += 1,
                    PairClass::Degenerate => degenerate_hits += 1,
                }
            }
            Ok(PairClassTable {
                n,
                hits,
                degenerate_hits,
                total_pairs: total,
                scale: total as f64 / samples as f64,
                mode,
                multi: false,
            })
        }
    }
}

/// All classes a pair attains as the shear angle runs over the grid.
///
/// The returned set contains `Degenerate` only when every grid angle
/// classifies degenerate.
pub fn distorted_classes(
    q: &crate::cantor::CantorSquare,
    q2: &crate::cantor::CantorSquare,
    g: &Noodle,
    grid: &AngleGrid,
) -> BTreeSet<PairClass> {
    let n = q.generation();
    let mut set = BTreeSet::new();
    for &theta in grid.nodes() {
        let map = ShearMap::new(*g, theta);
        set.insert(classify_points(map.apply(q.center()), map.apply(q2.center()), n));
    }
    if set.len() > 1 {
        set.remove(&PairClass::Degenerate);
    }
    set
}

/// Class table where a pair counts toward every class its sheared
/// images attain across the angle grid.
///
/// The existential over angles is approximated by the grid; the slope
/// hypothesis `sup|g'| < 1/(8n)` and spacing `<= 1/(16n)` keep any
/// missed angle within one class step, so the table is exact up to the
/// same ±1 tolerance the class comparisons use.
pub fn distorted_pair_table(ks: &SquareSet, g: &Noodle, grid: &AngleGrid) -> Result<PairClassTable> {
    let n = ks.generation();
    let lip_bound = 1.0 / (8.0 * n as f64);
    if !(g.sup_deriv() < lip_bound) {
        return Err(Error::validation(format!(
            "distorted classification requires sup|g'| < 1/(8n) = {lip_bound}, got {}",
            g.sup_deriv()
        )));
    }
    let spacing_bound = 1.0 / (16.0 * n as f64);
    if grid.weight() > spacing_bound {
        return Err(Error::validation(format!(
            "distorted classification requires grid spacing <= 1/(16n) = {spacing_bound}, got {}",
            grid.weight()
        )));
    }
    let squares = ks.squares();
    let (u, v) = special_axes();
    // special-frame coordinates of every sheared center, per angle
    let frames: Vec<Vec<(f64, f64)>> = grid
        .nodes()
        .par_iter()
        .map(|&theta| {
            let map = ShearMap::new(*g, theta);
            squares
                .iter()
                .map(|sq| {
                    let p = map.apply(sq.center());
                    (p.0 * u.0 + p.1 * u.1, p.0 * v.0 + p.1 * v.1)
                })
                .collect()
        })
        .collect();
    let rows: Vec<ClassCounts> = (0..squares.len())
        .into_par_iter()
        .map(|i| {
            let mut hits: BTreeMap<(i32, i32), u64> = BTreeMap::new();
            let mut degen = 0u64;
            let mut seen: BTreeSet<PairClass> = BTreeSet::new();
            for jdx in i + 1..squares.len() {
                seen.clear();
                for frame in &frames {
                    let (xi, yi) = frame[i];
                    let (xj, yj) = frame[jdx];
                    seen.insert(classify_delta(xi - xj, yi - yj, n));
                }
                let mut any = false;
                for c in &seen {
                    if let PairClass::Class { j, k } = c {
                        *hits.entry((*j, *k)).or_insert(0) += 1;
                        any = true;
                    }
                }
                if !any {
                    degen += 1;
                }
            }
            (hits, degen)
        })
        .collect();
    let mut hits: BTreeMap<(i32, i32), u64> = BTreeMap::new();
    let mut degenerate_hits = 0u64;
    for (row, degen) in rows {
        for (jk, h) in row {
            *hits.entry(jk).or_insert(0) += h;
        }
        degenerate_hits += degen;
    }
    Ok(PairClassTable {
        n,
        hits,
        degenerate_hits,
        total_pairs: unordered_pair_count(squares.len() as u64),
        scale: 1.0,
        mode: TableMode::Exact,
        multi: true,
    })
}

/// Normalized count ratios against the dyadic envelope.
#[derive(Clone, Debug)]
pub struct BoundRatios {
    pub ratios: BTreeMap<(i32, i32), f64>,
    pub max_ratio: f64,
}

/// `ratio(j,k) = count * 4^{k+2j-2n}`; the envelope constant of a table
/// is the maximum ratio over occupied classes.
pub fn bound_ratios(table: &PairClassTable) -> BoundRatios {
    let n = table.n() as i32;
    let mut ratios = BTreeMap::new();
    let mut max_ratio = 0.0f64;
    for ((j, k), count) in table.classes() {
        let ratio = count * pow4(k + 2 * j - 2 * n);
        max_ratio = max_ratio.max(ratio);
        ratios.insert((j, k), ratio);
    }
    BoundRatios { ratios, max_ratio }
}
