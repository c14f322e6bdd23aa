//! Overlap integrals of sheared projections over the angle circle.
//!
//! For a pair of squares the overlap functional is
//! `rho = integral over [0, 2pi) of |shproj(Q) meet shproj(Q')| dtheta`.
//! The integrand vanishes except near the two directions perpendicular
//! to the segment joining the centers, so the quadrature brackets those
//! windows and refines adaptively inside them.  Normalized scores
//! `rho * 4^{2n-k}` grade the overlap against the dyadic envelope of
//! the pair's class.

use crate::cantor::{CantorSquare, SquareSet};
use crate::error::{Error, Result};
use crate::favard::projection_profile;
use crate::noodle::{sheared_projection, Noodle, NoodleKind};
use crate::numeric::{pairwise_sum, pow4};
use crate::pairs::{classify_pair, PairClass};
use crate::projection::{cone_interval, project_square, Direction};
use crate::rng::StreamRng;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;

/// Quadrature controls for the overlap integrals.
#[derive(Clone, Copy, Debug)]
pub struct RhoConfig {
    /// Base trapezoid nodes per support window.
    pub window_nodes: usize,
    /// Refinement cap: nodes per window are doubled up to this count.
    pub max_nodes: usize,
    /// Relative change between refinements that counts as converged.
    pub rel_tol: f64,
}

impl Default for RhoConfig {
    fn default() -> Self {
        RhoConfig {
            window_nodes: 256,
            max_nodes: 4096,
            rel_tol: 1e-3,
        }
    }
}

/// Result of one pair-overlap integration.
#[derive(Clone, Debug)]
pub struct OverlapResult {
    /// Address strings of the two squares.
    pub pair: (String, String),
    pub class: PairClass,
    /// The overlap integral over the full angle circle.
    pub rho: f64,
    /// Measure of the angles with positive overlap, from the final grid.
    pub theta_support: f64,
    /// Trapezoid nodes per window at the final refinement level.
    pub nodes: usize,
    /// Integration windows actually used (unclipped angle intervals).
    pub windows: Vec<(f64, f64)>,
    /// True when the windows merged into one full-circle integration.
    pub full_circle: bool,
    /// False when the refinement cap was hit before the tolerance.
    pub converged: bool,
}

/// Overlap length of the two sheared projections at one angle.
fn overlap_at(q: &CantorSquare, q2: &CantorSquare, g: &Noodle, theta: f64) -> f64 {
    let d = Direction::standard(theta);
    if g.is_zero() {
        // exact plain projections, no boundary search needed
        project_square(q, d).intersection_length(project_square(q2, d))
    } else {
        sheared_projection(g, d, q).intersection_length(sheared_projection(g, d, q2))
    }
}

/// One adaptive trapezoid pass over `[lo, hi]`.
///
/// Returns (integral, support estimate, final node count, converged).
/// A zero estimate keeps refining to the cap: the support can be much
/// narrower than the padded window, and two coarse levels agreeing on
/// zero is not evidence of convergence.
fn integrate_window<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    periodic: bool,
    cfg: &RhoConfig,
) -> (f64, f64, usize, bool) {
    let eval = |m: usize| -> (f64, f64) {
        let h = (hi - lo) / m as f64;
        let mut sum = 0.0;
        let mut positive = 0usize;
        if periodic {
            for i in 0..m {
                let v = f(lo + i as f64 * h);
                sum += v;
                if v > 0.0 {
                    positive += 1;
                }
            }
        } else {
            for i in 0..=m {
                let v = f(lo + i as f64 * h);
                sum += if i == 0 || i == m { 0.5 * v } else { v };
                if v > 0.0 {
                    positive += 1;
                }
            }
        }
        (sum * h, positive as f64 * h)
    };
    let mut m = cfg.window_nodes.max(2);
    let (mut integral, mut support) = eval(m);
    loop {
        if m >= cfg.max_nodes {
            return (integral, support, m, false);
        }
        let m2 = (m * 2).min(cfg.max_nodes);
        let (next, next_support) = eval(m2);
        let settled = (next - integral).abs() <= cfg.rel_tol * next.abs() && next > 0.0;
        integral = next;
        support = next_support;
        m = m2;
        if settled {
            return (integral, support, m, true);
        }
    }
}

/// Angle spans inside `[lo, hi]` that can carry positive overlap.
///
/// Scans the separation of the two sheared center projections at a
/// spacing of a quarter of the provable minimum support width, keeps
/// the nodes where the separation could still permit intersection, and
/// merges neighbouring hits (extended one spacing each way) into spans.
/// Every overlap stretch around a coincidence of the midlines is at
/// least four spacings wide and keeps the center separation under the
/// threshold near its coincidence, so no such stretch escapes the scan.
fn active_spans(
    dpt: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    periodic: bool,
    spacing: f64,
    threshold: f64,
) -> Vec<(f64, f64)> {
    let width = hi - lo;
    // the upper clamp only binds for profiles with enormous derivative
    // sups (circles barely wider than the cap window); those lose the
    // resolution guarantee instead of hanging
    let m = ((width / spacing).ceil() as usize).clamp(8, 4_000_000);
    let h = width / m as f64;
    let last = if periodic { m - 1 } else { m };
    let active: Vec<bool> = (0..=last)
        .map(|i| dpt(lo + i as f64 * h).abs() <= threshold)
        .collect();
    let mut spans = Vec::new();
    if periodic && active.iter().all(|&a| a) {
        spans.push((lo, hi));
        return spans;
    }
    // start runs at an inactive node so periodic runs never split
    let start = if periodic {
        active.iter().position(|&a| !a).unwrap_or(0)
    } else {
        0
    };
    let count = active.len();
    let mut run_start: Option<usize> = None;
    for step in 0..=count {
        let idx = if periodic { (start + step) % count } else { step.min(count - 1) };
        let on = step < count && active[idx];
        match (run_start, on) {
            (None, true) => run_start = Some(step),
            (Some(s), false) => {
                let a = lo + (start + s) as f64 * h - h;
                let b = lo + (start + step - 1) as f64 * h + h;
                let (a, b) = if periodic {
                    (a, b)
                } else {
                    (a.max(lo), b.min(hi))
                };
                spans.push((a, b));
                run_start = None;
            }
            _ => {}
        }
        if !periodic && step == count {
            break;
        }
    }
    spans
}

/// Overlap integral of one pair of squares.
///
/// The centers' projections coincide at the two angles perpendicular to
/// the joining segment; around each the support window has half-width
/// `asin(min(1, (sqrt2 4^-n (1 + sup|g'|) + 2 sup|g|) / d)) + 2 sup|g'|`.
/// Windows that reach half-width pi/2 would overlap their antipode, so
/// that case covers the full circle instead.  Within each window the
/// integrand is localized first (see `active_spans`); each active span
/// then gets its own adaptive quadrature, so a support far narrower
/// than the window is still resolved.  Both squares must share a
/// generation and differ.
pub fn rho_pair(
    q: &CantorSquare,
    q2: &CantorSquare,
    g: &Noodle,
    cfg: &RhoConfig,
) -> OverlapResult {
    debug_assert_eq!(q.generation(), q2.generation());
    debug_assert!(q != q2, "overlap of a square with itself");
    let n = q.generation();
    let class = classify_pair(q, q2).unwrap_or(PairClass::Degenerate);
    let (c1, c2) = (q.center(), q2.center());
    let (dx, dy) = (c2.0 - c1.0, c2.1 - c1.1);
    let dist = (dx * dx + dy * dy).sqrt();
    let side = pow4(-(n as i32));
    let sqrt2 = std::f64::consts::SQRT_2;
    let arg = (sqrt2 * side * (1.0 + g.sup_deriv()) + 2.0 * g.sup_value()) / dist;
    let half_width = if arg >= 1.0 {
        f64::INFINITY
    } else {
        arg.asin() + 2.0 * g.sup_deriv()
    };
    let f = |theta: f64| overlap_at(q, q2, g, theta);
    // separation of the sheared center projections: cheap scan probe
    let dpt = |theta: f64| -> f64 {
        let (sin, cos) = theta.sin_cos();
        let rot = |p: crate::Point| (p.0 * cos + p.1 * sin, -p.0 * sin + p.1 * cos);
        let a = rot(c1);
        let b = rot(c2);
        (a.0 - g.value(a.1)) - (b.0 - g.value(b.1))
    };
    // midlines drift at rate at most d (1 + sup g' + sqrt2 sup g''), and
    // each shadow keeps length at least side / sqrt2, so a stretch of
    // overlap around a midline coincidence spans at least `min_support`
    let drift = dist * (1.0 + g.sup_deriv() + sqrt2 * g.sup_second());
    let min_support = sqrt2 * side / drift;
    let spacing = 0.25 * min_support;
    // inside a support stretch the center separation stays below the
    // shadow sum
    let threshold = 2.0 * sqrt2 * side * (1.0 + g.sup_deriv());
    let pair_names = (q.address_string(), q2.address_string());

    let (windows, full_circle) = if !(half_width < PI / 2.0) {
        (vec![(0.0, 2.0 * PI)], true)
    } else {
        let phi = dy.atan2(dx);
        (
            vec![
                (phi + PI / 2.0 - half_width, phi + PI / 2.0 + half_width),
                (phi + 3.0 * PI / 2.0 - half_width, phi + 3.0 * PI / 2.0 + half_width),
            ],
            false,
        )
    };

    let mut rho = 0.0;
    let mut theta_support = 0.0;
    let mut nodes = 0;
    let mut converged = true;
    for &(lo, hi) in &windows {
        for (a, b) in active_spans(&dpt, lo, hi, full_circle, spacing, threshold) {
            let (part, support, m, ok) = integrate_window(&f, a, b, false, cfg);
            rho += part;
            theta_support += support;
            nodes = nodes.max(m);
            converged &= ok;
        }
    }
    OverlapResult {
        pair: pair_names,
        class,
        rho,
        theta_support: theta_support.min(2.0 * PI),
        nodes,
        windows,
        full_circle,
        converged,
    }
}

/// One surveyed pair.
#[derive(Clone, Debug)]
pub struct SurveyRow {
    pub q: String,
    pub q2: String,
    pub j: i32,
    pub k: i32,
    pub rho: f64,
    /// `rho * 4^{2n-k}`, the overlap normalized by its class envelope.
    pub score: f64,
    pub theta_support: f64,
}

/// Aggregate of a pair-sampled overlap survey.
#[derive(Clone, Debug)]
pub struct RhoSurvey {
    pub n: u32,
    pub noodle: String,
    pub rows: Vec<SurveyRow>,
    pub max_score: f64,
    /// Largest score seen in each vertical class `k`.
    pub per_k_max: BTreeMap<i32, f64>,
    /// Row counts bucketed by `floor(log2 score)`.
    pub histogram: BTreeMap<i32, u64>,
    /// Rows whose quadrature returned exactly zero.
    pub zero_scores: u64,
    /// For the circle profile: max of `theta_support * 4^{n-k}`.
    pub theta_score_max: Option<f64>,
    /// Sampled pairs that carried no class and were skipped.
    pub degenerate_skipped: u64,
    /// Random draws consumed (collisions and rejections included).
    pub attempts: u64,
}

/// Samples distinct classified pairs and scores their overlaps.
///
/// Pairs are drawn uniformly without replacement; degenerate pairs are
/// skipped (counted) and drawing stops when `sample` classified pairs
/// are found or an attempt budget of `1000 * sample` is exhausted, so
/// families with few classified pairs still terminate.
pub fn rho_bound_survey(
    ks: &SquareSet,
    g: &Noodle,
    sample: u64,
    seed: u64,
) -> Result<RhoSurvey> {
    if sample == 0 {
        return Err(Error::validation("survey needs at least 1 pair"));
    }
    let cfg = RhoConfig::default();
    let n = ks.generation();
    let squares = ks.squares();
    let m = squares.len() as u64;
    let budget = sample.saturating_mul(1000).max(100_000);
    let mut seen: HashSet<u64> = HashSet::new();
    let mut chosen: Vec<(usize, usize, i32, i32)> = Vec::with_capacity(sample as usize);
    let mut degenerate_skipped = 0u64;
    let mut attempts = 0u64;
    while (chosen.len() as u64) < sample && attempts < budget {
        let mut rng = StreamRng::new(seed, attempts);
        attempts += 1;
        let a = rng.next_index(m);
        let b = rng.next_index(m);
        if a == b {
            continue;
        }
        let (lo, hi) = (a.min(b) as usize, a.max(b) as usize);
        if !seen.insert(lo as u64 * m + hi as u64) {
            continue;
        }
        match classify_pair(&squares[lo], &squares[hi])? {
            PairClass::Class { j, k } => chosen.push((lo, hi, j, k)),
            PairClass::Degenerate => degenerate_skipped += 1,
        }
    }
    let rows: Vec<SurveyRow> = chosen
        .par_iter()
        .map(|&(a, b, j, k)| {
            let r = rho_pair(&squares[a], &squares[b], g, &cfg);
            SurveyRow {
                q: r.pair.0,
                q2: r.pair.1,
                j,
                k,
                rho: r.rho,
                score: r.rho * pow4(2 * n as i32 - k),
                theta_support: r.theta_support,
            }
        })
        .collect();
    let mut max_score = 0.0f64;
    let mut per_k_max: BTreeMap<i32, f64> = BTreeMap::new();
    let mut histogram: BTreeMap<i32, u64> = BTreeMap::new();
    let mut zero_scores = 0u64;
    let mut theta_score_max = 0.0f64;
    for row in &rows {
        max_score = max_score.max(row.score);
        let entry = per_k_max.entry(row.k).or_insert(0.0);
        *entry = entry.max(row.score);
        if row.score > 0.0 {
            *histogram.entry(row.score.log2().floor() as i32).or_insert(0) += 1;
        } else {
            zero_scores += 1;
        }
        theta_score_max = theta_score_max.max(row.theta_support * pow4(n as i32 - row.k));
    }
    let theta_score_max = match g.kind() {
        NoodleKind::Circle { .. } => Some(theta_score_max),
        _ => None,
    };
    Ok(RhoSurvey {
        n,
        noodle: g.spec_string(),
        rows,
        max_score,
        per_k_max,
        histogram,
        zero_scores,
        theta_score_max,
        degenerate_skipped,
        attempts,
    })
}

/// Tangent-line approximation of a noodle profile on a window.
#[derive(Clone, Copy, Debug)]
pub struct Linearization {
    pub y0: f64,
    /// Tangent slope `m = g'(y0)`.
    pub slope: f64,
    /// Tangent intercept, `l(y) = slope * y + intercept`.
    pub intercept: f64,
    /// `atan(slope)`.
    pub alpha: f64,
    /// Intercept of the tangent measured along its normal.
    pub b_prime: f64,
    /// Window half-width.
    pub delta: f64,
    /// Largest `|g - l|` seen by dense sampling of the window.
    pub sup_eps_sampled: f64,
    /// Largest `|g' - slope|` seen by dense sampling.
    pub sup_eps_deriv_sampled: f64,
    /// Analytic remainder bound `sup|g''| * delta^2 / 2`.
    pub sup_eps_taylor: f64,
    /// Analytic derivative-remainder bound `sup|g''| * delta`.
    pub sup_eps_deriv_taylor: f64,
}

/// Linearizes `g` at `y0` over `[y0 - delta, y0 + delta]`.
///
/// Remainders are measured twice: dense sampling at step `delta / 1000`
/// and the analytic Taylor bounds from the profile's curvature sup.
/// For the circle profile the window must stay strictly inside the
/// smooth cap region.
pub fn linearize_noodle(g: &Noodle, y0: f64, delta: f64) -> Result<Linearization> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::validation(format!(
            "linearization window must be positive, got {delta}"
        )));
    }
    if let NoodleKind::Circle { .. } = g.kind() {
        if y0 - delta <= g.shift() - 2.0 || y0 + delta >= g.shift() + 2.0 {
            return Err(Error::validation(format!(
                "window [{}, {}] touches the cap kinks at {} and {}",
                y0 - delta,
                y0 + delta,
                g.shift() - 2.0,
                g.shift() + 2.0
            )));
        }
    }
    let slope = g.deriv(y0);
    let intercept = g.value(y0) - slope * y0;
    let l = |y: f64| slope * y + intercept;
    let mut sup_eps_sampled = 0.0f64;
    let mut sup_eps_deriv_sampled = 0.0f64;
    let steps = 2000usize; // step delta/1000 across the full window
    for i in 0..=steps {
        let y = y0 - delta + (2.0 * delta) * i as f64 / steps as f64;
        sup_eps_sampled = sup_eps_sampled.max((g.value(y) - l(y)).abs());
        sup_eps_deriv_sampled = sup_eps_deriv_sampled.max((g.deriv(y) - slope).abs());
    }
    Ok(Linearization {
        y0,
        slope,
        intercept,
        alpha: slope.atan(),
        b_prime: intercept / (1.0 + slope * slope).sqrt(),
        delta,
        sup_eps_sampled,
        sup_eps_deriv_sampled,
        sup_eps_taylor: g.sup_second() * delta * delta / 2.0,
        sup_eps_deriv_taylor: g.sup_second() * delta,
    })
}

/// True when cone `j` sits in the pipeline range `3 < j < log4(n)`.
pub fn in_pipeline_range(j: u32, n: u32) -> bool {
    j > 3 && (j as f64) < (n as f64).ln() / 4.0f64.ln()
}

/// Second-moment bound chain for one slope cone.
#[derive(Clone, Copy, Debug)]
pub struct ConeSecondMoment {
    pub j: u32,
    /// Direct `int_{J_j} int f^2 dx dtheta` from multiplicity profiles.
    pub direct: f64,
    /// Diagonal part: `sum_Q int_{J_j} |shproj Q| dtheta`.
    pub diagonal: f64,
    /// `sum rho_P` over pairs in classes `j-1`, `j`, `j+1`.
    pub pair_sum: f64,
    /// `diagonal + 2 * pair_sum`, the off-diagonal-split bound.
    pub bound: f64,
    /// `direct / bound`.
    pub ratio: f64,
    pub pairs_counted: u64,
    pub in_pipeline: bool,
}

/// Computes the cone second moment directly and via the pair split.
///
/// The direct integral uses midpoint quadrature with `theta_nodes`
/// nodes over the cone.  The pair side enumerates all pairs (so the
/// generation is capped like exact pair tables) and sums overlaps over
/// the classes one step around `j`.
pub fn cone_second_moment(
    ks: &SquareSet,
    g: &Noodle,
    j: u32,
    theta_nodes: usize,
) -> Result<ConeSecondMoment> {
    debug_assert!(j >= 1);
    let n = ks.generation();
    if n > 7 {
        return Err(Error::capacity(format!(
            "cone second moment enumerates all pairs and is limited to generation 7, got {n}"
        )));
    }
    if theta_nodes == 0 {
        return Err(Error::validation("cone quadrature needs at least 1 node"));
    }
    let cone = cone_interval(j as i32);
    let h = cone.len() / theta_nodes as f64;
    let moments: Vec<(f64, f64)> = (0..theta_nodes)
        .into_par_iter()
        .map(|i| {
            let phi = cone.lo + (i as f64 + 0.5) * h;
            let profile = projection_profile(ks, g, Direction::special(phi));
            (profile.second_moment(), profile.mass())
        })
        .collect();
    let direct = pairwise_sum(&moments.iter().map(|m| m.0).collect::<Vec<_>>()) * h;
    let diagonal = pairwise_sum(&moments.iter().map(|m| m.1).collect::<Vec<_>>()) * h;

    let squares = ks.squares();
    let cfg = RhoConfig::default();
    let mut in_band: Vec<(usize, usize)> = Vec::new();
    for a in 0..squares.len() {
        for b in a + 1..squares.len() {
            if let Ok(PairClass::Class { j: pj, .. }) = classify_pair(&squares[a], &squares[b]) {
                if (pj - j as i32).abs() <= 1 {
                    in_band.push((a, b));
                }
            }
        }
    }
    let rhos: Vec<f64> = in_band
        .par_iter()
        .map(|&(a, b)| rho_pair(&squares[a], &squares[b], g, &cfg).rho)
        .collect();
    let pair_sum = pairwise_sum(&rhos);
    let bound = diagonal + 2.0 * pair_sum;
    Ok(ConeSecondMoment {
        j,
        direct,
        diagonal,
        pair_sum,
        bound,
        ratio: if bound > 0.0 { direct / bound } else { 0.0 },
        pairs_counted: in_band.len() as u64,
        in_pipeline: in_pipeline_range(j, n),
    })
}

/// Exact all-pairs survey used to pin calibration fixtures.
///
/// Returns the max normalized score over every classified pair of the
/// generation; quadratic in the square count, so keep `n` small.
pub fn exact_max_score(ks: &SquareSet, g: &Noodle, cfg: &RhoConfig) -> f64 {
    let n = ks.generation() as i32;
    let squares = ks.squares();
    let pairs: Vec<(usize, usize, i32)> = (0..squares.len())
        .flat_map(|a| (a + 1..squares.len()).map(move |b| (a, b)))
        .filter_map(|(a, b)| match classify_pair(&squares[a], &squares[b]) {
            Ok(PairClass::Class { k, .. }) => Some((a, b, k)),
            _ => None,
        })
        .collect();
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b, k)| rho_pair(&squares[a], &squares[b], g, cfg).rho * pow4(2 * n - k))
        .collect();
    scores.iter().fold(0.0f64, |m, &s| m.max(s))
}
