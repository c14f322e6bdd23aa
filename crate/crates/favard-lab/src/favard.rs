//! Favard-length quadrature and Buffon functionals.
//!
//! The Favard length of a set is the average over directions of its
//! projection's length.  For the circle needle of radius `r > 2`, the
//! set of drop centers whose circle meets the target is measured two
//! independent ways: geometric Monte Carlo over an annulus, and an
//! exact-in-offset polar quadrature that rides on the identity
//!
//! `chi_A((rho + r) u_theta) = chi_{S_theta}(rho)`,
//!
//! where `S_theta` is the projection of the target distorted by the
//! circle-profile shear.  For `r > 2` the far intersection branch has
//! `rho + r < 0` and is accounted by the antipodal angle, so the
//! identity is exact and the two routes are mutual oracles.

use crate::cantor::{build_generation, CantorSquare, SquareSet};
use crate::error::{Error, Result};
use crate::noodle::{sheared_projection, Noodle};
use crate::numeric::pairwise_sum;
use crate::projection::{project_square, Direction, Interval, IntervalSet, MultiplicityProfile};
use crate::rng::StreamRng;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

/// Integration domain for angle averages.
///
/// Undistorted projections are pi-periodic, so `[0, pi)` suffices and
/// the Favard normalization doubles it; anything sheared needs the full
/// turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleDomain {
    HalfTurn,
    FullTurn,
}

impl AngleDomain {
    pub fn span(&self) -> f64 {
        match self {
            AngleDomain::HalfTurn => PI,
            AngleDomain::FullTurn => TAU,
        }
    }
}

/// Uniform angle grid with equal weights.
///
/// Nodes sit at cell midpoints, strictly inside the domain.  On a
/// periodic domain the midpoint and trapezoid rules coincide, so these
/// weights are the trapezoid weights of the wrapped grid.
#[derive(Clone, Debug)]
pub struct AngleGrid {
    domain: AngleDomain,
    nodes: Vec<f64>,
    weight: f64,
}

impl AngleGrid {
    /// A grid of `m >= 16` nodes over the domain.
    pub fn new(domain: AngleDomain, m: usize) -> Result<AngleGrid> {
        if m < 16 {
            return Err(Error::validation(format!(
                "angle grid needs at least 16 nodes, got {m}"
            )));
        }
        let span = domain.span();
        let weight = span / m as f64;
        let nodes = (0..m).map(|i| (i as f64 + 0.5) * weight).collect();
        Ok(AngleGrid {
            domain,
            nodes,
            weight,
        })
    }

    pub fn domain(&self) -> AngleDomain {
        self.domain
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The common node weight `span / len`.
    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Sheared projection intervals of every square at one direction.
/// The zero noodle short-circuits to plain projections.
pub fn projection_intervals(ks: &SquareSet, g: &Noodle, d: Direction) -> Vec<Interval> {
    if g.is_zero() {
        ks.iter().map(|sq| project_square(sq, d)).collect()
    } else {
        ks.iter().map(|sq| sheared_projection(g, d, sq)).collect()
    }
}

/// Multiplicity profile of the (possibly sheared) projection at `d`.
pub fn projection_profile(ks: &SquareSet, g: &Noodle, d: Direction) -> MultiplicityProfile {
    MultiplicityProfile::from_intervals(&projection_intervals(ks, g, d))
}

/// Support of the sheared projection at `d`, as a disjoint interval set.
pub fn sheared_support(ks: &SquareSet, g: &Noodle, d: Direction) -> IntervalSet {
    IntervalSet::from_intervals(&projection_intervals(ks, g, d))
}

/// Quadrature Favard length `(1/2pi) integral of support length`.
///
/// With the zero noodle on a half-turn grid the integral is doubled
/// (projections are pi-periodic).  Distorted projections are not
/// pi-periodic; meaningful distorted values need a full-turn grid.
pub fn favard_length(ks: &SquareSet, g: &Noodle, grid: &AngleGrid) -> f64 {
    let values: Vec<f64> = grid
        .nodes()
        .par_iter()
        .map(|&t| projection_profile(ks, g, Direction::standard(t)).support_length())
        .collect();
    let mut integral = pairwise_sum(&values) * grid.weight();
    if g.is_zero() && grid.domain() == AngleDomain::HalfTurn {
        integral *= 2.0;
    }
    integral / TAU
}

/// Whether the circle of radius `r` around `z` meets some square of the
/// iterate.
///
/// The circle meets a closed connected square exactly when `r` lies in
/// `[dist_min, dist_max]`; the test walks the 4-adic tree and prunes a
/// node as soon as its bracket excludes `r`, which is sound because
/// children tighten the bracket on both sides.
pub fn circle_hit_test(z: crate::Point, r: f64, ks: &SquareSet) -> bool {
    debug_assert!(r > 0.0);
    fn descend(sq: &CantorSquare, z: crate::Point, r: f64, depth: u32) -> bool {
        if sq.dist_min(z) > r || sq.dist_max(z) < r {
            return false;
        }
        if depth == 0 {
            return true;
        }
        sq.children().iter().any(|c| descend(c, z, r, depth - 1))
    }
    descend(&CantorSquare::root(), z, r, ks.generation())
}

/// A Monte Carlo measurement with its binomial error bar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuffonEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Monte Carlo area of the drop set `{z : circle_r(z) meets K_n}`.
///
/// Samples uniformly from the annulus `r - sqrt(2) <= |z - c| <= r + sqrt(2)`
/// around the unit-square center, which contains the drop set with a
/// half-diagonal of margin.  Per-sample random streams keyed by
/// `(seed, index)` make the estimate independent of scheduling.
pub fn buffon_circle_mc(n: u32, r: f64, samples: u64, seed: u64) -> Result<BuffonEstimate> {
    if !(r > 2.0) {
        return Err(Error::validation(format!(
            "circle radius must satisfy r > 2 (the cap must cover the unit square), got {r}"
        )));
    }
    if samples < 1000 {
        return Err(Error::validation(format!(
            "buffon_circle_mc needs at least 1000 samples, got {samples}"
        )));
    }
    let ks = build_generation(n)?;
    let inner = r - std::f64::consts::SQRT_2;
    let outer = r + std::f64::consts::SQRT_2;
    let area = PI * (outer * outer - inner * inner);
    let hits: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = StreamRng::new(seed, i);
            let rho = (inner * inner + rng.next_f64() * (outer * outer - inner * inner)).sqrt();
            let phi = rng.next_in(0.0, TAU);
            let z = (0.5 + rho * phi.cos(), 0.5 + rho * phi.sin());
            u64::from(circle_hit_test(z, r, &ks))
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(BuffonEstimate {
        value: area * p,
        standard_error: area * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        seed,
    })
}

/// Polar quadrature for the same drop-set area, exact in the offset.
///
/// Per angle, the valid offsets `rho` form the sheared projection
/// support `S_theta` (circle-profile shear), and the radial integral
/// `int (rho + r) drho` over each piece `[a, b]` is
/// `r (b - a) + (b^2 - a^2) / 2` in closed form.  Only the angle
/// integral is discretized; pass a full-turn grid.
pub fn buffon_circle_quadrature(n: u32, r: f64, grid: &AngleGrid) -> Result<f64> {
    if !(r > 2.0) {
        return Err(Error::validation(format!(
            "circle radius must satisfy r > 2 (the cap must cover the unit square), got {r}"
        )));
    }
    let ks = build_generation(n)?;
    let g = Noodle::circle(r)?;
    let values: Vec<f64> = grid
        .nodes()
        .par_iter()
        .map(|&t| {
            let support = sheared_support(&ks, &g, Direction::standard(t));
            support
                .intervals()
                .iter()
                .map(|p| r * (p.hi - p.lo) + 0.5 * (p.hi * p.hi - p.lo * p.lo))
                .sum::<f64>()
        })
        .collect();
    Ok(pairwise_sum(&values) * grid.weight())
}

/// The Buffon noodle functional
/// `(1/(16 pi L)) int int |union of sheared projections ∩ (-2,2)| dtau dtheta`
/// with the profile dropped at offsets `tau` in `(-L, L)`.
///
/// The window `(-2, 2)` is intersected explicitly: a profile with large
/// sup-norm can push shadows past the window, and the normalizing
/// measure only sees the window.
pub fn buffon_noodle(
    n: u32,
    g: &Noodle,
    big_l: f64,
    tau_steps: usize,
    theta_grid: &AngleGrid,
) -> Result<f64> {
    if !(big_l > 10.0) {
        return Err(Error::validation(format!(
            "buffon_noodle needs L > 10, got {big_l}"
        )));
    }
    if tau_steps < 16 {
        return Err(Error::validation(format!(
            "buffon_noodle needs at least 16 tau steps, got {tau_steps}"
        )));
    }
    let ks = build_generation(n)?;
    let w_tau = 2.0 * big_l / tau_steps as f64;
    let cells: Vec<(usize, usize)> = (0..tau_steps)
        .flat_map(|t| (0..theta_grid.len()).map(move |a| (t, a)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(t, a)| {
            let tau = -big_l + (t as f64 + 0.5) * w_tau;
            let shifted = g.shifted(tau);
            let d = Direction::standard(theta_grid.nodes()[a]);
            sheared_support(&ks, &shifted, d).clipped_length(-2.0, 2.0)
        })
        .collect();
    Ok(pairwise_sum(&values) * w_tau * theta_grid.weight() / (16.0 * PI * big_l))
}
