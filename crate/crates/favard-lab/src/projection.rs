//! Line projections, interval bookkeeping, and multiplicity profiles.
//!
//! Projection direction can be given in two frames.  The standard frame
//! measures the angle from the positive x-axis.  The special frame is
//! rotated by `atan(1/2)`: at special angle zero the projection of any
//! Cantor iterate tiles a single interval with multiplicity one, which
//! makes that frame the natural coordinate system for cone decompositions
//! and pair classes.

use crate::cantor::CantorSquare;
use crate::Point;

/// Angle of the distinguished direction `(2, 1) / sqrt(5)`.
pub fn special_angle() -> f64 {
    0.5f64.atan()
}

/// Frame in which a direction's angle is expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Standard,
    Special,
}

/// A direction on the line of projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    angle: f64,
    frame: Frame,
}

impl Direction {
    pub fn standard(angle: f64) -> Self {
        Direction {
            angle,
            frame: Frame::Standard,
        }
    }

    pub fn special(angle: f64) -> Self {
        Direction {
            angle,
            frame: Frame::Special,
        }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// The angle as given, in the direction's own frame.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Angle from the positive x-axis.
    pub fn standard_angle(&self) -> f64 {
        match self.frame {
            Frame::Standard => self.angle,
            Frame::Special => self.angle + special_angle(),
        }
    }

    /// Angle relative to the distinguished direction.
    pub fn special_frame_angle(&self) -> f64 {
        match self.frame {
            Frame::Standard => self.angle - special_angle(),
            Frame::Special => self.angle,
        }
    }

    /// Unit vector of the direction.
    pub fn unit(&self) -> Point {
        let t = self.standard_angle();
        (t.cos(), t.sin())
    }
}

/// A closed interval on the projection line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// Length of the overlap with `other`; zero when disjoint.
    pub fn intersection_length(&self, other: Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }
}

/// Scalar projection of a point onto the direction.
pub fn project_point(p: Point, d: Direction) -> f64 {
    let (ux, uy) = d.unit();
    p.0 * ux + p.1 * uy
}

/// Projection of a square onto the direction, as an interval.
///
/// For an axis-aligned square the extreme projections are corners, so
/// the shadow is the center projection plus or minus
/// `side/2 * (|cos| + |sin|)`.
pub fn project_square(sq: &CantorSquare, d: Direction) -> Interval {
    let (ux, uy) = d.unit();
    let (cx, cy) = sq.center();
    let mid = cx * ux + cy * uy;
    let half = 0.5 * sq.side() * (ux.abs() + uy.abs());
    Interval::new(mid - half, mid + half)
}

/// A finite union of disjoint intervals, kept sorted.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    /// Normalizes arbitrary intervals: sort, drop empties, merge anything
    /// overlapping or touching.  The stored intervals then satisfy
    /// `hi_i < lo_{i+1}` strictly.
    pub fn from_intervals(intervals: &[Interval]) -> Self {
        let mut v: Vec<Interval> = intervals.iter().copied().filter(|i| !i.is_empty()).collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::new();
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|i| i.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.lo <= x && x <= i.hi)
    }

    /// Measure of the part inside `[lo, hi]`.
    pub fn clipped_length(&self, lo: f64, hi: f64) -> f64 {
        let window = Interval::new(lo, hi);
        self.intervals
            .iter()
            .map(|i| i.intersection_length(window))
            .sum()
    }
}

/// Piecewise-constant multiplicity of a family of intervals.
///
/// Built by a sweep over the endpoints.  Pieces are half-open
/// `[breaks[i], breaks[i+1])`; interior pieces may carry count zero
/// (gaps between support components), but leading and trailing zero
/// pieces are trimmed and adjacent pieces with equal count are merged.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MultiplicityProfile {
    breaks: Vec<f64>,
    counts: Vec<u32>,
}

impl MultiplicityProfile {
    pub fn from_intervals(intervals: &[Interval]) -> Self {
        // Sweep events: +1 at each lo, -1 at each hi.  At equal
        // coordinates closings are applied before openings, so a piece
        // starting at x counts exactly the intervals with lo <= x < hi;
        // touching intervals never produce a spurious double-count and
        // the running count stays nonnegative on every piece.
        let mut events: Vec<(f64, i32)> = Vec::with_capacity(intervals.len() * 2);
        for iv in intervals {
            if iv.is_empty() {
                continue;
            }
            events.push((iv.lo, 1));
            events.push((iv.hi, -1));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut breaks: Vec<f64> = Vec::new();
        let mut counts: Vec<u32> = Vec::new();
        let mut count: i32 = 0;
        let mut prev: Option<f64> = None;
        for (x, delta) in events {
            if let Some(p) = prev {
                if x > p {
                    debug_assert!(count >= 0);
                    // extend or open a piece [p, x) at the current count
                    if counts.last() == Some(&(count as u32)) {
                        *breaks.last_mut().unwrap() = x;
                    } else {
                        if breaks.is_empty() {
                            breaks.push(p);
                        }
                        breaks.push(x);
                        counts.push(count as u32);
                    }
                }
            }
            count += delta;
            prev = Some(x);
        }
        debug_assert_eq!(count, 0);

        // trim zero-count pieces at both ends
        while counts.first() == Some(&0) {
            counts.remove(0);
            breaks.remove(0);
        }
        while counts.last() == Some(&0) {
            counts.pop();
            breaks.pop();
        }
        if counts.is_empty() {
            breaks.clear();
        }
        MultiplicityProfile { breaks, counts }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Pieces as `(interval, count)` pairs, in increasing order.
    pub fn pieces(&self) -> impl Iterator<Item = (Interval, u32)> + '_ {
        self.breaks
            .windows(2)
            .zip(self.counts.iter())
            .map(|(w, &c)| (Interval::new(w[0], w[1]), c))
    }

    /// Integral of `count(x)^p` over the support.  `p = 0` gives the
    /// support length, `p = 1` the total mass (sum of input lengths),
    /// `p = 2` the self-overlap second moment.
    pub fn moment(&self, p: u32) -> f64 {
        self.pieces()
            .filter(|&(_, c)| c > 0)
            .map(|(iv, c)| iv.len() * (c as f64).powi(p as i32))
            .sum()
    }

    /// Measure of the set where at least one interval covers.
    pub fn support_length(&self) -> f64 {
        self.moment(0)
    }

    /// Sum of the lengths of the input intervals.
    pub fn mass(&self) -> f64 {
        self.moment(1)
    }

    pub fn second_moment(&self) -> f64 {
        self.moment(2)
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// The support as a disjoint interval union.
    pub fn support(&self) -> IntervalSet {
        let positive: Vec<Interval> = self
            .pieces()
            .filter(|&(_, c)| c > 0)
            .map(|(iv, _)| iv)
            .collect();
        IntervalSet::from_intervals(&positive)
    }
}

/// Special-frame angle window of the `j`-th slope cone: directions whose
/// special-frame tangent lies in `(4^-j, 4^-(j-1)]`.
pub fn cone_interval(j: i32) -> Interval {
    let lo = crate::numeric::pow4(-j).atan();
    let hi = crate::numeric::pow4(-j + 1).atan();
    Interval::new(lo, hi)
}
