//! The four-corner (middle-half) Cantor construction.
//!
//! Generation zero is the closed unit square.  Each refinement replaces a
//! square of side `s` with the four corner squares of side `s/4`, one in
//! each corner, so generation `n` consists of `4^n` squares of side
//! `4^-n`.  Squares carry a 4-adic address: digit `d = 2*dy + dx` picks
//! the corner at offset `(dx, dy) * (3/4) * s` inside the parent.
//!
//! Addresses are packed two bits per level, first level in the highest
//! bits, so for squares of one generation the packed key is strictly
//! increasing in build order and coincides with the Z-order (Morton)
//! traversal of the corners, y-major within each level.

use crate::error::{Error, Result};
use crate::Point;

/// Hard cap on the generation we will materialize: `4^12` squares is
/// about half a gigabyte of geometry, the last size that fits the
/// "a few gigabytes" budget with room for downstream buffers.
pub const MAX_GENERATION: u32 = 12;

/// One square of a Cantor iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CantorSquare {
    /// Packed address, two bits per level, first level most significant.
    bits: u32,
    generation: u8,
    x0: f64,
    y0: f64,
    side: f64,
}

impl CantorSquare {
    /// The unit square, root of the construction.
    pub fn root() -> Self {
        CantorSquare {
            bits: 0,
            generation: 0,
            x0: 0.0,
            y0: 0.0,
            side: 1.0,
        }
    }

    pub fn generation(&self) -> u32 {
        self.generation as u32
    }

    /// Lower-left corner.
    pub fn anchor(&self) -> Point {
        (self.x0, self.y0)
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn center(&self) -> Point {
        (self.x0 + 0.5 * self.side, self.y0 + 0.5 * self.side)
    }

    /// Corners in counterclockwise order starting at the anchor.
    pub fn corners(&self) -> [Point; 4] {
        let s = self.side;
        [
            (self.x0, self.y0),
            (self.x0 + s, self.y0),
            (self.x0 + s, self.y0 + s),
            (self.x0, self.y0 + s),
        ]
    }

    /// Address digit at `level` (0-based from the coarsest refinement).
    pub fn digit(&self, level: u32) -> u8 {
        debug_assert!(level < self.generation as u32);
        ((self.bits >> (2 * (self.generation as u32 - 1 - level))) & 3) as u8
    }

    /// Address digit split into `(dx, dy)` corner selectors.
    pub fn digit_pair(&self, level: u32) -> (u8, u8) {
        let d = self.digit(level);
        (d & 1, d >> 1)
    }

    /// Packed address key; within one generation, ordering by this key
    /// is the canonical address order.
    pub fn address_key(&self) -> u32 {
        self.bits
    }

    /// Address digits as a string, e.g. `"132"`; empty for the root.
    pub fn address_string(&self) -> String {
        (0..self.generation as u32)
            .map(|l| char::from(b'0' + self.digit(l)))
            .collect()
    }

    /// The four children, in digit order 0..=3.
    pub fn children(&self) -> [CantorSquare; 4] {
        debug_assert!((self.generation as u32) < 16, "address bits exhausted");
        let s = self.side * 0.25;
        let off = self.side * 0.75;
        let mut out = [*self; 4];
        for d in 0..4u32 {
            let dx = (d & 1) as f64;
            let dy = (d >> 1) as f64;
            out[d as usize] = CantorSquare {
                bits: (self.bits << 2) | d,
                generation: self.generation + 1,
                x0: self.x0 + dx * off,
                y0: self.y0 + dy * off,
                side: s,
            };
        }
        out
    }

    /// Closed-square membership test.
    pub fn contains_point(&self, p: Point) -> bool {
        p.0 >= self.x0
            && p.0 <= self.x0 + self.side
            && p.1 >= self.y0
            && p.1 <= self.y0 + self.side
    }

    /// Distance from `z` to the nearest point of the (closed) square.
    pub fn dist_min(&self, z: Point) -> f64 {
        let dx = (self.x0 - z.0).max(0.0).max(z.0 - (self.x0 + self.side));
        let dy = (self.y0 - z.1).max(0.0).max(z.1 - (self.y0 + self.side));
        (dx * dx + dy * dy).sqrt()
    }

    /// Distance from `z` to the farthest point of the square (a corner).
    pub fn dist_max(&self, z: Point) -> f64 {
        let dx = (z.0 - self.x0).abs().max((z.0 - (self.x0 + self.side)).abs());
        let dy = (z.1 - self.y0).abs().max((z.1 - (self.y0 + self.side)).abs());
        (dx * dx + dy * dy).sqrt()
    }
}

/// All squares of one generation, in address order.
#[derive(Clone, Debug)]
pub struct SquareSet {
    generation: u32,
    squares: Vec<CantorSquare>,
}

impl SquareSet {
    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn squares(&self) -> &[CantorSquare] {
        &self.squares
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CantorSquare> {
        self.squares.iter()
    }
}

impl<'a> IntoIterator for &'a SquareSet {
    type Item = &'a CantorSquare;
    type IntoIter = std::slice::Iter<'a, CantorSquare>;

    fn into_iter(self) -> Self::IntoIter {
        self.squares.iter()
    }
}

/// Builds generation `n` of the construction.
///
/// Children are emitted in digit order, so the result is sorted by
/// address key without an explicit sort.
pub fn build_generation(n: u32) -> Result<SquareSet> {
    if n > MAX_GENERATION {
        return Err(Error::capacity(format!(
            "generation {n} exceeds the maximum of {MAX_GENERATION} (4^{n} squares)"
        )));
    }
    let mut squares = vec![CantorSquare::root()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(squares.len() * 4);
        for sq in &squares {
            next.extend_from_slice(&sq.children());
        }
        squares = next;
    }
    Ok(SquareSet {
        generation: n,
        squares,
    })
}

/// Walks one coordinate down `n` levels of the middle-half construction.
///
/// Returns false as soon as the rescaled coordinate falls in the open
/// middle gap `(1/4, 3/4)`.  Band edges are kept, matching closed squares.
fn axis_survives(mut t: f64, n: u32) -> bool {
    if !(0.0..=1.0).contains(&t) {
        return false;
    }
    for _ in 0..n {
        if t <= 0.25 {
            t *= 4.0;
        } else if t >= 0.75 {
            t = 4.0 * t - 3.0;
        } else {
            return false;
        }
    }
    true
}

/// Whether `p` lies in some square of generation `n`.
///
/// Runs in O(n) by walking each axis independently; the product
/// structure of the construction makes the two walks independent.
pub fn point_membership(p: Point, n: u32) -> bool {
    axis_survives(p.0, n) && axis_survives(p.1, n)
}
