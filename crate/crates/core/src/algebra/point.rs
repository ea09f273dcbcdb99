use std::fmt;

use serde::{Deserialize, Serialize};

/// A point `(x|y)` of the grid. The point lies on line `y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct Point {
    pub x: u64,
    pub y: u64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: u64, y: u64) -> Self {
        Point { x, y }
    }

    /// Index of the line `ω×{y}` holding this point.
    pub const fn line(&self) -> u64 {
        self.y
    }

    /// Sort key placing points line by line, then by column.
    pub const fn line_order_key(&self) -> (u64, u64) {
        (self.y, self.x)
    }
}

impl From<[u64; 2]> for Point {
    fn from([x, y]: [u64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [u64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl From<(u64, u64)> for Point {
    fn from((x, y): (u64, u64)) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|{})", self.x, self.y)
    }
}
