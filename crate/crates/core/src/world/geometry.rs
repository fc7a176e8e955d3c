//! Grid cells, headings and axis-aligned cell boxes.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A grid cell. `y` grows southwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn step(self, h: Heading) -> Cell {
        let (dx, dy) = h.delta();
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn neighbours(self) -> [Cell; 4] {
        Heading::ALL.map(|h| self.step(h))
    }

    pub fn is_adjacent(self, other: Cell) -> bool {
        self.manhattan(other) == 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::N => (0, -1),
            Heading::E => (1, 0),
            Heading::S => (0, 1),
            Heading::W => (-1, 0),
        }
    }

    pub fn left(self) -> Heading {
        match self {
            Heading::N => Heading::W,
            Heading::W => Heading::S,
            Heading::S => Heading::E,
            Heading::E => Heading::N,
        }
    }

    pub fn right(self) -> Heading {
        match self {
            Heading::N => Heading::E,
            Heading::E => Heading::S,
            Heading::S => Heading::W,
            Heading::W => Heading::N,
        }
    }

    /// Heading pointing from `from` to the adjacent cell `to`.
    pub fn towards(from: Cell, to: Cell) -> Option<Heading> {
        Heading::ALL.into_iter().find(|&h| from.step(h) == to)
    }

    /// Number of right turns (0..4) to get from `self` to `other`.
    pub fn right_turns_to(self, other: Heading) -> u32 {
        let idx = |h: Heading| Heading::ALL.iter().position(|&x| x == h).unwrap() as u32;
        (idx(other) + 4 - idx(self)) % 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub cell: Cell,
    pub heading: Heading,
}

impl Pose {
    pub fn front(&self) -> Cell {
        self.cell.step(self.heading)
    }
}

/// Inclusive axis-aligned box of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellBox {
    pub min: Cell,
    pub max: Cell,
}

impl CellBox {
    pub fn cell(c: Cell) -> Self {
        CellBox { min: c, max: c }
    }

    pub fn area(&self) -> u32 {
        ((self.max.x - self.min.x + 1) * (self.max.y - self.min.y + 1)) as u32
    }

    pub fn contains(&self, c: Cell) -> bool {
        (self.min.x..=self.max.x).contains(&c.x) && (self.min.y..=self.max.y).contains(&c.y)
    }

    pub fn intersection(&self, other: &CellBox) -> u32 {
        let w = self.max.x.min(other.max.x) - self.min.x.max(other.min.x) + 1;
        let h = self.max.y.min(other.max.y) - self.min.y.max(other.min.y) + 1;
        if w <= 0 || h <= 0 {
            0
        } else {
            (w * h) as u32
        }
    }

    pub fn iou(&self, other: &CellBox) -> f64 {
        let i = self.intersection(other);
        if i == 0 {
            return 0.0;
        }
        i as f64 / (self.area() + other.area() - i) as f64
    }

    pub fn union(&self, other: &CellBox) -> CellBox {
        CellBox {
            min: Cell::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Cell::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    /// Twice the centre, to stay in integers.
    pub fn centre2(&self) -> (i32, i32) {
        (self.min.x + self.max.x, self.min.y + self.max.y)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.min.y..=self.max.y).flat_map(move |y| (self.min.x..=self.max.x).map(move |x| Cell::new(x, y)))
    }
}
