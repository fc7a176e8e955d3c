//! Occupancy map learned from observations, and path costs over it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::world::{Cell, Scene, VisibleCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Unknown,
    Free,
    Blocked,
}

/// Cost of entering an unknown cell relative to a known free one.
pub const UNKNOWN_COST: u32 = 3;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OccupancyMap {
    pub width: i32,
    pub height: i32,
    cells: Vec<CellState>,
}

impl OccupancyMap {
    pub fn new(width: i32, height: i32) -> Self {
        OccupancyMap { width, height, cells: vec![CellState::Unknown; (width * height).max(0) as usize] }
    }

    /// The exact map of `scene`.
    pub fn ground_truth(scene: &Scene) -> Self {
        let mut m = OccupancyMap::new(scene.grid.width(), scene.grid.height());
        for c in scene.grid.cells() {
            let i = m.index(c);
            m.cells[i] = if scene.is_free(c) { CellState::Free } else { CellState::Blocked };
        }
        m
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    fn index(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    fn cell_at(&self, i: usize) -> Cell {
        Cell::new(i as i32 % self.width, i as i32 / self.width)
    }

    /// Out-of-bounds cells read as blocked.
    pub fn get(&self, c: Cell) -> CellState {
        if self.in_bounds(c) {
            self.cells[self.index(c)]
        } else {
            CellState::Blocked
        }
    }

    /// Sets an unknown cell; known cells are never changed.
    pub fn learn(&mut self, c: Cell, state: CellState) -> bool {
        if !self.in_bounds(c) || state == CellState::Unknown {
            return false;
        }
        let i = self.index(c);
        if self.cells[i] == CellState::Unknown {
            self.cells[i] = state;
            true
        } else {
            false
        }
    }

    /// Records visible cells; returns how many became known.
    pub fn update(&mut self, visible: &[VisibleCell]) -> usize {
        visible
            .iter()
            .filter(|v| self.learn(v.cell, if v.blocked { CellState::Blocked } else { CellState::Free }))
            .count()
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != CellState::Unknown).count()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn known_cells(&self) -> impl Iterator<Item = (Cell, CellState)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != CellState::Unknown)
            .map(|(i, &s)| (self.cell_at(i), s))
    }

    fn enter_cost(&self, c: Cell) -> Option<u32> {
        match self.get(c) {
            CellState::Free => Some(1),
            CellState::Unknown => Some(UNKNOWN_COST),
            CellState::Blocked => None,
        }
    }

    /// Cost of reaching every cell from `from`, paying per entered cell.
    pub fn costs_from(&self, from: Cell) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.cells.len()];
        if !self.in_bounds(from) {
            return dist;
        }
        dist[self.index(from)] = 0;
        let mut heap = BinaryHeap::from([Reverse((0u32, from))]);
        while let Some(Reverse((d, c))) = heap.pop() {
            if d > dist[self.index(c)] {
                continue;
            }
            for n in c.neighbours() {
                let Some(w) = self.enter_cost(n) else { continue };
                let nd = d + w;
                let i = self.index(n);
                if nd < dist[i] {
                    dist[i] = nd;
                    heap.push(Reverse((nd, n)));
                }
            }
        }
        dist
    }

    /// Cost from every cell to the nearest of `targets`.
    pub fn costs_to(&self, targets: &[Cell]) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.cells.len()];
        let mut heap = BinaryHeap::new();
        for &t in targets {
            if self.in_bounds(t) && self.enter_cost(t).is_some() {
                dist[self.index(t)] = 0;
                heap.push(Reverse((0u32, t)));
            }
        }
        while let Some(Reverse((d, c))) = heap.pop() {
            if d > dist[self.index(c)] {
                continue;
            }
            let Some(w) = self.enter_cost(c) else { continue };
            for n in c.neighbours() {
                if self.enter_cost(n).is_none() {
                    continue;
                }
                let nd = d + w;
                let i = self.index(n);
                if nd < dist[i] {
                    dist[i] = nd;
                    heap.push(Reverse((nd, n)));
                }
            }
        }
        dist
    }

    pub fn cost_at(&self, costs: &[u32], c: Cell) -> u32 {
        if self.in_bounds(c) {
            costs[self.index(c)]
        } else {
            UNREACHABLE
        }
    }
}
