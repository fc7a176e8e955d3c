//! Static scene description and the seeded scene generator.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::classes::{ObjectClass, ReceptacleClass};
use super::geometry::Cell;
use super::rng;
use super::WorldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tile {
    Floor,
    Wall,
}

/// Row-major tile grid. Serialized as one string per row (`#` wall, `.` floor).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct Grid {
    width: i32,
    height: i32,
    tiles: Vec<Tile>,
}

impl Grid {
    pub fn new(width: i32, height: i32, fill: Tile) -> Self {
        Grid { width, height, tiles: vec![fill; (width * height).max(0) as usize] }
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    pub fn cell_at(&self, i: usize) -> Cell {
        Cell::new(i as i32 % self.width, i as i32 / self.width)
    }

    /// Out-of-bounds cells read as walls.
    pub fn tile(&self, c: Cell) -> Tile {
        if self.in_bounds(c) {
            self.tiles[self.index(c)]
        } else {
            Tile::Wall
        }
    }

    pub fn set(&mut self, c: Cell, t: Tile) {
        let i = self.index(c);
        self.tiles[i] = t;
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

impl From<Grid> for Vec<String> {
    fn from(g: Grid) -> Self {
        (0..g.height)
            .map(|y| {
                (0..g.width)
                    .map(|x| match g.tile(Cell::new(x, y)) {
                        Tile::Floor => '.',
                        Tile::Wall => '#',
                    })
                    .collect()
            })
            .collect()
    }
}

impl TryFrom<Vec<String>> for Grid {
    type Error = String;

    fn try_from(rows: Vec<String>) -> Result<Self, Self::Error> {
        let height = rows.len() as i32;
        let width = rows.first().map_or(0, |r| r.chars().count()) as i32;
        let mut tiles = Vec::with_capacity((width * height) as usize);
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() as i32 != width {
                return Err(format!("grid row {y} has {} cells, expected {width}", row.chars().count()));
            }
            for ch in row.chars() {
                tiles.push(match ch {
                    '.' => Tile::Floor,
                    '#' => Tile::Wall,
                    other => return Err(format!("unknown grid tile `{other}` in row {y}")),
                });
            }
        }
        Ok(Grid { width, height, tiles })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Receptacle {
    pub id: usize,
    pub class: ReceptacleClass,
    pub cell: Cell,
    pub openable: bool,
    pub open: bool,
    pub capacity: u32,
}

impl Receptacle {
    /// Contents can be seen and reached.
    pub fn accessible(&self) -> bool {
        self.open || !self.openable
    }

    pub fn pddl_name(&self) -> String {
        format!("{}_{}", self.class.name(), self.id)
    }
}

/// Where a small object is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    In(usize),
    Floor(Cell),
    Held,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Object {
    pub id: usize,
    pub class: ObjectClass,
    pub place: Place,
}

impl Object {
    pub fn pddl_name(&self) -> String {
        format!("{}_{}", self.class.name(), self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scene {
    pub seed: u64,
    pub grid: Grid,
    pub receptacles: Vec<Receptacle>,
    pub objects: Vec<Object>,
}

impl Scene {
    pub fn receptacle_at(&self, c: Cell) -> Option<&Receptacle> {
        self.receptacles.iter().find(|r| r.cell == c)
    }

    /// Floor without a receptacle on it.
    pub fn is_free(&self, c: Cell) -> bool {
        self.grid.tile(c) == Tile::Floor && self.receptacle_at(c).is_none()
    }

    /// Blocks movement and line of sight.
    pub fn is_opaque(&self, c: Cell) -> bool {
        !self.is_free(c)
    }

    pub fn occupancy(&self, receptacle: usize) -> u32 {
        self.objects.iter().filter(|o| o.place == Place::In(receptacle)).count() as u32
    }

    pub fn objects_in(&self, receptacle: usize) -> impl Iterator<Item = &Object> + '_ {
        self.objects.iter().filter(move |o| o.place == Place::In(receptacle))
    }

    pub fn free_cells(&self) -> Vec<Cell> {
        self.grid.cells().filter(|&c| self.is_free(c)).collect()
    }

    /// Breadth-first distances over free cells from `from` (`u32::MAX` if unreachable).
    pub fn bfs_distances(&self, from: Cell) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.grid.len()];
        if !self.is_free(from) {
            return dist;
        }
        dist[self.grid.index(from)] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(c) = q.pop_front() {
            let d = dist[self.grid.index(c)];
            for n in c.neighbours() {
                if self.is_free(n) && dist[self.grid.index(n)] == u32::MAX {
                    dist[self.grid.index(n)] = d + 1;
                    q.push_back(n);
                }
            }
        }
        dist
    }

    /// Text picture: `#` wall, `.` floor, receptacles by initial
    /// (`F`ridge, `M`icrowave, `C`abinet, `D`rawer, `S`ink, `G`arbage can).
    pub fn render(&self) -> Vec<String> {
        let mut rows: Vec<Vec<char>> = Vec::from(self.grid.clone()).into_iter().map(|r| r.chars().collect()).collect();
        for r in &self.receptacles {
            rows[r.cell.y as usize][r.cell.x as usize] = r.class.name().chars().next().unwrap();
        }
        rows.into_iter().map(|r| r.into_iter().collect()).collect()
    }

    /// Checks the structural invariants of a scene.
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::InvalidScene(m));
        let g = &self.grid;
        for c in g.cells() {
            let border = c.x == 0 || c.y == 0 || c.x == g.width - 1 || c.y == g.height - 1;
            if border && g.tile(c) != Tile::Wall {
                return bad(format!("border cell {c} is not a wall"));
            }
        }
        for (i, r) in self.receptacles.iter().enumerate() {
            if r.id != i {
                return bad(format!("receptacle at index {i} has id {}", r.id));
            }
            if g.tile(r.cell) != Tile::Floor {
                return bad(format!("receptacle {} stands on a wall", r.id));
            }
            if self.receptacles[..i].iter().any(|q| q.cell == r.cell) {
                return bad(format!("two receptacles share cell {}", r.cell));
            }
            if !r.cell.neighbours().iter().any(|&n| self.is_free(n)) {
                return bad(format!("receptacle {} has no free neighbour", r.id));
            }
            if self.occupancy(r.id) > r.capacity {
                return bad(format!("receptacle {} holds more than its capacity", r.id));
            }
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.id != i {
                return bad(format!("object at index {i} has id {}", o.id));
            }
            match o.place {
                Place::In(r) if r >= self.receptacles.len() => {
                    return bad(format!("object {} is in unknown receptacle {r}", o.id));
                }
                Place::Floor(c) if !self.is_free(c) => {
                    return bad(format!("object {} lies on a blocked cell", o.id));
                }
                _ => {}
            }
        }
        let free = self.free_cells();
        if let Some(&start) = free.first() {
            let d = self.bfs_distances(start);
            if free.iter().any(|&c| d[g.index(c)] == u32::MAX) {
                return bad("free floor is not connected".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub width: i32,
    pub height: i32,
    /// Split the room with an interior wall that has a one-cell door.
    pub two_rooms: bool,
    pub receptacles: Vec<(ReceptacleClass, usize)>,
    /// Small objects placed inside receptacles.
    pub objects: usize,
    /// Small objects placed on free floor cells.
    pub floor_objects: usize,
    pub capacity: u32,
    pub max_attempts: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            width: 14,
            height: 11,
            two_rooms: true,
            receptacles: vec![
                (ReceptacleClass::Fridge, 1),
                (ReceptacleClass::Microwave, 1),
                (ReceptacleClass::Cabinet, 3),
                (ReceptacleClass::Drawer, 3),
                (ReceptacleClass::Sink, 1),
                (ReceptacleClass::GarbageCan, 1),
            ],
            objects: 6,
            floor_objects: 0,
            capacity: 1,
            max_attempts: 50,
        }
    }
}

/// Generates a scene deterministically from `seed`.
pub fn generate_scene(seed: u64, config: &SceneConfig) -> Result<Scene, WorldError> {
    if config.width < 5 || config.height < 5 {
        return Err(WorldError::Infeasible(format!("grid {}x{} is too small", config.width, config.height)));
    }
    let total: usize = config.receptacles.iter().map(|&(_, n)| n).sum();
    let interior = ((config.width - 2) * (config.height - 2)) as usize;
    if total * 2 > interior {
        return Err(WorldError::Infeasible(format!("{total} receptacles do not fit on a {}x{} grid", config.width, config.height)));
    }
    let mut rng = rng::stream(seed, "scene");
    let mut last = String::new();
    for _ in 0..config.max_attempts.max(1) {
        match attempt(seed, config, &mut rng) {
            Ok(scene) => return Ok(scene),
            Err(reason) => last = reason,
        }
    }
    Err(WorldError::Infeasible(format!("no valid scene after {} attempts: {last}", config.max_attempts)))
}

fn attempt(seed: u64, config: &SceneConfig, rng: &mut rng::Stream) -> Result<Scene, String> {
    let (w, h) = (config.width, config.height);
    let mut grid = Grid::new(w, h, Tile::Floor);
    for c in grid.cells().collect::<Vec<_>>() {
        if c.x == 0 || c.y == 0 || c.x == w - 1 || c.y == h - 1 {
            grid.set(c, Tile::Wall);
        }
    }
    let mut door = None;
    if config.two_rooms && w >= 9 {
        let wx = w / 2;
        let dy = rng.gen_range(2..h - 2);
        for y in 1..h - 1 {
            if y != dy {
                grid.set(Cell::new(wx, y), Tile::Wall);
            }
        }
        door = Some(Cell::new(wx, dy));
    }
    let mut scene = Scene { seed, grid, receptacles: Vec::new(), objects: Vec::new() };
    let near_door = |c: Cell| door.is_some_and(|d| c.manhattan(d) <= 1);
    let mut candidates: Vec<Cell> = scene
        .grid
        .cells()
        .filter(|&c| scene.grid.tile(c) == Tile::Floor && !near_door(c))
        .filter(|&c| c.neighbours().iter().any(|&n| scene.grid.tile(n) == Tile::Wall))
        .collect();
    for &(class, count) in &config.receptacles {
        for _ in 0..count {
            candidates.shuffle(rng);
            let mut placed = false;
            for i in 0..candidates.len() {
                let cell = candidates[i];
                let id = scene.receptacles.len();
                scene.receptacles.push(Receptacle {
                    id,
                    class,
                    cell,
                    openable: class.openable(),
                    open: false,
                    capacity: config.capacity,
                });
                if placement_ok(&scene) {
                    candidates.swap_remove(i);
                    placed = true;
                    break;
                }
                scene.receptacles.pop();
            }
            if !placed {
                return Err(format!("could not place {class}"));
            }
        }
    }
    for _ in 0..config.objects {
        let mut done = false;
        for _ in 0..64 {
            let class = ObjectClass::ALL[rng.gen_range(0..ObjectClass::ALL.len())];
            let hosts: Vec<usize> = scene
                .receptacles
                .iter()
                .filter(|r| r.class.can_contain(class) && scene.occupancy(r.id) < r.capacity)
                .map(|r| r.id)
                .collect();
            if let Some(&r) = hosts.choose(rng) {
                let id = scene.objects.len();
                scene.objects.push(Object { id, class, place: Place::In(r) });
                done = true;
                break;
            }
        }
        if !done {
            return Err("no receptacle has room for another object".into());
        }
    }
    if config.floor_objects > 0 {
        let mut free = scene.free_cells();
        free.shuffle(rng);
        if free.len() < config.floor_objects {
            return Err("not enough free floor for floor objects".into());
        }
        for &cell in free.iter().take(config.floor_objects) {
            let class = ObjectClass::ALL[rng.gen_range(0..ObjectClass::ALL.len())];
            let id = scene.objects.len();
            scene.objects.push(Object { id, class, place: Place::Floor(cell) });
        }
    }
    scene.validate().map_err(|e| e.to_string())?;
    Ok(scene)
}

fn placement_ok(scene: &Scene) -> bool {
    if !scene.receptacles.iter().all(|r| r.cell.neighbours().iter().any(|&n| scene.is_free(n))) {
        return false;
    }
    let free = scene.free_cells();
    let Some(&start) = free.first() else { return false };
    let d = scene.bfs_distances(start);
    free.iter().all(|&c| d[scene.grid.index(c)] != u32::MAX)
}
