//! World state, primitive actions, visibility and the noisy detector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::classes::{EntityClass, ObjectClass};
use super::geometry::{Cell, CellBox, Pose};
use super::rng::Stream;
use super::scene::{Place, Scene};
use super::WorldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", content = "id")]
pub enum PrimitiveAction {
    MoveAhead,
    RotateLeft,
    RotateRight,
    Open(usize),
    Close(usize),
    Pickup(usize),
    Put(usize),
}

/// Camera pitch band. Looking down sees near, looking up sees far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pitch {
    Down,
    Level,
    Up,
}

impl Pitch {
    pub const ALL: [Pitch; 3] = [Pitch::Down, Pitch::Level, Pitch::Up];

    pub fn degrees(self) -> i32 {
        match self {
            Pitch::Down => -30,
            Pitch::Level => 0,
            Pitch::Up => 30,
        }
    }

    pub fn range(self) -> i32 {
        match self {
            Pitch::Down => 2,
            Pitch::Level => 5,
            Pitch::Up => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum EntityId {
    Receptacle(usize),
    Object(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VisibleCell {
    pub cell: Cell,
    /// Wall or receptacle.
    pub blocked: bool,
}

/// What a primitive step returns. The detector is not run by `step`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub pose: Pose,
    pub success: bool,
    pub visible: Vec<VisibleCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Detection {
    /// Position in the frame's detection list.
    pub index: u32,
    pub class: EntityClass,
    pub bbox: CellBox,
    /// The entity the detection came from; `None` for false positives. This
    /// is what the agent would grasp or open when acting on the detection.
    pub source: Option<EntityId>,
}

/// Random draws made by the detector in one frame.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub missed: Vec<EntityId>,
    pub confused: Vec<EntityId>,
    pub false_positives: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectionFrame {
    pub pose: Pose,
    pub pitch: Pitch,
    pub visible: Vec<VisibleCell>,
    pub detections: Vec<Detection>,
    pub noise: NoiseRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Probability that a visible entity is dropped from a frame.
    pub miss: f64,
    /// Probability of one spurious object detection per frame.
    pub false_positive: f64,
    /// Probability that a detected object is labelled with another class.
    pub confusion: f64,
    /// Each side of an object box is pushed out by up to this many cells.
    pub jitter: u32,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { miss: 0.2, false_positive: 0.05, confusion: 0.05, jitter: 1 }
    }
}

impl NoiseModel {
    pub fn ground_truth() -> Self {
        NoiseModel { miss: 0.0, false_positive: 0.0, confusion: 0.0, jitter: 0 }
    }

    pub fn is_ground_truth(&self) -> bool {
        self.miss == 0.0 && self.false_positive == 0.0 && self.confusion == 0.0 && self.jitter == 0
    }

    /// Multiplies every probability by `factor`; jitter is kept.
    pub fn scaled(&self, factor: f64) -> Self {
        NoiseModel {
            miss: (self.miss * factor).clamp(0.0, 1.0),
            false_positive: (self.false_positive * factor).clamp(0.0, 1.0),
            confusion: (self.confusion * factor).clamp(0.0, 1.0),
            jitter: self.jitter,
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        for (name, p) in [("miss", self.miss), ("false_positive", self.false_positive), ("confusion", self.confusion)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(WorldError::InvalidNoise(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Agent {
    pub pose: Pose,
    pub held: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldState {
    pub scene: Scene,
    pub agent: Agent,
    /// Primitive actions taken so far.
    pub steps: u64,
}

impl WorldState {
    pub fn new(scene: &Scene, start: Pose) -> Self {
        WorldState { scene: scene.clone(), agent: Agent { pose: start, held: None }, steps: 0 }
    }

    pub fn pose(&self) -> Pose {
        self.agent.pose
    }

    /// Executes one primitive. Illegal actions fail softly and still count.
    pub fn step(&mut self, action: PrimitiveAction) -> Result<Observation, WorldError> {
        self.check_ids(action)?;
        let success = self.transition(action);
        self.steps += 1;
        let pose = self.agent.pose;
        Ok(Observation { pose, success, visible: visible_cells(&self.scene, pose, Pitch::Level.range()) })
    }

    fn check_ids(&self, action: PrimitiveAction) -> Result<(), WorldError> {
        match action {
            PrimitiveAction::Open(r) | PrimitiveAction::Close(r) | PrimitiveAction::Put(r)
                if r >= self.scene.receptacles.len() =>
            {
                Err(WorldError::MalformedAction(format!("no receptacle {r}")))
            }
            PrimitiveAction::Pickup(o) if o >= self.scene.objects.len() => {
                Err(WorldError::MalformedAction(format!("no object {o}")))
            }
            _ => Ok(()),
        }
    }

    fn transition(&mut self, action: PrimitiveAction) -> bool {
        let front = self.agent.pose.front();
        match action {
            PrimitiveAction::MoveAhead => {
                if self.scene.is_free(front) {
                    self.agent.pose.cell = front;
                    true
                } else {
                    false
                }
            }
            PrimitiveAction::RotateLeft => {
                self.agent.pose.heading = self.agent.pose.heading.left();
                true
            }
            PrimitiveAction::RotateRight => {
                self.agent.pose.heading = self.agent.pose.heading.right();
                true
            }
            PrimitiveAction::Open(r) => {
                let rec = &self.scene.receptacles[r];
                let another_open = self.scene.receptacles.iter().any(|q| q.open);
                if rec.cell != front || !rec.openable || rec.open || another_open {
                    return false;
                }
                self.scene.receptacles[r].open = true;
                true
            }
            PrimitiveAction::Close(r) => {
                let rec = &self.scene.receptacles[r];
                if rec.cell != front || !rec.openable || !rec.open {
                    return false;
                }
                self.scene.receptacles[r].open = false;
                true
            }
            PrimitiveAction::Pickup(o) => {
                if self.agent.held.is_some() {
                    return false;
                }
                let reachable = match self.scene.objects[o].place {
                    Place::In(r) => {
                        let rec = &self.scene.receptacles[r];
                        rec.cell == front && rec.accessible()
                    }
                    Place::Floor(c) => c == front,
                    Place::Held => false,
                };
                if !reachable {
                    return false;
                }
                self.scene.objects[o].place = Place::Held;
                self.agent.held = Some(o);
                true
            }
            PrimitiveAction::Put(r) => {
                let Some(o) = self.agent.held else { return false };
                let rec = &self.scene.receptacles[r];
                if rec.cell != front || !rec.accessible() || self.scene.occupancy(r) >= rec.capacity {
                    return false;
                }
                self.scene.objects[o].place = Place::In(r);
                self.agent.held = None;
                true
            }
        }
    }

    /// Entities whose extent intersects the visible cells, receptacles first,
    /// each in id order. Objects inside closed receptacles are never included.
    pub fn visible_entities(&self, visible: &[VisibleCell]) -> Vec<(EntityId, EntityClass, Cell)> {
        let seen = |c: Cell| visible.iter().any(|v| v.cell == c);
        let mut out = Vec::new();
        for r in &self.scene.receptacles {
            if seen(r.cell) {
                out.push((EntityId::Receptacle(r.id), EntityClass::Receptacle(r.class), r.cell));
            }
        }
        for o in &self.scene.objects {
            let cell = match o.place {
                Place::In(r) => {
                    let rec = &self.scene.receptacles[r];
                    if !rec.accessible() {
                        continue;
                    }
                    rec.cell
                }
                Place::Floor(c) => c,
                Place::Held => continue,
            };
            if seen(cell) {
                out.push((EntityId::Object(o.id), EntityClass::Object(o.class), cell));
            }
        }
        out
    }

    /// Runs the detector at the current pose without taking a step.
    pub fn detect(&self, pitch: Pitch, noise: &NoiseModel, rng: &mut Stream) -> DetectionFrame {
        let pose = self.agent.pose;
        let visible = visible_cells(&self.scene, pose, pitch.range());
        let mut detections = Vec::new();
        let mut record = NoiseRecord::default();
        let grid = &self.scene.grid;
        let jitter = |rng: &mut Stream, c: Cell| {
            if noise.jitter == 0 {
                return CellBox::cell(c);
            }
            let mut d = [0i32; 4];
            for v in &mut d {
                *v = rng.gen_range(0..=noise.jitter) as i32;
            }
            CellBox {
                min: Cell::new((c.x - d[0]).max(0), (c.y - d[1]).max(0)),
                max: Cell::new((c.x + d[2]).min(grid.width() - 1), (c.y + d[3]).min(grid.height() - 1)),
            }
        };
        for (id, class, cell) in self.visible_entities(&visible) {
            if noise.miss > 0.0 && rng.gen_bool(noise.miss) {
                record.missed.push(id);
                continue;
            }
            let (class, bbox) = match class {
                EntityClass::Receptacle(_) => (class, CellBox::cell(cell)),
                EntityClass::Object(true_class) => {
                    let mut c = true_class;
                    if noise.confusion > 0.0 && rng.gen_bool(noise.confusion) {
                        let k = rng.gen_range(0..ObjectClass::ALL.len() - 1);
                        c = ObjectClass::ALL.into_iter().filter(|&o| o != true_class).nth(k).unwrap();
                        record.confused.push(id);
                    }
                    (EntityClass::Object(c), jitter(rng, cell))
                }
            };
            detections.push(Detection { index: detections.len() as u32, class, bbox, source: Some(id) });
        }
        if noise.false_positive > 0.0 && rng.gen_bool(noise.false_positive) {
            let floor: Vec<Cell> = visible.iter().filter(|v| !v.blocked).map(|v| v.cell).collect();
            if !floor.is_empty() {
                let cell = floor[rng.gen_range(0..floor.len())];
                let class = ObjectClass::ALL[rng.gen_range(0..ObjectClass::ALL.len())];
                let bbox = jitter(rng, cell);
                detections.push(Detection {
                    index: detections.len() as u32,
                    class: EntityClass::Object(class),
                    bbox,
                    source: None,
                });
                record.false_positives += 1;
            }
        }
        DetectionFrame { pose, pitch, visible, detections, noise: record }
    }
}

/// Cells inside the 90° view cone of `pose` up to `range` cells ahead with a
/// clear line of sight, plus the agent's own cell. Walls and receptacles are
/// seen but block what lies behind them. Sorted by cell.
pub fn visible_cells(scene: &Scene, pose: Pose, range: i32) -> Vec<VisibleCell> {
    let g = &scene.grid;
    view_cone(pose, range, |c| g.in_bounds(c), |c| scene.is_opaque(c))
        .into_iter()
        .map(|cell| VisibleCell { cell, blocked: scene.is_opaque(cell) })
        .collect()
}

/// The view-cone geometry behind [`visible_cells`], over any opacity test.
pub fn view_cone(
    pose: Pose,
    range: i32,
    in_bounds: impl Fn(Cell) -> bool,
    opaque: impl Fn(Cell) -> bool,
) -> Vec<Cell> {
    let a = pose.cell;
    let (hx, hy) = pose.heading.delta();
    let mut out = vec![a];
    for dy in -range..=range {
        for dx in -range..=range {
            let forward = dx * hx + dy * hy;
            let lateral = (dx * hy - dy * hx).abs();
            if forward < 1 || forward > range || lateral > forward {
                continue;
            }
            let c = Cell::new(a.x + dx, a.y + dy);
            if in_bounds(c) && line_of_sight(a, c, &opaque) {
                out.push(c);
            }
        }
    }
    out.sort();
    out
}

/// True if no opaque cell lies strictly between `from` and `to` on the
/// Bresenham line.
pub fn line_of_sight(from: Cell, to: Cell, opaque: impl Fn(Cell) -> bool) -> bool {
    let (mut x, mut y) = (from.x, from.y);
    let dx = (to.x - from.x).abs();
    let dy = -(to.y - from.y).abs();
    let sx = if from.x < to.x { 1 } else { -1 };
    let sy = if from.y < to.y { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if (x, y) == (to.x, to.y) {
            return true;
        }
        if (x, y) != (from.x, from.y) && opaque(Cell::new(x, y)) {
            return false;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}
