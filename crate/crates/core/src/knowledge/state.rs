//! The knowledge state shared by all controllers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::map::{CellState, OccupancyMap};
use crate::world::{
    Cell, CellBox, DetectionFrame, EntityClass, EntityId, ObjectClass, Observation, Place, Pose, PrimitiveAction,
    ReceptacleClass, Scene, VisibleCell,
};

/// Same-class detections overlapping a tracked box by more than this are merged.
pub const MERGE_IOU: f64 = 0.3;

/// Detector runs in which a fully visible entity must be missed before it is
/// dropped.
pub const DECAY_FRAMES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Containment {
    In(usize),
    Floor,
    Held,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrackedDetection {
    pub id: usize,
    pub class: ObjectClass,
    pub bbox: CellBox,
    pub support: u32,
    pub containment: Containment,
    /// Primitive step of the last supporting detection.
    pub last_seen: u64,
    /// World entity behind the latest supporting detection.
    pub source: Option<EntityId>,
    /// Consecutive detector runs that saw the whole box without re-detecting it.
    pub misses: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReceptacleRecord {
    pub id: usize,
    pub class: ReceptacleClass,
    pub cell: Cell,
    pub openable: bool,
    pub opened: bool,
    pub checked: bool,
    /// A put into it failed, so it is believed full.
    pub full_hint: bool,
    pub support: u32,
}

impl ReceptacleRecord {
    pub fn accessible(&self) -> bool {
        self.opened || !self.openable
    }

    pub fn pddl_name(&self) -> String {
        format!("{}_{}", self.class.name(), self.id)
    }
}

/// An interaction whose outcome updates beliefs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interaction {
    Open(usize),
    Close(usize),
    /// Tracked entity id.
    Pickup(usize),
    Put(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnowledgeState {
    pub map: OccupancyMap,
    pub entities: Vec<TrackedDetection>,
    pub receptacles: BTreeMap<usize, ReceptacleRecord>,
    pub pose: Pose,
    /// Tracked entity in hand.
    pub held: Option<usize>,
    pub hierarchical_steps: u64,
    pub primitive_steps: u64,
    next_entity: usize,
    last_frame: Option<u64>,
}

impl KnowledgeState {
    pub fn new(width: i32, height: i32, pose: Pose) -> Self {
        KnowledgeState {
            map: OccupancyMap::new(width, height),
            entities: Vec::new(),
            receptacles: BTreeMap::new(),
            pose,
            held: None,
            hierarchical_steps: 0,
            primitive_steps: 0,
            next_entity: 0,
            last_frame: None,
        }
    }

    pub fn for_scene(scene: &Scene, pose: Pose) -> Self {
        let mut k = KnowledgeState::new(scene.grid.width(), scene.grid.height(), pose);
        k.map.learn(pose.cell, CellState::Free);
        k
    }

    /// Knowledge given every receptacle and the full map up front. Small
    /// objects must still be observed.
    pub fn with_global_layout(scene: &Scene, pose: Pose) -> Self {
        let mut k = KnowledgeState::new(scene.grid.width(), scene.grid.height(), pose);
        k.map = OccupancyMap::ground_truth(scene);
        for r in &scene.receptacles {
            k.receptacles.insert(
                r.id,
                ReceptacleRecord {
                    id: r.id,
                    class: r.class,
                    cell: r.cell,
                    openable: r.openable,
                    opened: r.open,
                    checked: false,
                    full_hint: false,
                    support: 1,
                },
            );
        }
        k
    }

    pub fn entity(&self, id: usize) -> Option<&TrackedDetection> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn held_entity(&self) -> Option<&TrackedDetection> {
        self.held.and_then(|h| self.entity(h))
    }

    pub fn update_map(&mut self, visible: &[VisibleCell]) -> usize {
        self.map.update(visible)
    }

    /// Bookkeeping after one primitive step.
    pub fn observe_step(&mut self, action: PrimitiveAction, obs: &Observation) {
        if action == PrimitiveAction::MoveAhead && !obs.success {
            self.map.learn(obs.pose.front(), CellState::Blocked);
        }
        self.pose = obs.pose;
        self.primitive_steps += 1;
        self.map.update(&obs.visible);
    }

    pub fn checked_count(&self) -> usize {
        self.receptacles.values().filter(|r| r.checked).count()
    }

    /// Receptacle records whose class can hold `class`.
    pub fn candidates(&self, class: ObjectClass) -> impl Iterator<Item = &ReceptacleRecord> + '_ {
        self.receptacles.values().filter(move |r| r.class.can_contain(class))
    }

    pub fn believed_full(&self, receptacle: usize) -> bool {
        self.receptacles.get(&receptacle).is_some_and(|r| r.full_hint)
            || self.entities.iter().any(|e| e.containment == Containment::In(receptacle))
    }

    /// Tracked entities of `class` that are inside a receptacle or in hand.
    pub fn located(&self, class: ObjectClass) -> impl Iterator<Item = &TrackedDetection> + '_ {
        self.entities
            .iter()
            .filter(move |e| e.class == class && matches!(e.containment, Containment::In(_) | Containment::Held))
    }

    /// Receptacle an object box belongs to: the highest-IoU receptacle whose
    /// contents were visible, ties to the nearest centre and then the lowest id.
    fn containment_of(&self, bbox: &CellBox) -> Containment {
        let (cx, cy) = bbox.centre2();
        self.receptacles
            .values()
            .filter(|r| r.accessible())
            .map(|r| {
                let iou = bbox.iou(&CellBox::cell(r.cell));
                let d = (2 * r.cell.x - cx).abs() + (2 * r.cell.y - cy).abs();
                (iou, d, r.id)
            })
            .filter(|&(iou, _, _)| iou > 0.0)
            .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
            .map_or(Containment::Floor, |(_, _, id)| Containment::In(id))
    }

    /// Merges one detector frame. Frames are numbered by the caller; merging
    /// a frame number that was already merged changes nothing.
    pub fn merge_detections(&mut self, seq: u64, frame: &DetectionFrame) {
        if self.last_frame.is_some_and(|l| seq <= l) {
            return;
        }
        self.last_frame = Some(seq);
        self.pose = frame.pose;
        self.map.update(&frame.visible);
        let step = self.primitive_steps;
        let visible = |c: Cell| frame.visible.iter().any(|v| v.cell == c);

        for d in &frame.detections {
            if let EntityClass::Receptacle(class) = d.class {
                let Some(EntityId::Receptacle(id)) = d.source else { continue };
                let rec = self.receptacles.entry(id).or_insert_with(|| ReceptacleRecord {
                    id,
                    class,
                    cell: d.bbox.min,
                    openable: class.openable(),
                    opened: false,
                    checked: false,
                    full_hint: false,
                    support: 0,
                });
                rec.support += 1;
            }
        }
        // Contents of visible, accessible receptacles have now been looked at.
        for r in self.receptacles.values_mut() {
            if r.accessible() && visible(r.cell) {
                r.checked = true;
            }
        }

        let mut matched = vec![false; self.entities.len()];
        for d in &frame.detections {
            let EntityClass::Object(class) = d.class else { continue };
            let best = self
                .entities
                .iter()
                .enumerate()
                .filter(|(_, e)| e.class == class && e.containment != Containment::Held)
                .map(|(i, e)| (i, e.bbox.iou(&d.bbox)))
                .filter(|&(_, iou)| iou > MERGE_IOU)
                .fold(None, |acc: Option<(usize, f64)>, (i, iou)| match acc {
                    Some((_, b)) if b >= iou => acc,
                    _ => Some((i, iou)),
                });
            match best {
                Some((i, _)) => {
                    let bbox = self.entities[i].bbox.union(&d.bbox);
                    let containment = self.containment_of(&bbox);
                    let e = &mut self.entities[i];
                    e.bbox = bbox;
                    e.support += 1;
                    e.last_seen = step;
                    e.source = d.source;
                    e.misses = 0;
                    e.containment = containment;
                    matched[i] = true;
                }
                None => {
                    let containment = self.containment_of(&d.bbox);
                    self.entities.push(TrackedDetection {
                        id: self.next_entity,
                        class,
                        bbox: d.bbox,
                        support: 1,
                        containment,
                        last_seen: step,
                        source: d.source,
                        misses: 0,
                    });
                    self.next_entity += 1;
                    matched.push(true);
                }
            }
        }

        // Entities that should have been seen but were not lose credibility.
        let mut drop = Vec::new();
        for (i, e) in self.entities.iter_mut().enumerate() {
            if matched[i] || e.containment == Containment::Held {
                continue;
            }
            let enclosed = match e.containment {
                Containment::In(r) => !self.receptacles.get(&r).is_some_and(|r| r.accessible()),
                _ => false,
            };
            if !enclosed && e.bbox.cells().all(visible) {
                e.misses += 1;
                if e.misses >= DECAY_FRAMES {
                    drop.push(e.id);
                }
            }
        }
        self.entities.retain(|e| !drop.contains(&e.id));
    }

    /// Belief update after an interaction primitive.
    pub fn mark_interaction(&mut self, interaction: Interaction, success: bool) {
        if !success {
            if let Interaction::Put(r) = interaction {
                if let Some(rec) = self.receptacles.get_mut(&r) {
                    if rec.accessible() {
                        rec.full_hint = true;
                    }
                }
            }
            return;
        }
        match interaction {
            Interaction::Open(r) => {
                if let Some(rec) = self.receptacles.get_mut(&r) {
                    rec.opened = true;
                    rec.checked = true;
                }
            }
            Interaction::Close(r) => {
                if let Some(rec) = self.receptacles.get_mut(&r) {
                    rec.opened = false;
                }
            }
            Interaction::Pickup(id) => {
                let source = self.entity(id).and_then(|e| e.source);
                let mut freed = None;
                for e in &mut self.entities {
                    if e.id == id {
                        if let Containment::In(r) = e.containment {
                            freed = Some(r);
                        }
                        e.containment = Containment::Held;
                    }
                }
                // Duplicates of the grasped object are gone with it.
                if source.is_some() {
                    self.entities.retain(|e| e.id == id || e.source != source);
                }
                if let Some(rec) = freed.and_then(|r| self.receptacles.get_mut(&r)) {
                    rec.full_hint = false;
                }
                self.held = Some(id);
            }
            Interaction::Put(r) => {
                let Some(h) = self.held.take() else { return };
                let cell = self.receptacles.get(&r).map(|rec| rec.cell);
                for e in &mut self.entities {
                    if e.id == h {
                        e.containment = Containment::In(r);
                        if let Some(c) = cell {
                            e.bbox = CellBox::cell(c);
                        }
                    }
                }
            }
        }
    }

    /// Marks accessible receptacles next to `cell` as checked; called once
    /// their contents have been looked at from there.
    pub fn mark_arrival(&mut self, cell: Cell) {
        for r in self.receptacles.values_mut() {
            if r.accessible() && r.cell.is_adjacent(cell) {
                r.checked = true;
            }
        }
    }

    /// Drops a tracked entity refuted by a failed interaction.
    pub fn forget(&mut self, entity: usize) {
        self.entities.retain(|e| e.id != entity);
    }

    /// Belief consistency with the true containment of `scene` objects, for
    /// entities whose source is known. Used by tests.
    pub fn containment_matches(&self, scene: &Scene) -> bool {
        self.entities.iter().all(|e| match e.source {
            Some(EntityId::Object(o)) => match (e.containment, scene.objects[o].place) {
                (Containment::In(a), Place::In(b)) => a == b,
                (Containment::Floor, Place::Floor(_)) => true,
                (Containment::Held, Place::Held) => true,
                _ => false,
            },
            _ => true,
        })
    }
}
