//! The environment as seen by controllers: world, detector noise and an
//! event log of every primitive and detector call.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::knowledge::{Interaction, KnowledgeState};
use crate::world::rng::{self, Stream};
use crate::world::{DetectionFrame, Observation, Pitch, PrimitiveAction, Scene, TaskSpec, NoiseModel, WorldState};

/// Short hex digest of a serializable value.
pub fn digest<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    Sha256::digest(&bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EnvEvent {
    Step { action: PrimitiveAction, success: bool, obs: String },
    Detect { seq: u64, pitch: Pitch, frame: String },
}

pub struct Env {
    pub world: WorldState,
    pub noise: NoiseModel,
    rng: Stream,
    frames: u64,
    pub events: Vec<EnvEvent>,
}

impl Env {
    pub fn new(scene: &Scene, task: &TaskSpec, noise: NoiseModel, detector_seed: u64) -> Self {
        Env {
            world: WorldState::new(scene, task.start),
            noise,
            rng: rng::stream(detector_seed, "detector"),
            frames: 0,
            events: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.world.steps
    }

    pub fn detector_calls(&self) -> u64 {
        self.frames
    }

    /// One primitive, with the knowledge bookkeeping that follows it.
    pub fn act(&mut self, k: &mut KnowledgeState, action: PrimitiveAction) -> Observation {
        let obs = self.world.step(action).expect("controllers only emit known ids");
        k.observe_step(action, &obs);
        self.events.push(EnvEvent::Step { action, success: obs.success, obs: digest(&obs) });
        obs
    }

    /// An interaction primitive whose outcome also updates beliefs.
    pub fn interact(&mut self, k: &mut KnowledgeState, action: PrimitiveAction, belief: Interaction) -> bool {
        let ok = self.act(k, action).success;
        k.mark_interaction(belief, ok);
        ok
    }

    /// Runs the detector and merges its output.
    pub fn look(&mut self, k: &mut KnowledgeState, pitch: Pitch) -> DetectionFrame {
        let frame = self.world.detect(pitch, &self.noise, &mut self.rng);
        self.frames += 1;
        k.merge_detections(self.frames, &frame);
        self.events.push(EnvEvent::Detect { seq: self.frames, pitch, frame: digest(&frame) });
        frame
    }
}
