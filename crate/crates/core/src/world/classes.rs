//! Small-object and receptacle classes and the static `canContain` table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectClass {
    Mug,
    Bowl,
    Apple,
    Bread,
    Fork,
    Knife,
    Spoon,
    Potato,
    Tomato,
    Egg,
    Plate,
    Cup,
    Lettuce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReceptacleClass {
    Fridge,
    Microwave,
    Cabinet,
    Drawer,
    Sink,
    GarbageCan,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 13] = [
        ObjectClass::Mug,
        ObjectClass::Bowl,
        ObjectClass::Apple,
        ObjectClass::Bread,
        ObjectClass::Fork,
        ObjectClass::Knife,
        ObjectClass::Spoon,
        ObjectClass::Potato,
        ObjectClass::Tomato,
        ObjectClass::Egg,
        ObjectClass::Plate,
        ObjectClass::Cup,
        ObjectClass::Lettuce,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Mug => "Mug",
            ObjectClass::Bowl => "Bowl",
            ObjectClass::Apple => "Apple",
            ObjectClass::Bread => "Bread",
            ObjectClass::Fork => "Fork",
            ObjectClass::Knife => "Knife",
            ObjectClass::Spoon => "Spoon",
            ObjectClass::Potato => "Potato",
            ObjectClass::Tomato => "Tomato",
            ObjectClass::Egg => "Egg",
            ObjectClass::Plate => "Plate",
            ObjectClass::Cup => "Cup",
            ObjectClass::Lettuce => "Lettuce",
        }
    }

    /// The `otype` constant, e.g. `MugType`.
    pub fn pddl_type(self) -> String {
        format!("{}Type", self.name())
    }
}

impl ReceptacleClass {
    pub const ALL: [ReceptacleClass; 6] = [
        ReceptacleClass::Fridge,
        ReceptacleClass::Microwave,
        ReceptacleClass::Cabinet,
        ReceptacleClass::Drawer,
        ReceptacleClass::Sink,
        ReceptacleClass::GarbageCan,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ReceptacleClass::Fridge => "Fridge",
            ReceptacleClass::Microwave => "Microwave",
            ReceptacleClass::Cabinet => "Cabinet",
            ReceptacleClass::Drawer => "Drawer",
            ReceptacleClass::Sink => "Sink",
            ReceptacleClass::GarbageCan => "GarbageCan",
        }
    }

    pub fn pddl_type(self) -> String {
        format!("{}Type", self.name())
    }

    pub fn openable(self) -> bool {
        !matches!(self, ReceptacleClass::Sink | ReceptacleClass::GarbageCan)
    }

    pub fn can_contain(self, o: ObjectClass) -> bool {
        use ObjectClass::*;
        match self {
            ReceptacleClass::Fridge => {
                matches!(o, Apple | Bread | Potato | Tomato | Egg | Lettuce | Mug | Bowl | Cup | Plate)
            }
            ReceptacleClass::Microwave => matches!(o, Mug | Bowl | Cup | Potato | Bread | Egg | Apple | Tomato | Plate),
            ReceptacleClass::Cabinet => matches!(o, Mug | Bowl | Cup | Plate | Bread | Potato),
            ReceptacleClass::Drawer => matches!(o, Fork | Knife | Spoon | Bread),
            ReceptacleClass::Sink => {
                matches!(o, Mug | Bowl | Cup | Plate | Fork | Knife | Spoon | Apple | Tomato | Potato | Lettuce)
            }
            ReceptacleClass::GarbageCan => matches!(o, Apple | Bread | Potato | Tomato | Egg | Lettuce),
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for ReceptacleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownClass(pub String);

impl fmt::Display for UnknownClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown class `{}`", self.0)
    }
}

impl std::error::Error for UnknownClass {}

impl FromStr for ObjectClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

impl FromStr for ReceptacleClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReceptacleClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

/// What a detection claims to have seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityClass {
    Object(ObjectClass),
    Receptacle(ReceptacleClass),
}
