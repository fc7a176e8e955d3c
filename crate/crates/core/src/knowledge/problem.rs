//! Compiles knowledge and a goal into a PDDL problem over the household domain.

use std::collections::BTreeMap;

use super::goal::GoalSpec;
use super::map::{CellState, UNREACHABLE};
use super::state::{Containment, KnowledgeState, ReceptacleRecord};
use crate::pddl::{FunctionTerm, InitElement, Metric, Problem, TypedObject};
use crate::world::{Cell, ObjectClass, ReceptacleClass};

pub const AGENT: &str = "agent";

/// An emitted problem plus the mapping from its object names back to cells,
/// tracked entities and receptacles.
#[derive(Debug, Clone, PartialEq)]
pub struct PddlProblem {
    pub problem: Problem,
    pub locations: BTreeMap<String, Cell>,
    pub objects: BTreeMap<String, usize>,
    pub receptacles: BTreeMap<String, usize>,
    pub agent_location: String,
}

pub fn location_name(c: Cell) -> String {
    format!("loc_{}_{}", c.x, c.y)
}

pub fn entity_name(class: ObjectClass, id: usize) -> String {
    format!("{}_t{id}", class.name())
}

/// Cell from which a receptacle is accessed: the smallest known-free
/// neighbour, else the smallest unknown one.
pub fn access_cell(k: &KnowledgeState, r: &ReceptacleRecord) -> Option<Cell> {
    let mut ns = r.cell.neighbours();
    ns.sort();
    ns.iter()
        .copied()
        .find(|&n| k.map.get(n) == CellState::Free)
        .or_else(|| ns.iter().copied().find(|&n| k.map.get(n) == CellState::Unknown))
}

fn atom(predicate: &str, args: &[&str]) -> InitElement {
    InitElement::Atom { predicate: predicate.to_string(), args: args.iter().map(|s| s.to_string()).collect() }
}

pub fn to_pddl_problem(k: &KnowledgeState, goal: &GoalSpec) -> PddlProblem {
    let here = k.pose.cell;
    let from_here = k.map.costs_from(here);
    let mut cells: Vec<Cell> = vec![here];
    let mut rec_cells: Vec<(&ReceptacleRecord, Cell)> = Vec::new();
    for r in k.receptacles.values() {
        let Some(c) = access_cell(k, r) else { continue };
        if c != here && k.map.cost_at(&from_here, c) == UNREACHABLE {
            continue;
        }
        rec_cells.push((r, c));
        if !cells.contains(&c) {
            cells.push(c);
        }
    }
    cells.sort();

    let mut objects = vec![TypedObject { name: AGENT.into(), ty: "agent".into() }];
    let mut init = vec![atom("atLocation", &[AGENT, &location_name(here)])];
    let mut locations = BTreeMap::new();
    for &c in &cells {
        let name = location_name(c);
        objects.push(TypedObject { name: name.clone(), ty: "location".into() });
        locations.insert(name, c);
    }
    for &a in &cells {
        let costs = k.map.costs_from(a);
        for &b in &cells {
            if a != b {
                let d = k.map.cost_at(&costs, b);
                init.push(InitElement::Assign {
                    function: "distance".into(),
                    args: vec![location_name(a), location_name(b)],
                    value: d as f64,
                });
            }
        }
    }
    init.push(InitElement::Assign { function: "totalCost".into(), args: vec![], value: 0.0 });

    for t in ReceptacleClass::ALL {
        objects.push(TypedObject { name: t.pddl_type(), ty: "rtype".into() });
    }
    for o in ObjectClass::ALL {
        objects.push(TypedObject { name: o.pddl_type(), ty: "otype".into() });
    }
    for t in ReceptacleClass::ALL {
        for o in ObjectClass::ALL {
            if t.can_contain(o) {
                init.push(atom("canContain", &[&t.pddl_type(), &o.pddl_type()]));
            }
        }
    }

    let mut receptacles = BTreeMap::new();
    let mut rec_loc: BTreeMap<usize, String> = BTreeMap::new();
    for &(r, c) in &rec_cells {
        let name = r.pddl_name();
        let loc = location_name(c);
        objects.push(TypedObject { name: name.clone(), ty: "receptacle".into() });
        init.push(atom("receptacleType", &[&name, &r.class.pddl_type()]));
        init.push(atom("receptacleAtLocation", &[&name, &loc]));
        if r.openable {
            init.push(atom("openable", &[&name]));
        }
        if r.opened {
            init.push(atom("opened", &[&name]));
        }
        if r.checked {
            init.push(atom("checked", &[&name]));
        }
        if k.believed_full(r.id) {
            init.push(atom("full", &[&name]));
        }
        receptacles.insert(name, r.id);
        rec_loc.insert(r.id, loc);
    }

    let mut entity_names = BTreeMap::new();
    for e in &k.entities {
        let name = entity_name(e.class, e.id);
        match e.containment {
            Containment::In(r) => {
                let Some(loc) = rec_loc.get(&r) else { continue };
                let rname = k.receptacles[&r].pddl_name();
                objects.push(TypedObject { name: name.clone(), ty: "object".into() });
                init.push(atom("objectType", &[&name, &e.class.pddl_type()]));
                init.push(atom("inReceptacle", &[&name, &rname]));
                init.push(atom("objectAtLocation", &[&name, loc]));
            }
            Containment::Held => {
                objects.push(TypedObject { name: name.clone(), ty: "object".into() });
                init.push(atom("objectType", &[&name, &e.class.pddl_type()]));
                init.push(atom("holds", &[AGENT, &name]));
                init.push(atom("holdsAny", &[AGENT]));
            }
            Containment::Floor => continue,
        }
        entity_names.insert(name, e.id);
    }

    PddlProblem {
        problem: Problem {
            name: "knowledge".into(),
            domain: "qa_vsp_task".into(),
            objects,
            init,
            goal: goal.formula.clone(),
            metric: Some(Metric { function: FunctionTerm { name: "totalCost".into(), args: vec![] } }),
        },
        locations,
        objects: entity_names,
        receptacles,
        agent_location: location_name(here),
    }
}
