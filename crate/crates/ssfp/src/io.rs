//! JSON instance files, solution files and the published ship terminal data.
//!
//! Vertices are written by label, pipe types 1-based and edges by their
//! 0-based position in the `edges` list. A graph without a `labels` field has
//! vertices `1..=num_vertices`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use ssfp_core::graph::{EdgePipeSet, Graph, Instance, PipeCatalog, TerminalGroups, TwoStageInstance};
use ssfp_core::InstanceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Instance { path: String, source: InstanceError },
}

impl IoError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Schema { path: path.into(), message: message.into() }
    }

    fn instance(path: impl Into<String>) -> impl FnOnce(InstanceError) -> Self {
        let path = path.into();
        move |source| IoError::Instance { path, source }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub graph: GraphSpec,
    pub pipes: PipesSpec,
    pub first_stage: StageSpec,
    pub scenarios: Vec<StageSpec>,
    #[serde(default)]
    pub existing: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub num_vertices: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u32>>,
    pub edges: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipesSpec {
    pub num_types: usize,
    pub base_costs: BaseCosts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseCosts {
    pub per_edge: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub groups: Vec<Vec<u32>>,
    pub feasible_pipes: Vec<usize>,
    pub admissible_edges: EdgeSelection,
    pub multiplier: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

/// Either the literal string `"all"` or a list of edge positions.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeSelection {
    All,
    List(Vec<usize>),
}

impl Serialize for EdgeSelection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EdgeSelection::All => s.serialize_str("all"),
            EdgeSelection::List(list) => list.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for EdgeSelection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            List(Vec<usize>),
        }
        match Raw::deserialize(d).map_err(|_| serde::de::Error::custom("expected \"all\" or a list of edge indices"))? {
            Raw::Word(w) if w == "all" => Ok(EdgeSelection::All),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected \"all\", found \"{w}\""))),
            Raw::List(list) => Ok(EdgeSelection::List(list)),
        }
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        IoError::schema(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        parse_json(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialise")
    }

    pub fn from_instance(two: &TwoStageInstance) -> Self {
        let graph = two.graph();
        let labels = graph.labels();
        let plain = labels.iter().enumerate().all(|(i, &l)| l as usize == i + 1);
        let stage = |inst: &Instance, probability: Option<f64>| StageSpec {
            groups: inst.terminals().groups().iter().map(|g| g.iter().map(|&v| graph.label(v)).collect()).collect(),
            feasible_pipes: inst.feasible_pipes().map(|p| p + 1).collect(),
            admissible_edges: if inst.num_admissible_edges() == graph.num_edges() {
                EdgeSelection::All
            } else {
                EdgeSelection::List(inst.admissible_edges().collect())
            },
            multiplier: inst.multiplier(),
            probability,
        };
        InstanceFile {
            graph: GraphSpec {
                num_vertices: graph.num_vertices(),
                labels: (!plain).then(|| labels.to_vec()),
                edges: (0..graph.num_edges())
                    .map(|e| {
                        let (u, v) = graph.edge_labels(e);
                        [u, v]
                    })
                    .collect(),
            },
            pipes: PipesSpec {
                num_types: two.pipes().num_types(),
                base_costs: BaseCosts { per_edge: two.pipes().per_edge() },
            },
            first_stage: stage(two.first_stage(), None),
            scenarios: two.scenarios().iter().zip(two.probabilities()).map(|(s, &rho)| stage(s, Some(rho))).collect(),
            existing: two.existing().iter().map(|(p, e)| [p + 1, e]).collect(),
        }
    }

    /// Builds and validates the instance, reporting the offending field.
    pub fn to_instance(&self) -> Result<TwoStageInstance, IoError> {
        let g = &self.graph;
        let labels = match &g.labels {
            Some(labels) => {
                if labels.len() != g.num_vertices {
                    return Err(IoError::schema(
                        "graph.labels",
                        format!("{} labels for {} vertices", labels.len(), g.num_vertices),
                    ));
                }
                labels.clone()
            }
            None => (1..=g.num_vertices as u32).collect(),
        };
        let graph = Arc::new(
            Graph::with_labels(labels, g.edges.iter().map(|&[u, v]| (u, v))).map_err(IoError::instance("graph"))?,
        );
        if self.pipes.base_costs.per_edge.len() != graph.num_edges() {
            return Err(IoError::schema(
                "pipes.base_costs.per_edge",
                format!("{} cost rows for {} edges", self.pipes.base_costs.per_edge.len(), graph.num_edges()),
            ));
        }
        let pipes = Arc::new(
            PipeCatalog::from_per_edge(self.pipes.num_types, &self.pipes.base_costs.per_edge)
                .map_err(IoError::instance("pipes"))?,
        );
        let stage = |spec: &StageSpec, path: &str| -> Result<Instance, IoError> {
            let groups = spec
                .groups
                .iter()
                .enumerate()
                .map(|(k, group)| {
                    group
                        .iter()
                        .enumerate()
                        .map(|(i, &label)| {
                            graph.index_of(label).ok_or_else(|| {
                                IoError::schema(format!("{path}.groups[{k}][{i}]"), format!("unknown vertex {label}"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let terminals = TerminalGroups::new(graph.num_vertices(), groups)
                .map_err(IoError::instance(format!("{path}.groups")))?;
            let mut feasible = Vec::with_capacity(spec.feasible_pipes.len());
            for (i, &p) in spec.feasible_pipes.iter().enumerate() {
                if p == 0 || p > pipes.num_types() {
                    return Err(IoError::schema(
                        format!("{path}.feasible_pipes[{i}]"),
                        format!("pipe type {p} outside 1..={}", pipes.num_types()),
                    ));
                }
                feasible.push(p - 1);
            }
            let admissible: Vec<usize> = match &spec.admissible_edges {
                EdgeSelection::All => (0..graph.num_edges()).collect(),
                EdgeSelection::List(list) => {
                    if let Some(i) = list.iter().position(|&e| e >= graph.num_edges()) {
                        return Err(IoError::schema(
                            format!("{path}.admissible_edges[{i}]"),
                            format!("edge index {} outside 0..{}", list[i], graph.num_edges()),
                        ));
                    }
                    list.clone()
                }
            };
            Instance::new(graph.clone(), pipes.clone(), terminals, &feasible, &admissible, spec.multiplier)
                .map_err(IoError::instance(path))
        };
        let first = stage(&self.first_stage, "first_stage")?;
        let mut scenarios = Vec::with_capacity(self.scenarios.len());
        let mut probabilities = Vec::with_capacity(self.scenarios.len());
        for (s, spec) in self.scenarios.iter().enumerate() {
            let path = format!("scenarios[{s}]");
            scenarios.push(stage(spec, &path)?);
            probabilities.push(
                spec.probability
                    .ok_or_else(|| IoError::schema(format!("{path}.probability"), "missing probability"))?,
            );
        }
        let existing = pairs_from_file(&self.existing, pipes.num_types(), graph.num_edges(), "existing")?;
        TwoStageInstance::new(first, scenarios, probabilities, existing).map_err(IoError::instance("scenarios"))
    }
}

fn pairs_from_file(
    pairs: &[[usize; 2]],
    num_types: usize,
    num_edges: usize,
    path: &str,
) -> Result<EdgePipeSet, IoError> {
    let mut out = EdgePipeSet::new();
    for (i, &[p, e]) in pairs.iter().enumerate() {
        if p == 0 || p > num_types {
            return Err(IoError::schema(format!("{path}[{i}][0]"), format!("pipe type {p} outside 1..={num_types}")));
        }
        if e >= num_edges {
            return Err(IoError::schema(format!("{path}[{i}][1]"), format!("edge index {e} outside 0..{num_edges}")));
        }
        out.insert(p - 1, e);
    }
    Ok(out)
}

/// `[pipe (1-based), edge index]` pairs in set order.
pub fn pairs_to_file(set: &EdgePipeSet) -> Vec<[usize; 2]> {
    set.iter().map(|(p, e)| [p + 1, e]).collect()
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<TwoStageInstance, IoError> {
    InstanceFile::from_json(&read(path.as_ref())?)?.to_instance()
}

pub fn save_instance(two: &TwoStageInstance, path: impl AsRef<Path>) -> Result<(), IoError> {
    write(path.as_ref(), &(InstanceFile::from_instance(two).to_json() + "\n"))
}

/// Installed pairs per stage. Solve reports carry these fields too, so a
/// report can be validated directly.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolutionFile {
    pub first_stage: Vec<[usize; 2]>,
    #[serde(default)]
    pub scenarios: Vec<Vec<[usize; 2]>>,
}

/// Solution sets read from a file, checked against an instance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageSolutions {
    pub first_stage: EdgePipeSet,
    pub scenarios: Vec<EdgePipeSet>,
}

impl SolutionFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        #[derive(Deserialize)]
        struct Loose {
            first_stage: Vec<[usize; 2]>,
            #[serde(default)]
            scenarios: Vec<Vec<[usize; 2]>>,
        }
        let loose: Loose = parse_json(text)?;
        Ok(SolutionFile { first_stage: loose.first_stage, scenarios: loose.scenarios })
    }

    pub fn resolve(&self, two: &TwoStageInstance) -> Result<StageSolutions, IoError> {
        let (types, edges) = (two.pipes().num_types(), two.graph().num_edges());
        if self.scenarios.len() > two.num_scenarios() {
            return Err(IoError::schema(
                "scenarios",
                format!("{} scenario sets for {} scenarios", self.scenarios.len(), two.num_scenarios()),
            ));
        }
        Ok(StageSolutions {
            first_stage: pairs_from_file(&self.first_stage, types, edges, "first_stage")?,
            scenarios: self
                .scenarios
                .iter()
                .enumerate()
                .map(|(s, pairs)| pairs_from_file(pairs, types, edges, &format!("scenarios[{s}]")))
                .collect::<Result<_, _>>()?,
        })
    }
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<SolutionFile, IoError> {
    SolutionFile::from_json(&read(path.as_ref())?)
}

/// Terminal, pipe and admissibility data of the four-deck ship, to be laid
/// over a user-supplied room graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShipData {
    pub num_vertices: usize,
    pub num_pipe_types: usize,
    /// Rooms diesel pipes may not pass through.
    pub forbidden_vertices: Vec<RoomRange>,
    pub first_stage: ShipStage,
    pub scenarios: Vec<ShipStage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShipStage {
    pub name: String,
    pub terminals: Vec<RoomRange>,
    pub feasible_pipes: Vec<usize>,
    /// Whether the stage's pipes must avoid the forbidden rooms.
    pub avoid_forbidden: bool,
    pub multiplier: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

/// A single room or an inclusive range `[first, last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RoomRange {
    Room(u32),
    Range([u32; 2]),
}

/// Expands room ranges into a sorted list without duplicates.
pub fn expand_rooms(ranges: &[RoomRange]) -> Vec<u32> {
    let mut rooms: Vec<u32> = ranges
        .iter()
        .flat_map(|r| match *r {
            RoomRange::Room(v) => v..=v,
            RoomRange::Range([a, b]) => a..=b,
        })
        .collect();
    rooms.sort_unstable();
    rooms.dedup();
    rooms
}

/// The bundled ship data file.
pub const SHIP_DATA: &str = include_str!("../data/realistic_terminals.json");

impl ShipData {
    pub fn bundled() -> Self {
        Self::from_json(SHIP_DATA).expect("bundled ship data is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        parse_json(text)
    }

    /// Terminal rooms of a stage (0 for the first stage, `s + 1` for scenario
    /// `s`).
    pub fn terminals(&self, stage: usize) -> Vec<u32> {
        let spec = if stage == 0 { &self.first_stage } else { &self.scenarios[stage - 1] };
        expand_rooms(&spec.terminals)
    }

    pub fn forbidden(&self) -> Vec<u32> {
        expand_rooms(&self.forbidden_vertices)
    }

    /// Combines the data with a room graph whose vertices are `1..=75` and
    /// whose pipe costs are given per edge. Each stage has one terminal group.
    pub fn instance(&self, graph: &GraphSpec, pipes: &PipesSpec) -> Result<TwoStageInstance, IoError> {
        let labels: Vec<u32> = graph.labels.clone().unwrap_or_else(|| (1..=graph.num_vertices as u32).collect());
        if let Some(room) = (1..=self.num_vertices as u32).find(|r| !labels.contains(r)) {
            return Err(IoError::schema("graph", format!("ship data needs room {room}, which the graph lacks")));
        }
        if pipes.num_types != self.num_pipe_types {
            return Err(IoError::schema(
                "pipes.num_types",
                format!("ship data uses {} pipe types, graph file has {}", self.num_pipe_types, pipes.num_types),
            ));
        }
        let forbidden = self.forbidden();
        let edges = &graph.edges;
        let outside: Vec<usize> = (0..edges.len())
            .filter(|&e| !forbidden.contains(&edges[e][0]) && !forbidden.contains(&edges[e][1]))
            .collect();
        let stage = |spec: &ShipStage| StageSpec {
            groups: vec![expand_rooms(&spec.terminals)],
            feasible_pipes: spec.feasible_pipes.clone(),
            admissible_edges: if spec.avoid_forbidden {
                EdgeSelection::List(outside.clone())
            } else {
                EdgeSelection::All
            },
            multiplier: spec.multiplier,
            probability: spec.probability,
        };
        InstanceFile {
            graph: graph.clone(),
            pipes: pipes.clone(),
            first_stage: stage(&self.first_stage),
            scenarios: self.scenarios.iter().map(stage).collect(),
            existing: Vec::new(),
        }
        .to_instance()
    }
}

/// Graph part of a ship file: the room graph plus per-edge pipe costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShipGraphFile {
    pub graph: GraphSpec,
    pub pipes: PipesSpec,
}

pub fn load_ship(graph_path: impl AsRef<Path>, data: &ShipData) -> Result<TwoStageInstance, IoError> {
    let file: ShipGraphFile = parse_json(&read(graph_path.as_ref())?)?;
    data.instance(&file.graph, &file.pipes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ssfp_core::instances::{fig2_instance, random_artificial, Setting};

    #[test]
    fn fig2_round_trip() {
        let two = fig2_instance(0.3).unwrap();
        let file = InstanceFile::from_instance(&two);
        assert!(file.graph.labels.is_some());
        let back = InstanceFile::from_json(&file.to_json()).unwrap().to_instance().unwrap();
        assert_eq!(back, two);
    }

    #[test]
    fn artificial_round_trip_is_exact() {
        let two = random_artificial(Setting { num_scenarios: 3, num_groups: 2, terminals_per_group: 3 }, 11).unwrap();
        let text = InstanceFile::from_instance(&two).to_json();
        assert!(!text.contains("labels"));
        assert_eq!(InstanceFile::from_json(&text).unwrap().to_instance().unwrap(), two);
    }

    fn tiny() -> InstanceFile {
        InstanceFile::from_json(
            r#"{"graph": {"num_vertices": 3, "edges": [[1, 2], [2, 3]]},
                "pipes": {"num_types": 1, "base_costs": {"per_edge": [[1], [2]]}},
                "first_stage": {"groups": [[1, 3]], "feasible_pipes": [1], "admissible_edges": "all", "multiplier": 1.0},
                "scenarios": [{"groups": [[1, 2]], "feasible_pipes": [1], "admissible_edges": [0], "multiplier": 2.0, "probability": 1.0}],
                "existing": [[1, 1]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn parses_documented_shape() {
        let two = tiny().to_instance().unwrap();
        assert_eq!(two.num_scenarios(), 1);
        assert!(two.existing().contains(0, 1));
        assert!(!two.scenario(0).is_admissible(1));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = tiny().to_json().replace("\"all\"", "\"some\"");
        let err = InstanceFile::from_json(&text).unwrap_err();
        assert!(err.to_string().starts_with("first_stage.admissible_edges"), "{err}");

        let mut file = tiny();
        file.scenarios[0].feasible_pipes = vec![2];
        let err = file.to_instance().unwrap_err();
        assert!(err.to_string().starts_with("scenarios[0].feasible_pipes[0]"), "{err}");

        let mut file = tiny();
        file.first_stage.groups = vec![vec![1, 9]];
        assert!(file.to_instance().unwrap_err().to_string().starts_with("first_stage.groups[0][1]"));

        let mut file = tiny();
        file.scenarios[0].probability = None;
        assert!(file.to_instance().unwrap_err().to_string().contains("probability"));

        let text = tiny().to_json().replace("\"multiplier\": 1.0", "\"multiplier\": 1.0, \"colour\": 3");
        assert!(InstanceFile::from_json(&text).is_err());
    }

    #[test]
    fn disconnected_group_is_rejected() {
        let mut file = tiny();
        file.first_stage.admissible_edges = EdgeSelection::List(vec![0]);
        let err = file.to_instance().unwrap_err();
        assert!(matches!(err, IoError::Instance { source: InstanceError::DisconnectedGroup(_), .. }), "{err}");
    }

    #[test]
    fn solution_file_accepts_reports() {
        let two = tiny().to_instance().unwrap();
        let sol =
            SolutionFile::from_json(r#"{"status": "optimal", "first_stage": [[1, 0], [1, 1]], "scenarios": [[]]}"#)
                .unwrap()
                .resolve(&two)
                .unwrap();
        assert_eq!(sol.first_stage.len(), 2);
        let bad = SolutionFile::from_json(r#"{"first_stage": [[1, 5]]}"#).unwrap().resolve(&two).unwrap_err();
        assert!(bad.to_string().starts_with("first_stage[0][1]"));
    }

    #[test]
    fn ship_sets() {
        let ship = ShipData::bundled();
        assert_eq!(ship.terminals(0), vec![37, 42, 53, 54, 63, 65]);
        assert_eq!(ship.terminals(1), ship.terminals(0));
        let methanol = ship.terminals(2);
        // oracle: the listed ranges counted by hand, 11 + 2 + 2 + 1 + 7 + 2 + 3 = 28
        let listed: Vec<u32> =
            (1..=11).chain([22, 23, 36, 37, 42]).chain(48..=54).chain([62, 63, 65, 66, 68]).collect();
        assert_eq!(methanol, listed);
        assert_eq!(methanol.len(), 28);
        assert_eq!(ship.forbidden().len(), 52);
        assert_eq!(ship.scenarios[1].feasible_pipes, vec![2]);
    }

    fn ship_graph(num_vertices: u32) -> (GraphSpec, PipesSpec) {
        // a path through all rooms: connected, every room present
        let edges: Vec<[u32; 2]> = (1..num_vertices).map(|v| [v, v + 1]).collect();
        let per_edge = edges.iter().map(|_| vec![1.0, 2.0]).collect();
        (
            GraphSpec { num_vertices: num_vertices as usize, labels: None, edges },
            PipesSpec { num_types: 2, base_costs: BaseCosts { per_edge } },
        )
    }

    #[test]
    fn ship_needs_every_room() {
        let (graph, pipes) = ship_graph(74);
        let err = ShipData::bundled().instance(&graph, &pipes).unwrap_err();
        assert!(err.to_string().contains("room 75"), "{err}");
    }

    #[test]
    fn ship_on_path_graph() {
        // rooms 31..=75 minus the forbidden ones are not contiguous on a path,
        // so diesel groups cannot connect while avoiding forbidden rooms
        let (graph, pipes) = ship_graph(75);
        let err = ShipData::bundled().instance(&graph, &pipes).unwrap_err();
        assert!(matches!(err, IoError::Instance { source: InstanceError::DisconnectedGroup(_), .. }), "{err}");
    }
}
