//! Interaction-plan document model: parser, serializer and validator.
//!
//! A plan is the planner's structured output — an ordered list of
//! interaction steps, each holding a human destination, an optional
//! object destination, and a bipartite graph whose edges pair a human
//! body part with an object part under one of four relative-motion
//! patterns.
//!
//! Documents are UTF-8 JSON:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "scene_id": "living_room",
//!   "instruction": "sit on the couch",
//!   "steps": [
//!     {
//!       "label": "sit",
//!       "human_target": {"object": "couch", "relation": "forward"},
//!       "object_target": null,
//!       "edges": [
//!         {"human_part": "pelvis", "object_part": "seat", "dynamic": "approach"}
//!       ]
//!     }
//!   ]
//! }
//! ```
//!
//! Parsing rejects closed-vocabulary violations (dynamics, relations)
//! and structural defects; unknown extra fields are ignored with a
//! warning, since planner output tends to carry benign extras.
//! Scene-dependent checks (name resolution, duplicate edges, empty
//! graphs, required object destinations) live in [`validate_plan`] and
//! come back as data, not errors.

use crate::scene::{BodyPart, Scene};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use thiserror::Error;

/// Relative-motion pattern of one (human part, object part) edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MovementDynamic {
    Stationary,
    Approach,
    Leave,
    Free,
}

impl MovementDynamic {
    pub const ALL: [MovementDynamic; 4] = [
        MovementDynamic::Stationary,
        MovementDynamic::Approach,
        MovementDynamic::Leave,
        MovementDynamic::Free,
    ];

    /// Integer code, 0..=3 in declaration order.
    pub fn code(self) -> u8 {
        match self {
            MovementDynamic::Stationary => 0,
            MovementDynamic::Approach => 1,
            MovementDynamic::Leave => 2,
            MovementDynamic::Free => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<MovementDynamic> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn token(self) -> &'static str {
        match self {
            MovementDynamic::Stationary => "stationary",
            MovementDynamic::Approach => "approach",
            MovementDynamic::Leave => "leave",
            MovementDynamic::Free => "free",
        }
    }

    pub fn from_token(token: &str) -> Option<MovementDynamic> {
        Self::ALL.iter().copied().find(|d| d.token() == token)
    }

    /// One-hot encoding over the four codes.
    pub fn one_hot(self) -> [f64; 4] {
        let mut v = [0.0; 4];
        v[self.code() as usize] = 1.0;
        v
    }
}

/// One of the seven spatial-relation tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Center,
    Forward,
    Back,
    Left,
    Right,
    Up,
    Down,
}

impl Relation {
    pub const ALL: [Relation; 7] = [
        Relation::Center,
        Relation::Forward,
        Relation::Back,
        Relation::Left,
        Relation::Right,
        Relation::Up,
        Relation::Down,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Relation::Center => "center",
            Relation::Forward => "forward",
            Relation::Back => "back",
            Relation::Left => "left",
            Relation::Right => "right",
            Relation::Up => "up",
            Relation::Down => "down",
        }
    }

    pub fn from_token(token: &str) -> Option<Relation> {
        Self::ALL.iter().copied().find(|r| r.token() == token)
    }
}

/// `object(relation)` destination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub object: String,
    pub relation: Relation,
}

/// One bipartite edge. Part names are bare tokens; the object part
/// resolves against the scene at validation/execution time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub human_part: String,
    pub object_part: String,
    pub dynamic: MovementDynamic,
}

/// Ordered edge list; the position of an edge fixes its feature-block
/// index downstream.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RmdGraphSpec {
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionStep {
    pub label: String,
    pub human_target: TargetSpec,
    pub object_target: Option<TargetSpec>,
    #[serde(rename = "edges")]
    pub graph: RmdGraphSpec,
}

/// A full interaction plan. Step indices are implicit by position
/// (1-based in messages).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub scene_id: String,
    pub instruction: String,
    pub steps: Vec<InteractionStep>,
}

/// Version emitted and accepted by this schema.
pub const PLAN_SCHEMA_VERSION: u64 = 1;

// ── Errors ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PlanError {
    #[error("plan syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("plan schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("plan domain error at {path}: {message}")]
    Domain { path: String, message: String },
}

fn schema(path: &str, message: impl Into<String>) -> PlanError {
    PlanError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

// ── Parsing ──────────────────────────────────────────────────────────

fn expect_object<'v>(
    v: &'v Value,
    path: &str,
) -> Result<&'v serde_json::Map<String, Value>, PlanError> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn expect_str<'v>(map: &'v serde_json::Map<String, Value>, key: &str, path: &str) -> Result<&'v str, PlanError> {
    let field_path = format!("{path}.{key}");
    map.get(key)
        .ok_or_else(|| schema(path, format!("missing field `{key}`")))?
        .as_str()
        .ok_or_else(|| schema(&field_path, "expected a string"))
}

fn expect_array<'v>(map: &'v serde_json::Map<String, Value>, key: &str, path: &str) -> Result<&'v Vec<Value>, PlanError> {
    let field_path = format!("{path}.{key}");
    map.get(key)
        .ok_or_else(|| schema(path, format!("missing field `{key}`")))?
        .as_array()
        .ok_or_else(|| schema(&field_path, "expected an array"))
}

fn note_unknown_fields(
    map: &serde_json::Map<String, Value>,
    allowed: &[&str],
    path: &str,
    warnings: &mut Vec<String>,
) {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            warnings.push(format!("ignoring unknown field `{key}` at {path}"));
        }
    }
}

fn parse_target(v: &Value, path: &str, warnings: &mut Vec<String>) -> Result<TargetSpec, PlanError> {
    let map = expect_object(v, path)?;
    note_unknown_fields(map, &["object", "relation"], path, warnings);
    let object = expect_str(map, "object", path)?.to_string();
    let token = expect_str(map, "relation", path)?;
    let relation = Relation::from_token(token).ok_or_else(|| PlanError::Domain {
        path: format!("{path}.relation"),
        message: format!("unknown relation token `{token}`"),
    })?;
    Ok(TargetSpec { object, relation })
}

fn parse_edge(v: &Value, path: &str, warnings: &mut Vec<String>) -> Result<EdgeSpec, PlanError> {
    let map = expect_object(v, path)?;
    note_unknown_fields(map, &["human_part", "object_part", "dynamic"], path, warnings);
    let human_part = expect_str(map, "human_part", path)?.to_string();
    let object_part = expect_str(map, "object_part", path)?.to_string();
    let token = expect_str(map, "dynamic", path)?;
    let dynamic = MovementDynamic::from_token(token).ok_or_else(|| {
        schema(&format!("{path}.dynamic"), format!("unknown dynamics token `{token}`"))
    })?;
    Ok(EdgeSpec {
        human_part,
        object_part,
        dynamic,
    })
}

/// Parse a plan document, collecting warnings for ignored extras.
pub fn parse_plan_with_warnings(document: &str) -> Result<(Plan, Vec<String>), PlanError> {
    let value: Value = serde_json::from_str(document).map_err(|e| PlanError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut warnings = Vec::new();
    let root = expect_object(&value, "$")?;
    note_unknown_fields(
        root,
        &["schema_version", "scene_id", "instruction", "steps"],
        "$",
        &mut warnings,
    );

    let version = root
        .get("schema_version")
        .ok_or_else(|| schema("$", "missing field `schema_version`"))?
        .as_u64()
        .ok_or_else(|| schema("$.schema_version", "expected an integer"))?;
    if version != PLAN_SCHEMA_VERSION {
        return Err(schema(
            "$.schema_version",
            format!("unsupported schema version {version}, expected {PLAN_SCHEMA_VERSION}"),
        ));
    }

    let scene_id = expect_str(root, "scene_id", "$")?.to_string();
    let instruction = expect_str(root, "instruction", "$")?.to_string();

    let steps_raw = expect_array(root, "steps", "$")?;
    if steps_raw.is_empty() {
        return Err(schema("$.steps", "a plan needs at least one step"));
    }
    let mut steps = Vec::with_capacity(steps_raw.len());
    for (si, sv) in steps_raw.iter().enumerate() {
        let spath = format!("$.steps[{si}]");
        let smap = expect_object(sv, &spath)?;
        note_unknown_fields(
            smap,
            &["label", "human_target", "object_target", "edges"],
            &spath,
            &mut warnings,
        );
        let label = expect_str(smap, "label", &spath)?.to_string();
        let human_target = parse_target(
            smap.get("human_target")
                .ok_or_else(|| schema(&spath, "missing field `human_target`"))?,
            &format!("{spath}.human_target"),
            &mut warnings,
        )?;
        let object_target = match smap.get("object_target") {
            None | Some(Value::Null) => None,
            Some(v) => Some(parse_target(v, &format!("{spath}.object_target"), &mut warnings)?),
        };
        let edges_raw = expect_array(smap, "edges", &spath)?;
        let mut edges = Vec::with_capacity(edges_raw.len());
        for (ei, ev) in edges_raw.iter().enumerate() {
            edges.push(parse_edge(ev, &format!("{spath}.edges[{ei}]"), &mut warnings)?);
        }
        steps.push(InteractionStep {
            label,
            human_target,
            object_target,
            graph: RmdGraphSpec { edges },
        });
    }

    Ok((
        Plan {
            scene_id,
            instruction,
            steps,
        },
        warnings,
    ))
}

/// Parse a plan document, discarding warnings.
pub fn parse_plan(document: &str) -> Result<Plan, PlanError> {
    parse_plan_with_warnings(document).map(|(plan, _)| plan)
}

// ── Serialization ────────────────────────────────────────────────────

#[derive(Serialize)]
struct PlanDoc<'a> {
    schema_version: u64,
    scene_id: &'a str,
    instruction: &'a str,
    steps: &'a [InteractionStep],
}

/// Serialize a plan to its document form. `parse_plan(serialize_plan(p))`
/// returns `p` field for field, and the output is byte-stable.
pub fn serialize_plan(plan: &Plan) -> String {
    assert!(!plan.steps.is_empty(), "refusing to serialize a plan without steps");
    let doc = PlanDoc {
        schema_version: PLAN_SCHEMA_VERSION,
        scene_id: &plan.scene_id,
        instruction: &plan.instruction,
        steps: &plan.steps,
    };
    serde_json::to_string_pretty(&doc).expect("plan serialization cannot fail")
}

// ── Validation ───────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownObject,
    UnknownHumanPart,
    UnknownObjectPart,
    DuplicateEdge,
    EmptyGraph,
    MissingObjectTarget,
}

/// One rule violation; `step` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub step: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.message)
    }
}

/// Check a parsed plan against a scene. Returns every violation found;
/// an empty list means the plan is executable.
pub fn validate_plan(plan: &Plan, scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    for (si, step) in plan.steps.iter().enumerate() {
        let step_no = si + 1;
        let mut push = |kind, message: String| {
            out.push(Violation {
                kind,
                step: step_no,
                message,
            })
        };

        let mut preferred: Vec<&str> = Vec::new();
        if let Some(t) = &step.object_target {
            preferred.push(t.object.as_str());
        }
        preferred.push(step.human_target.object.as_str());

        if scene.object(&step.human_target.object).is_none() {
            push(
                ViolationKind::UnknownObject,
                format!("unknown object: {}", step.human_target.object),
            );
        }
        if let Some(t) = &step.object_target {
            if scene.object(&t.object).is_none() {
                push(ViolationKind::UnknownObject, format!("unknown object: {}", t.object));
            }
        }

        if step.graph.edges.is_empty() {
            push(ViolationKind::EmptyGraph, "empty graph".to_string());
        }

        let mut seen: Vec<(&str, &str)> = Vec::new();
        let mut moves_movable = false;
        for edge in &step.graph.edges {
            if BodyPart::from_token(&edge.human_part).is_none() {
                push(
                    ViolationKind::UnknownHumanPart,
                    format!("unknown human part: {}", edge.human_part),
                );
            }
            match scene.resolve_part(&preferred, &edge.object_part) {
                None => push(
                    ViolationKind::UnknownObjectPart,
                    format!("unknown object part: {}", edge.object_part),
                ),
                Some((obj, _)) => {
                    if obj.movable
                        && matches!(
                            edge.dynamic,
                            MovementDynamic::Stationary | MovementDynamic::Approach
                        )
                    {
                        moves_movable = true;
                    }
                }
            }
            let pair = (edge.human_part.as_str(), edge.object_part.as_str());
            if seen.contains(&pair) {
                push(
                    ViolationKind::DuplicateEdge,
                    format!("duplicate edge: ({}, {})", pair.0, pair.1),
                );
            } else {
                seen.push(pair);
            }
        }

        if moves_movable && step.object_target.is_none() {
            push(
                ViolationKind::MissingObjectTarget,
                "missing object_target for a step that holds or approaches a movable object"
                    .to_string(),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::load_scene;

    const SIT_PLAN: &str = r#"{
      "schema_version": 1,
      "scene_id": "couch_box",
      "instruction": "sit on the couch",
      "steps": [
        {
          "label": "sit",
          "human_target": {"object": "couch", "relation": "forward"},
          "object_target": null,
          "edges": [
            {"human_part": "pelvis", "object_part": "seat", "dynamic": "approach"},
            {"human_part": "left_hand", "object_part": "backrest", "dynamic": "free"}
          ]
        }
      ]
    }"#;

    const COUCH_SCENE: &str = r#"{
      "objects": [
        {
          "name": "couch",
          "movable": false,
          "aabb": {"center": [4.0, 0.0, 0.4], "size": [0.9, 1.7, 0.8], "yaw": 0.0},
          "parts": [
            {"name": "seat", "points": [[0.1, 0.0, 0.05]]},
            {"name": "backrest", "points": [[-0.35, 0.0, 0.2]]}
          ]
        }
      ]
    }"#;

    #[test]
    fn parses_one_step_plan() {
        let plan = parse_plan(SIT_PLAN).unwrap();
        assert_eq!(plan.scene_id, "couch_box");
        assert_eq!(plan.steps.len(), 1);
        let step = &plan.steps[0];
        assert_eq!(step.label, "sit");
        assert_eq!(step.human_target.object, "couch");
        assert_eq!(step.human_target.relation, Relation::Forward);
        assert!(step.object_target.is_none());
        let codes: Vec<u8> = step.graph.edges.iter().map(|e| e.dynamic.code()).collect();
        assert_eq!(codes, [1, 3]);
    }

    #[test]
    fn rejects_unknown_dynamics_token() {
        let doc = SIT_PLAN.replace("\"approach\"", "\"hover\"");
        let err = parse_plan(&doc).unwrap_err();
        match &err {
            PlanError::Schema { message, .. } => assert!(message.contains("hover"), "{message}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_relation_token() {
        let doc = SIT_PLAN.replace("\"forward\"", "\"above\"");
        let err = parse_plan(&doc).unwrap_err();
        match &err {
            PlanError::Domain { message, .. } => assert!(message.contains("above"), "{message}"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_plan("{\"schema_version\": 1,,}").unwrap_err();
        match err {
            PlanError::Syntax { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 0);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_schema_error() {
        let doc = SIT_PLAN.replace("\"label\": \"sit\",", "");
        let err = parse_plan(&doc).unwrap_err();
        match &err {
            PlanError::Schema { message, path } => {
                assert!(message.contains("label"), "{message}");
                assert!(path.contains("steps[0]"), "{path}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn empty_steps_rejected() {
        let doc = r#"{"schema_version": 1, "scene_id": "s", "instruction": "i", "steps": []}"#;
        assert!(matches!(parse_plan(doc), Err(PlanError::Schema { .. })));
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let doc = SIT_PLAN.replace("\"schema_version\": 1", "\"schema_version\": 2");
        let err = parse_plan(&doc).unwrap_err();
        assert!(err.to_string().contains("schema version"), "{err}");
    }

    #[test]
    fn unknown_extra_fields_warn_but_parse() {
        let doc = SIT_PLAN.replace(
            "\"label\": \"sit\",",
            "\"label\": \"sit\", \"confidence\": 0.9,",
        );
        let (plan, warnings) = parse_plan_with_warnings(&doc).unwrap();
        assert_eq!(plan.steps.len(), 1);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("confidence"), "{}", warnings[0]);
    }

    #[test]
    fn round_trip_identity_and_stable_bytes() {
        let plan = parse_plan(SIT_PLAN).unwrap();
        let a = serialize_plan(&plan);
        let b = serialize_plan(&plan);
        assert_eq!(a, b);
        assert_eq!(parse_plan(&a).unwrap(), plan);
    }

    #[test]
    fn valid_plan_has_no_violations() {
        let plan = parse_plan(SIT_PLAN).unwrap();
        let scene = load_scene(COUCH_SCENE).unwrap();
        assert!(validate_plan(&plan, &scene).is_empty());
    }

    #[test]
    fn unknown_object_violation() {
        let plan = parse_plan(&SIT_PLAN.replace("\"couch\", \"relation\": \"forward\"", "\"desk\", \"relation\": \"forward\"")).unwrap();
        let scene = load_scene(COUCH_SCENE).unwrap();
        let report = validate_plan(&plan, &scene);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].kind, ViolationKind::UnknownObject);
        assert_eq!(report[0].message, "unknown object: desk");
    }

    #[test]
    fn duplicate_edge_violation() {
        let doc = SIT_PLAN.replace(
            "{\"human_part\": \"left_hand\", \"object_part\": \"backrest\", \"dynamic\": \"free\"}",
            "{\"human_part\": \"pelvis\", \"object_part\": \"seat\", \"dynamic\": \"approach\"}",
        );
        let plan = parse_plan(&doc).unwrap();
        let scene = load_scene(COUCH_SCENE).unwrap();
        let report = validate_plan(&plan, &scene);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].kind, ViolationKind::DuplicateEdge);
    }

    #[test]
    fn empty_graph_violation() {
        let doc = SIT_PLAN
            .replace(
                "{\"human_part\": \"pelvis\", \"object_part\": \"seat\", \"dynamic\": \"approach\"},",
                "",
            )
            .replace(
                "{\"human_part\": \"left_hand\", \"object_part\": \"backrest\", \"dynamic\": \"free\"}",
                "",
            );
        let plan = parse_plan(&doc).unwrap();
        let scene = load_scene(COUCH_SCENE).unwrap();
        let report = validate_plan(&plan, &scene);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].kind, ViolationKind::EmptyGraph);
    }

    #[test]
    fn unknown_parts_reported() {
        let doc = SIT_PLAN
            .replace("\"pelvis\"", "\"tail\"")
            .replace("\"backrest\"", "\"wing\"");
        let plan = parse_plan(&doc).unwrap();
        let scene = load_scene(COUCH_SCENE).unwrap();
        let report = validate_plan(&plan, &scene);
        let kinds: Vec<ViolationKind> = report.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::UnknownHumanPart));
        assert!(kinds.contains(&ViolationKind::UnknownObjectPart));
    }

    #[test]
    fn movable_object_needs_destination() {
        let scene_doc = r#"{
          "objects": [
            {"name": "box", "movable": true,
             "aabb": {"center": [1.0, 0.0, 0.15], "size": [0.3, 0.3, 0.3], "yaw": 0.0},
             "parts": [{"name": "grip", "points": [[0.0, 0.15, 0.0]]}]}
          ]
        }"#;
        let plan_doc = r#"{
          "schema_version": 1, "scene_id": "s", "instruction": "grab the box",
          "steps": [{
            "label": "grab",
            "human_target": {"object": "box", "relation": "forward"},
            "object_target": null,
            "edges": [{"human_part": "right_hand", "object_part": "grip", "dynamic": "approach"}]
          }]
        }"#;
        let plan = parse_plan(plan_doc).unwrap();
        let scene = load_scene(scene_doc).unwrap();
        let report = validate_plan(&plan, &scene);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].kind, ViolationKind::MissingObjectTarget);
    }

    #[test]
    fn dynamics_codes_round_trip() {
        for d in MovementDynamic::ALL {
            assert_eq!(MovementDynamic::from_code(d.code()), Some(d));
            assert_eq!(MovementDynamic::from_token(d.token()), Some(d));
            let hot = d.one_hot();
            assert_eq!(hot.iter().sum::<f64>(), 1.0);
            assert_eq!(hot[d.code() as usize], 1.0);
        }
        assert_eq!(MovementDynamic::from_code(4), None);
    }
}
