//! Scene geometry and kinematic state.
//!
//! Objects are oriented bounding boxes with part-level point clouds in
//! the box-local frame. The humanoid is a 15-body kinematic skeleton.
//! Everything here is a pure query over a state snapshot; only the
//! executor mutates states.

use crate::math::{heading_of, rotate_yaw, rotation_from_euler_xyz, wrap_angle};
use crate::plan::{Relation, TargetSpec};
use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for part points straying outside their object's box.
pub const PART_POINT_SLACK: f64 = 0.05;

/// Side length of the square heightmap grid.
pub const HEIGHTMAP_SIZE: usize = 9;

/// Spacing between heightmap lattice points, meters.
pub const HEIGHTMAP_SPACING: f64 = 0.2;

// ── Skeleton vocabulary ──────────────────────────────────────────────

/// The 15 rigid bodies of the humanoid, in canonical index order.
/// Body 0 (pelvis) is the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BodyPart {
    Pelvis,
    Torso,
    Head,
    LeftUpperArm,
    RightUpperArm,
    LeftLowerArm,
    RightLowerArm,
    LeftHand,
    RightHand,
    LeftThigh,
    RightThigh,
    LeftShin,
    RightShin,
    LeftFoot,
    RightFoot,
}

/// Number of rigid bodies in the skeleton.
pub const BODY_COUNT: usize = 15;

impl BodyPart {
    /// All bodies in canonical order.
    pub const ALL: [BodyPart; BODY_COUNT] = [
        BodyPart::Pelvis,
        BodyPart::Torso,
        BodyPart::Head,
        BodyPart::LeftUpperArm,
        BodyPart::RightUpperArm,
        BodyPart::LeftLowerArm,
        BodyPart::RightLowerArm,
        BodyPart::LeftHand,
        BodyPart::RightHand,
        BodyPart::LeftThigh,
        BodyPart::RightThigh,
        BodyPart::LeftShin,
        BodyPart::RightShin,
        BodyPart::LeftFoot,
        BodyPart::RightFoot,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|p| *p == self).unwrap()
    }

    pub fn token(self) -> &'static str {
        match self {
            BodyPart::Pelvis => "pelvis",
            BodyPart::Torso => "torso",
            BodyPart::Head => "head",
            BodyPart::LeftUpperArm => "left_upper_arm",
            BodyPart::RightUpperArm => "right_upper_arm",
            BodyPart::LeftLowerArm => "left_lower_arm",
            BodyPart::RightLowerArm => "right_lower_arm",
            BodyPart::LeftHand => "left_hand",
            BodyPart::RightHand => "right_hand",
            BodyPart::LeftThigh => "left_thigh",
            BodyPart::RightThigh => "right_thigh",
            BodyPart::LeftShin => "left_shin",
            BodyPart::RightShin => "right_shin",
            BodyPart::LeftFoot => "left_foot",
            BodyPart::RightFoot => "right_foot",
        }
    }

    pub fn from_token(token: &str) -> Option<BodyPart> {
        Self::ALL.iter().copied().find(|p| p.token() == token)
    }

    pub fn is_hand(self) -> bool {
        matches!(self, BodyPart::LeftHand | BodyPart::RightHand)
    }
}

// ── Geometry ─────────────────────────────────────────────────────────

/// Oriented bounding box: axis-aligned in the object's local frame,
/// carried into the world by a center and a heading.
#[derive(Debug, Clone, PartialEq)]
pub struct Aabb {
    pub center: Vector3<f64>,
    pub half_extents: Vector3<f64>,
    pub yaw: f64,
}

impl Aabb {
    /// Full edge lengths `(lx, ly, lz)`.
    pub fn edge_lengths(&self) -> Vector3<f64> {
        self.half_extents * 2.0
    }
}

/// A named point cloud in the object-local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectPart {
    pub name: String,
    pub points: Vec<Vector3<f64>>,
}

/// Kinematic state of one object: pose plus world-frame velocities.
/// Rotation is intrinsic XYZ Euler, wrapped to `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    pub position: Vector3<f64>,
    pub rotation: Vector3<f64>,
    pub linear_velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

impl ObjectState {
    pub fn at_rest(position: Vector3<f64>, rotation: Vector3<f64>) -> ObjectState {
        ObjectState {
            position,
            rotation: rotation.map(wrap_angle),
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
        }
    }

    pub fn rotation_quat(&self) -> UnitQuaternion<f64> {
        rotation_from_euler_xyz(self.rotation)
    }

    /// Heading of the object's local x axis; falls back to the Euler z
    /// slot when the x axis points straight up or down.
    pub fn yaw(&self) -> f64 {
        heading_of(&self.rotation_quat()).unwrap_or(self.rotation.z)
    }
}

/// Hinge constraint for an articulated leaf: the object may only rotate
/// about `axis` through the world-frame `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hinge {
    pub anchor: Vector3<f64>,
    pub axis: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub aabb: Aabb,
    pub parts: Vec<ObjectPart>,
    pub movable: bool,
    pub hinge: Option<Hinge>,
    pub state: ObjectState,
}

impl SceneObject {
    pub fn part(&self, name: &str) -> Option<&ObjectPart> {
        self.parts.iter().find(|p| p.name == name)
    }

    /// Transform a local point into the world via the current state.
    pub fn world_point(&self, local: Vector3<f64>) -> Vector3<f64> {
        self.state.position + self.state.rotation_quat() * local
    }
}

/// Regular grid of ground elevations. Samples outside the grid read 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundGrid {
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl GroundGrid {
    /// Elevation of the cell containing `(x, y)`, 0 outside the grid.
    pub fn elevation(&self, x: f64, y: f64) -> f64 {
        let i = ((x - self.origin[0]) / self.cell_size).floor();
        let j = ((y - self.origin[1]) / self.cell_size).floor();
        if i < 0.0 || j < 0.0 {
            return 0.0;
        }
        let (i, j) = (i as usize, j as usize);
        if i >= self.rows || j >= self.cols {
            return 0.0;
        }
        self.values[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    pub ground: Option<GroundGrid>,
}

impl Scene {
    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn object_mut(&mut self, name: &str) -> Option<&mut SceneObject> {
        self.objects.iter_mut().find(|o| o.name == name)
    }

    /// Resolve a bare part token against the scene. Objects named in
    /// `preferred` (in order) are searched first, then the remaining
    /// objects in declaration order; the first object declaring a part
    /// with that name wins.
    pub fn resolve_part(&self, preferred: &[&str], part: &str) -> Option<(&SceneObject, &ObjectPart)> {
        for name in preferred {
            if let Some(obj) = self.object(name) {
                if let Some(p) = obj.part(part) {
                    return Some((obj, p));
                }
            }
        }
        self.objects
            .iter()
            .find_map(|obj| obj.part(part).map(|p| (obj, p)))
    }

    pub fn ground_elevation(&self, x: f64, y: f64) -> f64 {
        self.ground.as_ref().map_or(0.0, |g| g.elevation(x, y))
    }
}

// ── Skeleton state ───────────────────────────────────────────────────

/// Kinematics of one rigid body. `rotation` is a unit quaternion by
/// construction, which is what keeps the skeleton's unit-norm invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyState {
    pub position: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
    pub linear_velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

/// Snapshot of the 15-body skeleton. Index order is [`BodyPart::ALL`].
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    bodies: Vec<BodyState>,
}

impl AgentState {
    /// Build from exactly 15 body states in canonical order.
    pub fn new(bodies: Vec<BodyState>) -> AgentState {
        assert_eq!(bodies.len(), BODY_COUNT, "skeleton needs {BODY_COUNT} bodies");
        AgentState { bodies }
    }

    pub fn bodies(&self) -> &[BodyState] {
        &self.bodies
    }

    pub fn body(&self, part: BodyPart) -> &BodyState {
        &self.bodies[part.index()]
    }

    pub fn body_mut(&mut self, part: BodyPart) -> &mut BodyState {
        &mut self.bodies[part.index()]
    }

    pub fn root(&self) -> &BodyState {
        &self.bodies[0]
    }

    /// An upright rest pose with the root at `(x, y, 0.95)`, facing
    /// along `yaw`, all velocities zero.
    pub fn standing_pose(x: f64, y: f64, yaw: f64) -> AgentState {
        let offsets: [(BodyPart, [f64; 3]); BODY_COUNT] = [
            (BodyPart::Pelvis, [0.0, 0.0, 0.95]),
            (BodyPart::Torso, [0.0, 0.0, 1.25]),
            (BodyPart::Head, [0.0, 0.0, 1.55]),
            (BodyPart::LeftUpperArm, [0.0, 0.25, 1.40]),
            (BodyPart::RightUpperArm, [0.0, -0.25, 1.40]),
            (BodyPart::LeftLowerArm, [0.0, 0.30, 1.15]),
            (BodyPart::RightLowerArm, [0.0, -0.30, 1.15]),
            (BodyPart::LeftHand, [0.0, 0.32, 0.95]),
            (BodyPart::RightHand, [0.0, -0.32, 0.95]),
            (BodyPart::LeftThigh, [0.0, 0.10, 0.70]),
            (BodyPart::RightThigh, [0.0, -0.10, 0.70]),
            (BodyPart::LeftShin, [0.0, 0.10, 0.35]),
            (BodyPart::RightShin, [0.0, -0.10, 0.35]),
            (BodyPart::LeftFoot, [0.05, 0.10, 0.05]),
            (BodyPart::RightFoot, [0.05, -0.10, 0.05]),
        ];
        let rot = crate::math::yaw_quaternion(yaw);
        let base = Vector3::new(x, y, 0.0);
        let bodies = offsets
            .iter()
            .map(|(_, off)| BodyState {
                position: base + rotate_yaw(Vector3::new(off[0], off[1], off[2]), yaw),
                rotation: rot,
                linear_velocity: Vector3::zeros(),
                angular_velocity: Vector3::zeros(),
            })
            .collect();
        AgentState::new(bodies)
    }
}

// ── Queries ──────────────────────────────────────────────────────────

#[derive(Debug, Error, PartialEq)]
pub enum TargetError {
    #[error("unknown object: {0}")]
    UnknownObject(String),
}

/// World-frame point for an `object(relation)` target: the object's
/// current center displaced by 0.7 of the relevant edge length along
/// the relation axis, in the object's yaw-aligned frame.
pub fn resolve_target(spec: &TargetSpec, scene: &Scene) -> Result<Vector3<f64>, TargetError> {
    let obj = scene
        .object(&spec.object)
        .ok_or_else(|| TargetError::UnknownObject(spec.object.clone()))?;
    let l = obj.aabb.edge_lengths();
    let d = match spec.relation {
        Relation::Center => Vector3::zeros(),
        Relation::Forward => Vector3::new(0.7 * l.x, 0.0, 0.0),
        Relation::Back => Vector3::new(-0.7 * l.x, 0.0, 0.0),
        Relation::Left => Vector3::new(0.0, 0.7 * l.y, 0.0),
        Relation::Right => Vector3::new(0.0, -0.7 * l.y, 0.0),
        Relation::Up => Vector3::new(0.0, 0.0, 0.7 * l.z),
        Relation::Down => Vector3::new(0.0, 0.0, -0.7 * l.z),
    };
    Ok(obj.state.position + rotate_yaw(d, obj.state.yaw()))
}

/// Nearest part point to `query`, in world coordinates, with its index.
/// Ties break toward the lowest index.
pub fn nearest_surface_point(
    part: &ObjectPart,
    state: &ObjectState,
    query: Vector3<f64>,
) -> (Vector3<f64>, usize) {
    assert!(!part.points.is_empty(), "part {} has no points", part.name);
    let rot = state.rotation_quat();
    let mut best = (Vector3::zeros(), 0usize);
    let mut best_d2 = f64::INFINITY;
    for (i, local) in part.points.iter().enumerate() {
        let world = state.position + rot * local;
        let d2 = (world - query).norm_squared();
        if d2 < best_d2 {
            best_d2 = d2;
            best = (world, i);
        }
    }
    best
}

/// Rigid-body velocity of a world point carried by the object:
/// `v + w x (p - c)`.
pub fn surface_point_velocity(state: &ObjectState, point_world: Vector3<f64>) -> Vector3<f64> {
    state.linear_velocity + state.angular_velocity.cross(&(point_world - state.position))
}

/// 9x9 grid of elevations sampled on a lattice centered under the root,
/// axes aligned with the root heading, 0.2 m spacing. Entry `[i][j]`
/// (flattened row-major) sits at local offset
/// `((i-4) * 0.2, (j-4) * 0.2)` — row axis forward, column axis left.
/// Each sample is the maximum of the ground elevation and the tops of
/// objects whose yaw-aligned footprint covers the point.
pub fn sample_heightmap(scene: &Scene, agent: &AgentState) -> [f64; HEIGHTMAP_SIZE * HEIGHTMAP_SIZE] {
    let root = agent.root();
    let yaw = heading_of(&root.rotation).unwrap_or(0.0);
    let mut out = [0.0; HEIGHTMAP_SIZE * HEIGHTMAP_SIZE];
    let half = (HEIGHTMAP_SIZE / 2) as f64;
    for i in 0..HEIGHTMAP_SIZE {
        for j in 0..HEIGHTMAP_SIZE {
            let off = Vector3::new(
                (i as f64 - half) * HEIGHTMAP_SPACING,
                (j as f64 - half) * HEIGHTMAP_SPACING,
                0.0,
            );
            let p = root.position + rotate_yaw(off, yaw);
            let mut h = scene.ground_elevation(p.x, p.y);
            for obj in &scene.objects {
                let local = rotate_yaw(p - obj.state.position, -obj.state.yaw());
                if local.x.abs() <= obj.aabb.half_extents.x && local.y.abs() <= obj.aabb.half_extents.y
                {
                    h = h.max(obj.state.position.z + obj.aabb.half_extents.z);
                }
            }
            out[i * HEIGHTMAP_SIZE + j] = h;
        }
    }
    out
}

// ── Scene documents ──────────────────────────────────────────────────

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("scene schema error: {0}")]
    Schema(String),
}

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    objects: Vec<ObjectDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground: Option<GroundDoc>,
}

#[derive(Serialize, Deserialize)]
struct ObjectDoc {
    name: String,
    movable: bool,
    aabb: AabbDoc,
    parts: Vec<PartDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_state: Option<StateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hinge: Option<HingeDoc>,
}

#[derive(Serialize, Deserialize)]
struct AabbDoc {
    center: [f64; 3],
    size: [f64; 3],
    yaw: f64,
}

#[derive(Serialize, Deserialize)]
struct PartDoc {
    name: String,
    points: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize, Default)]
struct StateDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear_velocity: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angular_velocity: Option<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct HingeDoc {
    anchor: [f64; 3],
    axis: [f64; 3],
}

fn vec3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

fn arr3(v: Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Parse a UTF-8 JSON scene document.
pub fn load_scene(document: &str) -> Result<Scene, SceneError> {
    let doc: SceneDoc = serde_json::from_str(document).map_err(|e| {
        if e.classify() == serde_json::error::Category::Syntax {
            SceneError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            SceneError::Schema(e.to_string())
        }
    })?;

    let mut objects = Vec::with_capacity(doc.objects.len());
    for od in doc.objects {
        if objects.iter().any(|o: &SceneObject| o.name == od.name) {
            return Err(SceneError::Schema(format!("duplicate object name: {}", od.name)));
        }
        let he = vec3(od.aabb.size) * 0.5;
        if he.x <= 0.0 || he.y <= 0.0 || he.z <= 0.0 {
            return Err(SceneError::Schema(format!(
                "object {}: aabb size must be strictly positive",
                od.name
            )));
        }
        let mut parts = Vec::with_capacity(od.parts.len());
        for pd in od.parts {
            if parts.iter().any(|p: &ObjectPart| p.name == pd.name) {
                return Err(SceneError::Schema(format!(
                    "object {}: duplicate part name: {}",
                    od.name, pd.name
                )));
            }
            if pd.points.is_empty() {
                return Err(SceneError::Schema(format!(
                    "object {}: part {} has an empty point list",
                    od.name, pd.name
                )));
            }
            let points: Vec<Vector3<f64>> = pd.points.into_iter().map(vec3).collect();
            for (i, p) in points.iter().enumerate() {
                let inside = p.x.abs() <= he.x + PART_POINT_SLACK
                    && p.y.abs() <= he.y + PART_POINT_SLACK
                    && p.z.abs() <= he.z + PART_POINT_SLACK;
                if !inside {
                    return Err(SceneError::Schema(format!(
                        "object {}: part {}: point {} lies outside the bounding box (> {} m slack)",
                        od.name, pd.name, i, PART_POINT_SLACK
                    )));
                }
            }
            parts.push(ObjectPart { name: pd.name, points });
        }
        let hinge = match od.hinge {
            None => None,
            Some(h) => {
                let axis = vec3(h.axis);
                if axis.norm() < 1e-9 {
                    return Err(SceneError::Schema(format!(
                        "object {}: hinge axis must be non-zero",
                        od.name
                    )));
                }
                Some(Hinge {
                    anchor: vec3(h.anchor),
                    axis: axis.normalize(),
                })
            }
        };
        let sd = od.initial_state.unwrap_or_default();
        let state = ObjectState {
            position: sd.position.map(vec3).unwrap_or_else(|| vec3(od.aabb.center)),
            rotation: sd
                .rotation
                .map(vec3)
                .unwrap_or_else(|| Vector3::new(0.0, 0.0, od.aabb.yaw))
                .map(wrap_angle),
            linear_velocity: sd.linear_velocity.map(vec3).unwrap_or_else(Vector3::zeros),
            angular_velocity: sd.angular_velocity.map(vec3).unwrap_or_else(Vector3::zeros),
        };
        objects.push(SceneObject {
            name: od.name,
            aabb: Aabb {
                center: vec3(od.aabb.center),
                half_extents: he,
                yaw: od.aabb.yaw,
            },
            parts,
            movable: od.movable,
            hinge,
            state,
        });
    }

    let ground = match doc.ground {
        None => None,
        Some(g) => {
            if g.cell_size <= 0.0 {
                return Err(SceneError::Schema("ground cell_size must be positive".into()));
            }
            if g.values.len() != g.rows * g.cols {
                return Err(SceneError::Schema(format!(
                    "ground grid expects {} values, got {}",
                    g.rows * g.cols,
                    g.values.len()
                )));
            }
            Some(GroundGrid {
                origin: g.origin,
                cell_size: g.cell_size,
                rows: g.rows,
                cols: g.cols,
                values: g.values,
            })
        }
    };

    Ok(Scene { objects, ground })
}

#[derive(Serialize, Deserialize)]
struct GroundDoc {
    origin: [f64; 2],
    cell_size: f64,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

/// Serialize a scene back to its document form (pretty JSON).
pub fn save_scene(scene: &Scene) -> String {
    let doc = SceneDoc {
        objects: scene
            .objects
            .iter()
            .map(|o| ObjectDoc {
                name: o.name.clone(),
                movable: o.movable,
                aabb: AabbDoc {
                    center: arr3(o.aabb.center),
                    size: arr3(o.aabb.edge_lengths()),
                    yaw: o.aabb.yaw,
                },
                parts: o
                    .parts
                    .iter()
                    .map(|p| PartDoc {
                        name: p.name.clone(),
                        points: p.points.iter().map(|q| arr3(*q)).collect(),
                    })
                    .collect(),
                initial_state: Some(StateDoc {
                    position: Some(arr3(o.state.position)),
                    rotation: Some(arr3(o.state.rotation)),
                    linear_velocity: Some(arr3(o.state.linear_velocity)),
                    angular_velocity: Some(arr3(o.state.angular_velocity)),
                }),
                hinge: o.hinge.as_ref().map(|h| HingeDoc {
                    anchor: arr3(h.anchor),
                    axis: arr3(h.axis),
                }),
            })
            .collect(),
        ground: scene.ground.as_ref().map(|g| GroundDoc {
            origin: g.origin,
            cell_size: g.cell_size,
            rows: g.rows,
            cols: g.cols,
            values: g.values.clone(),
        }),
    };
    serde_json::to_string_pretty(&doc).expect("scene serialization cannot fail")
}
