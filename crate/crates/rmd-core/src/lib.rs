//! Relative-movement-dynamics (RMD) interaction engine.
//!
//! The crate turns structured interaction plans — bipartite graphs over
//! human body parts and object parts, each edge tagged with a relative
//! motion pattern — into goal-state encodings and reward signals, and
//! executes them stage by stage on a small kinematic simulator.
//!
//! Pipeline, end to end:
//!
//! 1. [`plan`] parses and validates plan documents (the planner's JSON).
//! 2. [`scene`] holds objects, part point clouds and kinematic states,
//!    and resolves `object(relation)` targets to world points.
//! 3. [`goal`] builds the per-frame goal vector and proprioception.
//! 4. [`reward`] scores edge alignment, destination progress and the
//!    blended task reward.
//! 5. [`exec`] runs the stage machine with scripted controllers.
//! 6. [`metrics`] scores finished episodes and aggregates batches.
//! 7. [`planner`] assembles prompts and replays recorded planner output.
//!
//! [`fixtures`] ships small ready-to-run scenes and plans; [`harness`]
//! adds seeded trial randomization and the stage-threshold sweep.

pub mod exec;
pub mod fixtures;
pub mod goal;
pub mod harness;
pub mod math;
pub mod metrics;
pub mod plan;
pub mod planner;
pub mod reward;
pub mod scene;
