//! Iterable integer maps and the trajectory/cycle engine.

mod engine;
mod num;
mod parse;
mod spec;

pub use engine::{
    find_cycles, reach_census, trajectory, CycleRecord, CycleTally, ReachCensus, CycleSearch, Limits, Termination, Trajectory,
    TrajectoryOptions, Unresolved, DEFAULT_MAGNITUDE_BITS, DEFAULT_STEP_LIMIT,
};
pub use num::Num;
pub use parse::parse_map;
pub use spec::{builtin, AffineMap, Beta, Branch, MapKind, MapSpec, NamedMap};
pub(crate) use spec::queneau_delta;
