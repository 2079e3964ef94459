//! Cycle algebra and cycle-length lower bounds for `T`.

mod bound;
mod value;

pub use bound::{cycle_length_lower_bound, balanced_min_element, BoundOptions, CycleBoundReport, MinElementCheck};
pub use value::{
    circuit_shape, circuit_solutions, cycle_value, lyndon_words, rational_cycles_3xd, replay, scaled_cycle_value,
    within_three_pow, CircuitSolution, CycleValue,
};
