//! Stopping times, verification sweeps, densities, records and equal-height runs
//! for the 3x+1 function `T`.

mod record;
mod sieve;
mod sweep;

pub use record::{
    ln_big, orbit_u64, sigma_inf_height, stats_record, t_step_big, t_step_u128, t_step_u64, StatsRecord,
};
pub use sieve::{
    stopping_densities, stopping_density, stopping_time, verify_range, Sieve, SurvivorStat, VerificationReport,
    VerifyMode, MAX_SIEVE_K,
};
pub use sweep::{
    below_power_density, equal_height_tuples, excursion_records, BelowPowerReport, Champion, ExcursionReport,
    HeightRun,
};
