//! NSGA-II for the cheap sampled problems, with Deb's constraint domination.

mod nsga2;
mod sort;

pub use nsga2::{nsga2, nsga2_with_observer, Nsga2Config, Population};
pub use sort::{crowding_distance, non_dominated_sort, sort_by_dominance};
