//! Map-agnostic interest belief and the unified planning state.

mod interest;
mod normal;
mod state;

pub use interest::{interest_grid, interest_probability, DEGENERATE_STD};
pub use normal::{normal_cdf, normal_sf};
pub use state::{assemble_state, export_state_raster, read_state_raster, Hyperparams, UnifiedState};
