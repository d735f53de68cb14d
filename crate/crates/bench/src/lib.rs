//! Fixtures shared by the benchmarks.

use aggdiff_core::{init_profile, DensityField, Grid, PotentialParams, ProfileKind, SimConfig, Solver};

/// Gaussian of unit mass and width `0.5` on a `cells²` grid of half-width 4.
pub fn gaussian(cells: usize) -> DensityField {
    let grid = Grid::square(cells, 4.0).expect("valid grid");
    init_profile(&ProfileKind::Gaussian { sigma: 0.5 }, grid, 1.0).expect("valid profile").field
}

/// Solver for the weakly singular interior case (`A = 2, B = 1, λ = 1, m = 1.5`).
pub fn weak_solver(cells: usize) -> Solver {
    let grid = Grid::square(cells, 4.0).expect("valid grid");
    let params = PotentialParams::new(2.0, 1.0, 1.0, 2).expect("valid potential");
    Solver::new(grid, Some(params), SimConfig::new(1.5, 1.0)).expect("valid solver")
}
