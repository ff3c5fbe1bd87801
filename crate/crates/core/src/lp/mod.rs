//! Linear programming: the simplex engine, cut separation and the MSTC
//! relaxations built on them.

mod relax;
mod separation;
pub mod simplex;

pub use relax::{solve_lp, Cut, CutKind, LpOptions, LpSolution, LpSolveStatus};
pub use separation::{separate_conflict_cycle, separate_subtour};
pub use simplex::{DualSimplex, LpStatus};
