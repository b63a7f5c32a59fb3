//! Local and global stability of the two equilibria.

mod local;
mod lyapunov;

pub use local::*;
pub use lyapunov::*;
