pub mod experiments;
pub mod io;
pub mod report;
pub mod solver;
