pub mod analysis;
pub mod cases;
pub mod clearing;
pub mod formulation;
pub mod lp;
pub mod netmodel;
pub mod report;
