pub mod bounds;
pub mod families;
pub mod measures;
pub mod series;
pub mod symbolic;
