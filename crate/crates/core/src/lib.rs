pub mod check;
pub mod constraint;
pub mod context;
pub mod diagnostic;
pub mod driver;
pub mod level;
pub mod mono;
pub mod surface;
pub mod syntax;
