pub mod eval;
pub mod fiber;
pub mod transform;
pub mod validate;
