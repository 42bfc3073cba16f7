pub mod expr;
pub mod geometry;
pub mod quantizer;
pub mod random;
pub mod symplectic;
pub mod expmap;
