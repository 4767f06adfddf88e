pub mod effect;
pub mod lifted;
pub mod search;
pub mod sortlab;
pub mod pflp;
pub mod laws;
