pub mod model;
pub mod endpoints;
pub(crate) mod numeric;
pub mod gfunction;
pub mod quaddiff;
pub mod phase;
pub mod algebra;
pub mod topo;
pub mod maps;
pub mod suite;
pub mod cli;
