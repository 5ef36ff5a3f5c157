//! Bipartite user-page graphs, their page projection, sub-graphs and
//! connected components.

mod bipartite;
mod partition;
mod projection;

pub use bipartite::BipartiteGraph;
pub use partition::Partition;
pub use projection::{connected_components, induced_subgraph, project, ProjectionGraph};
