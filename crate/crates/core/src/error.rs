use thiserror::Error;

use crate::graph::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex id {0}")]
    UnknownVertex(Vertex),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("malformed structure: {0}")]
    Format(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("size guard: {what} is {size}, limit is {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("cover does not cover vertices {0:?}")]
    Uncovered(Vec<Vertex>),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
