use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site:?} lies outside the box")]
    SiteOutsideBox { site: Vec<i64> },

    #[error("sites must be pairwise distinct")]
    SitesNotDistinct,

    #[error("enumeration guard: box has {edges} edges, limit is {limit}")]
    EnumerationGuard { edges: usize, limit: usize },

    #[error("{0} and {1} are not connected")]
    NotConnected(String, String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("statistical guard: {0}")]
    StatisticalGuard(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed dump: {0}")]
    MalformedDump(String),
}
