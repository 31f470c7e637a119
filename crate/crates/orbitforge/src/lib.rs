pub mod error;
pub mod linalg;
pub mod scalars;
pub mod structured;
pub mod types;
pub mod distinguished;
pub mod affine;
pub mod labels;
pub mod document;
pub mod selfcheck;

pub use error::Error;

/// Concept chapters of the guide, compiled as doc-tests.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/scalars.md")]
    pub mod scalars {}
    #[doc = include_str!("../../../book/src/structured-spaces.md")]
    pub mod structured_spaces {}
    #[doc = include_str!("../../../book/src/types.md")]
    pub mod types {}
    #[doc = include_str!("../../../book/src/distinguished.md")]
    pub mod distinguished {}
    #[doc = include_str!("../../../book/src/affine.md")]
    pub mod affine {}
    #[doc = include_str!("../../../book/src/documents.md")]
    pub mod documents {}
}
