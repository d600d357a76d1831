pub mod behavior;
pub mod cli;
pub mod condition;
pub mod cues;
pub mod error;
pub mod geometry;
pub mod render;
pub mod signals;
pub mod stats;

pub use condition::Condition;
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/coordinates.md")]
    mod coordinates {}
    #[doc = include_str!("../../../book/src/rendering.md")]
    mod rendering {}
    #[doc = include_str!("../../../book/src/cues.md")]
    mod cues {}
    #[doc = include_str!("../../../book/src/localisation.md")]
    mod localisation {}
    #[doc = include_str!("../../../book/src/kinematics.md")]
    mod kinematics {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
