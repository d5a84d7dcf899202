//! Runs the guide's code blocks as doc-tests. mdbook cannot link against
//! workspace crates, so each chapter is pulled in here instead.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/moebius.md")]
pub mod moebius {}
#[doc = include_str!("../../../book/src/groups.md")]
pub mod groups {}
#[doc = include_str!("../../../book/src/words.md")]
pub mod words {}
#[doc = include_str!("../../../book/src/dimension.md")]
pub mod dimension {}
#[doc = include_str!("../../../book/src/measures.md")]
pub mod measures {}
#[doc = include_str!("../../../book/src/periods.md")]
pub mod periods {}
#[doc = include_str!("../../../book/src/hexagon.md")]
pub mod hexagon {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
