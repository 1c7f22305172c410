pub mod cohring;
pub mod eqkth;
pub mod expr;
pub mod lambdaring;
pub mod localize;
pub mod qseries;
pub mod scenario;
pub mod scalar;
pub mod wallcross;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scalars.md")]
    mod scalars {}
    #[doc = include_str!("../../../book/src/cohomology.md")]
    mod cohomology {}
    #[doc = include_str!("../../../book/src/localization.md")]
    mod localization {}
    #[doc = include_str!("../../../book/src/lambda_rings.md")]
    mod lambda_rings {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/wall_crossing.md")]
    mod wall_crossing {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
