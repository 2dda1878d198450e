//! Pachner moves, the (3,3)-relation and P-symmetric state sums over finite
//! abelian groups, with exact cyclotomic arithmetic.

pub mod diagram;
pub mod group;
pub mod scalar;
pub mod selftest;
pub mod simplicial;
pub mod statesum;
pub mod solutions;
pub mod tensor;
pub mod verify;

pub use group::{Bicharacter, FinAbGroup, GroupElement, GroupError};
pub use scalar::{Ambient, Comparison, FloatScalar, Scalar, ScalarError};
pub use tensor::{Coefficient, Domain, GroupTensor, IndexSet, Kernel, Measure, Side, TensorDiff, TensorError, Variance};

/// Sizes the global worker pool. Returns `false` if the pool was already
/// initialised.
pub fn configure_workers(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scalars.md")]
    mod scalars {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/tensors.md")]
    mod tensors {}
    #[doc = include_str!("../../../book/src/relation.md")]
    mod relation {}
    #[doc = include_str!("../../../book/src/symmetry.md")]
    mod symmetry {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/moves.md")]
    mod moves {}
    #[doc = include_str!("../../../book/src/statesum.md")]
    mod statesum {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
