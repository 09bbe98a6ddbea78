//! Symbolic-numeric analysis of bivariate analytic germs `gamma(v, theta)`:
//! exact Newton-diagram geometry, the strong-degeneracy classification, the
//! critical exponent of the associated averaging maximal operator, a
//! first-quadrant resolution of singularities with certified comparability
//! regions, and numerical probes cross-validating the scaling predictions.

pub mod algebraic;
pub mod critical;
pub mod degeneracy;
pub mod expr;
pub mod newton;
pub mod probe;
pub mod puiseux;
pub mod rat;
pub mod report;
pub mod resolution;
pub mod roots;

pub use critical::{compute, Config, CriticalError, CriticalReport, TraceEvent};
pub use degeneracy::{classify, Classification, Verdict};
pub use expr::{expand, germ_from_text, normalize, parse, Exactness, ExprAst, ExprError, Germ};
pub use newton::{diagram, NewtonDiagram};
pub use puiseux::{Coefficient, ExpPair, PuiseuxPoly};
pub use rat::{ExtRat, Rat};
pub use resolution::{resolve, RegionTree, ResolveConfig};
