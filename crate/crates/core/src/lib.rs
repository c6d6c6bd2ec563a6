//! Explicit cyclic p-power extensions of p-adic fields: p-adic scalars and
//! series, Lubin–Tate group laws, the series-pair solver, Artin–Schreier towers
//! with root isolation and automorphism tables, residue-field embedding tests,
//! and the presented symbol group of `Q_p{{t}}`.

pub mod engine;
pub mod error;
pub mod formal_group;
pub mod galois;
pub mod gr;
pub mod k2;
pub mod laurent;
pub mod padic;
pub mod par;
pub mod residue;
pub mod roots;
pub mod tower;
pub mod xseries;

pub use error::{Error, Result};
pub use formal_group::{build_group_law, fg_add, fg_mul_p, BivarSeries, GroupLaw};
pub use galois::{as_equiv_class, automorphism_table, contained_zero, towers_equal, AutomorphismTable, EquivClass};
pub use gr::{
    approx_equiv_check, builtin_gr_p2, builtin_gr_p2_with, solve_gr, verify_gr, Equivalence, GRPair, ResidualReport,
};
pub use k2::{generator_order, k2_combine, k2_normal_form, K2Element, K2Op};
pub use laurent::TLaurent;
pub use padic::PadicScalar;
pub use par::Exec;
pub use residue::{embeddable, generator_catalog, is_pm_power, quotient_basis, ResidueElem, ResidueField};
pub use roots::{find_roots, Root, RootOptions};
pub use tower::{build_tower, explicit_p2, tower_from_pair, EvalConvention, Source, Tower, TowerElement, TowerSpec};
pub use xseries::{SeriesKind, XSeries};
