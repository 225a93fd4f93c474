//! Limit-cycle analysis for Liénard-type equations
//! `ẍ + Σ f_j(x)ẋ^j + g(x) = 0`: exact sign certificates for uniqueness and
//! existence conditions, numerical cycle search with characteristic
//! exponents, the Conti-Filippov change of variables, and field scans.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod dynamics;
pub mod expr;
pub mod gallery;
pub mod par;
pub mod poly;
pub mod quad;
pub mod sampling;
pub mod scan;
pub mod system;
pub mod system_file;
pub mod transform;
