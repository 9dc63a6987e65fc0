//! Exact rational arithmetic, sparse multivariate polynomials, rational
//! functions and nonnegativity witnesses.

mod linalg;
mod parse;
mod poly;
mod ratfun;
mod rational;
mod witness;

pub use linalg::{
    affine_system, determinant, determinant_q, identity, mat_is_zero, mat_mul, nullspace, rank,
    rank_q, rref, solve_linear, LinearSolution, PolyMatrix, QMatrix,
};
pub use parse::{parse_polynomial, parse_polynomial_with, AnyVar, Resolver, SyntaxError};
#[allow(unused_imports)]
pub(crate) use parse::{tokenize, Parser, Tok};
pub use poly::{Monomial, Polynomial, Var};
pub use ratfun::RationalFunction;
pub use rational::{ParseRationalError, Rational};
pub use witness::{check_nonneg_witness, NonNegWitness, Verified};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("no value supplied for variable `{0}`")]
    MissingVariable(String),
    #[error("division by zero")]
    ZeroDenominator,
    #[error("witness constant {0} is not positive")]
    NonPositiveConstant(Rational),
    #[error("witness does not expand to the target; difference {0}")]
    ExpansionMismatch(Polynomial),
    #[error("symbolic system is singular (determinant {0})")]
    SingularSymbolicSystem(Polynomial),
    #[error("expression is not affine in the unknowns: {0}")]
    NotAffine(Polynomial),
    #[error("matrix and right-hand side have incompatible shapes")]
    ShapeMismatch,
}
