pub mod approx;
pub mod cf;
pub mod modular;
pub mod power;
pub mod real;

pub use approx::{ApproximableReal, ExprReal, QuadraticSurd};
pub use cf::{convergent_sandwich_check, convergents, ContinuedFraction, SandwichWitness};
pub use modular::{is_prime_u64, mult_order, mult_order_u64, FactorBudget};
pub use power::decide_power_bound;
pub use real::{compare, Expr, Interval, LogInterval};
