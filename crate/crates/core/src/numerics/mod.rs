pub mod ode;
pub mod quadrature;
pub mod roots;
