pub mod canon;
pub mod cli;
pub mod confirm;
pub mod dn;
pub mod error;
pub mod loops;
pub mod modes;
pub mod oracle;
pub mod parser;
pub mod report;
pub mod subst;
pub mod term;
pub mod unfold;
pub mod unify;
