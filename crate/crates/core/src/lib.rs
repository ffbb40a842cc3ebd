pub mod af;
pub mod channel;
pub mod cli;
pub mod df;
pub mod mc;
pub mod metrics;
pub mod scenario;
