//! Library side of the `oddbraid` command: the check registry and the
//! command implementations.

pub mod checks;
pub mod commands;
