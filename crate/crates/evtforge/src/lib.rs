//! Command-line front end for `evtforge-core`: input loading (text and Rodin XML),
//! reports and the `evtforge` command.

pub mod cli;
pub mod load;
pub mod report;
pub mod rodin;
