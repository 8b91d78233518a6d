//! File formats, JSON export and the command-line front end for
//! [`accinfo_core`].

pub mod cli;
pub mod io;
pub mod report;

pub use io::{parse_complex, parse_import, parse_matrix, parse_output, write_import, write_output, ImportFile};
