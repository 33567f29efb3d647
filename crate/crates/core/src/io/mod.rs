pub mod mtx;
pub mod report;
pub mod vector;

pub use mtx::{read_matrix_market, read_matrix_market_from, write_matrix_market, write_matrix_market_to};
pub use report::{read_report, write_report, REPORT_HEADER};
pub use vector::{read_vector_from, write_vector_to};
