pub mod model;
pub mod fem;
pub mod benchmark;
pub mod grader;
pub mod prompt;
pub mod gateway;
pub mod pipeline;
pub mod fixtures;
pub mod report;
