//! Fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod cotrain;
pub mod published;
