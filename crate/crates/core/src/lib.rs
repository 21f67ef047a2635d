#![no_std]
extern crate alloc;

pub mod clustering;
pub mod codegen;
pub mod config;
pub mod dataset;
pub mod decomposition;
pub mod matrix;
pub mod pruning;
pub mod rng;
pub mod selection_models;
mod svd;
pub mod synthetic;
