pub mod agent;
pub mod ci;
pub mod compare;
pub mod layout;
pub mod service;
pub mod model;
pub mod trace;
