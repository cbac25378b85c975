pub mod cli;
pub mod geometry;
pub mod kb;
pub mod pointcloud;
pub mod railway;
pub mod rules;
pub mod topology;
pub mod vocab;
pub mod vrml;
