pub mod beamform;
pub mod beampattern;
pub mod design;
pub mod metrics;
pub mod simulate;
