//! Through-wall micro-Doppler simulation: FDTD wall transmission, human
//! motion scatterers, baseband synthesis and spectrogram images.

pub mod doppler;
pub mod fdtd;
pub mod formats;
pub mod grid;
pub mod motion;
pub mod pipeline;
pub mod plot;
pub mod radar;
pub mod walls;
