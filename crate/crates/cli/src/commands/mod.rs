pub mod report;
pub mod spectra;
pub mod tomography;
pub mod visibility;
