pub mod bessel;
pub mod blowup;
pub mod brezis_merle;
pub mod bubble;
pub mod kernels;
pub mod pizzetti;
pub mod relation;
pub mod scan;
