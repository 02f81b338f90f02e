//! Floating-point helpers shared by the bounds modules.

mod lambert;
mod optimize;
mod quadrature;

pub use lambert::lambert_w0;
pub use optimize::{maximize, Maximum, SCAN_POINTS};
pub use quadrature::{integrate, Integral};

/// Kahan-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
