//! Operation count and computational density of the chip.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub inputs: u64,
    pub outputs: u64,
    pub baud_gbd: f64,
    /// `6NM + 2(N−1)M + 6M`, exact.
    pub ops_per_symbol: u64,
    pub tops: f64,
    pub area_mm2: f64,
    pub tops_per_mm2: f64,
}

/// Operations per symbol: every one of the `N·M` complex multiplications
/// counts 6 real operations, summing `N` complex terms per output takes
/// `2(N−1)`, and square-law detection of each output another 6.
pub fn ops_per_symbol(inputs: u64, outputs: u64) -> Result<u64> {
    if inputs == 0 || outputs == 0 {
        return Err(Error::InvalidParameter("port counts must be positive".into()));
    }
    let n = inputs;
    let m = outputs;
    6u64.checked_mul(n)
        .and_then(|v| v.checked_mul(m))
        .and_then(|v| v.checked_add(2 * (n - 1) * m))
        .and_then(|v| v.checked_add(6 * m))
        .ok_or_else(|| Error::InvalidParameter("operation count overflows u64".into()))
}

pub fn density(inputs: u64, outputs: u64, baud_gbd: f64, area_mm2: f64) -> Result<DensityReport> {
    let ops = ops_per_symbol(inputs, outputs)?;
    if !(baud_gbd > 0.0 && baud_gbd.is_finite()) {
        return Err(Error::InvalidParameter(format!("baud rate must be positive, got {baud_gbd}")));
    }
    if !(area_mm2 > 0.0 && area_mm2.is_finite()) {
        return Err(Error::InvalidParameter(format!("area must be positive, got {area_mm2}")));
    }
    // ops * 1e9 / 1e12
    let tops = ops as f64 * baud_gbd / 1000.0;
    Ok(DensityReport {
        inputs,
        outputs,
        baud_gbd,
        ops_per_symbol: ops,
        tops,
        area_mm2,
        tops_per_mm2: tops / area_mm2,
    })
}
