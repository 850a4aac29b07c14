use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Lower bound for `||e^x - e^y|| / ||x - y||` on the ball of radius theta:
/// `prod_{k >= 1} (1 - |1 - e^{i theta / 2^k}|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiBound {
    pub theta: f64,
    pub bound: f64,
}

impl PhiBound {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 2.0 * PI / 3.0) {
            return Err(Error::param(format!("theta must lie in (0, 2 pi / 3), got {theta}")));
        }
        let mut bound = 1.0;
        let mut k = 1;
        loop {
            // |1 - e^{i a}| = 2 sin(a / 2)
            let factor = 1.0 - 2.0 * (theta / 2f64.powi(k + 1)).sin();
            if factor > 1.0 - 1e-14 {
                break;
            }
            bound *= factor;
            k += 1;
        }
        Ok(PhiBound { theta, bound })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_pi_bound_exceeds_four_tenths() {
        let b = PhiBound::new(PI / 4.0).unwrap().bound;
        assert!(b >= 0.4 && b < 0.41, "{b}");
    }

    #[test]
    fn small_theta_bound_is_close_to_one() {
        assert!(PhiBound::new(0.01).unwrap().bound > 0.98);
    }

    #[test]
    fn range_is_enforced() {
        assert!(PhiBound::new(0.0).is_err());
        assert!(PhiBound::new(2.1).is_err());
    }
}
