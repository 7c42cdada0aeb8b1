//! Exact recovery of Gram blocks from a floating-point solution.

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One};

use crate::error::{Error, Result};
use crate::matpoly::RatMatrix;
use crate::poly::{to_f64, Rational};

use super::ldlt::psd_ldlt;
use super::solve::FloatSolution;
use super::system::{upper_index, GramSystem};

/// Denominators `2^10, 2^20, ..., 2^60`, given as exponents.
pub const DEFAULT_LADDER: [u32; 6] = [10, 20, 30, 40, 50, 60];

/// Rounds every block entry to a multiple of `2^-bits`, projects exactly onto
/// the affine constraints, and accepts the first rung at which every block
/// passes the rational PSD test. The returned blocks satisfy the system
/// exactly; there is no approximate success.
pub fn rationalize(sol: &FloatSolution, sys: &GramSystem, ladder: &[u32]) -> Result<Vec<RatMatrix>> {
    if sol.blocks.len() != sys.blocks().len() {
        return Err(Error::ShapeMismatch {
            op: "rationalize",
            left: (sol.blocks.len(), 0),
            right: (sys.blocks().len(), 0),
        });
    }
    let projector = sys.projector()?;
    let mut smallest = f64::INFINITY;
    for &bits in ladder {
        let mut x = vec![Rational::from_integer(0.into()); sys.num_vars()];
        let den = BigInt::one() << bits;
        let scale = 2f64.powi(bits as i32);
        for (bi, g) in sol.blocks.iter().enumerate() {
            let k = g.nrows();
            if k != sys.blocks()[bi].dim() {
                return Err(Error::ShapeMismatch { op: "rationalize", left: (k, k), right: (sys.blocks()[bi].dim(), 0) });
            }
            let off = sys.offset(bi);
            for i in 0..k {
                for j in i..k {
                    let v = 0.5 * (g[(i, j)] + g[(j, i)]) * scale;
                    let num = BigInt::from_f64(v.round())
                        .ok_or_else(|| Error::NumericBreakdown(format!("cannot round {}", v)))?;
                    x[off + upper_index(k, i, j)] = Rational::new(num, den.clone());
                }
            }
        }
        let x = projector.project(sys, &x)?;
        let mats = sys.unpack(&x);
        let mut ok = true;
        for m in &mats {
            let f = psd_ldlt(m);
            if let Some(p) = f.d.iter().min() {
                smallest = smallest.min(to_f64(p));
            }
            if !f.is_psd {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(mats);
        }
    }
    Err(Error::LadderExhausted { smallest_pivot: smallest })
}
