//! Closed-form point moment matrix for the linear `n = 2` embedding, coded
//! directly from its printed form, and a reducer that shrinks any disagreement
//! with the exact Grassmann computation to a minimal parameter set.
//!
//! With `Υ = 1/Σ|α_i|²` and `d = |det σ|²`, the printed matrix is
//!
//! ```text
//! Υ³ (2|Σᾱ_iα̃_i|² − Σ|α_i|² Σ|α̃_i|² − 2d) (α_i ᾱ_j)
//!   + Υ² [ (Σ α_i conj(α̃_i)) (α_j conj(α̃_i))_{ij} + h.c. ]
//!   − Υ (α̃_i conj(α̃_j))
//! ```

use serde::Serialize;

use crate::balance::{det_sigma_sq, moment_matrix_point, Matrix, PointEmbedding};
use crate::error::Result;
use crate::grassmann::Complex;
use crate::integrate::PointWeight;

/// Agreement threshold between the printed and the exact matrix.
pub const AGREEMENT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearPointParams {
    pub alpha: [Complex; 2],
    pub alpha_tilde: [Complex; 2],
    pub sigma: [[Complex; 2]; 2],
}

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

impl LinearPointParams {
    fn sigma_rows(&self) -> Matrix {
        self.sigma.iter().map(|r| r.to_vec()).collect()
    }

    pub fn embedding(&self) -> Result<PointEmbedding> {
        PointEmbedding::linear(self.alpha, self.alpha_tilde, &self.sigma_rows())
    }

    /// Exact moment matrix, no weight.
    pub fn exact(&self) -> Result<Matrix> {
        moment_matrix_point(&self.embedding()?, PointWeight::None)
    }

    pub fn printed(&self) -> Result<Matrix> {
        let (a, at) = (self.alpha, self.alpha_tilde);
        let na = a[0].norm_sqr() + a[1].norm_sqr();
        let nat = at[0].norm_sqr() + at[1].norm_sqr();
        let ups = 1.0 / na;
        let d = det_sigma_sq(&self.sigma_rows())?;
        let cross = a[0].conj() * at[0] + a[1].conj() * at[1];
        let k1 = ups.powi(3) * (2.0 * cross.norm_sqr() - na * nat - 2.0 * d);
        let s = a[0] * at[0].conj() + a[1] * at[1].conj();
        let mut m = vec![vec![ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let bos = a[i] * a[j].conj() * k1;
                // (S·K)_{ij} with K_{ij} = α_j conj(α̃_i); h.c. is conj((S·K)_{ji})
                let sk = s * a[j] * at[i].conj();
                let sk_t = s * a[i] * at[j].conj();
                let mixed = (sk + sk_t.conj()) * ups * ups;
                let odd = at[i] * at[j].conj() * ups;
                m[i][j] = bos + mixed - odd;
            }
        }
        Ok(m)
    }

    /// `max |exact − printed|`.
    pub fn discrepancy(&self) -> Result<f64> {
        let (e, p) = (self.exact()?, self.printed()?);
        Ok(e.iter()
            .flatten()
            .zip(p.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    fn get(&self, k: usize) -> Complex {
        match k {
            0..=3 => self.sigma[k / 2][k % 2],
            4 | 5 => self.alpha_tilde[k - 4],
            _ => self.alpha[k - 6],
        }
    }

    fn set(&mut self, k: usize, v: Complex) {
        match k {
            0..=3 => self.sigma[k / 2][k % 2] = v,
            4 | 5 => self.alpha_tilde[k - 4] = v,
            _ => self.alpha[k - 6] = v,
        }
    }

    fn is_valid(&self) -> bool {
        self.alpha.iter().any(|a| a.norm() > 0.0)
    }
}

/// A disagreement shrunk as far as the greedy reducer can.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalCase {
    pub params: LinearPointParams,
    pub exact: Matrix,
    pub printed: Matrix,
    pub discrepancy: f64,
}

/// Parameter order tried by the reducer: σ entries, then α̃, then α.
const REDUCTION_ORDER: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 7];

/// Returns `None` when the two matrices agree. Otherwise zeroes parameters and
/// then sets survivors to 1, in a fixed order, keeping each step only while
/// the disagreement persists, until nothing changes.
pub fn reduce_discrepancy(p: &LinearPointParams) -> Result<Option<MinimalCase>> {
    if p.discrepancy()? <= AGREEMENT_TOLERANCE {
        return Ok(None);
    }
    let mut cur = *p;
    for target in [ZERO, ONE] {
        loop {
            let mut changed = false;
            for &k in &REDUCTION_ORDER {
                let v = cur.get(k);
                if v == target || (target == ONE && v == ZERO) {
                    continue;
                }
                let mut trial = cur;
                trial.set(k, target);
                if trial.is_valid() && trial.discrepancy()? > AGREEMENT_TOLERANCE {
                    cur = trial;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    Ok(Some(MinimalCase {
        params: cur,
        exact: cur.exact()?,
        printed: cur.printed()?,
        discrepancy: cur.discrepancy()?,
    }))
}

fn params(alpha: [f64; 2], alpha_tilde: [f64; 2]) -> LinearPointParams {
    LinearPointParams {
        alpha: alpha.map(|x| Complex::new(x, 0.0)),
        alpha_tilde: alpha_tilde.map(|x| Complex::new(x, 0.0)),
        sigma: [[ZERO; 2]; 2],
    }
}

/// Every minimal disagreement the reducer can end in: `σ = 0`, one unit `α`
/// and one unit `α̃`. Generic inputs end in `α = α̃ = (0, 1)`, where the exact
/// matrix is zero and the printed one has `M₁₁ = 2`; the mirror case
/// `α = α̃ = (1, 0)` has printed `M₀₀ = 2`. In the mixed cases the exact matrix
/// is `±diag(1, −1)` and the printed one `−𝕀`.
pub fn documented_minimal_cases() -> Vec<LinearPointParams> {
    vec![
        params([1.0, 0.0], [1.0, 0.0]),
        params([1.0, 0.0], [0.0, 1.0]),
        params([0.0, 1.0], [1.0, 0.0]),
        params([0.0, 1.0], [0.0, 1.0]),
    ]
}
