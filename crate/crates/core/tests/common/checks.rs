//! Solver-versus-reference comparisons shared by the oracle suite and the
//! acceptance run. Each returns a description of the first mismatch.

use super::{simplex_grid_max, TrapezoidChannel};
use dab_core::ba::{ba_fixed_support, ba_power_constrained, BaOptions};
use dab_core::dab_pc::power_preserving_move;
use dab_core::{Channel, Pmf, Quadrature};

pub type Check = Result<(), String>;

fn q() -> Quadrature {
    Quadrature::default()
}

fn probs_close(got: &[f64], want: &[f64], tol: f64) -> Check {
    for (a, b) in got.iter().zip(want) {
        if (a - b).abs() >= tol {
            return Err(format!("probabilities {got:?} vs {want:?}"));
        }
    }
    Ok(())
}

pub fn ternary_ba_vs_simplex() -> Check {
    let locs = [-1.0, 0.0, 1.0];
    let ch = Channel::new(0.1).unwrap();
    let out =
        ba_fixed_support(&locs, &ch, &q(), &BaOptions::default()).map_err(|e| e.to_string())?;
    let tc = TrapezoidChannel::new(&locs, 0.1, 4001, 12.0);
    let (p, best) = simplex_grid_max(3, |p| tc.mutual_information(p), |_| true, 1e-5);
    if (out.mutual_information - best).abs() >= 1e-6 {
        return Err(format!("rate {} vs {best}", out.mutual_information));
    }
    probs_close(&out.probabilities, &p, 1e-4)
}

/// Power limit 0.4 on `{-1, 0, 1}`; the grid optimum sits just inside the
/// constraint boundary, so the solver may beat it slightly.
pub fn constrained_ternary_vs_simplex() -> Check {
    let locs = [-1.0, 0.0, 1.0];
    let ch = Channel::new(0.25).unwrap();
    let out = ba_power_constrained(&locs, &ch, 0.4, &q(), &BaOptions::default())
        .map_err(|e| e.to_string())?;
    let tc = TrapezoidChannel::new(&locs, 0.25, 4001, 12.0);
    let (p, best) = simplex_grid_max(
        3,
        |p| tc.mutual_information(p),
        |p| p[0] + p[2] <= 0.4,
        1e-5,
    );
    let gain = out.mutual_information - best;
    if !(gain > -1e-6 && gain < 1e-5) {
        return Err(format!("rate {} vs {best}", out.mutual_information));
    }
    probs_close(&out.probabilities, &p, 1e-4)
}

pub fn four_point_ba_vs_simplex() -> Check {
    let locs = [-1.0, -0.2, 0.5, 1.0];
    let ch = Channel::new(0.05).unwrap();
    let out =
        ba_fixed_support(&locs, &ch, &q(), &BaOptions::default()).map_err(|e| e.to_string())?;
    let tc = TrapezoidChannel::new(&locs, 0.05, 1201, 12.0);
    let (_, best) = simplex_grid_max(4, |p| tc.mutual_information(p), |_| true, 2e-3);
    if out.mutual_information < best - 1e-4 {
        return Err(format!("rate {} below grid {best}", out.mutual_information));
    }
    Ok(())
}

/// Moving the inner pair of 4-PAM from +-1 to +-1.2 at power 5 leaves the
/// 2x2 system `0.5a + 0.5b = 1`, `4.5a + 0.72b = 5` for the outer and
/// inner scale factors.
pub fn flow_move_vs_hand_solution() -> Check {
    let pam4 = Pmf::uniform(vec![-3.0, -1.0, 1.0, 3.0]).unwrap();
    let out = power_preserving_move(&pam4, (1, 2), (-1.2, 1.2), 5.0).map_err(|e| e.to_string())?;
    let (a, b) = (178.0 / 189.0, 200.0 / 189.0);
    let want = [0.25 * a, 0.25 * b, 0.25 * b, 0.25 * a];
    probs_close(out.probabilities(), &want, 1e-12)
}
