//! Numeric verification that a generator's flow maps solutions to solutions.
//!
//! A point symmetry acts on solution *graphs*: pushing the graph of a
//! solution `u` through the flow `Φ_ε` yields the graph of a new function
//! `ũ`, and `X` is a symmetry exactly when `ũ` again solves the equation.
//! The check realizes `ũ` on the original lattice by pulling every node back
//! through `Φ_{−ε}`, interpolating `u` there, and transporting the sampled
//! value forward along the fiber.  The transformed table is then fed to the
//! same independent residual stencil used to grade the solver itself, and
//! the verdict compares against that yardstick: a genuine symmetry keeps the
//! residual within a small multiple of the discretization noise, while a
//! mismatched generator leaves an O(ε) defect that towers over it.
//!
//! Pulled-back points that leave the computed domain are masked out rather
//! than extrapolated; if too little of the lattice survives, the check
//! refuses to issue a verdict instead of grading noise.

use alloc::vec::Vec;

use crate::expr::{EvalError, Var};
use crate::field::VectorField;

use super::flow::{Flow, FlowMethod};
use super::grid::{Field3, Grid};
use super::solver::{independent_residual, stencil_residual, Solution};
use super::NumericError;

/// Tuning for [`check_symmetry`].
#[derive(Clone, Debug)]
pub struct CheckConfig {
    /// Flow amounts to try; each produces its own report.
    pub epsilons: Vec<f64>,
    /// Pass while the transformed residual stays within this multiple of
    /// the solution's own discretization residual.
    pub budget_factor: f64,
    /// Below this stencil coverage the verdict is withheld.
    pub min_overlap: f64,
}

impl Default for CheckConfig {
    fn default() -> CheckConfig {
        CheckConfig {
            epsilons: alloc::vec![0.025, 0.05, 0.1],
            budget_factor: 10.0,
            min_overlap: 0.25,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of the check at a single flow amount.
#[derive(Clone, Debug)]
pub struct EpsilonReport {
    pub eps: f64,
    pub method: FlowMethod,
    /// Fraction of interior stencil points the transformed graph covered.
    pub coverage: f64,
    /// Independent-stencil RMS residual of the transformed graph.
    pub residual_norm: f64,
    /// The allowance it was graded against.
    pub budget: f64,
    pub verdict: Verdict,
}

/// Aggregated outcome across the ε sweep.
#[derive(Clone, Debug)]
pub struct SymmetryCheck {
    /// Discretization residual of the untransformed solution.
    pub baseline: f64,
    pub reports: Vec<EpsilonReport>,
    pub verdict: Verdict,
}

/// Cubic interpolation through four uniformly spaced samples, exact for
/// quadratics; `s ∈ [0, 1]` measures between the middle two.
fn catmull_rom(p: [f64; 4], s: f64) -> f64 {
    0.5 * (2.0 * p[1]
        + (-p[0] + p[2]) * s
        + (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) * s * s
        + (-p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3]) * s * s * s)
}

/// Locate a coordinate on its axis: `(lower index, fraction)` such that the
/// four-sample neighborhood `index−1 ..= index+2` exists, or `None` when the
/// query (with a hair of slack for rounding) leaves the admissible band.
fn locate(g: f64, n: usize) -> Option<(usize, f64)> {
    const SLACK: f64 = 1e-9;
    if !(g >= 1.0 - SLACK && g <= (n - 2) as f64 + SLACK) {
        return None;
    }
    let i = (libm::floor(g) as usize).clamp(1, n - 3);
    Some((i, g - i as f64))
}

/// Sample the table at `(t, z, y)`: linear in time, bicubic in space.
/// `None` when the point is outside the interpolable region.
pub fn interpolate(grid: &Grid, values: &Field3, t: f64, z: f64, y: f64) -> Option<f64> {
    const SLACK: f64 = 1e-9;
    let gt = t / grid.dt();
    if !(gt >= -SLACK && gt <= values.levels as f64 - 1.0 + SLACK) {
        return None;
    }
    let kt = (libm::floor(gt) as usize).min(values.levels.saturating_sub(2));
    let st = (gt - kt as f64).clamp(0.0, 1.0);

    let (iz, sz) = locate((z - grid.z_min()) / grid.dz(), grid.nz)?;
    let (jy, sy) = locate((y - grid.y_min) / grid.dy(), grid.ny)?;

    let plane = |k: usize| -> f64 {
        let mut rows = [0.0; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            let j = jy - 1 + r;
            let line = [
                values.at(k, iz - 1, j),
                values.at(k, iz, j),
                values.at(k, iz + 1, j),
                values.at(k, iz + 2, j),
            ];
            *row = catmull_rom(line, sz);
        }
        catmull_rom(rows, sy)
    };
    Some((1.0 - st) * plane(kt) + st * plane(kt + 1))
}

fn is_fatal(e: &NumericError) -> bool {
    !matches!(e, NumericError::Eval(EvalError::Domain(_)))
}

/// Grade a generator against a computed solution by the graph transform.
///
/// The solution must come from a source-free solve — the check grades the
/// transformed graph against the homogeneous equation.  Generators whose
/// base components depend on `u` are rejected: their graph action is not a
/// pointwise coordinate map.
pub fn check_symmetry(
    solution: &Solution,
    field: &VectorField,
    config: &CheckConfig,
) -> Result<SymmetryCheck, NumericError> {
    for component in [field.xi_t(), field.xi_x(), field.xi_y()] {
        if component.depends_on(Var::U) {
            return Err(NumericError::FiberDependentGeometry);
        }
    }

    let grid = &solution.grid;
    let flow = Flow::new(field);
    type NoSource = fn(f64, f64, f64) -> f64;
    let (baseline, _) = independent_residual(solution, None::<&NoSource>, None);

    let mut reports = Vec::new();
    for &eps in &config.epsilons {
        let mut transformed = Field3::zeros(grid.nt + 1, grid.nz, grid.ny);
        let mut mask = Field3::zeros(grid.nt + 1, grid.nz, grid.ny);
        for k in 0..=grid.nt {
            for i in 0..grid.nz {
                for j in 0..grid.ny {
                    let node = [grid.t_at(k), grid.x_at(i), grid.y_at(j), 0.0];
                    // Base pullback; the fiber slot is inert because the
                    // base components are u-free.
                    let back = match flow.map(-eps, node) {
                        Ok(p) => p,
                        Err(e) if !is_fatal(&e) => continue,
                        Err(e) => return Err(e),
                    };
                    if back[1] <= 0.0 {
                        continue;
                    }
                    let z_back = libm::log(back[1]);
                    let Some(sampled) =
                        interpolate(grid, &solution.field, back[0], z_back, back[2])
                    else {
                        continue;
                    };
                    let lifted = [back[0], back[1], back[2], sampled];
                    let image = match flow.map(eps, lifted) {
                        Ok(p) => p,
                        Err(e) if !is_fatal(&e) => continue,
                        Err(e) => return Err(e),
                    };
                    transformed.set(k, i, j, image[3]);
                    mask.set(k, i, j, 1.0);
                }
            }
        }

        let (norm, coverage) = stencil_residual(
            grid,
            &transformed,
            &solution.drift_values,
            None::<&NoSource>,
            Some(&mask),
        );
        let budget = config.budget_factor * baseline;
        let verdict = if coverage < config.min_overlap {
            Verdict::Inconclusive
        } else if norm <= budget {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        reports.push(EpsilonReport {
            eps,
            method: flow.method(),
            coverage,
            residual_norm: norm,
            budget,
            verdict,
        });
    }

    let verdict = if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(SymmetryCheck {
        baseline,
        reports,
        verdict,
    })
}
