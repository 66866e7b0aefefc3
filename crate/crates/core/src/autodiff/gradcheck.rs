//! Central finite-difference check of reverse-mode parameter gradients.

use super::{Bound, ParamStore, Tape, Var};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckConfig {
    pub step: f64,
    /// Allowed `|analytic − numeric| / max(|analytic|, |numeric|, abs_floor)`.
    pub rel_tol: f64,
    pub abs_floor: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            step: 1e-5,
            rel_tol: 1e-4,
            abs_floor: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    /// Entries skipped because the two one-sided differences disagree, i.e.
    /// the step straddles a ReLU kink.
    pub kinks: usize,
    pub max_rel_error: f64,
    pub failures: Vec<Mismatch>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares the tape gradient of `loss` with central differences for every
/// scalar of every parameter in `store`. `loss` must be a deterministic
/// function of the parameters; stochastic objectives should reseed their
/// noise on each call.
pub fn check_gradients(
    store: &ParamStore,
    cfg: &GradCheckConfig,
    loss: impl Fn(&mut Tape, &Bound) -> Result<Var>,
) -> Result<GradCheckReport> {
    let eval = |s: &ParamStore| -> Result<f64> {
        let mut tape = Tape::new();
        let bound = s.bind(&mut tape);
        let l = loss(&mut tape, &bound)?;
        Ok(tape.item(l))
    };

    let mut tape = Tape::new();
    let bound = store.bind(&mut tape);
    let l = loss(&mut tape, &bound)?;
    let f0 = tape.item(l);
    let grads = tape.backward(l)?;

    let mut work = store.clone();
    let mut report = GradCheckReport::default();
    let h = cfg.step;
    for id in store.ids() {
        let analytic = grads.param(id);
        for k in 0..store.value(id).len() {
            let a = analytic.map_or(0.0, |g| g.data()[k]);
            let x = store.value(id).data()[k];
            work.value_mut(id).data_mut()[k] = x + h;
            let fp = eval(&work)?;
            work.value_mut(id).data_mut()[k] = x - h;
            let fm = eval(&work)?;
            work.value_mut(id).data_mut()[k] = x;

            let numeric = (fp - fm) / (2.0 * h);
            let rel = |n: f64| (a - n).abs() / a.abs().max(n.abs()).max(cfg.abs_floor);
            let err = rel(numeric);
            report.checked += 1;
            if err <= cfg.rel_tol {
                report.max_rel_error = report.max_rel_error.max(err);
                continue;
            }
            let forward = (fp - f0) / h;
            let backward = (f0 - fm) / h;
            // On a smooth function the one-sided differences agree to O(h).
            let sides_disagree = (forward - backward).abs()
                > 10.0 * cfg.rel_tol * forward.abs().max(backward.abs()).max(cfg.abs_floor);
            if sides_disagree && (rel(forward) <= 1e-3 || rel(backward) <= 1e-3) {
                report.kinks += 1;
                continue;
            }
            report.max_rel_error = report.max_rel_error.max(err);
            report.failures.push(Mismatch {
                param: store.name(id).to_string(),
                index: k,
                analytic: a,
                numeric,
                rel_error: err,
            });
        }
    }
    Ok(report)
}
