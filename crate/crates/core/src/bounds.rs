//! Order-of-magnitude runtime estimates for sweeps, subspace cooling and
//! spectroscopy. All big-O constants are set to one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    /// Path constant `max_s ||∂_s H(s)||^2`.
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
    /// Minimal gap along the path.
    pub delta: f64,
    /// Largest neighbouring-level spacing inside the cooled subspace.
    pub delta_c: f64,
    pub d_c: u32,
    /// Average spectroscopy step size.
    pub avg_step: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("K", self.k),
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("delta_c", self.delta_c),
            ("avg_step", self.avg_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.d_c == 0 {
            return Err(Error::InvalidParameter("d_c must be at least 1".into()));
        }
        Ok(())
    }

    fn pairs(&self) -> f64 {
        let d = self.d_c as f64;
        d * (d - 1.0)
    }
}

/// `K / (α Δ^2)`.
pub fn t_sweep_bound(b: &BoundInputs) -> f64 {
    b.k / (b.alpha * b.delta * b.delta)
}

/// `K Δ / (α Δ_c^3) + d_c (d_c - 1) / α`.
pub fn t_sub_bound(b: &BoundInputs) -> f64 {
    b.k * b.delta / (b.alpha * b.delta_c.powi(3)) + b.pairs() / b.alpha
}

/// `K Δ / (α Δ_c^3) + d_c (d_c - 1)^2 Δ_c / (α δω)`.
pub fn t_spec_bound(b: &BoundInputs) -> f64 {
    let d = b.d_c as f64;
    b.k * b.delta / (b.alpha * b.delta_c.powi(3))
        + d * (d - 1.0).powi(2) * b.delta_c / (b.alpha * b.avg_step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcWindow {
    /// `(K / Δ^2)(1 - Δ^3 / Δ_c^3)`, the allowed value of `d_c (d_c - 1)`.
    pub pair_budget: f64,
    /// `sqrt(pair_budget)`, using `d_c (d_c - 1) ≈ d_c^2`.
    pub approximate: f64,
    /// Largest real `d` with `d (d - 1) <= pair_budget`.
    pub exact: f64,
    /// `sqrt(K) / Δ`, the limit `Δ << Δ_c`.
    pub simplified: f64,
}

impl DcWindow {
    /// Whether subspace cooling with this `d_c` beats the plain sweep.
    pub fn admits(&self, d_c: u32) -> bool {
        let d = d_c as f64;
        d * (d - 1.0) <= self.pair_budget
    }
}

pub fn d_c_window(k: f64, delta: f64, delta_c: f64) -> Result<DcWindow> {
    if !(k > 0.0 && delta > 0.0 && delta_c > 0.0) {
        return Err(Error::InvalidParameter(
            "window inputs must be positive".into(),
        ));
    }
    if delta > delta_c {
        return Err(Error::InvalidParameter(format!(
            "empty window: delta = {delta} exceeds delta_c = {delta_c}"
        )));
    }
    let pair_budget = (k / (delta * delta)) * (1.0 - (delta / delta_c).powi(3));
    Ok(DcWindow {
        pair_budget,
        approximate: pair_budget.sqrt(),
        exact: 0.5 * (1.0 + (1.0 + 4.0 * pair_budget).sqrt()),
        simplified: k.sqrt() / delta,
    })
}

/// All estimates for one input set, as emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub note: String,
    pub t_sweep: f64,
    pub t_sub: f64,
    pub t_spec: f64,
    pub window: Option<DcWindow>,
    pub window_admits_d_c: Option<bool>,
}

pub fn bound_report(b: &BoundInputs) -> Result<BoundReport> {
    b.validate()?;
    let window = d_c_window(b.k, b.delta, b.delta_c).ok();
    Ok(BoundReport {
        inputs: *b,
        note: "order-of-magnitude estimates, all constants set to 1".into(),
        t_sweep: t_sweep_bound(b),
        t_sub: t_sub_bound(b),
        t_spec: t_spec_bound(b),
        window,
        window_admits_d_c: window.map(|w| w.admits(b.d_c)),
    })
}
