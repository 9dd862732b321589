//! Rotation-vector increments from sampled body rates.

use crate::attitude::Vec3;

/// Turns a stream of sampled body rates into rotation-vector increments over
/// consecutive sample intervals.
///
/// Inside a motion phase the rate is fitted by a quadratic through the last
/// three samples, and the increment includes the matching coning term. The
/// sample at a known rate switch already belongs to the new motion, so the
/// interval ending on a switch is extrapolated from the two samples before it
/// and the history is cleared afterwards.
#[derive(Debug, Clone, Default)]
pub struct RateIncrements {
    breaks: Vec<f64>,
    cursor: usize,
    // most recent first: (t, rate)
    hist: [Option<(f64, Vec3)>; 2],
}

impl RateIncrements {
    pub fn new(breaks: &[f64]) -> Self {
        let mut breaks = breaks.to_vec();
        breaks.sort_by(f64::total_cmp);
        Self { breaks, cursor: 0, hist: [None, None] }
    }

    /// Feeds the rate `w` sampled at `t` and returns the increment over the
    /// interval since the previous sample (`None` for the first sample).
    ///
    /// The history stores rates as given, so callers that subtract a bias
    /// estimate which changes between samples should pass raw rates and use
    /// [`RateIncrements::push_with_offset`].
    pub fn push(&mut self, t: f64, w: Vec3) -> Option<Vec3> {
        self.push_with_offset(t, w, &Vec3::zeros())
    }

    /// Like [`RateIncrements::push`] with `offset` subtracted from every rate
    /// used, including the stored history.
    pub fn push_with_offset(&mut self, t: f64, raw: Vec3, offset: &Vec3) -> Option<Vec3> {
        let mut at_break = false;
        let out = match self.hist {
            [None, _] => None,
            [Some((t1, w1)), prev] => {
                let dt = t - t1;
                let w1 = w1 - offset;
                let w = raw - offset;
                let prev = prev.map(|(t2, w2)| (t1 - t2, w2 - offset));
                at_break = is_break(&self.breaks, &mut self.cursor, t1, t);
                let uniform = |h: f64| (h - dt).abs() <= 1e-9 * dt;
                Some(match (at_break, prev) {
                    (true, Some((h, w2))) if uniform(h) => {
                        // rate of the old motion carried to the switch
                        poly_increment(w1, (w1 - w2) / h, Vec3::zeros(), dt)
                    }
                    (true, _) => w1 * dt,
                    (false, Some((h, w2))) if uniform(h) => {
                        let b = (w - w2) / (2.0 * h);
                        let c = (w - w1 * 2.0 + w2) / (2.0 * h * h);
                        poly_increment(w1, b, c, dt)
                    }
                    (false, _) => poly_increment(w1, (w - w1) / dt, Vec3::zeros(), dt),
                })
            }
        };
        self.hist = if at_break { [Some((t, raw)), None] } else { [Some((t, raw)), self.hist[0]] };
        out
    }
}

/// Increment for the rate `a + b tau + c tau^2` over `[0, dt]`: the rate
/// integral plus the coning term `1/2 int alpha x w`.
fn poly_increment(a: Vec3, b: Vec3, c: Vec3, dt: f64) -> Vec3 {
    let (d2, d3) = (dt * dt, dt * dt * dt);
    let integral = a * dt + b * (d2 / 2.0) + c * (d3 / 3.0);
    let coning = a.cross(&b) * (d3 / 12.0) + a.cross(&c) * (d3 * dt / 12.0) + b.cross(&c) * (d3 * d2 / 60.0);
    integral + coning
}

/// True when a break time lies in `(t0, t1]` (within rounding of `t1`).
pub(crate) fn is_break(breaks: &[f64], cursor: &mut usize, t0: f64, t1: f64) -> bool {
    let eps = 1e-6 * (t1 - t0);
    while *cursor < breaks.len() && breaks[*cursor] <= t0 + eps {
        *cursor += 1;
    }
    if *cursor < breaks.len() && (breaks[*cursor] - t1).abs() <= eps {
        *cursor += 1;
        return true;
    }
    false
}
