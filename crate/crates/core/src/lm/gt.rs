//! Good-Turing estimation over frequency-of-frequency tables.

use std::collections::BTreeMap;

use super::LmError;

/// How raw counts become corrected counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// r* = r; nothing reserved for unseen events.
    Mle,
    /// r* = (r+1) N_{r+1} / N_r on the raw table.
    Turing,
    /// Turing estimates for small r, switching to a log-log regression of
    /// N_r once the two disagree by more than 1.65 standard deviations.
    #[default]
    SimpleGoodTuring,
}

/// Frequency of frequencies: r → N_r, plus the number of unseen events N_0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FreqOfFreq {
    pub n: BTreeMap<u64, u64>,
    pub unseen: u64,
}

impl FreqOfFreq {
    pub fn from_counts<I: IntoIterator<Item = u64>>(counts: I, unseen: u64) -> Self {
        let mut n = BTreeMap::new();
        for r in counts {
            *n.entry(r).or_insert(0) += 1;
        }
        FreqOfFreq { n, unseen }
    }

    pub fn get(&self, r: u64) -> u64 {
        if r == 0 {
            self.unseen
        } else {
            self.n.get(&r).copied().unwrap_or(0)
        }
    }

    /// Σ r·N_r.
    pub fn total(&self) -> u64 {
        self.n.iter().map(|(r, n)| r * n).sum()
    }

    /// Number of distinct seen events.
    pub fn types(&self) -> u64 {
        self.n.values().sum()
    }
}

/// Log-log fit of the averaged frequency-of-frequency curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLinear {
    pub intercept: f64,
    pub slope: f64,
}

impl LogLinear {
    /// Smoothed N_r.
    pub fn s(&self, r: f64) -> f64 {
        (self.intercept + self.slope * r.ln()).exp()
    }

    /// (r+1) S(r+1) / S(r).
    pub fn r_star(&self, r: f64) -> f64 {
        r * (1.0 + 1.0 / r).powf(self.slope + 1.0)
    }
}

/// Slope used when the table has a single distinct r.
const FALLBACK_SLOPE: f64 = -2.0;

/// Fit log Z_r = a + b log r where Z_r spreads N_r over the gap between
/// neighbouring observed r values.
pub fn fit_log_linear(fof: &FreqOfFreq) -> Option<LogLinear> {
    let rs: Vec<(u64, u64)> = fof.n.iter().filter(|(_, &n)| n > 0).map(|(&r, &n)| (r, n)).collect();
    if rs.is_empty() {
        return None;
    }
    let mut pts = Vec::with_capacity(rs.len());
    for (j, &(r, n)) in rs.iter().enumerate() {
        let q = if j == 0 { 0.0 } else { rs[j - 1].0 as f64 };
        let t = if j + 1 < rs.len() {
            rs[j + 1].0 as f64
        } else {
            2.0 * r as f64 - q
        };
        pts.push(((r as f64).ln(), (n as f64 / (0.5 * (t - q))).ln()));
    }
    if pts.len() == 1 {
        let (x, y) = pts[0];
        return Some(LogLinear {
            intercept: y - FALLBACK_SLOPE * x,
            slope: FALLBACK_SLOPE,
        });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    Some(LogLinear {
        intercept: my - slope * mx,
        slope,
    })
}

/// Corrected counts for every observed r, and the per-item estimate for
/// unseen events.
#[derive(Debug, Clone, PartialEq)]
pub struct GtTable {
    pub r_star: BTreeMap<u64, f64>,
    /// r*_0: expected count of one unseen event.
    pub unseen_per_item: f64,
}

impl GtTable {
    pub fn get(&self, r: u64) -> f64 {
        if r == 0 {
            self.unseen_per_item
        } else {
            self.r_star[&r]
        }
    }

    /// Total count reserved for unseen events.
    pub fn unseen_mass(&self, fof: &FreqOfFreq) -> f64 {
        self.unseen_per_item * fof.unseen as f64
    }
}

fn turing(fof: &FreqOfFreq, r: u64) -> f64 {
    (r + 1) as f64 * fof.get(r + 1) as f64 / fof.get(r) as f64
}

/// Corrected frequency r*. With `Turing` the raw formula is applied and
/// N_r must be positive; r = 0 spreads the N_1 mass over the unseen events.
pub fn gt_estimate(fof: &FreqOfFreq, r: u64, est: Estimator) -> Result<f64, LmError> {
    if r == 0 {
        return Ok(gt_table(fof, est)?.unseen_per_item);
    }
    match est {
        Estimator::Mle => Ok(r as f64),
        Estimator::Turing => {
            if fof.get(r) == 0 {
                return Err(LmError::NoEvidence(r));
            }
            Ok(turing(fof, r))
        }
        Estimator::SimpleGoodTuring => {
            if fof.get(r) > 0 {
                return Ok(gt_table(fof, est)?.r_star[&r]);
            }
            let fit = fit_log_linear(fof).ok_or(LmError::NoEvidence(r))?;
            let v = fit.r_star(r as f64);
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(LmError::NoEvidence(r))
            }
        }
    }
}

/// The full table. `Turing` gives r* = 0 at the largest r; see
/// [`gt_table_positive`] for a variant safe to take logs of.
pub fn gt_table(fof: &FreqOfFreq, est: Estimator) -> Result<GtTable, LmError> {
    let n0 = fof.unseen.max(1) as f64;
    match est {
        Estimator::Mle => Ok(GtTable {
            r_star: fof.n.keys().map(|&r| (r, r as f64)).collect(),
            unseen_per_item: 0.0,
        }),
        Estimator::Turing => Ok(GtTable {
            r_star: fof.n.keys().map(|&r| (r, turing(fof, r))).collect(),
            unseen_per_item: fof.get(1) as f64 / n0,
        }),
        Estimator::SimpleGoodTuring => {
            let Some(fit) = fit_log_linear(fof) else {
                return Ok(GtTable {
                    r_star: BTreeMap::new(),
                    unseen_per_item: 0.0,
                });
            };
            let mut r_star = BTreeMap::new();
            let mut smoothed = false;
            for &r in fof.n.keys() {
                let y = fit.r_star(r as f64);
                let next = fof.get(r + 1);
                if !smoothed && next > 0 {
                    let x = turing(fof, r);
                    let nr = fof.get(r) as f64;
                    let nn = next as f64;
                    let sd = ((r + 1) as f64).powi(2) * nn / (nr * nr) * (1.0 + nn / nr);
                    if (x - y).abs() > 1.65 * sd.sqrt() {
                        r_star.insert(r, x);
                        continue;
                    }
                }
                smoothed = true;
                r_star.insert(r, y);
            }
            if r_star.values().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(LmError::NoEvidence(0));
            }
            let n1 = match fof.get(1) {
                0 => fit.s(1.0),
                n => n as f64,
            };
            Ok(GtTable {
                r_star,
                unseen_per_item: n1 / n0,
            })
        }
    }
}

/// Like [`gt_table`] but never returns a zero r* for a seen event: under
/// `Turing`, an r with no N_{r+1} keeps its raw count.
pub fn gt_table_positive(fof: &FreqOfFreq, est: Estimator) -> Result<GtTable, LmError> {
    let mut t = gt_table(fof, est)?;
    for (r, v) in t.r_star.iter_mut() {
        if *v <= 0.0 {
            *v = *r as f64;
        }
    }
    Ok(t)
}
