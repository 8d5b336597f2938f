use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::operator::{GelfandDiscretization, Operator, Psi};
use crate::rng;

/// Relative slack applied to every inequality check.
pub const AUDIT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub condition: &'static str,
    pub sample: usize,
    /// Amount by which the inequality failed, after slack.
    pub excess: f64,
    pub witness: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionSummary {
    pub condition: &'static str,
    pub checked: usize,
    /// Largest `lhs - rhs` over the samples, normalized by the slack scale.
    pub worst_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub operator: String,
    pub samples: usize,
    pub conditions: Vec<ConditionSummary>,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations_of(&self, condition: &str) -> usize {
        self.violations.iter().filter(|v| v.condition == condition).count()
    }

    pub fn checked(&self, condition: &str) -> usize {
        self.conditions
            .iter()
            .find(|c| c.condition == condition)
            .map_or(0, |c| c.checked)
    }
}

struct Recorder {
    conditions: Vec<ConditionSummary>,
    violations: Vec<Violation>,
}

impl Recorder {
    /// Records `lhs ≤ rhs` up to `AUDIT_SLACK·scale`.
    fn check(
        &mut self,
        condition: &'static str,
        sample: usize,
        lhs: f64,
        rhs: f64,
        scale: f64,
        witness: impl FnOnce() -> String,
    ) {
        let tol = AUDIT_SLACK * (1.0 + scale.abs());
        let margin = (lhs - rhs) / (1.0 + scale.abs());
        let entry = match self.conditions.iter_mut().find(|c| c.condition == condition) {
            Some(e) => e,
            None => {
                self.conditions.push(ConditionSummary {
                    condition,
                    checked: 0,
                    worst_margin: f64::NEG_INFINITY,
                });
                self.conditions.last_mut().unwrap()
            }
        };
        entry.checked += 1;
        entry.worst_margin = entry.worst_margin.max(margin);
        if !(lhs - rhs <= tol) {
            self.violations.push(Violation {
                condition,
                sample,
                excess: lhs - rhs - tol,
                witness: witness(),
            });
        }
    }
}

/// Smooth modes plus grid-scale noise at a log-uniform amplitude in
/// `[1e-2, 10]`.
fn random_state<R: Rng>(rng: &mut R, tri: &GelfandDiscretization) -> Vec<f64> {
    let d = tri.dim();
    let amp = 10f64.powf(rng.random_range(-2.0..1.0));
    let coeffs: Vec<f64> = (0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let noise = rng.random_range(0.0..0.3);
    tri.space()
        .nodes()
        .take(d)
        .map(|x| {
            let smooth: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * x).sin())
                .sum();
            amp * (smooth + noise * rng.sample::<f64, _>(StandardNormal))
        })
        .collect()
}

/// Largest consecutive jump of `λ ↦ ⟨A(u + λv), w⟩` over `2^level + 1`
/// equispaced points of `[-1, 1]`, and the largest absolute value seen.
fn hemicontinuity_jump(tri: &GelfandDiscretization, t: f64, u: &[f64], v: &[f64], w: &[f64], level: u32) -> (f64, f64) {
    let m = 1usize << level;
    let values: Vec<f64> = (0..=m)
        .map(|i| {
            let lam = -1.0 + 2.0 * i as f64 / m as f64;
            let x: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + lam * b).collect();
            tri.pair(t, &x, w)
        })
        .collect();
    let jump = values.windows(2).fold(0.0f64, |j, p| j.max((p[1] - p[0]).abs()));
    let peak = values.iter().fold(0.0f64, |j, x| j.max(x.abs()));
    (jump, peak)
}

fn audit_psi(rec: &mut Recorder, psi: &Psi, sample: usize, a: f64, b: f64) {
    let (pa, pb) = (psi.eval(a), psi.eval(b));
    let lhs = -(pa - pb) * (a - b);
    rec.check("Ψ2", sample, lhs, 0.0, (pa * a).abs() + (pb * b).abs(), || {
        format!("s={a}, t={b}")
    });
    let growth = psi.a * a.abs().powf(psi.p) - psi.c;
    rec.check("Ψ3", sample, growth, a * pa, growth.abs(), || format!("s={a}"));
    let bound = psi.c4 + psi.c3 * a.abs().powf(psi.p - 1.0);
    rec.check("Ψ4", sample, pa.abs(), bound, bound, || format!("s={a}"));
    let mut prev = f64::INFINITY;
    let mut shrinking = true;
    for h in [1e-2, 1e-4, 1e-6] {
        let jump = (psi.eval(a + h) - pa).abs();
        shrinking &= jump <= prev + AUDIT_SLACK * (1.0 + pa.abs());
        prev = jump;
    }
    rec.check("Ψ1", sample, if shrinking { 0.0 } else { 1.0 }, 0.0, 0.0, || {
        format!("s={a}")
    });
}

/// Checks the hemicontinuity, (local) monotonicity, coercivity and boundedness
/// inequalities with the declared constants on `samples` random draws of
/// `(u, v, w, t)`, plus the Gelfand compatibility of the pairing and, for
/// the porous medium, the conditions on `Ψ`.
pub fn audit_assumptions(tri: &GelfandDiscretization, samples: usize, seed: u64) -> AuditReport {
    let mut rng = rng::stream(seed);
    let k = tri.constants();
    let ip = tri.ip();
    let mut rec = Recorder {
        conditions: Vec::new(),
        violations: Vec::new(),
    };
    for s in 0..samples {
        let u = random_state(&mut rng, tri);
        let v = random_state(&mut rng, tri);
        let w = random_state(&mut rng, tri);
        let t: f64 = rng.random_range(0.0..1.0);
        let au = tri.apply_vec(t, &u);
        let av = tri.apply_vec(t, &v);

        let direct = tri.pair(t, &u, &v);
        let via_h = tri.duality(&au, &v);
        rec.check(
            "Gelfand",
            s,
            (direct - via_h).abs(),
            0.0,
            direct.abs() + via_h.abs(),
            || format!("flux {direct} vs H {via_h}"),
        );

        let mut coarse: f64 = 0.0;
        let mut peak_all: f64 = 0.0;
        let mut finest = 0.0;
        for level in 4..=10 {
            let (jump, peak) = hemicontinuity_jump(tri, t, &u, &v, &w, level);
            peak_all = peak_all.max(peak);
            if level < 10 {
                coarse = coarse.max(jump);
            } else {
                finest = jump;
            }
        }
        // A jump of size δ keeps the largest step above δ at every level.
        let worst = finest - 0.5 * coarse;
        rec.check("H1", s, worst, 0.0, peak_all, || {
            "jump did not shrink under refinement".into()
        });

        let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
        let adiff: Vec<f64> = au.iter().zip(&av).map(|(a, b)| a - b).collect();
        let mono = 2.0 * (tri.pair(t, &u, &diff) - tri.pair(t, &v, &diff));
        let rhs = k.h * ip.norm_sq(&diff);
        let scale = 2.0 * (tri.pair(t, &u, &u).abs() + tri.pair(t, &v, &v).abs()) + rhs;
        rec.check(if k.h == 0.0 { "H2'" } else { "H2" }, s, mono, rhs, scale, || {
            format!("2<A(u)-A(v),u-v> = {mono}, |A(u)-A(v)|_H = {}", ip.norm(&adiff))
        });

        let au_u = tri.pair(t, &u, &u);
        let vn = tri.v_norm(&u);
        let hn = ip.norm_sq(&u);
        let lhs = au_u + k.c1 * vn.powf(k.alpha);
        let rhs = k.c2 * hn + k.f;
        rec.check("H3", s, lhs, rhs, au_u.abs() + rhs, || {
            format!("<A(u),u> = {au_u}, |u|_V = {vn}")
        });

        let dual = tri.dual_norm(&au);
        let bound = k.g + k.c3 * vn.powf(k.alpha - 1.0);
        rec.check("H4", s, dual, bound, bound, || {
            format!("|A(u)|_V* = {dual}, bound {bound}")
        });

        if let Operator::PorousMedium { psi } = tri.operator() {
            for (a, b) in u.iter().zip(&v).take(8) {
                audit_psi(&mut rec, psi, s, *a, *b);
            }
        }
    }
    AuditReport {
        operator: tri.name(),
        samples,
        conditions: rec.conditions,
        violations: rec.violations,
    }
}
