//! Dormand-Prince 5(4) with local error control and cubic Hermite dense
//! output on accepted steps.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IntegrateError {
    #[error("step size underflow at t = {t} (last valid state)")]
    StepSizeUnderflow { t: f64 },
    #[error("non-finite right-hand side at t = {t}")]
    NonFinite { t: f64 },
    #[error("right-hand side failed at t = {t}: {message}")]
    Rhs { t: f64, message: String },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),
    #[error("output times must be increasing and inside [t0, t1]")]
    BadOutputTimes,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the fifth- and embedded fourth-order error weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub const MAX_STEPS: usize = 5_000_000;

/// Integrates `y' = f(t, y)` from `t0` to `t1`, reporting the state at each
/// of `out_times` (which must be sorted and lie in `[t0, t1]`).
///
/// `f` writes the derivative into its third argument and may fail with a
/// message, which aborts integration.
pub fn dopri5<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    out_times: &[f64],
    tol: Tolerances,
) -> Result<(Vec<Vec<f64>>, StepStats), IntegrateError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), String>,
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut prev = t0;
    for &t in out_times {
        if (t - prev) * dir < -1e-15 * span.max(1.0) || (t - t1) * dir > 1e-15 * span.max(1.0) {
            return Err(IntegrateError::BadOutputTimes);
        }
        prev = t;
    }
    let mut out = Vec::with_capacity(out_times.len());
    let mut next_out = 0;
    while next_out < out_times.len() && (out_times[next_out] - t0) * dir <= 0.0 {
        out.push(y0.to_vec());
        next_out += 1;
    }
    let mut stats = StepStats::default();
    if span == 0.0 {
        while next_out < out_times.len() {
            out.push(y0.to_vec());
            next_out += 1;
        }
        return Ok((out, stats));
    }

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut y = y0.to_vec();
    let mut t = t0;
    let call = |f: &mut F, t: f64, y: &[f64], dy: &mut [f64], stats: &mut StepStats| {
        stats.evaluations += 1;
        f(t, y, dy).map_err(|m| IntegrateError::Rhs { t, message: m })?;
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::NonFinite { t });
        }
        Ok(())
    };
    call(&mut f, t, &y, &mut k[0], &mut stats)?;

    // Initial step from the usual derivative-based heuristic.
    let sc0: Vec<f64> = y.iter().map(|v| tol.atol + tol.rtol * v.abs()).collect();
    let d0 = rms(&y, &sc0);
    let d1 = rms(&k[0], &sc0);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(span);

    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut fac_old: f64 = 1e-4;
    loop {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(IntegrateError::MaxSteps(MAX_STEPS));
        }
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(IntegrateError::StepSizeUnderflow { t });
        }
        let hs = h * dir;
        let mut stage_ok = true;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += hs * A[s][j] * k[j][i];
                }
                ytmp[i] = acc;
            }
            let ts = t + C[s] * hs;
            match call(&mut f, ts, &ytmp, &mut k[s], &mut stats) {
                Ok(()) => {}
                Err(IntegrateError::NonFinite { .. }) | Err(IntegrateError::Rhs { .. }) => {
                    stage_ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
        }
        if !stage_ok || ynew.iter().any(|v| !v.is_finite()) {
            // Treat as a rejected step; shrink and retry.
            stats.rejected += 1;
            h *= 0.25;
            continue;
        }
        for i in 0..n {
            let mut acc = 0.0;
            for s in 0..7 {
                acc += E[s] * k[s][i];
            }
            err[i] = hs * acc;
        }
        let sc: Vec<f64> = (0..n)
            .map(|i| tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs()))
            .collect();
        let e = rms(&err, &sc);
        if e <= 1.0 {
            // Dense output: cubic Hermite between (t, y, k0) and (t+h, ynew, k6).
            let tn = t + hs;
            while next_out < out_times.len() && (out_times[next_out] - tn) * dir <= 0.0 {
                let theta = ((out_times[next_out] - t) / hs).clamp(0.0, 1.0);
                out.push(hermite(theta, hs, &y, &ynew, &k[0], &k[6]));
                next_out += 1;
            }
            y.copy_from_slice(&ynew);
            let k6 = k[6].clone();
            k[0].copy_from_slice(&k6);
            t = tn;
            stats.accepted += 1;
            if last {
                break;
            }
            // PI controller.
            let fac = (e.max(1e-10)).powf(0.17) / fac_old.powf(0.04);
            fac_old = e.max(1e-4);
            h /= (fac / 0.9).clamp(0.1, 5.0);
        } else {
            stats.rejected += 1;
            h /= ((e.powf(0.2)) / 0.9).clamp(1.0, 5.0);
        }
    }
    while next_out < out_times.len() {
        out.push(y.clone());
        next_out += 1;
    }
    Ok((out, stats))
}

fn rms(v: &[f64], sc: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let s: f64 = v.iter().zip(sc).map(|(a, b)| (a / b) * (a / b)).sum();
    (s / v.len() as f64).sqrt()
}

fn hermite(theta: f64, h: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64]) -> Vec<f64> {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(tol: Tolerances) -> f64 {
        let (out, _) = dopri5(
            |_, y, dy| {
                dy[0] = -2.0 * y[0];
                Ok(())
            },
            0.0,
            1.0,
            &[1.0],
            &[1.0],
            tol,
        )
        .unwrap();
        out[0][0]
    }

    #[test]
    fn linear_test_equation() {
        let y = decay(Tolerances::default());
        assert!((y - (-2.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn error_falls_with_tolerance_at_fifth_order() {
        // Harmonic oscillator over ten periods; error against step count.
        let run = |tol: f64| {
            let (out, st) = dopri5(
                |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -y[0];
                    Ok(())
                },
                0.0,
                20.0 * std::f64::consts::PI,
                &[0.0, 1.0],
                &[20.0 * std::f64::consts::PI],
                Tolerances {
                    rtol: tol,
                    atol: tol,
                },
            )
            .unwrap();
            let e = out[0][0].abs().max((out[0][1] - 1.0).abs());
            (e, st.accepted as f64)
        };
        let runs: Vec<(f64, f64)> = [1e-5, 1e-7, 1e-9, 1e-11].iter().map(|&t| run(t)).collect();
        for w in runs.windows(2) {
            assert!(w[1].0 < w[0].0, "{runs:?}");
        }
        let (e0, n0) = runs[0];
        let (e1, n1) = runs[3];
        let order = -(e1 / e0).ln() / (n1 / n0).ln();
        assert!(order >= 4.0, "observed order {order}");
    }

    #[test]
    fn zero_rhs_is_constant() {
        let (out, _) = dopri5(
            |_, _, dy| {
                dy.iter_mut().for_each(|v| *v = 0.0);
                Ok(())
            },
            0.0,
            3.0,
            &[1.0, -2.0, 0.5],
            &[0.5, 1.0, 3.0],
            Tolerances::default(),
        )
        .unwrap();
        for row in out {
            assert_eq!(row, vec![1.0, -2.0, 0.5]);
        }
    }

    #[test]
    fn dense_output_at_interior_times() {
        let times: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
        let (out, _) = dopri5(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            1.0,
            &[0.0, 1.0],
            &times,
            Tolerances::default(),
        )
        .unwrap();
        for (t, row) in times.iter().zip(&out) {
            // Hermite interpolation is third order in the step.
            assert!((row[0] - t.sin()).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn riccati_blow_up_is_reported() {
        // y' = y^2, y(0)=1 blows up at t=1.
        let r = dopri5(
            |_, y, dy| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            2.0,
            &[1.0],
            &[2.0],
            Tolerances::default(),
        );
        match r {
            Err(IntegrateError::StepSizeUnderflow { t }) => assert!((t - 1.0).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
    }
}
