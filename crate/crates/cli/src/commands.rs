use std::fmt::Write;

use oneshot_core::asymptotics::{convergence_d_inf, convergence_h0_cond, info_spectrum_quantile, product_expand, ConvergencePoint};
use oneshot_core::binning::{build_sw_code_with, sw_exact_error, sw_rate_bounds_from};
use oneshot_core::helper::{helper_error, CoveringParams, CoveringPlan, HelperInstance, SimulationParams, SimulationPlan};
use oneshot_core::io::{read_any, read_distortion, read_joint, read_kernel, AnyDist};
use oneshot_core::prob::{kl_divergence, FiniteDist, JointDist};
use oneshot_core::rate_distortion::{rd_averaged_bound, rd_exact_excess_prob, rd_rate_bound, RDCode};
use oneshot_core::rng::par_trials;
use oneshot_core::smooth::{max_distortion_quantile, smooth_d_inf, smooth_h0, smooth_h0_cond, smooth_i_inf, sw_truncation};
use oneshot_core::{Error, Result};
use serde_json::json;

use crate::{Cli, Command, ConvergeArgs, HelperArgs, Quantity, RdArgs, Scheme, Sequence, SmoothArgs, SwArgs};

pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Smooth(a) => smooth(cli, a),
        Command::SwSim(a) => sw_sim(cli, a),
        Command::HelperSim(a) => helper_sim(cli, a),
        Command::RdSim(a) => rd_sim(cli, a),
        Command::Converge(a) => converge(cli, a),
    }
}

/// Rounds to 12 significant digits.
fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        // `+ 0.0` folds -0 into 0.
        let r = round12(x) + 0.0;
        if r != 0.0 && !(1e-4..1e15).contains(&r.abs()) {
            format!("{r:e}")
        } else {
            r.to_string()
        }
    }
}

fn json_num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(round12(x) + 0.0)
    } else {
        serde_json::Value::Null
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Parameter("--trials must be at least 1".into()));
    }
    Ok(())
}

fn need_joint(any: AnyDist, what: &str) -> Result<JointDist> {
    match any {
        AnyDist::Joint(j) => Ok(j.value),
        AnyDist::Single(_) => Err(Error::Parameter(format!("{what} needs a joint distribution file"))),
    }
}

fn as_flat(any: AnyDist) -> FiniteDist {
    match any {
        AnyDist::Single(d) => d.value,
        AnyDist::Joint(j) => j.value.flatten(),
    }
}

fn smooth(cli: &Cli, a: &SmoothArgs) -> Result<String> {
    let input = read_any(&a.input, cli.renormalize)?;
    let (value, mass) = match a.quantity {
        Quantity::H0 => {
            let r = smooth_h0(&as_flat(input), a.eps)?;
            (r.value, Some(r.witness.total()))
        }
        Quantity::H0cond => {
            let r = smooth_h0_cond(&need_joint(input, "h0cond")?, a.eps)?;
            (r.value, Some(r.witness.total()))
        }
        Quantity::Iinf => {
            let r = smooth_i_inf(&need_joint(input, "iinf")?, a.eps)?;
            (r.value, Some(r.witness.total()))
        }
        Quantity::Dinf => {
            let path = a
                .input2
                .as_ref()
                .ok_or_else(|| Error::Parameter("dinf needs --input2".into()))?;
            let q = as_flat(read_any(path, cli.renormalize)?);
            let r = smooth_d_inf(&as_flat(input), &q, a.eps)?;
            (r.value, Some(r.witness.total()))
        }
        Quantity::Quantile => {
            let path = a
                .distortion
                .as_ref()
                .ok_or_else(|| Error::Parameter("quantile needs --distortion".into()))?;
            let dt = read_distortion(path)?.value;
            (max_distortion_quantile(&need_joint(input, "quantile")?, &dt, a.eps)?, None)
        }
    };
    let out = json!({
        "value_bits": json_num(value),
        "eps": json_num(a.eps),
        "witness_total_mass": mass.map_or(serde_json::Value::Null, json_num),
    });
    Ok(format!("{out}\n"))
}

fn sw_sim(cli: &Cli, a: &SwArgs) -> Result<String> {
    check_trials(a.trials)?;
    let j = read_joint(&a.joint, cli.renormalize)?.value;
    let t = sw_truncation(&j, a.eps)?;
    let (da, db) = sw_rate_bounds_from(&t, a.eps)?.operating_point();
    let (ea, eb) = (a.ell_a.unwrap_or(da), a.ell_b.unwrap_or(db));
    let rows = par_trials(cli.seed, a.trials, |seed, r| -> Result<Vec<String>> {
        let code = build_sw_code_with(&j, &t, ea, eb, r)?;
        let b = sw_exact_error(&code, &j)?;
        Ok(vec![
            seed.to_string(),
            ea.to_string(),
            eb.to_string(),
            num(b.report.error_prob),
            num(b.e1),
            num(b.e2),
            num(b.e3),
            num(b.e4),
        ])
    });
    Ok(csv("seed,ellA,ellB,exact_error,E1,E2,E3,E4", rows.into_iter().collect::<Result<Vec<_>>>()?))
}

fn helper_sim(cli: &Cli, a: &HelperArgs) -> Result<String> {
    check_trials(a.trials)?;
    let j = read_joint(&a.joint, cli.renormalize)?.value;
    let k = read_kernel(&a.kernel, cli.renormalize)?.value;
    let inst = HelperInstance::new(j, k)?;
    match a.scheme {
        Scheme::A => {
            let eps_b_bar = a
                .eps_b_bar
                .ok_or_else(|| Error::Parameter("scheme A needs --epsBbar".into()))?;
            let params = CoveringParams {
                eps: a.eps.unwrap_or(a.eps_a + a.eps_b),
                eps_a: a.eps_a,
                eps_b: a.eps_b,
                eps_b_bar,
            };
            let plan = CoveringPlan::new(&inst, params)?;
            if plan.negative_information() {
                eprintln!("note: smoothed information is negative; the helper rate uses its positive part");
            }
            let (ea, eb) = (a.ell_a.unwrap_or(plan.ell_a_min), a.ell_b.unwrap_or(plan.ell_b_min));
            let rows = par_trials(cli.seed, a.trials, |seed, r| -> Result<Vec<String>> {
                let code = plan.realize(&inst, ea, eb, r)?;
                let rep = plan.evaluate(&inst, &code);
                Ok(vec![
                    seed.to_string(),
                    "A".into(),
                    ea.to_string(),
                    eb.to_string(),
                    num(rep.error),
                    num(rep.pr_e1),
                    num(rep.pr_e1c_e2),
                    num(rep.pr_e3),
                    num(params.eps),
                ])
            });
            Ok(csv(
                "seed,scheme,ellA,ellB,measured_error,pr_e1,pr_e1c_e2,pr_e3,budget",
                rows.into_iter().collect::<Result<Vec<_>>>()?,
            ))
        }
        Scheme::B => {
            let params = SimulationParams {
                eps: a.eps.unwrap_or(2.0 * a.eps_a + 4.0 * a.eps_b),
                eps_a: a.eps_a,
                eps_b: a.eps_b,
            };
            let plan = SimulationPlan::new(&inst, params)?;
            let (ea, eb) = (a.ell_a.unwrap_or(plan.ell_a_min), a.ell_b.unwrap_or(plan.ell_b_min));
            let l1_sim = plan.simulation_l1(&inst, eb)?;
            let rows = par_trials(cli.seed, a.trials, |seed, r| -> Result<Vec<String>> {
                let code = plan.realize(&inst, ea, eb, r)?;
                Ok(vec![
                    seed.to_string(),
                    "B".into(),
                    ea.to_string(),
                    eb.to_string(),
                    num(helper_error(&code, &inst.joint_xy)),
                    num(plan.u_prime.l1),
                    num(l1_sim),
                    num(2.0 * params.eps_a),
                    num(plan.budget()),
                ])
            });
            Ok(csv(
                "seed,scheme,ellA,ellB,measured_error,l1_uprime,l1_sim,rw_error_bound,budget",
                rows.into_iter().collect::<Result<Vec<_>>>()?,
            ))
        }
    }
}

fn rd_sim(cli: &Cli, a: &RdArgs) -> Result<String> {
    check_trials(a.trials)?;
    let j = read_joint(&a.joint, cli.renormalize)?.value;
    let dt = read_distortion(&a.distortion)?.value;
    let rate = rd_rate_bound(&j, a.eps, a.eps1)?;
    let gamma = max_distortion_quantile(&j, &dt, a.eps1)?;
    let p_y = j.col_marginal();
    let bound = rd_averaged_bound(a.eps1, rate.ell, rate.i_inf);
    let rows = par_trials(cli.seed, a.trials, |seed, r| -> Result<Vec<String>> {
        let code = RDCode::random(&p_y, rate.ell, &dt, r)?;
        Ok(vec![
            seed.to_string(),
            rate.ell.to_string(),
            num(gamma),
            num(rd_exact_excess_prob(&code, &j, &dt, gamma)),
            num(rate.i_inf),
            num(bound),
        ])
    });
    Ok(csv(
        "seed,ellA,gamma,excess_prob,i_inf_eps1,avg_bound",
        rows.into_iter().collect::<Result<Vec<_>>>()?,
    ))
}

/// `(P, Q)` from either two single-letter files or one joint against its marginal product.
fn pair(cli: &Cli, a: &ConvergeArgs) -> Result<(FiniteDist, FiniteDist)> {
    let base = read_any(&a.base, cli.renormalize)?;
    match (&a.base2, base) {
        (Some(path), base) => Ok((as_flat(base), as_flat(read_any(path, cli.renormalize)?))),
        (None, AnyDist::Joint(j)) => Ok((j.value.flatten(), j.value.marginal_product().flatten())),
        (None, AnyDist::Single(_)) => Err(Error::Parameter(
            "a single-letter base needs --base2 for the reference distribution".into(),
        )),
    }
}

fn converge(cli: &Cli, a: &ConvergeArgs) -> Result<String> {
    let points: Vec<ConvergencePoint> = match a.quantity {
        Sequence::H0cond => {
            let j = need_joint(read_any(&a.base, cli.renormalize)?, "h0cond")?;
            convergence_h0_cond(&j, a.eps, a.nmax)?
        }
        Sequence::Dinf => {
            let (p, q) = pair(cli, a)?;
            convergence_d_inf(&p, &q, a.eps, a.nmax)?
        }
        Sequence::Spectrum => {
            let (p, q) = pair(cli, a)?;
            let reference = kl_divergence(&p, &q)?;
            (1..=a.nmax.max(1))
                .map(|n| {
                    let (pn, qn) = (product_expand(&p, n)?, product_expand(&q, n)?);
                    let value = info_spectrum_quantile(&pn, &qn, n, a.eps)?;
                    Ok(ConvergencePoint {
                        n,
                        value,
                        reference,
                        gap: (value - reference).abs(),
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(csv(
        "n,value,reference,gap",
        points
            .iter()
            .map(|p| vec![p.n.to_string(), num(p.value), num(p.reference), num(p.gap)]),
    ))
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn formatting() {
        assert_eq!(num(0.1 + 0.2), "0.3");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(1e-20), "1e-20");
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
