//! Deterministic artifact writers. All floating-point output uses a fixed
//! scientific format so identical runs produce bit-identical files.

use std::path::Path;

use serde::Serialize;

use ldg_core::analysis::{director_kappa, eigenvalues};
use ldg_core::fields::Field3;
use ldg_core::optimizer::{SolveStatus, SweepRecord};
use ldg_core::tangent::{
    kappa_tangent_formulas, lambda_pm, profile, profile_energy, profile_to_csv,
    HarmonicClass, KappaFormula, SignVariant,
};

use crate::config::RunConfig;
use crate::{Cli, RunError};

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

#[derive(Serialize)]
pub struct Versioned<T: Serialize> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

pub fn versioned<T: Serialize>(body: &T) -> Versioned<&T> {
    Versioned {
        schema_version: OUTPUT_SCHEMA_VERSION,
        body,
    }
}

pub fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(out.join(name), text)?;
    Ok(())
}

pub fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::LineSearchStalled => "line_search_stalled",
        SolveStatus::IterationLimit => "iteration_limit",
    }
}

#[derive(Serialize)]
struct Status<'a> {
    schema_version: u32,
    run_id: &'a str,
    status: &'a str,
    iterations: usize,
    seed: u64,
    threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

pub fn write_status(
    out: &Path,
    cfg: &RunConfig,
    cli: &Cli,
    status: &str,
    iterations: usize,
    error: Option<&str>,
) -> Result<(), RunError> {
    write_json(
        out,
        "status.json",
        &Status {
            schema_version: OUTPUT_SCHEMA_VERSION,
            run_id: &cfg.run_id,
            status,
            iterations,
            seed: cli.seed,
            threads: cli.threads,
            error,
        },
    )
}

/// Per-node dump; the director columns are `nan` at uniaxial points where
/// the meridian direction is undefined.
pub fn field_csv(u: &Field3) -> String {
    let mesh = &u.mesh;
    let n = mesh.n;
    let mut s = String::from("rho,z,u1,u2,u3,lambda1,lambda2,lambda3,kappa_rho,kappa_z\n");
    for j in 0..=n {
        for i in 0..=n {
            let v = u.at(i, j);
            let e = eigenvalues(v);
            let k = director_kappa(v).unwrap_or([f64::NAN, f64::NAN]);
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                fmt(mesh.rho(i)),
                fmt(mesh.z(j)),
                fmt(v[0]),
                fmt(v[1]),
                fmt(v[2]),
                fmt(e.l1),
                fmt(e.l2),
                fmt(e.l3),
                fmt(k[0]),
                fmt(k[1]),
            ));
        }
    }
    s
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from(
        "value,dirichlet,singular,potential,total,parity,ring_radius,\
         winding_half_turns,dumbbell_z0,l2_distance,status\n",
    );
    let opt = |x: Option<f64>| x.map_or_else(|| "nan".into(), fmt);
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(r.value),
            fmt(r.report.dirichlet),
            fmt(r.report.singular),
            fmt(r.report.potential),
            fmt(r.report.total),
            r.defects.parity,
            opt(r.defects.ring_radius),
            opt(r.defects.winding_half_turns),
            opt(r.defects.dumbbell.map(|d| d.z0)),
            fmt(r.defects.l2_distance_to_reference),
            status_name(r.status),
        ));
    }
    s
}

pub fn write_tangent_exports(out: &Path, cfg: &RunConfig) -> Result<(), RunError> {
    let samples = cfg.samples.max(1000);
    let mut energies = String::from("profile,beta,e2,ball_energy\n");
    for variant in [SignVariant::Plus, SignVariant::Minus] {
        let tag = match variant {
            SignVariant::Plus => "plus",
            SignVariant::Minus => "minus",
        };
        let p = lambda_pm(variant, samples);
        let (e2, ball) = profile_energy(&p);
        energies.push_str(&format!("lambda_{tag},nan,{},{}\n", fmt(e2), fmt(ball)));
        std::fs::write(out.join(format!("profile_lambda_{tag}.csv")), profile_to_csv(&p))?;
        for (class, name) in [(HarmonicClass::II, "ii"), (HarmonicClass::III, "iii")] {
            for &beta in &cfg.beta_values {
                let p = profile(class, beta, variant, samples)
                    .map_err(|e| crate::config::ConfigError::Invalid(e.to_string()))?;
                let (e2, ball) = profile_energy(&p);
                energies.push_str(&format!(
                    "class_{name}_{tag},{},{},{}\n",
                    fmt(beta),
                    fmt(e2),
                    fmt(ball)
                ));
                std::fs::write(
                    out.join(format!("profile_{name}_{tag}_beta_{beta}.csv")),
                    profile_to_csv(&p),
                )?;
            }
        }
    }
    std::fs::write(out.join("profile_energies.csv"), energies)?;

    let mut table = String::from(
        "phi,ring_kappa_rho,ring_kappa_z,split_plus_kappa_rho,split_plus_kappa_z,\
         split_minus_kappa_rho,split_minus_kappa_z\n",
    );
    let m = 1000usize;
    for k in 0..=m {
        let phi = std::f64::consts::PI * k as f64 / m as f64;
        let cell = |f: KappaFormula| match kappa_tangent_formulas(phi, f) {
            Ok(k) => format!("{},{}", fmt(k[0]), fmt(k[1])),
            Err(_) => "nan,nan".into(),
        };
        table.push_str(&format!(
            "{},{},{},{}\n",
            fmt(phi),
            cell(KappaFormula::Ring(cfg.ring_kappa)),
            cell(KappaFormula::SplitPlus),
            cell(KappaFormula::SplitMinus),
        ));
    }
    std::fs::write(out.join("kappa_formulas.csv"), table)?;
    Ok(())
}
