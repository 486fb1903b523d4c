//! `sturm phantom`: the image of a weight-`(m-1)` expansion under Sturm's
//! operator after the Maass shift.

use std::time::Instant;

use serde::Serialize;

use sturm_core::cone::MonteCarloParams;
use sturm_core::maass::FourierExpansion;
use sturm_core::special::HalfInteger;
use sturm_core::sturm::{
    a_closed, phantom_series, sturm_limit, sturm_numeric, MaassCoefficient, SturmRegime, SturmResult,
};

use crate::report::{Check, SCHEMA_VERSION};
use crate::CliError;

const MAX_CROSSCHECK_GENUS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomOptions {
    pub crosscheck: bool,
    pub s: f64,
    pub samples: usize,
    pub seed: u64,
    pub nu: Option<f64>,
}

impl Default for PhantomOptions {
    fn default() -> Self {
        PhantomOptions { crosscheck: false, s: 1.0, samples: 1_000_000, seed: 7, nu: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhantomReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub m: usize,
    pub k: i64,
    pub regime: SturmRegime,
    pub image: FourierExpansion,
    pub coefficients: Vec<SturmResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub crosscheck: Vec<Check>,
    pub wall_time_s: f64,
    pub pass: bool,
}

pub fn parse_expansion(text: &str) -> Result<FourierExpansion, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed expansion: {e}")))
}

pub fn run_phantom(h: &FourierExpansion, opts: &PhantomOptions) -> Result<PhantomReport, CliError> {
    let start = Instant::now();
    let m = h.genus();
    let k = h.weight();
    let regime = SturmRegime::classify(m, k, true)?;
    let (image, note) = match regime {
        SturmRegime::Phantom => (phantom_series(h)?, None),
        _ => {
            let mut zero = FourierExpansion::new(m, k + 2)?;
            for (t, _) in h.terms() {
                zero.insert(t.clone(), 0.0)?;
            }
            (zero, Some(format!("Corollary: vanishes for weight k = {k} >= m = {m}")))
        }
    };
    let coefficients = h.terms().map(|(t, b)| sturm_limit(m, k, t, b)).collect::<Result<Vec<_>, _>>()?;

    let mut crosscheck = Vec::new();
    if opts.crosscheck {
        if m > MAX_CROSSCHECK_GENUS {
            return Err(CliError::Unsupported(format!(
                "Monte Carlo cross-check is limited to m <= {MAX_CROSSCHECK_GENUS}"
            )));
        }
        if opts.samples == 0 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        for (i, (t, b)) in h.terms().enumerate() {
            let params = MonteCarloParams {
                samples: opts.samples,
                seed: opts.seed.wrapping_add(i as u64),
                nu: opts.nu,
                ..Default::default()
            };
            let closed = a_closed(m, k, opts.s, t, b)?;
            let coeff = MaassCoefficient::new(k, t, b);
            let est = sturm_numeric(m, HalfInteger::from_int(k + 2), &coeff, t, opts.s, &params)?;
            crosscheck.push(Check::sigma(
                format!("phantom/crosscheck/{i}"),
                "Monte Carlo a(T,s) against the closed form",
                closed,
                est.scalar(),
                est.scalar_stderr(),
                3.0,
            ));
        }
    }
    let pass = crosscheck.iter().all(|c| c.pass);
    Ok(PhantomReport {
        schema: SCHEMA_VERSION,
        command: "phantom",
        m,
        k,
        regime,
        image,
        coefficients,
        note,
        crosscheck,
        wall_time_s: start.elapsed().as_secs_f64(),
        pass,
    })
}
