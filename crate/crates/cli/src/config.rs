//! TOML run configuration.
//!
//! ```toml
//! [scenario]
//! scenario = "gfe1"        # jmgt | gfe1 | gfe3 | gfe | custom
//! alpha = 0.3
//! tau = 0.01
//! delta = 0.5
//! c = 1.0
//! u0_modes = [1.0, 0.0, 0.2]   # sine amplitudes, lowest mode first
//!
//! [nonlinearity]
//! mode = "wb"              # linear | wb | kb
//! k1 = 1.0
//!
//! [discretization]
//! n_modes = 8
//! dt = 1e-3
//! T = 1.0
//!
//! [output]
//! out_dir = "runs/gfe1"
//! ```

use std::path::PathBuf;

use nlwave_core::kernels::AssumptionId;
use nlwave_core::solver::{Forcing, ForcingTerm, InitialData, ScenarioConfig, TimeProfile};
use nlwave_core::{Domain, Kernel, KernelPair, ModalField, NonlinearityMode, ScenarioTag};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<RawScenario>,
    kernels: Option<RawKernels>,
    nonlinearity: Option<RawNonlinearity>,
    discretization: Option<RawDiscretization>,
    output: Option<RawOutput>,
    experiment: Option<RawExperiment>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    scenario: Option<String>,
    alpha: Option<f64>,
    tau: Option<f64>,
    tau_bar: Option<f64>,
    delta: Option<f64>,
    c: Option<f64>,
    u0_modes: Option<Vec<f64>>,
    u1_modes: Option<Vec<f64>>,
    u2_modes: Option<Vec<f64>>,
    forcing: Option<Vec<RawForcing>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    /// 1-based mode index in ascending eigenvalue order.
    mode: usize,
    amplitude: f64,
    profile: String,
    omega: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernels {
    k1: Option<Kernel>,
    k2: Option<Kernel>,
    power_a: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlinearity {
    mode: Option<String>,
    k1: Option<f64>,
    k2: Option<f64>,
    k3: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    n_modes: Option<usize>,
    n_modes_y: Option<usize>,
    length: Option<f64>,
    width: Option<f64>,
    dt: Option<f64>,
    #[serde(rename = "T")]
    final_time: Option<f64>,
    picard_tol: Option<f64>,
    picard_max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    out_dir: Option<PathBuf>,
    stride: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    taus: Option<Vec<f64>>,
    steps: Option<Vec<f64>>,
    amplitude: Option<f64>,
    omega: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
    assumptions: Option<Vec<String>>,
}

/// Settings of the sweep, convergence and certificate subcommands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSettings {
    pub taus: Vec<f64>,
    pub steps: Vec<f64>,
    pub amplitude: f64,
    pub omega: f64,
    pub trials: usize,
    pub seed: u64,
    pub assumptions: Vec<AssumptionId>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            taus: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            steps: vec![4e-3, 2e-3, 1e-3],
            amplitude: 1.0,
            omega: 3.0,
            trials: 1000,
            seed: 0,
            assumptions: AssumptionId::ALL.to_vec(),
        }
    }
}

/// A parsed and validated configuration file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub data: InitialData,
    pub out_dir: Option<PathBuf>,
    pub experiment: ExperimentSettings,
}

/// Parses a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::config(e.message().to_string()))?;
    let mut issues = Vec::new();
    let sc = raw.scenario.unwrap_or_default();
    let kernels = raw.kernels.unwrap_or_default();
    let nl = raw.nonlinearity.unwrap_or_default();
    let disc = raw.discretization.unwrap_or_default();
    let out = raw.output.unwrap_or_default();
    let exp = raw.experiment.unwrap_or_default();

    let mut required = |value: bool, key: &str| {
        if !value {
            issues.push(format!("missing key '{key}'"));
        }
    };
    required(sc.scenario.is_some(), "scenario");
    required(disc.dt.is_some(), "dt");
    required(disc.final_time.is_some(), "T");
    required(disc.n_modes.is_some(), "n_modes");

    let tag = match sc.scenario.as_deref().map(str::parse::<ScenarioTag>) {
        Some(Ok(tag)) => Some(tag),
        Some(Err(e)) => {
            issues.push(e.to_string());
            None
        }
        None => None,
    };
    let pair = match tag {
        Some(ScenarioTag::Custom) => match (kernels.k1, kernels.k2, kernels.power_a) {
            (Some(k1), Some(k2), Some(a)) => match KernelPair::custom(k1, k2, a) {
                Ok(p) => Some(p),
                Err(e) => {
                    issues.push(e.to_string());
                    None
                }
            },
            _ => {
                issues.push("scenario 'custom' needs k1, k2 and power_a in [kernels]".into());
                None
            }
        },
        Some(tag) => {
            if kernels.k1.is_some() || kernels.k2.is_some() || kernels.power_a.is_some() {
                issues.push("[kernels] is only read for scenario 'custom'".into());
            }
            let alpha = match (tag, sc.alpha) {
                (ScenarioTag::Jmgt, a) => Some(a.unwrap_or(1.0)),
                (_, Some(a)) => Some(a),
                (_, None) => {
                    issues.push(format!("missing key 'alpha' for scenario '{}'", tag.name()));
                    None
                }
            };
            alpha.and_then(|a| match KernelPair::named(tag, a) {
                Ok(p) => Some(p),
                Err(e) => {
                    issues.push(e.to_string());
                    None
                }
            })
        }
        None => None,
    };

    let mode = match nl.mode.as_deref().map(str::parse::<NonlinearityMode>) {
        None => NonlinearityMode::Linear,
        Some(Ok(m)) => m,
        Some(Err(e)) => {
            issues.push(e.to_string());
            NonlinearityMode::Linear
        }
    };

    let domain = match (disc.n_modes, disc.n_modes_y) {
        (Some(n), None) => Domain::interval(disc.length.unwrap_or(1.0), n),
        (Some(n), Some(ny)) => Domain::rectangle(disc.length.unwrap_or(1.0), disc.width.unwrap_or(1.0), n, ny),
        _ => Domain::interval(1.0, 1),
    };
    let domain = match domain {
        Ok(d) => d,
        Err(e) => {
            issues.push(e.to_string());
            Domain::interval(1.0, 1).expect("unit interval")
        }
    };
    if disc.width.is_some() && disc.n_modes_y.is_none() {
        issues.push("'width' needs 'n_modes_y'".into());
    }

    let modes = domain.mode_count();
    let mut forcing = Forcing::zero();
    let scale = domain.sine_to_modal();
    for (i, f) in sc.forcing.unwrap_or_default().into_iter().enumerate() {
        if f.mode == 0 || f.mode > modes {
            issues.push(format!("forcing term {} targets mode {} of {modes}", i + 1, f.mode));
            continue;
        }
        let profile = match (f.profile.as_str(), f.omega) {
            ("constant", None) => TimeProfile::Constant,
            ("sin", Some(omega)) => TimeProfile::Sin { omega },
            ("cos", Some(omega)) => TimeProfile::Cos { omega },
            (p, _) => {
                issues.push(format!(
                    "forcing term {} has profile '{p}'; use constant, or sin/cos with omega",
                    i + 1
                ));
                continue;
            }
        };
        let mut modal = vec![0.0; modes];
        modal[f.mode - 1] = f.amplitude * scale;
        forcing.terms.push(ForcingTerm { modal, profile });
    }

    let field = |amps: Option<Vec<f64>>, key: &str, issues: &mut Vec<String>| {
        ModalField::from_sine_amplitudes(domain, &amps.unwrap_or_default()).unwrap_or_else(|e| {
            issues.push(format!("{key}: {e}"));
            ModalField::zeros(domain)
        })
    };
    let data = InitialData {
        u0: field(sc.u0_modes, "u0_modes", &mut issues),
        u1: field(sc.u1_modes, "u1_modes", &mut issues),
        u2: field(sc.u2_modes, "u2_modes", &mut issues),
    };

    let mut experiment = ExperimentSettings::default();
    if let Some(t) = exp.taus {
        experiment.taus = t;
    }
    if let Some(s) = exp.steps {
        experiment.steps = s;
    }
    experiment.amplitude = exp.amplitude.unwrap_or(experiment.amplitude);
    experiment.omega = exp.omega.unwrap_or(experiment.omega);
    experiment.trials = exp.trials.unwrap_or(experiment.trials);
    experiment.seed = exp.seed.unwrap_or(experiment.seed);
    if let Some(names) = exp.assumptions {
        experiment.assumptions.clear();
        for name in names {
            match name.parse::<AssumptionId>() {
                Ok(id) => experiment.assumptions.push(id),
                Err(e) => issues.push(e.to_string()),
            }
        }
    }

    let Some(pair) = pair else {
        return Err(CliError::Config(issues));
    };
    let scenario = ScenarioConfig {
        alpha: pair.alpha(),
        pair,
        tau: sc.tau.unwrap_or(0.0),
        tau_bar: sc.tau_bar.unwrap_or(1.0),
        delta: sc.delta.unwrap_or(0.0),
        c: sc.c.unwrap_or(1.0),
        k1: nl.k1.unwrap_or(0.0),
        k2: nl.k2.unwrap_or(0.0),
        k3: nl.k3.unwrap_or(0.0),
        mode,
        forcing,
        final_time: disc.final_time.unwrap_or(1.0),
        step: disc.dt.unwrap_or(1e-3),
        domain,
        output_stride: out.stride.unwrap_or(1),
        picard_tol: disc.picard_tol.unwrap_or(1e-10),
        picard_max_iter: disc.picard_max_iter.unwrap_or(50),
    };
    if let Err(nlwave_core::Error::InvalidConfig(more)) = scenario.validate(Some(&data)) {
        issues.extend(more);
    }
    if issues.is_empty() {
        Ok(RunConfig { scenario, data, out_dir: out.out_dir, experiment })
    } else {
        Err(CliError::Config(issues))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[scenario]\nscenario = \"jmgt\"\ntau = 0.01\n[discretization]\nn_modes = 4\ndt = 1e-3\nT = 0.1\n";

    fn issues(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(CliError::Config(v)) => v,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn jmgt_pair_auto_filled() {
        let cfg = parse_config(MINIMAL).unwrap().scenario;
        assert_eq!(cfg.pair.k1, Kernel::DiracDelta);
        assert_eq!(cfg.pair.k2, Kernel::ConstantOne);
        assert_eq!(cfg.pair.power_a, 1.0);
        assert_eq!(cfg.tau, 0.01);
    }

    #[test]
    fn gfe1_pair_auto_filled() {
        let text = MINIMAL.replace("\"jmgt\"", "\"gfe1\"\nalpha = 0.3");
        let cfg = parse_config(&text).unwrap().scenario;
        assert_eq!(cfg.pair.k1, Kernel::Abel { order: 0.7 });
        assert_eq!(cfg.pair.k2, Kernel::Abel { order: 0.3 });
        assert_eq!(cfg.pair.power_a, 0.3);
    }

    #[test]
    fn missing_dt_named() {
        let all = issues(&MINIMAL.replace("dt = 1e-3\n", ""));
        assert!(all.iter().any(|i| i.contains("'dt'")), "{all:?}");
    }

    #[test]
    fn unknown_key_named() {
        let all = issues(&MINIMAL.replace("tau = 0.01", "tau = 0.01\ntua = 1.0"));
        assert!(all.iter().any(|i| i.contains("tua")), "{all:?}");
    }

    #[test]
    fn gfe3_low_alpha_cites_resolvent() {
        let text = MINIMAL.replace("\"jmgt\"", "\"gfe3\"\nalpha = 0.4");
        let all = issues(&text);
        assert!(all.iter().any(|i| i.contains("resolvent")), "{all:?}");
    }

    #[test]
    fn every_issue_listed() {
        let text = "[scenario]\nscenario = \"gfe\"\n[discretization]\nT = 1.0\n";
        let all = issues(text);
        assert!(all.iter().any(|i| i.contains("'dt'")));
        assert!(all.iter().any(|i| i.contains("'n_modes'")));
        assert!(all.iter().any(|i| i.contains("'alpha'")));
    }

    #[test]
    fn custom_kernels_and_forcing() {
        let text = r#"
[scenario]
scenario = "custom"
forcing = [{ mode = 2, amplitude = 1.0, profile = "sin", omega = 2.0 }]
[kernels]
k1 = { kind = "dirac_delta" }
k2 = { kind = "tabulated", grid = [0.0, 1.0], values = [1.0, 1.0] }
power_a = 1.0
[discretization]
n_modes = 3
dt = 1e-3
T = 0.1
[experiment]
assumptions = ["A2", "H4"]
"#;
        let run = parse_config(text).unwrap();
        assert!(matches!(run.scenario.pair.k2, Kernel::Tabulated(_)));
        let f = run.scenario.forcing.eval(std::f64::consts::FRAC_PI_4, 3);
        assert!(f[0] == 0.0 && (f[1] - 0.5f64.sqrt()).abs() < 1e-15 && f[2] == 0.0);
        assert_eq!(run.experiment.assumptions, vec![AssumptionId::A2, AssumptionId::H4]);
    }

    #[test]
    fn kernels_section_rejected_for_named_laws() {
        let text = format!("{MINIMAL}[kernels]\npower_a = 0.5\n");
        assert!(issues(&text).iter().any(|i| i.contains("custom")));
    }
}
