//! Named scenario configurations `fig1` ... `fig9`.
//!
//! Every preset is an ordinary configuration document, so it can be printed,
//! edited and passed back with `--config`.

pub const NAMES: [&str; 10] = [
    "fig1",
    "fig2",
    "fig3",
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "fig7-compact",
    "fig8",
    "fig9",
];

/// Configuration text of a preset and the subcommands it is meant for.
pub fn preset(name: &str) -> Option<(&'static str, &'static [&'static str])> {
    Some(match name {
        // coarse-grained eigenfunctions on [-1, 1] around τ = 0.9944
        "fig1" => (
            r#"
[box]
half_length = 1.0
nodes = 201

[evolve]
source = "coarse"
target_tau = 0.9944
converging_delta = 1e-7
p_max = 1500.0
p_points = 30001
q_half_width = 0.3
q_points = 301
t_start = 0.8
t_stop = 1.2
t_points = 41
window_half_width = 0.3
"#,
            &["spectrum", "evolve"],
        ),
        // complex-eigenvalue Razavi functions, τ = 1 ∓ i
        "fig2" => (
            r#"
[evolve]
source = "razavi_complex"
target_tau = 1.0
tau_imag = 1.0
converging_delta = 1e-3
p_max = 150.0
p_points = 3001
q_half_width = 3.0
q_points = 301
t_start = 0.0
t_stop = 2.0
t_points = 41
"#,
            &["evolve"],
        ),
        // real-eigenvalue Razavi functions at τ = 1
        "fig3" => (
            r#"
[evolve]
source = "razavi_real"
target_tau = 1.0
epsilons = [0.5, 0.2, 0.05]
converging_delta = 1e-3
p_max = 150.0
p_points = 3001
q_half_width = 0.5
q_points = 201
t_start = 0.5
t_stop = 1.5
t_points = 41
"#,
            &["evolve"],
        ),
        // exact expectation value against the asymptotic expansion
        "fig4" => (
            r#"
[packet]
q0 = -3.0
sigma = 0.5

[expectation]
momenta = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
n_max = 40
tolerance = 1e-9
"#,
            &["expectation"],
        ),
        // quantum correction factor over (p, σ)
        "fig5" => (
            r#"
[qfactor]
momenta = [0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0]
sigmas = [0.1, 0.3, 0.5, 1.0, 3.0]
n_max = 40
tolerance = 1e-10
"#,
            &["qfactor"],
        ),
        // analytic non-nodal and nodal eigenfunctions at τ = 1
        "fig6" => (
            r#"
[evolve]
source = "analytic"
target_tau = 1.0
converging_delta = 1e-3
p_max = 150.0
p_points = 3001
q_half_width = 0.5
q_points = 201
t_start = 0.8
t_stop = 1.2
t_points = 41
window_half_width = 0.3
"#,
            &["evolve"],
        ),
        // coarse and analytic distributions of a Gaussian
        "fig7" => (
            r#"
[packet]
q0 = -3.0
p0 = 5.0
sigma = 0.5

[box]
half_length = 10.0
nodes = 401

[momentum]
p_max = 40.0
points = 4001

[tau]
start = 0.0
stop = 8.0
points = 801
"#,
            &["dist", "spectrum"],
        ),
        // compact-support packet between q = -5 and q = -1
        "fig7-compact" => (
            r#"
[packet]
q0 = -3.0
p0 = 7.0
sigma = 0.5
support_half_width = 2.0

[momentum]
p_max = 100.0
points = 20001

[tau]
start = 0.0
stop = 12.0
points = 1201

[dist]
coarse = false
"#,
            &["dist"],
        ),
        // Razavi-real distributions as ε shrinks
        "fig8" => (
            r#"
[packet]
q0 = -3.0
p0 = 3.0
sigma = 0.5

[tau]
start = 0.0
stop = 10.0
points = 1001

[dist]
analytic = false
coarse = false
epsilons = [0.5, 0.1, 0.02]
"#,
            &["dist"],
        ),
        // translated distributions of an evolved Gaussian
        "fig9" => (
            r#"
[packet]
q0 = -3.0
p0 = 2.0
sigma = 0.5

[tau]
start = -2.0
stop = 12.0
points = 1401

[translate]
shifts = [0.5, 1.0, 2.0]
"#,
            &["translate"],
        ),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn every_preset_parses() {
        for name in NAMES {
            let (text, cmds) = preset(name).unwrap();
            parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!cmds.is_empty());
        }
        assert!(preset("fig10").is_none());
    }
}
