//! Named scenarios. Each is a complete table that can be overridden key by key.

use toml::Table;

pub const NAMES: [&str; 11] =
    ["fig1a", "fig1b", "fig1c", "fig1d", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7a", "fig7b"];

const COMMON: &str = r#"
delta = 1.0
v = 0.7
kappa = 0.01
beta = 10.0
t_start = 0.0
t_end = 1000.0
t_count = 1001
spacing = "linear"
"#;

fn body(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1a" => "description = \"two baths, psi_a\"\ntopology = \"two_bath\"\nstate = \"psi_a\"",
        "fig1b" => "description = \"two baths, psi_b\"\ntopology = \"two_bath\"\nstate = \"psi_b\"",
        "fig1c" => "description = \"two baths, singlet start\"\ntopology = \"two_bath\"\nstate = \"psi_c\"",
        "fig1d" => "description = \"two baths, psi_d\"\ntopology = \"two_bath\"\nstate = \"psi_d\"",
        "fig2" => "description = \"common bath, psi_a\"\ntopology = \"single_bath\"\nstate = \"psi_a\"",
        "fig3" => "description = \"common bath, psi_b\"\ntopology = \"single_bath\"\nstate = \"psi_b\"",
        "fig4" => {
            "description = \"common bath, psi_d, long times\"
topology = \"single_bath\"
state = \"psi_d\"
spacing = \"log\"
t_start = 0.01
t_end = 2.0e6
t_count = 801"
        }
        "fig5" => {
            "description = \"common bath, psi_a, coupling sweep\"
topology = \"single_bath\"
state = \"psi_a\"
t_end = 300.0
t_count = 1201
sweep = \"kappa\"
values = [0.1, 0.2, 0.3, 0.4]"
        }
        "fig6" => {
            "description = \"common bath, psi_a, temperature sweep\"
topology = \"single_bath\"
state = \"psi_a\"
t_count = 2001
sweep = \"beta\"
values = [20.0, 5.0, 1.0, 0.1]"
        }
        "fig7a" => "description = \"common bath, mix1\"\ntopology = \"single_bath\"\nstate = \"mix1\"\nbeta = 20.0",
        "fig7b" => "description = \"common bath, mix2\"\ntopology = \"single_bath\"\nstate = \"mix2\"\nbeta = 20.0",
        _ => return None,
    })
}

/// The table for a preset, or `None` for an unknown name.
pub fn table(name: &str) -> Option<Table> {
    let body = body(name)?;
    let mut t: Table = COMMON.parse().expect("common preset keys parse");
    let extra: Table = body.parse().expect("preset body parses");
    t.extend(extra);
    Some(t)
}

/// One-line description of a preset.
pub fn description(name: &str) -> Option<String> {
    table(name)?.get("description")?.as_str().map(String::from)
}
