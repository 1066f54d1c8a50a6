//! Built-in configurations for the reference experiments, shipped with the binary.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig3", include_str!("../presets/fig3.conf")),
    ("fig4", include_str!("../presets/fig4.conf")),
    ("fig5", include_str!("../presets/fig5.conf")),
    ("fig6", include_str!("../presets/fig6.conf")),
    ("fig7", include_str!("../presets/fig7.conf")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}
