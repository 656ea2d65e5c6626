//! Regenerate the repository copy of the feature manifest:
//! `cargo run -p rumour-core --example dump_manifest > data/feature_manifest.csv`

fn main() {
    print!("{}", rumour_core::features::manifest_text());
}
