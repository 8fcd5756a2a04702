//! Two tones 100 Hz apart and two impulses 40 ms apart, seen through a
//! short-window spectrogram, a long-window spectrogram and a scalogram.
//!
//! ```text
//! cargo run --release --example resolution_demo [out_dir]
//! ```

use tfscope::demo::{run_resolution_demo, write_resolution_demo, DemoConfig, PanelVerdict};

fn show(p: &PanelVerdict) {
    println!(
        "{:26} impulses {} (want {})  tones {} (want {})  {}",
        p.name,
        p.impulse_peaks.count,
        p.expected_impulse_peaks,
        p.tone_peaks.count,
        p.expected_tone_peaks,
        if p.pass { "ok" } else { "MISMATCH" }
    );
}

fn main() -> tfscope::Result<()> {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "target/resolution_demo".into());
    let config = DemoConfig::default();
    let demo = run_resolution_demo(&config)?;
    show(&demo.verdict.short_window);
    show(&demo.verdict.long_window);
    show(&demo.verdict.scalogram);
    write_resolution_demo(&demo, &config, &out_dir)?;
    println!("images and verdict.json in {out_dir}");
    Ok(())
}
