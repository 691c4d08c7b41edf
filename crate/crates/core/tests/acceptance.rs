use foms_core::harness::{verify, BoundTag};

const SEED: u64 = 20_240_501;

/// Criteria that fail at the documented tolerances; they still print FAIL.
const KNOWN_FAILING: [BoundTag; 1] = [BoundTag::RestartLinear];

fn main() {
    let mut unexpected = Vec::new();
    for (i, bound) in BoundTag::ALL.into_iter().enumerate() {
        let (passed, line) = match verify(bound, SEED) {
            Ok(report) => {
                let status = if report.passed() { "PASS" } else { "FAIL" };
                let mut line = format!(
                    "[{status}] {:>2} {bound}: {} ({})",
                    i + 1,
                    report.summary(),
                    report.spec
                );
                for d in &report.details {
                    line.push_str(&format!("\n        {d}"));
                }
                (report.passed(), line)
            }
            Err(e) => (false, format!("[FAIL] {:>2} {bound}: error: {e}", i + 1)),
        };
        println!("{line}");
        if !passed && !KNOWN_FAILING.contains(&bound) {
            unexpected.push(bound);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("failing criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
