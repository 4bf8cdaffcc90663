//! One-line pass/fail reporting for acceptance criteria.

use std::io::Write as _;

pub fn status_line(n: u32, what: &str, ok: bool, detail: &str) -> String {
    let status = if ok { "PASS" } else { "FAIL" };
    format!("{status} criterion {n}: {what} [{detail}]")
}

/// Writes the status line straight to stderr, bypassing test output capture, then asserts.
pub fn report(n: u32, what: &str, ok: bool, detail: String) {
    let line = status_line(n, what, ok, &detail);
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(ok, "{line}");
}
