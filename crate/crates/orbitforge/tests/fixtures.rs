use std::path::Path;

use orbitforge::selfcheck::check_fixtures;

#[test]
fn shipped_fixtures_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let r = check_fixtures(&dir);
    assert!(r.passed, "{r}");
    assert!(r.cases >= 7);
}
