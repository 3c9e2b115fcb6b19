//! Holds the `acceptance` test target, which checks the simulator against
//! reference values and analytic limits and prints one PASS/FAIL line per
//! criterion. Run it with `cargo test -p crescent-validation`.
