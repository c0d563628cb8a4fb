"""Command-line harness: scenario files, invariant suites, certificates and scans."""
