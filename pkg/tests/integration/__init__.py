"""End-to-end flows through the `prl` command line."""
