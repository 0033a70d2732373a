"""Scenario runner, canonical encoding, brute-force oracles and the CLI
plumbing. Import the submodules directly (mdp.harness.runner,
mdp.harness.encoding, ...): the package init stays empty because the
transport layer uses the canonical encoding too, and eager re-exports
here would create an import cycle."""
