"""Modeling, analysis and live mapping of information flows in teams.

The modules are deliberately independent; import what you need:

- model: the core notation (stores, activities, flows) and its validator
- dsl: the plain-text format, round-trip safe
- dot: Graphviz export
- derive: process models in, document and role flows out; integration cuts
- merge: unify interview fragments, report contradictions
- patterns: find and repair recurring structures
- transform: small checked rewrites (solidify, shortcut, detour, ...)
- analysis: planned-vs-observed diffs and summary metrics
- quanta: stochastic information-loss simulation
- goals: goal-driven selection of analysis techniques
- mapserver: event-sourced live map service with an HTTP API
- cli: the `flowkit` command line
"""
