"""stpsim: a feature-model-driven equity market ecosystem simulator.

Products of the ecosystem (broker, custodian, exchange, clearing stacks
with bound variants) are derived from a feature catalog, wired through an
in-process service registry, and exercised by order life-cycle scenarios
that check balances and conservation at every step.
"""

__version__ = "0.1.0"
