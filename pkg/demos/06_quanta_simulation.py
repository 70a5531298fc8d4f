"""How much arrives at the end of a relay, and how much of it is wrong.

The simulation treats a piece of information as a pool of small units.
Each step, every flow picks a few units at random from its origin and
delivers them; a unit can arrive falsified, and liquid stores forget.
Coverage (fraction of correct units held) and contamination (wrong
units held) per node and step tell where a setup loses or distorts.
"""

from flowkit import dsl
from flowkit.quanta import QuantaConfig, expected_distinct, run_trials, simulate

RELAY = """\
model Stille-Post ist
store Kunde liquid
store Analytiker liquid
store Entwickler liquid
flow Kunde -> Analytiker liquid
flow Analytiker -> Entwickler liquid
"""

model = dsl.parse(RELAY)

# Noisy retelling: 5 percent of transfers distort the unit, and people
# forget 2 percent of what they hold per step.
cfg = QuantaConfig(
    n_quanta=100,
    draws_per_step=40,
    steps=8,
    seed=1,
    falsify_prob=0.05,
    retention=0.98,
)
report = simulate(model, cfg, "Kunde")
print(report.summary())
print(
    "coverage at Entwickler over time:",
    [round(c, 2) for c in report.trace("Entwickler").coverage],
)

# Sanity anchor: across one direct hop the mean number of distinct
# units delivered by k random draws from a pool of n has a closed form.
wire = dsl.parse(
    "model Draht\n"
    "store Sender liquid\n"
    "store Empfaenger liquid\n"
    "flow Sender -> Empfaenger liquid\n"
)
clean = QuantaConfig(n_quanta=100, draws_per_step=50, steps=1, seed=4711)
stats = run_trials(wire, clean, "Sender", "Empfaenger", trials=2_000)
print()
print(f"simulated over {stats.trials} trials: {stats.mean:.2f}"
      f" +- {stats.std_error:.2f}")
print(f"closed form says:             {expected_distinct(100, 50):.2f}")
