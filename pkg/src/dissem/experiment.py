"""Batch comparison of scheduled cost against the distance lower bound.

For each generated instance the scheduler runs with exactly the graph's
horizon as the round budget; the cost ratio against the summed-distance
bound lands in one of six histogram bins.  Percentages are integers by
largest remainder so they always sum to exactly 100.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from dissem import multiround
from dissem.bounds import dmax_lower_bound
from dissem.errors import DissemError
from dissem.generate import corpus_rng, random_instance

BIN_LOWER = (Fraction(1), Fraction(6, 5), Fraction(7, 5),
             Fraction(8, 5), Fraction(9, 5), Fraction(2))
BIN_LABELS = ("[1, 1.2)", "[1.2, 1.4)", "[1.4, 1.6)",
              "[1.6, 1.8)", "[1.8, 2.0)", "[2.0, inf)")


def bin_index(ratio: Fraction) -> int:
    if ratio < 1:
        raise ValueError(f"ratio {ratio} below 1 contradicts the lower bound")
    idx = 0
    for i, lo in enumerate(BIN_LOWER):
        if ratio >= lo:
            idx = i
    return idx


def integer_percentages(counts: list[int]) -> list[int]:
    """Integer percentages summing to exactly 100 (largest remainder)."""
    total = sum(counts)
    if total == 0:
        return [0] * len(counts)
    shares = [Fraction(100 * c, total) for c in counts]
    floors = [int(s) for s in shares]
    remainder = 100 - sum(floors)
    order = sorted(range(len(counts)),
                   key=lambda i: (shares[i] - floors[i], -i), reverse=True)
    for i in order[:remainder]:
        floors[i] += 1
    return floors


@dataclass(frozen=True)
class InstanceOutcome:
    index: int
    tau_total: int
    dmax: int
    ratio: Fraction


@dataclass(frozen=True)
class ExperimentReport:
    nodes: int
    symbols: int
    diameter: int
    count: int
    seed: int
    strategy: str
    outcomes: tuple[InstanceOutcome, ...]
    failures: tuple[tuple[int, str], ...]

    def histogram(self) -> list[int]:
        counts = [0] * len(BIN_LOWER)
        for o in self.outcomes:
            counts[bin_index(o.ratio)] += 1
        return counts

    def percentages(self) -> list[int]:
        return integer_percentages(self.histogram())


def run_experiment(nodes: int, symbols: int, diameter: int, count: int,
                   seed: int, strategy: str = "exact",
                   q: int = 2) -> ExperimentReport:
    """Generate, schedule and bin `count` instances; failures are logged, not fatal."""
    outcomes: list[InstanceOutcome] = []
    failures: list[tuple[int, str]] = []
    for i in range(count):
        try:
            rng = corpus_rng(seed, nodes, symbols, diameter, i)
            inst = random_instance(nodes, symbols, diameter, rng, q=q)
            if strategy == "random":
                sched = multiround.schedule_random(
                    inst, diameter, seed=seed * 9176 + i
                )
            else:
                sched = multiround.schedule(inst, diameter)
            lo = dmax_lower_bound(inst)
            if lo == 0:
                failures.append((i, "zero lower bound"))
                continue
            outcomes.append(InstanceOutcome(
                index=i, tau_total=sched.tau_total, dmax=lo,
                ratio=Fraction(sched.tau_total, lo),
            ))
        except (DissemError, ValueError) as e:
            failures.append((i, str(e)))
    return ExperimentReport(
        nodes=nodes, symbols=symbols, diameter=diameter, count=count,
        seed=seed, strategy=strategy,
        outcomes=tuple(outcomes), failures=tuple(failures),
    )


def format_table(report: ExperimentReport) -> str:
    """Two-row histogram table in the Range / Occurrence layout."""
    if not report.outcomes:
        return "no instances"
    widths = [max(len(lbl), 3) for lbl in BIN_LABELS]
    pct = report.percentages()
    head = "Range          | " + " | ".join(
        lbl.rjust(w) for lbl, w in zip(BIN_LABELS, widths))
    body = "Occurrence, %  | " + " | ".join(
        str(p).rjust(w) for p, w in zip(pct, widths))
    return head + "\n" + body


def to_csv(report: ExperimentReport) -> str:
    lines = ["index,tau,dmax,ratio,ratio_float"]
    for o in report.outcomes:
        lines.append(f"{o.index},{o.tau_total},{o.dmax},{o.ratio},{float(o.ratio):.6f}")
    for i, reason in report.failures:
        lines.append(f"{i},,,failed: {reason},")
    return "\n".join(lines) + "\n"
