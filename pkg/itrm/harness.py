import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable, Iterable, Sequence, TypeVar

from tqdm import tqdm

from itrm.isa import Program
from itrm.oracle import OracleSpec
from itrm.vm import (
    Budgets,
    Engine,
    Exhausted,
    Halted,
    NonHalting,
    RunOutcome,
    Undefined,
    load_config,
)

logger = logging.getLogger('itrm.logger')

T = TypeVar('T')


@dataclass(frozen=True)
class SafetyReport:
    verdict: str  # SAFE, UNSAFE or UNKNOWN
    outcomes: tuple[RunOutcome, ...]
    witness: int | None = None


@dataclass(frozen=True)
class RecognizerReport:
    verdict: str  # PASS, FAIL or INCONCLUSIVE
    outcomes: tuple[RunOutcome, ...]
    targets: frozenset[int]


def _config(budgets: Budgets | None, options: dict[str, Any]) -> dict[str, Any]:
    return load_config() | asdict(budgets or Budgets()) | options


def _fan_out(
    job: Callable[[Engine, T], RunOutcome],
    items: Sequence[T],
    config: dict[str, Any],
    progress: bool,
) -> list[RunOutcome]:
    """Run job over items, each on its own Engine; results keep the order of items."""
    workers = int(config.get('workers', 1))
    if workers <= 1:
        engine = Engine(config)
        return [job(engine, item) for item in tqdm(items, disable=not progress)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = executor.map(lambda item: job(Engine(config), item), items)
        return list(tqdm(results, total=len(items), disable=not progress))


def classify_inputs(
    p: Program,
    o: OracleSpec,
    inputs: Sequence[int],
    budgets: Budgets | None = None,
    progress: bool = False,
    **options: Any,
) -> list[RunOutcome]:
    return _fan_out(
        lambda engine, i: engine.run(p, o, i)[0], inputs, _config(budgets, options), progress
    )


def safety_check(
    p: Program,
    o: OracleSpec,
    inputs: int,
    budgets: Budgets | None = None,
    progress: bool = False,
    **options: Any,
) -> SafetyReport:
    """Whether p halts on o for every input below `inputs`.

    A certified non-halting (or undefined) run makes the oracle UNSAFE with that input as
    witness; otherwise any exhausted run leaves the answer UNKNOWN.
    """
    outcomes = tuple(classify_inputs(p, o, range(inputs), budgets, progress, **options))
    for i, outcome in enumerate(outcomes):
        if isinstance(outcome, (NonHalting, Undefined)):
            logger.info(f'unsafe: input {i} gives {outcome}')
            return SafetyReport('UNSAFE', outcomes, i)
    if any(isinstance(outcome, Exhausted) for outcome in outcomes):
        return SafetyReport('UNKNOWN', outcomes)
    return SafetyReport('SAFE', outcomes)


def check_recognizer(
    p: Program,
    family: Sequence[OracleSpec],
    target_index: int | Iterable[int],
    budgets: Budgets | None = None,
    progress: bool = False,
    **options: Any,
) -> RecognizerReport:
    """Run p with input 0 on every member; PASS iff the members at `target_index` (one index or
    several) get output 1 and every other member output 0."""
    targets = frozenset([target_index] if isinstance(target_index, int) else target_index)
    for k in sorted(targets):
        if not 0 <= k < len(family):
            raise IndexError(f'target index {k} outside family of {len(family)}')
    outcomes = tuple(
        _fan_out(
            lambda engine, o: engine.run(p, o, 0)[0], family, _config(budgets, options), progress
        )
    )
    if any(isinstance(outcome, Exhausted) for outcome in outcomes):
        verdict = 'INCONCLUSIVE'
    elif all(
        isinstance(outcome, Halted) and outcome.output == int(k in targets)
        for k, outcome in enumerate(outcomes)
    ):
        verdict = 'PASS'
    else:
        verdict = 'FAIL'
    logger.info(f'recognizer verdict {verdict} over {len(family)} oracles')
    return RecognizerReport(verdict, outcomes, targets)
