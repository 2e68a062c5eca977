import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, TextIO

import pandas as pd
from tqdm import tqdm

from src.wstream.dataloaders.datamodules import DatasetEntry, resolve_dataset
from src.wstream.dataloaders.edgelist import AdjacencyGraph
from src.wstream.evaluation.metrics import measure_run
from src.wstream.models.baselines import ALGORITHMS, build_partitioner
from src.wstream.utils.errors import ConfigurationError, DataError, EdgeListParseError

SWEEP_WINDOWS = (100, 200, 300, 400, 500, 600, 700, 800)
SWEEP_KS = (2, 4, 8, 16)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
FLOAT_COLUMNS = ("edge_cut_ratio", "load_imbalance", "elapsed_seconds")


def plan_order_key(run: Any) -> tuple:
    """Sort key (dataset, algorithm, k, window, slack, seed); missing axes sort first."""
    return (
        run.dataset,
        run.algorithm,
        run.k,
        -1 if run.window is None else run.window,
        -1 if run.slack is None else run.slack,
        run.seed,
    )


@dataclass
class ResultRow:
    dataset: str
    algorithm: str
    k: int
    window: Optional[int]
    slack: Optional[int]
    epsilon: Optional[float]
    seed: int
    order: str
    n: int
    m: int
    cut_edges: int
    edge_cut_ratio: float
    load_imbalance: float
    elapsed_seconds: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @property
    def sort_key(self) -> tuple:
        return plan_order_key(self)


@dataclass(frozen=True)
class RunSpec:
    """One point of the plan's cross-product, with non-applicable axes set to None."""

    dataset: str
    algorithm: str
    k: int
    window: Optional[int]
    slack: Optional[int]
    epsilon: Optional[float]
    seed: int
    order: str
    co_assign: bool = False

    @property
    def sort_key(self) -> tuple:
        return plan_order_key(self)


@dataclass
class ExperimentPlan:
    datasets: list[str]
    algorithms: list[str] = field(default_factory=lambda: ["wstream", "ldg"])
    ks: list[int] = field(default_factory=lambda: list(SWEEP_KS))
    windows: list[int] = field(default_factory=lambda: [100])
    slacks: list[int] = field(default_factory=lambda: [100])
    epsilons: list[float] = field(default_factory=lambda: [0.0])
    seeds: list[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    order: str = "random"
    co_assign: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ConfigurationError(
                f"Unknown algorithms {sorted(unknown)}. Expected a subset of {list(ALGORITHMS)}."
            )
        for axis in ("datasets", "algorithms", "ks", "windows", "slacks", "epsilons", "seeds"):
            if not getattr(self, axis):
                raise ConfigurationError(f"Plan axis '{axis}' is empty.")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be positive, got {self.workers}.")

    def runs(self) -> list[RunSpec]:
        """The distinct points of the plan's cross-product, in plan order."""
        specs = []
        for dataset, algorithm, k, seed in itertools.product(
            self.datasets, self.algorithms, self.ks, self.seeds
        ):
            windows: Sequence[Optional[int]] = self.windows if algorithm == "wstream" else [None]
            slacks: Sequence[Optional[int]] = self.slacks if algorithm == "wstream" else [None]
            epsilons: Sequence[Optional[float]] = self.epsilons if algorithm == "ldg" else [None]
            for window, slack, epsilon in itertools.product(windows, slacks, epsilons):
                specs.append(
                    RunSpec(
                        dataset=dataset,
                        algorithm=algorithm,
                        k=k,
                        window=window,
                        slack=slack,
                        epsilon=epsilon,
                        seed=seed,
                        order=self.order,
                        co_assign=self.co_assign and algorithm == "wstream",
                    )
                )
        # Repeated axis values collapse to a single run
        return sorted(dict.fromkeys(specs), key=lambda spec: spec.sort_key)


PLAN_LIST_KEYS = {
    "datasets": str,
    "algorithms": str,
    "ks": int,
    "windows": int,
    "slacks": int,
    "epsilons": float,
    "seeds": int,
}
PLAN_SCALAR_KEYS = {"order": str, "co_assign": bool, "workers": int}


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in {"true", "1", "yes"}:
        return True
    if lowered in {"false", "0", "no"}:
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_plan(text: str) -> ExperimentPlan:
    """Parse a line-oriented ``key=value`` plan; list values are comma-separated.

    Blank lines and lines starting with '#' are ignored.
    """
    values: dict[str, Any] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigurationError(f"Plan line {line_number}: expected key=value, got {line!r}.")
        if key not in PLAN_LIST_KEYS and key not in PLAN_SCALAR_KEYS:
            raise ConfigurationError(f"Plan line {line_number}: unknown key {key!r}.")
        try:
            if key in PLAN_LIST_KEYS:
                cast = PLAN_LIST_KEYS[key]
                values[key] = [cast(v.strip()) for v in value.split(",") if v.strip()]
            else:
                cast = PLAN_SCALAR_KEYS[key]
                values[key] = _parse_bool(value) if cast is bool else cast(value.strip())
        except ValueError as e:
            raise ConfigurationError(f"Plan line {line_number}: invalid value for {key}: {e}")
    if "datasets" not in values:
        raise ConfigurationError("A plan needs at least one dataset.")
    return ExperimentPlan(**values)


def load_plan_file(path: Path | str) -> ExperimentPlan:
    return parse_plan(Path(path).read_text(encoding="utf-8"))


def plan_from_config(cfg: Mapping[str, Any]) -> ExperimentPlan:
    known = {f.name for f in fields(ExperimentPlan)}
    values = {
        key: list(value) if key in PLAN_LIST_KEYS else value
        for key, value in cfg.items()
        if key in known
    }
    return ExperimentPlan(**values)


def execute_run(graph: AdjacencyGraph, spec: RunSpec) -> ResultRow:
    partitioner = build_partitioner(
        spec.algorithm,
        k=spec.k,
        window=spec.window if spec.window is not None else 1,
        slack=spec.slack if spec.slack is not None else 0,
        epsilon=spec.epsilon if spec.epsilon is not None else 0.0,
        seed=spec.seed,
        order=spec.order,
        co_assign=spec.co_assign,
    )
    report = measure_run(graph, partitioner)
    return ResultRow(
        dataset=spec.dataset,
        algorithm=spec.algorithm,
        k=spec.k,
        window=spec.window,
        slack=spec.slack,
        epsilon=spec.epsilon,
        seed=spec.seed,
        order=spec.order,
        n=graph.n,
        m=graph.m,
        cut_edges=report.cut_edges,
        edge_cut_ratio=report.edge_cut_ratio,
        load_imbalance=report.load_imbalance,
        elapsed_seconds=report.elapsed,
    )


def load_graphs(
    datasets: Iterable[str],
    manifest: Mapping[str, DatasetEntry],
    data_dir: Path | str,
    offline: bool,
    diagnostics: Optional[TextIO] = None,
) -> dict[str, AdjacencyGraph]:
    graphs = {}
    for dataset in datasets:
        try:
            graphs[dataset] = resolve_dataset(dataset, manifest, data_dir, offline=offline).graph
        except (DataError, EdgeListParseError) as e:
            logging.error(f"Skipping dataset {dataset}: {e}")
            if diagnostics is not None:
                diagnostics.write(f"{dataset}\terror\t{e}\n")
    return graphs


def run_plan(
    plan: ExperimentPlan,
    manifest: Optional[Mapping[str, DatasetEntry]] = None,
    data_dir: Path | str = Path.cwd() / "data",
    offline: bool = False,
    diagnostics: Optional[TextIO] = None,
    graphs: Optional[Mapping[str, AdjacencyGraph]] = None,
) -> list[ResultRow]:
    """Execute every run of the plan.

    Args:
        plan (ExperimentPlan): Value sets whose cross-product is the run set.
        manifest (Optional[Mapping[str, DatasetEntry]], optional): Known datasets,
            used to resolve dataset names. Defaults to None.
        data_dir (Path | str, optional): Dataset cache. Defaults to ./data.
        offline (bool, optional): Never download. Defaults to False.
        diagnostics (Optional[TextIO], optional): Receives one line per dataset that
            could not be loaded. Defaults to None.
        graphs (Optional[Mapping[str, AdjacencyGraph]], optional): Preloaded graphs
            keyed by dataset spec; bypasses loading. Defaults to None.

    Returns:
        list[ResultRow]: One row per run, in plan order whatever the parallelism.
    """
    if graphs is None:
        graphs = load_graphs(plan.datasets, manifest or {}, data_dir, offline, diagnostics)
    specs = [spec for spec in plan.runs() if spec.dataset in graphs]
    logging.info(f"Running {len(specs)} partitioning runs with {plan.workers} worker(s).")

    progress = dict(desc="Runs", unit="run", leave=False, colour="green", total=len(specs))
    if plan.workers == 1:
        rows = [execute_run(graphs[spec.dataset], spec) for spec in tqdm(specs, **progress)]
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            # map preserves input order, which is the plan order
            rows = list(
                tqdm(
                    pool.map(execute_run, [graphs[spec.dataset] for spec in specs], specs),
                    **progress,
                )
            )
    return rows


def format_row(row: ResultRow) -> dict[str, str]:
    formatted = {}
    for column, value in asdict(row).items():
        if value is None:
            formatted[column] = ""
        elif column in FLOAT_COLUMNS:
            formatted[column] = f"{value:.6f}"
        else:
            formatted[column] = str(value)
    return formatted


def rows_to_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([format_row(row) for row in rows], columns=ResultRow.columns(), dtype=str)


def emit_csv(rows: Sequence[ResultRow], sink: TextIO | Path | str) -> None:
    """Write rows as CSV with the fixed ResultRow header and LF line endings."""
    rows = sorted(rows, key=lambda row: row.sort_key)
    rows_to_frame(rows).to_csv(sink, index=False, lineterminator="\n")


def read_results(source: TextIO | Path | str) -> list[ResultRow]:
    df = pd.read_csv(source, dtype=str, keep_default_na=False)
    missing = set(ResultRow.columns()) - set(df.columns)
    if missing:
        raise DataError(f"Result file lacks columns {sorted(missing)}.")

    def optional(value: str, cast: type) -> Any:
        return None if value == "" else cast(value)

    return [
        ResultRow(
            dataset=record["dataset"],
            algorithm=record["algorithm"],
            k=int(record["k"]),
            window=optional(record["window"], int),
            slack=optional(record["slack"], int),
            epsilon=optional(record["epsilon"], float),
            seed=int(record["seed"]),
            order=record["order"],
            n=int(record["n"]),
            m=int(record["m"]),
            cut_edges=int(record["cut_edges"]),
            edge_cut_ratio=float(record["edge_cut_ratio"]),
            load_imbalance=float(record["load_imbalance"]),
            elapsed_seconds=float(record["elapsed_seconds"]),
        )
        for record in df.to_dict(orient="records")
    ]


def merge_external_results(
    rows: Sequence[ResultRow], source: TextIO | Path | str
) -> list[ResultRow]:
    """Append rows produced by an external tool (e.g. METIS) with the same columns."""
    external = read_results(source)
    logging.info(f"Merged {len(external)} external result rows.")
    return sorted([*rows, *external], key=lambda row: row.sort_key)


SUMMARY_KEYS = ["dataset", "algorithm", "k", "window", "slack", "epsilon"]


def summarize(rows: Sequence[ResultRow]) -> pd.DataFrame:
    """Mean and spread over seeds of every configuration of the plan."""
    df = pd.DataFrame([asdict(row) for row in rows], columns=ResultRow.columns())
    summary = df.groupby(SUMMARY_KEYS, dropna=False, sort=True).agg(
        edge_cut_ratio=("edge_cut_ratio", "mean"),
        edge_cut_ratio_std=("edge_cut_ratio", "std"),
        load_imbalance=("load_imbalance", "mean"),
        elapsed_seconds=("elapsed_seconds", "mean"),
        runs=("seed", "count"),
    )
    return summary.reset_index()
