from dataclasses import asdict
from typing import Sequence

from omegaconf import DictConfig

import wandb
from src.wstream.evaluation.harness import ResultRow
from src.wstream.utils.extraction import flatten_config


def maybe_initialize_wandb(cfg: DictConfig) -> str | None:
    """Initialize wandb if tracking is enabled in the config."""
    tracking = cfg.get("tracking")
    if tracking is None or not tracking.get("enabled", False):
        return None
    cfg_flat = flatten_config(cfg)
    wandb.init(project=tracking.project, config=cfg_flat, entity=tracking.get("entity"))
    assert wandb.run is not None
    run_id = wandb.run.id
    assert isinstance(run_id, str)
    return run_id


def log_rows(rows: Sequence[ResultRow]) -> None:
    if wandb.run is None:
        return
    for row in rows:
        wandb.log({f"results/{k}": v for k, v in asdict(row).items()})
    table = wandb.Table(columns=ResultRow.columns())
    for row in rows:
        table.add_data(*asdict(row).values())
    wandb.log({"results/table": table})
