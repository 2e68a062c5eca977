import logging
import os
from pathlib import Path

import hydra
from hydra.core.hydra_config import HydraConfig
from omegaconf import DictConfig, OmegaConf

import sys
sys.path.append(".")
from src.wstream.dataloaders.datamodules import manifest_from_config
from src.wstream.evaluation.harness import (
    ExperimentPlan,
    emit_csv,
    load_plan_file,
    merge_external_results,
    plan_from_config,
    run_plan,
    summarize,
)
from src.wstream.utils.extraction import dict_to_str, exit_on_error
from src.wstream.utils.wandb import log_rows, maybe_initialize_wandb


class SweepRunner:
    def __init__(self, cfg: DictConfig) -> None:
        # Read out the config
        logging.info(
            f"Welcome in the sweep script! You are using the following config:\n{dict_to_str(cfg)}"
        )
        self.cfg = cfg
        self.output_dir = Path(cfg.output_dir or HydraConfig.get().runtime.output_dir)
        os.makedirs(self.output_dir, exist_ok=True)
        OmegaConf.save(config=cfg, f=self.output_dir / "sweep_config.yaml")

        # A plan file replaces the plan config group
        if cfg.plan_file is not None:
            self.plan: ExperimentPlan = load_plan_file(cfg.plan_file)
        else:
            plan_cfg = OmegaConf.to_container(cfg.plan, resolve=True)
            assert isinstance(plan_cfg, dict)
            self.plan = plan_from_config(plan_cfg)
        logging.info(f"The plan contains {len(self.plan.runs())} runs.")
        self.manifest = manifest_from_config(cfg.manifest)

        self.run_id = maybe_initialize_wandb(cfg)

    def sweep(self) -> None:
        with open(self.output_dir / self.cfg.diagnostics, "w") as diagnostics:
            rows = run_plan(
                self.plan,
                manifest=self.manifest,
                data_dir=self.cfg.data_dir,
                offline=self.cfg.offline,
                diagnostics=diagnostics,
            )
        if self.cfg.external_results is not None:
            rows = merge_external_results(rows, self.cfg.external_results)

        if rows:
            logging.info(f"Summary over seeds:\n{summarize(rows).to_string(index=False)}")
        csv_path = self.output_dir / self.cfg.csv_out
        logging.info(f"Saving {len(rows)} result rows to {csv_path}.")
        emit_csv(rows, csv_path)
        log_rows(rows)


@hydra.main(version_base=None, config_path="conf", config_name="sweep")
def main(cfg: DictConfig) -> None:
    with exit_on_error():
        runner = SweepRunner(cfg)
        runner.sweep()


if __name__ == "__main__":
    main()
