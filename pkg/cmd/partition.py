import logging
import os
from pathlib import Path

import hydra
import yaml
from hydra.core.hydra_config import HydraConfig
from hydra.utils import instantiate
from omegaconf import DictConfig, OmegaConf

import sys
sys.path.append(".")
from src.wstream.dataloaders.datamodules import manifest_from_config, resolve_dataset
from src.wstream.evaluation.harness import ResultRow, emit_csv
from src.wstream.evaluation.metrics import quality_report
from src.wstream.models.partitioners import Partitioner, WStreamPartitioner
from src.wstream.models.state import save_metadata
from src.wstream.utils.callbacks import BalanceMonitor, ProgressCallback, RunCallback
from src.wstream.utils.errors import ConfigurationError
from src.wstream.utils.extraction import dict_to_str, exit_on_error


class PartitionRunner:
    def __init__(self, cfg: DictConfig) -> None:
        # Read out the config
        logging.info(
            f"Welcome in the partitioning script! You are using the following config:\n{dict_to_str(cfg)}"
        )
        self.cfg = cfg
        self.output_dir = Path(cfg.output_dir or HydraConfig.get().runtime.output_dir)
        os.makedirs(self.output_dir, exist_ok=True)
        OmegaConf.save(config=cfg, f=self.output_dir / "partition_config.yaml")

        # An explicit edge list takes precedence over a manifest dataset
        self.dataset: str = cfg.input if cfg.input is not None else cfg.dataset
        manifest = manifest_from_config(cfg.manifest)
        self.datamodule = resolve_dataset(
            self.dataset, manifest, data_dir=cfg.data_dir, offline=cfg.offline
        )
        self.datamodule.prepare_data()
        self.graph = self.datamodule.setup()

        # Instantiate the partitioner with its run callbacks
        self.balance_monitor = BalanceMonitor()
        callbacks: list[RunCallback] = [ProgressCallback()] if cfg.progress else []
        partitioner_partial = instantiate(cfg.partitioner)
        self.partitioner: Partitioner = partitioner_partial(callbacks=callbacks)
        if isinstance(self.partitioner, WStreamPartitioner):
            self.partitioner.callbacks.append(self.balance_monitor)

    def partition(self) -> None:
        state, stats = self.partitioner.run(self.graph)
        report = quality_report(self.graph, state, elapsed=stats.elapsed)
        if self.balance_monitor.violations:
            logging.warning(
                f"Load gap exceeded {self.balance_monitor.bound} at "
                f"{len(self.balance_monitor.violations)} steps."
            )

        results = {
            "dataset": self.datamodule.dataset_name,
            "algorithm": self.partitioner.name,
            "n": self.graph.n,
            "m": self.graph.m,
            **report.to_dict(),
            "steps": stats.steps,
            "gate_activations": stats.gate_activations,
            "random_draws": stats.random_draws,
            "co_assigned": stats.co_assigned,
            "peak_gap": stats.peak_gap,
        }
        logging.info(f"Results:\n{dict_to_str(results)}")

        # Save everything
        meta_out = self.output_dir / (self.cfg.meta_out or "partition.meta")
        logging.info(f"Saving partition metadata and results to {self.output_dir}.")
        save_metadata(state, meta_out)
        with open(self.output_dir / "results.yaml", "w") as f:
            yaml.dump(data=results, stream=f)

        if self.cfg.csv_out is not None:
            partitioner_cfg = self.cfg.partitioner
            row = ResultRow(
                dataset=self.dataset,
                algorithm=self.partitioner.name,
                k=self.partitioner.k,
                window=partitioner_cfg.get("window"),
                slack=partitioner_cfg.get("slack"),
                epsilon=partitioner_cfg.get("epsilon"),
                seed=self.partitioner.seed,
                order=str(self.partitioner.stream_order),
                n=self.graph.n,
                m=self.graph.m,
                cut_edges=report.cut_edges,
                edge_cut_ratio=report.edge_cut_ratio,
                load_imbalance=report.load_imbalance,
                elapsed_seconds=report.elapsed,
            )
            emit_csv([row], self.output_dir / self.cfg.csv_out)


@hydra.main(version_base=None, config_path="conf", config_name="partition")
def main(cfg: DictConfig) -> None:
    with exit_on_error():
        if cfg.input is None and cfg.dataset is None:
            raise ConfigurationError("Either input or dataset must be set.")
        runner = PartitionRunner(cfg)
        runner.partition()


if __name__ == "__main__":
    main()
