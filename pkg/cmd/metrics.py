import logging
import os
from pathlib import Path

import hydra
import yaml
from hydra.core.hydra_config import HydraConfig
from omegaconf import DictConfig, OmegaConf

import sys
sys.path.append(".")
from src.wstream.dataloaders.datamodules import manifest_from_config, resolve_dataset
from src.wstream.evaluation.metrics import DEFAULT_METRICS, MetricCollection
from src.wstream.models.state import read_metadata
from src.wstream.utils.errors import ConfigurationError
from src.wstream.utils.extraction import dict_to_str, exit_on_error


class MetricsRunner:
    def __init__(self, cfg: DictConfig) -> None:
        logging.info(
            f"Welcome in the metrics script! You are using the following config:\n{dict_to_str(cfg)}"
        )
        if cfg.metadata is None:
            raise ConfigurationError("Set metadata=<path> to the partition metadata file.")
        self.output_dir = Path(cfg.output_dir or HydraConfig.get().runtime.output_dir)
        os.makedirs(self.output_dir, exist_ok=True)
        OmegaConf.save(config=cfg, f=self.output_dir / "metrics_config.yaml")

        dataset = cfg.input if cfg.input is not None else cfg.dataset
        manifest = manifest_from_config(cfg.manifest)
        datamodule = resolve_dataset(dataset, manifest, data_dir=cfg.data_dir, offline=cfg.offline)
        datamodule.prepare_data()
        self.graph = datamodule.setup()
        self.state = read_metadata(cfg.metadata)
        self.metrics = MetricCollection(self.graph, DEFAULT_METRICS)

    def evaluate(self) -> None:
        results = self.metrics(self.state)
        results["loads"] = self.state.loads_snapshot()
        logging.info(f"Metrics:\n{dict_to_str(results)}")
        with open(self.output_dir / "metrics.yaml", "w") as f:
            yaml.dump(data=results, stream=f)


@hydra.main(version_base=None, config_path="conf", config_name="metrics")
def main(cfg: DictConfig) -> None:
    with exit_on_error():
        runner = MetricsRunner(cfg)
        runner.evaluate()


if __name__ == "__main__":
    main()
