import logging

import hydra
from omegaconf import DictConfig

import sys
sys.path.append(".")
from src.wstream.dataloaders.datamodules import fetch_datasets, manifest_from_config
from src.wstream.utils.extraction import dict_to_str, exit_on_error


@hydra.main(version_base=None, config_path="conf", config_name="fetch")
def main(cfg: DictConfig) -> None:
    logging.info(
        f"Welcome in the fetching script! You are using the following config:\n{dict_to_str(cfg)}"
    )
    manifest = manifest_from_config(cfg.manifest)
    names = list(cfg.names) if cfg.names is not None else None
    with exit_on_error():
        paths = fetch_datasets(manifest, data_dir=cfg.data_dir, offline=cfg.offline, names=names)
    logging.info(f"Cached datasets:\n{dict_to_str({k: str(v) for k, v in paths.items()})}")


if __name__ == "__main__":
    main()
