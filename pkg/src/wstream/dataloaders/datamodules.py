import hashlib
import logging
import os
from abc import ABC, abstractmethod, abstractproperty
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import requests
from omegaconf import DictConfig, OmegaConf
from tqdm import tqdm

from src.wstream.dataloaders.edgelist import (
    AdjacencyGraph,
    build_adjacency,
    generate_erdos_renyi,
    read_edge_list,
    serialize_edge_list,
)
from src.wstream.utils.errors import (
    ConfigurationError,
    DataError,
    DatasetIntegrityError,
    DatasetUnavailableError,
)

CHUNK_SIZE = 1 << 16


@dataclass
class DatasetEntry:
    """One dataset of the manifest.

    Either ``url`` points to a SNAP-style edge list (optionally gzipped), or
    ``generator`` describes a seeded synthetic graph, or neither is set and the
    edge list must be placed in the cache by hand.
    """

    name: str
    url: Optional[str] = None
    filename: Optional[str] = None
    sha256: Optional[str] = None
    n: Optional[int] = None
    m: Optional[int] = None
    directed: bool = False
    description: str = ""
    generator: Optional[dict[str, Any]] = field(default=None)

    @property
    def cache_name(self) -> str:
        if self.filename is not None:
            return self.filename
        if self.url is not None:
            return self.url.rstrip("/").rsplit("/", 1)[-1]
        return f"{self.name}.txt"


def manifest_from_config(cfg: DictConfig | Mapping[str, Any]) -> dict[str, DatasetEntry]:
    """Build manifest entries from the ``datasets`` mapping of a manifest config."""
    container = OmegaConf.to_container(cfg, resolve=True) if isinstance(cfg, DictConfig) else cfg
    assert isinstance(container, Mapping)
    datasets = container.get("datasets", container)
    manifest = {}
    for name, fields in datasets.items():
        fields = dict(fields or {})
        fields.setdefault("name", name)
        manifest[str(name)] = DatasetEntry(**fields)
    return manifest


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.hexdigest()


class GraphDatamodule(ABC):
    def __init__(self, data_dir: Path | str = Path.cwd() / "data", offline: bool = False) -> None:
        # Cast data_dir to Path type
        if isinstance(data_dir, str):
            data_dir = Path(data_dir)
        self.data_dir = data_dir
        self.offline = offline
        self._graph: Optional[AdjacencyGraph] = None

    @abstractproperty
    def dataset_name(self) -> str: ...

    @abstractproperty
    def path(self) -> Path: ...

    @property
    def expected_size(self) -> tuple[Optional[int], Optional[int]]:
        return None, None

    def prepare_data(self) -> Path:
        if not self.path.exists():
            if self.offline:
                raise DatasetUnavailableError(
                    f"Dataset {self.dataset_name} is not cached in {self.path} "
                    "and offline mode forbids downloading it."
                )
            logging.info(f"Fetching {self.dataset_name} dataset into {self.path}.")
            os.makedirs(self.path.parent, exist_ok=True)
            self.download_data()
        return self.path

    @abstractmethod
    def download_data(self) -> None:
        """Make the edge list available at ``self.path``."""
        ...

    def setup(self) -> AdjacencyGraph:
        try:
            edge_list = read_edge_list(self.path)
        except (OSError, UnicodeDecodeError) as e:
            raise DataError(f"Cannot read dataset {self.dataset_name} from {self.path}: {e}")
        graph = build_adjacency(edge_list)
        expected_n, expected_m = self.expected_size
        if (expected_n is not None and expected_n != graph.n) or (
            expected_m is not None and expected_m != graph.m
        ):
            logging.warning(
                f"Dataset {self.dataset_name}: parsed n={graph.n}, m={graph.m} but the "
                f"manifest lists n={expected_n}, m={expected_m}."
            )
        logging.info(f"Loaded {self.dataset_name}: n={graph.n}, m={graph.m}.")
        self._graph = graph
        return graph

    @property
    def graph(self) -> AdjacencyGraph:
        if self._graph is None:
            self.prepare_data()
            self.setup()
        assert self._graph is not None
        return self._graph


class ArchiveDatamodule(GraphDatamodule):
    def __init__(
        self,
        entry: DatasetEntry,
        data_dir: Path | str = Path.cwd() / "data",
        offline: bool = False,
    ) -> None:
        super().__init__(data_dir=data_dir, offline=offline)
        self.entry = entry

    @property
    def dataset_name(self) -> str:
        return self.entry.name

    @property
    def path(self) -> Path:
        return self.data_dir / self.entry.cache_name

    @property
    def checksum_path(self) -> Path:
        return self.path.with_name(self.path.name + ".sha256")

    @property
    def expected_size(self) -> tuple[Optional[int], Optional[int]]:
        return self.entry.n, self.entry.m

    def expected_checksum(self) -> Optional[str]:
        if self.entry.sha256 is not None:
            return self.entry.sha256.lower()
        if self.checksum_path.exists():
            return self.checksum_path.read_text().strip().lower()
        return None

    def prepare_data(self) -> Path:
        if self.path.exists():
            try:
                self.verify()
                return self.path
            except DatasetIntegrityError:
                if self.offline:
                    raise
                logging.warning(
                    f"Cached {self.dataset_name} failed its checksum, downloading it again."
                )
                self.path.unlink()
        super().prepare_data()
        self.verify()
        return self.path

    def verify(self) -> None:
        actual = sha256_of(self.path)
        expected = self.expected_checksum()
        if expected is None:
            # Unpinned datasets are trusted on first use
            logging.warning(
                f"No checksum pinned for {self.dataset_name}; recording sha256={actual}."
            )
            self.checksum_path.write_text(actual + "\n")
            return
        if actual != expected:
            raise DatasetIntegrityError(
                f"Checksum mismatch for {self.dataset_name} at {self.path}: "
                f"expected {expected}, got {actual}."
            )

    def download_data(self) -> None:
        if self.entry.url is None:
            raise DatasetUnavailableError(
                f"Dataset {self.dataset_name} has no download URL. Place its edge list "
                f"at {self.path}."
            )
        tmp_path = self.path.with_name(self.path.name + ".part")
        try:
            with requests.get(self.entry.url, stream=True, timeout=60) as response:
                response.raise_for_status()
                total = int(response.headers.get("content-length", 0)) or None
                with open(tmp_path, "wb") as f, tqdm(
                    total=total,
                    desc=f"Downloading {self.dataset_name}",
                    unit="B",
                    unit_scale=True,
                    leave=False,
                    colour="blue",
                ) as bar:
                    for chunk in response.iter_content(chunk_size=CHUNK_SIZE):
                        f.write(chunk)
                        bar.update(len(chunk))
        except requests.RequestException as e:
            if tmp_path.exists():
                tmp_path.unlink()
            raise DatasetUnavailableError(
                f"Download of {self.dataset_name} from {self.entry.url} failed: {e}"
            )
        tmp_path.replace(self.path)


class EdgeListDatamodule(GraphDatamodule):
    def __init__(self, path: Path | str) -> None:
        path = Path(path)
        super().__init__(data_dir=path.parent, offline=True)
        self._path = path

    @property
    def dataset_name(self) -> str:
        name = self._path.name
        for suffix in (".gz", ".txt", ".edges"):
            name = name.removesuffix(suffix)
        return name

    @property
    def path(self) -> Path:
        return self._path

    def download_data(self) -> None:
        raise DatasetUnavailableError(f"Edge list {self._path} does not exist.")


class ErdosRenyiDatamodule(GraphDatamodule):
    def __init__(
        self,
        n: int,
        p: float,
        seed: int = 42,
        data_dir: Path | str = Path.cwd() / "data",
        name: Optional[str] = None,
    ) -> None:
        # Generated locally, so offline mode never blocks it
        super().__init__(data_dir=data_dir, offline=False)
        self.n = n
        self.p = p
        self.seed = seed
        self.name = name

    @property
    def dataset_name(self) -> str:
        return self.name or f"er_n{self.n}_p{self.p:g}_s{self.seed}"

    @property
    def path(self) -> Path:
        return self.data_dir / f"{self.dataset_name}.txt"

    def download_data(self) -> None:
        edge_list = generate_erdos_renyi(self.n, self.p, self.seed)
        self.path.write_text(serialize_edge_list(edge_list))


def datamodule_for_entry(
    entry: DatasetEntry, data_dir: Path | str, offline: bool = False
) -> GraphDatamodule:
    if entry.generator is None:
        return ArchiveDatamodule(entry=entry, data_dir=data_dir, offline=offline)
    params = dict(entry.generator)
    kind = params.pop("kind", None)
    match kind:
        case "erdos_renyi":
            return ErdosRenyiDatamodule(data_dir=data_dir, name=entry.name, **params)
        case _:
            raise ConfigurationError(f"Unknown generator {kind!r} for dataset {entry.name}.")


def resolve_dataset(
    dataset: str,
    manifest: Mapping[str, DatasetEntry],
    data_dir: Path | str,
    offline: bool = False,
) -> GraphDatamodule:
    """Map a plan's dataset spec, a manifest name or a file path, to a datamodule."""
    if dataset in manifest:
        return datamodule_for_entry(manifest[dataset], data_dir=data_dir, offline=offline)
    return EdgeListDatamodule(path=dataset)


def fetch_datasets(
    manifest: Mapping[str, DatasetEntry],
    data_dir: Path | str,
    offline: bool = False,
    names: Optional[list[str]] = None,
) -> dict[str, Path]:
    """Download, verify and cache manifest datasets.

    Args:
        manifest (Mapping[str, DatasetEntry]): Known datasets.
        data_dir (Path | str): Cache directory.
        offline (bool, optional): Only use the cache. Defaults to False.
        names (Optional[list[str]], optional): Subset to fetch. Defaults to all.

    Returns:
        dict[str, Path]: Local path of every fetched dataset.
    """
    names = list(manifest) if names is None else names
    unknown = [name for name in names if name not in manifest]
    if unknown:
        raise ConfigurationError(f"Datasets {unknown} are not in the manifest.")
    paths = {}
    for name in names:
        datamodule = datamodule_for_entry(manifest[name], data_dir=data_dir, offline=offline)
        paths[name] = datamodule.prepare_data()
    return paths
