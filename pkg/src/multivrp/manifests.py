"""This module handles anything related to instance documents and manifest files."""
import glob
import json
import logging
import os
from typing import Dict, List, Tuple, Union

import yaml
from pydantic import ValidationError

from multivrp.generators import generate_random
from multivrp.models import InstanceData, InstanceSet, ObservationConfig
from multivrp.validation import DecodeError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MANIFEST_FILE_NAME = "manifest.yml"
YML_ENDINGS = ["yml", "yaml"]


def _dump(document: Dict) -> str:
    return yaml.safe_dump(document, sort_keys=False, indent=2)


def _load_document(data: Union[str, bytes], what: str) -> Dict:
    try:
        loaded = yaml.safe_load(data)
    except yaml.YAMLError as error:
        raise DecodeError(f"{what} is not valid YAML: {error}") from error
    if not isinstance(loaded, dict):
        raise DecodeError(f"{what} is not a mapping.")
    version = loaded.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise DecodeError(
            f"{what} has schema_version {version!r}, expected {SCHEMA_VERSION}."
        )
    return loaded


def encode_instance(instance: InstanceData) -> bytes:
    """
    Serialize an instance to a schema-versioned YAML document.

    Floats are written with their shortest round-trip representation.
    """
    document = {"schema_version": SCHEMA_VERSION, **json.loads(instance.json())}
    return _dump(document).encode("utf-8")


def decode_instance(data: Union[str, bytes]) -> InstanceData:
    """Parse a document written by `encode_instance`."""
    document = _load_document(data, "instance document")
    try:
        return InstanceData.parse_obj(document)
    except ValidationError as error:
        raise DecodeError(f"invalid instance document:\n{error}") from error


def write_instance(file_name: str, instance: InstanceData) -> None:
    """Write an instance document to a file."""
    with open(file_name, "wb") as instance_file:
        instance_file.write(encode_instance(instance))


def read_instance(file_name: str) -> InstanceData:
    """Read an instance document from a file."""
    with open(file_name, "rb") as instance_file:
        return decode_instance(instance_file.read())


def write_instance_set(instance_set: InstanceSet, out_dir: str) -> List[str]:
    """
    Generate every instance of a set into `out_dir`, one `<name>.yml` file per
    seed, plus a `manifest.yml` listing the split, spec and seeds.
    """
    os.makedirs(out_dir, exist_ok=True)
    file_names = []
    for seed in instance_set.seeds:
        instance = generate_random(instance_set.spec, seed)
        file_name = f"{instance.name}.yml"
        write_instance(os.path.join(out_dir, file_name), instance)
        file_names.append(file_name)

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "instance_set": json.loads(instance_set.json()),
        "files": file_names,
    }
    with open(
        os.path.join(out_dir, MANIFEST_FILE_NAME), "w", encoding="utf-8"
    ) as manifest_file:
        manifest_file.write(_dump(manifest))
    logger.info(
        "Wrote %d %s instances to %s.",
        len(file_names),
        instance_set.split.value,
        out_dir,
    )
    return [os.path.join(out_dir, file_name) for file_name in file_names]


def load_instance_set(set_dir: str) -> Tuple[InstanceSet, List[InstanceData]]:
    """Read a set written by `write_instance_set`, in manifest order."""
    manifest_path = os.path.join(set_dir, MANIFEST_FILE_NAME)
    with open(manifest_path, "r", encoding="utf-8") as manifest_file:
        manifest = _load_document(manifest_file.read(), manifest_path)
    try:
        instance_set = InstanceSet.parse_obj(manifest["instance_set"])
        file_names = list(manifest["files"])
    except (KeyError, TypeError, ValidationError) as error:
        raise DecodeError(f"invalid manifest {manifest_path}: {error}") from error
    instances = [
        read_instance(os.path.join(set_dir, file_name)) for file_name in file_names
    ]
    return instance_set, instances


def load_yaml_into_dict(file_path: str) -> Dict:
    """
    This loads yaml files into a dictionary.
    """
    with open(file_path, "r", encoding="utf-8") as yaml_file:
        loaded = yaml.safe_load(yaml_file)
        if isinstance(loaded, dict):
            return loaded

    logger.warning("Failed to parse invalid document: %s. Skipping.", file_path)
    return {}


def load_observation_config(file_path: str) -> ObservationConfig:
    """Load an observation config document naming the features per family."""
    try:
        return ObservationConfig.parse_obj(load_yaml_into_dict(file_path))
    except ValidationError as error:
        raise DecodeError(f"invalid observation config {file_path}:\n{error}") from error


def ingest_instances(path: str) -> List[InstanceData]:
    """
    Ingest either a single instance file, an instance set directory, or every
    instance document found in a directory.

    Directories without a manifest are searched recursively and read in
    sorted path order.
    """
    if path.split(".")[-1] in YML_ENDINGS:
        return [read_instance(path)]

    if os.path.isfile(os.path.join(path, MANIFEST_FILE_NAME)):
        return load_instance_set(path)[1]

    file_list: List[str] = []
    for yml_ending in YML_ENDINGS:
        file_list += glob.glob(f"{path}/**/*.{yml_ending}", recursive=True)
    return [
        read_instance(file_name)
        for file_name in sorted(file_list)
        if os.path.basename(file_name) != MANIFEST_FILE_NAME
    ]
