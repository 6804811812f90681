"""
Export the published reference scores and the default observation
configurations as YAML and JSON files.
"""
import json
from typing import Dict, List

import yaml

from multivrp.default_observations import DEFAULT_OBSERVATIONS
from multivrp.default_references import REFERENCE_SCORES

DATA_DIR = "data_files"
OBSERVATIONS_DIR = f"{DATA_DIR}/observations"


def _dump_yaml(file_name: str, document: Dict) -> None:
    print(f"> Writing YAML to {file_name}")
    with open(file_name, "w") as output_file:
        yaml.safe_dump(document, output_file, sort_keys=False, indent=2)


def export_reference_scores() -> List[str]:
    """
    Export the reference scores as a single YAML file.
    """
    file_name = f"{DATA_DIR}/reference_scores.yml"
    _dump_yaml(
        file_name,
        {"reference_scores": [json.loads(score.json()) for score in REFERENCE_SCORES]},
    )
    return [file_name]


def export_observations() -> List[str]:
    """
    Export one observation configuration file per problem.
    """
    file_names = []
    for problem, config in DEFAULT_OBSERVATIONS.items():
        file_name = f"{OBSERVATIONS_DIR}/{problem.value.lower()}.yml"
        _dump_yaml(file_name, config.dict(by_alias=True))
        file_names.append(file_name)
    return file_names


def export_json(file_names: List[str]) -> None:
    """
    Load the exported YAML files and re-export them as JSON.
    """
    for input_filename in file_names:
        json_filename = input_filename.replace(".yml", ".json")
        with open(input_filename, "r") as input_file:
            print(f"> Loading YAML from {input_filename}...")
            yaml_dict = yaml.safe_load(input_file)
        with open(json_filename, "w") as json_file:
            print(f"> Writing JSON to {json_filename}...")
            print(json.dumps(yaml_dict, indent=4), file=json_file)


if __name__ == "__main__":
    print("Exporting reference scores...")
    exported = export_reference_scores()
    print("*" * 40)

    print("Exporting observation configurations...")
    export_observations()
    print("*" * 40)

    print("Exporting JSON files...")
    export_json(exported)
    print("*" * 40)

    print(f"Export complete! Check '{DATA_DIR}/' for output files.")
