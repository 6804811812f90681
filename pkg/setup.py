import pathlib
from setuptools import setup, find_packages

here = pathlib.Path(__file__).parent.resolve()
long_description = open("README.md").read()
version_namespace: dict = {}
exec((here / "src" / "multivrp" / "_version.py").read_text(), version_namespace)

# Requirements

install_requires = open("requirements.txt").read().strip().split("\n")
dev_requires = open("dev-requirements.txt").read().strip().split("\n")

setup(
    name="multivrp",
    version=version_namespace["__version__"],
    description="Multi-agent environments for vehicle routing problems with time windows",
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires=">=3.8, <4",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=install_requires,
    extras_require={"dev": dev_requires},
    entry_points={"console_scripts": ["multivrp=multivrp.cli:main"]},
    classifiers=[
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
