from os.path import join
from setuptools import find_packages, setup
import sys

assert sys.version_info.major == 3 and sys.version_info.minor >= 8, (
    "The ksion repo is designed to work with Python 3.8 and greater."
    + "Please install it before proceeding."
)

with open(join("ksion", "version.py")) as version_file:
    exec(version_file.read())

setup(
    name="ksion",
    packages=find_packages(exclude=["test", "test.*"]),
    package_data={"ksion": ["data/*.json"]},
    version=__version__,  #'0.1.0',
    install_requires=[
        "joblib",
        "matplotlib>=3.1",
        "numpy>=1.17",
        "pandas>=1.1",
        "pytest",
        "psutil",
        "scipy",
        "seaborn>=0.13",
        "tqdm",
    ],
    description="Simulation and analysis of two-ion contextuality experiments.",
)
