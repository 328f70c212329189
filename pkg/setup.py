"""fracvol setup."""
from pathlib import Path

from setuptools import find_packages, setup

import fracvol.constants as fracvol_const

PROJECT_NAME = "fracvol"
PROJECT_PACKAGE_NAME = "fracvol"
PROJECT_LICENSE = "Apache License 2.0"

PROJECT_DIR = Path(__file__).parent.resolve()
README_FILE = PROJECT_DIR / "README.rst"
PACKAGES = find_packages(exclude=["tests", "tests.*"])

with open("requirements.txt") as f:
    REQUIRES = f.read().splitlines()

setup(
    name=PROJECT_PACKAGE_NAME,
    version=fracvol_const.__version__,
    license=PROJECT_LICENSE,
    description="Fractional stochastic-volatility toolkit",
    long_description=README_FILE.read_text(encoding="utf-8"),
    long_description_content_type="text/x-rst",
    packages=PACKAGES,
    include_package_data=True,
    zip_safe=False,
    install_requires=REQUIRES,
    python_requires=f">={fracvol_const.REQUIRED_PYTHON_VER}",
    test_suite="tests",
    entry_points={
        "console_scripts": [
            "fracvol = fracvol.__main__:main",
        ]
    },
)
