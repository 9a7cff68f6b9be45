"""
This is the setup.py file for ppmmpy, projection pursuit Monge map estimation between empirical samples.
"""
import sys

# For now, this project only support Python 3.9 and above.
if sys.version_info < (3, 9):
    sys.exit("Python 3.9 or above is required.")

from setuptools import setup, find_packages
import pathlib
from ppmmpy import __version__, __authors__

here = pathlib.Path(__file__).parent.resolve()

long_description = (here / "README.md").read_text(encoding="utf-8")


setup(
    name="ppmmpy",
    version=__version__,
    description="Projection pursuit Monge map estimation with SAVE directions",
    long_description_content_type="text/markdown",
    author=", ".join(__authors__),
    # psutil reads process CPU time for the timing study; termcolor and pyfiglet dress up the CLI.
    install_requires=["numpy", "scipy", "matplotlib", "orjson", "termcolor", "pyfiglet", "psutil"],
    extras_require={"test": ["pytest"]},
    license="MIT",
    long_description=long_description,
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3 :: Only",
    ],
    keywords="optimal transport, Monge map, projection pursuit, sliced inverse regression, SAVE",
    packages=find_packages(exclude=("tests", "examples", "examples.*")),
    python_requires=">=3.9, <4",
    entry_points={"console_scripts": ["ppmm=ppmmpy.__main__:main"]},
)
