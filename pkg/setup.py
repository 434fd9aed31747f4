"""Setup script for pairlab."""

from setuptools import setup, find_packages

setup(
    name="pairlab",
    version="0.1.0",
    packages=find_packages(exclude=["examples", "examples.*"]),
    py_modules=["cli", "config", "errors"],
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "python-dotenv>=1.0.0",
        "click>=8.1.7",
        "pydantic>=2.5.3",
        "structlog>=24.1.0",
    ],
    extras_require={
        "test": ["pytest>=7.4.0"],
    },
    entry_points={
        "console_scripts": [
            "pairlab=cli:cli",
        ],
    },
    python_requires=">=3.10",
)
