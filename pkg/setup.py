"""
setup.py for parametric-lmi
"""

from setuptools import setup, find_packages

setup(
    name="parametric-lmi",
    version="0.1.0",
    description="Exact computer algebra for parametric linear matrix inequalities",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    author="Parametric LMI Team",
    packages=find_packages(exclude=("examples", "examples.*")),
    install_requires=[
        "sympy>=1.12",
        "pydantic>=2.0",
    ],
    extras_require={
        "redis": ["redis>=4.0.0"],
        "all": [
            "redis>=4.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "parametric-lmi=parametric_lmi.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    keywords="lmi, spectrahedron, semidefinite, groebner, hermite, real algebraic geometry",
)
