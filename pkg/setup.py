from setuptools import find_packages, setup

setup(
    name="cavtool",
    version="0.1.0",
    packages=find_packages(
        include=[
            "cav_common",
            "cav_common.*",
            "cav_persistence",
            "cav_persistence.*",
            "cav_optics",
            "cav_optics.*",
            "cav_cavity",
            "cav_cavity.*",
            "cav_emitter",
            "cav_emitter.*",
            "cav_coupling",
            "cav_coupling.*",
            "cav_fitting",
            "cav_fitting.*",
            "cav_cli",
            "cav_cli.*",
        ]
    ),
    install_requires=[
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "click>=8.1.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.0",
            "pytest-xdist>=3.3.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "cavtool=cav_cli.cli:cli",
        ],
    },
    python_requires=">=3.10",
)
