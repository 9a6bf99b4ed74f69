from setuptools import find_packages, setup

setup(
    name="fcofdm",
    version="1.0.0",
    description="Banc de filtres FC-F-OFDM généralisé : synthèse, fenêtres optimisées, métriques",
    packages=find_packages(include=["src", "src.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "pandas>=2.0",
        "python-dotenv>=1.0.0",
    ],
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={"console_scripts": ["fcofdm=src.cli:main"]},
)
