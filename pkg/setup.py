from pathlib import Path
from setuptools import setup, find_packages
from qseig.libs.version import __version__


def parse_requirements(filename):
    """Parse le fichier requirements.txt et retourne la liste des dépendances."""
    with open(filename) as f:
        lines = f.read().splitlines()

    requires = []
    for line in lines:
        if "http" in line:
            pkg_name_without_url = line.split('@')[0].strip()
            requires.append(pkg_name_without_url)
        else:
            requires.append(line)

    return requires


TEST_REQUIREMENTS = [
    "pytest>=7.4",
]

if __name__ == '__main__':
    readme_path = Path(Path(__file__).parent, 'README.md')
    with readme_path.open(encoding='utf-8') as file:
        long_description = file.read()

    setup(
        name="qseig",
        version=__version__,
        packages=find_packages(exclude=["tests", "tests.*"]) + ["qseig.resources"],
        package_data={
            "qseig.resources": ["**"],
        },
        install_requires=parse_requirements('requirements.txt'),
        extras_require={
            "test": TEST_REQUIREMENTS,
        },
        description="Solveur de valeurs propres par évolution quasi-orthogonale pour opérateurs de Schrödinger discrétisés",
        long_description=long_description,
        long_description_content_type="text/markdown",
        python_requires=">=3.9",
        entry_points={
            "console_scripts": [
                "qseig = qseig.tools.cli:cli",
            ],
        },
        include_package_data=True,
        zip_safe=False,
    )
