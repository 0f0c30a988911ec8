#! /usr/bin/env python
"""
Setup for sart
"""
from setuptools import setup
from subprocess import CalledProcessError, check_output


# The following two functions were taken from the repo: https://github.com/pyfidelity/setuptools-git-version/blob/master/setuptools_git_version.py

def format_version(version, fmt="{tag}.dev{commitcount}+{gitsha}"):
    parts = version.split("-")
    if len(parts) < 3:
        return "0.0.0+" + parts[0] if parts[0] else "0.0.0"
    dirty = parts[-1] == "dirty"
    if dirty:
        parts = parts[:-1]
    tag, count, sha = "-".join(parts[:-2]), parts[-2], parts[-1]
    if count == "0" and not dirty:
        return tag
    return fmt.format(tag=tag, commitcount=count, gitsha=sha.lstrip("g"))


def get_git_version():
    try:
        git_version = check_output("git describe --tags --long --dirty --always".split()).decode('utf-8').strip()
    except (CalledProcessError, OSError):
        return "0.0.0"
    return format_version(version=git_version)


setup(
    name="sart",
    version=get_git_version(),
    description="Spherical-average Radon toolkit: inversion, ghosts and left-right resolution for 2D SAR",
    python_requires=">=3.8",
    packages=['sart'],
    package_data={'sart': ['data/*.ini']},
    install_requires=['numpy>=1.21', 'scipy>=1.6', 'astropy>=4.0'],
    extras_require={'test': ['pytest>=6']},
    scripts=[
        "scripts/sart",
    ],
)
