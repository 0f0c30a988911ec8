"""
Locates the scenario files shipped in the sart data directory.
"""

import glob
import os

datadir = os.path.join(os.path.dirname(__file__), 'data')


def scenario_path(name):
    """Path of the bundled scenario file `name`.ini."""
    return os.path.join(datadir, name + '.ini')


def bundled_scenarios():
    """Names of every bundled scenario file."""
    return sorted(os.path.splitext(os.path.basename(p))[0] for p in glob.glob(os.path.join(datadir, '*.ini')))
