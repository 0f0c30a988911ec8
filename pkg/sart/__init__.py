"""
sart: numerical inversion of the spherical mean (circular Radon) transform for
two dimensional SAR imaging.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version('sart')
except PackageNotFoundError:
    __version__ = 'unknown'
