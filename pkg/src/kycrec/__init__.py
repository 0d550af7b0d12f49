"""KYC-tiered recommendation engine with a synthetic evaluation harness."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("kycrec")
except PackageNotFoundError:
    __version__ = "0.0.0+unknown"
