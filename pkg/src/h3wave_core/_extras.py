"""Install-checker and guards for dependencies installable through 'extras'.

The ``*_INSTALLED`` constants reveal whether the dependency is installed with a supported version.
The :py:func:`install_guard_tomli` guard is intended for use inside functions that read TOML
config files on Python versions without :py:mod:`tomllib`.

Example usage:

.. code-block:: python

    from h3wave_core import _extras

    if _extras.TOMLI_INSTALLED:
        import tomli


    def load(path):
        _extras.install_guard_tomli(tomllib_imported=False)
        return tomli.loads(path.read_text())
"""

from __future__ import annotations

import importlib
import importlib.metadata
import logging
import typing as t

logger = logging.getLogger(__name__)


ExtraDependencies = t.Literal["tomli"]
"""List of all dependencies installable through extras."""


class DependencyInfos(t.TypedDict):
    """Information about a dependency."""

    min_version: tuple[int, ...]
    extra: str


ExtraDependenciesInfos: dict[ExtraDependencies, DependencyInfos] = {
    "tomli": DependencyInfos(min_version=(2, 0), extra="toml"),
}
"""Dependency map with their min. supported version and extra by which they can be installed."""


def is_installed_with_supported_version(package: ExtraDependencies) -> bool:
    """Check if the package is installed and has the minimum required version.

    :param package: Name of package to check
    :return: Bool if package is installed with supported version
    """
    logger.debug("Check if package is installed with supported version: '%s'.", package)
    try:
        importlib.import_module(package)
    except ImportError:
        return False

    version: str = importlib.metadata.version(package)
    version_tuple = tuple(int(v) for v in version.split(".")[:3] if v.isdigit())

    return version_tuple >= ExtraDependenciesInfos[package]["min_version"]


TOMLI_INSTALLED = is_installed_with_supported_version("tomli")


ExtraDependenciesInstalled: dict[ExtraDependencies, bool] = {
    "tomli": TOMLI_INSTALLED,
}


def install_guard_tomli(*, tomllib_imported: bool) -> None:
    """Guard TOML config loading and throw :py:exc:`ModuleNotFoundError` without a TOML parser.

    :param tomllib_imported: If tomllib is imported
    :raises ModuleNotFoundError: When neither ``tomllib`` nor ``tomli`` is available.
    """
    if tomllib_imported or ExtraDependenciesInstalled["tomli"] is True:
        return

    extra = ExtraDependenciesInfos["tomli"]["extra"]

    msg = (
        f"tomllib could not be imported and no supported version of tomli installed. "
        f"Install h3wave-core with {extra} extra (h3wave-core[{extra}]) or install a "
        "supported version of tomli yourself."
    )
    raise ModuleNotFoundError(msg)
