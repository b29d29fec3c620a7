"""Runtime provenance recorded in manifests and printed by ``check-runtime``."""

from __future__ import annotations

import platform
import sys
from importlib import metadata

from rydberg_mtp.parallel import THREADS_ENV, resolve_threads

PACKAGES = ("numpy", "scipy", "pydantic")
DISTRIBUTION = "rydberg-mtp"


def package_version() -> str:
    """Installed version of this package, or ``unknown`` from a source tree."""
    try:
        return metadata.version(DISTRIBUTION)
    except metadata.PackageNotFoundError:
        return "unknown"


def collect_provenance(
    threads: int | None = None, argv: list[str] | None = None
) -> dict[str, object]:
    """Describe the interpreter, numerical libraries and invocation."""
    versions: dict[str, str] = {}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "missing"
    return {
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "packages": versions,
        "rydberg_mtp": package_version(),
        "threads": resolve_threads(threads),
        "command_line": list(sys.argv if argv is None else argv),
    }


def print_runtime_report() -> None:
    """Print a human-readable summary of the numerical runtime."""
    report = collect_provenance()
    print("=" * 60)
    print("  rydberg-mtp runtime check")
    print("=" * 60)
    print(f"  Python:      {report['python']}")
    print(f"  Platform:    {report['platform']}")
    print(f"  Version:     {report['rydberg_mtp']}")
    print(f"  Threads:     {report['threads']} (override with {THREADS_ENV})")
    print()
    packages = report["packages"]
    assert isinstance(packages, dict)
    for name, version in packages.items():
        ok = version != "missing"
        marker = "+" if ok else "x"
        status = f"v{version}" if ok else "MISSING"
        print(f"  [{marker}] {name:15s} {status}")
    print("=" * 60)
