"""Allow ``python -m rydberg_mtp``."""

from rydberg_mtp.main import main

if __name__ == "__main__":
    raise SystemExit(main())
