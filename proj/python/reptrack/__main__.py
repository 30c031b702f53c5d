import sys

from . import _reptrack


def main():
    return _reptrack.run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
