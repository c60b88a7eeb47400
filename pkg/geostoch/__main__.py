"""Allow running as: python -m geostoch run <config> [options]"""

from geostoch.cli import main

if __name__ == "__main__":
    main()
