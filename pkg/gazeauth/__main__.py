"""
Entry point for running GazeAuth as a module.

Usage: python -m gazeauth [command] [options]
"""
from .cli import main

if __name__ == "__main__":
    main()
