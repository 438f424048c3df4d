'''
Initialise the rich library Console object as a global. Status lines go to stderr, so that reports
written to stdout stay machine-readable.
'''
from rich.console import Console

console = Console(stderr=True)
