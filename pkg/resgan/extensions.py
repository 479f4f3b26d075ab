"""Shared process-wide objects."""
from rich.console import Console

# Diagnostics, progress and log output
console = Console(stderr=True)

# Command results
output = Console()
