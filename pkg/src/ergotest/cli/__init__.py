"""Command-line front end for ergotest."""
