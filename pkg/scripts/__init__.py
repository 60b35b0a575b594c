"""
Command-line entry points for generating, solving, plotting and benchmarking.
"""
