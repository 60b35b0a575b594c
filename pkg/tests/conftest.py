#!/usr/bin/env python3
"""
Shared pytest configuration: ``long`` tests only run with SNL_LONG_TESTS=1.
"""

import os

import pytest


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SNL_LONG_TESTS") == "1":
        return
    skip_long = pytest.mark.skip(reason="set SNL_LONG_TESTS=1 to run")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip_long)
