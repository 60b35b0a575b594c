"""
Sensor network localization by canonical duality.
Contains problem instances, the primal objective, the canonical dual and
the perturbation-ladder solver built on top of them.
"""

import logging
import os

_level = os.environ.get("SNL_LOG_LEVEL", "WARNING").upper()
logging.getLogger(__name__).setLevel(getattr(logging, _level, logging.WARNING))
logging.getLogger(__name__).addHandler(logging.NullHandler())
