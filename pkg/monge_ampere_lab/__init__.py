"""Discrete Monge-Ampere obstacle solver, barrier calculus and semi-discrete transport experiments."""

import json
import os

with open(os.path.join(os.path.dirname(__file__), 'manifest.json'), 'r', encoding='utf-8') as _file:
    __version__ = json.load(_file)['version']
