# This file makes 'utils' a Python package
