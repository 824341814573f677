# This file makes the model directory a Python package
