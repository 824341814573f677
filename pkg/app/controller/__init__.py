# This file makes the controller directory a Python package 