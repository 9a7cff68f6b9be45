"""
Projection pursuit Monge map estimation between empirical samples.
This project is licensed under the terms of the MIT license. See the LICENSE file.
"""
# For now, this project only support Python 3.9 and above.
import sys

if sys.version_info < (3, 9):
    sys.exit("Python 3.9 or above is required.")
__authors__ = ("ppmmpy developers",)
__version__ = "0.1.0.dev"
