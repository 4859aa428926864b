"""Decision procedures for dense-timed Petri nets.

This package decides zenoness, token liveness, syntactic boundedness and
non-termination of timed Petri nets, from Python or from the command line.

Usage:
    tpnv --help
    tpnv zeno nets/nasty.tpn nets/nasty-m0.mrk
    tpnv bounded nets/pump.tpn nets/pump.mrk --dot tree.dot
"""

from tpnv.main import app

__all__ = ["app"]

__version__ = "0.1.0"
